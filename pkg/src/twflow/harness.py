"""Experiment presets, Monte-Carlo orchestration, config parsing, CSV output.

Four presets mirror the standard benchmark experiments at desk scale:

  success-sweep  success rate vs oversampling ratio m/n (Gaussian, noiseless)
  converge       relative error per pass, TWF vs both ITWF sampling variants
  cdp            image recovery from coded diffraction patterns, per-mask blocks
  snr-sweep      final relative MSE vs SNR under Poisson noise

Every trial owns RNG substreams derived from (seed, grid point, trial index),
so results do not depend on execution order and CSV output is reproducible
byte-for-byte from (spec, seed).
"""

import csv
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from .core import COMPLEX, REAL, RngStream, align_phase
from .metrics import empirical_snr, relative_rmse
from .sensing import (CdpSensing, GaussianSensing, measure_noiseless,
                      poissonize, read_pgm, write_pgm)
from .spectral import InitConfig, truncated_spectral_init
from .solver import SolverConfig, StepSchedule, TruncationConfig, solve


class ConfigError(Exception):
    """Unknown key, unparsable value, or broken invariant in an experiment config."""


PRESET_SUCCESS = "success-sweep"
PRESET_CONVERGE = "converge"
PRESET_CDP = "cdp"
PRESET_SNR = "snr-sweep"

CSV_FIELDS = {
    PRESET_SUCCESS: ("m_over_n", "algorithm", "success_rate"),
    PRESET_CONVERGE: ("pass", "algorithm", "rel_error"),
    PRESET_CDP: ("pass", "algorithm", "rel_error"),
    PRESET_SNR: ("snr", "algorithm", "final_rel_mse"),
}

# Substream roles within one trial.
_TRUTH, _MODEL, _NOISE, _INIT, _SOLVER_BASE = 0, 1, 2, 3, 4
# Pilot (step-tuning) trials live far away from the measured trial indices.
_PILOT_BASE = 1_000_000
# Effectively "never stop early": machine-zero errors still count as > this.
_NEVER_TOL = 1e-300


# ---------------------------------------------------------------------------
# Preset specs. Desk-scale defaults; .paper_scale() gives the full-size setup.

@dataclass(frozen=True)
class SuccessSweepSpec:
    n: int = 64
    m_over_n: tuple = (1.0, 2.0, 3.0, 4.0, 6.0, 10.0)
    trials: int = 25
    field: str = REAL
    power_iterations: int = 50
    max_passes: int = 1000
    success_tol: float = 1e-5
    step_candidates: tuple = (0.05, 0.1, 0.2, 0.4)
    pilot_trials: int = 3

    def __post_init__(self):
        _check_positive(self, "n", "trials", "power_iterations", "max_passes",
                        "pilot_trials")
        _check_grid(self, "m_over_n", "step_candidates")
        _check_field(self.field)
        if self.success_tol <= 0:
            raise ValueError("success_tol must be positive")

    @classmethod
    def paper_scale(cls):
        return cls(n=1000, m_over_n=(2.0, 3.0, 4.0, 5.0, 6.0), trials=100)


@dataclass(frozen=True)
class ConvergenceCurveSpec:
    n: int = 100
    m: int = 800
    trials: int = 1
    field: str = REAL
    power_iterations: int = 10
    max_passes: int = 200
    success_tol: float = 1e-5
    step_candidates: tuple = (0.05, 0.1, 0.2, 0.4)
    pilot_trials: int = 3

    def __post_init__(self):
        _check_positive(self, "n", "m", "trials", "power_iterations",
                        "max_passes", "pilot_trials")
        _check_grid(self, "step_candidates")
        _check_field(self.field)
        if self.success_tol <= 0:
            raise ValueError("success_tol must be positive")

    @classmethod
    def paper_scale(cls):
        return cls(n=1000, m=8000, max_passes=400)


@dataclass(frozen=True)
class CdpImageSpec:
    rows: int = 32
    cols: int = 32
    num_masks: int = 12
    passes: int = 10
    checkpoints: tuple = (0, 1, 2, 5, 10)
    trials: int = 1
    power_iterations: int = 50
    mu_twf: float = 0.2
    mu_itwf: float = 0.2
    image: str = ""

    def __post_init__(self):
        _check_positive(self, "rows", "cols", "num_masks", "passes", "trials",
                        "power_iterations")
        _check_grid(self, "checkpoints")
        if self.mu_twf <= 0 or self.mu_itwf <= 0:
            raise ValueError("step sizes must be positive")
        for p in self.checkpoints:
            if not (isinstance(p, int) and 0 <= p <= self.passes):
                raise ValueError("checkpoints must be integers in [0, passes]")
        if tuple(sorted(set(self.checkpoints))) != self.checkpoints:
            raise ValueError("checkpoints must be strictly increasing")

    @classmethod
    def paper_scale(cls):
        return cls(rows=320, cols=1280)


@dataclass(frozen=True)
class NoisySnrSweepSpec:
    n: int = 100
    m: int = 1000
    norm_sq: tuple = (10.0, 100.0, 1000.0, 10000.0, 100000.0)
    trials: int = 5
    passes: int = 60
    power_iterations: int = 50
    mu_twf: float = 0.2
    c_const: float = 0.1
    c_dim: float = 0.4

    def __post_init__(self):
        _check_positive(self, "n", "m", "trials", "passes", "power_iterations")
        _check_grid(self, "norm_sq")
        if any(v <= 0 for v in self.norm_sq):
            raise ValueError("norm_sq values must be positive")
        if self.mu_twf <= 0 or self.c_const <= 0 or self.c_dim <= 0:
            raise ValueError("step sizes must be positive")

    @classmethod
    def paper_scale(cls):
        return cls(n=1000, m=8000, trials=20)


PRESET_SPECS = {
    PRESET_SUCCESS: SuccessSweepSpec,
    PRESET_CONVERGE: ConvergenceCurveSpec,
    PRESET_CDP: CdpImageSpec,
    PRESET_SNR: NoisySnrSweepSpec,
}


def _check_positive(spec, *names):
    for name in names:
        if getattr(spec, name) < 1:
            raise ValueError(f"{name} must be >= 1")


def _check_grid(spec, *names):
    for name in names:
        if len(getattr(spec, name)) == 0:
            raise ValueError(f"{name} must be a nonempty grid")


def _check_field(field):
    if field not in (REAL, COMPLEX):
        raise ValueError(f"field must be 'real' or 'complex', got {field!r}")


# ---------------------------------------------------------------------------
# Flat key=value config files.

def parse_config(path):
    """Read `key = value` lines ('#' comments, blank lines ok) into a dict."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}")
    overrides = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        key, sep, raw = stripped.partition("=")
        key, raw = key.strip(), raw.strip()
        if not sep or not key or not raw:
            raise ConfigError(f"{path}:{lineno}: expected `key = value`")
        if key in overrides:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        overrides[key] = raw
    return overrides


def _coerce_scalar(raw, proto, key):
    if isinstance(proto, bool):
        low = raw.lower()
        if low in ("true", "1", "yes", "on"):
            return True
        if low in ("false", "0", "no", "off"):
            return False
        raise ConfigError(f"{key}: expected a boolean, got {raw!r}")
    if isinstance(proto, int):
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"{key}: expected an integer, got {raw!r}")
    if isinstance(proto, float):
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"{key}: expected a number, got {raw!r}")
    return raw


def _coerce(raw, proto, key):
    if isinstance(proto, tuple):
        tokens = [t.strip() for t in raw.split(",") if t.strip()]
        if not tokens:
            raise ConfigError(f"{key}: expected a comma-separated list")
        out = []
        for tok in tokens:
            try:
                out.append(int(tok))
            except ValueError:
                try:
                    out.append(float(tok))
                except ValueError:
                    raise ConfigError(f"{key}: bad list element {tok!r}")
        return tuple(out)
    return _coerce_scalar(raw, proto, key)


def apply_overrides(spec, overrides):
    """Apply parsed config overrides to a preset spec, validating every key."""
    known = {f.name for f in fields(spec)}
    coerced = {}
    for key, raw in overrides.items():
        if key not in known:
            raise ConfigError(f"unknown config key {key!r} for this preset "
                              f"(valid: {', '.join(sorted(known))})")
        coerced[key] = _coerce(raw, getattr(spec, key), key)
    try:
        return replace(spec, **coerced)
    except ValueError as exc:
        raise ConfigError(str(exc))


def build_spec(preset, scale="desk", overrides=None):
    """Construct a preset spec for the given scale and apply config overrides."""
    try:
        cls = PRESET_SPECS[preset]
    except KeyError:
        raise ConfigError(f"unknown preset {preset!r}")
    if scale == "desk":
        spec = cls()
    elif scale == "paper":
        spec = cls.paper_scale()
    else:
        raise ConfigError(f"unknown scale {scale!r}")
    if overrides:
        spec = apply_overrides(spec, overrides)
    if preset == PRESET_CDP and spec.image and not Path(spec.image).is_file():
        raise ConfigError(f"image file not found: {spec.image}")
    return spec


# ---------------------------------------------------------------------------
# Shared trial machinery.

def _trial_rng(seed, grid_index, trial):
    return RngStream(seed).substream(grid_index).substream(trial)


def _draw_truth(rng, n, field, norm=1.0):
    x = rng.gaussian_vector(n, field)
    return (norm / np.linalg.norm(x)) * x


def solve_tagged(tag, z0, model, mset, truth, step, rng, max_passes,
                 success_tol, increment="single_sample", trace_every=1):
    """Run one named algorithm variant and return its RunTrace.

    Tags: "twf" (full gradient, residual gate), "itwf" / "itwf_const"
    (incremental without replacement), "itwf_with" (with replacement),
    "itwf_dim" (without replacement, diminishing schedule). For single-sample
    increments `step` is the per-pass scale c of mu = c / n; for full-gradient
    and per-mask-block runs it is the literal mu (both average their batch).
    """
    if tag == "twf":
        sampling, kind = "full_gradient", "constant"
        mu0 = step
    elif tag in ("itwf", "itwf_const"):
        sampling, kind = "without_replacement", "constant"
        mu0 = step / model.n if increment == "single_sample" else step
    elif tag == "itwf_with":
        sampling, kind = "with_replacement", "constant"
        mu0 = step / model.n if increment == "single_sample" else step
    elif tag == "itwf_dim":
        sampling, kind = "without_replacement", "diminishing"
        mu0 = step / model.n if increment == "single_sample" else step
    else:
        raise ValueError(f"unknown algorithm tag {tag!r}")
    cfg = SolverConfig(
        trunc=TruncationConfig(),
        schedule=StepSchedule(kind, mu0),
        rng=rng,
        sampling=sampling,
        increment=increment,
        max_passes=max_passes,
        success_tol=success_tol,
        trace_every=trace_every,
    )
    return solve(z0, model, mset, cfg, truth=truth)


def _gaussian_instance(trial_rng, n, m, field, norm=1.0):
    x = _draw_truth(trial_rng.substream(_TRUTH), n, field, norm)
    model = GaussianSensing.draw(trial_rng.substream(_MODEL), m, n, field)
    mset = measure_noiseless(model, x)
    return x, model, mset


def _init_from(trial_rng, model, mset, power_iterations):
    cfg = InitConfig(rng=trial_rng.substream(_INIT),
                     power_iterations=power_iterations)
    return truncated_spectral_init(model, mset, cfg)


def tune_step(candidates, run_candidate):
    """Pick the step with the most pilot successes, then fewest median passes.

    run_candidate(step) must return a list of RunTrace. Ties fall to the
    smaller step, which keeps the choice deterministic and conservative.
    """
    best_key, best_step = None, None
    for step in candidates:
        traces = run_candidate(step)
        succ = sum(1 for t in traces if t.succeeded)
        med = (float(np.median([t.passes_used for t in traces if t.succeeded]))
               if succ else float("inf"))
        key = (-succ, med, step)
        if best_key is None or key < best_key:
            best_key, best_step = key, step
    return best_step


def _tune_gaussian(spec, seed, grid_index, n, m, tags):
    """Tune one step per algorithm tag on pilot instances of the same shape."""
    pilots = []
    for j in range(spec.pilot_trials):
        rng = _trial_rng(seed, grid_index, _PILOT_BASE + j)
        x, model, mset = _gaussian_instance(rng, n, m, spec.field)
        z0 = _init_from(rng, model, mset, spec.power_iterations)
        pilots.append((rng, x, model, mset, z0))
    tuned = {}
    for k, tag in enumerate(tags):
        def run_candidate(step, _k=k, _tag=tag):
            traces = []
            for ci, (rng, x, model, mset, z0) in enumerate(pilots):
                cand = int(round(step * 1000))
                solver_rng = rng.substream(_SOLVER_BASE + _k).substream(cand)
                traces.append(solve_tagged(
                    _tag, z0, model, mset, x, step, solver_rng,
                    spec.max_passes, spec.success_tol,
                    trace_every=spec.max_passes))
            return traces
        tuned[tag] = tune_step(spec.step_candidates, run_candidate)
    return tuned


# ---------------------------------------------------------------------------
# Preset: success rate vs oversampling ratio.

SUCCESS_ALGORITHMS = ("twf", "itwf")


def success_trial(spec, seed, grid_index, trial, steps):
    """One trial at one grid point; returns {tag: RunTrace} on a shared instance."""
    m = int(round(spec.m_over_n[grid_index] * spec.n))
    rng = _trial_rng(seed, grid_index, trial)
    x, model, mset = _gaussian_instance(rng, spec.n, m, spec.field)
    z0 = _init_from(rng, model, mset, spec.power_iterations)
    out = {}
    for k, tag in enumerate(SUCCESS_ALGORITHMS):
        out[tag] = solve_tagged(
            tag, z0, model, mset, x, steps[tag],
            rng.substream(_SOLVER_BASE + k),
            spec.max_passes, spec.success_tol, trace_every=spec.max_passes)
    return out


def run_success_rate_sweep(spec, seed):
    """Success fraction per (m/n, algorithm); steps tuned per grid point."""
    rows = []
    for gi, ratio in enumerate(spec.m_over_n):
        m = int(round(ratio * spec.n))
        steps = _tune_gaussian(spec, seed, gi, spec.n, m, SUCCESS_ALGORITHMS)
        wins = {tag: 0 for tag in SUCCESS_ALGORITHMS}
        for t in range(spec.trials):
            traces = success_trial(spec, seed, gi, t, steps)
            for tag, trace in traces.items():
                wins[tag] += int(trace.succeeded)
        for tag in SUCCESS_ALGORITHMS:
            rows.append({"m_over_n": ratio, "algorithm": tag,
                         "success_rate": wins[tag] / spec.trials})
    return rows


# ---------------------------------------------------------------------------
# Preset: convergence curves from a shared init.

CONVERGE_ALGORITHMS = ("twf", "itwf", "itwf_with")


def tune_converge_steps(spec, seed):
    return _tune_gaussian(spec, seed, 0, spec.n, spec.m, CONVERGE_ALGORITHMS)


def converge_trial(spec, seed, trial, steps):
    """All three algorithms on one instance from one shared init."""
    rng = _trial_rng(seed, 0, trial)
    x, model, mset = _gaussian_instance(rng, spec.n, spec.m, spec.field)
    z0 = _init_from(rng, model, mset, spec.power_iterations)
    out = {}
    for k, tag in enumerate(CONVERGE_ALGORITHMS):
        out[tag] = solve_tagged(
            tag, z0, model, mset, x, steps[tag],
            rng.substream(_SOLVER_BASE + k),
            spec.max_passes, spec.success_tol)
    return out


def run_convergence_curve(spec, seed):
    """Median relative error per (algorithm, pass) across trials."""
    steps = tune_converge_steps(spec, seed)
    curves = {tag: {} for tag in CONVERGE_ALGORITHMS}
    for t in range(spec.trials):
        traces = converge_trial(spec, seed, t, steps)
        for tag, trace in traces.items():
            for p, err in zip(trace.recorded_passes, trace.rel_errors):
                curves[tag].setdefault(p, []).append(err)
    rows = []
    for tag in CONVERGE_ALGORITHMS:
        for p in sorted(curves[tag]):
            rows.append({"pass": p, "algorithm": tag,
                         "rel_error": float(np.median(curves[tag][p]))})
    return rows


# ---------------------------------------------------------------------------
# Preset: image recovery from coded diffraction patterns.

CDP_ALGORITHMS = ("twf", "itwf")


def synthetic_image(rows, cols):
    """Deterministic grayscale test image: gradients, sinusoids, a block step."""
    r = np.linspace(0.0, 1.0, rows)[:, None]
    c = np.linspace(0.0, 1.0, cols)[None, :]
    img = (0.45 + 0.2 * np.sin(2 * np.pi * (2.0 * r + 3.0 * c))
           + 0.15 * np.cos(2 * np.pi * 5.0 * r * c) + 0.1 * (r + c) / 2.0)
    img[int(0.25 * rows):int(0.5 * rows), int(0.25 * cols):int(0.5 * cols)] += 0.2
    return np.clip(img, 0.0, 1.0)


def _cdp_truth(spec):
    if spec.image:
        img = read_pgm(spec.image)
    else:
        img = synthetic_image(spec.rows, spec.cols)
    if not np.any(img):
        raise ConfigError("image is identically zero; nothing to recover")
    return img


def cdp_trial(spec, seed, trial, want_iterates=False):
    """Run TWF and ITWF on one coded-diffraction instance of the spec's image.

    Returns (errors, iterates): errors[tag] is the relative RMSE at passes
    0..spec.passes; iterates[tag][p] holds the iterate at each checkpoint
    pass when want_iterates is set (used for image output).
    """
    img = _cdp_truth(spec)
    x = img.ravel().astype(np.complex128)
    rng = _trial_rng(seed, 0, trial)
    model = CdpSensing.draw(rng.substream(_MODEL), x.shape[0], spec.num_masks)
    mset = measure_noiseless(model, x)
    z0 = _init_from(rng, model, mset, spec.power_iterations)

    mus = {"twf": spec.mu_twf, "itwf": spec.mu_itwf}
    errors, iterates = {}, {}
    for k, tag in enumerate(CDP_ALGORITHMS):
        solver_rng = rng.substream(_SOLVER_BASE + k)
        z = z0
        errs = [relative_rmse(z, x)]
        snaps = {0: z} if 0 in spec.checkpoints else {}
        increment = "per_mask_block" if tag == "itwf" else "single_sample"
        for p in range(1, spec.passes + 1):
            trace = solve_tagged(tag, z, model, mset, x, mus[tag], solver_rng,
                                 max_passes=1, success_tol=_NEVER_TOL,
                                 increment=increment)
            z = trace.final_iterate
            errs.append(trace.rel_errors[-1])
            if want_iterates and p in spec.checkpoints:
                snaps[p] = z
        errors[tag] = errs
        iterates[tag] = snaps
    return (errors, iterates, img) if want_iterates else (errors, None, img)


def _iterate_to_image(z, x, shape):
    img = align_phase(z, x).real.reshape(shape)
    return np.clip(img, 0.0, 1.0)


def run_cdp_image(spec, seed, out_dir=None):
    """Median relative error per (algorithm, pass); PGM snapshots from trial 0."""
    curves = {tag: {} for tag in CDP_ALGORITHMS}
    for t in range(spec.trials):
        want = out_dir is not None and t == 0
        errors, iterates, img = cdp_trial(spec, seed, t, want_iterates=want)
        for tag in CDP_ALGORITHMS:
            for p, err in enumerate(errors[tag]):
                curves[tag].setdefault(p, []).append(err)
        if want:
            x = img.ravel().astype(np.complex128)
            out = Path(out_dir)
            write_pgm(out / "cdp_original.pgm", img)
            for tag in CDP_ALGORITHMS:
                for p, z in sorted(iterates[tag].items()):
                    write_pgm(out / f"cdp_{tag}_pass{p:02d}.pgm",
                              _iterate_to_image(z, x, img.shape))
    rows = []
    for tag in CDP_ALGORITHMS:
        for p in sorted(curves[tag]):
            rows.append({"pass": p, "algorithm": tag,
                         "rel_error": float(np.median(curves[tag][p]))})
    return rows


# ---------------------------------------------------------------------------
# Preset: final MSE vs SNR under Poisson noise.

SNR_ALGORITHMS = ("twf", "itwf_const", "itwf_dim")


def snr_trial(spec, seed, grid_index, trial):
    """One Poisson-noise trial at one signal-energy point.

    Returns (snr, {tag: final_rel_mse}) where snr is the measured ratio of
    fourth-moment signal energy to realized noise energy.
    """
    norm_sq = spec.norm_sq[grid_index]
    rng = _trial_rng(seed, grid_index, trial)
    x = _draw_truth(rng.substream(_TRUTH), spec.n, REAL, np.sqrt(norm_sq))
    model = GaussianSensing.draw(rng.substream(_MODEL), spec.m, spec.n, REAL)
    clean = measure_noiseless(model, x)
    mset = poissonize(clean, rng.substream(_NOISE))
    eta = mset.y - clean.y
    snr = empirical_snr(model, x, eta)
    z0 = _init_from(rng, model, mset, spec.power_iterations)
    steps = {"twf": spec.mu_twf, "itwf_const": spec.c_const,
             "itwf_dim": spec.c_dim}
    mses = {}
    for k, tag in enumerate(SNR_ALGORITHMS):
        trace = solve_tagged(tag, z0, model, mset, x, steps[tag],
                             rng.substream(_SOLVER_BASE + k),
                             max_passes=spec.passes, success_tol=_NEVER_TOL,
                             trace_every=spec.passes)
        mses[tag] = relative_rmse(trace.final_iterate, x) ** 2
    return snr, mses


def run_noisy_snr_sweep(spec, seed):
    """Mean SNR and mean final relative MSE per (energy point, algorithm)."""
    rows = []
    for gi in range(len(spec.norm_sq)):
        snrs, mses = [], {tag: [] for tag in SNR_ALGORITHMS}
        for t in range(spec.trials):
            snr, trial_mses = snr_trial(spec, seed, gi, t)
            snrs.append(snr)
            for tag in SNR_ALGORITHMS:
                mses[tag].append(trial_mses[tag])
        mean_snr = float(np.mean(snrs))
        for tag in SNR_ALGORITHMS:
            rows.append({"snr": mean_snr, "algorithm": tag,
                         "final_rel_mse": float(np.mean(mses[tag]))})
    return rows


# ---------------------------------------------------------------------------
# CSV output and the preset dispatcher.

def write_csv(path, fieldnames, rows):
    with open(path, "w", newline="", encoding="ascii") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def run_preset(preset, spec, seed, out_dir):
    """Run a preset, write `<preset>.csv` (and PGMs for cdp); returns the rows."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if preset == PRESET_SUCCESS:
        rows = run_success_rate_sweep(spec, seed)
    elif preset == PRESET_CONVERGE:
        rows = run_convergence_curve(spec, seed)
    elif preset == PRESET_CDP:
        rows = run_cdp_image(spec, seed, out_dir=out)
    elif preset == PRESET_SNR:
        rows = run_noisy_snr_sweep(spec, seed)
    else:
        raise ConfigError(f"unknown preset {preset!r}")
    write_csv(out / f"{preset}.csv", CSV_FIELDS[preset], rows)
    return rows
