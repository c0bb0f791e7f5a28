"""Truncated Wirtinger flow for the Poisson loss: full-gradient and incremental solvers.

The loss per measurement is l(y, |<a, z>|^2) with l(y, u) = u - y log u, whose
Wirtinger gradient is ((2|<a,z>|^2 - 2y) / conj(<a,z>)) * a. Both solvers damp
the heavy tails of that gradient by skipping measurements that fail cheap
truncation tests:

  - iterate gate:      alpha_z_lb <= |<a_i, z>| / ||z|| <= alpha_z_ub
  - residual gate:     |y_i - |<a_i,z>|^2| <= (alpha_h / m) * sum_j |y_j - |<a_j,z>|^2|
  - measurement gate:  y_i <= alpha_x^2 * mean(y)

The residual gate needs a full pass over the data, so the full-gradient solver
uses it while the incremental solver swaps in the measurement gate, which
depends only on the fixed data and is precomputed once as a bitmask.
"""

import time
from dataclasses import dataclass

import numpy as np

from .core import RngStream, as_signal
from .metrics import relative_rmse

SAMPLING_MODES = ("without_replacement", "with_replacement", "full_gradient")
INCREMENT_MODES = ("single_sample", "per_mask_block")
SCHEDULE_KINDS = ("constant", "diminishing")


@dataclass
class TruncationConfig:
    alpha_z_lb: float = 0.3
    alpha_z_ub: float = 5.0
    alpha_x: float = 5.0
    alpha_h: float = 5.0
    enable_iterate_gate: bool = True
    enable_data_gate: bool = True

    def __post_init__(self):
        if not 0 < self.alpha_z_lb < self.alpha_z_ub:
            raise ValueError("need 0 < alpha_z_lb < alpha_z_ub")
        if self.alpha_x <= 0 or self.alpha_h <= 0:
            raise ValueError("alpha_x and alpha_h must be positive")


@dataclass
class StepSchedule:
    """Step size as a function of the pass number (1-based)."""

    kind: str
    mu0: float

    def __post_init__(self):
        if self.kind not in SCHEDULE_KINDS:
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if self.mu0 <= 0:
            raise ValueError("mu0 must be positive")

    @classmethod
    def constant(cls, mu0):
        return cls("constant", mu0)

    @classmethod
    def diminishing(cls, mu0):
        return cls("diminishing", mu0)


def effective_step(schedule, pass_index):
    """mu0 for a constant schedule, mu0 / pass_index for a diminishing one."""
    if pass_index < 1:
        raise ValueError("pass_index counts from 1")
    if schedule.kind == "constant":
        return schedule.mu0
    return schedule.mu0 / pass_index


@dataclass
class SolverConfig:
    trunc: TruncationConfig
    schedule: StepSchedule
    rng: RngStream
    sampling: str = "without_replacement"
    increment: str = "single_sample"
    max_passes: int = 100
    success_tol: float = 1e-5
    trace_every: int = 1

    def __post_init__(self):
        if self.sampling not in SAMPLING_MODES:
            raise ValueError(f"unknown sampling mode {self.sampling!r}")
        if self.increment not in INCREMENT_MODES:
            raise ValueError(f"unknown increment mode {self.increment!r}")
        if self.max_passes < 0:
            raise ValueError("max_passes must be >= 0")
        if self.success_tol <= 0:
            raise ValueError("success_tol must be positive")
        if self.trace_every < 1:
            raise ValueError("trace_every must be >= 1")


@dataclass
class RunTrace:
    """What a solve() call did, pass by pass.

    rel_errors holds the phase-invariant relative error against the ground
    truth when one was supplied, otherwise the relative change of the iterate
    across the pass. Entry 0 is the error of the initial iterate (0.0 in the
    no-truth case), and recorded_passes says which pass each entry belongs to
    (trace_every thins the recording; the final pass is always kept).
    """

    rel_errors: list
    recorded_passes: list
    passes_used: int
    succeeded: bool
    final_iterate: np.ndarray
    seed_record: tuple
    wall_time: float


def wirtinger_gradient(y_i, c_i, a_i):
    """Gradient of the Poisson loss at one measurement, given c_i = <a_i, z>.

    Returns the zero vector when c_i == 0 (the loss is not differentiable
    there, and the iterate gate never lets such terms through anyway).
    """
    if c_i == 0:
        return np.zeros_like(a_i)
    coef = (2.0 * (c_i.real ** 2 + c_i.imag ** 2) - 2.0 * y_i) / np.conj(c_i)
    return coef * a_i


def iterate_gate_ok(c, z_norm, trunc):
    """The band test alpha_z_lb <= |c| / ||z|| <= alpha_z_ub, boundaries kept.

    Works elementwise on arrays of inner products as well as on scalars.
    """
    if z_norm <= 0:
        raise ValueError("iterate norm must be positive")
    mag = np.abs(c)
    return (mag >= trunc.alpha_z_lb * z_norm) & (mag <= trunc.alpha_z_ub * z_norm)


def measurement_gate_ok(y_i, mean_y, trunc):
    """Static per-sample gate y_i <= alpha_x^2 * mean(y); never reads the iterate."""
    if mean_y <= 0:
        raise ValueError("mean measurement must be positive")
    return y_i <= (trunc.alpha_x ** 2) * mean_y


def measurement_gate_mask(mset, trunc):
    """The measurement gate for all m samples at once, precomputable as a bitmask."""
    return mset.y <= (trunc.alpha_x ** 2) * mset.mean_y


def residual_gate_mask(mset, model, z, trunc):
    """Adaptive gate comparing each residual to alpha_h times the mean residual."""
    c = model.inner_products(z)
    return _residual_mask(mset.y, np.abs(c) ** 2, trunc)


def _residual_mask(y, intensities, trunc):
    resid = np.abs(y - intensities)
    return resid <= (trunc.alpha_h / y.shape[0]) * np.sum(resid)


def twf_pass(z, model, mset, mu, trunc):
    """One full truncated-gradient pass: z - (mu/m) * sum of gated gradients."""
    c = model.inner_products(z)
    absc2 = (c * np.conj(c)).real if np.iscomplexobj(c) else c * c
    keep = absc2 > 0
    if trunc.enable_iterate_gate:
        keep &= iterate_gate_ok(c, np.linalg.norm(z), trunc)
    if trunc.enable_data_gate:
        keep &= _residual_mask(mset.y, absc2, trunc)
    coef = np.zeros(model.m, dtype=c.dtype)
    np.divide(2.0 * absc2 - 2.0 * mset.y, np.conj(c), out=coef, where=keep)
    return z - (mu / model.m) * model.adjoint(coef)


def itwf_iteration(z, idx, model, mset, mu, trunc, keep_mask=None):
    """One incremental step on measurement idx; returns z unchanged if gated off.

    keep_mask is the precomputed measurement gate; passing None means the
    gate is evaluated on the spot (same result, just not amortized).
    """
    y_i = mset.y[idx]
    if trunc.enable_data_gate:
        ok = keep_mask[idx] if keep_mask is not None \
            else measurement_gate_ok(y_i, mset.mean_y, trunc)
        if not ok:
            return z
    a = model.row(idx)
    c = np.vdot(a, z)
    if trunc.enable_iterate_gate:
        if not iterate_gate_ok(c, np.linalg.norm(z), trunc):
            return z
    if c == 0:
        return z
    coef = (2.0 * (c.real ** 2 + c.imag ** 2) - 2.0 * y_i) / np.conj(c)
    return z - mu * (coef * a)


def block_gradient(z, model, mset, block, trunc, keep_mask=None):
    """Summed gated gradient of one diffraction-pattern block (O(n log n)).

    The block plays the role of a single "sample" for incremental updates on
    coded diffraction patterns, where individual rows are never materialized.
    """
    c = model.mask_forward(block, z)
    absc2 = (c * np.conj(c)).real
    y_block = mset.y[model.block_slice(block)]
    keep = absc2 > 0
    if trunc.enable_iterate_gate:
        keep &= iterate_gate_ok(c, np.linalg.norm(z), trunc)
    if trunc.enable_data_gate:
        if keep_mask is not None:
            keep &= keep_mask[model.block_slice(block)]
        else:
            keep &= y_block <= (trunc.alpha_x ** 2) * mset.mean_y
    coef = np.zeros(model.n, dtype=np.complex128)
    np.divide(2.0 * absc2 - 2.0 * y_block, np.conj(c), out=coef, where=keep)
    return model.mask_adjoint(block, coef)


def _draw_order(rng, count, sampling):
    if sampling == "with_replacement":
        return rng.gen.integers(0, count, size=count)
    return rng.gen.permutation(count)


def solve(z0, model, mset, cfg, truth=None):
    """Run truncated Wirtinger flow from z0 and trace the result.

    sampling="full_gradient" gives the classic full-pass algorithm (one
    truncated gradient step per pass, residual gate); the other modes run one
    pass = m incremental steps (or one step per diffraction block when
    increment="per_mask_block"), gated by the precomputed measurement mask.

    With a ground truth the run stops as soon as the relative error drops
    below cfg.success_tol; without one it stops when a pass moves the iterate
    by less than success_tol relative to its norm. A non-finite iterate ends
    the run immediately with succeeded=False instead of raising.

    The run consumes draws from cfg.rng; to replay a run bit-identically,
    rebuild the stream from the trace's seed_record.
    """
    z = as_signal(z0, model.field).copy()
    if z.shape[0] != model.n:
        raise ValueError(f"iterate length {z.shape[0]} != model n {model.n}")
    if mset.m != model.m:
        raise ValueError(f"measurement count {mset.m} != model m {model.m}")
    if np.linalg.norm(z) == 0:
        raise ValueError("initial iterate must be nonzero")
    if truth is not None:
        truth = as_signal(truth, model.field)
        if truth.shape != z.shape:
            raise ValueError("truth length must match the iterate")

    incremental = cfg.sampling != "full_gradient"
    by_block = incremental and cfg.increment == "per_mask_block"
    if by_block and not hasattr(model, "mask_forward"):
        raise ValueError("per_mask_block updates need a coded-diffraction model")
    keep_mask = None
    if incremental and cfg.trunc.enable_data_gate:
        keep_mask = measurement_gate_mask(mset, cfg.trunc)

    def current_error(z_prev):
        if truth is not None:
            return relative_rmse(z, truth)
        denom = np.linalg.norm(z_prev)
        return float(np.linalg.norm(z - z_prev) / denom) if denom > 0 else np.inf

    t0 = time.perf_counter()
    rel_errors = [relative_rmse(z, truth) if truth is not None else 0.0]
    recorded = [0]
    succeeded = False
    passes_used = 0

    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        for p in range(1, cfg.max_passes + 1):
            mu = effective_step(cfg.schedule, p)
            z_prev = z
            if not incremental:
                z = twf_pass(z, model, mset, mu, cfg.trunc)
            elif by_block:
                scaled = mu / model.n
                for l in _draw_order(cfg.rng, model.num_masks, cfg.sampling):
                    z = z - scaled * block_gradient(z, model, mset, l,
                                                    cfg.trunc, keep_mask)
            else:
                for i in _draw_order(cfg.rng, model.m, cfg.sampling):
                    z = itwf_iteration(z, i, model, mset, mu, cfg.trunc, keep_mask)
            passes_used = p

            finite = bool(np.all(np.isfinite(z)))
            err = current_error(z_prev) if finite else np.inf
            stop = (not finite) or err < cfg.success_tol or p == cfg.max_passes
            if stop or p % cfg.trace_every == 0:
                rel_errors.append(float(err))
                recorded.append(p)
            if not finite:
                break
            if err < cfg.success_tol:
                succeeded = True
                break

    return RunTrace(
        rel_errors=rel_errors,
        recorded_passes=recorded,
        passes_used=passes_used,
        succeeded=succeeded,
        final_iterate=z,
        seed_record=(cfg.rng.seed, cfg.rng.stream_id),
        wall_time=time.perf_counter() - t0,
    )
