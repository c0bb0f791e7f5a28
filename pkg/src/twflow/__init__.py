"""Phase retrieval from intensity measurements via truncated Wirtinger flow.

Recovers x (up to a global phase) from y_i = |<a_i, x>|^2 using a truncated
spectral initialization followed by truncated Poisson-loss gradient descent,
either full-gradient (TWF) or incremental (ITWF). Gaussian and coded
diffraction pattern sensing models are built in; the `harness` module and the
`twflow` CLI reproduce the standard benchmark experiments at desk scale.
"""

from .core import (COMPLEX, REAL, RngStream, align_phase, as_signal, dist,
                   gaussian_vector)
from .metrics import empirical_snr, relative_rmse
from .sensing import (CdpSensing, GaussianSensing, ImageFormatError,
                      MeasurementSet, add_bounded_noise, measure_noiseless,
                      poissonize, read_pgm, write_pgm)
from .solver import (RunTrace, SolverConfig, StepSchedule, TruncationConfig,
                     block_gradient, effective_step, itwf_iteration,
                     iterate_gate_ok, measurement_gate_mask,
                     measurement_gate_ok, residual_gate_mask, solve, twf_pass,
                     wirtinger_gradient)
from .spectral import InitConfig, truncated_spectral_init

__all__ = [
    "COMPLEX", "REAL", "RngStream", "align_phase", "as_signal", "dist",
    "gaussian_vector", "empirical_snr", "relative_rmse", "CdpSensing",
    "GaussianSensing", "ImageFormatError", "MeasurementSet",
    "add_bounded_noise", "measure_noiseless", "poissonize", "read_pgm",
    "write_pgm", "RunTrace", "SolverConfig", "StepSchedule",
    "TruncationConfig", "block_gradient", "effective_step", "itwf_iteration",
    "iterate_gate_ok", "measurement_gate_mask", "measurement_gate_ok",
    "residual_gate_mask", "solve", "twf_pass", "wirtinger_gradient",
    "InitConfig", "truncated_spectral_init",
]

__version__ = "0.1.0"
