"""Hard-edge gap probabilities: Fredholm determinants, Painleve equations and
steepest-descent asymptotics, with cross-checks between them."""
from __future__ import annotations

from .kernels import HardEdgeParams, gap_log_det, gap_log_det_psi
from .painleve import asy_log_det_bessel, integrate_q, tau_alpha, tw_log_det

__all__ = [
    "HardEdgeParams",
    "asy_log_det_bessel",
    "gap_log_det",
    "gap_log_det_psi",
    "integrate_q",
    "tau_alpha",
    "tw_log_det",
]
__version__ = "0.1.0"
