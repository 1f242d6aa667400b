"""Change-point localization by the argmax of the CUSUM spectral norm."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cusum import CusumProcess, q_weight
from .detect import C_STAR
from .errors import ValidationError
from .graph_core import DynamicNetwork
from .spectral import SpectralConfig


@dataclass(frozen=True)
class LocalizationResult:
    tau_hat: int
    x_hat: float
    norm_at_hat: float

    def to_dict(self) -> dict:
        return {"tau_hat": self.tau_hat, "x_hat": self.x_hat, "norm": self.norm_at_hat}


def estimate_cp(net: DynamicNetwork, cfg: SpectralConfig | None = None,
                process: CusumProcess | None = None) -> LocalizationResult:
    """Smallest ``t`` in ``1..T-1`` maximizing ``||Z_T(t)||``."""
    if net.T < 2:
        raise ValidationError(f"localization needs T >= 2, got {net.T}")
    process = process or CusumProcess(net, cfg)
    norms = np.array([v for _, v in process.norms(range(1, net.T))])
    k = int(np.argmax(norms))  # first occurrence on ties
    return LocalizationResult(k + 1, (k + 1) / net.T, float(norms[k]))


def localization_risk(estimates, tau: int, T: int) -> float:
    """Mean absolute error of the estimates, normalized by ``T``."""
    est = np.asarray(list(estimates), dtype=float)
    if est.size == 0:
        raise ValidationError("need at least one estimate")
    return float(np.abs(est - tau).sum() / (est.size * T))


def localization_bound(gamma, n, T, omega, delta_op_norm, x_star) -> float:
    """High-probability bound on ``|x_hat - x*|``; can exceed 1 for weak jumps."""
    if not 0 < gamma < 1:
        raise ValidationError(f"gamma must lie in (0, 1), got {gamma}")
    if delta_op_norm <= 0:
        raise ValidationError("jump norm must be positive")
    if not 0 < x_star < 1:
        raise ValidationError(f"x_star must lie in (0, 1), got {x_star}")
    q = q_weight(x_star)
    return 3 * C_STAR * math.sqrt(omega * math.log(n * T / gamma)) / (delta_op_norm * math.sqrt(T) * q)
