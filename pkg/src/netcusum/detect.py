"""Change-point tests built on the spectral norm of the Matrix CUSUM.

Three decision rules share one code path, differing only in the time grid:
a known candidate ``tau``, the dyadic grid (optionally with ``T // 2``
added), and the full range ``1..T-1``.  Thresholds come in a theoretical
flavour (matrix Bernstein constant ``C_STAR``) and the sharper practical
flavour used for simulations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cusum import CusumProcess, q_weight
from .errors import ValidationError
from .graph_core import DynamicNetwork, ProbMatrix, estimate_kappa, estimate_omega
from .spectral import SpectralConfig, numerical_rank

#: Constant of the matrix Bernstein bound behind the theoretical thresholds.
C_STAR = 1.0 + math.sqrt(3.0)

GRID_KINDS = ("known_tau", "dyadic", "dyadic_plus_midpoint", "full")
THRESHOLD_KINDS = ("theoretical", "practical")
SPARSITY_KINDS = ("auto", "known", "estimate_kappa", "estimate_omega")


def _check_alpha(alpha: float, name: str = "alpha") -> None:
    if not 0 < alpha < 1:
        raise ValidationError(f"{name} must lie in (0, 1), got {alpha}")


def _check_tau(tau: int, T: int, name: str = "tau") -> None:
    if not 1 <= tau <= T - 1:
        raise ValidationError(f"{name}={tau} outside 1..{T - 1}")


def dyadic_grid(T: int) -> list[int]:
    """``{2^k} U {T - 2^k}`` for ``k = 0..floor(log2(T/2))``."""
    if T < 2:
        raise ValidationError(f"dyadic grid needs T >= 2, got {T}")
    kmax = T.bit_length() - 2  # floor(log2(T / 2)) for integer T >= 2
    pts = set()
    for k in range(kmax + 1):
        pts.add(2**k)
        pts.add(T - 2**k)
    return sorted(pts)


def make_grid(kind: str, T: int, tau: int | None = None) -> list[int]:
    if T < 2:
        raise ValidationError(f"testing needs T >= 2, got {T}")
    if kind == "known_tau":
        if tau is None:
            raise ValidationError("known_tau grid needs tau")
        _check_tau(tau, T)
        return [tau]
    if kind == "dyadic":
        return dyadic_grid(T)
    if kind == "dyadic_plus_midpoint":
        return sorted(set(dyadic_grid(T)) | {T // 2})
    if kind == "full":
        return list(range(1, T))
    raise ValidationError(f"unknown grid kind {kind!r}")


# --------------------------------------------------------------------------
# Thresholds


def threshold_practical_known_tau(alpha, n, T, tau, kappa) -> float:
    _check_alpha(alpha)
    _check_tau(tau, T)
    if kappa <= 0:
        raise ValidationError("kappa must be positive")
    L = math.log(n / alpha)
    w = math.sqrt(T) * q_weight(tau / T)
    return L / (3 * w) + math.sqrt(L**2 / (9 * w**2) + 2 * kappa * L)


def threshold_practical_grid(alpha, n, T, t, grid_size, kappa) -> float:
    """Practical threshold at grid point ``t``.

    The grid size enters the two small-deviation terms only; the variance
    term keeps ``log(n / alpha)``.
    """
    _check_alpha(alpha)
    _check_tau(t, T, "t")
    if grid_size < 1:
        raise ValidationError("grid_size must be >= 1")
    if kappa <= 0:
        raise ValidationError("kappa must be positive")
    Lg = math.log(n * grid_size / alpha)
    L = math.log(n / alpha)
    w = math.sqrt(T) * q_weight(t / T)
    return Lg / (3 * w) + math.sqrt(Lg**2 / (9 * w**2) + 2 * kappa * L)


def threshold_theoretical(alpha, n, sparsity, variant: str = "P1", T: int | None = None) -> float:
    """``C_STAR * sqrt(kappa log(n/alpha))`` (``variant="P1"``) or the grid
    version ``C_STAR * sqrt(omega log(2 n log2(T) / alpha))``."""
    _check_alpha(alpha)
    if sparsity <= 0 or n <= 0:
        raise ValidationError("n and sparsity must be positive")
    if variant == "P1":
        return C_STAR * math.sqrt(sparsity * math.log(n / alpha))
    if variant == "grid":
        if T is None or T < 2:
            raise ValidationError("grid variant needs T >= 2")
        return C_STAR * math.sqrt(sparsity * math.log(2 * n * math.log2(T) / alpha))
    raise ValidationError(f"unknown variant {variant!r}")


# --------------------------------------------------------------------------
# Tests


@dataclass(frozen=True)
class TestConfig:
    """How to run a test.

    ``sparsity`` is a number (known value) or one of ``"auto"``,
    ``"estimate_kappa"``, ``"estimate_omega"``.  ``"auto"`` picks the maximum
    observed degree when the network is flagged as having missing links and
    the degree quantile otherwise.
    """

    __test__ = False  # not a pytest class

    alpha: float = 0.05
    grid: str = "dyadic_plus_midpoint"
    tau: int | None = None
    threshold: str = "practical"
    sparsity: float | str = "auto"
    kappa_level: float = 0.9
    spectral: SpectralConfig = field(default_factory=SpectralConfig)

    def __post_init__(self):
        _check_alpha(self.alpha)
        if self.grid not in GRID_KINDS:
            raise ValidationError(f"unknown grid kind {self.grid!r}")
        if self.grid == "known_tau" and self.tau is None:
            raise ValidationError("known_tau grid needs tau")
        if self.threshold not in THRESHOLD_KINDS:
            raise ValidationError(f"unknown threshold kind {self.threshold!r}")
        if isinstance(self.sparsity, str):
            if self.sparsity not in SPARSITY_KINDS or self.sparsity == "known":
                raise ValidationError(f"unknown sparsity option {self.sparsity!r}")
        elif not self.sparsity > 0:
            raise ValidationError("known sparsity must be positive")


@dataclass(frozen=True)
class TestVerdict:
    __test__ = False

    reject: bool
    stats: list  # (t, norm, threshold)
    argmax_t: int | None
    sparsity_used: float

    def __post_init__(self):
        exceed = any(norm > thr for _, norm, thr in self.stats)
        if exceed != self.reject:
            raise ValidationError("verdict inconsistent with its statistics")
        if (self.argmax_t is not None) != self.reject:
            raise ValidationError("argmax_t must be present exactly when rejecting")

    @property
    def statistic(self) -> float:
        return max(norm for _, norm, _ in self.stats)

    def to_dict(self) -> dict:
        return {
            "reject": self.reject,
            "argmax_t": self.argmax_t,
            "sparsity_used": self.sparsity_used,
            "statistic": self.statistic,
            "stats": [{"t": t, "norm": norm, "threshold": thr} for t, norm, thr in self.stats],
        }


def resolve_sparsity(net: DynamicNetwork, cfg: TestConfig) -> float:
    s = cfg.sparsity
    if not isinstance(s, str):
        value = float(s)
    elif s == "estimate_kappa" or (s == "auto" and not net.missing_links):
        value = estimate_kappa(net, cfg.kappa_level)
    else:
        value = estimate_omega(net)
    if value <= 0:
        raise ValidationError("sparsity is zero; thresholds are undefined")
    return value


def thresholds_for(grid, cfg: TestConfig, n: int, T: int, sparsity: float) -> list[float]:
    if cfg.threshold == "theoretical":
        if cfg.grid == "known_tau":
            h = threshold_theoretical(cfg.alpha, n, sparsity, "P1")
        else:
            h = threshold_theoretical(cfg.alpha, n, sparsity, "grid", T)
        return [h] * len(grid)
    if cfg.grid == "known_tau":
        return [threshold_practical_known_tau(cfg.alpha, n, T, t, sparsity) for t in grid]
    return [threshold_practical_grid(cfg.alpha, n, T, t, len(grid), sparsity) for t in grid]


def verdict_from_norms(norms, thresholds, sparsity: float) -> TestVerdict:
    """Build a verdict from ``[(t, norm)]`` and matching thresholds."""
    stats = [(int(t), float(v), float(h)) for (t, v), h in zip(norms, thresholds)]
    reject = any(v > h for _, v, h in stats)
    argmax_t = None
    if reject:
        best = max(v for _, v, _ in stats)
        argmax_t = min(t for t, v, _ in stats if v == best)
    return TestVerdict(reject, stats, argmax_t, float(sparsity))


def run_test(net: DynamicNetwork, cfg: TestConfig, process: CusumProcess | None = None) -> TestVerdict:
    """Evaluate the configured test; ``process`` lets callers share a norm cache."""
    if net.T < 2:
        raise ValidationError(f"testing needs T >= 2, got {net.T}")
    grid = make_grid(cfg.grid, net.T, cfg.tau)
    sparsity = resolve_sparsity(net, cfg)
    process = process or CusumProcess(net, cfg.spectral)
    norms = process.norms(grid)
    return verdict_from_norms(norms, thresholds_for(grid, cfg, net.n, net.T, sparsity), sparsity)


# --------------------------------------------------------------------------
# Reporting helpers


def enr(delta_theta_norm: float, tau: int, T: int, kappa: float) -> float:
    """Energy-to-noise ratio of a jump of spectral norm ``delta_theta_norm`` at ``tau``."""
    _check_tau(tau, T)
    if kappa <= 0:
        raise ValidationError("kappa must be positive")
    return q_weight(tau / T) * delta_theta_norm / math.sqrt(kappa / T)


def lower_bound_constant(alpha: float, beta: float) -> float:
    """``log(1 + eta^2)^(1/4) / (4 sqrt 2)`` with ``eta = 1 - alpha - beta``."""
    _check_alpha(alpha)
    if not 0 <= beta <= 1 - alpha:
        raise ValidationError(f"beta must lie in [0, 1 - alpha], got {beta}")
    eta = 1 - alpha - beta
    return math.log1p(eta**2) ** 0.25 / (4 * math.sqrt(2))


def theoretical_boundary(alpha, beta, n, T, sparsity, variant: str = "P1") -> float:
    """Jump energy above which the theoretical-threshold test has both errors controlled.

    ``variant="P1"``: known location with sparsity ``kappa``.
    ``variant="grid"``: dyadic grid with observed-degree bound ``omega``.
    """
    _check_alpha(alpha)
    _check_alpha(beta, "beta")
    if T < 2:
        raise ValidationError("T must be >= 2")
    if variant == "P1":
        return C_STAR * math.sqrt(sparsity / T) * (math.sqrt(math.log(n / alpha)) + math.sqrt(math.log(n / beta)))
    if variant == "grid":
        first = math.sqrt(math.log(2 * n / alpha) + math.log(math.log2(T)))
        return math.sqrt(3) * C_STAR * math.sqrt(sparsity / T) * (first + math.sqrt(math.log(n / beta)))
    raise ValidationError(f"unknown variant {variant!r}")


@dataclass(frozen=True)
class Distortion:
    min_pi: float
    rank: int
    delta: float


def distortion(pi: ProbMatrix, theta_product, tol: float = 1e-8) -> Distortion:
    """Attenuation factor ``min(Pi) / sqrt(max(rank(Pi * Theta), 1))``."""
    if not isinstance(pi, ProbMatrix):
        pi = ProbMatrix(pi, mode="pi")
    if pi.mode != "pi":
        raise ValidationError("distortion needs a sampling matrix (mode='pi')")
    min_pi = pi.min_offdiag()
    rank = numerical_rank(np.asarray(theta_product, dtype=float), tol)
    return Distortion(min_pi, rank, min_pi / math.sqrt(max(rank, 1)))
