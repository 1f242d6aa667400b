"""Matrix CUSUM process.

For a sequence ``Y^1..Y^T`` the CUSUM at ``t`` contrasts the mean snapshot
before and after ``t``::

    Z_T(t) = sqrt(t (T - t) / T) * (mean(Y^1..Y^t) - mean(Y^{t+1}..Y^T))
           = sqrt(T / (t (T - t))) * (S(t) - (t / T) S(T))

with ``S`` the cumulative sum.  The second form is what ``z_matrix`` uses,
reading ``S`` from the network's prefix cache.
"""

from __future__ import annotations

import math
import threading
from typing import Iterable

import numpy as np

from .errors import ValidationError
from .graph_core import DynamicNetwork
from .spectral import SpectralConfig, op_norm


def q_weight(x: float) -> float:
    """Location weight ``sqrt(x (1 - x))``."""
    if not 0 <= x <= 1:
        raise ValidationError(f"q_weight needs x in [0, 1], got {x}")
    return math.sqrt(x * (1 - x))


def _check_t(t: int, T: int) -> None:
    if not 1 <= t <= T - 1:
        raise ValidationError(f"t={t} outside 1..{T - 1}")


def z_matrix(net: DynamicNetwork, t: int) -> np.ndarray:
    """CUSUM matrix at ``t`` via the cumulative-sum form."""
    T = net.T
    _check_t(t, T)
    S_t = net.prefix[t].astype(float)
    S_T = net.prefix[T].astype(float)
    return math.sqrt(T / (t * (T - t))) * (S_t - (t / T) * S_T)


def z_matrix_means(net: DynamicNetwork, t: int) -> np.ndarray:
    """CUSUM matrix at ``t`` via the difference of means, summed from raw snapshots."""
    T = net.T
    _check_t(t, T)
    before = net.data[:t].astype(float).mean(axis=0)
    after = net.data[t:].astype(float).mean(axis=0)
    return math.sqrt(t * (T - t) / T) * (before - after)


def mu_profile(t: int, tau: int, T: int) -> float:
    """Mean profile multiplying the jump in ``E Z_T(t)`` for a change at ``tau``."""
    _check_t(t, T)
    if not 1 <= tau <= T - 1:
        raise ValidationError(f"tau={tau} outside 1..{T - 1}")
    scale = math.sqrt(t * (T - t) / T)
    if t >= tau + 1:
        return scale * tau / t
    return scale * (T - tau) / (T - t)


class CusumProcess:
    """Lazily evaluated CUSUM matrices and norms over a network.

    Norms are cached per ``(t, spectral seed)``; distinct keys may be filled
    from several threads.
    """

    def __init__(self, net: DynamicNetwork, cfg: SpectralConfig | None = None):
        if net.T < 2:
            raise ValidationError("CUSUM needs at least two snapshots")
        self.net = net
        self.cfg = cfg or SpectralConfig()
        self._norms: dict[tuple[int, int], float] = {}
        self._lock = threading.Lock()

    def matrix(self, t: int) -> np.ndarray:
        return z_matrix(self.net, t)

    def norm(self, t: int) -> float:
        key = (t, self.cfg.seed)
        cached = self._norms.get(key)
        if cached is not None:
            return cached
        value = op_norm(self.matrix(t), self.cfg)
        with self._lock:
            self._norms.setdefault(key, value)
        return self._norms[key]

    def norms(self, grid: Iterable[int]) -> list[tuple[int, float]]:
        return [(t, self.norm(t)) for t in grid]

    @property
    def full_grid(self) -> list[int]:
        return list(range(1, self.net.T))


def cusum_norms(net: DynamicNetwork, grid: Iterable[int], cfg: SpectralConfig | None = None):
    """Spectral norms ``[(t, ||Z_T(t)||), ...]`` on ``grid``."""
    grid = list(grid)
    for t in grid:
        _check_t(t, net.T)
    return CusumProcess(net, cfg).norms(grid)
