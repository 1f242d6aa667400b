"""Synthetic dynamic networks: the five benchmark scenarios and link sampling.

Randomness
----------
Every network is drawn from ``numpy.random.SeedSequence(seed)``; snapshot
``t`` uses the ``t``-th spawned child driving a PCG64 generator.  Within a
snapshot the upper-triangle edge uniforms (row-major ``i < j`` order) are
drawn first, then, if links can be missing, the mask uniforms in the same
order.  An entry is present when its uniform is strictly below the
probability.  Monte Carlo replicate ``k`` of an experiment with master seed
``m`` uses seed ``m ^ k``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ValidationError
from .graph_core import DynamicNetwork, ProbMatrix, norm_1_inf
from .spectral import SpectralConfig, op_norm

SCENARIO_ALIASES = {
    "1": "er",
    "2": "sbm2_between",
    "3": "sbm2_within1",
    "4": "sbm2_within2",
    "5": "sbm3",
}
SCENARIO_KINDS = tuple(SCENARIO_ALIASES.values())

_DELTA_RANGE = {
    "er": (-2.0, 2.0),
    "sbm2_between": (0.0, 1.0),
    "sbm2_within1": (0.0, 1.0),
    "sbm2_within2": (0.0, 1.0),
    "sbm3": (0.0, 0.5),
}
_NULL_DELTA = {"er": 1.0, "sbm2_between": 1.0, "sbm2_within1": 1.0, "sbm2_within2": 1.0, "sbm3": 0.0}


def replicate_seed(master: int, k: int) -> int:
    return int(master) ^ int(k)


def _block_q(kind: str, delta: float):
    """Unscaled community matrices before/after the change."""
    d = delta
    if kind == "sbm2_between":
        return [[0.6, 1.0], [1.0, 0.6]], [[0.6, d], [d, 0.6]]
    if kind == "sbm2_within1":
        return [[1.0, 0.5], [0.5, 0.6]], [[d, 0.5], [0.5, 0.6]]
    if kind == "sbm2_within2":
        return [[1.0, 0.2], [0.2, 1.0]], [[d, 0.2], [0.2, d]]
    if kind == "sbm3":
        q1 = [[0.6, 1.0, 0.6], [1.0, 0.6, 0.5], [0.6, 0.5, 0.6]]
        q2 = [[0.6, 1 - d, 0.6], [1 - d, 0.6, 0.5 + d], [0.6, 0.5 + d, 0.6]]
        return q1, q2
    raise ValidationError(f"no block matrices for scenario {kind!r}")


def balanced_blocks(n: int, k: int) -> list[int]:
    """Community sizes: ``floor(n/k)`` each, remainder in the last block."""
    base = n // k
    return [base] * (k - 1) + [n - base * (k - 1)]


def block_labels(sizes: Sequence[int]) -> np.ndarray:
    return np.repeat(np.arange(len(sizes)), sizes)


def sbm_theta(Q, sizes: Sequence[int], rho: float = 1.0) -> np.ndarray:
    """Expand a community matrix to node level with a zero diagonal."""
    Q = np.asarray(Q, dtype=float)
    lab = block_labels(sizes)
    theta = rho * Q[np.ix_(lab, lab)]
    np.fill_diagonal(theta, 0.0)
    return theta


@dataclass(frozen=True)
class Scenario:
    kind: str
    n: int
    T: int
    tau: int
    delta: float
    rho: float | None = None

    def __post_init__(self):
        kind = SCENARIO_ALIASES.get(str(self.kind), self.kind)
        if kind not in SCENARIO_KINDS:
            raise ValidationError(f"unknown scenario {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        lo, hi = _DELTA_RANGE[kind]
        if not lo <= self.delta <= hi:
            raise ValidationError(f"delta={self.delta} outside [{lo}, {hi}] for {kind}")
        if self.n < 2:
            raise ValidationError("need at least two nodes")
        if not 1 <= self.tau <= self.T - 1:
            raise ValidationError(f"tau={self.tau} outside 1..{self.T - 1}")
        if self.rho is None:
            object.__setattr__(self, "rho", self.n**-0.5)
        if not 0 < self.rho <= 1:
            raise ValidationError("rho must lie in (0, 1]")

    @property
    def null_delta(self) -> float:
        return _NULL_DELTA[self.kind]

    @property
    def block_sizes(self) -> list[int]:
        if self.kind == "er":
            return [self.n]
        return balanced_blocks(self.n, 3 if self.kind == "sbm3" else 2)

    def with_delta(self, delta: float) -> "Scenario":
        return Scenario(self.kind, self.n, self.T, self.tau, delta, self.rho)


def scenario_matrices(sc: Scenario) -> tuple[ProbMatrix, ProbMatrix]:
    """Connection matrices before and after the change.

    Scenario 1 allows ``delta < 0``; the resulting negative probabilities are
    clipped to zero (no edges after the change).
    """
    n, rho = sc.n, sc.rho
    if sc.kind == "er":
        ones = np.ones((n, n)) - np.eye(n)
        before = 0.5 * rho * ones
        after = np.clip(0.5 * sc.delta * rho * ones, 0.0, 1.0)
    else:
        q1, q2 = _block_q(sc.kind, sc.delta)
        before = sbm_theta(q1, sc.block_sizes, rho)
        after = sbm_theta(q2, sc.block_sizes, rho)
    return ProbMatrix(before), ProbMatrix(after)


def nominal_kappa(sc: Scenario) -> float:
    """Sparsity level used to calibrate the benchmark experiments.

    ``n rho`` for the Erdos-Renyi scenario, ``n rho max ||Q||_{1,inf} / K``
    (``K`` communities, unscaled ``Q``) for the block scenarios.
    """
    if sc.kind == "er":
        return sc.n * sc.rho
    q1, q2 = _block_q(sc.kind, sc.delta)
    k = len(q1)
    return sc.n * sc.rho * max(norm_1_inf(q1), norm_1_inf(q2)) / k


def jump_norm(sc: Scenario, cfg: SpectralConfig | None = None) -> float:
    before, after = scenario_matrices(sc)
    return op_norm(after.entries - before.entries, cfg)


def theta_sequence(sc: Scenario) -> list[ProbMatrix]:
    before, after = scenario_matrices(sc)
    return [before] * sc.tau + [after] * (sc.T - sc.tau)


@dataclass(frozen=True)
class SamplingModel:
    """Which node pairs get observed.

    ``full``: everything; ``uniform``: each pair with probability ``p``;
    ``block``: pairs inside a community always, across communities with
    probability ``p``.
    """

    kind: str = "full"
    p: float = 1.0
    split_sizes: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.kind not in ("full", "uniform", "block"):
            raise ValidationError(f"unknown sampling kind {self.kind!r}")
        if not 0 < self.p <= 1:
            raise ValidationError(f"sampling rate must lie in (0, 1], got {self.p}")
        if self.kind == "block":
            if not self.split_sizes or any(s < 1 for s in self.split_sizes):
                raise ValidationError("block sampling needs positive community sizes")
            object.__setattr__(self, "split_sizes", tuple(int(s) for s in self.split_sizes))

    def pi_matrix(self, n: int) -> ProbMatrix:
        if self.kind == "full":
            pi = np.ones((n, n))
        elif self.kind == "uniform":
            pi = np.full((n, n), self.p)
        else:
            if sum(self.split_sizes) != n:
                raise ValidationError(f"block sizes {self.split_sizes} do not sum to n={n}")
            lab = block_labels(self.split_sizes)
            pi = np.where(lab[:, None] == lab[None, :], 1.0, self.p)
        np.fill_diagonal(pi, 1.0)
        return ProbMatrix(pi, mode="pi")

    def is_full(self, n: int) -> bool:
        return bool(np.all(self.pi_matrix(n).entries == 1.0))

    @classmethod
    def parse(cls, text: str, n: int | None = None) -> "SamplingModel":
        """``full``, ``uniform:<p>`` or ``block:<p>`` (two balanced blocks)
        or ``block:<p>:<k1>,<k2>,...``."""
        parts = text.split(":")
        kind = parts[0]
        if kind == "full":
            return cls("full")
        if kind == "uniform" and len(parts) == 2:
            return cls("uniform", float(parts[1]))
        if kind == "block" and len(parts) in (2, 3):
            if len(parts) == 3:
                sizes = tuple(int(x) for x in parts[2].split(","))
            elif n is not None:
                sizes = tuple(balanced_blocks(n, 2))
            else:
                raise ValidationError("block sampling needs community sizes or n")
            return cls("block", float(parts[1]), sizes)
        raise ValidationError(f"cannot parse sampling model {text!r}")


def _as_array(theta) -> np.ndarray:
    return theta.entries if isinstance(theta, ProbMatrix) else np.asarray(theta, dtype=float)


def sample_network(theta_seq, sampling: SamplingModel | None = None, seed: int = 0,
                   return_complete: bool = False):
    """Draw ``Y^t = Omega^t * A^t`` for every ``t``.

    Returns the observed network, or ``(observed, complete)`` when
    ``return_complete`` is set.
    """
    theta_seq = list(theta_seq)
    if not theta_seq:
        raise ValidationError("need at least one connection matrix")
    sampling = sampling or SamplingModel()
    n = _as_array(theta_seq[0]).shape[0]
    iu = np.triu_indices(n, 1)
    m = iu[0].size

    # Many time points share one matrix object; extract each once.
    vec_cache: dict[int, np.ndarray] = {}
    pi_vec = sampling.pi_matrix(n).entries[iu]
    masked = bool(np.any(pi_vec < 1.0))

    T = len(theta_seq)
    upper_a = np.empty((T, m), dtype=bool)
    upper_y = np.empty((T, m), dtype=bool) if masked else upper_a
    children = np.random.SeedSequence(seed).spawn(T)
    for t, theta in enumerate(theta_seq):
        key = id(theta)
        if key not in vec_cache:
            arr = _as_array(theta)
            if arr.shape != (n, n):
                raise ValidationError("connection matrices must share one shape")
            vec_cache[key] = arr[iu]
        rng = np.random.Generator(np.random.PCG64(children[t]))
        upper_a[t] = rng.random(m) < vec_cache[key]
        if masked:
            upper_y[t] = upper_a[t] & (rng.random(m) < pi_vec)

    def build(upper):
        data = np.zeros((T, n, n), dtype=np.uint8)
        data[:, iu[0], iu[1]] = upper
        return data + data.transpose(0, 2, 1)

    observed = DynamicNetwork(build(upper_y), missing_links=masked)
    if return_complete:
        return observed, (DynamicNetwork(build(upper_a)) if masked else observed)
    return observed


def simulate(sc: Scenario, sampling: SamplingModel | None = None, seed: int = 0,
             return_complete: bool = False):
    return sample_network(theta_sequence(sc), sampling, seed, return_complete)


def true_sparsity(theta_seq, sampling: SamplingModel | None = None) -> tuple[float, float]:
    """Exact ``(kappa, omega)``: max column sums of ``Theta^t`` and ``Pi * Theta^t``."""
    theta_seq = list(theta_seq)
    sampling = sampling or SamplingModel()
    n = _as_array(theta_seq[0]).shape[0]
    pi = sampling.pi_matrix(n).entries
    seen = {}
    for theta in theta_seq:
        if id(theta) not in seen:
            arr = _as_array(theta)
            seen[id(theta)] = (norm_1_inf(arr), norm_1_inf(pi * arr))
    kappa = max(v[0] for v in seen.values())
    omega = max(v[1] for v in seen.values())
    return kappa, omega


def observed_jump_norm(sc: Scenario, sampling: SamplingModel | None = None,
                       cfg: SpectralConfig | None = None) -> float:
    """``||Pi * (Theta_after - Theta_before)||``."""
    sampling = sampling or SamplingModel()
    before, after = scenario_matrices(sc)
    pi = sampling.pi_matrix(sc.n).entries
    return op_norm(pi * (after.entries - before.entries), cfg)


def expected_sequence(sc: Scenario, sampling: SamplingModel | None = None) -> DynamicNetwork:
    """Noiseless network whose snapshots are ``Pi * Theta^t``."""
    sampling = sampling or SamplingModel()
    pi = sampling.pi_matrix(sc.n).entries
    before, after = scenario_matrices(sc)
    b, a = pi * before.entries, pi * after.entries
    return DynamicNetwork(np.stack([b] * sc.tau + [a] * (sc.T - sc.tau)))


def scenario_delta_grid(kind: str, step: float = 0.01) -> list[float]:
    kind = SCENARIO_ALIASES.get(str(kind), kind)
    lo, hi = _DELTA_RANGE[kind]
    count = int(round((hi - lo) / step))
    return [round(lo + i * step, 10) for i in range(count + 1)]
