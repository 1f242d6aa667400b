"""Sparse-graphon dynamic networks with nodes that come and go.

Each node label ``v`` in a universe of size ``N`` carries a latent position
``eps_v ~ U[0, 1]`` drawn once.  At time ``t`` the nodes in
``presence[t]`` are connected independently with probability
``rho * W^t(eps_i, eps_j)``, where ``W^t`` switches from ``W1`` to ``W2``
after ``tau``.  Testing restricts every snapshot to the nodes present at
all times and runs the dyadic-grid test on the resulting fixed-size network.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .detect import C_STAR, TestConfig, TestVerdict, run_test
from .errors import ValidationError
from .graph_core import DynamicNetwork, SnapshotGraph


class StepGraphon:
    """``W(x, y) = Q[phi(x), phi(y)]`` with ``phi`` mapping ``[0, 1]`` onto
    ``K`` consecutive intervals of the given lengths."""

    def __init__(self, Q, lengths: Sequence[float] | None = None):
        Q = np.asarray(Q, dtype=float)
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1] or not np.allclose(Q, Q.T):
            raise ValidationError("step graphon needs a symmetric square Q")
        if np.any(Q < 0) or np.any(Q > 1):
            raise ValidationError("step graphon values must lie in [0, 1]")
        K = Q.shape[0]
        lengths = np.full(K, 1.0 / K) if lengths is None else np.asarray(lengths, dtype=float)
        if lengths.shape != (K,) or np.any(lengths <= 0) or not math.isclose(lengths.sum(), 1.0, abs_tol=1e-12):
            raise ValidationError("interval lengths must be positive and sum to 1")
        self.Q = Q
        self.lengths = lengths
        self._edges = np.cumsum(lengths)[:-1]

    @property
    def K(self) -> int:
        return self.Q.shape[0]

    def phi(self, x) -> np.ndarray:
        return np.searchsorted(self._edges, np.asarray(x), side="right")

    def __call__(self, x, y) -> np.ndarray:
        return self.Q[self.phi(x), self.phi(y)]

    def operator_norm(self) -> float:
        """Norm of the integral operator; exact for step kernels."""
        s = np.sqrt(self.lengths)
        return float(np.abs(np.linalg.eigvalsh(s[:, None] * self.Q * s[None, :])).max())

    def edge_density(self) -> float:
        """``integral W`` over the unit square."""
        return float(self.lengths @ self.Q @ self.lengths)

    def __sub__(self, other: "StepGraphon") -> "StepGraphon":
        # Common refinement of both partitions; the difference may be negative,
        # so it is returned as a plain kernel, not a graphon.
        cuts = np.union1d(np.cumsum(self.lengths)[:-1], np.cumsum(other.lengths)[:-1])
        bounds = np.concatenate([[0.0], cuts, [1.0]])
        mids = (bounds[:-1] + bounds[1:]) / 2
        diff = self(mids[:, None], mids[None, :]) - other(mids[:, None], mids[None, :])
        out = object.__new__(StepGraphon)
        out.Q, out.lengths = diff, np.diff(bounds)
        out._edges = np.cumsum(out.lengths)[:-1]
        return out


@dataclass(frozen=True)
class SmoothGraphon:
    """Graphon given by a function handle, with its declared Hölder class."""

    func: Callable
    gamma: float = 1.0
    L: float = 1.0
    name: str = "custom"

    def __post_init__(self):
        g = np.linspace(0.0, 1.0, 21)
        vals = np.asarray(self.func(g[:, None], g[None, :]), dtype=float)
        if vals.shape != (21, 21):
            raise ValidationError("graphon function must broadcast over arrays")
        if not np.allclose(vals, vals.T):
            raise ValidationError("graphon must be symmetric")
        if np.any(vals < 0) or np.any(vals > 1):
            raise ValidationError("graphon values must lie in [0, 1]")

    def __call__(self, x, y):
        return np.asarray(self.func(np.asarray(x), np.asarray(y)), dtype=float)


def constant_graphon(c: float) -> StepGraphon:
    return StepGraphon([[c]])


GRAPHON_CATALOG = {
    "linear": SmoothGraphon(lambda x, y: (x + y) / 2, gamma=1.0, L=0.5, name="linear"),
    "exp": SmoothGraphon(lambda x, y: np.exp(-np.abs(x - y)), gamma=1.0, L=1.0, name="exp"),
}


def graphon_operator_norm(W, grid_size: int = 400) -> float:
    """Operator norm of ``W`` on ``L2[0, 1]``; midpoint-rule for smooth kernels."""
    if isinstance(W, StepGraphon):
        return W.operator_norm()
    x = (np.arange(grid_size) + 0.5) / grid_size
    M = W(x[:, None], x[None, :]) / grid_size
    return float(np.abs(np.linalg.eigvalsh(M)).max())


def graphon_from_dict(spec: dict):
    kind = spec.get("type")
    if kind == "const":
        return constant_graphon(float(spec["c"]))
    if kind == "step":
        return StepGraphon(spec["Q"], spec.get("lengths"))
    if kind == "catalog":
        try:
            return GRAPHON_CATALOG[spec["name"]]
        except KeyError:
            raise ValidationError(f"unknown catalog graphon {spec.get('name')!r}") from None
    raise ValidationError(f"unknown graphon type {kind!r}")


# --------------------------------------------------------------------------
# Node schedules


@dataclass(frozen=True)
class NodeSchedule:
    latent: np.ndarray
    presence: tuple  # per t: sorted int array of present labels

    def __post_init__(self):
        latent = np.asarray(self.latent, dtype=float)
        if latent.ndim != 1 or np.any(latent < 0) or np.any(latent > 1):
            raise ValidationError("latent positions must be a vector in [0, 1]")
        pres = []
        for labels in self.presence:
            arr = np.unique(np.asarray(labels, dtype=np.int64))
            if arr.size and (arr[0] < 0 or arr[-1] >= latent.size):
                raise ValidationError("presence labels outside the node universe")
            pres.append(arr)
        if not pres:
            raise ValidationError("schedule needs at least one time point")
        object.__setattr__(self, "latent", latent)
        object.__setattr__(self, "presence", tuple(pres))

    @property
    def N(self) -> int:
        return self.latent.size

    @property
    def T(self) -> int:
        return len(self.presence)

    def common(self) -> np.ndarray:
        out = self.presence[0]
        for p in self.presence[1:]:
            out = np.intersect1d(out, p)
        return out

    @classmethod
    def generate(cls, N: int, T: int, presence_prob: float = 1.0, seed: int = 0) -> "NodeSchedule":
        """Latent positions and i.i.d. presence, one draw per (node, time)."""
        if not 0 < presence_prob <= 1:
            raise ValidationError("presence probability must lie in (0, 1]")
        rng = np.random.default_rng(seed)
        latent = rng.random(N)
        if presence_prob == 1.0:
            presence = [np.arange(N)] * T
        else:
            mask = rng.random((T, N)) < presence_prob
            presence = [np.flatnonzero(row) for row in mask]
        return cls(latent, tuple(presence))

    def to_json(self) -> str:
        return json.dumps(
            {
                "N": self.N,
                "latent": self.latent.tolist(),
                "presence": [p.tolist() for p in self.presence],
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "NodeSchedule":
        d = json.loads(text)
        latent = d.get("latent")
        if latent is None:
            # Presence-only files: latent positions are not needed for testing.
            latent = [0.0] * int(d["N"])
        return cls(np.asarray(latent), tuple(d["presence"]))


@dataclass(frozen=True)
class LabeledSnapshot:
    labels: np.ndarray  # sorted node labels, row/column order of ``graph``
    graph: SnapshotGraph


def sample_graphon_network(W1, W2, tau: int, rho: float, schedule: NodeSchedule, seed: int = 0):
    """Variable-size snapshots; graphon ``W1`` up to ``tau``, ``W2`` after."""
    T = schedule.T
    if not 1 <= tau <= T - 1:
        raise ValidationError(f"tau={tau} outside 1..{T - 1}")
    if not 0 < rho <= 1:
        raise ValidationError("rho must lie in (0, 1]")
    children = np.random.SeedSequence(seed).spawn(T)
    out = []
    for t in range(1, T + 1):
        labels = schedule.presence[t - 1]
        W = W1 if t <= tau else W2
        eps = schedule.latent[labels]
        P = rho * W(eps[:, None], eps[None, :])
        if np.any(P > 1 + 1e-12):
            raise ValidationError("rho * W exceeds 1")
        k = labels.size
        iu = np.triu_indices(k, 1)
        rng = np.random.Generator(np.random.PCG64(children[t - 1]))
        upper = rng.random(iu[0].size) < P[iu]
        adj = np.zeros((k, k), dtype=np.uint8)
        adj[iu] = upper
        out.append(LabeledSnapshot(labels, SnapshotGraph(adj + adj.T)))
    return out


def restrict_common(seq: Sequence[LabeledSnapshot], schedule: NodeSchedule | None = None) -> DynamicNetwork:
    """Restrict every snapshot to the labels present at all times."""
    if not seq:
        raise ValidationError("empty sequence")
    if schedule is not None:
        common = schedule.common()
    else:
        common = seq[0].labels
        for s in seq[1:]:
            common = np.intersect1d(common, s.labels)
    if common.size == 0:
        raise ValidationError("no node is present at every time point")
    mats = []
    for s in seq:
        pos = np.searchsorted(s.labels, common)
        if np.any(pos >= s.labels.size) or np.any(s.labels[np.minimum(pos, s.labels.size - 1)] != common):
            raise ValidationError("snapshot labels disagree with the schedule")
        mats.append(s.graph.adj[np.ix_(pos, pos)])
    return DynamicNetwork(np.stack(mats), labels=common.tolist())


def graphon_test(seq, schedule: NodeSchedule | None = None, alpha: float = 0.05,
                 cfg: TestConfig | None = None) -> TestVerdict:
    """Dyadic-grid test on the common-node restriction, sparsity from the
    maximum observed degree unless a known value is configured."""
    if cfg is None:
        cfg = TestConfig(alpha=alpha, grid="dyadic", threshold="theoretical", sparsity="estimate_omega")
    else:
        sparsity = cfg.sparsity if not isinstance(cfg.sparsity, str) else "estimate_omega"
        cfg = replace(cfg, alpha=alpha, grid="dyadic", tau=None, sparsity=sparsity)
    return run_test(restrict_common(seq, schedule), cfg)


def step_graphon_boundary(alpha, beta, n, T, rho, K) -> float:
    """Jump size ``q(tau/T) ||W1 - W2||`` the step-graphon test is guaranteed to detect."""
    stat = math.sqrt(math.log(2 * n * math.log2(T) / alpha)) + math.sqrt(math.log(n / beta))
    return C_STAR * math.sqrt(stat / (T * rho * n)) + 4 * (K * math.log(n) / n) ** 0.25


def holder_graphon_boundary(alpha, beta, n, T, rho, gamma, C=1.0) -> float:
    """Smooth-graphon analogue; ``C`` is an unspecified absolute constant."""
    stat = math.sqrt(math.log(2 * n * math.log2(T) / alpha)) + math.sqrt(math.log(n / beta))
    return C_STAR * math.sqrt(stat / (rho * n * T)) + C * (math.log(n) / n) ** (min(gamma, 1.0) / 2)
