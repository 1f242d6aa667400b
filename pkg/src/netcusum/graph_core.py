"""Graph and matrix containers, norms, sparsity estimators and on-disk formats.

A dynamic network is stored as one ``(T, n, n)`` array plus a prefix-sum
cache ``prefix[t] = sum_{s <= t} Y^s`` with ``prefix[0] = 0``.  Time indices
follow the usual 1-based convention: snapshot ``t`` is ``data[t - 1]``.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ValidationError


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def _check_square_symmetric(a: np.ndarray, what: str) -> None:
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"{what} must be square, got shape {a.shape}")
    if not np.array_equal(a, a.T):
        raise ValidationError(f"{what} must be symmetric")


@dataclass(frozen=True, eq=False)
class SnapshotGraph:
    """Symmetric binary adjacency matrix with zero diagonal."""

    adj: np.ndarray

    def __post_init__(self):
        a = np.array(self.adj)
        if a.dtype == bool:
            a = a.astype(np.uint8)
        _check_square_symmetric(a, "adjacency matrix")
        if not np.isin(a, (0, 1)).all():
            raise ValidationError("adjacency entries must be 0 or 1")
        if np.any(np.diag(a)):
            raise ValidationError("adjacency matrix must have a zero diagonal")
        object.__setattr__(self, "adj", _readonly(a.astype(np.uint8)))

    def __eq__(self, other):
        if not isinstance(other, SnapshotGraph):
            return NotImplemented
        return self.adj.shape == other.adj.shape and np.array_equal(self.adj, other.adj)

    def __hash__(self):
        return hash((self.adj.shape, self.adj.tobytes()))

    @property
    def n(self) -> int:
        return self.adj.shape[0]

    def degrees(self) -> np.ndarray:
        return self.adj.sum(axis=0, dtype=np.int64)

    def edges(self) -> list[tuple[int, int]]:
        i, j = np.nonzero(np.triu(self.adj, 1))
        return list(zip(i.tolist(), j.tolist()))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "SnapshotGraph":
        a = np.zeros((n, n), dtype=np.uint8)
        for i, j in edges:
            if i == j:
                raise ValidationError(f"self-loop ({i}, {j}) not allowed")
            if not (0 <= i < n and 0 <= j < n):
                raise ValidationError(f"edge ({i}, {j}) out of range for n={n}")
            a[i, j] = a[j, i] = 1
        return cls(a)


@dataclass(frozen=True)
class ProbMatrix:
    """Symmetric matrix of probabilities.

    ``mode="theta"`` is a connection probability matrix (zero diagonal);
    ``mode="pi"`` is a sampling matrix (unit diagonal, positive entries).
    """

    entries: np.ndarray
    mode: str = "theta"

    def __post_init__(self):
        a = np.array(self.entries, dtype=float)
        _check_square_symmetric(a, "probability matrix")
        if np.any(a < 0) or np.any(a > 1):
            raise ValidationError("probabilities must lie in [0, 1]")
        if self.mode == "theta":
            if np.any(np.diag(a) != 0):
                raise ValidationError("connection matrix must have a zero diagonal")
        elif self.mode == "pi":
            if np.any(np.diag(a) != 1):
                raise ValidationError("sampling matrix must have a unit diagonal")
            if a.size and a.min() <= 0:
                raise ValidationError("sampling probabilities must be positive")
        else:
            raise ValidationError(f"unknown mode {self.mode!r}")
        object.__setattr__(self, "entries", _readonly(a))

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def kappa(self) -> float:
        """Column-wise 1,inf-norm (the sparsity bound)."""
        return norm_1_inf(self.entries)

    @property
    def rho(self) -> float:
        """Largest entry."""
        return float(self.entries.max()) if self.entries.size else 0.0

    def min_offdiag(self) -> float:
        n = self.n
        if n < 2:
            raise ValidationError("need at least two nodes")
        return float(self.entries[~np.eye(n, dtype=bool)].min())


class DynamicNetwork:
    """Ordered sequence of ``T`` symmetric snapshots on a fixed node set.

    Binary input is what the model produces; real-valued snapshots are also
    accepted so that expectation sequences can be fed through the CUSUM
    machinery.  Symmetry and the zero diagonal are enforced either way.
    """

    def __init__(self, snapshots, missing_links: bool = False, labels: Sequence | None = None,
                 times: Sequence | None = None):
        if isinstance(snapshots, np.ndarray):
            data = np.array(snapshots)
        else:
            snapshots = list(snapshots)
            if not snapshots:
                raise ValidationError("a dynamic network needs at least one snapshot")
            mats = [s.adj if isinstance(s, SnapshotGraph) else np.asarray(s) for s in snapshots]
            if len({m.shape for m in mats}) != 1:
                raise ValidationError("all snapshots must share the same node count")
            data = np.stack(mats)
        if data.ndim != 3 or data.shape[1] != data.shape[2]:
            raise ValidationError(f"expected a (T, n, n) stack, got shape {data.shape}")
        if data.shape[0] < 1:
            raise ValidationError("a dynamic network needs at least one snapshot")
        if data.dtype == bool:
            data = data.astype(np.uint8)
        if not np.all(np.isfinite(data)):
            raise ValidationError("snapshots have non-finite entries")
        if not np.array_equal(data, data.transpose(0, 2, 1)):
            raise ValidationError("snapshots must be symmetric")
        if np.any(np.diagonal(data, axis1=1, axis2=2)):
            raise ValidationError("snapshots must have a zero diagonal")

        self.binary = bool(np.isin(data, (0, 1)).all())
        if self.binary:
            data = data.astype(np.uint8)
            acc_dtype = np.int64
        else:
            data = data.astype(float)
            acc_dtype = float
        prefix = np.zeros((data.shape[0] + 1,) + data.shape[1:], dtype=acc_dtype)
        np.cumsum(data, axis=0, dtype=acc_dtype, out=prefix[1:])
        self.data = _readonly(data)
        self.prefix = _readonly(prefix)
        self.missing_links = bool(missing_links)
        if labels is not None and len(labels) != self.n:
            raise ValidationError("labels must have one entry per node")
        self.labels = list(labels) if labels is not None else None
        if times is not None and len(times) != self.T:
            raise ValidationError("times must have one entry per snapshot")
        self.times = list(times) if times is not None else None

    @property
    def T(self) -> int:
        return self.data.shape[0]

    @property
    def n(self) -> int:
        return self.data.shape[1]

    def snapshot(self, t: int) -> np.ndarray:
        """Adjacency matrix at time ``t`` (1-based)."""
        if not 1 <= t <= self.T:
            raise ValidationError(f"t={t} outside 1..{self.T}")
        return self.data[t - 1]

    def snapshots(self) -> list[SnapshotGraph]:
        if not self.binary:
            raise ValidationError("snapshots are real-valued, not graphs")
        return [SnapshotGraph(a) for a in self.data]

    def __len__(self):
        return self.T

    def __eq__(self, other):
        if not isinstance(other, DynamicNetwork):
            return NotImplemented
        return (
            self.data.shape == other.data.shape
            and np.array_equal(self.data, other.data)
            and self.missing_links == other.missing_links
        )

    def __repr__(self):
        return f"DynamicNetwork(T={self.T}, n={self.n}, binary={self.binary})"


def norm_1_inf(M) -> float:
    """Largest column sum of absolute values."""
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        raise ValidationError("norm of an empty matrix is undefined")
    if M.ndim == 1:
        M = M[:, None]
    return float(np.abs(M).sum(axis=0).max())


def empirical_quantile(values, level: float) -> float:
    """Nearest-rank quantile: smallest order statistic whose ECDF reaches ``level``."""
    if not 0 < level < 1:
        raise ValidationError(f"quantile level must be in (0, 1), got {level}")
    values = np.asarray(values)
    if values.size == 0:
        raise ValidationError("quantile of an empty sample")
    return float(np.quantile(values, level, method="inverted_cdf"))


def estimate_kappa(net: DynamicNetwork, level: float = 0.9) -> float:
    """Max over time of the ``level``-quantile of node degrees.

    Pass the network of observed links (default usage) or, when it is
    available, the complete network to get the degree quantile of ``A``.
    """
    if not 0 < level < 1:
        raise ValidationError(f"quantile level must be in (0, 1), got {level}")
    degrees = net.data.sum(axis=1)  # column sums, shape (T, n)
    return max(empirical_quantile(d, level) for d in degrees)


def estimate_omega(net: DynamicNetwork) -> float:
    """Maximum observed degree over all snapshots."""
    return float(net.data.sum(axis=1).max())


# --------------------------------------------------------------------------
# Serialization


MANIFEST = "manifest.json"


def _edge_lines(adj: np.ndarray) -> str:
    i, j = np.nonzero(np.triu(adj, 1))
    return "".join(f"{a} {b}\n" for a, b in zip(i.tolist(), j.tolist()))


def write_edge_dir(net: DynamicNetwork, path, extra: dict | None = None) -> None:
    """Write ``t<k>.edges`` files (k = 1..T) and a JSON manifest."""
    if not net.binary:
        raise ValidationError("only binary networks can be written as edge lists")
    os.makedirs(path, exist_ok=True)
    for t in range(1, net.T + 1):
        with open(os.path.join(path, f"t{t}.edges"), "w", newline="\n") as fh:
            fh.write(_edge_lines(net.snapshot(t)))
    manifest = {"format": "edge-dir", "n": net.n, "T": net.T, "missing_links": net.missing_links}
    if net.labels is not None:
        manifest["labels"] = net.labels
    if net.times is not None:
        manifest["times"] = net.times
    if extra:
        manifest.update(extra)
    with open(os.path.join(path, MANIFEST), "w", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _parse_edges(lines: Iterable[str], n: int, where: str) -> np.ndarray:
    a = np.zeros((n, n), dtype=np.uint8)
    for lineno, line in enumerate(lines, 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValidationError(f"{where}:{lineno}: expected 'i j'")
        i, j = int(parts[0]), int(parts[1])
        if not (0 <= i < n and 0 <= j < n) or i == j:
            raise ValidationError(f"{where}:{lineno}: invalid edge ({i}, {j})")
        a[i, j] = a[j, i] = 1
    return a


def read_manifest(path) -> dict:
    with open(os.path.join(path, MANIFEST)) as fh:
        return json.load(fh)


def read_edge_dir(path) -> DynamicNetwork:
    manifest = read_manifest(path)
    if manifest.get("format", "edge-dir") != "edge-dir":
        raise ValidationError(f"{path} holds a {manifest['format']!r} sequence, not a fixed node set")
    n, T = int(manifest["n"]), int(manifest["T"])
    mats = []
    for t in range(1, T + 1):
        fname = os.path.join(path, f"t{t}.edges")
        with open(fname) as fh:
            mats.append(_parse_edges(fh, n, fname))
    return DynamicNetwork(
        np.stack(mats) if mats else np.zeros((0, n, n)),
        missing_links=manifest.get("missing_links", False),
        labels=manifest.get("labels"),
        times=manifest.get("times"),
    )


def write_csv(net: DynamicNetwork, path) -> None:
    """Whole sequence as ``t,i,j`` rows; a leading comment records n and T."""
    if not net.binary:
        raise ValidationError("only binary networks can be written as edge lists")
    with open(path, "w", newline="\n") as fh:
        fh.write(f"# n={net.n} T={net.T}\n")
        fh.write("t,i,j\n")
        for t in range(1, net.T + 1):
            i, j = np.nonzero(np.triu(net.snapshot(t), 1))
            for a, b in zip(i.tolist(), j.tolist()):
                fh.write(f"{t},{a},{b}\n")


def read_csv(path, n: int | None = None, T: int | None = None) -> DynamicNetwork:
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                for tok in line[1:].split():
                    key, _, val = tok.partition("=")
                    if key == "n" and n is None:
                        n = int(val)
                    elif key == "T" and T is None:
                        T = int(val)
                continue
            if line.startswith("t,"):
                continue
            t, i, j = (int(x) for x in line.split(","))
            rows.append((t, i, j))
    if n is None:
        n = 1 + max((max(i, j) for _, i, j in rows), default=-1)
    if T is None:
        T = max((t for t, _, _ in rows), default=0)
    if T < 1:
        raise ValidationError(f"{path}: no snapshots")
    data = np.zeros((T, n, n), dtype=np.uint8)
    for t, i, j in rows:
        if not 1 <= t <= T or not (0 <= i < n and 0 <= j < n) or i == j:
            raise ValidationError(f"{path}: invalid row {t},{i},{j}")
        data[t - 1, i, j] = data[t - 1, j, i] = 1
    return DynamicNetwork(data)
