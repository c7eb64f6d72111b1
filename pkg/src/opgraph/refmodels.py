"""Seeded null models: uniform G(n, m) and the erased configuration model.

All randomness comes from :func:`numpy.random.default_rng` (PCG64). Replicate
``k`` of a baseline run is seeded with ``seed + k`` so results do not depend
on evaluation order.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple, Sequence

import numpy as np

from opgraph.errors import GraphError
from opgraph.graph import Graph, largest_component
from opgraph.metrics import average_path_length, global_clustering

log = logging.getLogger(__name__)

DEFAULT_REPLICATES = 20


class NullKind(str, Enum):
    ERDOS_RENYI = "erdos_renyi"
    CONFIGURATION = "configuration"

    def __str__(self) -> str:
        return self.value


def _unrank_pairs(k: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Map ranks to pairs ``(j, i)`` with ``j < i`` where rank = i(i-1)/2 + j."""
    k = k.astype(np.int64)
    i = np.floor((1.0 + np.sqrt(1.0 + 8.0 * k)) / 2.0).astype(np.int64)
    # float sqrt can be off by one for large ranks
    i -= (i * (i - 1) // 2) > k
    i += ((i + 1) * i // 2) <= k
    j = k - i * (i - 1) // 2
    return j, i


def gen_erdos_renyi(n: int, m: int, seed: int) -> Graph:
    """Uniform random graph with exactly `m` edges on `n` nodes."""
    total = n * (n - 1) // 2
    if n < 0 or not 0 <= m <= total:
        raise GraphError(f"need 0 <= m <= n(n-1)/2 = {total}, got n={n}, m={m}")
    rng = np.random.default_rng(seed)
    ranks = rng.choice(total, size=m, replace=False) if m else np.zeros(0, dtype=np.int64)
    rows, cols = _unrank_pairs(np.asarray(ranks))
    return Graph.from_arrays(range(n), rows, cols)


class ErasureReport(NamedTuple):
    self_loops_removed: int
    multi_edges_collapsed: int


def _check_degrees(degrees: Sequence[int]) -> np.ndarray:
    deg = np.asarray(degrees, dtype=np.int64)
    n = len(deg)
    if (deg < 0).any():
        raise GraphError("degrees must be non-negative")
    if int(deg.sum()) % 2:
        raise GraphError(f"degree sum must be even, got {int(deg.sum())}")
    if n and deg.max() >= n:
        raise GraphError(f"max degree {int(deg.max())} must be < n = {n}")
    return deg


def gen_configuration(degrees: Sequence[int], seed: int) -> tuple[Graph, ErasureReport]:
    """Erased configuration model: random stub matching, then self-loops are
    dropped and parallel edges merged. The report counts both corrections."""
    deg = _check_degrees(degrees)
    n = len(deg)
    rng = np.random.default_rng(seed)
    stubs = rng.permutation(np.repeat(np.arange(n, dtype=np.int64), deg))
    a, b = stubs[0::2], stubs[1::2]
    loops = a == b
    a, b = a[~loops], b[~loops]
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    n_unique = len(np.unique(lo * max(n, 1) + hi))
    g = Graph.from_arrays(range(n), lo, hi)
    return g, ErasureReport(int(loops.sum()), int(len(lo) - n_unique))


@dataclass(frozen=True)
class NullModelSpec:
    kind: NullKind
    n_nodes: int
    seed: int = 0
    n_edges: int | None = None
    degree_sequence: tuple[int, ...] | None = None
    replicates: int = DEFAULT_REPLICATES

    def __post_init__(self):
        object.__setattr__(self, "kind", NullKind(self.kind))
        if self.replicates < 1:
            raise GraphError("replicates must be >= 1")
        if self.kind is NullKind.ERDOS_RENYI:
            if self.n_edges is None or not 0 <= self.n_edges <= self.n_nodes * (self.n_nodes - 1) // 2:
                raise GraphError(f"invalid edge count {self.n_edges} for {self.n_nodes} nodes")
        else:
            if self.degree_sequence is None or len(self.degree_sequence) != self.n_nodes:
                raise GraphError("configuration spec needs a degree sequence of length n_nodes")
            _check_degrees(self.degree_sequence)

    @classmethod
    def for_graph(cls, g: Graph, kind: NullKind | str, seed: int = 0,
                  replicates: int = DEFAULT_REPLICATES) -> "NullModelSpec":
        kind = NullKind(kind)
        if kind is NullKind.ERDOS_RENYI:
            return cls(kind, len(g), seed, n_edges=g.edge_count, replicates=replicates)
        return cls(kind, len(g), seed, degree_sequence=tuple(int(d) for d in g.degrees),
                   replicates=replicates)

    def generate(self, k: int = 0) -> tuple[Graph, ErasureReport]:
        """Replicate `k`, seeded with ``seed + k``."""
        if self.kind is NullKind.ERDOS_RENYI:
            return gen_erdos_renyi(self.n_nodes, self.n_edges, self.seed + k), ErasureReport(0, 0)
        return gen_configuration(self.degree_sequence, self.seed + k)


@dataclass(frozen=True)
class Baseline:
    cc_rnd: float
    pl_rnd: float
    replicates_used: int
    skipped: int = 0
    self_loops_removed: int = 0
    multi_edges_collapsed: int = 0
    cc_values: tuple[float, ...] = field(default=(), repr=False)
    pl_values: tuple[float, ...] = field(default=(), repr=False)


def null_metrics(null: Graph) -> tuple[float, float] | None:
    """(CC over all nodes, PL over the largest component), or None if the
    largest component is a single node."""
    core, _ = largest_component(null)
    if len(core) < 2:
        return None
    return global_clustering(null), average_path_length(core)


def null_baselines(g: Graph, spec: NullModelSpec) -> Baseline:
    """Average clustering and path length over ``spec.replicates`` null graphs."""
    if spec.n_nodes != len(g):
        raise GraphError(f"null spec has {spec.n_nodes} nodes, graph has {len(g)}")
    if spec.kind is NullKind.ERDOS_RENYI and spec.n_edges != g.edge_count:
        raise GraphError(f"null spec has {spec.n_edges} edges, graph has {g.edge_count}")
    if spec.kind is NullKind.CONFIGURATION and tuple(spec.degree_sequence) != tuple(g.degrees.tolist()):
        raise GraphError("null spec degree sequence does not match the graph")

    ccs, pls = [], []
    skipped = loops = multi = 0
    for k in range(spec.replicates):
        null, report = spec.generate(k)
        loops += report.self_loops_removed
        multi += report.multi_edges_collapsed
        values = null_metrics(null)
        if values is None:
            log.warning("%s replicate %d (seed %d) has no component with 2+ nodes; skipped",
                        spec.kind, k, spec.seed + k)
            skipped += 1
            continue
        ccs.append(values[0])
        pls.append(values[1])
    if not ccs:
        raise GraphError(f"all {spec.replicates} {spec.kind} replicates were degenerate")
    return Baseline(math.fsum(ccs) / len(ccs), math.fsum(pls) / len(pls), len(ccs), skipped,
                    loops, multi, tuple(ccs), tuple(pls))
