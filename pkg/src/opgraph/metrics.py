"""Structural metrics of a one-mode network.

Clustering follows the Watts-Strogatz convention: the network coefficient is
the mean of the local coefficients over *all* nodes, nodes of degree < 2
contributing 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import IO

import numpy as np

from opgraph.errors import GraphError
from opgraph.graph import Graph, component_labels, node_triangles

DEFAULT_MAX_EXACT_NODES = 20_000
_BFS_BLOCK_BYTES = 64 << 20


@dataclass
class SegmentMetrics:
    """Metric vector of one time segment of one phase.

    ``cc`` and ``apl`` (and the null baselines) refer to the largest connected
    component; ``density``, ``triangle_ratio`` and constraint use the whole
    projected network. Fields are ``None`` where a metric is undefined for
    the segment (e.g. an empty window).
    """

    segment: int
    phase: str
    n_encounters: int = 0
    n_nodes: int = 0
    n_edges: int = 0
    lcc_nodes: int = 0
    lcc_edges: int = 0
    largest_component_proportion: float | None = None
    cc: float | None = None
    apl: float | None = None
    density: float | None = None
    triangle_ratio: float | None = None
    constraint_overall: float | None = None
    constraint_by_role: dict[str, float] = field(default_factory=dict)
    cc_rnd_er: float | None = None
    pl_rnd_er: float | None = None
    cc_rnd_cfg: float | None = None
    pl_rnd_cfg: float | None = None
    sw_er: float | None = None
    sw_config: float | None = None
    outcome_ratio: float | None = None


def local_clustering_all(g: Graph) -> np.ndarray:
    deg = g.degrees
    tri = node_triangles(g)
    out = np.zeros(len(g))
    ok = deg >= 2
    out[ok] = tri[ok] / (deg[ok] * (deg[ok] - 1) / 2)
    return out


def local_clustering(g: Graph, i) -> float:
    """Fraction of the neighbour pairs of `i` that are adjacent (0 if deg < 2)."""
    idx = g.node_index(i)
    nbrs = sorted(g.adj[idx])
    k = len(nbrs)
    if k < 2:
        return 0.0
    links = sum(1 for a in range(k) for b in nbrs[a + 1:] if b in g.adj[nbrs[a]])
    return links / (k * (k - 1) / 2)


def global_clustering(g: Graph) -> float:
    if len(g) == 0:
        raise GraphError("clustering coefficient of an empty graph is undefined")
    return math.fsum(local_clustering_all(g)) / len(g)


def _distance_sum(g: Graph, sources: np.ndarray) -> tuple[int, int]:
    """Sum of BFS distances from `sources` to every reachable node, and the
    number of (source, target) pairs reached.

    Bit-parallel: each uint64 word of a node's state carries 64 sources, and a
    BFS level is one OR-reduction over the CSR rows.
    """
    n = len(g)
    ptr, idx = g.csr.indptr, g.csr.indices
    isolated = ptr[1:] == ptr[:-1]
    words_per_block = max(1, _BFS_BLOCK_BYTES // (8 * max(len(idx), 1)))
    one = np.uint64(1)
    total = 0
    reached = 0
    for start in range(0, len(sources), 64 * words_per_block):
        src = sources[start:start + 64 * words_per_block]
        bit = np.arange(len(src))
        seen = np.zeros((n, (len(src) + 63) // 64), dtype=np.uint64)
        np.bitwise_or.at(seen, (src, bit // 64), one << (bit % 64).astype(np.uint64))
        frontier = seen.copy()
        depth = 0
        while True:
            depth += 1
            nxt = np.bitwise_or.reduceat(frontier[idx], np.minimum(ptr[:-1], len(idx) - 1), axis=0)
            nxt[isolated] = 0
            nxt &= ~seen
            count = int(np.bitwise_count(nxt).sum())
            if count == 0:
                break
            total += depth * count
            reached += count
            seen |= nxt
            frontier = nxt
    return total, reached


def average_path_length(g: Graph, max_exact_nodes: int = DEFAULT_MAX_EXACT_NODES,
                        sample: int | None = None, seed: int = 0) -> float:
    """Mean shortest-path length over all unordered node pairs of a connected graph.

    Exact (BFS from every node) up to `max_exact_nodes`. Larger graphs need
    ``sample=k``: BFS from `k` uniformly drawn sources, which gives an
    approximate value.
    """
    n = len(g)
    if n <= 1:
        return 0.0
    n_comp, _ = component_labels(g)
    if n_comp > 1:
        raise GraphError(f"average path length needs a connected graph ({n_comp} components)")
    if n > max_exact_nodes and sample is None:
        raise GraphError(
            f"{n} nodes exceeds max_exact_nodes={max_exact_nodes}; pass sample=K for an "
            "approximate path length from K random sources"
        )
    if sample is not None and sample < n:
        sources = np.sort(np.random.default_rng(seed).choice(n, size=max(1, sample), replace=False))
    else:
        sources = np.arange(n)
    total, reached = _distance_sum(g, sources)
    return total / reached


def triangle_ratio(g: Graph) -> float:
    """Triangles divided by the number of node triples C(n, 3)."""
    n = len(g)
    if n < 3:
        raise GraphError(f"triangle ratio needs at least 3 nodes, got {n}")
    return int(node_triangles(g).sum() // 3) / math.comb(n, 3)


def degree_distribution(g: Graph) -> dict[int, int]:
    counts = np.bincount(g.degrees) if len(g) else np.zeros(0, dtype=np.int64)
    return {int(k): int(c) for k, c in enumerate(counts) if c}


def write_degree_distribution(dist: dict[int, int], fh: IO[str]) -> None:
    fh.write("degree,count\n")
    for k in sorted(dist):
        fh.write(f"{k},{dist[k]}\n")
