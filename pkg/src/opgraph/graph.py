"""Bipartite segment networks, one-mode projection and structural primitives."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import IO, Hashable, Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from opgraph.errors import GraphError
from opgraph.ingest import Role, Segment


@dataclass(frozen=True)
class BipartiteGraph:
    provider_nodes: frozenset[tuple[str, Role]]
    encounter_nodes: frozenset[str]
    edges: frozenset[tuple[str, str]]


def build_bipartite(segment: Segment) -> BipartiteGraph:
    """Provider x encounter graph of a (deduplicated, single-phase) segment."""
    roles: dict[str, Role] = {}
    encounters = set()
    edges = set()
    for r in segment.records:
        roles.setdefault(r.provider_id, r.role)
        encounters.add(r.encounter_id)
        edges.add((r.provider_id, r.encounter_id))
    return BipartiteGraph(frozenset(roles.items()), frozenset(encounters), frozenset(edges))


class Graph:
    """Undirected simple graph over an indexed node list.

    Nodes are arbitrary hashable labels (``(provider_id, role)`` tuples for
    projected networks, plain integers for null models); algorithms work on
    the integer positions. Storage is a symmetric CSR matrix. Instances are
    treated as immutable.
    """

    def __init__(self, nodes: Sequence[Hashable], edges: Iterable[tuple[int, int]] = ()):
        self.nodes: tuple = tuple(nodes)
        n = len(self.nodes)
        pairs = np.array(list(edges), dtype=np.int64).reshape(-1, 2)
        if len(pairs):
            if (pairs[:, 0] == pairs[:, 1]).any():
                raise GraphError("self-loop in edge list")
            if pairs.min() < 0 or pairs.max() >= n:
                raise GraphError(f"edge endpoint out of range for {n} nodes")
        self._set_matrix(_symmetric_csr(n, pairs[:, 0], pairs[:, 1]))

    def _set_matrix(self, matrix: sp.csr_matrix) -> None:
        self.csr: sp.csr_matrix = matrix
        self.edge_count: int = matrix.nnz // 2

    @classmethod
    def from_arrays(cls, nodes: Sequence[Hashable], rows: np.ndarray, cols: np.ndarray) -> "Graph":
        """Build from endpoint arrays already known to be loop-free and in range.

        Parallel pairs collapse to one edge.
        """
        g = cls.__new__(cls)
        g.nodes = tuple(nodes)
        g._set_matrix(_symmetric_csr(len(g.nodes), np.asarray(rows), np.asarray(cols)))
        return g

    def __len__(self) -> int:
        return len(self.nodes)

    def __repr__(self) -> str:
        return f"Graph(n={len(self)}, m={self.edge_count})"

    @cached_property
    def adj(self) -> tuple[frozenset[int], ...]:
        ptr, idx = self.csr.indptr, self.csr.indices.tolist()
        return tuple(frozenset(idx[ptr[i]:ptr[i + 1]]) for i in range(len(self)))

    @cached_property
    def index(self) -> dict[Hashable, int]:
        return {v: i for i, v in enumerate(self.nodes)}

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.diff(self.csr.indptr).astype(np.int64)

    def edges(self) -> list[tuple[int, int]]:
        coo = sp.triu(self.csr, k=1).tocoo()
        order = np.lexsort((coo.col, coo.row))
        return list(zip(coo.row[order].tolist(), coo.col[order].tolist()))

    def node_index(self, node: Hashable | int) -> int:
        """Position of `node`, given either as a label or as an integer index."""
        if node in self.index:
            return self.index[node]
        if isinstance(node, (int, np.integer)) and 0 <= node < len(self):
            return int(node)
        raise GraphError(f"unknown node {node!r}")

    def subgraph(self, members: Iterable[int]) -> "Graph":
        """Node-induced subgraph; node order follows the original indices."""
        keep = np.array(sorted(set(members)), dtype=np.int64)
        g = Graph.__new__(Graph)
        g.nodes = tuple(self.nodes[i] for i in keep)
        g._set_matrix(self.csr[keep][:, keep].tocsr())
        return g

    def __eq__(self, other) -> bool:
        return (isinstance(other, Graph) and self.nodes == other.nodes
                and self.edges() == other.edges())

    __hash__ = None


def _symmetric_csr(n: int, rows: np.ndarray, cols: np.ndarray) -> sp.csr_matrix:
    rows = rows.astype(np.int64)
    cols = cols.astype(np.int64)
    r = np.concatenate([rows, cols])
    c = np.concatenate([cols, rows])
    m = sp.csr_matrix((np.ones(len(r), dtype=np.int64), (r, c)), shape=(n, n))
    m.sum_duplicates()
    m.data[:] = 1
    m.sort_indices()
    return m


def project_one_mode(b: BipartiteGraph) -> Graph:
    """Providers adjacent iff they share at least one encounter.

    Nodes are ``(provider_id, role)`` sorted by provider id.
    """
    providers = sorted(b.provider_nodes)
    pos = {pid: i for i, (pid, _) in enumerate(providers)}
    members: dict[str, list[int]] = {}
    for pid, enc in b.edges:
        members.setdefault(enc, []).append(pos[pid])
    edges = set()
    for team in members.values():
        team.sort()
        for a in range(len(team)):
            for c in range(a + 1, len(team)):
                edges.add((team[a], team[c]))
    return Graph(providers, sorted(edges))


def component_labels(g: Graph) -> tuple[int, np.ndarray]:
    if len(g) == 0:
        return 0, np.zeros(0, dtype=np.int64)
    return connected_components(g.csr, directed=False)


def largest_component(g: Graph) -> tuple[Graph, float]:
    """Largest connected component and its share of all nodes.

    Equal-size components are resolved in favour of the one holding the
    lowest node index. An empty graph yields itself with proportion 1.
    """
    if len(g) == 0:
        return g, 1.0
    n_comp, labels = component_labels(g)
    sizes = np.bincount(labels, minlength=n_comp)
    first_node = np.full(n_comp, len(g))
    np.minimum.at(first_node, labels, np.arange(len(g)))
    best = min(np.flatnonzero(sizes == sizes.max()), key=lambda c: first_node[c])
    members = np.flatnonzero(labels == best)
    if len(members) == len(g):
        return g, 1.0
    return g.subgraph(members.tolist()), len(members) / len(g)


def density(g: Graph) -> float:
    n = len(g)
    if n < 2:
        return 0.0
    return 2.0 * g.edge_count / (n * (n - 1))


def adjacency_bits(g: Graph) -> np.ndarray:
    """Adjacency as packed bit rows: bit ``j`` of row ``i`` is set iff i ~ j."""
    n = len(g)
    bits = np.zeros((n, (n + 63) // 64), dtype=np.uint64)
    rows = np.repeat(np.arange(n), g.degrees)
    cols = g.csr.indices.astype(np.int64)
    np.bitwise_or.at(bits, (rows, cols // 64), np.uint64(1) << (cols % 64).astype(np.uint64))
    return bits


def node_triangles(g: Graph, chunk_bytes: int = 32 << 20) -> np.ndarray:
    """Number of triangles through each node.

    Every edge ``(i, j)`` closes ``|N(i) & N(j)|`` triangles; summing that
    over the edges at a node counts each of its triangles twice.
    """
    n = len(g)
    out = np.zeros(n, dtype=np.int64)
    if g.edge_count == 0:
        return out
    bits = adjacency_bits(g)
    coo = sp.triu(g.csr, k=1).tocoo()
    lo, hi = coo.row.astype(np.int64), coo.col.astype(np.int64)
    step = max(1, chunk_bytes // (8 * bits.shape[1]))
    for s in range(0, len(lo), step):
        a, b = lo[s:s + step], hi[s:s + step]
        common = np.bitwise_count(bits[a] & bits[b]).sum(axis=1, dtype=np.int64)
        np.add.at(out, a, common)
        np.add.at(out, b, common)
    return out // 2


def triangle_count(g: Graph) -> int:
    return int(node_triangles(g).sum()) // 3


def _provider_id(label) -> str:
    return str(label[0]) if isinstance(label, tuple) else str(label)


def write_edgelist(g: Graph, fh: IO[str]) -> None:
    """One ``a<TAB>b`` line per edge with ``a < b``, lines sorted."""
    lines = []
    for i, j in g.edges():
        a, b = sorted((_provider_id(g.nodes[i]), _provider_id(g.nodes[j])))
        lines.append(f"{a}\t{b}\n")
    fh.writelines(sorted(lines))
