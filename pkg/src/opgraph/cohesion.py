"""Burt's constraint on an unweighted undirected network.

With every tie weighted 1 the proportional tie strength is
``p[i, j] = 1 / deg(i)`` for neighbours and 0 otherwise; the dyadic
constraint is ``c[i, j] = (p[i, j] + sum_k p[i, k] * p[k, j]) ** 2`` and the
aggregate constraint ``C[i]`` sums ``c[i, j]`` over the neighbours of ``i``.
Isolated nodes have no constraint and are left out of every average.
"""

from __future__ import annotations

import csv
import math
from collections import defaultdict
from dataclasses import dataclass
from typing import IO, Hashable

import numpy as np
import scipy.sparse as sp

from opgraph.errors import GraphError
from opgraph.graph import Graph


@dataclass(frozen=True)
class ConstraintReport:
    per_node: dict[Hashable, float]
    overall_mean: float
    by_role_mean: dict[str, float]
    role_counts: dict[str, int]
    isolated_excluded: int


def proportional_tie(g: Graph, i, j) -> float:
    a, b = g.node_index(i), g.node_index(j)
    deg = len(g.adj[a])
    if deg == 0:
        raise GraphError(f"node {g.nodes[a]!r} is isolated")
    return 1.0 / deg if b in g.adj[a] else 0.0


def dyadic_constraint(g: Graph, i, j) -> float:
    a, b = g.node_index(i), g.node_index(j)
    if b not in g.adj[a]:
        raise GraphError(f"{g.nodes[b]!r} is not a neighbour of {g.nodes[a]!r}")
    indirect = sum(proportional_tie(g, a, k) * proportional_tie(g, k, b)
                   for k in g.adj[a] & g.adj[b])
    return (proportional_tie(g, a, b) + indirect) ** 2


def _role_of(label) -> str:
    if isinstance(label, tuple) and len(label) > 1:
        return str(label[1])
    return "unknown"


def constraint_vector(g: Graph) -> np.ndarray:
    """Aggregate constraint of every node (NaN for isolated nodes)."""
    a = g.csr.astype(np.float64)
    deg = g.degrees.astype(np.float64)
    inv = np.divide(1.0, deg, out=np.zeros_like(deg), where=deg > 0)
    # two-step weight sum_k a_ik a_kj / deg(k), kept only on existing ties
    two_step = (a @ sp.diags(inv) @ a).multiply(a).tocsr()
    direct = a.tocsr().copy()
    direct.data[:] = 1.0
    s = (direct + two_step).tocsr()
    s.data **= 2
    totals = np.asarray(s.sum(axis=1)).ravel()
    out = totals * inv**2
    out[deg == 0] = np.nan
    return out


def aggregate_constraint(g: Graph) -> ConstraintReport:
    """Per-node constraint plus overall and per-role means.

    A node's role is the second element of its label; the role mean covers
    nodes holding that role themselves.
    """
    if g.edge_count == 0:
        raise GraphError("constraint is undefined on a graph without edges")
    values = constraint_vector(g)
    per_node: dict[Hashable, float] = {}
    by_role: dict[str, list[float]] = defaultdict(list)
    for label, c in zip(g.nodes, values.tolist()):
        if math.isnan(c):
            continue
        per_node[label] = c
        by_role[_role_of(label)].append(c)
    overall = math.fsum(per_node.values()) / len(per_node)
    return ConstraintReport(
        per_node,
        overall,
        {r: math.fsum(v) / len(v) for r, v in sorted(by_role.items())},
        {r: len(v) for r, v in sorted(by_role.items())},
        len(g) - len(per_node),
    )


def write_role_means(rows: list[tuple[int, str, float]], fh: IO[str]) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(("segment", "role", "mean_constraint"))
    for seg, role, value in rows:
        w.writerow((seg, role, repr(value)))


def write_per_node(report: ConstraintReport, fh: IO[str]) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(("provider_id", "role", "constraint"))
    for label in sorted(report.per_node, key=str):
        pid = label[0] if isinstance(label, tuple) else label
        w.writerow((pid, _role_of(label), repr(report.per_node[label])))
