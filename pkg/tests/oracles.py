"""Brute-force reference implementations used as test oracles.

Everything here works on plain ``(n, set_of_edges)`` descriptions and shares
no code with the package.
"""

from __future__ import annotations

import itertools
import math
import random
from fractions import Fraction


def random_edges(n: int, p: float, rng: random.Random) -> set[tuple[int, int]]:
    return {(i, j) for i, j in itertools.combinations(range(n), 2) if rng.random() < p}


def adjacency(n: int, edges) -> list[set[int]]:
    adj = [set() for _ in range(n)]
    for i, j in edges:
        adj[i].add(j)
        adj[j].add(i)
    return adj


def triangles(n: int, edges) -> tuple[int, list[int]]:
    """O(n^3) enumeration of all node triples."""
    e = {frozenset(x) for x in edges}
    total = 0
    per_node = [0] * n
    for a, b, c in itertools.combinations(range(n), 3):
        if {frozenset((a, b)), frozenset((a, c)), frozenset((b, c))} <= e:
            total += 1
            for v in (a, b, c):
                per_node[v] += 1
    return total, per_node


def local_clustering(n: int, edges, i: int) -> float:
    """Closed triples centred on i over all triples centred on i."""
    e = {frozenset(x) for x in edges}
    nbrs = [j for j in range(n) if frozenset((i, j)) in e]
    pairs = list(itertools.combinations(nbrs, 2))
    if not pairs:
        return 0.0
    closed = sum(1 for a, b in pairs if frozenset((a, b)) in e)
    return closed / len(pairs)


def density(n: int, edges) -> float:
    if n < 2:
        return 0.0
    possible = sum(1 for _ in itertools.combinations(range(n), 2))
    return len(set(map(frozenset, edges))) / possible


def floyd_warshall(n: int, edges) -> list[list[float]]:
    d = [[math.inf] * n for _ in range(n)]
    for i in range(n):
        d[i][i] = 0
    for i, j in edges:
        d[i][j] = d[j][i] = 1
    for k in range(n):
        for i in range(n):
            for j in range(n):
                if d[i][k] + d[k][j] < d[i][j]:
                    d[i][j] = d[i][k] + d[k][j]
    return d


def components(n: int, edges) -> list[list[int]]:
    d = floyd_warshall(n, edges)
    seen, comps = set(), []
    for i in range(n):
        if i in seen:
            continue
        comp = [j for j in range(n) if d[i][j] < math.inf]
        seen.update(comp)
        comps.append(comp)
    return comps


def average_path_length(n: int, edges) -> float:
    """Exact rational mean over unordered pairs of a connected graph."""
    d = floyd_warshall(n, edges)
    pairs = list(itertools.combinations(range(n), 2))
    if not pairs:
        return 0.0
    assert all(d[i][j] < math.inf for i, j in pairs)
    return float(Fraction(sum(int(d[i][j]) for i, j in pairs), len(pairs)))


def proportional(adj, i: int, j: int) -> float:
    """p_ij with unit weights over the full node set."""
    total = sum(1 for k in range(len(adj)) if k in adj[i])
    return (1.0 if j in adj[i] else 0.0) / total


def dyadic_constraint(adj, i: int, j: int) -> float:
    """(p_ij + sum over every k != i, j of p_ik p_kj)^2, looping over all k."""
    indirect = 0.0
    for k in range(len(adj)):
        if k in (i, j) or not adj[k]:
            continue
        indirect += proportional(adj, i, k) * proportional(adj, k, j)
    return (proportional(adj, i, j) + indirect) ** 2


def aggregate_constraint(adj, i: int) -> float:
    return sum(dyadic_constraint(adj, i, j) for j in range(len(adj)) if j in adj[i])


def pearson_textbook(x, y) -> float:
    """Computational formula with exact rational sums."""
    n = len(x)
    fx = [Fraction(v) for v in x]
    fy = [Fraction(v) for v in y]
    sx, sy = sum(fx), sum(fy)
    sxy = sum(a * b for a, b in zip(fx, fy))
    sxx = sum(a * a for a in fx)
    syy = sum(b * b for b in fy)
    num = n * sxy - sx * sy
    den2 = (n * sxx - sx * sx) * (n * syy - sy * sy)
    return float(num) / math.sqrt(float(den2))


def co_membership(teams: dict[str, set[str]]) -> set[frozenset[str]]:
    """Provider pairs sharing an encounter, by checking every pair."""
    providers = sorted(set().union(*teams.values())) if teams else []
    out = set()
    for a, b in itertools.combinations(providers, 2):
        if any(a in t and b in t for t in teams.values()):
            out.add(frozenset((a, b)))
    return out
