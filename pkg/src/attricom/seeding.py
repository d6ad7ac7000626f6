"""Initial memberships from conductance-ranked locally minimal neighborhoods."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import AffiliationMatrix, AttributedGraph


@dataclass(frozen=True)
class SeedSet:
    """A closed neighborhood (center plus its neighbors) and its conductance."""

    members: frozenset[int]
    conductance: float
    center: int


def conductance(G: AttributedGraph, S) -> float:
    """cut(S) / min(vol(S), 2|E| - vol(S)), or 1.0 when the denominator is 0."""
    members = np.fromiter((int(x) for x in S), dtype=np.int64)
    if members.size == 0:
        raise ValueError("conductance is undefined for the empty set")
    members = np.unique(members)
    if members.size == G.num_nodes:
        raise ValueError("conductance is undefined for the full vertex set")
    if members.min() < 0 or members.max() >= G.num_nodes:
        raise ValueError("node id out of range")

    mask = np.zeros(G.num_nodes, dtype=bool)
    mask[members] = True
    vol = int(G.degrees[members].sum())
    internal = 0  # counts each internal edge twice
    for w in members:
        internal += int(mask[G.neighbors(w)].sum())
    cut = vol - internal
    denom = min(vol, 2 * G.num_edges - vol)
    if denom == 0:
        return 1.0
    return cut / denom


def _closed_neighborhood(G: AttributedGraph, u: int) -> np.ndarray:
    nbrs = G.neighbors(u)
    pos = int(np.searchsorted(nbrs, u))
    return np.insert(nbrs, pos, u)


def locally_minimal_neighborhoods(G: AttributedGraph) -> list[SeedSet]:
    """Closed neighborhoods beating every neighbor's closed neighborhood.

    A center u qualifies when its closed neighborhood has strictly lower
    conductance than that of each neighbor v, except that neighbors whose
    closed neighborhood is the identical node set cannot disqualify it.
    Neighborhoods spanning the whole graph are never returned and compare
    at conductance 1 (the zero-denominator convention). Duplicate member
    sets are reported once, for the smallest center. Sorted ascending by
    conductance, ties broken by smaller center id.
    """
    n = G.num_nodes
    two_e = 2 * G.num_edges
    degs = G.degrees

    phi = np.ones(n)
    keys: list[bytes | None] = [None] * n
    node_mask = np.zeros(n, dtype=bool)
    for u in range(n):
        closed = _closed_neighborhood(G, u)
        keys[u] = closed.tobytes()
        if closed.size == n:
            continue  # spans the graph; phi stays at the comparison value 1
        node_mask[closed] = True
        vol = int(degs[closed].sum())
        internal = 0
        for w in closed:
            internal += int(node_mask[G.neighbors(w)].sum())
        node_mask[closed] = False
        denom = min(vol, two_e - vol)
        phi[u] = (vol - internal) / denom if denom else 1.0

    best: dict[bytes, SeedSet] = {}
    for u in range(n):
        closed = _closed_neighborhood(G, u)
        if closed.size == n:
            continue
        key = keys[u]
        ok = True
        for v in G.neighbors(u):
            if keys[v] == key:
                continue
            if not phi[u] < phi[v]:
                ok = False
                break
        if not ok:
            continue
        if key not in best or u < best[key].center:
            best[key] = SeedSet(frozenset(int(x) for x in closed), float(phi[u]), u)

    seeds = sorted(best.values(), key=lambda s: (s.conductance, s.center))
    return seeds


def init_affiliations(G: AttributedGraph, C: int, seed: int) -> AffiliationMatrix:
    """Indicator columns from the best seed sets, random indicators beyond them.

    The first min(C, #seeds) communities are the seed sets at membership 1.
    Any remaining community assigns each node membership 1 independently with
    probability (average seed size) / N, redrawing until nonempty; with no
    seeds at all, the average closed-neighborhood size 1 + 2|E|/N stands in.
    Deterministic for a given seed.
    """
    if C < 1:
        raise ValueError("community count must be >= 1")
    n = G.num_nodes
    seeds = locally_minimal_neighborhoods(G)
    values = np.zeros((n, C))
    take = min(C, len(seeds))
    for j in range(take):
        values[sorted(seeds[j].members), j] = 1.0

    if take < C:
        if seeds:
            avg_size = sum(len(s.members) for s in seeds) / len(seeds)
        else:
            avg_size = 1.0 + 2.0 * G.num_edges / n
        p = min(1.0, max(avg_size / n, 1.0 / n))
        rng = np.random.default_rng(seed)
        for j in range(take, C):
            while True:
                col = rng.random(n) < p
                if col.any():
                    break
            values[col, j] = 1.0

    return AffiliationMatrix(values)
