"""Synthetic instances: forest-fire graphs, Bernoulli attributes, model-planted
communities, and uniform edge removal for robustness experiments."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .core import (AffiliationMatrix, AttributedGraph, AttributeWeights,
                   build_graph)
from .likelihood import _sigmoid
from .solver import threshold_memberships


@dataclass(frozen=True)
class ForestFireParams:
    n: int
    p_forward: float = 0.36
    p_backward: float = 0.32
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not (0.0 <= self.p_forward < 1.0 and 0.0 <= self.p_backward < 1.0):
            raise ValueError("burn probabilities must lie in [0, 1)")


@dataclass(frozen=True)
class PlantedSpec:
    """Parameters of a forward run of the generative model.

    Each node joins each community independently with membership_prob at
    membership value `strength` (lonely nodes get one uniform community);
    each attribute is tied to one uniform community at weight +weight_scale,
    with `bias` setting the non-member presence rate.
    """

    n: int
    c: int
    k: int
    membership_prob: float = 0.25
    strength: float = 1.0
    weight_scale: float = 5.0
    bias: float = -2.0
    seed: int = 0

    def __post_init__(self):
        if self.n < 2 or self.c < 1 or self.k < 0:
            raise ValueError("need n >= 2, c >= 1, k >= 0")
        if not (0.0 < self.membership_prob <= 1.0):
            raise ValueError("membership_prob must lie in (0, 1]")
        if self.strength <= 0.0:
            raise ValueError("strength must be > 0")


def forest_fire(params: ForestFireParams) -> AttributedGraph:
    """Grow a connected graph by the forest-fire process (no attributes).

    Nodes arrive one at a time; each picks a uniform ambassador among the
    existing nodes and burns breadth-first from it, drawing geometrically many
    forward (out-link) and backward (in-link) spreads per burning node with
    means p/(1-p), never revisiting a node. The newcomer links to every burned
    node; burn directions only steer the spread, edges are stored undirected.
    """
    rng = np.random.default_rng(params.seed)
    n = params.n
    out_links: list[list[int]] = [[] for _ in range(n)]
    in_links: list[list[int]] = [[] for _ in range(n)]
    edges: list[tuple[int, int]] = []

    for w in range(1, n):
        ambassador = int(rng.integers(w))
        visited = {ambassador}
        frontier = deque([ambassador])
        burned = [ambassador]
        while frontier:
            x = frontier.popleft()
            n_fwd = int(rng.geometric(1.0 - params.p_forward)) - 1
            n_bwd = int(rng.geometric(1.0 - params.p_backward)) - 1
            for links, want in ((out_links[x], n_fwd), (in_links[x], n_bwd)):
                if want <= 0:
                    continue
                avail = [y for y in links if y not in visited]
                if not avail:
                    continue
                if want >= len(avail):
                    chosen = avail
                else:
                    picks = rng.choice(len(avail), size=want, replace=False)
                    chosen = [avail[int(i)] for i in picks]
                for y in chosen:
                    visited.add(y)
                    frontier.append(y)
                    burned.append(y)
        for x in burned:
            out_links[w].append(x)
            in_links[x].append(w)
            edges.append((x, w))

    return build_graph(edges, [], n, 0)


def bernoulli_attributes(G: AttributedGraph, k: int, p: float,
                         seed: int) -> AttributedGraph:
    """Same edges, k fresh attributes each present independently with probability p."""
    if k < 0:
        raise ValueError("attribute count must be >= 0")
    if not (0.0 <= p <= 1.0):
        raise ValueError("attribute probability must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    if k == 0:
        pairs = np.zeros((0, 2), dtype=np.int64)
    else:
        present = rng.random((G.num_nodes, k)) < p
        pairs = np.argwhere(present)
    return AttributedGraph(G.num_nodes, k, G.edges, pairs)


def planted_instance(spec: PlantedSpec):
    """Run the generative model forward; return the instance and its truth.

    Returns (graph, truth cover, true memberships, true weights). The truth
    cover is the thresholded true membership matrix, so it is directly
    comparable to detection output.
    """
    rng = np.random.default_rng(spec.seed)
    n, c, k = spec.n, spec.c, spec.k

    member = rng.random((n, c)) < spec.membership_prob
    lonely = np.flatnonzero(~member.any(axis=1))
    if len(lonely):
        member[lonely, rng.integers(0, c, size=len(lonely))] = True
    F_values = member.astype(np.float64) * spec.strength

    W_values = np.zeros((k, c + 1))
    if k:
        community_of_attr = rng.integers(0, c, size=k)
        W_values[np.arange(k), community_of_attr] = spec.weight_scale
        W_values[:, -1] = spec.bias

    edge_rows = []
    for u in range(n - 1):
        dots = F_values[u + 1:] @ F_values[u]
        p_edge = -np.expm1(-dots)
        hits = np.flatnonzero(rng.random(n - 1 - u) < p_edge)
        if len(hits):
            edge_rows.append(np.column_stack([np.full(len(hits), u), u + 1 + hits]))
    edges = (np.concatenate(edge_rows) if edge_rows
             else np.zeros((0, 2), dtype=np.int64))

    if k:
        z = F_values @ W_values[:, :-1].T + W_values[:, -1]
        present = rng.random((n, k)) < _sigmoid(z)
        attr_pairs = np.argwhere(present)
    else:
        attr_pairs = np.zeros((0, 2), dtype=np.int64)

    graph = AttributedGraph(n, k, edges, attr_pairs)
    true_F = AffiliationMatrix(F_values)
    true_W = AttributeWeights(W_values)
    truth = threshold_memberships(true_F)
    return graph, truth, true_F, true_W


def remove_edges(G: AttributedGraph, gamma: float, seed: int) -> AttributedGraph:
    """Delete exactly round(gamma * |E|) edges uniformly without replacement.

    Attributes and the node count are untouched; removed edges are
    indistinguishable from never-observed ones downstream.
    """
    if not (0.0 <= gamma < 1.0):
        raise ValueError("edge removal fraction must lie in [0, 1)")
    rng = np.random.default_rng(seed)
    n_remove = int(round(gamma * G.num_edges))
    if n_remove == 0:
        return AttributedGraph(G.num_nodes, G.num_attrs, G.edges, G.attr_pairs)
    drop = rng.choice(G.num_edges, size=n_remove, replace=False)
    keep = np.ones(G.num_edges, dtype=bool)
    keep[drop] = False
    return AttributedGraph(G.num_nodes, G.num_attrs, G.edges[keep], G.attr_pairs)
