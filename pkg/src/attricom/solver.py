"""Block-coordinate ascent: per-node projected gradient steps on memberships,
per-attribute l1 subgradient steps on logistic weights, and thresholding of
the fitted memberships into a community cover."""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import (AffiliationMatrix, AttributedGraph, AttributeWeights,
                   CommunityCover, FitConfig, refresh_column_sums)
from .likelihood import (_LOG_HI, _LOG_LO, ObjectiveValue, _grad_from_state,
                         _local_objective, _node_state, grad_attr_weights,
                         objective)
from .seeding import init_affiliations


@dataclass
class FitResult:
    """Fitted memberships and weights plus the per-iteration objective trace."""

    F: AffiliationMatrix
    W: AttributeWeights
    objective_trace: list[ObjectiveValue]
    iterations_run: int
    converged: bool
    iter_seconds: list[float] = field(default_factory=list)


def update_node(u: int, G: AttributedGraph, F: AffiliationMatrix,
                W: AttributeWeights, config: FitConfig, mask=None,
                adjust_column_sums: bool = True) -> np.ndarray:
    """One backtracking projected-gradient step on node u's membership row.

    Accepts step t when the node-local scaled objective improves by at least
    armijo_const * t * ||g||^2; otherwise shrinks t up to max_trials times and
    leaves the row unchanged on failure. The result is projected onto
    [0, max_f] per coordinate, and the cached column sums are adjusted by the
    row delta unless the caller maintains them at iteration boundaries.
    """
    st = _node_state(u, G, F, W, config, mask)
    f_old = F.values[u].copy()
    g = _grad_from_state(st, f_old)
    g_norm2 = float(g @ g)
    if g_norm2 == 0.0:
        return f_old
    # Projection locks a coordinate whenever the step would leave [0, max_f];
    # if every coordinate is locked the candidate equals f_old for any step
    # size, so all trials would fail the (strictly positive) Armijo test.
    movable = ((g > 0.0) & (f_old < config.max_f)) | ((g < 0.0) & (f_old > 0.0))
    if not movable.any():
        return f_old

    base = _local_objective(st, f_old)
    ls = config.line_search
    t = ls.init_step
    for _ in range(ls.max_trials):
        cand = np.clip(f_old + t * g, 0.0, config.max_f)
        if _local_objective(st, cand) - base >= ls.armijo_const * t * g_norm2:
            F.values[u] = cand
            if adjust_column_sums:
                F.column_sums += cand - f_old
            return cand
        t *= ls.shrink_factor
    return f_old


def _attr_objective(k, G, F, w, config, mask):
    """alpha-scaled Bernoulli log-likelihood of attribute k minus its l1 cost."""
    z = F.values @ w[:-1] + w[-1]
    terms = np.clip(-np.logaddexp(0.0, z), _LOG_LO, _LOG_HI)  # log(1 - Q)
    ones = G.attr_node_ids(k)
    if len(ones):
        terms[ones] = np.clip(-np.logaddexp(0.0, -z[ones]), _LOG_LO, _LOG_HI)
    if mask is not None:
        masked_us = mask.masked_node_ids(k)
        if len(masked_us):
            terms[masked_us] = 0.0
    return config.alpha * float(terms.sum()) - config.lam * float(np.abs(w[:-1]).sum())


def update_attr_weights(k: int, G: AttributedGraph, F: AffiliationMatrix,
                        W: AttributeWeights, config: FitConfig,
                        mask=None) -> np.ndarray:
    """One backtracking subgradient step on attribute k's logistic weights.

    The ascent direction is alpha * data-gradient minus lam * sign(w) on the
    non-bias coordinates with sign(0) = 0; the bias is unpenalized. Accepts
    and shrinks exactly as update_node, on the per-attribute objective.
    """
    w_old = W.values[k].copy()
    d = config.alpha * grad_attr_weights(k, G, F, W, mask)
    d[:-1] -= config.lam * np.sign(w_old[:-1])
    d_norm2 = float(d @ d)
    if d_norm2 == 0.0:
        return w_old

    base = _attr_objective(k, G, F, w_old, config, mask)
    ls = config.line_search
    t = ls.init_step
    for _ in range(ls.max_trials):
        cand = w_old + t * d
        if _attr_objective(k, G, F, cand, config, mask) - base >= ls.armijo_const * t * d_norm2:
            W.values[k] = cand
            return cand
        t *= ls.shrink_factor
    return w_old


def _node_pass(G, F, W, config, mask):
    n = G.num_nodes
    if config.num_workers <= 1:
        for u in range(n):
            update_node(u, G, F, W, config, mask)
        return
    # Disjoint node partitions, single writer per row. Reads of other rows may
    # be one update stale; column sums stay fixed for the whole pass and are
    # recomputed at the iteration boundary.
    def run_part(offset):
        for u in range(offset, n, config.num_workers):
            update_node(u, G, F, W, config, mask, adjust_column_sums=False)

    with ThreadPoolExecutor(max_workers=config.num_workers) as pool:
        list(pool.map(run_part, range(config.num_workers)))


def _attr_pass(G, F, W, config, mask):
    k_total = G.num_attrs
    if config.num_workers <= 1 or k_total <= 1:
        for k in range(k_total):
            update_attr_weights(k, G, F, W, config, mask)
        return

    def run_part(offset):
        for k in range(offset, k_total, config.num_workers):
            update_attr_weights(k, G, F, W, config, mask)

    with ThreadPoolExecutor(max_workers=config.num_workers) as pool:
        list(pool.map(run_part, range(config.num_workers)))


def fit(G: AttributedGraph, C: int, config: FitConfig | None = None,
        mask=None) -> FitResult:
    """Alternate full membership and weight passes until the objective stalls.

    Memberships start from conductance-ranked seed neighborhoods, weights at
    zero. Stops when one outer iteration improves the scaled objective by less
    than rel_improvement_tol (relative), or at max_outer_iters. With a holdout
    mask, masked pairs are excluded from initialization, gradients and the
    reported objective alike.
    """
    if C < 1:
        raise ValueError("community count must be >= 1")
    if config is None:
        config = FitConfig()

    G_init = mask.training_graph(G) if mask is not None else G
    F = init_affiliations(G_init, C, config.rng_seed)
    W = AttributeWeights(np.zeros((G.num_attrs, C + 1)))
    refresh_column_sums(F)

    trace = [objective(G, F, W, config, mask)]
    iter_seconds: list[float] = []
    converged = False
    iterations = 0

    for it in range(1, config.max_outer_iters + 1):
        tick = time.perf_counter()
        _node_pass(G, F, W, config, mask)
        refresh_column_sums(F)
        _attr_pass(G, F, W, config, mask)
        current = objective(G, F, W, config, mask)
        iter_seconds.append(time.perf_counter() - tick)
        previous = trace[-1].scaled_total
        trace.append(current)
        iterations = it
        threshold = config.rel_improvement_tol * max(abs(previous), 1e-12)
        if current.scaled_total - previous < threshold:
            converged = True
            break

    return FitResult(F, W, trace, iterations, converged, iter_seconds)


def default_threshold(num_nodes: int) -> float:
    """Membership cutoff at which one shared community alone already implies
    an edge probability of 1/N."""
    if num_nodes < 2:
        raise ValueError("threshold needs at least two nodes")
    return math.sqrt(-math.log1p(-1.0 / num_nodes))


def threshold_memberships(F: AffiliationMatrix, delta: float | None = None) -> CommunityCover:
    """Binarize memberships at delta (default: the 1/N edge-probability cutoff).

    Node u joins community c iff F[u, c] >= delta. Empty communities are
    dropped and identical member sets deduplicated; the cover is ordered by
    descending size, then ascending member ids, for deterministic output.
    """
    n = F.num_nodes
    if delta is None:
        delta = default_threshold(n)
    elif n < 2:
        raise ValueError("thresholding needs at least two nodes")

    seen = set()
    communities = []
    member = F.values >= delta
    for c in range(F.num_communities):
        ids = frozenset(int(x) for x in np.flatnonzero(member[:, c]))
        if not ids or ids in seen:
            continue
        seen.add(ids)
        communities.append(ids)
    communities.sort(key=lambda s: (-len(s), tuple(sorted(s))))
    return CommunityCover(communities, n)


def rank_attributes(W: AttributeWeights) -> list[tuple[int, float]]:
    """Attributes by descending l2 norm of their non-bias weights.

    Large norms mark attributes whose presence or absence tracks community
    membership; ties break toward the smaller attribute id.
    """
    norms = np.sqrt((W.values[:, :-1] ** 2).sum(axis=1))
    order = sorted(range(W.num_attrs), key=lambda k: (-norms[k], k))
    return [(k, float(norms[k])) for k in order]
