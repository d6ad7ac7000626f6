"""Probabilities, log-likelihoods and gradients of the joint edge/attribute model.

Everything here is a pure function of its inputs: same arguments, bit-identical
results, safe for unlimited concurrent callers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import AffiliationMatrix, AttributedGraph, AttributeWeights, FitConfig

# Bernoulli probabilities are clamped to this band before taking logarithms.
PROB_CLAMP = 1e-12
_LOG_LO = float(np.log(PROB_CLAMP))
_LOG_HI = float(np.log1p(-PROB_CLAMP))

_EDGE_CHUNK = 1 << 18
_ATTR_CELL_CHUNK = 1 << 21


@dataclass(frozen=True)
class ObjectiveValue:
    """The three parts of the fitting objective plus their scaled combination."""

    l_graph: float
    l_attr: float
    l1_penalty: float
    scaled_total: float


def _sigmoid(z):
    # exp(-log(1 + exp(-z))) is stable on both tails and saturates to 0/1.
    return np.exp(-np.logaddexp(0.0, np.negative(z)))


def edge_prob(f_u, f_v, min_dot: float = 0.0) -> float:
    """Probability that two nodes connect given their membership rows.

    With min_dot=0 this is the exact model probability 1 - exp(-f_u . f_v),
    used for reporting. Likelihood code passes the configured guard so the
    all-zero state keeps a finite log.
    """
    f_u = np.asarray(f_u, dtype=np.float64)
    f_v = np.asarray(f_v, dtype=np.float64)
    if f_u.shape != f_v.shape:
        raise ValueError("membership vectors differ in length")
    dot = float(f_u @ f_v)
    if min_dot > 0.0:
        dot = max(dot, min_dot)
    return float(-np.expm1(-dot))


def attr_prob(w_k, f_u) -> float:
    """Logistic probability that an attribute is present given memberships f_u.

    w_k carries one weight per community plus a trailing intercept that pairs
    with a constant input of 1. Saturates rather than erroring at extreme z.
    """
    w_k = np.asarray(w_k, dtype=np.float64)
    f_u = np.asarray(f_u, dtype=np.float64)
    if w_k.shape[0] != f_u.shape[0] + 1:
        raise ValueError("weight vector must have one more entry (bias) than memberships")
    z = float(w_k[:-1] @ f_u + w_k[-1])
    return float(_sigmoid(z))


def _edge_log_terms(dots: np.ndarray, guard: float) -> np.ndarray:
    return np.log(-np.expm1(-np.maximum(dots, guard)))


def log_lik_graph(G: AttributedGraph, F: AffiliationMatrix, mask=None,
                  min_dot_guard: float = 1e-10) -> float:
    """Graph log-likelihood over unordered node pairs.

    Edge terms are log(1 - exp(-max(F_u . F_v, guard))); the non-edge term
    sums F_u . F_v through the cached column sums, never by pair enumeration.
    Pairs in the holdout mask are excluded from both sums.
    """
    V = F.values
    S = F.column_sums
    # sum over unordered pairs u != v of F_u . F_v
    total_pair_dot = 0.5 * (float(S @ S) - float((V * V).sum()))

    edges = G.edges
    masked_dot_sum = 0.0
    if mask is not None and len(mask.pair_u):
        # Drop masked pairs from the edge enumeration and account for all of
        # them against the pair total in one canonical order, so the result
        # is bit-identical no matter which masked pairs happen to be edges.
        n = G.num_nodes
        edge_keys = edges[:, 0] * n + edges[:, 1]
        mask_keys = mask.pair_u * n + mask.pair_v
        edges = edges[~np.isin(edge_keys, mask_keys)]
        dots = np.einsum("ij,ij->i", V[mask.pair_u], V[mask.pair_v])
        masked_dot_sum = float(dots.sum())

    ll_edges = 0.0
    edge_dot_sum = 0.0
    for start in range(0, edges.shape[0], _EDGE_CHUNK):
        chunk = edges[start:start + _EDGE_CHUNK]
        dots = np.einsum("ij,ij->i", V[chunk[:, 0]], V[chunk[:, 1]])
        edge_dot_sum += float(dots.sum())
        ll_edges += float(_edge_log_terms(dots, min_dot_guard).sum())

    nonedge_dot = total_pair_dot - edge_dot_sum - masked_dot_sum
    return ll_edges - nonedge_dot


def log_lik_attr(G: AttributedGraph, F: AffiliationMatrix, W: AttributeWeights,
                 mask=None) -> float:
    """Bernoulli log-likelihood of all observed node-attribute cells.

    Probabilities are clamped to [PROB_CLAMP, 1 - PROB_CLAMP] before logs;
    masked (node, attr) cells are excluded.
    """
    K = G.num_attrs
    if K == 0:
        return 0.0
    V = F.values
    w_head = W.values[:, :-1]
    w_bias = W.values[:, -1]
    pairs = G.attr_pairs

    ll = 0.0
    if mask is not None and len(mask.attr_u):
        # Keep masked cells out of the present-pair corrections and remove
        # their absent-cell contribution in one canonical order; see
        # log_lik_graph for why this must not be a post-hoc adjustment.
        pair_keys = pairs[:, 0] * K + pairs[:, 1]
        mask_keys = mask.attr_u * K + mask.attr_k
        pairs = pairs[~np.isin(pair_keys, mask_keys)]
        z = np.einsum("ij,ij->i", V[mask.attr_u], w_head[mask.attr_k]) + w_bias[mask.attr_k]
        ll -= float(np.clip(-np.logaddexp(0.0, z), _LOG_LO, _LOG_HI).sum())

    rows_per_chunk = max(1, _ATTR_CELL_CHUNK // K)
    p = 0  # cursor into pairs, which are sorted by node id
    for start in range(0, G.num_nodes, rows_per_chunk):
        stop = min(start + rows_per_chunk, G.num_nodes)
        z = V[start:stop] @ w_head.T + w_bias
        log_q = np.clip(-np.logaddexp(0.0, -z), _LOG_LO, _LOG_HI)
        log_1q = np.clip(-np.logaddexp(0.0, z), _LOG_LO, _LOG_HI)
        ll += float(log_1q.sum())
        p_end = int(np.searchsorted(pairs[:, 0], stop, side="left"))
        if p_end > p:
            us = pairs[p:p_end, 0] - start
            ks = pairs[p:p_end, 1]
            ll += float((log_q[us, ks] - log_1q[us, ks]).sum())
        p = p_end

    return ll


class _NodeState:
    """Per-node snapshot used by gradient and line-search evaluations."""

    __slots__ = ("f_nbrs", "s_minus", "w_head", "w_bias", "x_idx", "alpha", "guard")

    def __init__(self, f_nbrs, s_minus, w_head, w_bias, x_idx, alpha, guard):
        self.f_nbrs = f_nbrs
        self.s_minus = s_minus
        self.w_head = w_head
        self.w_bias = w_bias
        self.x_idx = x_idx  # indices of attributes present on the node
        self.alpha = alpha
        self.guard = guard


def _node_state(u: int, G: AttributedGraph, F: AffiliationMatrix,
                W: AttributeWeights, config: FitConfig, mask=None) -> _NodeState:
    V = F.values
    nbrs = G.neighbors(u)
    if mask is not None and len(partners := mask.masked_partners(u)):
        # Neighbors and masked partners leave the non-neighbor sum together,
        # in one sorted pass, so the arithmetic does not depend on which
        # masked pairs happen to be edges.
        excluded = np.union1d(nbrs, partners)
        s_minus = F.column_sums - V[u] - V[excluded].sum(axis=0)
        nbrs = np.setdiff1d(nbrs, partners, assume_unique=True)
    elif len(nbrs):
        s_minus = F.column_sums - V[u] - V[nbrs].sum(axis=0)
    else:
        s_minus = F.column_sums - V[u]

    f_nbrs = V[nbrs] if len(nbrs) else np.zeros((0, F.num_communities))

    K = G.num_attrs
    if K:
        w_head = W.values[:, :-1]
        w_bias = W.values[:, -1]
        x_idx = G.node_attr_ids(u)
        if mask is not None:
            masked_ks = mask.masked_attr_ids(u)
            if len(masked_ks):
                keep = np.ones(K, dtype=bool)
                keep[masked_ks] = False
                new_pos = np.cumsum(keep) - 1  # attr id -> row among kept attrs
                x_idx = new_pos[x_idx[keep[x_idx]]]
                w_head = w_head[keep]
                w_bias = w_bias[keep]
    else:
        w_head = np.zeros((0, F.num_communities))
        w_bias = np.zeros(0)
        x_idx = np.zeros(0, dtype=np.int64)

    return _NodeState(f_nbrs, s_minus, w_head, w_bias, x_idx, config.alpha,
                      config.min_dot_guard)


def _grad_from_state(st: _NodeState, f_row: np.ndarray) -> np.ndarray:
    dots = st.f_nbrs @ f_row
    ratio = np.zeros_like(dots)
    # Below the guard the edge term is the constant log(1 - exp(-guard)),
    # so its gradient contribution there is exactly zero. Above ~700 the
    # ratio underflows to 0 anyway; capping avoids a spurious expm1 overflow.
    active = dots > st.guard
    if active.any():
        ratio[active] = 1.0 / np.expm1(np.minimum(dots[active], 700.0))
    g = st.f_nbrs.T @ ratio - st.s_minus
    g *= 1.0 - st.alpha
    if st.w_head.shape[0]:
        resid = -_sigmoid(st.w_head @ f_row + st.w_bias)
        resid[st.x_idx] += 1.0
        g += st.alpha * (st.w_head.T @ resid)
    return g


def _local_objective(st: _NodeState, f_row: np.ndarray) -> float:
    dots = st.f_nbrs @ f_row
    lg = float(_edge_log_terms(dots, st.guard).sum()) - float(f_row @ st.s_minus)
    total = (1.0 - st.alpha) * lg
    if st.w_head.shape[0]:
        z = st.w_head @ f_row + st.w_bias
        log_1q = np.clip(-np.logaddexp(0.0, z), _LOG_LO, _LOG_HI)
        lx = float(log_1q.sum())
        if len(st.x_idx):
            z_on = z[st.x_idx]
            log_q_on = np.clip(-np.logaddexp(0.0, -z_on), _LOG_LO, _LOG_HI)
            lx += float(log_q_on.sum()) - float(log_1q[st.x_idx].sum())
        total += st.alpha * lx
    return total


def grad_node(u: int, G: AttributedGraph, F: AffiliationMatrix,
              W: AttributeWeights, config: FitConfig, mask=None) -> np.ndarray:
    """Gradient of the alpha-scaled objective with respect to node u's row.

    The non-neighbor part runs in O(degree(u) * C) through the cached column
    sums; the attribute part excludes the bias column, which is not a
    coordinate of the membership row.
    """
    st = _node_state(u, G, F, W, config, mask)
    return _grad_from_state(st, F.values[u])


def grad_attr_weights(k: int, G: AttributedGraph, F: AffiliationMatrix,
                      W: AttributeWeights, mask=None) -> np.ndarray:
    """Data gradient of attribute k's logistic weights (bias input is 1).

    The l1 subgradient is not included here; the solver applies it.
    """
    w = W.values[k]
    V = F.values
    z = V @ w[:-1] + w[-1]
    resid = -_sigmoid(z)
    resid[G.attr_node_ids(k)] += 1.0
    if mask is not None:
        masked_us = mask.masked_node_ids(k)
        if len(masked_us):
            resid[masked_us] = 0.0
    g = np.empty(w.shape[0])
    g[:-1] = V.T @ resid
    g[-1] = float(resid.sum())
    return g


def objective(G: AttributedGraph, F: AffiliationMatrix, W: AttributeWeights,
              config: FitConfig, mask=None) -> ObjectiveValue:
    """Assemble graph, attribute and l1 parts into the scaled fitting objective."""
    lg = log_lik_graph(G, F, mask, config.min_dot_guard)
    lx = log_lik_attr(G, F, W, mask)
    l1 = float(config.lam * np.abs(W.values[:, :-1]).sum())
    total = (1.0 - config.alpha) * lg + config.alpha * lx - l1
    return ObjectiveValue(lg, lx, l1, total)
