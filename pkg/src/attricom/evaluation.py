"""Agreement between a detected cover and ground truth."""

from __future__ import annotations

import enum

from .core import CommunityCover


class SimilarityKind(enum.Enum):
    F1 = "f1"
    JACCARD = "jaccard"


def set_similarity(a, b, kind: SimilarityKind) -> float:
    """F1 or Jaccard similarity of two nonempty node sets, in [0, 1]."""
    a = set(a)
    b = set(b)
    if not a or not b:
        raise ValueError("set similarity is undefined for empty sets")
    inter = len(a & b)
    if kind is SimilarityKind.F1:
        return 2.0 * inter / (len(a) + len(b))
    if kind is SimilarityKind.JACCARD:
        return inter / len(a | b)
    raise ValueError(f"unknown similarity kind: {kind!r}")


def match_score(truth: CommunityCover, detected: CommunityCover,
                kind: SimilarityKind) -> float:
    """Average of both best-match directions between two covers.

    Each ground-truth community is matched with its most similar detected
    community and vice versa; averaging the two directions prevents the
    degenerate optimum of outputting every possible subset. Symmetric in its
    arguments, in [0, 1], and 1 exactly when the covers coincide.
    """
    if len(truth) == 0 or len(detected) == 0:
        raise ValueError("match score is undefined for an empty cover")
    sims = [[set_similarity(t, d, kind) for d in detected] for t in truth]
    truth_side = sum(max(row) for row in sims) / (2.0 * len(truth))
    detected_side = sum(max(sims[i][j] for i in range(len(truth)))
                        for j in range(len(detected))) / (2.0 * len(detected))
    return truth_side + detected_side


def relative_gain(score_a: float, score_b: float) -> float:
    """(score_a - score_b) / score_b; the baseline score_b must be positive."""
    if score_b <= 0.0:
        raise ValueError("relative gain needs a positive baseline score")
    return (score_a - score_b) / score_b
