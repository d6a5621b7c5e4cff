"""Brute-force reference solvers used to cross-check the fast paths."""

from __future__ import annotations

import itertools
import math

import numpy as np

from .linalg import ValidationError


def classical_np_beta(p, q, eps: float) -> float:
    """Minimum type-II error of a randomized test on a finite alphabet.

    Enumerates every acceptance set A and every single outcome j outside it
    that may be accepted with a fractional weight. Needs no likelihood
    ordering, so it is independent of the threshold search.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape or p.ndim != 1:
        raise ValidationError("p and q must be vectors of equal length")
    if p.size > 16:
        raise ValidationError("brute-force oracle limited to 16 outcomes")
    target = 1.0 - eps
    best = math.inf
    n = p.size
    for r in range(n + 1):
        for subset in itertools.combinations(range(n), r):
            pa = math.fsum(p[list(subset)])
            qa = math.fsum(q[list(subset)])
            if pa >= target:
                best = min(best, qa)
                continue
            for j in range(n):
                if j in subset or p[j] <= 0.0 or pa + p[j] < target:
                    continue
                best = min(best, qa + (target - pa) / p[j] * q[j])
    return best


def classical_dh(p, q, eps: float) -> float:
    beta = classical_np_beta(p, q, eps)
    return math.inf if beta <= 0.0 else -math.log2(beta)
