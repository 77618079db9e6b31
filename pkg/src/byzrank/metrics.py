"""Accuracy metrics against ground-truth scores."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import ParameterError


def rel_l2(pi, pi_true) -> float:
    """``||pi - pi_true||_2 / ||pi_true||_2``."""
    pi = np.asarray(pi, dtype=np.float64)
    pi_true = np.asarray(pi_true, dtype=np.float64)
    if pi.shape != pi_true.shape:
        raise ParameterError(f"length mismatch: {pi.shape} vs {pi_true.shape}")
    return float(np.linalg.norm(pi - pi_true) / np.linalg.norm(pi_true))


def ranking_from_weights(w) -> np.ndarray:
    """Objects by descending weight; equal weights ordered by index."""
    w = np.asarray(w, dtype=np.float64)
    return np.lexsort((np.arange(len(w)), -w))


def count_inversions(seq: Sequence[int]) -> int:
    """Number of pairs ``a < b`` with ``seq[a] > seq[b]``, by bottom-up merge sort."""
    a = list(seq)
    n = len(a)
    buf = [0] * n
    inversions = 0
    width = 1
    while width < n:
        for lo in range(0, n, 2 * width):
            mid = min(lo + width, n)
            hi = min(lo + 2 * width, n)
            i, j, out = lo, mid, lo
            while i < mid and j < hi:
                if a[j] < a[i]:
                    buf[out] = a[j]
                    inversions += mid - i
                    j += 1
                else:
                    buf[out] = a[i]
                    i += 1
                out += 1
            buf[out:hi] = a[i:mid] if i < mid else a[j:hi]
        a, buf = buf, a
        width *= 2
    return inversions


def kendall_tau(ranking_a, ranking_b) -> float:
    """Tau-a between two strict rankings (lists of objects, best first)."""
    ranking_a = [int(x) for x in ranking_a]
    ranking_b = [int(x) for x in ranking_b]
    if sorted(ranking_a) != sorted(ranking_b) or len(set(ranking_a)) != len(ranking_a):
        raise ParameterError("rankings must be permutations of the same object set")
    n = len(ranking_a)
    if n < 2:
        return 1.0
    pos = {obj: p for p, obj in enumerate(ranking_a)}
    discordant = count_inversions([pos[obj] for obj in ranking_b])
    pairs = n * (n - 1) // 2
    return (pairs - 2 * discordant) / pairs


def kendall_tau_weights(w, w_true) -> float:
    return kendall_tau(ranking_from_weights(w), ranking_from_weights(w_true))
