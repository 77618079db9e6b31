"""Rank-Centrality: comparison Markov chain and its stationary distribution."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .errors import ConvergenceError, DegenerateFilterError, ParameterError
from .graph import ComparisonGraph
from .voting import VoteLedger

DEFAULT_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    P: sp.csr_matrix
    d_max: int

    @property
    def n(self) -> int:
        return self.P.shape[0]

    def dense(self) -> np.ndarray:
        return self.P.toarray()

    def dump(self, path) -> None:
        """Write nonzero entries as ``i j P_ij`` lines."""
        coo = self.P.tocoo()
        order = np.lexsort((coo.col, coo.row))
        lines = [f"{coo.row[t]} {coo.col[t]} {float(coo.data[t])!r}" for t in order]
        Path(path).write_text("\n".join(lines) + "\n")


@dataclass(frozen=True, eq=False)
class StationaryDistribution:
    pi: np.ndarray
    iterations: int
    residual: float


def exact_btl_fractions(g: ComparisonGraph, w) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Noise-free fractions ``A_ij = w_j / (w_i + w_j)`` on both directions of every edge."""
    w = np.asarray(w, dtype=np.float64)
    i, j = g.edges[:, 0], g.edges[:, 1]
    rows = np.concatenate([i, j])
    cols = np.concatenate([j, i])
    return rows, cols, w[cols] / (w[rows] + w[cols])


def transition_from_fractions(g: ComparisonGraph, rows, cols, vals) -> TransitionMatrix:
    """``P_ij = A_ij / d_max`` on edges, ``P_ii = 1 - sum_j P_ij``.

    ``A_ij`` is the fraction of (kept) votes from ``i``'s query set in which
    ``j`` beat ``i``; every edge needs a value in both directions.
    """
    n = g.n
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    vals = np.asarray(vals, dtype=np.float64)
    if not len(rows) == len(cols) == len(vals):
        raise ParameterError("rows, cols and vals must have equal length")
    missing = np.isnan(vals)
    if missing.any():
        t = int(np.flatnonzero(missing)[0])
        raise DegenerateFilterError(f"edge ({rows[t]}, {cols[t]}) has no surviving votes from {rows[t]}'s query set")
    if np.any((vals < 0) | (vals > 1)):
        raise ParameterError("win fractions must lie in [0, 1]")
    key = rows * n + cols
    if len(np.unique(key)) != len(key):
        raise ParameterError("duplicate (i, j) fraction")
    e = g.edges
    expected = np.sort(np.concatenate([e[:, 0] * n + e[:, 1], e[:, 1] * n + e[:, 0]]))
    got = np.sort(key)
    if not np.array_equal(expected, got):
        extra = np.setdiff1d(got, expected)
        if extra.size:
            raise ParameterError(f"fraction given for non-edge ({extra[0] // n}, {extra[0] % n})")
        gap = np.setdiff1d(expected, got)[0]
        raise DegenerateFilterError(f"edge ({gap // n}, {gap % n}) has no votes from {gap // n}'s query set")
    d_max = g.d_max
    off = sp.csr_matrix((vals / d_max, (rows, cols)), shape=(n, n))
    diag = 1.0 - np.asarray(off.sum(axis=1)).ravel()
    P = (off + sp.diags(diag)).tocsr()
    P.sort_indices()
    return TransitionMatrix(P, d_max)


def build_transition(ledger: VoteLedger, g: ComparisonGraph) -> TransitionMatrix:
    if ledger.n != g.n:
        raise ParameterError("ledger and graph disagree on n")
    return transition_from_fractions(g, *ledger.fractions())


def stationary(P: TransitionMatrix, tol: float = DEFAULT_TOL, max_iters: int | None = None) -> StationaryDistribution:
    """Power iteration ``p <- p P`` from the uniform vector.

    Stops once the L1 change between iterates is at most ``tol``; each iterate
    is renormalised to sum to one.
    """
    n = P.n
    if max_iters is None:
        max_iters = 100 * n
    PT = P.P.T.tocsr()
    p = np.full(n, 1.0 / n)
    change = np.inf
    for it in range(1, max_iters + 1):
        q = PT @ p
        q /= q.sum()
        change = float(np.abs(q - p).sum())
        p = q
        if change <= tol:
            residual = float(np.abs(PT @ p - p).max())
            return StationaryDistribution(p, it, residual)
    raise ConvergenceError(f"power iteration did not converge in {max_iters} iterations", change)


def rank_centrality(ledger: VoteLedger, g: ComparisonGraph, tol: float = DEFAULT_TOL,
                    max_iters: int | None = None) -> StationaryDistribution:
    return stationary(build_transition(ledger, g), tol, max_iters)
