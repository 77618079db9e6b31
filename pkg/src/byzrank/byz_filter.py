"""Voter filtering in front of Rank-Centrality (BSR and its bucketed variant FBSR).

For each query unit the k x d vote matrix ``T`` is projected onto every sign
vector ``xi`` in {+1, -1}^d. Voters whose projection lies at least the
deviation radius away from the (lower) median are flagged for that ``xi``;
if some ``xi`` flags at least ``max_out`` voters, all voters it flags are
dropped from that unit. Removal is local to the unit.
"""

from __future__ import annotations

import csv
import functools
import io
import logging
import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .errors import DegenerateFilterError, FeasibilityError, ParameterError
from .graph import ComparisonGraph
from .spectral import DEFAULT_TOL, StationaryDistribution, rank_centrality
from .voting import VoteLedger, VoterPopulation, assign_voters, collect_votes

log = logging.getLogger(__name__)

HARD_CAP = 25
_XI_BLOCK = 4096


@dataclass(frozen=True)
class Thresholds:
    delta: float
    radius: float
    max_out: float
    clamped: bool


@dataclass(frozen=True)
class FilterParams:
    """Filter configuration.

    ``mode="theoretical"`` uses ``delta = sqrt(Q/2 * d * ln k)``, radius ``5 delta``
    and ``max_out = 8 k^(1-Q) + 8 k^(1-alpha)``. ``mode="empirical"`` replaces
    the radius by ``1 + sqrt(d)`` and, unless ``empirical_max_out`` is False,
    ``max_out`` by ``k / 20``.
    """

    Q: float = 1.0
    mode: str = "empirical"
    empirical_max_out: bool = True
    hard_cap: int = HARD_CAP
    scan: str = "matmul"

    def __post_init__(self):
        if self.Q < 1:
            raise ParameterError(f"Q must be >= 1, got {self.Q}")
        if self.mode not in ("theoretical", "empirical"):
            raise ParameterError(f"unknown filter mode {self.mode!r}")
        if self.scan not in ("matmul", "gray"):
            raise ParameterError(f"unknown scan {self.scan!r}")

    def thresholds(self, d: int, k: int, alpha: float) -> Thresholds:
        if d < 1 or k < 1:
            raise ParameterError(f"need d >= 1 and k >= 1, got d={d}, k={k}")
        delta = math.sqrt(self.Q / 2 * d * math.log(k))
        radius = 5 * delta
        max_out = 8 * k ** (1 - self.Q) + 8 * k ** (1 - alpha)
        if self.mode == "empirical":
            radius = 1 + math.sqrt(d)
            delta = radius / 5
            if self.empirical_max_out:
                max_out = k / 20
        clamped = max_out > k
        return Thresholds(delta, radius, min(max_out, float(k)), clamped)


def bsr_alpha(d_max: int, k: int) -> float:
    """``1 - ln(d_max) / ln(k)``, so that ``k^(1-alpha) == d_max``."""
    if k < 2:
        raise ParameterError("alpha needs k >= 2")
    return 1 - math.log(d_max) / math.log(k)


def fbsr_alpha(C: float, n: int, k: int) -> float:
    if k < 2 or n < 2:
        raise ParameterError("alpha needs k >= 2 and n >= 2")
    return 1 - math.log((2 + C / 8) * math.log(n)) / math.log(k)


# --------------------------------------------------------------------------
# sign-vector scans


def sign_vectors(d: int, start: int = 0, stop: int | None = None) -> np.ndarray:
    """Columns ``start..stop-1`` of the ``d x 2^d`` matrix of all sign vectors.

    Column ``m`` has ``-1`` in row ``j`` iff bit ``j`` of ``m`` is set.
    """
    stop = 2**d if stop is None else stop
    m = np.arange(start, stop, dtype=np.int64)
    bits = (m[None, :] >> np.arange(d, dtype=np.int64)[:, None]) & 1
    return (1 - 2 * bits).astype(np.int64)


def ksi_scan(T, xi) -> np.ndarray:
    """``U = T xi``: signed vote sums per voter."""
    return np.asarray(T, dtype=np.int64) @ np.asarray(xi, dtype=np.int64)


def gray_scan(T) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """Yield ``(xi, U)`` over all sign vectors in Gray-code order.

    Successive ``xi`` differ in one coordinate, so each ``U`` costs O(k).
    The yielded arrays are reused; copy them to keep them.
    """
    T = np.asarray(T, dtype=np.int64)
    k, d = T.shape
    xi = np.ones(d, dtype=np.int64)
    U = T.sum(axis=1)
    yield xi, U
    for step in range(1, 2**d):
        j = (step & -step).bit_length() - 1
        xi[j] = -xi[j]
        U += 2 * xi[j] * T[:, j]
        yield xi, U


def lower_median(U: np.ndarray, axis: int = 0) -> np.ndarray:
    k = U.shape[axis]
    return np.take(np.partition(U, (k - 1) // 2, axis=axis), (k - 1) // 2, axis=axis)


@dataclass(frozen=True)
class UnitFilterResult:
    keep: np.ndarray
    thresholds: Thresholds
    triggering: int  # sign vectors whose flag count reached max_out
    max_flags: int


@functools.lru_cache(maxsize=32)
def _sign_block(d: int, start: int, stop: int) -> np.ndarray:
    # (m, d) float copy for BLAS; entries are +-1 so products stay exact
    block = sign_vectors(d, start, stop).T.astype(np.float64)
    block.setflags(write=False)
    return block


def _scan_matmul(T: np.ndarray, radius: float, max_out: float):
    k, d = T.shape
    Tt = T.T.astype(np.float64)
    remove = np.zeros(k, dtype=bool)
    triggering = 0
    max_flags = 0
    total = 2**d
    for start in range(0, total, _XI_BLOCK):
        U = _sign_block(d, start, min(total, start + _XI_BLOCK)) @ Tt  # (m, k)
        flags = np.abs(U - lower_median(U, axis=1)[:, None]) >= radius
        counts = flags.sum(axis=1)
        max_flags = max(max_flags, int(counts.max()))
        trig = counts >= max_out
        if trig.any():
            triggering += int(trig.sum())
            remove |= flags[trig].any(axis=0)
    return remove, triggering, max_flags


def _scan_gray(T: np.ndarray, radius: float, max_out: float):
    remove = np.zeros(T.shape[0], dtype=bool)
    triggering = 0
    max_flags = 0
    for _, U in gray_scan(T):
        flags = np.abs(U - lower_median(U)) >= radius
        count = int(flags.sum())
        max_flags = max(max_flags, count)
        if count >= max_out:
            triggering += 1
            remove |= flags
    return remove, triggering, max_flags


def scan_removals(T, radius: float, max_out: float, scan: str = "matmul") -> tuple[np.ndarray, int, int]:
    """``(remove_mask, triggering_count, max_flag_count)`` over all sign vectors."""
    if scan not in ("matmul", "gray"):
        raise ParameterError(f"unknown scan {scan!r}")
    fn = _scan_matmul if scan == "matmul" else _scan_gray
    return fn(np.asarray(T, dtype=np.int64), radius, max_out)


def bound_sum_deviations(T, params: FilterParams, alpha: float) -> UnitFilterResult:
    """Filter one unit's voters; returns the keep-mask over the rows of ``T``."""
    T = np.asarray(T, dtype=np.int64)
    if T.ndim != 2:
        raise ParameterError("T must be a k x d matrix")
    k, d = T.shape
    if d > params.hard_cap:
        raise FeasibilityError(f"unit has d={d} > hard cap {params.hard_cap}; use FBSR (bucketed) instead")
    th = params.thresholds(d, k, alpha)
    remove, triggering, max_flags = scan_removals(T, th.radius, th.max_out, params.scan)
    keep = ~remove
    if not keep.any():
        raise DegenerateFilterError("filter removed every voter of the unit")
    return UnitFilterResult(keep, th, triggering, max_flags)


# --------------------------------------------------------------------------
# ledger-level filtering and the two pipelines


@dataclass
class FilterReport:
    rows: list[dict] = field(default_factory=list)

    COLUMNS = ("object", "bucket", "assigned", "removed", "removed_good", "removed_byz", "triggering")

    def surviving_fractions(self) -> np.ndarray:
        return np.array([1 - r["removed"] / r["assigned"] for r in self.rows])

    def total_removed(self) -> int:
        return sum(r["removed"] for r in self.rows)

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=self.COLUMNS, lineterminator="\n")
        writer.writeheader()
        for r in self.rows:
            writer.writerow({c: ("" if r.get(c) is None else r[c]) for c in self.COLUMNS})
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text


def filter_ledger(ledger: VoteLedger, params: FilterParams, alpha: float,
                  is_byzantine: np.ndarray | None = None) -> tuple[VoteLedger, FilterReport]:
    """Run :func:`bound_sum_deviations` on every unit of ``ledger``."""
    masks = []
    report = FilterReport()
    clamped = False
    for unit in ledger.units:
        res = bound_sum_deviations(unit.T, params, alpha)
        clamped |= res.thresholds.clamped
        masks.append(res.keep)
        removed = unit.voters[~res.keep]
        row = {"object": unit.focal, "bucket": unit.bucket, "assigned": unit.k,
               "removed": len(removed), "removed_good": None, "removed_byz": None,
               "triggering": res.triggering}
        if is_byzantine is not None:
            byz = int(is_byzantine[removed].sum())
            row["removed_byz"] = byz
            row["removed_good"] = len(removed) - byz
        report.rows.append(row)
    if clamped:
        log.warning("max_out exceeds k for some units: theoretical regime not met, no removal can trigger there")
    return ledger.with_keep(masks), report


@dataclass(frozen=True, eq=False)
class FilteredRanking:
    distribution: StationaryDistribution
    report: FilterReport
    ledger: VoteLedger

    @property
    def pi(self) -> np.ndarray:
        return self.distribution.pi


def bsr_rank(g: ComparisonGraph, pop: VoterPopulation, k: int, params: FilterParams = FilterParams(),
             seed=None, tol: float = DEFAULT_TOL, max_iters: int | None = None) -> FilteredRanking:
    """Each object's k voters compare it with all its neighbors; filter; rank."""
    if g.d_max > params.hard_cap:
        raise FeasibilityError(f"d_max={g.d_max} exceeds hard cap {params.hard_cap}; use fbsr_rank")
    units = assign_voters(g, pop.K, k, "per-object", seed)
    ledger = collect_votes(g, pop, units)
    filtered, report = filter_ledger(ledger, params, bsr_alpha(g.d_max, k), pop.is_byzantine)
    return FilteredRanking(rank_centrality(filtered, g, tol, max_iters), report, filtered)


def default_max_size(n: int) -> int:
    return max(1, math.ceil(math.log2(n)))


def fbsr_rank(g: ComparisonGraph, pop: VoterPopulation, k: int, C: float = 1.0,
              params: FilterParams = FilterParams(), seed=None, max_size: int | None = None,
              tol: float = DEFAULT_TOL, max_iters: int | None = None) -> FilteredRanking:
    """Bucketed variant: neighbors split into buckets of at most ``max_size``,
    each bucket with a fresh k-voter sample."""
    max_size = default_max_size(g.n) if max_size is None else max_size
    units = assign_voters(g, pop.K, k, "per-bucket", seed, max_size=max_size)
    ledger = collect_votes(g, pop, units)
    filtered, report = filter_ledger(ledger, params, fbsr_alpha(C, g.n, k), pop.is_byzantine)
    return FilteredRanking(rank_centrality(filtered, g, tol, max_iters), report, filtered)
