"""Voter populations under the Byzantine-BTL model.

Every response is a deterministic function of ``(seed, voter, min(i, j),
max(i, j))``: the uniform draw behind a vote comes from a splitmix64 hash of
that key. Asking the same voter about the same unordered pair therefore always
yields the same answer, no matter which endpoint asks or in what order the
queries are issued, and no explicit response cache has to be kept.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .errors import ParameterError
from .graph import ComparisonGraph

_MASK64 = (1 << 64) - 1
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)

# hash stream tags; one per independent quantity drawn for a (voter, pair)
STREAM_VOTE = 0
STREAM_COIN = 1


def _mix(x: np.ndarray) -> np.ndarray:
    x = x + _GOLDEN
    x = (x ^ (x >> np.uint64(30))) * _MIX1
    x = (x ^ (x >> np.uint64(27))) * _MIX2
    return x ^ (x >> np.uint64(31))


def keyed_uniform(seed: int, stream: int, voters, lo, hi) -> np.ndarray:
    """Uniform [0, 1) draws keyed by ``(seed, stream, voter, lo, hi)``."""
    base = np.uint64((int(seed) ^ (int(stream) * 0x632BE59BD9B4E019)) & _MASK64)
    voters = np.asarray(voters, dtype=np.uint64)
    h = _mix(np.full(voters.shape, base, dtype=np.uint64))
    h = _mix(h ^ voters)
    h = _mix(h ^ np.asarray(lo, dtype=np.uint64))
    h = _mix(h ^ np.asarray(hi, dtype=np.uint64))
    return (h >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)


# --------------------------------------------------------------------------
# weight vectors


def normalize(w) -> np.ndarray:
    w = np.asarray(w, dtype=np.float64)
    if np.any(w <= 0) or not np.all(np.isfinite(w)):
        raise ParameterError("weights must be finite and strictly positive")
    return w / w.sum()


def skew(w) -> float:
    """``max_{i,j} w_i / w_j``."""
    w = np.asarray(w, dtype=np.float64)
    return float(w.max() / w.min())


def sample_uniform_weights(n: int, lo: float = 1.0, hi: float = 100.0, seed=None) -> np.ndarray:
    if not 0 < lo <= hi:
        raise ParameterError(f"need 0 < lo <= hi, got lo={lo}, hi={hi}")
    if n < 1:
        raise ParameterError(f"n must be positive, got {n}")
    rng = np.random.default_rng(seed)
    return normalize(rng.uniform(lo, hi, size=n))


def make_skewed_weights(n: int, b: float) -> np.ndarray:
    """Half-low / half-high weights with skew exactly ``b``.

    The first ``n // 2`` objects get ``1 / Z`` and the rest ``b / Z`` where
    ``Z = n + (b - 1) * ceil(n / 2)``.
    """
    if n < 2:
        raise ParameterError(f"n must be >= 2, got {n}")
    if not b > 1:
        raise ParameterError(f"skew b must exceed 1, got {b}")
    low = n // 2
    z = n + (b - 1) * (n - low)
    w = np.full(n, b / z)
    w[:low] = 1.0 / z
    return w


def mirrored_skewed_weights(n: int, b: float) -> np.ndarray:
    """Counterpart of :func:`make_skewed_weights`: the first ``ceil(n/2)`` are high."""
    if n < 2:
        raise ParameterError(f"n must be >= 2, got {n}")
    if not b > 1:
        raise ParameterError(f"skew b must exceed 1, got {b}")
    high = n - n // 2
    z = n + (b - 1) * high
    w = np.full(n, 1.0 / z)
    w[:high] = b / z
    return w


# --------------------------------------------------------------------------
# votes


def good_lo_wins(weights: np.ndarray, seed: int, voters, lo, hi) -> np.ndarray:
    """BTL responses for pairs given as ``lo < hi``; True where ``lo`` wins."""
    lo = np.asarray(lo)
    hi = np.asarray(hi)
    u = keyed_uniform(seed, STREAM_VOTE, voters, lo, hi)
    w_lo = weights[lo]
    return u < w_lo / (w_lo + weights[hi])


def good_vote(weights, i: int, j: int, seed: int, voter: int = 0) -> bool:
    """True iff a good ``voter`` prefers ``i`` over ``j``."""
    if i == j:
        raise ParameterError("cannot compare an object with itself")
    weights = np.asarray(weights, dtype=np.float64)
    lo, hi = min(i, j), max(i, j)
    lo_wins = bool(good_lo_wins(weights, seed, np.array([voter]), np.array([lo]), np.array([hi]))[0])
    return lo_wins if i == lo else not lo_wins


@dataclass
class AdversaryContext:
    """Everything the central adversary may use.

    The good-vote ledger is exposed through :meth:`good_votes`; because good
    responses are keyed draws, the adversary can read any good voter's answer
    to any pair.
    """

    weights: np.ndarray
    seed: int
    K: int
    byzantine_ids: np.ndarray
    graph: ComparisonGraph | None = None

    @property
    def n(self) -> int:
        return len(self.weights)

    def good_votes(self, voters, lo, hi) -> np.ndarray:
        return good_lo_wins(self.weights, self.seed, voters, lo, hi)

    def rng(self, *tags: int) -> np.random.Generator:
        return np.random.default_rng([int(self.seed) & _MASK64, *tags])


class Strategy:
    """Byzantine voting rule. Subclasses implement :meth:`lo_wins`.

    ``lo_wins`` receives parallel arrays ``voters, lo, hi`` with ``lo < hi``
    and returns True where ``lo`` is declared the winner. It must be a pure
    function of its arguments once :meth:`prepare` has run.
    """

    name = "strategy"
    # permutation strategies can also emit whole rankings (ranking datasets)
    is_permutation = False

    def prepare(self, ctx: AdversaryContext) -> None:
        pass

    def lo_wins(self, ctx: AdversaryContext, voters, lo, hi) -> np.ndarray:
        raise NotImplementedError

    def ranks(self, ctx: AdversaryContext, voters) -> np.ndarray:
        """Per-voter rank matrix (0 = most preferred), permutation strategies only."""
        raise ParameterError(f"strategy {self.name!r} does not vote by permutation")


def _opposite_order(weights: np.ndarray) -> np.ndarray:
    # ascending weight, ties by index: consistent with "i wins iff w_i <= w_j"
    return np.argsort(weights, kind="stable")


class FixedOrder(Strategy):
    """All Byzantine voters follow one pre-drawn (or supplied) order."""

    name = "fixed_order"
    is_permutation = True

    def __init__(self, perm: Sequence[int] | None = None):
        self.perm = None if perm is None else np.asarray(perm, dtype=np.int64)
        self._rank: np.ndarray | None = None

    def prepare(self, ctx):
        perm = self.perm if self.perm is not None else ctx.rng(101).permutation(ctx.n)
        if sorted(perm.tolist()) != list(range(ctx.n)):
            raise ParameterError("fixed_order needs a permutation of all objects")
        self.perm = perm
        self._rank = np.empty(ctx.n, dtype=np.int64)
        self._rank[perm] = np.arange(ctx.n)

    def lo_wins(self, ctx, voters, lo, hi):
        return self._rank[lo] < self._rank[hi]

    def ranks(self, ctx, voters):
        return np.broadcast_to(self._rank, (len(voters), ctx.n)).copy()


class Opposite(Strategy):
    """Vote for ``i`` iff ``w_i <= w_j``."""

    name = "opposite"
    is_permutation = True

    def lo_wins(self, ctx, voters, lo, hi):
        return ctx.weights[lo] <= ctx.weights[hi]

    def ranks(self, ctx, voters):
        rank = np.empty(ctx.n, dtype=np.int64)
        rank[_opposite_order(ctx.weights)] = np.arange(ctx.n)
        return np.broadcast_to(rank, (len(voters), ctx.n)).copy()


class OppositeProbabilistic(Strategy):
    """A good voter whose answer is flipped: ``i`` wins w.p. ``w_j / (w_i + w_j)``."""

    name = "opposite_probabilistic"

    def lo_wins(self, ctx, voters, lo, hi):
        return ~ctx.good_votes(voters, lo, hi)


class RandomSubset(Strategy):
    """Per (voter, pair), a fair coin picks honest BTL behaviour or an opposite vote."""

    name = "random_subset"

    def lo_wins(self, ctx, voters, lo, hi):
        honest = keyed_uniform(ctx.seed, STREAM_COIN, voters, lo, hi) < 0.5
        return np.where(honest, ctx.good_votes(voters, lo, hi), ctx.weights[lo] <= ctx.weights[hi])


class OppositeRandomFlips(Strategy):
    """Each voter reverses the true order, then applies ``num_swaps`` random transpositions."""

    name = "opposite_random_flips"
    is_permutation = True

    def __init__(self, num_swaps: int = 3):
        if num_swaps < 0:
            raise ParameterError("num_swaps must be non-negative")
        self.num_swaps = int(num_swaps)
        self._rows: dict[int, int] = {}
        self._rank: np.ndarray | None = None

    def prepare(self, ctx):
        base = _opposite_order(ctx.weights)
        ids = np.asarray(ctx.byzantine_ids, dtype=np.int64)
        self._rank = np.empty((len(ids), ctx.n), dtype=np.int64)
        self._rows = {}
        for row, v in enumerate(ids.tolist()):
            order = base.copy()
            rng = ctx.rng(202, v)
            for _ in range(self.num_swaps):
                a, b = rng.choice(ctx.n, size=2, replace=False)
                order[a], order[b] = order[b], order[a]
            self._rank[row, order] = np.arange(ctx.n)
            self._rows[v] = row

    def _row_index(self, voters) -> np.ndarray:
        try:
            return np.array([self._rows[int(v)] for v in np.asarray(voters).tolist()], dtype=np.int64)
        except KeyError as exc:
            raise ParameterError(f"voter {exc.args[0]} is not Byzantine") from None

    def lo_wins(self, ctx, voters, lo, hi):
        voters = np.asarray(voters)
        if voters.size == 0:
            return np.zeros(0, dtype=bool)
        uniq, inv = np.unique(voters, return_inverse=True)
        rows = self._row_index(uniq)[inv]
        return self._rank[rows, lo] < self._rank[rows, hi]

    def ranks(self, ctx, voters):
        return self._rank[self._row_index(voters)]


class ImpersonateBTL(Strategy):
    """Answer like a good voter would if the true weights were ``weights``.

    Uses the same keyed draw as an honest voter, so a Byzantine voter impersonating
    ``w'`` is response-for-response identical to an honest voter under ``w'``.
    """

    name = "impersonate_btl"

    def __init__(self, weights):
        self.weights = np.asarray(weights, dtype=np.float64)

    def lo_wins(self, ctx, voters, lo, hi):
        return good_lo_wins(self.weights, ctx.seed, voters, lo, hi)


STRATEGY_ALIASES = {
    "fov": "fixed_order",
    "fixed_order": "fixed_order",
    "ov": "opposite",
    "opposite": "opposite",
    "ovp": "opposite_probabilistic",
    "opposite_probabilistic": "opposite_probabilistic",
    "rs": "random_subset",
    "random_subset": "random_subset",
    "orf": "opposite_random_flips",
    "opposite_random_flips": "opposite_random_flips",
}

SHORT_NAMES = {
    "fixed_order": "FOV",
    "opposite": "OV",
    "opposite_probabilistic": "OVP",
    "random_subset": "RS",
    "opposite_random_flips": "ORF",
}


def make_strategy(name: str, **params) -> Strategy:
    key = STRATEGY_ALIASES.get(str(name).lower())
    if key is None:
        raise ParameterError(f"unknown strategy {name!r}; choose from {sorted(set(STRATEGY_ALIASES.values()))}")
    if key == "fixed_order":
        return FixedOrder(params.get("perm"))
    if key == "opposite_random_flips":
        return OppositeRandomFlips(params.get("num_swaps", 3))
    return {"opposite": Opposite, "opposite_probabilistic": OppositeProbabilistic, "random_subset": RandomSubset}[key]()


def byzantine_vote(strategy: Strategy, ctx: AdversaryContext, voter: int, i: int, j: int) -> bool:
    """True iff Byzantine ``voter`` declares ``i`` the winner over ``j``."""
    if i == j:
        raise ParameterError("cannot compare an object with itself")
    lo, hi = min(i, j), max(i, j)
    lo_wins = bool(strategy.lo_wins(ctx, np.array([voter]), np.array([lo]), np.array([hi]))[0])
    return lo_wins if i == lo else not lo_wins


class VoterPopulation:
    """``K`` voters of which ``byzantine_ids`` follow ``strategy``; the rest are BTL."""

    def __init__(
        self,
        weights,
        K: int,
        byzantine_ids: Sequence[int] = (),
        strategy: Strategy | None = None,
        seed: int = 0,
        graph: ComparisonGraph | None = None,
    ):
        self.weights = np.asarray(weights, dtype=np.float64)
        if np.any(self.weights <= 0):
            raise ParameterError("weights must be strictly positive")
        if K < 1:
            raise ParameterError(f"K must be positive, got {K}")
        ids = np.unique(np.asarray(byzantine_ids, dtype=np.int64))
        if len(ids) != len(byzantine_ids):
            raise ParameterError("byzantine_ids contains duplicates")
        if ids.size and (ids.min() < 0 or ids.max() >= K):
            raise ParameterError("byzantine id out of range")
        if ids.size and strategy is None:
            raise ParameterError("Byzantine voters need a strategy")
        self.K = int(K)
        self.seed = int(seed) & _MASK64
        self.byzantine_ids = ids
        self.is_byzantine = np.zeros(K, dtype=bool)
        self.is_byzantine[ids] = True
        self.strategy = strategy
        self.context = AdversaryContext(self.weights, self.seed, self.K, ids, graph)
        if strategy is not None:
            strategy.prepare(self.context)

    @classmethod
    def with_fraction(cls, weights, K: int, fraction: float, strategy: Strategy | None, seed: int = 0,
                      graph: ComparisonGraph | None = None) -> VoterPopulation:
        """Population whose ``round(fraction * K)`` Byzantine voters are drawn at random."""
        if not 0.0 <= fraction <= 1.0:
            raise ParameterError(f"byzantine fraction must lie in [0, 1], got {fraction}")
        F = int(round(fraction * K))
        ids = np.sort(np.random.default_rng([int(seed) & _MASK64, 7]).choice(K, size=F, replace=False))
        return cls(weights, K, ids, strategy if F else None, seed, graph)

    @property
    def F(self) -> int:
        return len(self.byzantine_ids)

    @property
    def n(self) -> int:
        return len(self.weights)

    def lo_wins(self, voters, lo, hi) -> np.ndarray:
        voters = np.asarray(voters, dtype=np.int64)
        out = good_lo_wins(self.weights, self.seed, voters, lo, hi)
        byz = self.is_byzantine[voters]
        if byz.any():
            lo = np.asarray(lo)
            hi = np.asarray(hi)
            out[byz] = self.strategy.lo_wins(self.context, voters[byz], lo[byz], hi[byz])
        return out

    def beats(self, voters, i, j) -> np.ndarray:
        """Vectorised: True where the voter says ``i`` beats ``j``."""
        i = np.asarray(i, dtype=np.int64)
        j = np.asarray(j, dtype=np.int64)
        if np.any(i == j):
            raise ParameterError("cannot compare an object with itself")
        lo = np.minimum(i, j)
        lo_wins = self.lo_wins(voters, lo, np.maximum(i, j))
        return np.where(i == lo, lo_wins, ~lo_wins)

    def ask(self, voter: int, i: int, j: int) -> bool:
        return bool(self.beats(np.array([voter]), np.array([i]), np.array([j]))[0])


# --------------------------------------------------------------------------
# assignment and ledger


@dataclass(frozen=True, eq=False)
class QueryUnit:
    """``voters`` compare ``focal`` against every object in ``neighbors``."""

    focal: int
    bucket: int
    neighbors: np.ndarray
    voters: np.ndarray


def split_buckets(neighbors: np.ndarray, max_size: int) -> list[np.ndarray]:
    """Split into ``ceil(d / max_size)`` near-equal consecutive buckets."""
    if max_size < 1:
        raise ParameterError("max_size must be >= 1")
    d = len(neighbors)
    if d == 0:
        return []
    beta = -(-d // max_size)
    return np.array_split(np.asarray(neighbors), beta)


ASSIGN_MODES = ("per-edge", "per-object", "per-bucket")


def assign_voters(g: ComparisonGraph, K: int, k: int, mode: str, seed, max_size: int | None = None) -> list[QueryUnit]:
    """Fix the pair-to-voter mapping before any vote is cast.

    ``per-edge``: one k-voter sample per edge, shared by both endpoints.
    ``per-object``: one k-voter sample per object covering all its neighbors.
    ``per-bucket``: neighbors split into buckets of at most ``max_size``; each
    bucket gets its own sample. Samples are drawn without replacement from ``[K]``.
    """
    if mode not in ASSIGN_MODES:
        raise ParameterError(f"unknown assignment mode {mode!r}")
    if not 1 <= k <= K:
        raise ParameterError(f"need 1 <= k <= K, got k={k}, K={K}")
    rng = np.random.default_rng(seed)
    units: list[QueryUnit] = []
    if mode == "per-edge":
        for i, j in g.edges.tolist():
            voters = np.sort(rng.choice(K, size=k, replace=False))
            units.append(QueryUnit(i, int(np.searchsorted(g.neighbors[i], j)), np.array([j]), voters))
            units.append(QueryUnit(j, int(np.searchsorted(g.neighbors[j], i)), np.array([i]), voters))
        return units
    if mode == "per-object":
        for i in range(g.n):
            if g.degree[i]:
                units.append(QueryUnit(i, 0, g.neighbors[i], np.sort(rng.choice(K, size=k, replace=False))))
        return units
    if max_size is None:
        raise ParameterError("per-bucket assignment needs max_size")
    for i in range(g.n):
        for b, bucket in enumerate(split_buckets(g.neighbors[i], max_size)):
            units.append(QueryUnit(i, b, bucket, np.sort(rng.choice(K, size=k, replace=False))))
    return units


@dataclass(frozen=True, eq=False)
class VoteUnit:
    """Votes of one query unit.

    ``T[v, c] == 1`` iff voter ``voters[v]`` said ``neighbors[c]`` beats ``focal``.
    ``keep`` marks voters that survived filtering.
    """

    focal: int
    bucket: int
    neighbors: np.ndarray
    voters: np.ndarray
    T: np.ndarray
    keep: np.ndarray

    @property
    def k(self) -> int:
        return len(self.voters)

    def win_fractions(self) -> np.ndarray:
        kept = int(self.keep.sum())
        if kept == 0:
            return np.full(len(self.neighbors), np.nan)
        return self.T[self.keep].sum(axis=0) / kept


@dataclass(eq=False)
class VoteLedger:
    n: int
    units: list[VoteUnit] = field(default_factory=list)

    def with_keep(self, masks: Sequence[np.ndarray]) -> VoteLedger:
        if len(masks) != len(self.units):
            raise ParameterError("one keep-mask per unit is required")
        return VoteLedger(self.n, [replace(u, keep=np.asarray(m, dtype=bool)) for u, m in zip(self.units, masks)])

    def fractions(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(rows, cols, A)``: for each recorded (i, j), the kept fraction saying j beats i."""
        if not self.units:
            empty = np.zeros(0, dtype=np.int64)
            return empty, empty, np.zeros(0)
        rows = np.concatenate([np.full(len(u.neighbors), u.focal, dtype=np.int64) for u in self.units])
        cols = np.concatenate([u.neighbors for u in self.units]).astype(np.int64)
        vals = np.concatenate([u.win_fractions() for u in self.units])
        return rows, cols, vals

    def identical_to(self, other: VoteLedger) -> bool:
        if self.n != other.n or len(self.units) != len(other.units):
            return False
        for a, b in zip(self.units, other.units):
            if (a.focal, a.bucket) != (b.focal, b.bucket):
                return False
            for x, y in ((a.neighbors, b.neighbors), (a.voters, b.voters), (a.T, b.T), (a.keep, b.keep)):
                if x.shape != y.shape or not np.array_equal(x, y):
                    return False
        return True


def collect_votes(g: ComparisonGraph, pop: VoterPopulation, units: Sequence[QueryUnit]) -> VoteLedger:
    """Ask every assigned voter about every pair of its unit, in one batch."""
    if pop.n != g.n:
        raise ParameterError(f"population has {pop.n} objects, graph has {g.n}")
    if not units:
        return VoteLedger(g.n, [])
    sizes = [len(u.voters) * len(u.neighbors) for u in units]
    voters = np.concatenate([np.repeat(u.voters, len(u.neighbors)) for u in units])
    focal = np.concatenate([np.full(s, u.focal, dtype=np.int64) for u, s in zip(units, sizes)])
    other = np.concatenate([np.tile(u.neighbors, len(u.voters)) for u in units])
    other_wins = pop.beats(voters, other, focal).astype(np.uint8)
    out = []
    for u, block in zip(units, np.split(other_wins, np.cumsum(sizes)[:-1])):
        T = block.reshape(len(u.voters), len(u.neighbors))
        out.append(VoteUnit(u.focal, u.bucket, np.asarray(u.neighbors), np.asarray(u.voters), T,
                            np.ones(len(u.voters), dtype=bool)))
    return VoteLedger(g.n, out)
