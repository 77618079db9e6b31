"""Experiment orchestration: sweeps, ranking-dataset runs and the two demos.

Every trial derives its seeds from ``(root seed, cell key, trial)`` alone, so
results never depend on execution order or on how many worker processes run
the trials. Tables are emitted as CSV with one ``raw`` row per trial and
``mean`` / ``std`` aggregate rows per cell.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import logging
import math
import statistics
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .byz_filter import FilterParams, bsr_alpha, bsr_rank, fbsr_rank, filter_ledger
from .datasets import load_rankings, ranking_ledger
from .errors import InvariantViolation, ParameterError, RankingError
from .graph import ComparisonGraph, er_edge_probability, generate_er_graph, is_connected
from .metrics import kendall_tau_weights, rel_l2
from .spectral import DEFAULT_TOL, rank_centrality
from .voting import (
    STRATEGY_ALIASES,
    AdversaryContext,
    ImpersonateBTL,
    VoterPopulation,
    assign_voters,
    collect_votes,
    make_skewed_weights,
    make_strategy,
    mirrored_skewed_weights,
    sample_uniform_weights,
)

log = logging.getLogger(__name__)

ALGORITHMS = ("rc", "bsr", "fbsr")
BF_GRID = (0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3)
N_GRID = (50, 90, 130, 170, 210, 250)
MAX_RESAMPLES = 100


@dataclass
class ExperimentConfig:
    n: int = 200
    k: int = 100
    K: int = 1000
    bf_grid: list = field(default_factory=lambda: list(BF_GRID))
    p: float | None = None
    p_coef: float = 20.0
    weights: str = "uniform"
    w_lo: float = 1.0
    w_hi: float = 100.0
    b: float = 10.0
    strategies: list = field(default_factory=lambda: ["fixed_order", "opposite", "opposite_probabilistic", "random_subset", "opposite_random_flips"])
    num_swaps: int = 3
    algorithms: list = field(default_factory=lambda: ["rc", "fbsr"])
    trials: int = 10
    seed: int = 0
    mode: str = "empirical"
    empirical_max_out: bool = True
    C: float | None = None
    Q: float = 1.0
    max_size: int | None = None
    n_grid: list = field(default_factory=lambda: list(N_GRID))
    dataset: str | None = None
    sushi_format: bool = False
    tol: float = DEFAULT_TOL
    max_iters: int | None = None
    jobs: int = 1
    out: str | None = None

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.trials < 1:
            raise ParameterError("trials must be >= 1")
        if self.n < 2:
            raise ParameterError(f"n must be >= 2, got {self.n}")
        if not 1 <= self.k <= self.K:
            raise ParameterError(f"need 1 <= k <= K, got k={self.k}, K={self.K}")
        if any(not 0.0 <= bf <= 1.0 for bf in self.bf_grid):
            raise ParameterError("byzantine fractions must lie in [0, 1]")
        bad = [a for a in self.algorithms if a not in ALGORITHMS]
        if bad:
            raise ParameterError(f"unknown algorithm(s) {bad}; choose from {ALGORITHMS}")
        bad = [s for s in self.strategies if str(s).lower() not in STRATEGY_ALIASES]
        if bad:
            raise ParameterError(f"unknown strategy id(s) {bad}")
        if self.weights not in ("uniform", "skewed"):
            raise ParameterError(f"unknown weight generator {self.weights!r}")
        if self.p is not None and not 0 <= self.p <= 1:
            raise ParameterError("p must lie in [0, 1]")
        FilterParams(Q=self.Q, mode=self.mode)

    @classmethod
    def from_mapping(cls, data: dict) -> ExperimentConfig:
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - names)
        if unknown:
            raise ParameterError(f"unknown config key(s): {unknown}")
        return cls(**data)

    def replace(self, **changes) -> ExperimentConfig:
        return dataclasses.replace(self, **changes)

    def edge_probability(self, n: int) -> float:
        return self.p if self.p is not None else er_edge_probability(n, self.p_coef)

    def fbsr_C(self) -> float:
        # the FBSR analysis writes p = 10 C^2 log n / n
        return self.C if self.C is not None else math.sqrt(self.p_coef / 10)

    def filter_params(self) -> FilterParams:
        return FilterParams(Q=self.Q, mode=self.mode, empirical_max_out=self.empirical_max_out)


def load_config(path) -> dict:
    """Key-value config from a JSON or YAML file."""
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() in (".yaml", ".yml"):
        import yaml

        data = yaml.safe_load(text) or {}
    else:
        data = json.loads(text)
    if not isinstance(data, dict):
        raise ParameterError(f"{path}: config must be a mapping")
    return data


# --------------------------------------------------------------------------
# results


@dataclass
class TrialScore:
    experiment: str
    strategy: str
    algorithm: str
    byzantine_fraction: float
    n: int
    k: int
    trial: int
    seed: int
    rel_l2: float
    kendall_tau: float
    resamples: int = 0
    removed: int | None = None


COLUMNS = ("stat", "experiment", "strategy", "algorithm", "byzantine_fraction", "n", "k",
           "trial", "seed", "rel_l2", "kendall_tau", "resamples", "removed")
_KEY = ("experiment", "strategy", "algorithm", "byzantine_fraction", "n", "k")


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


@dataclass
class ResultTable:
    scores: list[TrialScore] = field(default_factory=list)

    def cells(self) -> dict[tuple, list[TrialScore]]:
        out: dict[tuple, list[TrialScore]] = {}
        for s in self.scores:
            out.setdefault(tuple(getattr(s, c) for c in _KEY), []).append(s)
        return out

    def aggregate(self) -> list[dict]:
        """Mean and sample standard deviation (0 for a single trial) per cell."""
        rows = []
        for key, group in self.cells().items():
            base = dict(zip(_KEY, key))
            for stat in ("mean", "std"):
                row = dict(base, stat=stat)
                for metric in ("rel_l2", "kendall_tau"):
                    vals = [getattr(s, metric) for s in group]
                    if stat == "mean":
                        row[metric] = math.fsum(vals) / len(vals)
                    else:
                        row[metric] = statistics.stdev(vals) if len(vals) > 1 else 0.0
                rows.append(row)
        return rows

    def mean(self, metric: str = "rel_l2", **where) -> float:
        vals = [getattr(s, metric) for s in self.select(**where)]
        if not vals:
            raise ParameterError(f"no rows match {where}")
        return math.fsum(vals) / len(vals)

    def select(self, **where) -> list[TrialScore]:
        return [s for s in self.scores if all(getattr(s, k) == v for k, v in where.items())]

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(COLUMNS)
        for s in self.scores:
            d = dataclasses.asdict(s)
            writer.writerow(["raw"] + [_fmt(d[c]) for c in COLUMNS[1:]])
        for row in self.aggregate():
            writer.writerow([_fmt(row.get(c)) for c in COLUMNS])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text


# --------------------------------------------------------------------------
# seeding


def derive_seeds(root: int, key: str, trial: int, count: int = 6) -> list[int]:
    ss = np.random.SeedSequence([int(root) & (2**64 - 1), zlib.crc32(key.encode()), int(trial)])
    return [int(x) for x in ss.generate_state(count, np.uint64)]


def connected_er_graph(n: int, p: float, seed: int) -> tuple[ComparisonGraph, int]:
    """Sample G(n, p) until connected; returns the graph and the resample count."""
    for r in range(MAX_RESAMPLES):
        g = generate_er_graph(n, p, [seed, r])
        if is_connected(g):
            return g, r
    raise ParameterError(f"no connected G({n}, {p:.4g}) after {MAX_RESAMPLES} samples; raise p")


# --------------------------------------------------------------------------
# synthetic trials


def _synthetic_trial(task: tuple) -> list[TrialScore]:
    cfg, experiment, strategy_id, bf, n, k, trial = task
    key = f"{experiment}|{strategy_id}|{bf!r}|{n}|{k}"
    s_graph, s_weights, s_pop, s_rc, s_filter, _ = derive_seeds(cfg.seed, key, trial)
    g, resamples = connected_er_graph(n, cfg.edge_probability(n), s_graph)
    if cfg.weights == "uniform":
        w = sample_uniform_weights(n, cfg.w_lo, cfg.w_hi, s_weights)
    else:
        w = make_skewed_weights(n, cfg.b)
    strategy = make_strategy(strategy_id, num_swaps=cfg.num_swaps)
    pop = VoterPopulation.with_fraction(w, cfg.K, bf, strategy, s_pop, g)
    params = cfg.filter_params()
    scores = []
    for algo in cfg.algorithms:
        removed = None
        if algo == "rc":
            ledger = collect_votes(g, pop, assign_voters(g, cfg.K, k, "per-edge", s_rc))
            pi = rank_centrality(ledger, g, cfg.tol, cfg.max_iters).pi
        elif algo == "bsr":
            res = bsr_rank(g, pop, k, params, s_filter, cfg.tol, cfg.max_iters)
            pi, removed = res.pi, res.report.total_removed()
        else:
            res = fbsr_rank(g, pop, k, cfg.fbsr_C(), params, s_filter, cfg.max_size, cfg.tol, cfg.max_iters)
            pi, removed = res.pi, res.report.total_removed()
        scores.append(TrialScore(experiment, make_strategy(strategy_id).name, algo, float(bf), n, k, trial,
                                 s_graph, rel_l2(pi, w), kendall_tau_weights(pi, w), resamples, removed))
    return scores


def _run_tasks(tasks: list[tuple], jobs: int) -> ResultTable:
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_synthetic_trial, tasks))
    else:
        results = [_synthetic_trial(t) for t in tasks]
    return ResultTable([s for batch in results for s in batch])


def _finish(table: ResultTable, cfg: ExperimentConfig) -> ResultTable:
    if cfg.out:
        table.to_csv(cfg.out)
    return table


def run_synthetic_sweep(cfg: ExperimentConfig) -> ResultTable:
    """Every (strategy, byzantine fraction) cell, ``cfg.trials`` paired trials each."""
    tasks = [(cfg, "synthetic", s, bf, cfg.n, cfg.k, t)
             for s in cfg.strategies for bf in cfg.bf_grid for t in range(cfg.trials)]
    return _finish(_run_tasks(tasks, cfg.jobs), cfg)


def run_scaling_sweep(cfg: ExperimentConfig) -> ResultTable:
    """Sweep ``n`` over ``cfg.n_grid`` with ``k = n``."""
    tasks = [(cfg, "scaling", s, bf, n, n, t)
             for s in cfg.strategies for bf in cfg.bf_grid for n in cfg.n_grid for t in range(cfg.trials)]
    return _finish(_run_tasks(tasks, cfg.jobs), cfg)


def scaling_config(**overrides) -> ExperimentConfig:
    base = dict(strategies=["fixed_order"], bf_grid=[0.1, 0.2], algorithms=["rc", "fbsr"])
    base.update(overrides)
    return ExperimentConfig(**base)


def run_failure_demo(n: int = 200, b: float = 10.0, C: float = 20.0, k: int = 100,
                     bf_grid=BF_GRID, trials: int = 10, seed: int = 0, K: int = 1000,
                     out=None, jobs: int = 1) -> ResultTable:
    """Rank-Centrality against opposite voters on half-low / half-high weights."""
    if not b > 1:
        raise ParameterError("b must exceed 1")
    cfg = ExperimentConfig(n=n, k=k, K=K, bf_grid=list(bf_grid), p_coef=C, weights="skewed", b=b,
                           strategies=["opposite"], algorithms=["rc"], trials=trials, seed=seed,
                           out=out, jobs=jobs)
    tasks = [(cfg, "failure", "opposite", bf, n, k, t) for bf in cfg.bf_grid for t in range(trials)]
    return _finish(_run_tasks(tasks, jobs), cfg)


def pearson(x, y) -> float:
    return float(np.corrcoef(np.asarray(x, dtype=float), np.asarray(y, dtype=float))[0, 1])


def failure_summary(table: ResultTable) -> dict:
    bfs = sorted({s.byzantine_fraction for s in table.scores})
    means = [table.mean("rel_l2", byzantine_fraction=bf) for bf in bfs]
    return {"byzantine_fraction": bfs, "mean_rel_l2": means,
            "pearson": pearson(bfs, means) if len(bfs) > 2 else float("nan")}


# --------------------------------------------------------------------------
# ranking datasets


def run_ranking_dataset(path, cfg: ExperimentConfig) -> ResultTable:
    """Complete rankings: RC on clean data is ground truth; a byzantine fraction
    of voters is replaced by permutation strategies; BSR and RC are scored.

    ``path=None`` uses the bundled synthetic corpus.
    """
    _, ranks = load_rankings(path, sushi=cfg.sushi_format)
    g, clean = ranking_ledger(ranks)
    truth = rank_centrality(clean, g, cfg.tol, cfg.max_iters).pi
    num_voters, m = ranks.shape
    params = FilterParams(Q=cfg.Q, mode=cfg.mode, empirical_max_out=False)
    alpha = bsr_alpha(g.d_max, num_voters)
    algos = [a for a in cfg.algorithms if a in ("rc", "bsr")] or ["rc", "bsr"]
    table = ResultTable()
    for strategy_id in cfg.strategies:
        probe = make_strategy(strategy_id, num_swaps=cfg.num_swaps)
        if not probe.is_permutation:
            raise ParameterError(f"strategy {probe.name!r} cannot produce complete rankings")
        for bf in cfg.bf_grid:
            key = f"dataset|{probe.name}|{bf!r}"
            for trial in range(cfg.trials):
                s_pick, s_strat, *_ = derive_seeds(cfg.seed, key, trial)
                F = int(round(bf * num_voters))
                byz = np.sort(np.random.default_rng(s_pick).choice(num_voters, size=F, replace=False))
                corrupted = ranks.copy()
                is_byz = np.zeros(num_voters, dtype=bool)
                is_byz[byz] = True
                removed = None
                if F:
                    strategy = make_strategy(strategy_id, num_swaps=cfg.num_swaps)
                    ctx = AdversaryContext(truth, s_strat, num_voters, byz, g)
                    strategy.prepare(ctx)
                    corrupted[byz] = strategy.ranks(ctx, byz)
                _, ledger = ranking_ledger(corrupted)
                for algo in algos:
                    if algo == "rc":
                        pi = rank_centrality(ledger, g, cfg.tol, cfg.max_iters).pi
                    else:
                        filtered, report = filter_ledger(ledger, params, alpha, is_byz)
                        pi = rank_centrality(filtered, g, cfg.tol, cfg.max_iters).pi
                        removed = report.total_removed()
                    table.scores.append(TrialScore("dataset", probe.name, algo, float(bf), m, num_voters, trial,
                                                   s_pick, rel_l2(pi, truth), kendall_tau_weights(pi, truth),
                                                   0, removed if algo == "bsr" else None))
    return _finish(table, cfg)


# --------------------------------------------------------------------------
# indistinguishability


def run_indistinguishability_demo(n: int = 4, b: float = 2.0, K: int = 4, k: int = 2, seed: int = 0) -> dict:
    """Build the two instances with ``F = K/2`` that no algorithm can tell apart.

    Instance 1: true weights ``w``, voters ``[0, K/2)`` honest, the rest
    Byzantine voting as honest voters would under the mirrored weights ``w'``.
    Instance 2: true weights ``w'``, voters ``[0, K/2)`` Byzantine voting as
    honest voters under ``w``, the rest honest. Both instances use the same
    assignment; their vote ledgers must coincide bit for bit.
    """
    if K % 2:
        raise ParameterError("K must be even")
    if not 1 <= k <= K:
        raise ParameterError("need 1 <= k <= K")
    w = make_skewed_weights(n, b)
    w_mirror = mirrored_skewed_weights(n, b)
    g = ComparisonGraph.complete(n)
    half = K // 2
    first, second = np.arange(half), np.arange(half, K)
    one = VoterPopulation(w, K, second, ImpersonateBTL(w_mirror), seed, g)
    two = VoterPopulation(w_mirror, K, first, ImpersonateBTL(w), seed, g)
    units = assign_voters(g, K, k, "per-object", seed)
    ledger_one = collect_votes(g, one, units)
    ledger_two = collect_votes(g, two, units)
    if not ledger_one.identical_to(ledger_two):
        raise InvariantViolation("the two constructed instances produced different vote ledgers")
    pi = rank_centrality(ledger_one, g).pi
    return {
        "n": n, "b": b, "K": K, "k": k, "seed": seed,
        "ledgers_identical": True,
        "votes": int(sum(u.T.size for u in ledger_one.units)),
        "bound": (b - 1) / (2 * b),
        "separation": float(np.linalg.norm(w - w_mirror) / (np.linalg.norm(w) + np.linalg.norm(w_mirror))),
        "rc_error_instance1": rel_l2(pi, w),
        "rc_error_instance2": rel_l2(pi, w_mirror),
    }


def describe_error(exc: RankingError) -> str:
    return f"{type(exc).__name__}: {exc}"
