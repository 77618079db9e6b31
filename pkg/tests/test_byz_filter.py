import itertools
import logging
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from byzrank.byz_filter import (FilterParams, Thresholds, bound_sum_deviations, bsr_alpha, bsr_rank,
                                default_max_size, fbsr_alpha, fbsr_rank, filter_ledger, gray_scan, ksi_scan,
                                lower_median, scan_removals, sign_vectors)
from byzrank.errors import DegenerateFilterError, FeasibilityError, ParameterError
from byzrank.graph import ComparisonGraph, generate_er_graph, is_connected
from byzrank.metrics import rel_l2
from byzrank.spectral import rank_centrality
from byzrank.voting import (VoterPopulation, assign_voters, collect_votes, make_strategy,
                            sample_uniform_weights)


def naive_filter(T, radius, max_out):
    k, d = T.shape
    remove = np.zeros(k, dtype=bool)
    for signs in itertools.product((1, -1), repeat=d):
        U = np.array([sum(s * t for s, t in zip(signs, row)) for row in T.tolist()])
        med = sorted(U)[(k - 1) // 2]
        flags = np.abs(U - med) >= radius
        if flags.sum() >= max_out:
            remove |= flags
    return ~remove


class TightParams(FilterParams):
    def thresholds(self, d, k, alpha):
        return Thresholds(0.1, 0.5, 1.0, False)


vote_matrices = st.tuples(st.integers(1, 25), st.integers(1, 6)).flatmap(
    lambda s: arrays(np.uint8, s, elements=st.integers(0, 1)))


def test_theoretical_thresholds_example():
    alpha = bsr_alpha(8, 100)
    th = FilterParams(mode="theoretical").thresholds(8, 100, alpha)
    assert th.delta == pytest.approx(4.292, abs=1e-3)
    assert 100 ** (1 - alpha) == pytest.approx(8)
    assert th.max_out == pytest.approx(72)
    assert th.radius == pytest.approx(5 * th.delta)
    assert not th.clamped


def test_empirical_thresholds():
    th = FilterParams().thresholds(9, 100, 0.5)
    assert th.radius == 4
    assert th.max_out == 5
    sushi = FilterParams(empirical_max_out=False).thresholds(9, 5000, bsr_alpha(9, 5000))
    assert sushi.radius == 4
    assert sushi.max_out == pytest.approx(80)


def test_max_out_clamped_to_k():
    th = FilterParams(mode="theoretical").thresholds(20, 50, bsr_alpha(20, 50))
    assert th.clamped and th.max_out == 50


def test_fbsr_alpha():
    n, k, C = 200, 100, 1.0
    alpha = fbsr_alpha(C, n, k)
    assert k ** (1 - alpha) == pytest.approx((2 + C / 8) * math.log(n))
    with pytest.raises(ParameterError):
        fbsr_alpha(1.0, 200, 1)


def test_params_validation():
    with pytest.raises(ParameterError):
        FilterParams(Q=0.5)
    with pytest.raises(ParameterError):
        FilterParams(mode="loose")


def test_ksi_scan_examples():
    rng = np.random.default_rng(0)
    T = rng.integers(0, 2, (5, 3))
    assert np.array_equal(ksi_scan(T, np.ones(3)), T.sum(axis=1))
    for col in sign_vectors(3).T:
        naive = np.array([sum(int(T[v, j]) * int(col[j]) for j in range(3)) for v in range(5)])
        assert np.array_equal(ksi_scan(T, col), naive)
        assert np.array_equal(ksi_scan(T, -col), -naive)


def test_gray_scan_visits_every_sign_vector():
    rng = np.random.default_rng(1)
    T = rng.integers(0, 2, (7, 4))
    seen = set()
    for xi, U in gray_scan(T):
        assert np.array_equal(U, T @ xi)
        seen.add(tuple(xi))
    assert len(seen) == 16


def test_lower_median():
    assert lower_median(np.array([4, 1, 3, 2])) == 2
    assert lower_median(np.array([5, 1, 3])) == 3


def test_identical_voters_are_never_removed():
    T = np.tile([1, 0, 1, 1, 0, 0, 1, 0], (100, 1))
    res = bound_sum_deviations(T, FilterParams(), 0.5)
    assert res.keep.all() and res.triggering == 0


def test_colluding_block_is_removed():
    rng = np.random.default_rng(3)
    T = np.zeros((100, 8), dtype=np.uint8)
    T[:, :] = rng.random((100, 8)) < 0.1
    T[:30] = 1  # 30 voters shift the all-ones projection far from the median
    res = bound_sum_deviations(T, FilterParams(), 0.5)
    assert not res.keep[:30].any()
    assert res.keep[30:].mean() > 0.9


@settings(max_examples=80, deadline=None)
@given(vote_matrices, st.sampled_from([1.0, 1.5, 2.0, 3.0]), st.integers(1, 6))
def test_scans_agree_with_naive_enumeration(T, radius, max_out):
    expected = naive_filter(T.astype(int), radius, max_out)
    for scan in ("matmul", "gray"):
        remove, _, _ = scan_removals(T, radius, max_out, scan)
        assert np.array_equal(~remove, expected)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 12).map(lambda h: 2 * h + 1), st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_flag_sets_symmetric_under_negation_for_odd_k(k, d, seed):
    T = np.random.default_rng(seed).integers(0, 2, (k, d))
    for xi in sign_vectors(d).T:
        for a, b in ((xi, -xi),):
            Ua, Ub = ksi_scan(T, a), ksi_scan(T, b)
            fa = np.abs(Ua - lower_median(Ua)) >= 2
            fb = np.abs(Ub - lower_median(Ub)) >= 2
            assert np.array_equal(fa, fb)


def test_hard_cap_and_degenerate_errors():
    with pytest.raises(FeasibilityError):
        bound_sum_deviations(np.zeros((5, 26), dtype=np.uint8), FilterParams(), 0.5)
    # U under (1, 1) is (0, 2, 1) and under (1, -1) is (0, 0, -1): every voter gets flagged
    with pytest.raises(DegenerateFilterError):
        bound_sum_deviations(np.array([[0, 0], [1, 1], [0, 1]]), TightParams(), 0.5)


def test_survivors_near_median_for_triggering_sign_vectors():
    # theoretical radius with a heavy colluding block: survivors stay within 9 delta
    rng = np.random.default_rng(5)
    k, d = 2000, 4
    T = (rng.random((k, d)) < 0.5).astype(np.uint8)
    params = FilterParams(mode="theoretical")
    res = bound_sum_deviations(T, params, bsr_alpha(d, k))
    delta = res.thresholds.delta
    for xi in sign_vectors(d).T:
        U = ksi_scan(T, xi)
        med = lower_median(U)
        flags = np.abs(U - med) >= res.thresholds.radius
        if flags.sum() >= res.thresholds.max_out:
            assert np.all(np.abs(U[res.keep] - med) <= 9 * delta)


def connected(n, p, seed, max_degree=None):
    for r in range(1000):
        g = generate_er_graph(n, p, [seed, r])
        if is_connected(g) and (max_degree is None or g.d_max <= max_degree):
            return g
    raise AssertionError("no suitable graph")


def test_bsr_without_removals_equals_rank_centrality():
    g = connected(12, 0.5, 1)
    w = sample_uniform_weights(12, seed=1)
    pop = VoterPopulation(w, 400, seed=1)
    res = bsr_rank(g, pop, 200, FilterParams(), seed=2)
    ledger = collect_votes(g, pop, assign_voters(g, 400, 200, "per-object", seed=2))
    if res.report.total_removed() == 0:
        assert np.array_equal(res.pi, rank_centrality(ledger, g).pi)
    assert np.array_equal(res.pi, rank_centrality(res.ledger, g).pi)


def test_bsr_beats_rank_centrality_against_opposite_voters():
    for trial in range(10):
        g = connected(30, 0.25, trial, max_degree=12)
        w = sample_uniform_weights(30, seed=trial)
        pop = VoterPopulation.with_fraction(w, 1000, 0.3, make_strategy("ov"), seed=trial, graph=g)
        res = bsr_rank(g, pop, 100, FilterParams(), seed=trial)
        unfiltered = collect_votes(g, pop, assign_voters(g, 1000, 100, "per-object", seed=trial))
        rc = rank_centrality(unfiltered, g).pi
        assert rel_l2(res.pi, w) < rel_l2(rc, w)


def test_bsr_refuses_high_degree():
    g = ComparisonGraph.complete(30)
    pop = VoterPopulation(np.ones(30) / 30, 50)
    with pytest.raises(FeasibilityError):
        bsr_rank(g, pop, 10)


def test_fbsr_single_bucket_equals_bsr():
    g = connected(20, 0.4, 4)
    w = sample_uniform_weights(20, seed=4)
    pop = VoterPopulation.with_fraction(w, 500, 0.2, make_strategy("fov"), seed=4, graph=g)
    a = bsr_rank(g, pop, 100, FilterParams(), seed=9)
    b = fbsr_rank(g, pop, 100, params=FilterParams(), seed=9, max_size=g.d_max)
    assert np.array_equal(a.pi, b.pi)
    assert a.report.rows == b.report.rows


def test_fbsr_bucket_layout_and_report():
    g = connected(200, 0.5298, 0)
    pop = VoterPopulation(sample_uniform_weights(200, seed=0), 1000, seed=0)
    res = fbsr_rank(g, pop, 100, seed=1)
    assert default_max_size(200) == 8
    for i in range(200):
        rows = [r for r in res.report.rows if r["object"] == i]
        assert len(rows) == math.ceil(g.degree[i] / 8)
    for r in res.report.rows:
        assert r["removed_good"] + r["removed_byz"] == r["removed"]
        assert r["removed_byz"] == 0
    assert (res.report.surviving_fractions() >= 5 / 6).mean() >= 0.99


def test_filter_report_csv_and_determinism(tmp_path):
    g = connected(25, 0.4, 7)
    w = sample_uniform_weights(25, seed=7)
    pop = VoterPopulation.with_fraction(w, 300, 0.3, make_strategy("ov"), seed=7, graph=g)
    a = fbsr_rank(g, pop, 60, seed=3, max_size=4)
    b = fbsr_rank(g, pop, 60, seed=3, max_size=4)
    assert a.report.rows == b.report.rows
    text = a.report.to_csv(tmp_path / "report.csv")
    header = text.splitlines()[0].split(",")
    assert header[:6] == ["object", "bucket", "assigned", "removed", "removed_good", "removed_byz"]
    assert (tmp_path / "report.csv").read_text() == text
    assert a.report.total_removed() > 0
    for unit in a.ledger.units:
        assert unit.keep.sum() + (~unit.keep).sum() == unit.k


def test_clamp_warning(caplog):
    g = ComparisonGraph.complete(8)
    pop = VoterPopulation(np.ones(8) / 8, 100, seed=0)
    ledger = collect_votes(g, pop, assign_voters(g, 100, 20, "per-object", seed=0))
    with caplog.at_level(logging.WARNING):
        filter_ledger(ledger, FilterParams(mode="theoretical"), bsr_alpha(7, 20))
    assert "max_out" in caplog.text
