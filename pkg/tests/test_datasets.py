import numpy as np
import pytest

from byzrank.datasets import (format_rankings, load_rankings, parse_rankings, ranking_ledger,
                              sample_plackett_luce)
from byzrank.errors import ParseError


def test_parse_rankings_positions():
    ids, ranks = parse_rankings("# comment\n2 0 1\n0 1 2\n")
    assert ids.tolist() == [0, 1, 2]
    assert ranks.tolist() == [[1, 2, 0], [0, 1, 2]]


def test_parse_sushi_layout():
    text = "10 1\n0 3 1 0 2\n0 3 2 1 0\n"
    ids, ranks = parse_rankings(text, sushi=True)
    assert ids.tolist() == [0, 1, 2]
    assert ranks[0].tolist() == [1, 0, 2]


@pytest.mark.parametrize("text,line", [
    ("0 1 2\n0 x 2\n", 2),
    ("0 1 2\n\n0 1\n", 3),
    ("0 1 1\n", 1),
    ("0 1 2\n0 1 3\n", 2),
])
def test_parse_errors_carry_line_numbers(text, line):
    with pytest.raises(ParseError) as info:
        parse_rankings(text)
    assert info.value.line == line
    assert f"line {line}" in str(info.value)


def test_parse_rejects_empty_input():
    with pytest.raises(ParseError):
        parse_rankings("# nothing here\n")


def test_bundled_corpus():
    ids, ranks = load_rankings()
    assert ranks.shape == (5000, 10)
    assert ids.tolist() == list(range(10))
    assert np.all(np.sort(ranks, axis=1) == np.arange(10))


def test_format_round_trip():
    ranks = sample_plackett_luce([0.1, 0.2, 0.3, 0.4], 20, seed=1)
    _, back = parse_rankings(format_rankings(ranks))
    assert np.array_equal(back, ranks)


def test_plackett_luce_pairwise_marginals_are_btl():
    w = np.array([1.0, 2.0, 4.0])
    ranks = sample_plackett_luce(w, 40000, seed=2)
    for i, j in [(0, 1), (0, 2), (1, 2)]:
        p = w[i] / (w[i] + w[j])
        rate = (ranks[:, i] < ranks[:, j]).mean()
        assert abs(rate - p) <= 4 * np.sqrt(p * (1 - p) / 40000)


def test_ranking_ledger_expands_pairs():
    _, ranks = parse_rankings("2 0 1\n0 1 2\n")
    g, ledger = ranking_ledger(ranks)
    assert g.num_edges == 3
    assert sum(u.T.size for u in ledger.units) == 2 * 2 * 3
    unit = ledger.units[0]
    # voter 0 ranks object 2 above object 0, object 1 below it
    assert unit.neighbors.tolist() == [1, 2]
    assert unit.T[0].tolist() == [0, 1]
    assert unit.T[1].tolist() == [0, 0]
