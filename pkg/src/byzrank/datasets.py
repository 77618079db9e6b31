"""Complete-ranking datasets (one voter per line) and their vote ledgers."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

import numpy as np

from .errors import ParameterError, ParseError
from .graph import ComparisonGraph
from .voting import VoteLedger, VoteUnit

BUNDLED_CORPUS = "synthetic_permutations.txt"


def parse_rankings(text: str, sushi: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Parse rankings, best first, one per line; ``#`` starts a comment line.

    With ``sushi=True`` the input follows the Sushi ``.order`` layout: the
    first data line is a header and every later line starts with two count
    fields, both skipped.

    Returns ``(object_ids, ranks)`` where ``ranks[v, c]`` is the position
    (0 = best) voter ``v`` gives to ``object_ids[c]``.
    """
    rows: list[list[int]] = []
    line_numbers: list[int] = []
    header_seen = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if sushi and not header_seen:
            header_seen = True
            continue
        tokens = line.split()
        if sushi:
            if len(tokens) < 3:
                raise ParseError("expected two count fields followed by a ranking", lineno)
            tokens = tokens[2:]
        try:
            rows.append([int(t) for t in tokens])
        except ValueError:
            raise ParseError(f"non-integer object id in {line!r}", lineno) from None
        line_numbers.append(lineno)
    if not rows:
        raise ParseError("no rankings found")
    ids = sorted(set(rows[0]))
    if len(ids) != len(rows[0]):
        raise ParseError("ranking repeats an object", line_numbers[0])
    if len(ids) < 2:
        raise ParseError("rankings need at least two objects", line_numbers[0])
    column = {obj: c for c, obj in enumerate(ids)}
    ranks = np.empty((len(rows), len(ids)), dtype=np.int64)
    for v, (row, lineno) in enumerate(zip(rows, line_numbers)):
        if len(row) != len(ids) or set(row) != set(ids):
            raise ParseError("ranking is not a permutation of the object set of the first line", lineno)
        ranks[v, [column[obj] for obj in row]] = np.arange(len(ids))
    return np.array(ids, dtype=np.int64), ranks


def load_rankings(path=None, sushi: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Read a ranking file; ``path=None`` loads the bundled synthetic corpus."""
    if path is None:
        text = resources.files("byzrank.data").joinpath(BUNDLED_CORPUS).read_text()
    else:
        text = Path(path).read_text()
    return parse_rankings(text, sushi=sushi)


def sample_plackett_luce(weights, num_voters: int, seed=None) -> np.ndarray:
    """Rank matrix of ``num_voters`` Plackett-Luce draws (pairwise marginals are BTL)."""
    w = np.asarray(weights, dtype=np.float64)
    rng = np.random.default_rng(seed)
    keys = np.log(w)[None, :] + rng.gumbel(size=(num_voters, len(w)))
    order = np.argsort(-keys, axis=1)
    ranks = np.empty_like(order)
    np.put_along_axis(ranks, order, np.arange(len(w))[None, :], axis=1)
    return ranks


def format_rankings(ranks: np.ndarray) -> str:
    orders = np.argsort(ranks, axis=1)
    return "".join(" ".join(map(str, row)) + "\n" for row in orders.tolist())


def ranking_ledger(ranks: np.ndarray) -> tuple[ComparisonGraph, VoteLedger]:
    """Complete graph on the ranked objects and one unit per object holding every voter.

    ``T[v, c] == 1`` iff voter ``v`` ranks neighbor ``c`` above the focal object.
    """
    ranks = np.asarray(ranks)
    num_voters, m = ranks.shape
    if m < 2:
        raise ParameterError("need at least two objects")
    g = ComparisonGraph.complete(m)
    voters = np.arange(num_voters)
    units = []
    for i in range(m):
        nb = g.neighbors[i]
        T = (ranks[:, nb] < ranks[:, [i]]).astype(np.uint8)
        units.append(VoteUnit(i, 0, nb, voters, T, np.ones(num_voters, dtype=bool)))
    return g, VoteLedger(m, units)
