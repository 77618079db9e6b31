"""Regenerate the bundled synthetic permutation corpus.

Ten objects with moderately spread Plackett-Luce weights, 5000 voters,
shaped like the Sushi preference data (which is not redistributed here).
"""

from pathlib import Path

import numpy as np

from byzrank.datasets import BUNDLED_CORPUS, format_rankings, sample_plackett_luce

WEIGHTS = np.array([0.04, 0.05, 0.06, 0.07, 0.085, 0.095, 0.105, 0.115, 0.125, 0.13])
SEED = 20230101

if __name__ == "__main__":
    ranks = sample_plackett_luce(WEIGHTS / WEIGHTS.sum(), 5000, SEED)
    out = Path(__file__).resolve().parents[1] / "src" / "byzrank" / "data" / BUNDLED_CORPUS
    header = f"# Plackett-Luce corpus: 10 objects, 5000 voters, seed {SEED}, weights {WEIGHTS.tolist()}\n"
    out.write_text(header + format_rankings(ranks))
