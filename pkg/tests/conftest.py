import sys
from pathlib import Path

import numpy as np
import pytest

from pmsreduce.boundary import BoundaryMatrix
from pmsreduce.complex import build_vietoris_rips
from pmsreduce.ensembles import ENSEMBLES, sample

sys.path.insert(0, str(Path(__file__).parent))

# sigma1..3 vertices, 4={1,2}, 5={1,3}, 6={2,3}, 7={1,2,3}
T7_COLUMNS = [[], [], [], [1, 2], [1, 3], [2, 3], [4, 5, 6]]
T7_DIMS = [0, 0, 0, 1, 1, 1, 2]
T7_LOWSTAR = [0, 0, 0, 2, 3, 0, 6]

# square: 5={1,2}, 6={1,3}, 7={2,4}, 8={3,4}
S8_COLUMNS = [[], [], [], [], [1, 2], [1, 3], [2, 4], [3, 4]]
S8_DIMS = [0, 0, 0, 0, 1, 1, 1, 1]
S8_LOWSTAR = [0, 0, 0, 0, 2, 3, 4, 0]


def t7() -> BoundaryMatrix:
    return BoundaryMatrix(T7_COLUMNS, T7_DIMS)


def s8() -> BoundaryMatrix:
    return BoundaryMatrix(S8_COLUMNS, S8_DIMS)


def corpus_params(count: int = 200):
    """Deterministic small-filtration parameters cycling through ensembles.

    Clouds have 3..8 points, max_dim 1..3, and a grid top between 30% and
    100% of half the diameter so that some complexes are truncated.
    """
    out = []
    for i in range(count):
        ensemble = ENSEMBLES[i % len(ENSEMBLES)]
        n = 3 + (i * 7) % 6
        max_dim = 1 + (i // 4) % 3
        out.append((ensemble, n, i, max_dim, 0.3 + 0.7 * ((i * 3) % 8) / 7, 4 + i % 7))
    return out


def corpus_filtration(ensemble, n, seed, max_dim, frac, divisions):
    cloud = sample(ensemble, n, seed)
    pts = cloud.points
    diam = max(float(np.linalg.norm(a - b)) for a in pts for b in pts) if n > 1 else 1.0
    r_max = max(frac * diam / 2, 1e-9)
    return build_vietoris_rips(cloud, r_max, divisions, max_dim)


@pytest.fixture(scope="session")
def corpus():
    return [(params, corpus_filtration(*params)) for params in corpus_params()]


# criterion number -> (passed, description, detail), filled by test_acceptance
ACCEPTANCE_RESULTS: dict[int, tuple[bool, str, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_RESULTS):
        ok, desc, detail = ACCEPTANCE_RESULTS[n]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {n:2d}. {desc}: {detail}")
