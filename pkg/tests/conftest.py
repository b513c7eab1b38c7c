import random

import pytest

from allsat import from_clause_lists

# Worked 6-variable formula used throughout: C1..C5 (clause ids 0..4).
EX31_CLAUSES = [[1, -3], [2, 3, 5], [-1, -3, 4], [4, -5, 6], [5, -6]]
# 3-variable ring implication formula with exactly the all-false and
# all-true models.
EX41_CLAUSES = [[1, -2], [2, -3], [3, -1]]


@pytest.fixture
def ex31():
    return from_clause_lists(6, EX31_CLAUSES)


@pytest.fixture
def ex41():
    return from_clause_lists(3, EX41_CLAUSES)


def random_3cnf(rng: random.Random, n: int, m: int):
    clauses = []
    for _ in range(m):
        vs = rng.sample(range(1, n + 1), min(3, n))
        clauses.append([v if rng.random() < 0.5 else -v for v in vs])
    return from_clause_lists(n, clauses)


def random_instances(seed: int, count: int, n_range=(3, 12), ratio=(1.0, 4.0)):
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        n = rng.randint(*n_range)
        m = max(1, round(rng.uniform(*ratio) * n))
        out.append(random_3cnf(rng, n, m))
    return out


def solution_mask(cube) -> int:
    mask = 0
    for l in cube:
        if l > 0:
            mask |= 1 << (l - 1)
    return mask
