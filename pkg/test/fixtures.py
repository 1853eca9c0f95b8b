import random
from typing import Iterator, Optional, Sequence

import pytest

from pbcnf.model import InputModel, PbLeqConstraint
from pbcnf.normalize import NormalizeStatus, RawConstraint, term_order, to_raw

CNF_ENCODERS = ["direct", "bdd", "adder", "watchdog", "bargraph"]
PAC_ENCODERS = ["direct", "bdd", "watchdog"]
PIC_ENCODERS = ["direct", "bdd", "watchdog", "bargraph"]


def model_with_variables(count: int) -> InputModel:
    m = InputModel()
    m.new_variables(count)
    return m


def leq(
    m: InputModel,
    terms: Sequence[tuple[int, int]],
    bound: int,
    tags: frozenset[int] = frozenset({1}),
) -> PbLeqConstraint:
    """Constraint from (coefficient, signed variable id) pairs over the variables of m"""
    coeffs = tuple(c for c, _ in terms)
    lits = tuple(m.variable(abs(v)).get_lit(v > 0) for _, v in terms)
    return PbLeqConstraint(coeffs, lits, bound, tags)


def raw(
    terms: Sequence[tuple[int, int]], bound: int, m: Optional[InputModel] = None
) -> RawConstraint:
    """
    RawConstraint built directly from (coefficient, signed variable id) pairs,
    terms sorted in canonical order but otherwise not normalized
    """
    m = m or InputModel()
    while m.variable_count < max(abs(v) for _, v in terms):
        m.new_variable()
    pairs = [(c, m.variable(abs(v)).get_lit(v > 0)) for c, v in terms]
    return RawConstraint(tuple(sorted(pairs, key=term_order)), bound)


def random_leq(
    rng: random.Random, n: int, max_coeff: int, bound: Optional[int] = None
) -> tuple[InputModel, PbLeqConstraint]:
    """n distinct variables with random signs; bound uniform in [0, sum] unless given"""
    m = model_with_variables(n)
    coeffs = [rng.randint(1, max_coeff) for _ in range(n)]
    lits = [var.get_lit(rng.random() < 0.5) for var in m.variables]
    if bound is None:
        bound = rng.randint(0, sum(coeffs))
    q = PbLeqConstraint(tuple(coeffs), tuple(lits), bound)
    m.add_constraint(q)
    return m, q


def random_residuals(
    seed: int, count: int, max_n: int, max_coeff: int
) -> Iterator[RawConstraint]:
    """`count` random constraints whose normalization leaves a residual"""
    rng = random.Random(seed)
    found = 0
    while found < count:
        _, q = random_leq(rng, rng.randint(1, max_n), max_coeff)
        result = to_raw(q)
        if result.status is NormalizeStatus.RESIDUAL:
            found += 1
            yield result.residual


def small_family() -> Iterator[RawConstraint]:
    """
    Every multiset of coefficients from {1, 2, 3, 5} with at most 4 terms,
    over positive literals, with every bound leaving a residual
    """

    def multisets(size: int, start: int) -> Iterator[tuple[int, ...]]:
        if size == 0:
            yield ()
            return
        for i in range(start, len(values)):
            for rest in multisets(size - 1, i):
                yield (values[i],) + rest

    values = (5, 3, 2, 1)
    for size in range(1, 5):
        for coeffs in multisets(size, 0):
            for bound in range(max(coeffs), sum(coeffs)):
                yield raw([(c, i + 1) for i, c in enumerate(coeffs)], bound)


@pytest.fixture
def example_model() -> InputModel:
    """5.x1 + 3.~x2 + 1.x3 <= 8 tagged 1"""
    m = model_with_variables(3)
    m.add_constraint(leq(m, [(5, 1), (3, -2), (1, 3)], 8))
    return m


@pytest.fixture
def example_constraint() -> RawConstraint:
    return raw([(5, 1), (3, -2), (1, 3)], 8)


@pytest.fixture
def opb_corpus() -> list[str]:
    """OPB files translated by the command-line tests"""
    return [f"test/data/corpus_{i:02d}.opb" for i in range(10)]
