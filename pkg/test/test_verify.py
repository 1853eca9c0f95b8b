from itertools import product
import random

import pytest

from pbcnf.encoders import encode_adder, encode_direct
from pbcnf.formula import CnfFormula, VarAllocator
from pbcnf.verify import (
    ClauseDatabase,
    OracleGuardError,
    PacCounterexample,
    PicCounterexample,
    PropagationStatus,
    ac_forced_by_enumeration,
    ac_forced_literals,
    check_pac,
    check_pic,
    enumerate_cnf_models,
    enumerate_pb_models,
    partial_assignments,
    projected_models,
    solve_cnf,
    unit_propagate,
)
from test.fixtures import leq, model_with_variables, example_constraint, random_residuals, raw

# regression witnesses for the adder network
ADDER_PAC_WITNESS = ([(2, 1), (1, 2), (1, 3)], 2)
ADDER_PIC_WITNESS = ([(1, 1), (1, 2), (1, 3), (1, 4)], 1)


def test_unit_propagation():
    assert unit_propagate([(1,)]).forced == {1}
    assert unit_propagate([(-1, 2), (1,)]).forced == {1, 2}
    result = unit_propagate([(-1, 2, -3)], [1, 3])
    assert result.status is PropagationStatus.FIXPOINT
    assert result.forced == {2}


def test_unit_propagation_conflicts():
    assert unit_propagate([(1,), (-1,)]).conflict
    assert unit_propagate([()]).conflict
    assert unit_propagate([(-1, -2)], [1, 2]).conflict
    result = unit_propagate([(1, 2)], [3, -3])
    assert result.conflict
    assert result.forced == frozenset()


def test_unit_propagation_is_monotone():
    rng = random.Random(8)
    for _ in range(50):
        clauses = [
            tuple(rng.choice([1, -1]) * rng.randint(1, 6) for _ in range(rng.randint(1, 3)))
            for _ in range(8)
        ]
        db = ClauseDatabase(clauses)
        small = db.propagate([1])
        large = db.propagate([1, -2])
        if not small.conflict and not large.conflict:
            assert small.forced - {-2} <= large.forced | {-2}


def test_ac_forced_literals(example_constraint):
    assert ac_forced_literals(example_constraint, {1: True, 3: True}).forced == {2}
    result = ac_forced_literals(example_constraint, {})
    assert result.status is PropagationStatus.FIXPOINT
    assert result.forced == frozenset()


def test_ac_inconsistent():
    r = raw([(2, 1), (2, 2)], 3)
    assert ac_forced_literals(r, {1: True, 2: True}).conflict
    assert ac_forced_literals(r, {1: True}).forced == {-2}


def test_ac_oracles_agree():
    for r in random_residuals(seed=13, count=60, max_n=4, max_coeff=7):
        for sigma in partial_assignments(sorted(r.var_ids)):
            assert ac_forced_literals(r, sigma) == ac_forced_by_enumeration(r, sigma)


def test_partial_assignments_order():
    sigmas = list(partial_assignments([1, 2]))
    assert len(sigmas) == 9
    assert sigmas[0] == {}
    assert sigmas[1] == {2: True}
    assert sigmas[-1] == {1: False, 2: False}


def test_enumerate_pb_models(example_constraint):
    models = enumerate_pb_models([example_constraint], [1, 2, 3])
    assert len(models) == 7
    assert (1, -2, 3) not in models
    assert len(enumerate_pb_models([], [1, 2])) == 4
    unit = raw([(1, 1)], 0)
    assert enumerate_pb_models([unit], [1, 2, 3]) == {
        (-1, s2 * 2, s3 * 3) for s2, s3 in product((1, -1), repeat=2)
    }


def test_enumerate_pb_models_with_variables():
    m = model_with_variables(2)
    q = leq(m, [(1, 1), (1, 2)], 1)
    assert len(enumerate_pb_models([q], m.variables)) == 3


def test_enumeration_guard():
    with pytest.raises(OracleGuardError):
        enumerate_pb_models([], list(range(1, 22)))
    with pytest.raises(OracleGuardError):
        projected_models([], list(range(1, 22)))


def test_solve_cnf():
    assert solve_cnf([]) == {}
    assert solve_cnf(CnfFormula()) == {}
    assert solve_cnf([(1,), (-1,)]) is None
    model = solve_cnf([(1, 2), (-1, 2), (-2, 3)])
    assert model[2] and model[3]
    assert solve_cnf([(1, 2)], [-1, -2]) is None


def test_solve_cnf_agrees_with_truth_table():
    rng = random.Random(17)
    for _ in range(40):
        n = rng.randint(1, 10)
        clauses = [
            tuple(rng.choice([1, -1]) * rng.randint(1, n) for _ in range(rng.randint(1, 3)))
            for _ in range(rng.randint(1, 4 * n))
        ]
        variables = sorted({abs(lit) for clause in clauses for lit in clause})
        satisfiable = any(
            all(any((lit > 0) == values[abs(lit)] for lit in clause) for clause in clauses)
            for values in (
                dict(zip(variables, bits))
                for bits in product((True, False), repeat=len(variables))
            )
        )
        model = solve_cnf(clauses)
        assert (model is not None) == satisfiable
        if model is not None:
            assert all(any((lit > 0) == model[abs(lit)] for lit in clause) for clause in clauses)


def test_direct_projected_models(example_constraint):
    formula = encode_direct(example_constraint)
    assert len(enumerate_cnf_models(formula, [1, 2, 3])) == 7
    assert enumerate_cnf_models(formula, [1, 2, 3]) == projected_models(formula, [1, 2, 3])


def test_enumerate_cnf_models_projection():
    assert enumerate_cnf_models([(1, 2)], [1]) == {(1,), (-1,)}
    assert enumerate_cnf_models([(1,), (-1,)], [1]) == set()


@pytest.mark.parametrize("encoder", ["direct", "bdd", "watchdog"])
def test_pac_encoders(encoder, example_constraint):
    assert check_pac(encoder, example_constraint) is None
    assert check_pac(encoder, raw([(1, 1), (1, 2), (1, 3)], 1)) is None


@pytest.mark.parametrize("encoder", ["direct", "bdd", "watchdog", "bargraph"])
def test_pic_encoders(encoder, example_constraint):
    assert check_pic(encoder, example_constraint) is None


def test_adder_pac_witness():
    r = raw(*ADDER_PAC_WITNESS)
    formula = encode_adder(r, VarAllocator(4))
    up = unit_propagate(formula, [1])
    assert not up.conflict
    assert not {lit for lit in up.forced if abs(lit) <= 3}
    assert ac_forced_literals(r, {1: True}).forced == {-2, -3}

    counterexample = check_pac("adder", r)
    assert isinstance(counterexample, PacCounterexample)
    assert counterexample.up_forced != counterexample.ac_forced


def test_adder_pic_witness():
    r = raw(*ADDER_PIC_WITNESS)
    formula = encode_adder(r, VarAllocator(5))
    assert not unit_propagate(formula, [1, 4]).conflict
    assert ac_forced_literals(r, {1: True, 4: True}).conflict
    assert isinstance(check_pic("adder", r), PicCounterexample)


def test_check_rejects_pb_encoder(example_constraint, caplog):
    with pytest.raises(ValueError, match="does not produce clauses"):
        check_pac("pb", example_constraint)
    assert "does not produce clauses" in caplog.text


def test_check_guard():
    with pytest.raises(OracleGuardError):
        check_pic("bdd", raw([(1, i) for i in range(1, 12)], 3))


def test_solve_cnf_long_chain():
    """x1 -> x2 -> ... -> x3000, x3000 set: all other variables come from branching"""
    clauses = [(-i, i + 1) for i in range(1, 3000)] + [(3000,)]
    model = solve_cnf(clauses)
    assert model is not None
    assert model[3000]
    assert all(any((lit > 0) == model[abs(lit)] for lit in clause) for clause in clauses)
