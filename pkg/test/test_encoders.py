from itertools import product
import random

import pytest

from pbcnf.encoders import (
    FALSE_NODE,
    TRUE_NODE,
    AdderEncoder,
    BddEncoder,
    DirectEncoder,
    Encoder2Cnf,
    EncoderName,
    PbBasicEncoder,
    build_robdd,
    encode_adder,
    encode_bargraph,
    encode_bdd,
    encode_direct,
    encode_pb_basic,
    encode_watchdog,
    resolve_encoder,
    totalizer,
)
from pbcnf.formula import CnfFormula, VarAllocator
from pbcnf.verify import ClauseDatabase, projected_models, unit_propagate
from test.fixtures import (
    CNF_ENCODERS,
    example_constraint,
    random_residuals,
    raw,
)

EXAMPLE_MODELS = {
    tuple(s * v for s, v in zip(signs, (1, 2, 3)))
    for signs in product((1, -1), repeat=3)
} - {(1, -2, 3)}


def cardinality(n: int, k: int):
    return raw([(1, i) for i in range(1, n + 1)], k)


def test_bdd_single_node():
    bdd = build_robdd(raw([(1, 1)], 0))
    assert len(bdd) == 1
    node = bdd.nodes[bdd.root]
    assert (node.index, node.high, node.low) == (0, FALSE_NODE, TRUE_NODE)


def test_bdd_example_constraint(example_constraint):
    bdd = build_robdd(example_constraint)
    assert list(bdd.false_paths()) == [[0, 1, 2]]
    assert not bdd.evaluate([True, True, True])
    assert bdd.evaluate([True, True, False])


def test_bdd_shares_nodes():
    """x1 + x2 + x3 <= 1: below two true literals x3 no longer matters"""
    bdd = build_robdd(cardinality(3, 1))
    assert len(bdd) == 4
    assert bdd.level_sizes(3) == [1, 2, 1]
    assert bdd.root == max(bdd.nodes)


def test_bdd_matches_constraint():
    rng = random.Random(11)
    for r in random_residuals(seed=5, count=100, max_n=7, max_coeff=12):
        bdd = build_robdd(r)
        assert len(bdd) <= (len(r) + 1) * (r.bound + 2)
        assert len(set(bdd.nodes.values())) == len(bdd)
        for _ in range(20):
            values = [rng.random() < 0.5 for _ in range(len(r))]
            lhs = sum(c for c, v in zip(r.coeffs, values) if v)
            assert bdd.evaluate(values) == (lhs <= r.bound)


def test_direct_example_constraint(example_constraint):
    formula = encode_direct(example_constraint)
    assert formula.clauses == [(-1, 2, -3)]
    assert formula.aux_variables == []


def test_direct_pairwise():
    assert encode_direct(raw([(2, 1), (2, 2)], 3)).clauses == [(-1, -2)]
    assert encode_direct(cardinality(3, 1)).clauses == [(-1, -2), (-1, -3), (-2, -3)]


def test_bdd_encoding_single_node():
    alloc = VarAllocator(2)
    formula = encode_bdd(raw([(1, 1)], 0), alloc)
    assert formula.aux_variables == [2]
    assert formula.clauses == [(2,), (-2, -1)]


def test_bdd_encoding_example_models(example_constraint):
    formula = encode_bdd(example_constraint, VarAllocator(4))
    assert formula.clauses[0] == (formula.aux_variables[-1],)
    assert projected_models(formula, [1, 2, 3]) == EXAMPLE_MODELS


@pytest.mark.parametrize("n", [10, 20, 40])
@pytest.mark.parametrize("k", [1, 5, 10])
def test_bdd_cardinality_size(n, k):
    formula = encode_bdd(cardinality(n, k), VarAllocator(n + 1))
    assert len(formula) <= 2 * n * (k + 1) + 1


def test_direct_grows_faster_than_bdd():
    ratios = []
    for n in (8, 12, 16):
        r = cardinality(n, n // 2)
        direct = len(encode_direct(r))
        bdd = len(encode_bdd(r, VarAllocator(n + 1)))
        ratios.append(direct / bdd)
    assert ratios[0] < ratios[1] < ratios[2]
    assert ratios[2] > 10


def test_half_adder_network():
    """x1 + x2 <= 1: one half adder, the carry must stay false"""
    alloc = VarAllocator(3)
    formula = encode_adder(cardinality(2, 1), alloc)
    assert formula.aux_variables == [3, 4]
    assert len(formula) == 8
    assert formula.clauses[-1] == (-4,)


def test_full_adder_network():
    alloc = VarAllocator(4)
    formula = encode_adder(cardinality(3, 1), alloc)
    assert len(formula.aux_variables) == 2
    assert len(formula) == 8 + 6 + 1


def test_adder_unit():
    formula = encode_adder(raw([(1, 1)], 0), VarAllocator(2))
    assert formula.clauses == [(-1,)]


def test_adder_example_models(example_constraint):
    formula = encode_adder(example_constraint, VarAllocator(4))
    assert projected_models(formula, [1, 2, 3]) == EXAMPLE_MODELS


def test_adder_computes_the_sum():
    """Under a complete input assignment the sum bits are fully propagated"""
    rng = random.Random(4)
    for r in random_residuals(seed=9, count=30, max_n=6, max_coeff=16):
        formula = encode_adder(r, VarAllocator(max(r.var_ids) + 1))
        db = ClauseDatabase(formula)
        for _ in range(10):
            values = {var: rng.random() < 0.5 for var in r.var_ids}
            result = db.propagate([v if b else -v for v, b in values.items()])
            assert result.conflict != r.is_satisfied(values)
            if not result.conflict:
                assert set(formula.aux_variables) <= set(result.values)


def test_totalizer_single_input():
    outputs, formula = totalizer([5], VarAllocator(6))
    assert outputs == [5]
    assert len(formula) == 0


def test_totalizer_two_inputs():
    outputs, formula = totalizer([1, 2], VarAllocator(3))
    assert outputs == [3, 4]
    assert set(formula.clauses) == {(-2, 3), (-1, 3), (-1, -2, 4)}


def test_totalizer_counts():
    outputs, formula = totalizer([1, 2, 3, 4], VarAllocator(5))
    result = unit_propagate(formula, [1, 3, 4])
    assert {outputs[0], outputs[1], outputs[2]} <= result.forced
    assert outputs[3] not in result.values


def test_totalizer_cap():
    outputs, formula = totalizer(list(range(1, 7)), VarAllocator(7), cap=2)
    assert len(outputs) == 2
    result = unit_propagate(formula, [2, 5, 6])
    assert set(outputs) <= result.forced


def test_totalizer_into_existing_formula():
    formula = CnfFormula()
    outputs, same = totalizer([1, 2, 3], VarAllocator(4), formula=formula)
    assert same is formula
    assert len(formula) > 0


def test_watchdog_unit():
    formula = encode_watchdog(raw([(1, 1)], 0), VarAllocator(2))
    assert formula.clauses == [(-1,)]


def test_watchdog_restores_arc_consistency(example_constraint):
    formula = encode_watchdog(example_constraint, VarAllocator(4))
    result = unit_propagate(formula, [1, 3])
    assert 2 in result.forced
    assert projected_models(formula, [1, 2, 3]) == EXAMPLE_MODELS


@pytest.mark.parametrize("n, k", [(4, 1), (6, 3), (8, 5)])
def test_watchdog_cardinality(n, k):
    formula = encode_watchdog(cardinality(n, k), VarAllocator(n + 1))
    result = unit_propagate(formula, list(range(1, k + 1)))
    assert {-i for i in range(k + 1, n + 1)} <= result.forced


def test_bargraph_unit():
    formula = encode_bargraph(raw([(1, 1)], 0), VarAllocator(2))
    assert unit_propagate(formula, [1]).conflict


def test_bargraph_detects_overflow(example_constraint):
    formula = encode_bargraph(example_constraint, VarAllocator(4))
    assert not unit_propagate(formula, [1, -2]).conflict
    assert unit_propagate(formula, [1, -2, 3]).conflict
    assert projected_models(formula, [1, 2, 3]) == EXAMPLE_MODELS


def test_bargraph_smaller_than_watchdog():
    rng = random.Random(30)
    smaller = 0
    for _ in range(30):
        n = 8
        coeffs = [rng.randint(1, 32) for _ in range(n)]
        bound = rng.randint(max(coeffs), sum(coeffs) - 1)
        r = raw([(c, i + 1) for i, c in enumerate(coeffs)], bound)
        bargraph = len(encode_bargraph(r, VarAllocator(n + 1)))
        watchdog = len(encode_watchdog(r, VarAllocator(n + 1)))
        smaller += bargraph < watchdog
    assert smaller >= 27


def test_pb_basic(example_constraint):
    q = encode_pb_basic(example_constraint)
    assert q.terms == ((-5, 1), (3, 2), (-1, 3))
    assert q.bound == -5
    assert q.to_opb() == "-5 x1 +3 x2 -1 x3 >= -5 ;"
    for values in product((True, False), repeat=3):
        assignment = dict(zip((1, 2, 3), values))
        assert q.is_satisfied(assignment) == example_constraint.is_satisfied(assignment)


def test_pb_basic_unit_and_cardinality():
    assert encode_pb_basic(raw([(1, 1)], 0)).to_opb() == "-1 x1 >= 0 ;"
    assert encode_pb_basic(cardinality(3, 2)).to_opb() == "-1 x1 -1 x2 -1 x3 >= -2 ;"


@pytest.mark.parametrize("encoder", CNF_ENCODERS)
def test_encoders_leave_inputs_alone(encoder):
    """Auxiliary variables come from the allocator, inputs are never reallocated"""
    r = raw([(7, 1), (5, -2), (4, 3), (3, -4), (2, 5), (1, 6)], 10)
    alloc = VarAllocator(7)
    formula = resolve_encoder(encoder).encode(r, alloc)
    assert all(var >= 7 for var in formula.aux_variables)
    assert formula.variables <= set(range(1, 7)) | set(formula.aux_variables)
    assert alloc.top_id == 6 + len(formula.aux_variables)


@pytest.mark.parametrize(
    "name, cls",
    [("direct", DirectEncoder), ("BDD", BddEncoder), ("Adder", AdderEncoder), ("pb", PbBasicEncoder)],
)
def test_resolve_encoder(name, cls):
    assert isinstance(resolve_encoder(name), cls)
    assert isinstance(resolve_encoder(EncoderName(name)), cls)


def test_resolve_encoder_instance():
    encoder = BddEncoder()
    assert resolve_encoder(encoder) is encoder


def test_resolve_unknown_encoder():
    with pytest.raises(ValueError, match="sorting-network"):
        resolve_encoder("sorting-network")


def test_encoder_kinds():
    assert [name.value for name in EncoderName if name.is_cnf] == CNF_ENCODERS
    assert not EncoderName.PB.is_cnf
    assert issubclass(EncoderName.WATCHDOG.encoder_class, Encoder2Cnf)



def test_bdd_of_long_cardinality():
    bdd = build_robdd(cardinality(1500, 2))
    assert len(bdd) <= 3 * 1500
    assert bdd.root == max(bdd.nodes)
    assert bdd.evaluate([True, True] + [False] * 1498)
    assert not bdd.evaluate([False] * 1497 + [True] * 3)


def test_direct_of_long_constraint():
    """1000.x1 + x2 + ... + x1001 <= 1000: x1 excludes every other literal"""
    r = raw([(1000, 1)] + [(1, j) for j in range(2, 1002)], 1000)
    assert encode_direct(r).clauses == [(-1, -j) for j in range(2, 1002)]
