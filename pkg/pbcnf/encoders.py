"""
Encoders translating one canonical RawConstraint into output constraints.

CNF encoders:
    direct    - one clause per path to False of the constraint's BDD, no auxiliary variables
    bdd       - one auxiliary variable per BDD node, two clauses per node
    adder     - binary adder network compared against the bound
    watchdog  - one totalizer watchdog per literal, unit propagation restores arc consistency
    bargraph  - a single totalizer watchdog, unit propagation detects inconsistency
PB encoder:
    pb        - OPB-normal pass-through

Every encoder relies on the canonical term order of the RawConstraint
(decreasing coefficients) for its variable order.
"""

from abc import ABC, abstractmethod
from collections import deque
from dataclasses import dataclass, field
import enum
from itertools import product
import math
from typing import Iterator, Optional, Sequence, Union

from pbcnf.formula import CnfFormula, PbOutputConstraint, VarAllocator
from pbcnf.logger import get_logger
from pbcnf.normalize import RawConstraint

logger = get_logger(__name__)

FALSE_NODE = 0
TRUE_NODE = 1

# bounds [lo, hi] of a sub-problem and the node deciding it
BoundInterval = tuple[float, float, int]


@dataclass(frozen=True)
class BddNode:
    """Decision on the literal at position `index` of the constraint's terms"""

    index: int
    high: int
    low: int


@dataclass
class Bdd:
    """
    Reduced ordered BDD. Node ids 0 and 1 are the False and True terminals,
    decision nodes are numbered from 2 in creation order (children before parents).
    """

    nodes: dict[int, BddNode] = field(default_factory=dict)
    root: int = TRUE_NODE

    def __len__(self) -> int:
        return len(self.nodes)

    def level_sizes(self, num_levels: int) -> list[int]:
        sizes = [0] * num_levels
        for node in self.nodes.values():
            sizes[node.index] += 1
        return sizes

    def evaluate(self, values: Sequence[bool]) -> bool:
        """Follow the branch chosen by the truth value of each term's literal"""
        node_id = self.root
        while node_id not in (FALSE_NODE, TRUE_NODE):
            node = self.nodes[node_id]
            node_id = node.high if values[node.index] else node.low
        return node_id == TRUE_NODE

    def false_paths(self) -> Iterator[list[int]]:
        """
        Term indices taken on the high branch along every path to False,
        depth first with the high branch explored first.
        """
        stack: list[tuple[int, list[int]]] = [(self.root, [])]
        while stack:
            node_id, taken = stack.pop()
            if node_id == FALSE_NODE:
                yield taken
                continue
            if node_id == TRUE_NODE:
                continue
            node = self.nodes[node_id]
            stack.append((node.low, taken))
            stack.append((node.high, taken + [node.index]))


def build_robdd(r: RawConstraint) -> Bdd:
    """
    BDD of sum(a_i l_i) <= b with the term order as variable order.
    Sub-problems at the same depth are merged when their remaining bounds fall
    in the same interval [lo, hi] of bounds defining the same function.
    Built depth first with an explicit stack, high child before low child.
    """
    coeffs = r.coeffs
    suffix = [0] * (len(coeffs) + 1)
    for i in range(len(coeffs) - 1, -1, -1):
        suffix[i] = suffix[i + 1] + coeffs[i]

    bdd = Bdd()
    unique: dict[tuple[int, int, int], int] = {}
    intervals: list[list[BoundInterval]] = [[] for _ in coeffs]

    def lookup(i: int, k: int) -> Optional[BoundInterval]:
        if k < 0:
            return -math.inf, -1, FALSE_NODE
        if k >= suffix[i]:
            return suffix[i], math.inf, TRUE_NODE
        for lo, hi, node_id in intervals[i]:
            if lo <= k <= hi:
                return lo, hi, node_id
        return None

    def make_node(
        i: int, high_child: BoundInterval, low_child: BoundInterval
    ) -> BoundInterval:
        high_lo, high_hi, high = high_child
        low_lo, low_hi, low = low_child
        lo = max(high_lo + coeffs[i], low_lo)
        hi = min(high_hi + coeffs[i], low_hi)
        if high == low:
            node_id = high
        else:
            key = (i, high, low)
            if key not in unique:
                unique[key] = len(bdd.nodes) + 2
                bdd.nodes[unique[key]] = BddNode(i, high, low)
            node_id = unique[key]
        intervals[i].append((lo, hi, node_id))
        return lo, hi, node_id

    root = lookup(0, r.bound)
    # frames are [i, k, high child, low child]
    stack = [] if root is not None else [[0, r.bound, None, None]]
    while stack:
        frame = stack[-1]
        i, k, high_child, low_child = frame
        if high_child is None:
            child = lookup(i + 1, k - coeffs[i])
            if child is None:
                stack.append([i + 1, k - coeffs[i], None, None])
            else:
                frame[2] = child
            continue
        if low_child is None:
            child = lookup(i + 1, k)
            if child is None:
                stack.append([i + 1, k, None, None])
            else:
                frame[3] = child
            continue
        done = make_node(i, high_child, low_child)
        stack.pop()
        if not stack:
            root = done
        elif stack[-1][2] is None:
            stack[-1][2] = done
        else:
            stack[-1][3] = done

    bdd.root = root[2]
    return bdd


def encode_direct(r: RawConstraint, alloc: Optional[VarAllocator] = None) -> CnfFormula:
    """
    One clause per path to False, negating the literals set true along it.
    Low branches are left out of the clause: a canonical constraint is monotone
    decreasing in each literal, so a false literal never helps violate it.
    The clauses are exactly the minimal covers of the constraint.
    """
    formula = CnfFormula()
    lits = r.lits
    for path in build_robdd(r).false_paths():
        formula.add_clause(-lits[i].dimacs for i in path)
    return formula


def encode_bdd(r: RawConstraint, alloc: VarAllocator) -> CnfFormula:
    """
    Auxiliary d_n per node n meaning "the sub-constraint at n holds":
        (~d_n | ~l | d_high)   and   (~d_n | d_low)
    with True children dropping the clause and False children dropping the
    disjunct, plus the unit (d_root).
    """
    bdd = build_robdd(r)
    formula = CnfFormula()
    if bdd.root == TRUE_NODE:
        return formula
    if bdd.root == FALSE_NODE:
        formula.add_clause([])
        return formula

    node_var = {node_id: formula.new_aux(alloc) for node_id in bdd.nodes}
    formula.add_clause([node_var[bdd.root]])
    lits = r.lits
    for node_id, node in bdd.nodes.items():
        d = node_var[node_id]
        lit = lits[node.index].dimacs
        if node.high == FALSE_NODE:
            formula.add_clause([-d, -lit])
        elif node.high != TRUE_NODE:
            formula.add_clause([-d, -lit, node_var[node.high]])
        if node.low == FALSE_NODE:
            formula.add_clause([-d, lit])
        elif node.low != TRUE_NODE:
            formula.add_clause([-d, node_var[node.low]])
    return formula


def _full_adder(
    a: int, b: int, c: int, alloc: VarAllocator, formula: CnfFormula
) -> tuple[int, int]:
    total = formula.new_aux(alloc)
    carry = formula.new_aux(alloc)
    for sa, sb, sc in product((1, -1), repeat=3):
        odd = [sa, sb, sc].count(1) % 2 == 1
        formula.add_clause([-sa * a, -sb * b, -sc * c, total if odd else -total])
    for x, y in ((a, b), (a, c), (b, c)):
        formula.add_clause([-x, -y, carry])
        formula.add_clause([x, y, -carry])
    return total, carry


def _half_adder(
    a: int, b: int, alloc: VarAllocator, formula: CnfFormula
) -> tuple[int, int]:
    total = formula.new_aux(alloc)
    carry = formula.new_aux(alloc)
    for sa, sb in product((1, -1), repeat=2):
        odd = (sa == 1) != (sb == 1)
        formula.add_clause([-sa * a, -sb * b, total if odd else -total])
    formula.add_clause([-a, -b, carry])
    formula.add_clause([a, -carry])
    formula.add_clause([b, -carry])
    return total, carry


def _compare_leq(bits: list[Optional[int]], bound: int, formula: CnfFormula) -> None:
    """
    Binary number `bits` (least significant first, None = constant 0) <= bound.
    For every position j where the bound has a 0, o_j may only be set when some
    higher position with a 1 in the bound is 0 in the number.
    """
    width = max(len(bits), bound.bit_length())
    for j, bit in enumerate(bits):
        if bit is None or (bound >> j) & 1:
            continue
        clause = [-bit]
        for k in range(j + 1, width):
            if not (bound >> k) & 1:
                continue
            if k >= len(bits) or bits[k] is None:
                break
            clause.append(-bits[k])
        else:
            formula.add_clause(clause)


def encode_adder(r: RawConstraint, alloc: VarAllocator) -> CnfFormula:
    """
    Column j collects the literals whose coefficient has bit j set.
    Columns are reduced first-in first-out with full adders (three inputs) and
    a final half adder (two inputs); carries move to column j+1.
    The resulting sum bits are compared with the bound.
    """
    formula = CnfFormula()
    columns: list[deque[int]] = []
    for coeff, lit in r.terms:
        for j in range(coeff.bit_length()):
            if (coeff >> j) & 1:
                while len(columns) <= j:
                    columns.append(deque())
                columns[j].append(lit.dimacs)

    def push_carry(j: int, carry: int) -> None:
        if len(columns) <= j + 1:
            columns.append(deque())
        columns[j + 1].append(carry)

    bits: list[Optional[int]] = []
    j = 0
    while j < len(columns):
        column = columns[j]
        while len(column) >= 3:
            a, b, c = column.popleft(), column.popleft(), column.popleft()
            total, carry = _full_adder(a, b, c, alloc, formula)
            column.append(total)
            push_carry(j, carry)
        if len(column) == 2:
            a, b = column.popleft(), column.popleft()
            total, carry = _half_adder(a, b, alloc, formula)
            column.append(total)
            push_carry(j, carry)
        bits.append(column[0] if column else None)
        j += 1

    _compare_leq(bits, r.bound, formula)
    return formula


def totalizer(
    inputs: Sequence[int],
    alloc: VarAllocator,
    cap: Optional[int] = None,
    formula: Optional[CnfFormula] = None,
) -> tuple[list[int], CnfFormula]:
    """
    Unary counter over `inputs` built as a balanced merge tree.
    Output o_j is forced by unit propagation as soon as j inputs are true.
    With a cap, counts beyond `cap` all land on the last output.
    Clauses are added to `formula` (a new one when omitted), which is returned.
    """
    formula = formula if formula is not None else CnfFormula()
    if not inputs:
        return [], formula

    def count(part: Sequence[int]) -> list[int]:
        if len(part) == 1:
            return [part[0]]
        middle = len(part) // 2
        left = count(part[:middle])
        right = count(part[middle:])
        size = len(left) + len(right)
        if cap is not None:
            size = min(size, cap)
        outputs = [formula.new_aux(alloc) for _ in range(size)]
        for i in range(len(left) + 1):
            for j in range(len(right) + 1):
                if i + j == 0 or i + j > size:
                    continue
                clause = []
                if i:
                    clause.append(-left[i - 1])
                if j:
                    clause.append(-right[j - 1])
                clause.append(outputs[i + j - 1])
                formula.add_clause(clause)
        return outputs

    return count(list(inputs)), formula


class _TrueLiteral:
    """Auxiliary variable fixed true, allocated on first use"""

    def __init__(self, formula: CnfFormula, alloc: VarAllocator):
        self._formula = formula
        self._alloc = alloc
        self._var: Optional[int] = None

    def get(self) -> int:
        if self._var is None:
            self._var = self._formula.new_aux(self._alloc)
            self._formula.add_clause([self._var])
        return self._var


def _watchdog(
    terms: Sequence[tuple[int, int]],
    bound: int,
    alloc: VarAllocator,
    formula: CnfFormula,
    true_lit: _TrueLiteral,
) -> Optional[int]:
    """
    Literal forced true by unit propagation once the true literals among
    `terms` (coefficient, signed literal) weigh more than `bound`.
    None when the terms can never exceed the bound.

    A tare is added so that the threshold bound+1 becomes k * 2^p, with p the
    highest bit of the largest coefficient. Column j is counted by a totalizer
    fed with the literals having bit j set, the tare bit and every second
    output of column j-1 (the carries). Output k of column p is the watchdog.
    """
    if sum(coeff for coeff, _ in terms) <= bound:
        return None
    threshold = bound + 1
    top = max(coeff for coeff, _ in terms).bit_length() - 1
    tare = -threshold % (1 << top)
    k = (threshold + tare) >> top

    carries: list[int] = []
    outputs: list[int] = []
    for j in range(top + 1):
        inputs = [lit for coeff, lit in terms if (coeff >> j) & 1]
        if (tare >> j) & 1:
            inputs.append(true_lit.get())
        inputs.extend(carries)
        outputs, _ = totalizer(inputs, alloc, cap=k << (top - j), formula=formula)
        carries = outputs[1::2]
    return outputs[k - 1]


def encode_bargraph(r: RawConstraint, alloc: VarAllocator) -> CnfFormula:
    """A single watchdog over all terms, asserted false"""
    formula = CnfFormula()
    terms = [(coeff, lit.dimacs) for coeff, lit in r.terms]
    watchdog = _watchdog(terms, r.bound, alloc, formula, _TrueLiteral(formula, alloc))
    if watchdog is not None:
        formula.add_clause([-watchdog])
    return formula


def encode_watchdog(r: RawConstraint, alloc: VarAllocator) -> CnfFormula:
    """
    For each term a_i l_i, a watchdog w_i over the other terms with bound
    b - a_i and the clause (~w_i | ~l_i): l_i is forced false exactly when
    the other true literals leave no room for a_i.
    """
    formula = CnfFormula()
    true_lit = _TrueLiteral(formula, alloc)
    terms = [(coeff, lit.dimacs) for coeff, lit in r.terms]
    for i, (coeff, lit) in enumerate(terms):
        slack = r.bound - coeff
        if slack < 0:
            formula.add_clause([-lit])
            continue
        watchdog = _watchdog(terms[:i] + terms[i + 1 :], slack, alloc, formula, true_lit)
        if watchdog is not None:
            formula.add_clause([-watchdog, -lit])
    return formula


def encode_pb_basic(r: RawConstraint) -> PbOutputConstraint:
    """
    OPB-normal form: a.~x becomes a - a.x, then the inequality is negated
    to a >= relation over plain variables.
    """
    bound = r.bound
    terms = []
    for coeff, lit in r.terms:
        if lit.sign:
            terms.append((-coeff, lit.var_id))
        else:
            terms.append((coeff, lit.var_id))
            bound -= coeff
    return PbOutputConstraint(tuple(terms), -bound)


class Encoder(ABC):
    """Translates canonical constraints; subclasses choose the output kind"""

    name: str = ""

    def __repr__(self) -> str:
        return f"{type(self).__name__}()"


class Encoder2Cnf(Encoder):
    """Encoder producing clauses. Subclasses must implement encode(r, alloc)"""

    @abstractmethod
    def encode(self, r: RawConstraint, alloc: VarAllocator) -> CnfFormula:
        raise NotImplementedError


class Encoder2Pb(Encoder):
    """Encoder producing pseudo-Boolean constraints. Subclasses must implement encode(r)"""

    @abstractmethod
    def encode(self, r: RawConstraint) -> list[PbOutputConstraint]:
        raise NotImplementedError


class DirectEncoder(Encoder2Cnf):
    name = "direct"

    def encode(self, r: RawConstraint, alloc: VarAllocator) -> CnfFormula:
        return encode_direct(r, alloc)


class BddEncoder(Encoder2Cnf):
    name = "bdd"

    def encode(self, r: RawConstraint, alloc: VarAllocator) -> CnfFormula:
        return encode_bdd(r, alloc)


class AdderEncoder(Encoder2Cnf):
    name = "adder"

    def encode(self, r: RawConstraint, alloc: VarAllocator) -> CnfFormula:
        return encode_adder(r, alloc)


class WatchdogEncoder(Encoder2Cnf):
    name = "watchdog"

    def encode(self, r: RawConstraint, alloc: VarAllocator) -> CnfFormula:
        return encode_watchdog(r, alloc)


class BargraphEncoder(Encoder2Cnf):
    name = "bargraph"

    def encode(self, r: RawConstraint, alloc: VarAllocator) -> CnfFormula:
        return encode_bargraph(r, alloc)


class PbBasicEncoder(Encoder2Pb):
    name = "pb"

    def encode(self, r: RawConstraint) -> list[PbOutputConstraint]:
        return [encode_pb_basic(r)]


if hasattr(enum, "StrEnum"):
    _StrEnum = enum.StrEnum
else:  # Python < 3.11 backport of enum.StrEnum

    class _StrEnum(str, enum.Enum):
        def __str__(self):
            return str.__str__(self)

        def __format__(self, format_spec):
            return str.__format__(str(self), format_spec)

        @staticmethod
        def _generate_next_value_(name, start, count, last_values):
            return name.lower()


class CaseInsensitiveStrEnum(_StrEnum):
    """Enum that lets us refer to elements in a case-insensitive way"""

    @classmethod
    def _missing_(cls, value):
        value = str(value).lower()
        for member in cls:
            if member.value == value:
                return member


class EncoderName(CaseInsensitiveStrEnum):
    """Names of the built-in encoders"""

    DIRECT = enum.auto()
    BDD = enum.auto()
    ADDER = enum.auto()
    WATCHDOG = enum.auto()
    BARGRAPH = enum.auto()
    PB = enum.auto()

    @property
    def encoder_class(self) -> type[Encoder]:
        return ENCODERS[self]

    @property
    def is_cnf(self) -> bool:
        return issubclass(self.encoder_class, Encoder2Cnf)

    def create(self) -> Encoder:
        return self.encoder_class()


ENCODERS: dict[EncoderName, type[Encoder]] = {
    EncoderName.DIRECT: DirectEncoder,
    EncoderName.BDD: BddEncoder,
    EncoderName.ADDER: AdderEncoder,
    EncoderName.WATCHDOG: WatchdogEncoder,
    EncoderName.BARGRAPH: BargraphEncoder,
    EncoderName.PB: PbBasicEncoder,
}


def resolve_encoder(e: Union[Encoder, EncoderName, str]) -> Encoder:
    """Encoder instance for an instance, an EncoderName or a (case-insensitive) name"""
    if isinstance(e, Encoder):
        return e
    try:
        return EncoderName(e).create()
    except ValueError:
        names = ", ".join(member.value for member in EncoderName)
        msg = f"Unknown encoder {e!r}, expected one of: {names}"
        logger.error(msg)
        raise ValueError(msg) from None
