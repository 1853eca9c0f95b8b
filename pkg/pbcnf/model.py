"""
Input block: propositional variables, memoized literals and tagged
pseudo-Boolean inequality constraints collected in an InputModel.
"""

from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Sequence

from pbcnf.logger import get_logger

logger = get_logger(__name__)

MAX_TAGS = 4


class ModelError(ValueError):
    """Raised when an input constraint or model operation is malformed"""


def _fail(msg: str) -> None:
    logger.error(msg)
    raise ModelError(msg)


class Variable:
    """
    A propositional variable registered in an InputModel.
    Ids are dense and follow creation order, starting at 1.
    The positive and negative literals are created on first request and
    the same Literal object is returned afterwards.
    """

    def __init__(self, var_id: int, model: Optional["InputModel"] = None):
        self._id = var_id
        self._model = model
        self._pos_lit: Optional[Literal] = None
        self._neg_lit: Optional[Literal] = None

    @property
    def id(self) -> int:
        return self._id

    @property
    def model(self) -> Optional["InputModel"]:
        return self._model

    def pos_lit(self) -> "Literal":
        if self._pos_lit is None:
            self._pos_lit = Literal(self, True)
        return self._pos_lit

    def neg_lit(self) -> "Literal":
        if self._neg_lit is None:
            self._neg_lit = Literal(self, False)
        return self._neg_lit

    def get_lit(self, sign: bool) -> "Literal":
        return self.pos_lit() if sign else self.neg_lit()

    def __repr__(self) -> str:
        return f"Variable({self._id})"


@dataclass(frozen=True)
class Literal:
    """
    A variable or its negation.
    Prefer Variable.get_lit / pos_lit / neg_lit: literals built directly with
    this constructor compare equal to the memoized ones but are not the same object.
    """

    variable: Variable
    sign: bool = True

    @property
    def var_id(self) -> int:
        return self.variable.id

    @property
    def dimacs(self) -> int:
        """Signed integer form used in clauses: +id or -id"""
        return self.variable.id if self.sign else -self.variable.id

    def __invert__(self) -> "Literal":
        return self.variable.get_lit(not self.sign)

    def is_true(self, assignment: dict[int, bool]) -> bool:
        """Value of the literal under a complete assignment keyed by variable id"""
        return assignment[self.var_id] == self.sign

    def __str__(self) -> str:
        return f"x{self.var_id}" if self.sign else f"~x{self.var_id}"


@dataclass(frozen=True)
class PbLeqConstraint:
    """
    coeffs[0].lits[0] + ... + coeffs[n-1].lits[n-1] <= bound, labelled with tags.
    Coefficients are positive; the bound may be any integer (a negative bound
    is left for normalization to report as unsatisfiable).
    """

    coeffs: tuple[int, ...]
    lits: tuple[Literal, ...]
    bound: int
    tags: frozenset[int] = field(default_factory=lambda: frozenset({1}))

    def __post_init__(self):
        if len(self.coeffs) != len(self.lits):
            _fail(
                f"{len(self.coeffs)} coefficients given for {len(self.lits)} literals"
            )
        if not self.lits:
            _fail("A constraint needs at least one literal")
        for coeff in self.coeffs:
            if isinstance(coeff, bool) or not isinstance(coeff, int):
                _fail(f"Coefficient {coeff!r} is not an integer")
            if coeff <= 0:
                _fail(f"Nonpositive coefficient {coeff}")
        if isinstance(self.bound, bool) or not isinstance(self.bound, int):
            _fail(f"Bound {self.bound!r} is not an integer")
        if not self.tags:
            _fail("A constraint needs at least one tag")

    @property
    def terms(self) -> list[tuple[int, Literal]]:
        return list(zip(self.coeffs, self.lits))

    def with_tags(self, *tags: int) -> "PbLeqConstraint":
        """Copy of the constraint carrying `tags` instead of its own"""
        ctx = TagContext()
        ctx.set_tags(*tags)
        return replace(self, tags=ctx.active_tags)

    def __str__(self) -> str:
        lhs = " + ".join(f"{c}.{lit}" for c, lit in self.terms)
        return f"{lhs} <= {self.bound}"


class TagContext:
    """Tags applied to every constraint created until the next set_tags call"""

    def __init__(self, *tags: int):
        self._active_tags: frozenset[int] = frozenset({1})
        if tags:
            self.set_tags(*tags)

    @property
    def active_tags(self) -> frozenset[int]:
        return self._active_tags

    def set_tags(self, *tags: int) -> None:
        if not 1 <= len(tags) <= MAX_TAGS:
            _fail(f"Between 1 and {MAX_TAGS} tags expected, got {len(tags)}")
        for tag in tags:
            if isinstance(tag, bool) or not isinstance(tag, int):
                _fail(f"Tag {tag!r} is not an integer")
        self._active_tags = frozenset(tags)


DEFAULT_TAG_CONTEXT = TagContext()


def set_tags(*tags: int, ctx: Optional[TagContext] = None) -> None:
    """Replace the active tags of ctx (the module default when omitted)"""
    (ctx or DEFAULT_TAG_CONTEXT).set_tags(*tags)


def make_leq(
    coeffs: Sequence[int],
    lits: Sequence[Literal],
    bound: int,
    ctx: Optional[TagContext] = None,
) -> PbLeqConstraint:
    """Create sum(coeffs[i] * lits[i]) <= bound carrying the active tags of ctx"""
    ctx = ctx or DEFAULT_TAG_CONTEXT
    return PbLeqConstraint(
        coeffs=tuple(coeffs), lits=tuple(lits), bound=bound, tags=ctx.active_tags
    )


def make_eq(
    coeffs: Sequence[int],
    lits: Sequence[Literal],
    bound: int,
    ctx: Optional[TagContext] = None,
) -> tuple[PbLeqConstraint, PbLeqConstraint]:
    """
    Equality sum(c_i l_i) = b as the pair
        sum(c_i l_i) <= b   and   sum(c_i ~l_i) <= sum(c_i) - b
    An equality whose bound lies outside [0, sum(c_i)] has no solution and is rejected.
    """
    upper = make_leq(coeffs, lits, bound, ctx)
    total = sum(upper.coeffs)
    if not 0 <= bound <= total:
        _fail(f"Equality bound {bound} outside [0, {total}] can never be met")
    lower = make_leq(coeffs, [~lit for lit in upper.lits], total - bound, ctx)
    return upper, lower


class InputModel:
    """
    Container for the input constraints and the registry of their variables.
    Not safe to mutate from several threads.
    """

    def __init__(self):
        self._variables: list[Variable] = []
        self._constraints: list[PbLeqConstraint] = []

    @property
    def variable_count(self) -> int:
        return len(self._variables)

    @property
    def variables(self) -> tuple[Variable, ...]:
        return tuple(self._variables)

    @property
    def constraints(self) -> tuple[PbLeqConstraint, ...]:
        return tuple(self._constraints)

    def __len__(self) -> int:
        return len(self._constraints)

    def new_variable(self) -> Variable:
        var = Variable(len(self._variables) + 1, self)
        self._variables.append(var)
        return var

    def new_variables(self, count: int) -> list[Variable]:
        return [self.new_variable() for _ in range(count)]

    def variable(self, var_id: int) -> Variable:
        """Registered variable with the given id"""
        if not 1 <= var_id <= len(self._variables):
            _fail(f"No variable x{var_id} in a model of {self.variable_count}")
        return self._variables[var_id - 1]

    def add_constraint(self, q: PbLeqConstraint) -> None:
        for lit in q.lits:
            if lit.variable.model is not self:
                _fail(f"Literal {lit} of constraint '{q}' belongs to another model")
        self._constraints.append(q)

    def add_constraints(self, constraints: Iterable[PbLeqConstraint]) -> None:
        for q in constraints:
            self.add_constraint(q)

    def to_text(self) -> str:
        count = len(self._constraints)
        lines = [f"{count} constraint{'' if count == 1 else 's'}"]
        for q in self._constraints:
            tags = ",".join(str(t) for t in sorted(q.tags))
            lines.append(f"{q}  # tags {tags}")
        return "\n".join(lines) + "\n"

    def __str__(self) -> str:
        return self.to_text()


def new_model() -> InputModel:
    return InputModel()


def new_variable(m: InputModel) -> Variable:
    return m.new_variable()


def get_literal(v: Variable, sign: bool) -> Literal:
    return v.get_lit(sign)


def add_constraint(m: InputModel, q: PbLeqConstraint) -> None:
    m.add_constraint(q)


def model_to_text(m: InputModel) -> str:
    return m.to_text()
