"""
Canonical internal form of input constraints.

A RawConstraint has positive coefficients sorted by decreasing value, at most
one term per variable, every coefficient no larger than the bound, and a
coefficient sum exceeding the bound. Literals whose coefficient alone exceeds
the bound are pulled out as forced (false) literals.
"""

from dataclasses import dataclass
import enum
from typing import Optional, Protocol, Sequence

from pbcnf.logger import get_logger
from pbcnf.model import Literal, Variable

logger = get_logger(__name__)


class NormalizeStatus(enum.Enum):
    UNSAT = "unsat"
    TRIVIALLY_TRUE = "trivially_true"
    RESIDUAL = "residual"


class LeqLike(Protocol):
    """Anything exposing (coefficient, literal) terms and a bound"""

    @property
    def terms(self) -> Sequence[tuple[int, Literal]]: ...

    bound: int


def term_order(term: tuple[int, Literal]) -> tuple[int, int, bool]:
    """Decreasing coefficient, then ascending variable id, positive literal first"""
    coeff, lit = term
    return -coeff, lit.var_id, not lit.sign


@dataclass(frozen=True)
class RawConstraint:
    """sum(a_i * l_i) <= bound over canonical terms"""

    terms: tuple[tuple[int, Literal], ...]
    bound: int

    @property
    def coeffs(self) -> list[int]:
        return [c for c, _ in self.terms]

    @property
    def lits(self) -> list[Literal]:
        return [lit for _, lit in self.terms]

    @property
    def total(self) -> int:
        return sum(c for c, _ in self.terms)

    @property
    def var_ids(self) -> list[int]:
        return [lit.var_id for _, lit in self.terms]

    def __len__(self) -> int:
        return len(self.terms)

    def lhs(self, assignment: dict[int, bool]) -> int:
        """Weighted sum of the literals true under a complete assignment"""
        return sum(c for c, lit in self.terms if lit.is_true(assignment))

    def is_satisfied(self, assignment: dict[int, bool]) -> bool:
        return self.lhs(assignment) <= self.bound

    def __str__(self) -> str:
        lhs = " + ".join(f"{c}.{lit}" for c, lit in self.terms)
        return f"{lhs} <= {self.bound}"


@dataclass(frozen=True)
class NormalizeResult:
    status: NormalizeStatus
    forced_literals: tuple[Literal, ...] = ()
    residual: Optional[RawConstraint] = None


def to_raw(q: LeqLike) -> NormalizeResult:
    """
    Rewrite a <= constraint into canonical form:
        - merge repeated literals of the same variable
        - cancel opposite literals, moving the smaller weight into the bound
        - negative bound -> UNSAT
        - coefficient above the bound -> literal forced false, term dropped
        - coefficient sum within the bound -> TRIVIALLY_TRUE
    """
    bound = q.bound
    weights: dict[Variable, list[int]] = {}
    for coeff, lit in q.terms:
        pos_neg = weights.setdefault(lit.variable, [0, 0])
        pos_neg[0 if lit.sign else 1] += coeff

    terms = []
    for var, (pos, neg) in weights.items():
        if pos >= neg:
            coeff, lit = pos - neg, var.pos_lit()
            bound -= neg
        else:
            coeff, lit = neg - pos, var.neg_lit()
            bound -= pos
        if coeff:
            terms.append((coeff, lit))
    terms.sort(key=term_order)

    if bound < 0:
        logger.debug(f"Constraint '{q}' has bound {bound} after rewriting: unsat")
        return NormalizeResult(NormalizeStatus.UNSAT)

    forced = tuple(~lit for coeff, lit in terms if coeff > bound)
    kept = tuple((coeff, lit) for coeff, lit in terms if coeff <= bound)
    if sum(coeff for coeff, _ in kept) <= bound:
        return NormalizeResult(NormalizeStatus.TRIVIALLY_TRUE, forced)
    return NormalizeResult(NormalizeStatus.RESIDUAL, forced, RawConstraint(kept, bound))
