"""
Oracles used to check the encoders: unit propagation, arc consistency on a
single pseudo-Boolean constraint, brute-force model enumeration, a small
DPLL solver, and the propagation-strength checks built from them.

PAC: on every partial assignment that arc consistency accepts, unit
propagation on the encoding forces exactly the input literals that arc
consistency forces.
PIC: on every partial assignment that arc consistency rejects, unit
propagation on the encoding reaches a conflict.
"""

from collections import defaultdict, deque
from dataclasses import dataclass, field
import enum
from itertools import product
from typing import Iterable, Iterator, Optional, Sequence, Union

from pbcnf.encoders import Encoder, Encoder2Cnf, EncoderName, resolve_encoder
from pbcnf.formula import CnfFormula, VarAllocator
from pbcnf.logger import get_logger
from pbcnf.model import Variable
from pbcnf.normalize import LeqLike, RawConstraint

logger = get_logger(__name__)

MAX_ENUMERATION_VARIABLES = 20
MAX_CHECK_VARIABLES = 10

ClauseSource = Union[CnfFormula, Iterable[Sequence[int]]]
PartialAssignment = dict[int, bool]


class OracleGuardError(ValueError):
    """Raised when an exhaustive oracle is asked to enumerate too many variables"""


class PropagationStatus(enum.Enum):
    FIXPOINT = "fixpoint"
    CONFLICT = "conflict"


@dataclass(frozen=True)
class UpResult:
    """
    Outcome of unit propagation. `forced` holds the literals derived beyond
    the assumptions, `values` every variable assigned at the end.
    """

    status: PropagationStatus
    forced: frozenset[int] = frozenset()
    values: dict[int, bool] = field(default_factory=dict, compare=False)

    @property
    def conflict(self) -> bool:
        return self.status is PropagationStatus.CONFLICT


@dataclass(frozen=True)
class AcResult:
    """Outcome of arc consistency: CONFLICT when no extension satisfies the constraint"""

    status: PropagationStatus
    forced: frozenset[int] = frozenset()

    @property
    def conflict(self) -> bool:
        return self.status is PropagationStatus.CONFLICT


@dataclass(frozen=True)
class PacCounterexample:
    sigma: PartialAssignment
    up_forced: frozenset[int]
    ac_forced: frozenset[int]
    up_conflict: bool = False


@dataclass(frozen=True)
class PicCounterexample:
    sigma: PartialAssignment


def _clauses(f: ClauseSource) -> list[tuple[int, ...]]:
    clauses = f.clauses if isinstance(f, CnfFormula) else f
    return [tuple(clause) for clause in clauses]


def _var_id(v: Union[Variable, int]) -> int:
    return v.id if isinstance(v, Variable) else v


def _guard(count: int, limit: int, what: str) -> None:
    if count > limit:
        msg = f"Refusing to enumerate {count} {what} (limit {limit})"
        logger.error(msg)
        raise OracleGuardError(msg)


class ClauseDatabase:
    """Clauses indexed by literal, so propagation can be repeated under many assumptions"""

    def __init__(self, f: ClauseSource):
        self._clauses = _clauses(f)
        self._occurrences: dict[int, list[int]] = defaultdict(list)
        self._units: list[int] = []
        self._has_empty = False
        for idx, clause in enumerate(self._clauses):
            if not clause:
                self._has_empty = True
            elif len(clause) == 1:
                self._units.append(clause[0])
            for lit in clause:
                self._occurrences[lit].append(idx)
        self.variables = sorted({abs(lit) for clause in self._clauses for lit in clause})

    def __len__(self) -> int:
        return len(self._clauses)

    def propagate(self, assumptions: Iterable[int]) -> UpResult:
        values: dict[int, bool] = {}
        queue: deque[int] = deque()
        for lit in assumptions:
            var, value = abs(lit), lit > 0
            if values.get(var, value) != value:
                return UpResult(PropagationStatus.CONFLICT)
            if var not in values:
                values[var] = value
                queue.append(lit)
        if self._has_empty:
            return UpResult(PropagationStatus.CONFLICT, values=values)

        forced: list[int] = []
        for lit in self._units:
            var = abs(lit)
            if var in values:
                if values[var] != (lit > 0):
                    return UpResult(PropagationStatus.CONFLICT, frozenset(forced), values)
                continue
            values[var] = lit > 0
            forced.append(lit)
            queue.append(lit)

        ok = self._run(values, queue, forced)
        status = PropagationStatus.FIXPOINT if ok else PropagationStatus.CONFLICT
        return UpResult(status, frozenset(forced), values)

    def _run(self, values: dict[int, bool], queue: deque[int], forced: list[int]) -> bool:
        """Propagate the queued literals into `values`; False on conflict"""
        while queue:
            lit = queue.popleft()
            for idx in self._occurrences[-lit]:
                unassigned = 0
                last = 0
                for other in self._clauses[idx]:
                    value = values.get(abs(other))
                    if value is None:
                        unassigned += 1
                        last = other
                    elif value == (other > 0):
                        break
                else:
                    if unassigned == 0:
                        return False
                    if unassigned == 1:
                        values[abs(last)] = last > 0
                        forced.append(last)
                        queue.append(last)
        return True

    def _search(self, values: dict[int, bool]) -> Optional[dict[int, bool]]:
        """Depth first on the lowest unassigned variable, false branch first"""
        pending: list[tuple[dict[int, bool], Optional[int]]] = [(values, None)]
        while pending:
            base, lit = pending.pop()
            if lit is None:
                trial = base
            else:
                trial = dict(base)
                trial[abs(lit)] = lit > 0
                if not self._run(trial, deque([lit]), []):
                    continue
            var = next((v for v in self.variables if v not in trial), None)
            if var is None:
                return trial
            pending.append((trial, var))
            pending.append((trial, -var))
        return None

    def solve(self, assumptions: Sequence[int] = ()) -> Optional[dict[int, bool]]:
        """DPLL: propagate, branch on the lowest unassigned variable, false first"""
        result = self.propagate(assumptions)
        if result.conflict:
            return None
        return self._search(dict(result.values))


def unit_propagate(f: ClauseSource, assumptions: Iterable[int] = ()) -> UpResult:
    return ClauseDatabase(f).propagate(assumptions)


def solve_cnf(f: ClauseSource, assumptions: Sequence[int] = ()) -> Optional[dict[int, bool]]:
    """A model over the formula's variables (and the assumptions), or None when unsatisfiable"""
    return ClauseDatabase(f).solve(assumptions)


def _projection(model: dict[int, bool], variables: Sequence[int]) -> tuple[int, ...]:
    return tuple(var if model.get(var, False) else -var for var in variables)


def enumerate_cnf_models(
    f: ClauseSource, project_on: Sequence[Union[Variable, int]]
) -> set[tuple[int, ...]]:
    """All models projected onto `project_on`, found by adding blocking clauses"""
    variables = [_var_id(v) for v in project_on]
    _guard(len(variables), MAX_ENUMERATION_VARIABLES, "projection variables")
    clauses = _clauses(f)
    models: set[tuple[int, ...]] = set()
    while True:
        model = solve_cnf(clauses)
        if model is None:
            return models
        projected = _projection(model, variables)
        models.add(projected)
        if not variables:
            return models
        clauses.append(tuple(-lit for lit in projected))


def projected_models(
    f: ClauseSource, variables: Sequence[Union[Variable, int]]
) -> set[tuple[int, ...]]:
    """Complete assignments of `variables` that extend to a model of f"""
    var_ids = [_var_id(v) for v in variables]
    _guard(len(var_ids), MAX_ENUMERATION_VARIABLES, "projection variables")
    db = ClauseDatabase(f)
    models = set()
    for signs in product((1, -1), repeat=len(var_ids)):
        assumptions = tuple(s * v for s, v in zip(signs, var_ids))
        if db.solve(assumptions) is not None:
            models.add(assumptions)
    return models


def _satisfies(q: LeqLike, assignment: dict[int, bool]) -> bool:
    lhs = sum(coeff for coeff, lit in q.terms if assignment[lit.var_id] == lit.sign)
    return lhs <= q.bound


def enumerate_pb_models(
    rs: Sequence[LeqLike], variables: Sequence[Union[Variable, int]]
) -> set[tuple[int, ...]]:
    """Complete assignments of `variables` satisfying every constraint of rs"""
    var_ids = [_var_id(v) for v in variables]
    _guard(len(var_ids), MAX_ENUMERATION_VARIABLES, "variables")
    models = set()
    for signs in product((1, -1), repeat=len(var_ids)):
        assignment = {v: s > 0 for s, v in zip(signs, var_ids)}
        if all(_satisfies(q, assignment) for q in rs):
            models.add(tuple(s * v for s, v in zip(signs, var_ids)))
    return models


def ac_forced_literals(r: RawConstraint, sigma: PartialAssignment) -> AcResult:
    """
    Arc consistency on a canonical constraint. The all-false extension of
    sigma minimizes the sum, so sigma is consistent iff its true literals fit
    in the bound, and a free literal is forced false iff adding its
    coefficient would overflow.
    """
    used = sum(
        coeff
        for coeff, lit in r.terms
        if lit.var_id in sigma and sigma[lit.var_id] == lit.sign
    )
    if used > r.bound:
        return AcResult(PropagationStatus.CONFLICT)
    forced = frozenset(
        -lit.dimacs
        for coeff, lit in r.terms
        if lit.var_id not in sigma and used + coeff > r.bound
    )
    return AcResult(PropagationStatus.FIXPOINT, forced)


def ac_forced_by_enumeration(r: RawConstraint, sigma: PartialAssignment) -> AcResult:
    """Arc consistency from the list of all satisfying extensions of sigma"""
    free = sorted({var for var in r.var_ids if var not in sigma})
    extensions = []
    for values in product((True, False), repeat=len(free)):
        assignment = {**sigma, **dict(zip(free, values))}
        if r.is_satisfied(assignment):
            extensions.append(assignment)
    if not extensions:
        return AcResult(PropagationStatus.CONFLICT)
    forced = set()
    for var in free:
        seen = {ext[var] for ext in extensions}
        if len(seen) == 1:
            forced.add(var if seen.pop() else -var)
    return AcResult(PropagationStatus.FIXPOINT, frozenset(forced))


def partial_assignments(variables: Sequence[int]) -> Iterator[PartialAssignment]:
    """All 3^n partial assignments, ternary counting (unset, true, false) in the given order"""
    for digits in product((None, True, False), repeat=len(variables)):
        yield {var: value for var, value in zip(variables, digits) if value is not None}


def _encode_for_check(
    e: Union[Encoder, EncoderName, str], r: RawConstraint
) -> tuple[list[int], ClauseDatabase]:
    encoder = resolve_encoder(e)
    if not isinstance(encoder, Encoder2Cnf):
        msg = f"Encoder '{encoder.name}' does not produce clauses"
        logger.error(msg)
        raise ValueError(msg)
    variables = sorted(set(r.var_ids))
    _guard(len(variables), MAX_CHECK_VARIABLES, "variables for 3^n partial assignments")
    alloc = VarAllocator(max(variables, default=0) + 1)
    formula = encoder.encode(r, alloc)
    return variables, ClauseDatabase(formula)


def _sigma_literals(sigma: PartialAssignment) -> list[int]:
    return [var if value else -var for var, value in sigma.items()]


def check_pac(
    e: Union[Encoder, EncoderName, str], r: RawConstraint
) -> Optional[PacCounterexample]:
    """None when the encoding of r propagates like arc consistency, else the first mismatch"""
    variables, db = _encode_for_check(e, r)
    inputs = set(variables)
    for sigma in partial_assignments(variables):
        ac = ac_forced_literals(r, sigma)
        if ac.conflict:
            continue
        up = db.propagate(_sigma_literals(sigma))
        up_forced = frozenset(lit for lit in up.forced if abs(lit) in inputs)
        if up.conflict or up_forced != ac.forced:
            return PacCounterexample(sigma, up_forced, ac.forced, up.conflict)
    return None


def check_pic(
    e: Union[Encoder, EncoderName, str], r: RawConstraint
) -> Optional[PicCounterexample]:
    """None when unit propagation detects every inconsistency arc consistency detects"""
    variables, db = _encode_for_check(e, r)
    for sigma in partial_assignments(variables):
        if not ac_forced_literals(r, sigma).conflict:
            continue
        if not db.propagate(_sigma_literals(sigma)).conflict:
            return PicCounterexample(sigma)
    return None


def check_complete_assignments(
    e: Union[Encoder, EncoderName, str], r: RawConstraint
) -> Optional[PartialAssignment]:
    """None when every complete assignment violating r leads unit propagation to a conflict"""
    variables, db = _encode_for_check(e, r)
    for values in product((True, False), repeat=len(variables)):
        sigma = dict(zip(variables, values))
        if r.is_satisfied(sigma):
            continue
        if not db.propagate(_sigma_literals(sigma)).conflict:
            return sigma
    return None


def check_projection(
    e: Union[Encoder, EncoderName, str], r: RawConstraint
) -> Optional[PartialAssignment]:
    """
    None when the encoding of r projected onto its input variables has
    exactly the models of r, else the first complete assignment on which
    they disagree.
    """
    variables, db = _encode_for_check(e, r)
    for values in product((True, False), repeat=len(variables)):
        sigma = dict(zip(variables, values))
        extendable = db.solve(_sigma_literals(sigma)) is not None
        if extendable != r.is_satisfied(sigma):
            return sigma
    return None
