"""
Output problems: tag -> encoder dispatch, the translation pass over an
InputModel, variable numbering and DIMACS / OPB serialization.
"""

from abc import ABC, abstractmethod
from dataclasses import asdict, dataclass
import enum
from typing import Union

import pandas as pd

from pbcnf.encoders import (
    CaseInsensitiveStrEnum,
    Encoder,
    Encoder2Cnf,
    Encoder2Pb,
    EncoderName,
    resolve_encoder,
)
from pbcnf.formula import CnfFormula, PbOutputConstraint, VarAllocator
from pbcnf.logger import get_logger
from pbcnf.model import InputModel
from pbcnf.normalize import NormalizeResult, NormalizeStatus, to_raw

logger = get_logger(__name__)


class EncoderAssignmentError(ValueError):
    """Raised for invalid encoder assignments and constraints no encoder can translate"""


class ProblemStateError(RuntimeError):
    """Raised when assign_encoder / read / get_output are called out of order"""


class ProblemState(enum.Enum):
    FRESH = "fresh"
    READ = "read"


class OutputKind(CaseInsensitiveStrEnum):
    """Output formats"""

    DIMACS = enum.auto()
    OPB = enum.auto()


class EncoderAssignment:
    """Ordered list of encoders per tag"""

    def __init__(self):
        self._by_tag: dict[int, list[Encoder]] = {}

    def add(self, tag: int, encoder: Encoder) -> None:
        self._by_tag.setdefault(tag, []).append(encoder)

    def encoders_for(self, tag: int) -> list[Encoder]:
        return list(self._by_tag.get(tag, []))

    @property
    def tags(self) -> list[int]:
        return sorted(self._by_tag)

    def names(self) -> dict[int, list[str]]:
        return {tag: [e.name for e in self._by_tag[tag]] for tag in self.tags}


@dataclass(frozen=True)
class TranslationRecord:
    """Size of the output produced for one (constraint, tag, encoder) translation"""

    constraint: int
    tag: int
    encoder: str
    status: str
    forced: int
    clauses: int
    aux_variables: int


STATS_COLUMNS = [
    "constraint",
    "tag",
    "encoder",
    "status",
    "forced",
    "clauses",
    "aux_variables",
]


class OutputProblem(ABC):
    """
    Shared life cycle of output problems: encoders are assigned while the
    problem is fresh, read() translates an input model exactly once, and
    get_output() renders the result afterwards.

    Subclasses must implement:
        - _start(self, m: InputModel)
        - _translate(self, result: NormalizeResult, encoder: Encoder) -> tuple[int, int]
        - _render(self, comments: bool) -> str
    """

    ENCODER_KIND: type[Encoder] = Encoder

    def __init__(self):
        self._assignment = EncoderAssignment()
        self._state = ProblemState.FRESH
        self._records: list[TranslationRecord] = []
        self._unsat_constraints: list[int] = []
        self._input_variable_count = 0

    @property
    def assignment(self) -> EncoderAssignment:
        return self._assignment

    @property
    def state(self) -> ProblemState:
        return self._state

    @property
    def records(self) -> list[TranslationRecord]:
        return list(self._records)

    @property
    def unsat_constraints(self) -> list[int]:
        """Indices of constraints found unsatisfiable during normalization"""
        return list(self._unsat_constraints)

    @property
    def input_variable_count(self) -> int:
        return self._input_variable_count

    def _fail_state(self, msg: str) -> None:
        logger.error(msg)
        raise ProblemStateError(msg)

    def assign_encoder(self, tag: int, e: Union[Encoder, EncoderName, str]) -> None:
        """Append an encoder to the list used for constraints carrying `tag`"""
        if self._state is ProblemState.READ:
            self._fail_state("Encoders cannot be assigned after the model was read")
        try:
            encoder = resolve_encoder(e)
        except ValueError as err:
            raise EncoderAssignmentError(str(err)) from None
        if not isinstance(encoder, self.ENCODER_KIND):
            msg = (
                f"Encoder '{encoder.name}' cannot be assigned to a "
                f"{type(self).__name__}, expected a {self.ENCODER_KIND.__name__}"
            )
            logger.error(msg)
            raise EncoderAssignmentError(msg)
        self._assignment.add(tag, encoder)

    def _dispatch(self, m: InputModel) -> list[list[tuple[int, Encoder]]]:
        plan = []
        for index, q in enumerate(m.constraints):
            pairs = [
                (tag, encoder)
                for tag in sorted(q.tags)
                for encoder in self._assignment.encoders_for(tag)
            ]
            if not pairs:
                tags = ",".join(str(t) for t in sorted(q.tags))
                msg = f"Constraint {index} with tags {tags} matches no assigned encoder"
                logger.error(msg)
                raise EncoderAssignmentError(msg)
            plan.append(pairs)
        return plan

    def read(self, m: InputModel) -> None:
        """
        Translate every constraint of m, in insertion order, once per
        (tag, encoder) pair matching its tags. Must be called exactly once.
        """
        if self._state is ProblemState.READ:
            self._fail_state("read() must be used only one time")
        plan = self._dispatch(m)
        self._input_variable_count = m.variable_count
        self._start(m)

        for index, (q, pairs) in enumerate(zip(m.constraints, plan)):
            result = to_raw(q)
            if result.status is NormalizeStatus.UNSAT:
                logger.warning(f"Constraint {index} '{q}' is unsatisfiable")
                self._unsat_constraints.append(index)
            for tag, encoder in pairs:
                outputs, aux = self._translate(result, encoder)
                logger.debug(
                    f"Constraint {index} tag {tag} via {encoder.name}: "
                    f"{outputs} outputs, {aux} auxiliary variables"
                )
                self._records.append(
                    TranslationRecord(
                        constraint=index,
                        tag=tag,
                        encoder=encoder.name,
                        status=result.status.value,
                        forced=len(result.forced_literals),
                        clauses=outputs,
                        aux_variables=aux,
                    )
                )
        self._state = ProblemState.READ
        logger.info(
            f"Read {len(m)} constraints over {m.variable_count} variables "
            f"into {len(self._records)} translations"
        )

    def get_output(self, comments: bool = False) -> str:
        """The output problem as text; only available after read()"""
        if self._state is not ProblemState.READ:
            self._fail_state("get_output() must be called after read()")
        return self._render(comments)

    def stats_frame(self) -> pd.DataFrame:
        """One row per translation with its output size"""
        return pd.DataFrame(
            [asdict(record) for record in self._records], columns=STATS_COLUMNS
        )

    @abstractmethod
    def _start(self, m: InputModel) -> None:
        raise NotImplementedError

    @abstractmethod
    def _translate(self, result: NormalizeResult, encoder: Encoder) -> tuple[int, int]:
        """Append the translation of one normalized constraint, return (outputs, aux) added"""
        raise NotImplementedError

    @abstractmethod
    def _render(self, comments: bool) -> str:
        raise NotImplementedError


class CnfProblem(OutputProblem):
    """
    CNF output rendered as DIMACS. Input variables keep their ids,
    auxiliary variables are numbered after them in allocation order.
    """

    ENCODER_KIND = Encoder2Cnf

    def __init__(self):
        super().__init__()
        self._formula = CnfFormula()
        self._alloc = VarAllocator()

    @property
    def formula(self) -> CnfFormula:
        return self._formula

    @property
    def variable_count(self) -> int:
        return self._alloc.top_id

    def _start(self, m: InputModel) -> None:
        self._alloc = VarAllocator(m.variable_count + 1)

    def _translate(self, result: NormalizeResult, encoder: Encoder) -> tuple[int, int]:
        clauses_before = len(self._formula.clauses)
        aux_before = len(self._formula.aux_variables)
        for lit in result.forced_literals:
            self._formula.add_clause([lit.dimacs])
        if result.status is NormalizeStatus.UNSAT:
            self._formula.add_clause([])
        elif result.status is NormalizeStatus.RESIDUAL:
            self._formula.extend(encoder.encode(result.residual, self._alloc))
        return (
            len(self._formula.clauses) - clauses_before,
            len(self._formula.aux_variables) - aux_before,
        )

    def _render(self, comments: bool) -> str:
        lines = []
        if comments:
            for record in self._records:
                lines.append(
                    f"c constraint {record.constraint} tag {record.tag} "
                    f"{record.encoder}: {record.clauses} clauses, "
                    f"{record.aux_variables} auxiliary variables"
                )
        lines.append(f"p cnf {self.variable_count} {len(self._formula.clauses)}")
        for clause in self._formula.clauses:
            lines.append(" ".join(str(lit) for lit in clause + (0,)))
        return "\n".join(lines) + "\n"


class PbProblem(OutputProblem):
    """Pseudo-Boolean output rendered in OPB format"""

    ENCODER_KIND = Encoder2Pb

    def __init__(self):
        super().__init__()
        self._constraints: list[PbOutputConstraint] = []
        self._unsat_without_variables = False

    @property
    def constraints(self) -> list[PbOutputConstraint]:
        return list(self._constraints)

    def _start(self, m: InputModel) -> None:
        pass

    def _translate(self, result: NormalizeResult, encoder: Encoder) -> tuple[int, int]:
        before = len(self._constraints)
        for lit in result.forced_literals:
            if lit.sign:
                self._constraints.append(PbOutputConstraint(((1, lit.var_id),), 1))
            else:
                self._constraints.append(PbOutputConstraint(((-1, lit.var_id),), 0))
        if result.status is NormalizeStatus.UNSAT:
            # no portable empty OPB constraint: +1 x1 >= 2 cannot hold
            if self._input_variable_count:
                self._constraints.append(PbOutputConstraint(((1, 1),), 2))
            else:
                self._unsat_without_variables = True
        elif result.status is NormalizeStatus.RESIDUAL:
            self._constraints.extend(encoder.encode(result.residual))
        return len(self._constraints) - before, 0

    def _render(self, comments: bool) -> str:
        lines = [
            f"* #variable= {self._input_variable_count} "
            f"#constraint= {len(self._constraints)}"
        ]
        if comments:
            for record in self._records:
                lines.append(
                    f"* constraint {record.constraint} tag {record.tag} "
                    f"{record.encoder}: {record.clauses} constraints"
                )
        if self._unsat_without_variables:
            lines.append("* unsat")
        lines.extend(constraint.to_opb() for constraint in self._constraints)
        return "\n".join(lines) + "\n"


def new_output_problem(kind: Union[OutputKind, str]) -> OutputProblem:
    return CnfProblem() if OutputKind(kind) is OutputKind.DIMACS else PbProblem()
