"""
OPB reader. Supported subset:

    * #variable= <n> #constraint= <m>       (optional header comment)
    * any other comment
    <sign><int> x<id> ... (>=|=|<=) <int> ;

Terms may also use the negated form ~x<id>. Objective lines are not supported.
"""

from dataclasses import dataclass, field
import enum
import pathlib
import re
from typing import Optional, Union

from pbcnf.logger import get_logger
from pbcnf.model import InputModel, Literal, PbLeqConstraint, TagContext, make_eq

logger = get_logger(__name__)

HEADER_PATTERN = re.compile(r"#variable=\s*(\d+)\s+#constraint=\s*(\d+)")
COEFF_PATTERN = re.compile(r"[+-]?\d+")
LITERAL_PATTERN = re.compile(r"(~?)x(\d+)")
TOKEN_PATTERN = re.compile(r";|[^\s;]+")


class OpbSyntaxError(ValueError):
    """Malformed OPB input, located by 1-based line and column"""

    def __init__(self, line: int, column: int, reason: str):
        self.line = line
        self.column = column
        self.reason = reason
        super().__init__(f"line {line}, column {column}: {reason}")


class Relation(enum.Enum):
    GEQ = ">="
    EQ = "="
    LEQ = "<="


@dataclass(frozen=True)
class OpbTerm:
    coeff: int
    var_id: int
    negated: bool = False

    def __str__(self) -> str:
        return f"{self.coeff:+d} {'~' if self.negated else ''}x{self.var_id}"


@dataclass(frozen=True)
class OpbConstraint:
    terms: tuple[OpbTerm, ...]
    relation: Relation
    bound: int
    line: int = 0

    def __str__(self) -> str:
        lhs = " ".join(str(term) for term in self.terms)
        return f"{lhs} {self.relation.value} {self.bound} ;"


@dataclass
class OpbDocument:
    """Parsed OPB file; declared counts are None when the header is absent"""

    constraints: list[OpbConstraint] = field(default_factory=list)
    declared_variables: Optional[int] = None
    declared_constraints: Optional[int] = None

    @property
    def max_var_id(self) -> int:
        return max(
            (term.var_id for q in self.constraints for term in q.terms), default=0
        )

    @property
    def variable_count(self) -> int:
        return max(self.declared_variables or 0, self.max_var_id)


def _fail(line: int, column: int, reason: str) -> None:
    err = OpbSyntaxError(line, column, reason)
    logger.error(str(err))
    raise err


def _parse_constraint(text: str, line_no: int) -> OpbConstraint:
    terms: list[OpbTerm] = []
    relation: Optional[Relation] = None
    bound: Optional[int] = None
    coeff: Optional[int] = None
    closed = False

    for match in TOKEN_PATTERN.finditer(text):
        token, column = match.group(), match.start() + 1
        if closed:
            _fail(line_no, column, f"unexpected '{token}' after ';'")
        if relation is None:
            if coeff is None:
                if token in (r.value for r in Relation):
                    if not terms:
                        _fail(line_no, column, "constraint has no terms")
                    relation = Relation(token)
                elif COEFF_PATTERN.fullmatch(token):
                    coeff = int(token)
                else:
                    _fail(line_no, column, f"expected a coefficient, got '{token}'")
            else:
                lit = LITERAL_PATTERN.fullmatch(token)
                if lit is None:
                    _fail(line_no, column, f"expected a literal x<id>, got '{token}'")
                var_id = int(lit.group(2))
                if var_id == 0:
                    _fail(line_no, column, "variable ids start at 1")
                terms.append(OpbTerm(coeff, var_id, bool(lit.group(1))))
                coeff = None
        elif bound is None:
            if not COEFF_PATTERN.fullmatch(token):
                _fail(line_no, column, f"expected an integer bound, got '{token}'")
            bound = int(token)
        elif token == ";":
            closed = True
        else:
            _fail(line_no, column, f"expected ';', got '{token}'")

    end = len(text) + 1
    if coeff is not None:
        _fail(line_no, end, "coefficient without a literal")
    if relation is None:
        _fail(line_no, end, "missing relation (>=, = or <=)")
    if bound is None:
        _fail(line_no, end, "missing bound")
    if not closed:
        _fail(line_no, end, "missing ';'")
    return OpbConstraint(tuple(terms), relation, bound, line_no)


def parse_opb(text: str) -> OpbDocument:
    doc = OpbDocument()
    header_line = 0
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("*"):
            header = HEADER_PATTERN.search(stripped)
            if header and doc.declared_variables is None:
                doc.declared_variables = int(header.group(1))
                doc.declared_constraints = int(header.group(2))
                header_line = line_no
            continue
        if stripped.startswith("min:") or stripped.startswith("max:"):
            _fail(line_no, line.index("m") + 1, "objective lines are not supported")
        doc.constraints.append(_parse_constraint(line.rstrip(), line_no))

    if doc.declared_variables is not None:
        for q in doc.constraints:
            for term in q.terms:
                if term.var_id > doc.declared_variables:
                    _fail(
                        q.line,
                        1,
                        f"x{term.var_id} exceeds the {doc.declared_variables} "
                        "variables declared in the header",
                    )
        if doc.declared_constraints != len(doc.constraints):
            _fail(
                header_line,
                1,
                f"header declares {doc.declared_constraints} constraints, "
                f"found {len(doc.constraints)}",
            )
    logger.debug(
        f"Parsed {len(doc.constraints)} constraints over {doc.variable_count} variables"
    )
    return doc


def read_opb(filename: Union[str, pathlib.Path]) -> OpbDocument:
    with open(filename) as fin:
        text = fin.read()
    logger.info(f"Loaded file {filename}")
    return parse_opb(text)


def _to_leq(
    q: OpbConstraint, m: InputModel, negate: bool
) -> tuple[list[int], list[Literal], int]:
    """
    Positive-coefficient <= form of sum(terms) <= bound, or of
    sum(terms) >= bound when `negate`. A negative a.l becomes |a|.~l and
    moves -a into the bound.
    """
    sign = -1 if negate else 1
    bound = sign * q.bound
    coeffs, lits = [], []
    for term in q.terms:
        coeff = sign * term.coeff
        lit = m.variable(term.var_id).get_lit(not term.negated)
        if coeff < 0:
            coeff, lit = -coeff, ~lit
            bound += coeff
        if coeff:
            coeffs.append(coeff)
            lits.append(lit)
    return coeffs, lits, bound


def _leq(
    q: OpbConstraint, m: InputModel, negate: bool, tags: frozenset[int]
) -> PbLeqConstraint:
    coeffs, lits, bound = _to_leq(q, m, negate)
    if not coeffs:
        # every coefficient was 0: keep the truth value of 0 <= bound on a
        # cancelling pair, which normalization folds back into the bound
        lit = m.variable(q.terms[0].var_id).pos_lit()
        coeffs, lits, bound = [1, 1], [lit, ~lit], bound + 1
    return PbLeqConstraint(tuple(coeffs), tuple(lits), bound, tags)


def to_input_model(doc: OpbDocument, tag_by_position: bool = False) -> InputModel:
    """
    InputModel with variables 1..doc.variable_count. Constraints are tagged 1,
    or by their 1-based position in the file when `tag_by_position` is set.
    An equality becomes the pair of inequalities of make_eq; one whose bound
    can never be met becomes a <= / >= pair left for normalization to reject.
    """
    m = InputModel()
    m.new_variables(doc.variable_count)
    for index, q in enumerate(doc.constraints, start=1):
        tags = frozenset({index if tag_by_position else 1})
        if q.relation is Relation.LEQ:
            m.add_constraint(_leq(q, m, False, tags))
        elif q.relation is Relation.GEQ:
            m.add_constraint(_leq(q, m, True, tags))
        else:
            coeffs, lits, bound = _to_leq(q, m, False)
            if coeffs and 0 <= bound <= sum(coeffs):
                m.add_constraints(make_eq(coeffs, lits, bound, TagContext(*tags)))
            else:
                m.add_constraint(_leq(q, m, False, tags))
                m.add_constraint(_leq(q, m, True, tags))
    return m
