"""
Output constraints produced by the encoders: clauses over signed integer
literals, CNF formulas with their auxiliary variables, and OPB-normal
pseudo-Boolean constraints.
"""

from dataclasses import dataclass, field
import threading
from typing import Iterable, Optional

Clause = tuple[int, ...]


def make_clause(lits: Iterable[int]) -> Optional[Clause]:
    """Clause with duplicates removed (first occurrence kept); None when tautological"""
    seen: dict[int, None] = {}
    for lit in lits:
        if lit == 0:
            raise ValueError("0 is not a literal")
        if -lit in seen:
            return None
        seen[lit] = None
    return tuple(seen)


class VarAllocator:
    """
    Issues fresh variable ids, continuing after the input variables.
    Increments are atomic so encoders may share one allocator across threads.
    """

    def __init__(self, next_id: int = 1):
        self._next_id = next_id
        self._lock = threading.Lock()

    @property
    def next_id(self) -> int:
        return self._next_id

    @property
    def top_id(self) -> int:
        """Largest id issued so far (or reserved for input variables)"""
        return self._next_id - 1

    def new_var(self) -> int:
        with self._lock:
            var = self._next_id
            self._next_id += 1
        return var


@dataclass
class CnfFormula:
    clauses: list[Clause] = field(default_factory=list)
    aux_variables: list[int] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.clauses)

    def new_aux(self, alloc: VarAllocator) -> int:
        var = alloc.new_var()
        self.aux_variables.append(var)
        return var

    def add_clause(self, lits: Iterable[int]) -> None:
        clause = make_clause(lits)
        if clause is not None:
            self.clauses.append(clause)

    def extend(self, other: "CnfFormula") -> None:
        self.clauses.extend(other.clauses)
        self.aux_variables.extend(other.aux_variables)

    @property
    def variables(self) -> set[int]:
        return {abs(lit) for clause in self.clauses for lit in clause}


@dataclass(frozen=True)
class PbOutputConstraint:
    """sum(coefficient * x_id) >= bound over plain variables"""

    terms: tuple[tuple[int, int], ...]
    bound: int

    def is_satisfied(self, assignment: dict[int, bool]) -> bool:
        lhs = sum(coeff for coeff, var in self.terms if assignment[var])
        return lhs >= self.bound

    def to_opb(self) -> str:
        lhs = " ".join(f"{coeff:+d} x{var}" for coeff, var in self.terms)
        return f"{lhs} >= {self.bound} ;"
