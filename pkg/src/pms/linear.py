"""Sparse exact linear algebra over the rationals.

Rows are sparse mappings from hashable, comparable variable labels to
Fraction coefficients.  The solver performs incremental Gaussian elimination:
each added equation is reduced against the existing pivot rows and either
vanishes, reveals an inconsistency, or contributes a new pivot.  Stored pivot
rows are never modified afterwards, so a pivot row can only mention its own
pivot, later pivots, and free variables; a reverse sweep therefore yields a
particular solution with all free variables set to zero.

Every particular solution is re-verified against the original equations
before being returned.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Hashable, Iterable, Mapping

Var = Hashable
Row = dict[Var, Fraction]


class Inconsistent(Exception):
    """Raised when the added equations admit no solution."""


class LinearSolver:
    def __init__(self) -> None:
        self.pivot_rows: dict[Var, Row] = {}
        self.pivot_rhs: dict[Var, Fraction] = {}
        self.pivot_order: list[Var] = []
        self.originals: list[tuple[Row, Fraction]] = []
        self.inconsistent = False

    @property
    def rank(self) -> int:
        return len(self.pivot_order)

    def _reduce(self, row: Row, rhs: Fraction) -> tuple[Row, Fraction]:
        row = {v: Fraction(c) for v, c in row.items() if c}
        rhs = Fraction(rhs)
        # repeatedly eliminate any variable that is a pivot
        while True:
            hit = None
            for v in row:
                if v in self.pivot_rows:
                    hit = v
                    break
            if hit is None:
                return row, rhs
            factor = row.pop(hit)
            prow = self.pivot_rows[hit]
            for u, c in prow.items():
                if u == hit:
                    continue
                nv = row.get(u, Fraction(0)) - factor * c
                if nv:
                    row[u] = nv
                else:
                    row.pop(u, None)
            rhs -= factor * self.pivot_rhs[hit]

    def add_equation(self, coeffs: Mapping[Var, Fraction | int],
                     rhs: Fraction | int = 0) -> None:
        """Add sum(coeffs[v] * x_v) = rhs."""
        clean = {v: Fraction(c) for v, c in coeffs.items() if c}
        rhs = Fraction(rhs)
        self.originals.append((dict(clean), rhs))
        if self.inconsistent:
            return
        row, rhs = self._reduce(clean, rhs)
        if not row:
            if rhs:
                self.inconsistent = True
            return
        pivot = min(row)
        inv = Fraction(1) / row[pivot]
        row = {v: c * inv for v, c in row.items()}
        rhs *= inv
        self.pivot_rows[pivot] = row
        self.pivot_rhs[pivot] = rhs
        self.pivot_order.append(pivot)

    def solve(self) -> dict[Var, Fraction] | None:
        """A particular solution (free variables zero), or None."""
        if self.inconsistent:
            return None
        values: dict[Var, Fraction] = {}
        for pivot in reversed(self.pivot_order):
            row = self.pivot_rows[pivot]
            total = self.pivot_rhs[pivot]
            for v, c in row.items():
                if v != pivot:
                    total -= c * values.get(v, Fraction(0))
            values[pivot] = total
        for row, rhs in self.originals:
            acc = Fraction(0)
            for v, c in row.items():
                acc += c * values.get(v, Fraction(0))
            if acc != rhs:  # pragma: no cover - internal safety net
                raise AssertionError("solver verification failed")
        return values

    def is_consistent(self) -> bool:
        return not self.inconsistent


def rank_of_vectors(vectors: Iterable[Mapping[Var, Fraction]]) -> int:
    """Rank of a family of sparse vectors."""
    solver = LinearSolver()
    for vec in vectors:
        solver.add_equation(vec, 0)
        # homogeneous rows never create inconsistency; rank grows per
        # independent vector
    return solver.rank


def in_span(vector: Mapping[Var, Fraction],
            basis: Iterable[Mapping[Var, Fraction]]) -> bool:
    """Whether ``vector`` lies in the span of ``basis``."""
    basis = list(basis)
    base_rank = rank_of_vectors(basis)
    return rank_of_vectors(basis + [dict(vector)]) == base_rank
