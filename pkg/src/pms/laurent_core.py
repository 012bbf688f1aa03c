"""Exact sparse Laurent polynomials and finitely generated exponent monoids.

A Laurent polynomial is stored as a mapping from integer exponent vectors
(one entry per variable) to nonzero rational coefficients.  All arithmetic is
exact over the rationals.  The canonical form never stores a zero coefficient,
and the canonical term order is lexicographic on exponent vectors.

A chart ring is described by the monoid of exponents it contains, given by a
finite generator list.  Membership of an exponent vector in the monoid is
decided by a complete bounded search: a vector e lies in the monoid iff it is
a non-negative integer combination of the generators with coefficients at most
B, where B is the sum of the absolute values of all generator and target
components plus 4.  For the cone-like monoids used here the bound is large
enough that the bounded search agrees with true membership.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator, Mapping

Exponent = tuple[int, ...]
Rational = Fraction

MEMBERSHIP_SLACK = 4


def format_rational(q: Rational | int) -> str:
    """Render a rational as ``"n/d"`` with an explicit denominator."""
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def parse_rational(text: str) -> Rational:
    """Parse ``"n/d"`` or a plain integer string into a Fraction."""
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"malformed rational {text!r}: {exc}") from exc


class LaurentPoly:
    """An exact sparse Laurent polynomial in a fixed number of variables."""

    __slots__ = ("nvars", "_terms")

    def __init__(self, nvars: int, terms: Mapping[Exponent, Rational] | None = None):
        if nvars < 1:
            raise ValueError("a Laurent polynomial needs at least one variable")
        clean: dict[Exponent, Rational] = {}
        for exp, coeff in (terms or {}).items():
            exp = tuple(int(e) for e in exp)
            if len(exp) != nvars:
                raise ValueError(
                    f"exponent {exp} has {len(exp)} entries, expected {nvars}"
                )
            coeff = Fraction(coeff)
            if coeff:
                clean[exp] = clean.get(exp, Fraction(0)) + coeff
                if not clean[exp]:
                    del clean[exp]
        object.__setattr__(self, "nvars", nvars)
        object.__setattr__(self, "_terms", clean)

    def __setattr__(self, name, value):  # pragma: no cover - guard
        raise AttributeError("LaurentPoly is immutable")

    # -- constructors ---------------------------------------------------

    @staticmethod
    def zero(nvars: int) -> LaurentPoly:
        return LaurentPoly(nvars)

    @staticmethod
    def const(nvars: int, value: Rational | int) -> LaurentPoly:
        return LaurentPoly(nvars, {(0,) * nvars: Fraction(value)})

    @staticmethod
    def monomial(nvars: int, exp: Iterable[int], coeff: Rational | int = 1) -> LaurentPoly:
        return LaurentPoly(nvars, {tuple(exp): Fraction(coeff)})

    @staticmethod
    def var(nvars: int, index: int) -> LaurentPoly:
        exp = [0] * nvars
        exp[index] = 1
        return LaurentPoly(nvars, {tuple(exp): Fraction(1)})

    # -- basic queries --------------------------------------------------

    def items(self) -> Iterator[tuple[Exponent, Rational]]:
        """Iterate terms in the canonical (lexicographic) order."""
        return iter(sorted(self._terms.items()))

    def support(self) -> set[Exponent]:
        return set(self._terms)

    def coefficient(self, exp: Iterable[int]) -> Rational:
        return self._terms.get(tuple(exp), Fraction(0))

    def constant_coefficient(self) -> Rational:
        return self._terms.get((0,) * self.nvars, Fraction(0))

    def is_zero(self) -> bool:
        return not self._terms

    def as_monomial(self) -> tuple[Exponent, Rational] | None:
        """Return (exponent, coefficient) if this is a single term, else None."""
        if len(self._terms) != 1:
            return None
        [(exp, coeff)] = self._terms.items()
        return exp, coeff

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, LaurentPoly)
            and self.nvars == other.nvars
            and self._terms == other._terms
        )

    def __hash__(self) -> int:
        return hash((self.nvars, tuple(sorted(self._terms.items()))))

    def __repr__(self) -> str:
        if not self._terms:
            return "0"
        names = _default_names(self.nvars)
        parts = []
        for exp, coeff in self.items():
            mono = monomial_str(exp, names)
            if mono == "1":
                parts.append(str(coeff))
            elif coeff == 1:
                parts.append(mono)
            elif coeff == -1:
                parts.append(f"-{mono}")
            else:
                parts.append(f"{coeff}*{mono}")
        out = " + ".join(parts).replace("+ -", "- ")
        return out

    # -- arithmetic -----------------------------------------------------

    def _check_same(self, other: LaurentPoly) -> None:
        if not isinstance(other, LaurentPoly):
            raise TypeError(f"expected LaurentPoly, got {type(other).__name__}")
        if self.nvars != other.nvars:
            raise ValueError(
                f"variable count mismatch: {self.nvars} vs {other.nvars}"
            )

    def __add__(self, other: LaurentPoly) -> LaurentPoly:
        self._check_same(other)
        terms = dict(self._terms)
        for exp, coeff in other._terms.items():
            terms[exp] = terms.get(exp, Fraction(0)) + coeff
        return LaurentPoly(self.nvars, terms)

    def __sub__(self, other: LaurentPoly) -> LaurentPoly:
        self._check_same(other)
        terms = dict(self._terms)
        for exp, coeff in other._terms.items():
            terms[exp] = terms.get(exp, Fraction(0)) - coeff
        return LaurentPoly(self.nvars, terms)

    def __neg__(self) -> LaurentPoly:
        return LaurentPoly(self.nvars, {e: -c for e, c in self._terms.items()})

    def __mul__(self, other: LaurentPoly) -> LaurentPoly:
        self._check_same(other)
        terms: dict[Exponent, Rational] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                exp = tuple(a + b for a, b in zip(e1, e2))
                terms[exp] = terms.get(exp, Fraction(0)) + c1 * c2
        return LaurentPoly(self.nvars, terms)

    def scale(self, factor: Rational | int) -> LaurentPoly:
        factor = Fraction(factor)
        return LaurentPoly(
            self.nvars, {e: c * factor for e, c in self._terms.items()}
        )

    def mul_monomial(self, exp: Iterable[int], coeff: Rational | int = 1) -> LaurentPoly:
        shift = tuple(exp)
        if len(shift) != self.nvars:
            raise ValueError("monomial exponent length mismatch")
        coeff = Fraction(coeff)
        return LaurentPoly(
            self.nvars,
            {
                tuple(a + b for a, b in zip(e, shift)): c * coeff
                for e, c in self._terms.items()
            },
        )

    def power(self, k: int) -> LaurentPoly:
        """Integer power; negative powers only for single monomials."""
        if k == 0:
            return LaurentPoly.const(self.nvars, 1)
        if k < 0:
            mono = self.as_monomial()
            if mono is None:
                raise ValueError("negative powers require a monomial")
            exp, coeff = mono
            return LaurentPoly.monomial(
                self.nvars, tuple(k * e for e in exp), coeff ** k
            )
        out = LaurentPoly.const(self.nvars, 1)
        base = self
        n = k
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def partial_derivative(self, var: int) -> LaurentPoly:
        if not 0 <= var < self.nvars:
            raise ValueError(f"variable index {var} out of range")
        terms: dict[Exponent, Rational] = {}
        for exp, coeff in self._terms.items():
            if exp[var] == 0:
                continue
            new = list(exp)
            new[var] -= 1
            terms[tuple(new)] = coeff * exp[var]
        return LaurentPoly(self.nvars, terms)

    def extend_vars(self, nvars: int) -> LaurentPoly:
        """Reinterpret in a larger variable list (new exponents zero)."""
        if nvars < self.nvars:
            raise ValueError("cannot shrink the variable list")
        pad = (0,) * (nvars - self.nvars)
        return LaurentPoly(nvars, {e + pad: c for e, c in self._terms.items()})


def lp_arith(a: LaurentPoly, b: LaurentPoly, op: str) -> LaurentPoly:
    """Exact ring arithmetic: ``op`` is one of ``add``, ``sub``, ``mul``."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown operation {op!r}")


def partial_derivative(p: LaurentPoly, var: int) -> LaurentPoly:
    """Formal partial derivative with respect to the ``var``-th variable."""
    return p.partial_derivative(var)


# -- exponent monoids ---------------------------------------------------


@dataclass(frozen=True)
class ExponentMonoid:
    """A finitely generated submonoid of Z^nvars, given by its generators."""

    nvars: int
    generators: tuple[Exponent, ...]

    def __post_init__(self):
        gens = tuple(tuple(int(x) for x in g) for g in self.generators)
        if not gens:
            raise ValueError("a monoid needs at least one generator")
        if len(set(gens)) != len(gens):
            raise ValueError("duplicate monoid generators")
        for g in gens:
            if len(g) != self.nvars:
                raise ValueError(
                    f"generator {g} has {len(g)} entries, expected {self.nvars}"
                )
        object.__setattr__(self, "generators", gens)

    def contains(self, exp: Iterable[int]) -> bool:
        target = tuple(int(x) for x in exp)
        if len(target) != self.nvars:
            raise ValueError("exponent length mismatch")
        return _monoid_contains_cached(self.generators, target)

    def extend_vars(self, nvars: int) -> ExponentMonoid:
        """Embed into a larger variable list, adding the new unit directions."""
        if nvars < self.nvars:
            raise ValueError("cannot shrink the variable list")
        pad = (0,) * (nvars - self.nvars)
        gens = [g + pad for g in self.generators]
        for i in range(self.nvars, nvars):
            unit = [0] * nvars
            unit[i] = 1
            gens.append(tuple(unit))
        return ExponentMonoid(nvars, tuple(gens))


def membership_bound(generators: tuple[Exponent, ...], target: Exponent) -> int:
    """Coefficient bound for the complete bounded membership search."""
    total = sum(abs(x) for g in generators for x in g)
    total += sum(abs(x) for x in target)
    return total + MEMBERSHIP_SLACK


@lru_cache(maxsize=None)
def _monoid_contains_cached(generators: tuple[Exponent, ...], target: Exponent) -> bool:
    bound = membership_bound(generators, target)
    n = len(target)
    gens = generators
    # Per-coordinate reachability envelopes of the generator suffixes, used to
    # prune the search: after fixing coefficients for gens[:i], the residual
    # must lie inside what gens[i:] can still produce with coefficients <= bound.
    lo = [[0] * n for _ in range(len(gens) + 1)]
    hi = [[0] * n for _ in range(len(gens) + 1)]
    for i in range(len(gens) - 1, -1, -1):
        for v in range(n):
            g = gens[i][v]
            lo[i][v] = lo[i + 1][v] + bound * min(g, 0)
            hi[i][v] = hi[i + 1][v] + bound * max(g, 0)

    seen: set[tuple[int, Exponent]] = set()

    def rec(i: int, residual: Exponent) -> bool:
        if all(x == 0 for x in residual):
            return True
        if i == len(gens):
            return False
        if any(not lo[i][v] <= residual[v] <= hi[i][v] for v in range(n)):
            return False
        key = (i, residual)
        if key in seen:
            return False
        seen.add(key)
        g = gens[i]
        current = residual
        for _ in range(bound + 1):
            if rec(i + 1, current):
                return True
            current = tuple(x - y for x, y in zip(current, g))
        return False

    return rec(0, target)


def monoid_contains(m: ExponentMonoid, exp: Iterable[int]) -> bool:
    """Bounded-search membership of an exponent vector in the monoid."""
    return m.contains(exp)


def monoids_equal(a: ExponentMonoid, b: ExponentMonoid) -> bool:
    """Whether two generator presentations span the same monoid."""
    if a.nvars != b.nvars:
        return False
    if a.generators == b.generators:
        return True
    return all(b.contains(g) for g in a.generators) and all(
        a.contains(g) for g in b.generators
    )


def minimal_generators(m: ExponentMonoid) -> ExponentMonoid:
    """An irredundant sorted presentation of the same monoid.

    Repeatedly drops any generator that the remaining ones already produce;
    the bounded membership search never claims a false positive, so the
    result generates exactly the same monoid.
    """
    gens = sorted({tuple(int(x) for x in g) for g in m.generators if any(g)})
    if not gens:
        return ExponentMonoid(m.nvars, ((0,) * m.nvars,))
    reduced = True
    while reduced and len(gens) > 1:
        reduced = False
        for g in gens:
            rest = tuple(h for h in gens if h != g)
            if ExponentMonoid(m.nvars, rest).contains(g):
                gens = list(rest)
                reduced = True
                break
    return ExponentMonoid(m.nvars, tuple(gens))


def monoid_contains_enumerate(m: ExponentMonoid, exp: Iterable[int]) -> bool:
    """Independent brute-force membership check by full enumeration.

    Enumerates every coefficient tuple in the bounded box.  Exponential; only
    suitable for small generator lists, as an oracle for tests.
    """
    target = tuple(int(x) for x in exp)
    bound = membership_bound(m.generators, target)
    for coeffs in itertools.product(range(bound + 1), repeat=len(m.generators)):
        combo = [0] * m.nvars
        for c, g in zip(coeffs, m.generators):
            for v in range(m.nvars):
                combo[v] += c * g[v]
        if tuple(combo) == target:
            return True
    return False


def poly_in_ring(p: LaurentPoly, m: ExponentMonoid) -> bool:
    """Whether every exponent of ``p`` lies in the monoid ``m``."""
    if p.nvars != m.nvars:
        raise ValueError("variable count mismatch between polynomial and monoid")
    return all(m.contains(e) for e in p.support())


def monomial_is_unit(p: LaurentPoly, m: ExponentMonoid) -> bool:
    """Whether ``p`` is a single term invertible inside the monoid ring."""
    mono = p.as_monomial()
    if mono is None:
        return False
    exp, _ = mono
    neg = tuple(-x for x in exp)
    return m.contains(exp) and m.contains(neg)


# -- serialization ------------------------------------------------------


def poly_to_json(p: LaurentPoly) -> list[dict]:
    """Canonical JSON form: term list sorted lexicographically by exponent."""
    return [
        {"coeff": format_rational(c), "exp": list(e)}
        for e, c in p.items()
    ]


def poly_from_json(data: list, nvars: int) -> LaurentPoly:
    terms: dict[Exponent, Rational] = {}
    if not isinstance(data, list):
        raise ValueError("polynomial serialization must be a list of terms")
    for item in data:
        if not isinstance(item, dict) or "coeff" not in item or "exp" not in item:
            raise ValueError(f"malformed polynomial term {item!r}")
        exp = tuple(int(x) for x in item["exp"])
        if len(exp) != nvars:
            raise ValueError(
                f"term exponent {list(exp)} has {len(exp)} entries, expected {nvars}"
            )
        coeff = parse_rational(str(item["coeff"]))
        if exp in terms:
            raise ValueError(f"duplicate exponent {list(exp)} in term list")
        terms[exp] = coeff
    return LaurentPoly(nvars, terms)


# -- display helpers ----------------------------------------------------


def _default_names(nvars: int) -> tuple[str, ...]:
    base = ("lam", "mu", "al")
    if nvars <= len(base):
        return base[:nvars]
    return tuple(f"x{i}" for i in range(nvars))


def monomial_str(exp: Iterable[int], names: Iterable[str]) -> str:
    """Deterministic display form of a monomial, e.g. ``lam^2*mu^-1``."""
    parts = []
    for e, name in zip(tuple(exp), tuple(names)):
        if e == 0:
            continue
        parts.append(name if e == 1 else f"{name}^{e}")
    return "*".join(parts) if parts else "1"
