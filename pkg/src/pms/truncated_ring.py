"""Truncated polynomial extensions R[t]/(t^n) of Laurent chart rings.

Elements are vectors of Laurent-polynomial coefficients, one per power of the
nilpotent generator t.  Ring endomorphisms that preserve the filtration by t
are described by where they send each chart variable (a unit-like truncated
element whose constant term is the variable itself) together with the image
of t, which is epsilon * t for a one-order-lower element epsilon.

The module provides exact arithmetic, element and endomorphism classification,
substitution of a multiple of t into the t-expansion (the bracket operation),
and the closed-form conjugation of an endomorphism by the rescaling t -> x*t
for a monomial x, which is checked elsewhere against direct composition.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .laurent_core import (
    ExponentMonoid,
    LaurentPoly,
    Rational,
    monomial_is_unit,
    poly_from_json,
    poly_in_ring,
    poly_to_json,
)

FULL_RING_2 = ExponentMonoid(2, ((1, 0), (-1, 0), (0, 1), (0, -1)))


def full_laurent_ring(nvars: int) -> ExponentMonoid:
    """The monoid of all integer exponent vectors (every monomial allowed)."""
    gens = []
    for i in range(nvars):
        for sign in (1, -1):
            e = [0] * nvars
            e[i] = sign
            gens.append(tuple(e))
    return ExponentMonoid(nvars, tuple(gens))


@dataclass(frozen=True)
class TruncElement:
    """An element of R[t]/(t^order): coeffs[i] multiplies t^i."""

    order: int
    coeffs: tuple[LaurentPoly, ...]

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("truncation order must be at least 1")
        if len(self.coeffs) != self.order:
            raise ValueError(
                f"expected {self.order} coefficients, got {len(self.coeffs)}"
            )
        nv = {c.nvars for c in self.coeffs}
        if len(nv) != 1:
            raise ValueError("mixed variable counts in coefficients")

    @property
    def nvars(self) -> int:
        return self.coeffs[0].nvars

    @staticmethod
    def zero(order: int, nvars: int) -> TruncElement:
        return TruncElement(order, (LaurentPoly.zero(nvars),) * order)

    @staticmethod
    def from_poly(order: int, p: LaurentPoly) -> TruncElement:
        tail = (LaurentPoly.zero(p.nvars),) * (order - 1)
        return TruncElement(order, (p,) + tail)

    @staticmethod
    def one(order: int, nvars: int) -> TruncElement:
        return TruncElement.from_poly(order, LaurentPoly.const(nvars, 1))

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coeffs)

    def __add__(self, other: TruncElement) -> TruncElement:
        self._check(other)
        return TruncElement(
            self.order, tuple(a + b for a, b in zip(self.coeffs, other.coeffs))
        )

    def __sub__(self, other: TruncElement) -> TruncElement:
        self._check(other)
        return TruncElement(
            self.order, tuple(a - b for a, b in zip(self.coeffs, other.coeffs))
        )

    def __neg__(self) -> TruncElement:
        return TruncElement(self.order, tuple(-c for c in self.coeffs))

    def _check(self, other: TruncElement) -> None:
        if not isinstance(other, TruncElement):
            raise TypeError("expected TruncElement")
        if self.order != other.order:
            raise ValueError(
                f"truncation order mismatch: {self.order} vs {other.order}"
            )
        if self.nvars != other.nvars:
            raise ValueError("variable count mismatch")

    def scale_poly(self, p: LaurentPoly) -> TruncElement:
        return TruncElement(self.order, tuple(p * c for c in self.coeffs))

    def scale(self, q: Rational | int) -> TruncElement:
        return TruncElement(self.order, tuple(c.scale(q) for c in self.coeffs))

    def shift_up(self, k: int) -> TruncElement:
        """Multiply by t^k (dropping what falls off the truncation)."""
        if k < 0:
            raise ValueError("shift must be non-negative")
        zero = LaurentPoly.zero(self.nvars)
        coeffs = (zero,) * k + self.coeffs[: self.order - k]
        return TruncElement(self.order, coeffs[: self.order])

    def lift(self, order: int) -> TruncElement:
        """View in a higher truncation order (new coefficients zero)."""
        if order < self.order:
            raise ValueError("lift target below current order")
        zero = LaurentPoly.zero(self.nvars)
        return TruncElement(order, self.coeffs + (zero,) * (order - self.order))


def trunc_mul(a: TruncElement, b: TruncElement) -> TruncElement:
    """Product in R[t]/(t^order) by truncated convolution."""
    a._check(b)
    n = a.order
    zero = LaurentPoly.zero(a.nvars)
    out = [zero] * n
    for i, ai in enumerate(a.coeffs):
        if ai.is_zero():
            continue
        for j in range(n - i):
            bj = b.coeffs[j]
            if bj.is_zero():
                continue
            out[i + j] = out[i + j] + ai * bj
    return TruncElement(n, tuple(out))


def trunc_pow(a: TruncElement, k: int) -> TruncElement:
    if k < 0:
        raise ValueError("negative powers go through invert_unit")
    out = TruncElement.one(a.order, a.nvars)
    for _ in range(k):
        out = trunc_mul(out, a)
    return out


def truncate_down(a: TruncElement, order: int) -> TruncElement:
    """Forget the coefficients of t^order and above."""
    if not 1 <= order <= a.order:
        raise ValueError("bad truncation order")
    return TruncElement(order, a.coeffs[:order])


def constant_term(a: TruncElement) -> LaurentPoly:
    return a.coeffs[0]


def classify_element(u: TruncElement, ring: ExponentMonoid) -> str:
    """Classify into ``zero_divisor`` / ``unit`` / ``regular_nonunit``.

    The element must have all coefficients inside the chart ring.  An element
    is a zero divisor exactly when its constant coefficient vanishes, and a
    unit exactly when the constant coefficient is an invertible monomial of
    the chart ring.
    """
    for c in u.coeffs:
        if not poly_in_ring(c, ring):
            raise ValueError("element has a coefficient outside the chart ring")
    if u.coeffs[0].is_zero():
        return "zero_divisor"
    if monomial_is_unit(u.coeffs[0], ring):
        return "unit"
    return "regular_nonunit"


def invert_unit(u: TruncElement) -> TruncElement:
    """Inverse of an element whose constant coefficient is a monomial."""
    mono = u.coeffs[0].as_monomial()
    if mono is None:
        raise ValueError("constant coefficient is not a monomial unit")
    n, nvars = u.order, u.nvars
    inv0 = TruncElement.from_poly(n, u.coeffs[0].power(-1))
    # u = u0 (1 - w) with w nilpotent; inverse is u0^{-1} (1 + w + w^2 + ...)
    w = TruncElement.one(n, nvars) - trunc_mul(inv0, u)
    acc = TruncElement.one(n, nvars)
    power = TruncElement.one(n, nvars)
    for _ in range(1, n):
        power = trunc_mul(power, w)
        acc = acc + power
    return trunc_mul(inv0, acc)


def bracket_subst(l: TruncElement, a: TruncElement) -> TruncElement:
    """Substitute a*t for t in the t-expansion: sum of l_i * a^i * t^i."""
    l._check(a)
    n = l.order
    out = TruncElement.zero(n, l.nvars)
    apow = TruncElement.one(n, l.nvars)
    for i, li in enumerate(l.coeffs):
        if not li.is_zero():
            out = out + apow.scale_poly(li).shift_up(i)
        if i + 1 < n:
            apow = trunc_mul(apow, a)
    return out


# -- endomorphisms ------------------------------------------------------


@dataclass(frozen=True)
class RingMorphism:
    """A filtered endomorphism of R[t]/(t^order).

    ``variable_images[v]`` is the image of the v-th chart variable (constant
    coefficient equal to that variable); ``epsilon`` is the image of t divided
    by t, one truncation order lower.
    """

    order: int
    variable_images: tuple[TruncElement, ...]
    epsilon: TruncElement

    def __post_init__(self):
        if self.order < 2:
            raise ValueError("morphism order must be at least 2")
        if not self.variable_images:
            raise ValueError("need at least one variable image")
        nvars = self.variable_images[0].nvars
        for v, img in enumerate(self.variable_images):
            if img.order != self.order or img.nvars != nvars:
                raise ValueError("variable image has wrong order or variables")
            expected = LaurentPoly.var(nvars, v)
            if img.coeffs[0] != expected:
                raise ValueError(
                    f"image of variable {v} must have constant coefficient "
                    f"equal to the variable"
                )
        if self.epsilon.order != self.order - 1:
            raise ValueError("epsilon must live one truncation order lower")
        if self.epsilon.nvars != nvars:
            raise ValueError("epsilon variable count mismatch")

    @property
    def nvars(self) -> int:
        return self.variable_images[0].nvars


def identity_morphism(order: int, nvars: int) -> RingMorphism:
    images = tuple(
        TruncElement.from_poly(order, LaurentPoly.var(nvars, v))
        for v in range(nvars)
    )
    eps = TruncElement.one(order - 1, nvars)
    return RingMorphism(order, images, eps)


def chi_morphism(order: int, y: TruncElement) -> RingMorphism:
    """The rescaling chi_y: identity on functions, t -> y*t."""
    if y.order != order - 1:
        raise ValueError("chi parameter must live one order lower")
    images = tuple(
        TruncElement.from_poly(order, LaurentPoly.var(y.nvars, v))
        for v in range(y.nvars)
    )
    return RingMorphism(order, images, y)


@lru_cache(maxsize=None)
def _image_power(theta: RingMorphism, v: int, k: int) -> TruncElement:
    if k == 0:
        return TruncElement.one(theta.order, theta.nvars)
    if k < 0:
        return trunc_pow(invert_unit(theta.variable_images[v]), -k)
    return trunc_pow(theta.variable_images[v], k)


def _phi_poly(theta: RingMorphism, p: LaurentPoly) -> TruncElement:
    """Apply the function part of the morphism to a Laurent polynomial."""
    out = TruncElement.zero(theta.order, theta.nvars)
    for exp, coeff in p.items():
        term = TruncElement.one(theta.order, theta.nvars)
        for v, e in enumerate(exp):
            if e:
                term = trunc_mul(term, _image_power(theta, v, e))
        out = out + term.scale(coeff)
    return out


def apply_endo(theta: RingMorphism, u: TruncElement) -> TruncElement:
    """Image of a truncated element under the endomorphism."""
    if u.order != theta.order:
        raise ValueError("element and morphism orders differ")
    if u.nvars != theta.nvars:
        raise ValueError("variable count mismatch")
    n = theta.order
    eps = theta.epsilon.lift(n)
    out = TruncElement.zero(n, u.nvars)
    eps_pow = TruncElement.one(n, u.nvars)
    for i, ui in enumerate(u.coeffs):
        if not ui.is_zero():
            out = out + trunc_mul(_phi_poly(theta, ui), eps_pow).shift_up(i)
        if i + 1 < n:
            eps_pow = trunc_mul(eps_pow, eps)
    return out


def compose_endo(outer: RingMorphism, inner: RingMorphism) -> RingMorphism:
    """The endomorphism u -> outer(inner(u))."""
    if outer.order != inner.order or outer.nvars != inner.nvars:
        raise ValueError("morphism order or variable mismatch")
    n = outer.order
    images = tuple(
        apply_endo(outer, img) for img in inner.variable_images
    )
    t_image = apply_endo(outer, inner.epsilon.lift(n).shift_up(1))
    eps = TruncElement(n - 1, t_image.coeffs[1:])
    return RingMorphism(n, images, eps)


def truncate_morphism(theta: RingMorphism, order: int) -> RingMorphism:
    if not 2 <= order <= theta.order:
        raise ValueError("bad truncation order")
    return RingMorphism(
        order,
        tuple(truncate_down(img, order) for img in theta.variable_images),
        truncate_down(theta.epsilon, order - 1),
    )


def classify_endo(theta: RingMorphism, ring: ExponentMonoid | None = None) -> str:
    """Classify into ``iso`` / ``injective_only`` / ``non_injective``.

    The constant coefficient of epsilon decides: zero kills t^(order-1), a
    chart-ring unit makes the morphism invertible, and anything else gives an
    injective non-surjective morphism.
    """
    if ring is None:
        ring = full_laurent_ring(theta.nvars)
    eps0 = theta.epsilon.coeffs[0]
    if eps0.is_zero():
        return "non_injective"
    if monomial_is_unit(eps0, ring):
        return "iso"
    return "injective_only"


def endo_inverse(theta: RingMorphism) -> RingMorphism:
    """Two-sided inverse of an invertible endomorphism.

    Solves order by order in t: a defect of order t^k in the candidate is
    repaired by a correction divided by the k-th power of epsilon's leading
    monomial, which cancels it without touching lower orders.  Raises
    ValueError if epsilon's constant coefficient is not a monomial unit.
    """
    if classify_endo(theta) != "iso":
        raise ValueError("endomorphism is not invertible")
    n, nvars = theta.order, theta.nvars
    eps0 = theta.epsilon.coeffs[0]
    zero = LaurentPoly.zero(nvars)

    images = []
    for v in range(nvars):
        target = TruncElement.from_poly(n, LaurentPoly.var(nvars, v))
        psi_v = target
        for k in range(1, n):
            err = apply_endo(theta, psi_v) - target
            ek = err.coeffs[k]
            if ek.is_zero():
                continue
            delta = [zero] * n
            delta[k] = ek * eps0.power(-k)
            psi_v = psi_v - TruncElement(n, tuple(delta))
        images.append(psi_v)

    m = n - 1
    one_low = TruncElement.one(m, nvars)
    theta_low = truncate_morphism(theta, m) if m >= 2 else None
    x = TruncElement.from_poly(m, eps0.power(-1))
    for k in range(1, m):
        imaged = apply_endo(theta_low, x) if theta_low else x
        err = trunc_mul(imaged, theta.epsilon) - one_low
        ek = err.coeffs[k]
        if ek.is_zero():
            continue
        delta = [zero] * m
        delta[k] = ek * eps0.power(-(k + 1))
        x = x - TruncElement(m, tuple(delta))

    psi = RingMorphism(n, tuple(images), x)
    ident = identity_morphism(n, nvars)
    if compose_endo(theta, psi) != ident or compose_endo(psi, theta) != ident:
        raise ValueError("inverse iteration failed to converge")
    return psi


def conjugate_chi(theta: RingMorphism, x: LaurentPoly,
                  alpha: TruncElement) -> RingMorphism:
    """Conjugate by the t-rescalings: chi_(alpha*x) o theta o chi_(1/x).

    ``x`` must be a single monomial and ``alpha`` a unit one order below the
    morphism.  Returns the closed-form result; callers can cross-check it
    against the literal three-fold composition.
    """
    mono = x.as_monomial()
    if mono is None:
        raise ValueError("conjugation requires a monomial rescaling")
    if alpha.order != theta.order - 1:
        raise ValueError("alpha must live one truncation order lower")
    if alpha.coeffs[0].as_monomial() is None:
        raise ValueError("alpha must be a unit")
    n = theta.order

    y = alpha.scale_poly(x)            # the combined rescaling, order n-1
    y_n = y.lift(n)

    images = tuple(
        bracket_subst(img, y_n) for img in theta.variable_images
    )

    phi_x = _phi_poly(theta, x)
    mu = TruncElement(n - 1, phi_x.coeffs[1:])      # (phi(x) - x) / t
    eps_b = bracket_subst(theta.epsilon, y)
    mu_b = bracket_subst(mu, y)
    denom = TruncElement.one(n - 1, theta.nvars) + trunc_mul(
        mu_b, alpha
    ).shift_up(1)
    eps = trunc_mul(trunc_mul(alpha, eps_b), invert_unit(denom))
    return RingMorphism(n, images, eps)


def conjugate_chi_composed(theta: RingMorphism, x: LaurentPoly,
                           alpha: TruncElement) -> RingMorphism:
    """The same conjugation computed by direct composition (oracle path)."""
    mono = x.as_monomial()
    if mono is None:
        raise ValueError("conjugation requires a monomial rescaling")
    n = theta.order
    inv_x = TruncElement.from_poly(n - 1, x.power(-1))
    left = chi_morphism(n, alpha.scale_poly(x))
    right = chi_morphism(n, inv_x)
    return compose_endo(left, compose_endo(theta, right))


# -- serialization ------------------------------------------------------


def trunc_to_json(u: TruncElement) -> dict:
    return {"order": u.order, "coeffs": [poly_to_json(c) for c in u.coeffs]}


def trunc_from_json(data: dict, nvars: int) -> TruncElement:
    if not isinstance(data, dict) or "order" not in data or "coeffs" not in data:
        raise ValueError("malformed truncated element")
    order = int(data["order"])
    coeffs = tuple(poly_from_json(c, nvars) for c in data["coeffs"])
    return TruncElement(order, coeffs)
