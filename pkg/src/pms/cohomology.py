"""Bounded Cech cohomology computations on chart atlases.

Cochains are represented with explicit bounded coefficient supports: a
"bound D" search allows Laurent coefficients whose exponents lie in the box
|e_v| <= D.  Solvers are exact and complete within the declared box, so a
positive answer comes with a rational witness (always re-verified by
substitution) while a negative answer only certifies that no witness exists
inside the box.  Every report states this caveat.

The module provides:

* coboundary solving for twisted vector-field cocycles and for one-form
  cocycles (optionally with extra unknown scalar multiples of given classes),
* the isomorphism decision for double-scheme data over a fixed bundle
  cocycle: D'_ij = tau * D_ij + T_i - alpha_ij T_j with tau invertible,
* logarithmic differential classes of bundle cocycles,
* index raising/lowering against per-chart top-form frames,
* the cup-product pairing into top-form-valued 2-cocycles and its residue
  functional, normalized by a stored calibration scale.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .atlas import (
    Atlas,
    DoubleSchemeSpec,
    MultCocycle,
    Pair,
    VectorFieldCocycle,
    canonical_spanning_pairs,
    derivation_failures,
    derive_mult,
    derive_vector_field,
    same_structure,
)
from .laurent_core import ExponentMonoid, LaurentPoly, Rational, format_rational

BOUND_CAVEAT = (
    "bounded search: coefficients were restricted to the exponent box "
    "|e| <= bound; a negative answer certifies no rational witness inside "
    "that box and is not a nonexistence proof over larger supports or over "
    "the complex numbers"
)


@dataclass(frozen=True)
class BoundedSpace:
    """The exponent box |e_v| <= bound used by the bounded solvers."""

    nvars: int
    bound: int

    def __post_init__(self):
        if self.bound < 0:
            raise ValueError("bound must be non-negative")

    def exponents(self):
        return itertools.product(
            range(-self.bound, self.bound + 1), repeat=self.nvars
        )

    def __contains__(self, exp) -> bool:
        return all(abs(int(x)) <= self.bound for x in exp)


@dataclass
class OneFormCocycle:
    """One-form valued chart-pair data: per pair, one coefficient per dv."""

    data: dict[Pair, tuple[LaurentPoly, ...]]

    def __post_init__(self):
        self.data = {k: tuple(v) for k, v in self.data.items()}


@dataclass
class TwoCocycle:
    """Top-form valued data on chart triples increasing in atlas order."""

    data: dict[tuple[str, str, str], LaurentPoly]


def solver_report(status: str, bound: int, witness=None) -> dict:
    out = {"status": status, "bound": bound, "caveat": BOUND_CAVEAT}
    if witness is not None:
        out["witness"] = witness
    return out


# -- derived families ---------------------------------------------------


def trivial_twist(atlas: Atlas) -> dict[Pair, LaurentPoly]:
    one = LaurentPoly.const(atlas.nvars, 1)
    names = atlas.chart_names()
    return {(i, j): one for i in names for j in names if i != j}


def derive_oneform(
    atlas: Atlas, omega: OneFormCocycle,
    twist: MultCocycle | None = None,
) -> dict[Pair, tuple[LaurentPoly, ...]]:
    """Full ordered-pair family of a (possibly twisted) one-form cocycle."""
    twist_full = (
        derive_mult(atlas, twist) if twist is not None else trivial_twist(atlas)
    )
    carrier = VectorFieldCocycle(dict(omega.data))
    return derive_vector_field(atlas, twist_full, carrier)


def canonical_class(atlas: Atlas, c: MultCocycle) -> OneFormCocycle:
    """The logarithmic-differential class dlog of a bundle cocycle.

    A monomial entry q * x^e contributes sum_v e_v dx_v / x_v; the result is
    an untwisted one-form cocycle on the canonical spanning pairs.
    """
    full = derive_mult(atlas, c)
    nvars = atlas.nvars
    data = {}
    for pair in canonical_spanning_pairs(atlas):
        exp, _ = full[pair].as_monomial()
        comps = []
        for v in range(nvars):
            unit = [0] * nvars
            unit[v] = -1
            comps.append(LaurentPoly.monomial(nvars, tuple(unit), exp[v]))
        data[pair] = tuple(comps)
    return OneFormCocycle(data)


# -- frames: raising and lowering ---------------------------------------


def frame_cocycle(atlas: Atlas) -> MultCocycle:
    """The bundle cocycle g_j / g_i of the stored top-form frames."""
    names = atlas.chart_names()
    data = {}
    for i, j in canonical_spanning_pairs(atlas):
        data[(i, j)] = atlas.frame(j) * atlas.frame(i).power(-1)
    return MultCocycle("frame", data)


def _require_frame_twist(atlas: Atlas, alpha: MultCocycle) -> None:
    full = derive_mult(atlas, alpha)
    expected = derive_mult(atlas, frame_cocycle(atlas))
    if full != expected:
        raise ValueError(
            "operation requires the bundle of top forms: the supplied twist "
            "does not match the frame ratios"
        )


def sharp(atlas: Atlas, omega: OneFormCocycle) -> VectorFieldCocycle:
    """Raise indices: untwisted one-forms to frame-twisted vector fields.

    In the first two variables, f dx0 + g dx1 becomes (g d/dx0 - f d/dx1)
    divided by the chart frame of the pair's first chart.
    """
    data = {}
    for (i, j), comps in omega.data.items():
        inv = atlas.frame(i).power(-1)
        out = [LaurentPoly.zero(atlas.nvars) for _ in range(atlas.nvars)]
        out[0] = inv * comps[1]
        out[1] = -(inv * comps[0])
        for extra in comps[2:]:
            if not extra.is_zero():
                raise ValueError("sharp expects forms in the first two variables")
        data[(i, j)] = tuple(out)
    return VectorFieldCocycle(data)


def flat(atlas: Atlas, spec: DoubleSchemeSpec) -> OneFormCocycle:
    """Lower indices: the frame-twisted vector-field family as one-forms.

    Contracts each entry into the top form and multiplies by the first
    chart's frame, giving an untwisted one-form cocycle on all ordered pairs
    restricted here to the canonical spanning pairs.
    """
    _require_frame_twist(spec.atlas, spec.alpha)
    atlas = spec.atlas
    alpha_full = derive_mult(atlas, spec.alpha)
    sigma_full = derive_vector_field(atlas, alpha_full, spec.D)
    data = {}
    for pair in canonical_spanning_pairs(atlas):
        i, _ = pair
        comps = sigma_full[pair]
        for extra in comps[2:]:
            if not extra.is_zero():
                raise ValueError("flat expects fields in the first two variables")
        g = atlas.frame(i)
        out = [LaurentPoly.zero(atlas.nvars) for _ in range(atlas.nvars)]
        out[0] = -(g * comps[1])
        out[1] = g * comps[0]
        data[pair] = tuple(out)
    return OneFormCocycle(data)


# -- cup product and residue --------------------------------------------


def increasing_triples(atlas: Atlas):
    names = atlas.chart_names()
    return itertools.combinations(names, 3)


def contract_cup(
    atlas: Atlas, alpha: MultCocycle, sigma: VectorFieldCocycle,
    omega: OneFormCocycle, omega_twist: MultCocycle | None = None,
) -> TwoCocycle:
    """Cup product of a frame-twisted vector cocycle with a one-form cocycle.

    Entry on an increasing triple (i, j, k) is the contraction
    <sigma_ij, omega_jk> converted to a top-form coefficient through the
    frame of chart i.  With untwisted omega the result satisfies the plain
    Cech 2-cocycle identity on quadruples.
    """
    _require_frame_twist(atlas, alpha)
    alpha_full = derive_mult(atlas, alpha)
    sigma_full = derive_vector_field(atlas, alpha_full, sigma)
    omega_full = derive_oneform(atlas, omega, omega_twist)
    data = {}
    for i, j, k in increasing_triples(atlas):
        s = sigma_full[(i, j)]
        w = omega_full[(j, k)]
        contraction = LaurentPoly.zero(atlas.nvars)
        for sv, wv in zip(s, w):
            contraction = contraction + sv * wv
        data[(i, j, k)] = atlas.frame(i) * contraction
    return TwoCocycle(data)


def two_cocycle_failures(atlas: Atlas, t: TwoCocycle) -> list[str]:
    """Violations of the untwisted 2-cocycle identity on quadruples."""
    out = []
    names = atlas.chart_names()
    for a, b, c, d in itertools.combinations(names, 4):
        acc = (
            t.data[(b, c, d)]
            - t.data[(a, c, d)]
            + t.data[(a, b, d)]
            - t.data[(a, b, c)]
        )
        if not acc.is_zero():
            out.append(f"quadruple ({a},{b},{c},{d})")
    return out


def residue_exponent(nvars: int):
    return (-1, -1) + (0,) * (nvars - 2)


def residue_raw(atlas: Atlas, t: TwoCocycle) -> LaurentPoly:
    """Unnormalized residue: strip the (-1, -1) coefficient of each triple.

    Returns a Laurent polynomial in the remaining variables (constant when
    the atlas has exactly two variables).
    """
    nvars = atlas.nvars
    total = LaurentPoly.zero(nvars)
    for entry in t.data.values():
        for exp, coeff in entry.items():
            if exp[0] == -1 and exp[1] == -1:
                rest = (0, 0) + exp[2:]
                total = total + LaurentPoly.monomial(nvars, rest, coeff)
    return total


def residue_poly(atlas: Atlas, t: TwoCocycle) -> LaurentPoly:
    if atlas.residue_scale is None:
        raise ValueError("atlas has no residue calibration scale")
    return residue_raw(atlas, t).scale(atlas.residue_scale)


def h2_residue(atlas: Atlas, t: TwoCocycle) -> Rational:
    """Calibrated residue of a top-form valued 2-cocycle (rational case)."""
    poly = residue_poly(atlas, t)
    if poly.is_zero():
        return Fraction(0)
    mono = poly.as_monomial()
    if mono is None or mono[0] != (0,) * atlas.nvars:
        raise ValueError("residue is not a constant; use residue_poly")
    return mono[1]


def calibrate_residue(atlas: Atlas, unit: MultCocycle) -> Rational:
    """Scale making the self-pairing of the unit class equal to one."""
    u = canonical_class(atlas, unit)
    u_sharp = sharp(atlas, u)
    t = contract_cup(atlas, frame_cocycle(atlas), u_sharp, u)
    raw = residue_raw(atlas, t)
    mono = raw.as_monomial()
    if mono is None or mono[0] != (0,) * atlas.nvars or not mono[1]:
        raise ValueError("calibration pairing is degenerate")
    return Fraction(1) / mono[1]


def extension_obstruction(spec: DoubleSchemeSpec, bundle: MultCocycle):
    """Residue pairing of the double structure against dlog of a bundle.

    Requires the double structure to be twisted by the bundle of top forms.
    Returns an exact rational; with symbolic extra variables, a Laurent
    polynomial in them.
    """
    atlas = spec.atlas
    omega = canonical_class(atlas, bundle)
    t = contract_cup(atlas, spec.alpha, spec.D, omega)
    poly = residue_poly(atlas, t)
    mono = poly.as_monomial()
    if poly.is_zero():
        return Fraction(0)
    if mono is not None and mono[0] == (0,) * atlas.nvars:
        return mono[1]
    return poly


# -- bounded coboundary solving -----------------------------------------


from .linear import LinearSolver  # noqa: E402  (kept close to its use)


def _vf_membership_rows(
    solver: LinearSolver, label: str, chart_name: str, ring: ExponentMonoid,
    space: BoundedSpace,
) -> None:
    """Constrain boxed coefficients of a chart field to preserve its ring.

    Variables are (label, chart, v, exp).  For each ring generator g and each
    possible image exponent f outside the ring, the f-coefficient of the
    image of x^g must vanish.
    """
    nvars = space.nvars
    targets: dict[tuple, dict] = {}
    for g in ring.generators:
        seen: dict[tuple, dict] = {}
        for v in range(nvars):
            if g[v] == 0:
                continue
            for e in space.exponents():
                f = tuple(a + b for a, b in zip(e, g))
                f = f[:v] + (f[v] - 1,) + f[v + 1:]
                seen.setdefault(f, {})[(label, chart_name, v, e)] = Fraction(g[v])
        for f, row in seen.items():
            if not ring.contains(f):
                solver.add_equation(row, 0)


def _poly_from_solution(
    values: dict, label: str, chart_name: str, v: int, space: BoundedSpace,
) -> LaurentPoly:
    terms = {}
    for e in space.exponents():
        coeff = values.get((label, chart_name, v, e), Fraction(0))
        if coeff:
            terms[e] = coeff
    return LaurentPoly(space.nvars, terms)


def coboundary_solve(
    spec: DoubleSchemeSpec, bound: int = 6,
) -> tuple[dict[str, tuple[LaurentPoly, ...]] | None, dict]:
    """Find chart fields T with D_ij = T_i - alpha_ij T_j, within the bound.

    Returns (witness, report).  The witness maps chart names to per-variable
    coefficients and is verified by resubstitution on every ordered pair and
    by stability of each chart ring.
    """
    atlas = spec.atlas
    space = BoundedSpace(atlas.nvars, bound)
    alpha_full = derive_mult(atlas, spec.alpha)
    sigma_full = derive_vector_field(atlas, alpha_full, spec.D)
    solver = LinearSolver()
    for chart in atlas.charts:
        _vf_membership_rows(solver, "T", chart.name, chart.ring, space)
    for (i, j) in canonical_spanning_pairs(atlas):
        exp_a, coeff_a = alpha_full[(i, j)].as_monomial()
        for v in range(atlas.nvars):
            rhs_poly = sigma_full[(i, j)][v]
            support = set(rhs_poly.support())
            for e in space.exponents():
                support.add(e)
                support.add(tuple(a + b for a, b in zip(e, exp_a)))
            for f in support:
                row = {}
                if f in space:
                    row[("T", i, v, f)] = Fraction(1)
                shifted = tuple(a - b for a, b in zip(f, exp_a))
                if shifted in space:
                    row[("T", j, v, shifted)] = -coeff_a
                solver.add_equation(row, rhs_poly.coefficient(f))
    values = solver.solve()
    if values is None:
        return None, solver_report("none_within_bound", bound)
    witness = {
        chart.name: tuple(
            _poly_from_solution(values, "T", chart.name, v, space)
            for v in range(atlas.nvars)
        )
        for chart in atlas.charts
    }
    _verify_vf_coboundary(spec, witness, sigma_full, alpha_full)
    json_witness = {
        name: [[_term_json(t) for t in comp.items()] for comp in comps]
        for name, comps in witness.items()
    }
    return witness, solver_report("found", bound, json_witness)


def _term_json(item) -> dict:
    exp, coeff = item
    return {"coeff": format_rational(coeff), "exp": list(exp)}


def _verify_vf_coboundary(spec, witness, sigma_full, alpha_full) -> None:
    atlas = spec.atlas
    for chart in atlas.charts:
        bad = derivation_failures(
            witness[chart.name], chart.ring, atlas.variables
        )
        if bad:  # pragma: no cover - solver constraints make this unreachable
            raise AssertionError(
                f"witness field on {chart.name} not ring-stable: {bad}"
            )
    names = atlas.chart_names()
    for i in names:
        for j in names:
            if i == j:
                continue
            alpha = alpha_full[(i, j)]
            for v in range(atlas.nvars):
                delta = witness[i][v] - alpha * witness[j][v]
                if delta != sigma_full[(i, j)][v]:  # pragma: no cover
                    raise AssertionError(
                        f"witness fails resubstitution on ({i},{j})"
                    )


def iso_decide(
    first: DoubleSchemeSpec, second: DoubleSchemeSpec, bound: int = 6,
) -> tuple[tuple[Rational, dict[str, tuple[LaurentPoly, ...]]] | None, dict]:
    """Decide D'_ij = tau D_ij + T_i - alpha_ij T_j with invertible tau.

    Both structures must live on the same atlas with the same bundle cocycle.
    Returns ((tau, fields), report) on success.  Complete within the bound:
    first tries to pin tau = 1; otherwise tau is forced to a single value,
    which must be nonzero.
    """
    atlas = first.atlas
    if not same_structure(second.atlas, atlas):
        raise ValueError("isomorphism decision needs a common atlas")
    alpha_full = derive_mult(atlas, first.alpha)
    if derive_mult(atlas, second.alpha) != alpha_full:
        raise ValueError("isomorphism decision needs equal bundle cocycles")
    space = BoundedSpace(atlas.nvars, bound)
    s1 = derive_vector_field(atlas, alpha_full, first.D)
    s2 = derive_vector_field(atlas, alpha_full, second.D)

    def build(tau_fixed: Rational | None) -> LinearSolver:
        solver = LinearSolver()
        if tau_fixed is not None:
            solver.add_equation({("tau",): Fraction(1)}, tau_fixed)
        for chart in atlas.charts:
            _vf_membership_rows(solver, "T", chart.name, chart.ring, space)
        for (i, j) in canonical_spanning_pairs(atlas):
            exp_a, coeff_a = alpha_full[(i, j)].as_monomial()
            for v in range(atlas.nvars):
                lhs = s2[(i, j)][v]
                scaled = s1[(i, j)][v]
                support = set(lhs.support()) | set(scaled.support())
                for e in space.exponents():
                    support.add(e)
                    support.add(tuple(a + b for a, b in zip(e, exp_a)))
                for f in support:
                    row = {("tau",): scaled.coefficient(f)}
                    if f in space:
                        row[("T", i, v, f)] = Fraction(1)
                    shifted = tuple(a - b for a, b in zip(f, exp_a))
                    if shifted in space:
                        row[("T", j, v, shifted)] = -coeff_a
                    solver.add_equation(row, lhs.coefficient(f))
        return solver

    values = build(Fraction(1)).solve()
    if values is None:
        values = build(None).solve()
        if values is None or not values.get(("tau",), Fraction(0)):
            return None, solver_report("none_within_bound", bound)
    tau = values[("tau",)]
    fields = {
        chart.name: tuple(
            _poly_from_solution(values, "T", chart.name, v, space)
            for v in range(atlas.nvars)
        )
        for chart in atlas.charts
    }
    _verify_iso(first, second, tau, fields, s1, s2, alpha_full)
    json_witness = {
        "tau": format_rational(tau),
        "fields": {
            name: [[_term_json(t) for t in comp.items()] for comp in comps]
            for name, comps in fields.items()
        },
    }
    return (tau, fields), solver_report("found", bound, json_witness)


def _verify_iso(first, second, tau, fields, s1, s2, alpha_full) -> None:
    atlas = first.atlas
    for chart in atlas.charts:
        bad = derivation_failures(fields[chart.name], chart.ring, atlas.variables)
        if bad:  # pragma: no cover
            raise AssertionError(f"iso witness not ring-stable on {chart.name}")
    names = atlas.chart_names()
    for i in names:
        for j in names:
            if i == j:
                continue
            alpha = alpha_full[(i, j)]
            for v in range(atlas.nvars):
                rhs = (
                    s1[(i, j)][v].scale(tau)
                    + fields[i][v]
                    - alpha * fields[j][v]
                )
                if rhs != s2[(i, j)][v]:  # pragma: no cover
                    raise AssertionError(
                        f"iso witness fails resubstitution on ({i},{j})"
                    )


# -- one-form coboundary solving ----------------------------------------


def _oneform_basis(ring: ExponentMonoid, space: BoundedSpace):
    """Regular one-form basis on a chart: x^m d(x^g) for boxed m in the ring.

    Yields ((m, g), comps) with comps the per-variable coefficients.
    """
    nvars = space.nvars
    for m in space.exponents():
        if not ring.contains(m):
            continue
        for g in ring.generators:
            comps = []
            for v in range(nvars):
                if g[v] == 0:
                    comps.append(None)
                    continue
                exp = tuple(a + b for a, b in zip(m, g))
                exp = exp[:v] + (exp[v] - 1,) + exp[v + 1:]
                comps.append((exp, Fraction(g[v])))
            yield (m, g), comps


def oneform_coboundary_solve(
    atlas: Atlas,
    sigma: OneFormCocycle,
    bound: int = 6,
    twist: MultCocycle | None = None,
    extra: dict[str, OneFormCocycle] | None = None,
) -> tuple[dict | None, dict]:
    """Solve sigma = sum_s c_s extra_s + (rho_i - twist_ij rho_j), bounded.

    The chart cochains rho_i range over the span of x^m d(x^g) with m in the
    chart ring box; extra classes enter with unknown rational multipliers
    keyed by their names.  Returns (solution, report); the solution maps
    "coefficients" to the multipliers and "cochain" to the per-chart forms.
    """
    nvars = atlas.nvars
    space = BoundedSpace(nvars, bound)
    twist_full = (
        derive_mult(atlas, twist) if twist is not None else trivial_twist(atlas)
    )
    sigma_full = derive_oneform(atlas, sigma)
    extra_full = {
        name: derive_oneform(atlas, cls) for name, cls in (extra or {}).items()
    }

    # per chart: list of (key, comps) basis elements
    basis: dict[str, list] = {}
    for chart in atlas.charts:
        basis[chart.name] = list(_oneform_basis(chart.ring, space))

    solver = LinearSolver()
    for (i, j) in canonical_spanning_pairs(atlas):
        tw = twist_full[(i, j)]
        exp_a, coeff_a = tw.as_monomial()
        for v in range(nvars):
            rows: dict[tuple, dict] = {}
            rhs_poly = sigma_full[(i, j)][v]
            support = set(rhs_poly.support())
            for name, cls in extra_full.items():
                support |= set(cls[(i, j)][v].support())
            for key, comps in basis[i]:
                if comps[v] is not None:
                    exp, coeff = comps[v]
                    support.add(exp)
                    rows.setdefault(exp, {})[("rho", i) + key] = coeff
            for key, comps in basis[j]:
                if comps[v] is not None:
                    exp, coeff = comps[v]
                    shifted = tuple(a + b for a, b in zip(exp, exp_a))
                    support.add(shifted)
                    rows.setdefault(shifted, {})[("rho", j) + key] = (
                        -coeff * coeff_a
                    )
            for f in support:
                row = dict(rows.get(f, {}))
                for name, cls in extra_full.items():
                    c = cls[(i, j)][v].coefficient(f)
                    if c:
                        row[("coeff", name)] = c
                solver.add_equation(row, rhs_poly.coefficient(f))
    values = solver.solve()
    if values is None:
        return None, solver_report("none_within_bound", bound)

    coefficients = {
        name: values.get(("coeff", name), Fraction(0)) for name in extra_full
    }
    cochain: dict[str, tuple[LaurentPoly, ...]] = {}
    for chart in atlas.charts:
        comps_total = [LaurentPoly.zero(nvars) for _ in range(nvars)]
        for key, comps in basis[chart.name]:
            c = values.get(("rho", chart.name) + key, Fraction(0))
            if not c:
                continue
            for v, item in enumerate(comps):
                if item is not None:
                    exp, coeff = item
                    comps_total[v] = comps_total[v] + LaurentPoly.monomial(
                        nvars, exp, coeff * c
                    )
        cochain[chart.name] = tuple(comps_total)

    _verify_oneform(atlas, sigma_full, twist_full, extra_full, coefficients, cochain)
    solution = {"coefficients": coefficients, "cochain": cochain}
    json_witness = {
        "coefficients": {
            n: format_rational(c) for n, c in coefficients.items()
        },
        "cochain": {
            name: [[_term_json(t) for t in comp.items()] for comp in comps]
            for name, comps in cochain.items()
        },
    }
    return solution, solver_report("found", bound, json_witness)


def _verify_oneform(atlas, sigma_full, twist_full, extra_full, coefficients,
                    cochain) -> None:
    names = atlas.chart_names()
    for i in names:
        for j in names:
            if i == j:
                continue
            tw = twist_full[(i, j)]
            for v in range(atlas.nvars):
                acc = cochain[i][v] - tw * cochain[j][v]
                for name, cls in extra_full.items():
                    acc = acc + cls[(i, j)][v].scale(coefficients[name])
                if acc != sigma_full[(i, j)][v]:  # pragma: no cover
                    raise AssertionError(
                        f"one-form witness fails resubstitution on ({i},{j})"
                    )
