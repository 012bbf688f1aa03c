"""Blow-up constructors for chart atlases with monomial centers.

Three constructions are provided.  Blowing up a reduced center replaces each
chart by one new chart per monomial generator of the center's ideal there,
with rings enlarged by the generator ratios, and rescales the transition data
by the ratio of the two charts' distinguished generators.  Blowing up a good
zero-dimensional subscheme (ideal locally ``(y_r + a_r t)``) produces the
same chart combinatorics but keeps the pulled-back bundle cocycle, correcting
the derivation family by the coefficient field sum(a_r d/dy_r) on the center
chart.  Blowing up a hypersurface keeps the atlas and conjugates every
transition endomorphism by the rescaling built from the local equations.

For truncation order two the constructions act on double-scheme data; higher
orders carry their transitions as ring morphisms on consecutive chart pairs
(the ``TransitionSpec`` form), and the reduced and hypersurface constructions
conjugate those morphisms directly.
"""

from __future__ import annotations

from dataclasses import dataclass

from .atlas import (
    Atlas,
    Chart,
    DoubleSchemeSpec,
    MultCocycle,
    Pair,
    ValidationReport,
    VectorFieldCocycle,
    _spanning_tree,
    canonical_spanning_pairs,
    derivation_failures,
    derive_mult,
    derive_vector_field,
    pair_key,
    validate_double_scheme,
)
from .cohomology import iso_decide
from .laurent_core import (
    ExponentMonoid,
    LaurentPoly,
    minimal_generators,
    monomial_is_unit,
    monomial_str,
    poly_from_json,
    poly_in_ring,
    poly_to_json,
)
from .truncated_ring import (
    RingMorphism,
    TruncElement,
    _phi_poly,
    compose_endo,
    conjugate_chi,
    endo_inverse,
    identity_morphism,
)

Exponent = tuple[int, ...]

CENTER_KINDS = ("reduced", "good", "hypersurface")


# -- center descriptions ------------------------------------------------


@dataclass(frozen=True)
class CenterSpec:
    """A monomial center: ideal generators or (coordinate, coefficient) pairs.

    ``generators`` holds, per chart, the monomial ideal generators (reduced
    and hypersurface kinds); ``pairs`` holds the good-subscheme data, per
    chart a list of ``(y, a)`` with ``y`` a monomial coordinate and ``a`` a
    chart function, encoding the ideal ``(y + a*t)``.
    """

    kind: str
    generators: dict[str, tuple[LaurentPoly, ...]] | None = None
    pairs: dict[str, tuple[tuple[LaurentPoly, LaurentPoly], ...]] | None = None

    def __post_init__(self):
        if self.kind not in CENTER_KINDS:
            raise ValueError(f"unknown center kind {self.kind!r}")
        if self.kind == "good":
            if self.pairs is None or self.generators is not None:
                raise ValueError("a good center is given by coordinate pairs")
            if len(self.pairs) != 1:
                raise ValueError(
                    "a good center lives on exactly one chart"
                )
        else:
            if self.generators is None or self.pairs is not None:
                raise ValueError(
                    f"a {self.kind} center is given by ideal generators"
                )
            for name, gens in self.generators.items():
                if not gens:
                    raise ValueError(f"center lists no generators on {name!r}")
                if self.kind == "hypersurface" and len(gens) != 1:
                    raise ValueError(
                        "a hypersurface center needs exactly one equation "
                        f"per chart, got {len(gens)} on {name!r}"
                    )


def center_to_json(c: CenterSpec) -> dict:
    per_chart: dict = {}
    if c.generators is not None:
        for name, gens in sorted(c.generators.items()):
            per_chart[name] = {"generators": [poly_to_json(g) for g in gens]}
    if c.pairs is not None:
        for name, items in sorted(c.pairs.items()):
            per_chart[name] = {
                "pairs": [[poly_to_json(y), poly_to_json(a)] for y, a in items]
            }
    return {"kind": c.kind, "per_chart": per_chart}


def center_from_json(data: dict, nvars: int) -> CenterSpec:
    if not isinstance(data, dict) or "kind" not in data or "per_chart" not in data:
        raise ValueError("a center needs 'kind' and 'per_chart'")
    kind = str(data["kind"])
    generators: dict[str, tuple[LaurentPoly, ...]] = {}
    pairs: dict[str, tuple[tuple[LaurentPoly, LaurentPoly], ...]] = {}
    for name, entry in data["per_chart"].items():
        if not isinstance(entry, dict):
            raise ValueError(f"center entry for {name!r} must be an object")
        if "generators" in entry:
            generators[str(name)] = tuple(
                poly_from_json(g, nvars) for g in entry["generators"]
            )
        elif "pairs" in entry:
            pairs[str(name)] = tuple(
                (poly_from_json(y, nvars), poly_from_json(a, nvars))
                for y, a in entry["pairs"]
            )
        else:
            raise ValueError(
                f"center entry for {name!r} needs 'generators' or 'pairs'"
            )
    return CenterSpec(
        kind,
        generators=generators or None,
        pairs=pairs or None,
    )


# -- higher-multiplicity transition data --------------------------------


@dataclass
class TransitionSpec:
    """Transition ring morphisms on consecutive chart pairs of an atlas."""

    atlas: Atlas
    transitions: dict[Pair, RingMorphism]

    def __post_init__(self):
        expected = set(canonical_spanning_pairs(self.atlas))
        if set(self.transitions) != expected:
            raise ValueError(
                "transitions must cover exactly the consecutive chart pairs"
            )
        order = self.atlas.truncation_order
        for pair, theta in self.transitions.items():
            if theta.order != order:
                raise ValueError(
                    f"transition on {pair} has order {theta.order}, "
                    f"expected {order}"
                )
            if theta.nvars != self.atlas.nvars:
                raise ValueError(f"transition on {pair} has wrong variables")


def lift_double(spec: DoubleSchemeSpec) -> TransitionSpec:
    """The order-two transition morphisms of a double scheme."""
    atlas = spec.atlas
    alpha_full = derive_mult(atlas, spec.alpha)
    full = derive_vector_field(atlas, alpha_full, spec.D)
    nvars = atlas.nvars
    transitions = {}
    for (i, j) in canonical_spanning_pairs(atlas):
        images = tuple(
            TruncElement(2, (LaurentPoly.var(nvars, v), full[(i, j)][v]))
            for v in range(nvars)
        )
        eps = TruncElement(1, (alpha_full[(i, j)],))
        transitions[(i, j)] = RingMorphism(2, images, eps)
    return TransitionSpec(atlas, transitions)


def derive_transitions(
    atlas: Atlas, transitions: dict[Pair, RingMorphism]
) -> dict[Pair, RingMorphism]:
    """Transition morphisms on all ordered pairs, composed along a tree."""
    names = atlas.chart_names()
    lookup: dict[Pair, RingMorphism] = {}
    for (i, j), theta in transitions.items():
        lookup[(i, j)] = theta
        if (j, i) not in transitions:
            lookup[(j, i)] = endo_inverse(theta)
    paths = _spanning_tree(names, set(lookup))
    full: dict[Pair, RingMorphism] = {}
    for i in names:
        for k in names:
            if i == k:
                continue
            pi, pk = paths[i][::-1], paths[k]
            while len(pi) > 1 and len(pk) > 1 and pi[-2] == pk[1]:
                pi = pi[:-1]
                pk = pk[1:]
            route = pi + pk[1:]
            acc = identity_morphism(atlas.truncation_order, atlas.nvars)
            for a, b in zip(route, route[1:]):
                acc = compose_endo(acc, lookup[(a, b)])
            full[(i, k)] = acc
    return full


def transition_failures(
    theta: RingMorphism, ring: ExponentMonoid, variables: tuple[str, ...]
) -> list[str]:
    """Membership failures of a transition morphism over an overlap ring."""
    out = []
    eps0 = theta.epsilon.coeffs[0]
    if not monomial_is_unit(eps0, ring):
        out.append("epsilon is not a unit of the overlap ring")
    for g in ring.generators:
        image = _phi_poly(theta, LaurentPoly.monomial(theta.nvars, g))
        for k, coeff in enumerate(image.coeffs):
            if not poly_in_ring(coeff, ring):
                out.append(
                    f"image of {monomial_str(g, variables)} leaves the "
                    f"overlap ring at order {k}"
                )
                break
    return out


def validate_transition_spec(spec: TransitionSpec) -> ValidationReport:
    failures = spec.atlas.structure_failures()
    for (i, j), theta in sorted(spec.transitions.items()):
        ring = spec.atlas.overlap(i, j)
        for msg in transition_failures(theta, ring, spec.atlas.variables):
            failures.append(f"transition on ({i},{j}): {msg}")
    return ValidationReport(not failures, failures)


# -- shared chart combinatorics -----------------------------------------


@dataclass(frozen=True)
class BlownChart:
    name: str
    base: str
    generator: Exponent


@dataclass
class BlowupResult:
    """A blow-up: the new structure plus its bundle bookkeeping.

    ``spec`` is the blown-up double scheme (or transition family for higher
    truncation order); ``pullback`` is the pulled-back input bundle cocycle
    and ``exceptional`` the exceptional-divisor cocycle, when present.  The
    bundle of ``spec`` is their tensor product.  ``charts`` records, for each
    new chart, the base chart and the distinguished center generator.
    """

    spec: DoubleSchemeSpec | TransitionSpec
    pullback: MultCocycle
    exceptional: MultCocycle | None
    charts: tuple[BlownChart, ...]

    @property
    def atlas(self) -> Atlas:
        return self.spec.atlas


def _monomial_exponent(p: LaurentPoly, ring: ExponentMonoid, what: str) -> Exponent:
    mono = p.as_monomial()
    if mono is None:
        raise ValueError(f"{what} must be a single monomial")
    exp, _ = mono
    if not ring.contains(exp):
        raise ValueError(f"{what} lies outside its chart ring")
    return exp


def _center_exponents(
    atlas: Atlas, center: CenterSpec
) -> dict[str, tuple[Exponent, ...]]:
    """Per chart, the exponents of the center generators (default: the unit)."""
    unknown = set(center.generators or ()) - set(atlas.chart_names())
    if unknown:
        raise ValueError(f"center names unknown charts {sorted(unknown)}")
    out = {}
    for chart in atlas.charts:
        listed = (center.generators or {}).get(chart.name)
        if listed is None:
            out[chart.name] = ((0,) * atlas.nvars,)
        else:
            out[chart.name] = tuple(
                _monomial_exponent(
                    g, chart.ring, f"center generator on {chart.name}"
                )
                for g in listed
            )
    return out


def _blown_atlas(
    atlas: Atlas,
    exponents: dict[str, tuple[Exponent, ...]],
    rename: dict[str, str] | None,
) -> tuple[Atlas, tuple[BlownChart, ...]]:
    rename = rename or {}
    nvars = atlas.nvars
    blown: list[BlownChart] = []
    charts: list[Chart] = []
    for chart in atlas.charts:
        for f in exponents[chart.name]:
            auto = f"{chart.name}/D+({monomial_str(f, atlas.variables)})"
            name = rename.get(auto, auto)
            ratios = [
                tuple(a[v] - f[v] for v in range(nvars))
                for a in exponents[chart.name]
            ]
            ring = minimal_generators(
                ExponentMonoid(
                    nvars,
                    tuple(dict.fromkeys(chart.ring.generators + tuple(ratios))),
                )
            )
            blown.append(BlownChart(name, chart.name, f))
            charts.append(Chart(name, ring))
    overlaps = {}
    for a_pos, a in enumerate(blown):
        for b in blown[a_pos + 1:]:
            if a.base == b.base:
                base_gens = atlas.chart(a.base).ring.generators
            else:
                base_gens = atlas.overlap(a.base, b.base).generators
            union = tuple(
                dict.fromkeys(exponents[a.base] + exponents[b.base])
            )
            gens = list(base_gens)
            for f in (a.generator, b.generator):
                gens.extend(
                    tuple(g[v] - f[v] for v in range(nvars)) for g in union
                )
            overlaps[pair_key(a.name, b.name)] = minimal_generators(
                ExponentMonoid(nvars, tuple(dict.fromkeys(gens)))
            )
    new_atlas = Atlas(
        atlas.variables, atlas.truncation_order, tuple(charts), overlaps
    )
    return new_atlas, tuple(blown)


def _ratio_poly(nvars: int, f: Exponent, l: Exponent) -> LaurentPoly:
    return LaurentPoly.monomial(nvars, tuple(a - b for a, b in zip(f, l)))


def _require_valid(spec, label: str) -> None:
    if isinstance(spec, TransitionSpec):
        report = validate_transition_spec(spec)
    else:
        report = validate_double_scheme(spec)
    if not report.ok:
        raise RuntimeError(
            f"{label} produced invalid output: " + "; ".join(report.failures)
        )


# -- reduced centers ----------------------------------------------------


def blowup_reduced(
    spec: DoubleSchemeSpec | TransitionSpec,
    center: CenterSpec,
    rename: dict[str, str] | None = None,
    check: bool = True,
) -> BlowupResult:
    """Blow up along a reduced monomial center.

    Each chart contributes one new chart per center generator; on the new
    pair built over the base pair (i, k) with distinguished generators f and
    l, the bundle cocycle becomes alpha_ik * f/l and the transition morphism
    is conjugated by the corresponding rescalings.
    """
    if center.kind != "reduced":
        raise ValueError("blowup_reduced needs a reduced center")
    atlas = spec.atlas
    exponents = _center_exponents(atlas, center)
    new_atlas, blown = _blown_atlas(atlas, exponents, rename)
    nvars = atlas.nvars
    new_pairs = [
        (blown[i], blown[i + 1]) for i in range(len(blown) - 1)
    ]

    if isinstance(spec, TransitionSpec):
        theta_full = derive_transitions(atlas, spec.transitions)
        order = atlas.truncation_order
        transitions = {}
        pull_data = {}
        exc_data = {}
        alpha_data = {}
        for a, b in new_pairs:
            if a.base == b.base:
                theta = identity_morphism(order, nvars)
            else:
                theta = theta_full[(a.base, b.base)]
            ratio = _ratio_poly(nvars, a.generator, b.generator)
            new_theta = conjugate_chi(
                theta,
                LaurentPoly.monomial(nvars, b.generator),
                TruncElement.from_poly(order - 1, ratio),
            )
            transitions[(a.name, b.name)] = new_theta
            base_alpha = theta.epsilon.coeffs[0]
            pull_data[(a.name, b.name)] = base_alpha
            exc_data[(a.name, b.name)] = ratio
            alpha_data[(a.name, b.name)] = base_alpha * ratio
        new_spec: DoubleSchemeSpec | TransitionSpec = TransitionSpec(
            new_atlas, transitions
        )
    else:
        if atlas.truncation_order != 2:
            raise ValueError(
                "double-scheme data must have truncation order two"
            )
        alpha_full = derive_mult(atlas, spec.alpha)
        d_full = derive_vector_field(atlas, alpha_full, spec.D)
        one = LaurentPoly.const(nvars, 1)
        zero = tuple(LaurentPoly.zero(nvars) for _ in range(nvars))
        alpha_data = {}
        pull_data = {}
        exc_data = {}
        d_data = {}
        for a, b in new_pairs:
            base_alpha = (
                one if a.base == b.base else alpha_full[(a.base, b.base)]
            )
            base_d = zero if a.base == b.base else d_full[(a.base, b.base)]
            ratio = _ratio_poly(nvars, a.generator, b.generator)
            alpha_data[(a.name, b.name)] = base_alpha * ratio
            pull_data[(a.name, b.name)] = base_alpha
            exc_data[(a.name, b.name)] = ratio
            d_data[(a.name, b.name)] = tuple(
                comp.mul_monomial(a.generator) for comp in base_d
            )
        new_spec = DoubleSchemeSpec(
            new_atlas,
            MultCocycle(f"{spec.alpha.name}.blown", alpha_data),
            VectorFieldCocycle(d_data),
        )

    result = BlowupResult(
        new_spec,
        MultCocycle("pullback", pull_data),
        MultCocycle("exceptional", exc_data),
        blown,
    )
    if check:
        _require_valid(new_spec, "blowup_reduced")
    return result


def xi_map(
    spec: DoubleSchemeSpec,
    center: CenterSpec,
    rename: dict[str, str] | None = None,
) -> VectorFieldCocycle:
    """The induced derivation family on the blown-up atlas, all pairs at once.

    Independent route to the derivation part of ``blowup_reduced``: the entry
    over the base pair (i, k) with first-chart generator f is f * D_ik, here
    computed directly on every increasing chart pair and membership-checked
    against the blown-up overlap rings.
    """
    if center.kind != "reduced":
        raise ValueError("xi_map needs a reduced center")
    atlas = spec.atlas
    exponents = _center_exponents(atlas, center)
    new_atlas, blown = _blown_atlas(atlas, exponents, rename)
    nvars = atlas.nvars
    alpha_full = derive_mult(atlas, spec.alpha)
    d_full = derive_vector_field(atlas, alpha_full, spec.D)
    zero = tuple(LaurentPoly.zero(nvars) for _ in range(nvars))
    data = {}
    for a_pos, a in enumerate(blown):
        for b in blown[a_pos + 1:]:
            base_d = zero if a.base == b.base else d_full[(a.base, b.base)]
            comps = tuple(comp.mul_monomial(a.generator) for comp in base_d)
            ring = new_atlas.overlap(a.name, b.name)
            bad = derivation_failures(comps, ring, atlas.variables)
            if bad:
                raise ValueError(
                    f"induced derivation on ({a.name},{b.name}) does not "
                    f"preserve the overlap ring: image of {bad[0]} falls "
                    f"outside"
                )
            data[(a.name, b.name)] = comps
    return VectorFieldCocycle(data)


# -- good centers -------------------------------------------------------


def _coefficient_field(
    atlas: Atlas, chart_name: str,
    pairs: tuple[tuple[LaurentPoly, LaurentPoly], ...],
) -> tuple[LaurentPoly, ...]:
    """The field sum(a_r d/dy_r) in ambient coordinates on the center chart."""
    if atlas.nvars != 2 or len(pairs) != 2:
        raise ValueError(
            "good centers need exactly two coordinates on a two-variable chart"
        )
    ring = atlas.chart(chart_name).ring
    ys = []
    for y, a in pairs:
        _monomial_exponent(y, ring, f"center coordinate on {chart_name}")
        if not poly_in_ring(a, ring):
            raise ValueError(
                f"center coefficient on {chart_name} lies outside the chart "
                f"ring"
            )
        ys.append(y)
    jac = [[y.partial_derivative(v) for v in range(2)] for y in ys]
    det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0]
    mono = det.as_monomial()
    if mono is None:
        raise ValueError(
            "center coordinates must have a monomial Jacobian determinant"
        )
    det_exp, det_coeff = mono
    inv_exp = tuple(-x for x in det_exp)
    inv_coeff = 1 / det_coeff
    a1, a2 = (a for _, a in pairs)
    return (
        (a1 * jac[1][1] - a2 * jac[0][1]).mul_monomial(inv_exp, inv_coeff),
        (a2 * jac[0][0] - a1 * jac[1][0]).mul_monomial(inv_exp, inv_coeff),
    )


def blowup_good(
    spec: DoubleSchemeSpec,
    center: CenterSpec,
    rename: dict[str, str] | None = None,
    check: bool = True,
) -> BlowupResult:
    """Blow up a good zero-dimensional subscheme of a double scheme.

    The chart combinatorics are those of the reduced center (y_1, ..., y_d);
    the bundle cocycle is the plain pullback, and the derivation family is
    the pullback corrected by the coboundary of the coefficient field
    sum(a_r d/dy_r) attached to the center chart.
    """
    if center.kind != "good":
        raise ValueError("blowup_good needs a good center")
    if not isinstance(spec, DoubleSchemeSpec):
        raise ValueError("good centers act on double-scheme data")
    if spec.atlas.truncation_order != 2:
        raise ValueError("double-scheme data must have truncation order two")
    atlas = spec.atlas
    (center_chart, pairs), = center.pairs.items()
    if center_chart not in atlas.chart_names():
        raise ValueError(f"center names unknown chart {center_chart!r}")
    field = _coefficient_field(atlas, center_chart, pairs)
    reduced = CenterSpec(
        "reduced",
        generators={center_chart: tuple(y for y, _ in pairs)},
    )
    exponents = _center_exponents(atlas, reduced)
    new_atlas, blown = _blown_atlas(atlas, exponents, rename)
    nvars = atlas.nvars
    alpha_full = derive_mult(atlas, spec.alpha)
    d_full = derive_vector_field(atlas, alpha_full, spec.D)
    one = LaurentPoly.const(nvars, 1)
    zero = tuple(LaurentPoly.zero(nvars) for _ in range(nvars))

    def rho(base: str) -> tuple[LaurentPoly, ...]:
        if base == center_chart:
            return tuple(-c for c in field)
        return zero

    alpha_data = {}
    d_data = {}
    for pos in range(len(blown) - 1):
        a, b = blown[pos], blown[pos + 1]
        base_alpha = one if a.base == b.base else alpha_full[(a.base, b.base)]
        base_d = zero if a.base == b.base else d_full[(a.base, b.base)]
        rho_a, rho_b = rho(a.base), rho(b.base)
        alpha_data[(a.name, b.name)] = base_alpha
        d_data[(a.name, b.name)] = tuple(
            base_d[v] + rho_a[v] - base_alpha * rho_b[v]
            for v in range(nvars)
        )
    pull = MultCocycle("pullback", alpha_data)
    new_spec = DoubleSchemeSpec(
        new_atlas,
        MultCocycle(f"{spec.alpha.name}.pulled", dict(alpha_data)),
        VectorFieldCocycle(d_data),
    )
    result = BlowupResult(new_spec, pull, None, blown)
    if check:
        _require_valid(new_spec, "blowup_good")
    return result


# -- hypersurface centers -----------------------------------------------


def _hypersurface_equations(
    atlas: Atlas, center: CenterSpec
) -> dict[str, Exponent]:
    if center.kind != "hypersurface":
        raise ValueError("expected a hypersurface center")
    names = atlas.chart_names()
    if set(center.generators or ()) != set(names):
        raise ValueError(
            "a hypersurface center needs one equation on every chart"
        )
    eqs = {
        name: _monomial_exponent(
            center.generators[name][0],
            atlas.chart(name).ring,
            f"hypersurface equation on {name}",
        )
        for name in names
    }
    for pos, i in enumerate(names):
        for j in names[pos + 1:]:
            ring = atlas.overlap(i, j)
            ratio = tuple(a - b for a, b in zip(eqs[i], eqs[j]))
            neg = tuple(-x for x in ratio)
            if not (ring.contains(ratio) and ring.contains(neg)):
                raise ValueError(
                    f"hypersurface equations on ({i},{j}) do not differ by a "
                    f"unit of the overlap ring"
                )
    return eqs


def blowup_hypersurface(
    spec: DoubleSchemeSpec | TransitionSpec,
    center: CenterSpec,
    check: bool = True,
) -> BlowupResult:
    """Blow up along a hypersurface given by compatible monomial equations.

    The atlas is unchanged; transitions are conjugated by the rescalings of
    the local equations, which multiplies the bundle cocycle by x_i/x_j and,
    at truncation order two, the derivation entries by x_i.
    """
    atlas = spec.atlas
    eqs = _hypersurface_equations(atlas, center)
    nvars = atlas.nvars
    pairs = canonical_spanning_pairs(atlas)
    blown = tuple(
        BlownChart(name, name, eqs[name]) for name in atlas.chart_names()
    )

    if isinstance(spec, TransitionSpec):
        order = atlas.truncation_order
        theta_full = derive_transitions(atlas, spec.transitions)
        transitions = {}
        pull_data = {}
        exc_data = {}
        for (i, j) in pairs:
            ratio = _ratio_poly(nvars, eqs[i], eqs[j])
            transitions[(i, j)] = conjugate_chi(
                theta_full[(i, j)],
                LaurentPoly.monomial(nvars, eqs[j]),
                TruncElement.from_poly(order - 1, ratio),
            )
            pull_data[(i, j)] = theta_full[(i, j)].epsilon.coeffs[0]
            exc_data[(i, j)] = ratio
        new_spec: DoubleSchemeSpec | TransitionSpec = TransitionSpec(
            atlas, transitions
        )
    else:
        if atlas.truncation_order != 2:
            raise ValueError(
                "double-scheme data must have truncation order two"
            )
        alpha_full = derive_mult(atlas, spec.alpha)
        d_full = derive_vector_field(atlas, alpha_full, spec.D)
        alpha_data = {}
        pull_data = {}
        exc_data = {}
        d_data = {}
        for (i, j) in pairs:
            ratio = _ratio_poly(nvars, eqs[i], eqs[j])
            alpha_data[(i, j)] = alpha_full[(i, j)] * ratio
            pull_data[(i, j)] = alpha_full[(i, j)]
            exc_data[(i, j)] = ratio
            d_data[(i, j)] = tuple(
                comp.mul_monomial(eqs[i]) for comp in d_full[(i, j)]
            )
        new_spec = DoubleSchemeSpec(
            atlas,
            MultCocycle(f"{spec.alpha.name}.twisted", alpha_data),
            VectorFieldCocycle(d_data),
        )

    result = BlowupResult(
        new_spec,
        MultCocycle("pullback", pull_data),
        MultCocycle("exceptional", exc_data),
        blown,
    )
    if check:
        _require_valid(new_spec, "blowup_hypersurface")
    return result


# -- successive blow-ups ------------------------------------------------


def exceptional_center(result: BlowupResult) -> CenterSpec:
    """The exceptional divisor of a blow-up as a hypersurface center."""
    nvars = result.atlas.nvars
    return CenterSpec(
        "hypersurface",
        generators={
            c.name: (LaurentPoly.monomial(nvars, c.generator),)
            for c in result.charts
        },
    )


def successive_identity_check(
    spec: DoubleSchemeSpec, center: CenterSpec, bound: int = 6
) -> bool:
    """Blowing up a good subscheme then its exceptional divisor matches the
    one-step blow-up of the underlying reduced point, by an identity-scale
    change of trivializations."""
    if center.kind != "good":
        raise ValueError("the successive identity starts from a good center")
    good = blowup_good(spec, center)
    via_good = blowup_hypersurface(good.spec, exceptional_center(good))
    (center_chart, pairs), = center.pairs.items()
    reduced = CenterSpec(
        "reduced", generators={center_chart: tuple(y for y, _ in pairs)}
    )
    direct = blowup_reduced(spec, reduced)
    witness, _report = iso_decide(via_good.spec, direct.spec, bound=bound)
    return witness is not None and witness[0] == 1
