"""Chart atlases, transition cocycles, and double-scheme data.

An atlas lists the variables, the ordinary charts (each a monoid ring inside
the Laurent ring), and the pairwise overlap rings.  A multiplicative cocycle
(line-bundle transition data) assigns an invertible monomial to chart pairs;
a vector-field cocycle assigns a tuple of Laurent coefficients (one per
variable) to chart pairs and transforms with a multiplicative twist:

    D_ik = D_ij + alpha_ij * D_jk.

Both kinds of cocycle are stored on a connected spanning set of ordered pairs
and derived to all ordered pairs along a spanning tree; validation checks the
derived family against every supplied entry, the triple identities, and
membership: bundle entries must be units of the overlap ring, and a
vector-field entry must map the overlap ring into itself (it suffices to
check the image of each monoid generator).

A double-scheme description is an atlas, a distinguished bundle cocycle, and
a twisted vector-field cocycle; its order-two transition endomorphisms feed
the truncated-ring calculus.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

from .laurent_core import (
    ExponentMonoid,
    LaurentPoly,
    Rational,
    format_rational,
    monomial_str,
    monoids_equal,
    parse_rational,
    poly_from_json,
    poly_to_json,
)
from .truncated_ring import RingMorphism, TruncElement, identity_morphism

Pair = tuple[str, str]


def pair_key(a: str, b: str) -> Pair:
    """Unordered pair key: the two names sorted."""
    if a == b:
        raise ValueError(f"overlap of a chart with itself: {a!r}")
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True)
class Chart:
    name: str
    ring: ExponentMonoid

    def __post_init__(self):
        if not self.name or "," in self.name:
            raise ValueError(f"bad chart name {self.name!r}")


@dataclass
class Atlas:
    variables: tuple[str, ...]
    truncation_order: int
    charts: tuple[Chart, ...]
    overlaps: dict[Pair, ExponentMonoid]
    frames: dict[str, LaurentPoly] | None = None
    residue_scale: Rational | None = None

    def __post_init__(self):
        self.variables = tuple(self.variables)
        self.charts = tuple(self.charts)
        if self.truncation_order < 2:
            raise ValueError("truncation order must be at least 2")
        names = [c.name for c in self.charts]
        if len(set(names)) != len(names):
            raise ValueError("duplicate chart names")
        if len(self.charts) < 2:
            raise ValueError("an atlas needs at least two charts")
        nvars = len(self.variables)
        for c in self.charts:
            if c.ring.nvars != nvars:
                raise ValueError(f"chart {c.name} has wrong variable count")
        expected = {
            pair_key(a, b)
            for i, a in enumerate(names)
            for b in names[i + 1:]
        }
        if set(self.overlaps) != expected:
            missing = expected - set(self.overlaps)
            extra = set(self.overlaps) - expected
            raise ValueError(
                f"overlap table mismatch: missing {sorted(missing)}, "
                f"unknown {sorted(extra)}"
            )
        for key, ring in self.overlaps.items():
            if ring.nvars != nvars:
                raise ValueError(f"overlap {key} has wrong variable count")
        if self.frames is not None:
            for name, frame in self.frames.items():
                if name not in names:
                    raise ValueError(f"frame for unknown chart {name!r}")
                if frame.as_monomial() is None:
                    raise ValueError(f"frame of {name} must be a monomial")

    @property
    def nvars(self) -> int:
        return len(self.variables)

    def chart_names(self) -> list[str]:
        return [c.name for c in self.charts]

    def chart(self, name: str) -> Chart:
        for c in self.charts:
            if c.name == name:
                return c
        raise KeyError(f"no chart named {name!r}")

    def overlap(self, a: str, b: str) -> ExponentMonoid:
        return self.overlaps[pair_key(a, b)]

    def frame(self, name: str) -> LaurentPoly:
        if self.frames is None or name not in self.frames:
            raise ValueError(f"atlas carries no top-form frame for {name!r}")
        return self.frames[name]

    def structure_failures(self) -> list[str]:
        """Check that every overlap ring contains both chart rings."""
        out = []
        for c in self.charts:
            for d in self.charts:
                if c.name >= d.name:
                    continue
                ov = self.overlap(c.name, d.name)
                for side in (c, d):
                    for g in side.ring.generators:
                        if not ov.contains(g):
                            out.append(
                                f"overlap {c.name},{d.name} does not contain "
                                f"generator {list(g)} of chart {side.name}"
                            )
        return out


@dataclass
class MultCocycle:
    """Transition data of a line bundle: invertible monomials on chart pairs."""

    name: str
    data: dict[Pair, LaurentPoly]

    def __post_init__(self):
        for (i, j), entry in self.data.items():
            if i == j:
                raise ValueError(f"cocycle entry on equal charts {i!r}")
            if entry.as_monomial() is None:
                raise ValueError(
                    f"cocycle {self.name} entry on ({i},{j}) is not a single "
                    f"monomial term"
                )


@dataclass
class VectorFieldCocycle:
    """Twisted vector-field data: per chart pair, one coefficient per variable."""

    data: dict[Pair, tuple[LaurentPoly, ...]]

    def __post_init__(self):
        self.data = {
            key: tuple(comps) for key, comps in self.data.items()
        }
        for (i, j), comps in self.data.items():
            if i == j:
                raise ValueError(f"cocycle entry on equal charts {i!r}")
            nv = {c.nvars for c in comps}
            if len(nv) != 1 or len(comps) != comps[0].nvars:
                raise ValueError(
                    f"entry on ({i},{j}) must have one coefficient per variable"
                )


@dataclass
class DoubleSchemeSpec:
    """A double scheme: atlas, bundle cocycle, and twisted derivation family."""

    atlas: Atlas
    alpha: MultCocycle
    D: VectorFieldCocycle


@dataclass
class ValidationReport:
    ok: bool
    failures: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"ok": self.ok, "failures": list(self.failures)}


# -- derivation of full cocycle families --------------------------------


def _spanning_tree(names: list[str], edges: set[Pair]) -> dict[str, list[str]]:
    """BFS tree as a parent->path map; raises if the pair graph is disconnected."""
    adj: dict[str, set[str]] = {n: set() for n in names}
    for i, j in edges:
        if i in adj and j in adj:
            adj[i].add(j)
            adj[j].add(i)
    root = names[0]
    paths: dict[str, list[str]] = {root: [root]}
    queue = [root]
    while queue:
        cur = queue.pop(0)
        for nxt in sorted(adj[cur]):
            if nxt not in paths:
                paths[nxt] = paths[cur] + [nxt]
                queue.append(nxt)
    missing = [n for n in names if n not in paths]
    if missing:
        raise ValueError(
            f"cocycle data does not connect charts {missing} to {root}"
        )
    return paths


def derive_mult(atlas: Atlas, c: MultCocycle) -> dict[Pair, LaurentPoly]:
    """All ordered-pair entries from spanning data, via chart potentials."""
    names = atlas.chart_names()
    lookup: dict[Pair, LaurentPoly] = {}
    for (i, j), entry in c.data.items():
        lookup[(i, j)] = entry
        lookup.setdefault((j, i), entry.power(-1))
    paths = _spanning_tree(names, set(lookup))
    pot: dict[str, LaurentPoly] = {}
    for name in names:
        value = LaurentPoly.const(atlas.nvars, 1)
        path = paths[name]
        for a, b in zip(path, path[1:]):
            value = value * lookup[(a, b)]
        pot[name] = value
    full: dict[Pair, LaurentPoly] = {}
    for i in names:
        inv_i = pot[i].power(-1)
        for j in names:
            if i != j:
                full[(i, j)] = inv_i * pot[j]
    return full


def derive_vector_field(
    atlas: Atlas, alpha_full: dict[Pair, LaurentPoly], D: VectorFieldCocycle
) -> dict[Pair, tuple[LaurentPoly, ...]]:
    """All ordered-pair entries of a twisted vector-field cocycle.

    Uses the reversal rule D_ji = -alpha_ji * D_ij and the twisted chain rule
    along spanning-tree paths.
    """
    names = atlas.chart_names()
    lookup: dict[Pair, tuple[LaurentPoly, ...]] = {}
    for (i, j), comps in D.data.items():
        lookup[(i, j)] = comps
        if (j, i) not in D.data:
            back = alpha_full[(j, i)]
            lookup[(j, i)] = tuple(-(back * c) for c in comps)
    paths = _spanning_tree(names, set(lookup))
    zero = tuple(LaurentPoly.zero(atlas.nvars) for _ in atlas.variables)

    def chain(i: str, k: str) -> tuple[LaurentPoly, ...]:
        # walk i -> root -> k along tree paths; contract the common prefix
        pi, pk = paths[i][::-1], paths[k]  # i..root, root..k
        while len(pi) > 1 and len(pk) > 1 and pi[-2] == pk[1]:
            pi = pi[:-1]
            pk = pk[1:]
        route = pi + pk[1:]
        total = list(zero)
        for a, b in zip(route, route[1:]):
            twist = (
                LaurentPoly.const(atlas.nvars, 1)
                if a == i
                else alpha_full[(i, a)]
            )
            for v, comp in enumerate(lookup[(a, b)]):
                total[v] = total[v] + twist * comp
        return tuple(total)

    full: dict[Pair, tuple[LaurentPoly, ...]] = {}
    for i in names:
        for k in names:
            if i != k:
                full[(i, k)] = chain(i, k)
    return full


# -- validation ---------------------------------------------------------


def validate_mult_cocycle(atlas: Atlas, c: MultCocycle) -> ValidationReport:
    failures: list[str] = []
    try:
        full = derive_mult(atlas, c)
    except ValueError as exc:
        return ValidationReport(False, [str(exc)])
    for (i, j), entry in c.data.items():
        if full[(i, j)] != entry:
            failures.append(
                f"cocycle {c.name}: entry on ({i},{j}) is inconsistent with "
                f"the rest of the data"
            )
    names = atlas.chart_names()
    for i in names:
        for j in names:
            for k in names:
                if len({i, j, k}) == 3:
                    if full[(i, j)] * full[(j, k)] != full[(i, k)]:
                        failures.append(
                            f"cocycle {c.name}: triple identity fails on "
                            f"({i},{j},{k})"
                        )
    for (i, j), entry in full.items():
        if i > j:
            continue
        ring = atlas.overlap(i, j)
        exp, _ = entry.as_monomial()
        neg = tuple(-x for x in exp)
        if not (ring.contains(exp) and ring.contains(neg)):
            failures.append(
                f"cocycle {c.name}: entry {monomial_str(exp, atlas.variables)}"
                f" on ({i},{j}) is not a unit of the overlap ring"
            )
    return ValidationReport(not failures, failures)


def derivation_failures(
    comps: tuple[LaurentPoly, ...], ring: ExponentMonoid,
    variables: tuple[str, ...],
) -> list[str]:
    """Generators of ``ring`` not preserved by sum(comps[v] * d/dv)."""
    bad = []
    nvars = len(variables)
    for g in ring.generators:
        image = LaurentPoly.zero(nvars)
        for v in range(nvars):
            if g[v] == 0:
                continue
            shift = list(g)
            shift[v] -= 1
            image = image + comps[v].mul_monomial(tuple(shift), g[v])
        if not all(ring.contains(e) for e in image.support()):
            bad.append(monomial_str(g, variables))
    return bad


def validate_derivation_cocycle(spec: DoubleSchemeSpec) -> ValidationReport:
    atlas = spec.atlas
    alpha_report = validate_mult_cocycle(atlas, spec.alpha)
    if not alpha_report.ok:
        return ValidationReport(
            False, ["bundle cocycle invalid"] + alpha_report.failures
        )
    failures: list[str] = []
    alpha_full = derive_mult(atlas, spec.alpha)
    try:
        full = derive_vector_field(atlas, alpha_full, spec.D)
    except ValueError as exc:
        return ValidationReport(False, [str(exc)])
    for (i, j), comps in spec.D.data.items():
        if full[(i, j)] != comps:
            failures.append(
                f"vector-field entry on ({i},{j}) is inconsistent with the "
                f"rest of the data"
            )
    for (i, j), comps in full.items():
        if i > j:
            continue
        ring = atlas.overlap(i, j)
        for g in derivation_failures(comps, ring, atlas.variables):
            failures.append(
                f"vector-field entry on ({i},{j}) does not preserve the "
                f"overlap ring: image of {g} falls outside"
            )
    return ValidationReport(not failures, failures)


def validate_double_scheme(spec: DoubleSchemeSpec) -> ValidationReport:
    failures = spec.atlas.structure_failures()
    report = validate_derivation_cocycle(spec)
    failures.extend(report.failures)
    return ValidationReport(not failures, failures)


def same_structure(a: Atlas, b: Atlas) -> bool:
    """Equality of variables, order, charts, and overlaps (frames may differ).

    Chart and overlap rings are compared as monoids, so two presentations of
    the same ring by different generator lists still count as equal.
    """
    if (
        a.variables != b.variables
        or a.truncation_order != b.truncation_order
        or a.chart_names() != b.chart_names()
    ):
        return False
    return all(
        monoids_equal(ca.ring, cb.ring)
        for ca, cb in zip(a.charts, b.charts)
    ) and all(
        monoids_equal(a.overlaps[key], b.overlaps[key]) for key in a.overlaps
    )


# -- transition endomorphisms ------------------------------------------


def transition_endomorphism(spec: DoubleSchemeSpec, i: str, j: str) -> RingMorphism:
    """Order-two endomorphism: v -> v + D_ij(v) t, t -> alpha_ij t."""
    atlas = spec.atlas
    n = atlas.truncation_order
    if n != 2:
        raise ValueError("transition endomorphisms need truncation order 2")
    nvars = atlas.nvars
    if i == j:
        return identity_morphism(2, nvars)
    alpha_full = derive_mult(atlas, spec.alpha)
    full = derive_vector_field(atlas, alpha_full, spec.D)
    comps = full[(i, j)]
    images = tuple(
        TruncElement(2, (LaurentPoly.var(nvars, v), comps[v]))
        for v in range(nvars)
    )
    eps = TruncElement(1, (alpha_full[(i, j)],))
    return RingMorphism(2, images, eps)


# -- bundle operations --------------------------------------------------


def canonical_spanning_pairs(atlas: Atlas) -> list[Pair]:
    names = atlas.chart_names()
    return [(a, b) for a, b in zip(names, names[1:])]


def bundle_ops(
    atlas: Atlas, op: str, a: MultCocycle, b: MultCocycle | None = None,
    k: int | None = None,
) -> MultCocycle:
    """Tensor, dual, and integer powers of bundle cocycles."""
    full_a = derive_mult(atlas, a)
    pairs = canonical_spanning_pairs(atlas)
    if op == "tensor":
        if b is None:
            raise ValueError("tensor needs two cocycles")
        full_b = derive_mult(atlas, b)
        data = {p: full_a[p] * full_b[p] for p in pairs}
        return MultCocycle(f"{a.name}*{b.name}", data)
    if op == "dual":
        data = {p: full_a[p].power(-1) for p in pairs}
        return MultCocycle(f"{a.name}^-1", data)
    if op == "power":
        if k is None:
            raise ValueError("power needs an integer exponent")
        data = {p: full_a[p].power(k) for p in pairs}
        return MultCocycle(f"{a.name}^{k}", data)
    raise ValueError(f"unknown bundle operation {op!r}")


# -- serialization ------------------------------------------------------


@dataclass
class AtlasDocument:
    """An atlas together with named bundle cocycles and optional double data."""

    atlas: Atlas
    cocycles: dict[str, MultCocycle] = field(default_factory=dict)
    double: DoubleSchemeSpec | None = None

    def __post_init__(self):
        for name, c in self.cocycles.items():
            if c.name != name:
                raise ValueError("cocycle name key mismatch")
        if self.double is not None:
            if self.double.alpha.name not in self.cocycles:
                raise ValueError(
                    "double structure references an unknown cocycle "
                    f"{self.double.alpha.name!r}"
                )


def _monoid_to_json(m: ExponentMonoid) -> list[list[int]]:
    return [list(g) for g in m.generators]


def _monoid_from_json(data, nvars: int) -> ExponentMonoid:
    if not isinstance(data, list):
        raise ValueError("monoid generators must be a list")
    return ExponentMonoid(nvars, tuple(tuple(int(x) for x in g) for g in data))


def document_to_json(doc: AtlasDocument) -> dict:
    atlas = doc.atlas
    out: dict = {
        "variables": list(atlas.variables),
        "truncation_order": atlas.truncation_order,
        "charts": [
            {"name": c.name, "monoid_generators": _monoid_to_json(c.ring)}
            for c in atlas.charts
        ],
        "overlaps": {
            f"{i},{j}": _monoid_to_json(ring)
            for (i, j), ring in sorted(atlas.overlaps.items())
        },
        "cocycles": {
            name: {
                f"{i},{j}": poly_to_json(entry)
                for (i, j), entry in sorted(c.data.items())
            }
            for name, c in sorted(doc.cocycles.items())
        },
    }
    if doc.double is not None:
        out["double_structure"] = {
            "alpha": doc.double.alpha.name,
            "D": {
                f"{i},{j}": [poly_to_json(comp) for comp in comps]
                for (i, j), comps in sorted(doc.double.D.data.items())
            },
        }
    if atlas.frames is not None:
        out["frames"] = {
            name: poly_to_json(frame)
            for name, frame in sorted(atlas.frames.items())
        }
    if atlas.residue_scale is not None:
        out["residue_scale"] = format_rational(atlas.residue_scale)
    return out


def _split_pair(key: str) -> Pair:
    parts = key.split(",")
    if len(parts) != 2 or not all(parts):
        raise ValueError(f"malformed chart pair key {key!r}")
    return parts[0], parts[1]


def document_from_json(data: dict) -> AtlasDocument:
    if not isinstance(data, dict):
        raise ValueError("atlas document must be a JSON object")
    for key in ("variables", "truncation_order", "charts", "overlaps"):
        if key not in data:
            raise ValueError(f"atlas document is missing {key!r}")
    variables = tuple(str(v) for v in data["variables"])
    nvars = len(variables)
    order = int(data["truncation_order"])
    charts = []
    for item in data["charts"]:
        if "name" not in item or "monoid_generators" not in item:
            raise ValueError("chart entries need name and monoid_generators")
        charts.append(
            Chart(str(item["name"]), _monoid_from_json(item["monoid_generators"], nvars))
        )
    overlaps = {
        _split_pair(key): _monoid_from_json(val, nvars)
        for key, val in data["overlaps"].items()
    }
    frames = None
    if "frames" in data:
        frames = {
            str(name): poly_from_json(val, nvars)
            for name, val in data["frames"].items()
        }
    scale = None
    if "residue_scale" in data:
        scale = parse_rational(str(data["residue_scale"]))
    atlas = Atlas(variables, order, tuple(charts), overlaps, frames, scale)

    cocycles = {}
    for name, entries in data.get("cocycles", {}).items():
        cdata = {
            _split_pair(key): poly_from_json(val, nvars)
            for key, val in entries.items()
        }
        cocycles[str(name)] = MultCocycle(str(name), cdata)

    double = None
    if "double_structure" in data:
        ds = data["double_structure"]
        if "alpha" not in ds or "D" not in ds:
            raise ValueError("double_structure needs alpha and D")
        alpha_name = str(ds["alpha"])
        if alpha_name not in cocycles:
            raise ValueError(
                f"double_structure references unknown cocycle {alpha_name!r}"
            )
        ddata = {}
        for key, comps in ds["D"].items():
            if not isinstance(comps, list) or len(comps) != nvars:
                raise ValueError(
                    f"vector-field entry {key!r} needs one coefficient per variable"
                )
            ddata[_split_pair(key)] = tuple(
                poly_from_json(c, nvars) for c in comps
            )
        double = DoubleSchemeSpec(
            atlas, cocycles[alpha_name], VectorFieldCocycle(ddata)
        )
    return AtlasDocument(atlas, cocycles, double)


def dumps_document(doc: AtlasDocument) -> str:
    return json.dumps(document_to_json(doc), sort_keys=True, indent=1) + "\n"


def loads_document(text: str) -> AtlasDocument:
    return document_from_json(json.loads(text))
