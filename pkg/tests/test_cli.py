"""End-to-end tests of the command-line front end."""

from __future__ import annotations

import json
from fractions import Fraction

import pytest

from pms.atlas import AtlasDocument, dumps_document, loads_document
from pms.blowup import CenterSpec, center_to_json
from pms.cli import main
from pms.laurent_core import LaurentPoly, poly_to_json
from pms.p2_catalog import (
    build_carpet,
    make_p2,
    solve_pullback_family,
    wcover_unit_classes,
)

mono = LaurentPoly.monomial
const = LaurentPoly.const


def write_plane_doc(tmp_path, name="x.json", m=-3, nontrivial=True):
    spec = make_p2(m, nontrivial=nontrivial)
    doc = AtlasDocument(spec.atlas, {spec.alpha.name: spec.alpha}, spec)
    path = tmp_path / name
    path.write_text(dumps_document(doc))
    return path


def write_carpet_doc(tmp_path, alpha, name="w.json", trivial=False):
    spec = build_carpet(alpha, trivial=trivial)
    u, v = wcover_unit_classes()
    doc = AtlasDocument(
        spec.atlas,
        {spec.alpha.name: spec.alpha, u.name: u, v.name: v},
        spec,
    )
    path = tmp_path / name
    path.write_text(dumps_document(doc))
    return path


def write_point_center(tmp_path):
    center = CenterSpec(
        "reduced", generators={"U2": (mono(2, (0, 1)), mono(2, (1, 1)))}
    )
    path = tmp_path / "center.json"
    path.write_text(json.dumps(center_to_json(center)))
    return path


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_carpet_quasiprojective_example(capsys):
    code, out, err = run(
        capsys, "carpet", "--alpha", "3/4", "--query", "quasiprojective"
    )
    assert code == 0
    assert out == '{"answer":"yes","witness":[3,4]}\n'
    code, out, _ = run(
        capsys, "carpet", "--alpha", "-1", "--query", "quasiprojective"
    )
    assert code == 1
    assert json.loads(out)["answer"] == "no"
    code, out, _ = run(
        capsys, "carpet", "--alpha", "symbolic", "--query", "quasiprojective"
    )
    assert code == 1
    assert "al" in json.loads(out)["evidence"]["obstruction_at_0_1"]


def test_carpet_other_queries(capsys):
    code, out, _ = run(
        capsys, "carpet", "--alpha", "1/2", "--query", "decompose",
        "--bound", "4",
    )
    assert code == 0
    parsed = json.loads(out)
    assert parsed["coefficients"] == ["1/1", "1/2"]
    assert parsed["report"]["status"] == "found"
    assert parsed["report"]["caveat"]

    code, out, _ = run(
        capsys, "carpet", "--alpha", "1/2", "--query", "extends", "1", "2"
    )
    assert code == 0
    assert json.loads(out) == {"answer": "yes", "value": "0/1"}
    code, out, _ = run(
        capsys, "carpet", "--alpha", "1/2", "--query", "extends", "1", "1"
    )
    assert code == 1
    assert json.loads(out) == {"answer": "no", "value": "1/2"}

    code, out, _ = run(capsys, "carpet", "--alpha", "1/2", "--query", "lattice")
    assert code == 0
    assert json.loads(out) == {"generator": [1, 2]}

    # usage problems
    assert run(capsys, "carpet", "--alpha", "symbolic", "--query",
               "decompose")[0] == 2
    assert run(capsys, "carpet", "--alpha", "1/2", "--query", "extends",
               "1")[0] == 2
    assert run(capsys, "carpet", "--alpha", "1/2", "--query", "nonsense")[0] == 2


def test_validate_good_and_malformed(tmp_path, capsys):
    path = write_plane_doc(tmp_path)
    code, out, _ = run(capsys, "validate", str(path))
    assert (code, out) == (0, "valid\n")

    bad = tmp_path / "bad.json"
    bad.write_text('{"variables": [,]}')
    code, out, err = run(capsys, "validate", str(bad))
    assert code == 2
    assert "line 1" in err and "column" in err

    missing = tmp_path / "missing.json"
    code, _, err = run(capsys, "validate", str(missing))
    assert code == 2

    # a broken cocycle entry gives a domain failure, not a usage error
    data = json.loads(path.read_text())
    name = data["double_structure"]["alpha"]
    data["cocycles"][name]["U0,U1"] = poly_to_json(mono(2, (2, 2)))
    broken = tmp_path / "broken.json"
    broken.write_text(json.dumps(data))
    code, out, _ = run(capsys, "validate", str(broken))
    assert code == 1
    assert json.loads(out)["ok"] is False
    assert json.loads(out)["failures"]


def test_classify_iso_exit_codes(tmp_path, capsys):
    path = write_plane_doc(tmp_path)
    code, out, _ = run(
        capsys, "classify-iso", str(path), str(path), "--bound", "3"
    )
    assert code == 0
    report = json.loads(out)
    assert report["status"] == "found"
    assert report["witness"]["tau"] == "1/1"

    a = write_carpet_doc(tmp_path, Fraction(0), name="a.json")
    b = write_carpet_doc(tmp_path, Fraction(1), name="b.json")
    code, out, _ = run(capsys, "classify-iso", str(a), str(b), "--bound", "3")
    assert code == 1
    report = json.loads(out)
    assert report["status"] == "none_within_bound"
    assert report["bound"] == 3
    assert report["caveat"]


def test_blowup_round_trip_and_determinism(tmp_path, capsys):
    path = write_plane_doc(tmp_path)
    center = write_point_center(tmp_path)
    code, out, _ = run(
        capsys, "blowup", str(path), "--center", str(center), "--kind",
        "reduced",
    )
    assert code == 0
    again = run(
        capsys, "blowup", str(path), "--center", str(center), "--kind",
        "reduced",
    )
    assert again == (0, out, "")

    blown = tmp_path / "blown.json"
    blown.write_text(out)
    code, text, _ = run(capsys, "validate", str(blown))
    assert (code, text) == (0, "valid\n")
    doc = loads_document(out)
    assert list(doc.atlas.chart_names()) == [
        "U0/D+(1)", "U1/D+(1)", "U2/D+(mu)", "U2/D+(lam*mu)"
    ]
    assert {"pullback", "exceptional"} <= set(doc.cocycles)

    # the declared kind must match the center file
    code, _, err = run(
        capsys, "blowup", str(path), "--center", str(center), "--kind", "good"
    )
    assert code == 2
    assert "kind" in err


def test_blowup_hypersurface_via_cli(tmp_path, capsys):
    path = write_plane_doc(tmp_path)
    center = CenterSpec(
        "hypersurface",
        generators={
            "U0": (mono(2, (-1, 0)),),
            "U1": (const(2, 1),),
            "U2": (mono(2, (0, 1)),),
        },
    )
    cpath = tmp_path / "line.json"
    cpath.write_text(json.dumps(center_to_json(center)))
    code, out, _ = run(
        capsys, "blowup", str(path), "--center", str(cpath), "--kind",
        "hypersurface",
    )
    assert code == 0
    doc = loads_document(out)
    assert list(doc.atlas.chart_names()) == ["U0", "U1", "U2"]
    blown = tmp_path / "twisted.json"
    blown.write_text(out)
    assert run(capsys, "validate", str(blown))[0] == 0


def test_family_matches_library(capsys):
    code, out, _ = run(
        capsys, "family", "--m", "-3", "--p", "1", "--ansatz-bound", "4"
    )
    assert code == 0
    parsed = json.loads(out)
    direct = solve_pullback_family(-3, 1, ansatz_bound=4)
    assert parsed["parameter_dim"] == direct.parameter_dim == 1
    assert parsed["free_parameters"] == list(direct.free_parameters)
    assert parsed["caveat"]


def test_gamma_queries(capsys):
    code, out, _ = run(capsys, "gamma", "--coeffs", "1/2,0", "--query", "delta")
    assert code == 0
    assert json.loads(out)["tangent"] == ["1/2", "0/1"]

    code, out, _ = run(
        capsys, "gamma", "--coeffs", "1,0", "--query", "iso-with", "1,0",
        "--bound", "3",
    )
    assert code == 0
    assert json.loads(out)["answer"] == "yes"
    code, out, _ = run(
        capsys, "gamma", "--coeffs", "1,0", "--query", "iso-with", "0,1",
        "--bound", "3",
    )
    assert code == 1
    parsed = json.loads(out)
    assert parsed == {
        "answer": "no", "bound": 3, "caveat": parsed["caveat"]
    }
    # over the trivial structure proportional invariants become isomorphic
    code, out, _ = run(
        capsys, "gamma", "--coeffs", "1,0", "--query", "iso-with", "2,0",
        "--trivial", "--bound", "3",
    )
    assert code == 0
    # with the full evaluation space at m=0 every pair matches
    code, out, _ = run(
        capsys, "gamma", "--coeffs", "1,0", "--query", "iso-with", "0,1",
        "--m", "0", "--bound", "3",
    )
    assert code == 0

    assert run(capsys, "gamma", "--coeffs", "1,0", "--query", "iso-with")[0] == 2
    assert run(capsys, "gamma", "--coeffs", "1", "--query", "delta")[0] == 2
    assert run(capsys, "gamma", "--coeffs", "x,y", "--query", "delta")[0] == 2


def test_cohomology_ops(tmp_path, capsys):
    path = write_carpet_doc(tmp_path, Fraction(1, 2))
    u, v = (c.name for c in wcover_unit_classes())

    values = {}
    for a, b in ((u, u), (u, v), (v, v)):
        code, out, _ = run(
            capsys, "cohomology", str(path), "--op", "residue",
            "--bundle", a, "--with", b,
        )
        assert code == 0
        values[(a, b)] = json.loads(out)["value"]
    assert values == {(u, u): "1/1", (u, v): "0/1", (v, v): "-1/1"}

    code, out, _ = run(
        capsys, "cohomology", str(path), "--op", "cup",
        "--bundle", u, "--with", v,
    )
    assert code == 0
    triples = json.loads(out)["triples"]
    assert sorted(triples) == [
        "W0,W1,W2", "W0,W1,W3", "W0,W2,W3", "W1,W2,W3"
    ]

    code, out, _ = run(
        capsys, "cohomology", str(path), "--op", "obstruction", "--bundle", u
    )
    assert code == 0
    assert json.loads(out) == {"value": "1/1"}

    # the half-integer ribbon class is not a coboundary
    code, out, _ = run(
        capsys, "cohomology", str(path), "--op", "coboundary", "--bound", "3"
    )
    assert code == 1
    assert json.loads(out)["status"] == "none_within_bound"
    assert json.loads(out)["bound"] == 3

    # the zero class written in trivialized form is
    trivial = write_carpet_doc(
        tmp_path, Fraction(0), name="trivial.json", trivial=True
    )
    code, out, _ = run(
        capsys, "cohomology", str(trivial), "--op", "coboundary",
        "--bound", "3",
    )
    assert code == 0
    assert json.loads(out)["status"] == "found"

    # unknown cocycle names are usage errors
    code, _, err = run(
        capsys, "cohomology", str(path), "--op", "residue",
        "--bundle", "nope", "--with", u,
    )
    assert code == 2
    assert "unknown cocycle" in err


def test_unknown_verbs_and_flags_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["nonsense"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["validate"])  # missing required positional
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["carpet", "--alpha", "1/2", "--query", "lattice", "--wat"])
    assert exc.value.code == 2
