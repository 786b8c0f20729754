import json
import subprocess
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from _gen import K1, R1, R2, random_cocycle, random_point, small_points
from dgmod import io
from dgmod.algebra import koszul, truncated_polynomial
from dgmod.cli import Job, main, run
from dgmod.extensions import same_class
from dgmod.linalg import Field
from dgmod.modules import linear_dual, regular_module, residue_module

SAMPLES = Path(__file__).resolve().parent.parent / "samples"
Q = Field(0)


def _write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(io.dumps(io.to_json(obj)))
    return str(p)


def _cli(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


# -- serialisation --------------------------------------------------------------------

@pytest.mark.parametrize("obj", [R1, K1, R2, regular_module(R2), residue_module(K1), linear_dual(regular_module(R2)),
                                 koszul(truncated_polynomial(Q, 1, 3), [truncated_polynomial(Q, 1, 3).basis_vector(1)])],
                         ids=lambda o: type(o).__name__)
def test_round_trip_is_byte_identical(obj):
    text = io.dumps(io.to_json(obj))
    back = io.load(json.loads(text))
    assert io.dumps(io.to_json(back)) == text
    assert io.dumps(io.to_json(back.complex if hasattr(back, "complex") else back))


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_random_modules_and_extensions_round_trip(seed):
    rng = np.random.default_rng(seed)
    U = [R1, K1, R2][seed % 3]
    m = random_point(U, rng, 4)
    text = io.dumps(io.to_json(m))
    back = io.load(json.loads(text))
    assert np.array_equal(back.d, m.d) and np.array_equal(back.act, m.act) and np.array_equal(back.degs, m.degs)
    e = random_cocycle(m, m, rng)
    e2 = io.load(json.loads(io.dumps(io.to_json(e))))
    assert same_class(e, e2)


def test_rational_coefficients_survive():
    from dgmod.complexes import Complex
    c = Complex(Q, np.array([0, 1]), Q.array([[0, Fraction(-3, 7)], [0, 0]]))
    back = io.load(io.complex_to_json(c))
    assert back.d[0, 1] == Fraction(-3, 7)
    assert io.complex_to_json(c)["differential"] == [[0, 1, "-3/7"]]


def test_presets_expand(tmp_path):
    m = io.load_file(SAMPLES / "omega.json")
    assert m.n == 3 and m.algebra.name == "F2[x,y]/m^2"
    k = io.load_file(SAMPLES / "k.json")
    assert k.n == 1
    data = {"schema": "dgmod/1", "kind": "algebra", "preset": "koszul", "field": "p:2",
            "base": {"schema": "dgmod/1", "kind": "algebra", "preset": "truncated_polynomial", "nvars": 1, "power": 2}}
    assert io.load(data).n == 4
    data = {"schema": "dgmod/1", "kind": "module", "preset": "free", "shifts": [0, 2],
            "algebra": str(SAMPLES / "dual_numbers.json")}
    assert list(io.load(data).degs) == [0, 0, 2, 2]


@pytest.mark.parametrize("bad,match", [
    ({"kind": "widget"}, "kind"),
    ({"schema": "other/9", "kind": "complex", "degrees": []}, "schema"),
    ({"schema": "dgmod/1", "kind": "complex", "field": "p:4", "degrees": [0]}, "field"),
    ({"schema": "dgmod/1", "kind": "complex", "field": "p:2", "degrees": [0], "differential": [[0, 5, "1"]]}, "range"),
    ({"schema": "dgmod/1", "kind": "complex", "field": "q", "degrees": [0, 1], "differential": [[0, 1, "x"]]},
     "coefficient"),
    ({"schema": "dgmod/1", "kind": "algebra", "preset": "nonsense"}, "preset"),
    ({"schema": "dgmod/1", "kind": "complex"}, "degrees"),
])
def test_schema_errors(bad, match):
    with pytest.raises(io.SchemaError, match=match):
        io.load(bad)


# -- command line ------------------------------------------------------------------------

def test_validate_prints_valid(capsys):
    code, out, _ = _cli(capsys, "validate", SAMPLES / "dual_numbers.json")
    assert code == 0 and "verdict: valid" in out


def test_validate_reports_invalid_structures(tmp_path, capsys):
    data = io.to_json(R1)
    data["unit"] = []
    p = tmp_path / "broken.json"
    p.write_text(json.dumps(data))
    code, out, _ = _cli(capsys, "validate", p)
    assert code == 0 and "verdict: invalid" in out


def test_exit_codes(tmp_path, capsys):
    k = SAMPLES / "k.json"
    assert _cli(capsys, "ext", k, k, "--hi", "2")[0] == 0
    code, _, err = _cli(capsys, "ext", k, k, "--hi", "3", "--bound", "1")
    assert code == 1 and "need bound >= 5" in err
    assert _cli(capsys, "validate", tmp_path / "missing.json")[0] == 2
    junk = tmp_path / "junk.json"
    junk.write_text("{not json")
    assert _cli(capsys, "validate", junk)[0] == 2
    assert _cli(capsys, "ext", k)[0] == 2
    assert _cli(capsys, "frobnicate", k)[0] == 2
    assert _cli(capsys, "ext", SAMPLES / "m2.json", k)[0] == 2


def test_json_reports_reparse(capsys):
    k, R = SAMPLES / "k.json", SAMPLES / "dual_numbers.json"
    for argv in (["homology", k], ["ext", k, k], ["tor", k, k], ["betti", k], ["yext1", k, k], ["tangent", k],
                 ["voigt", k], ["orbits", R, "--dims", "2"], ["koszul", R], ["scan-sdm", R]):
        code, out, _ = _cli(capsys, *argv, "--json")
        assert code == 0, argv
        rep = json.loads(out)
        assert rep["verb"] == argv[0]


def test_ext_report_carries_window(capsys):
    k = SAMPLES / "k.json"
    rep = json.loads(_cli(capsys, "ext", k, k, "--lo", "0", "--hi", "3", "--json")[1])
    assert rep["window"] == [0, 3] and rep["bound"] >= 5
    assert rep["dims"] == {"0": 1, "1": 1, "2": 1, "3": 1}


def test_echo_is_byte_identical(tmp_path, capsys):
    for obj in (R2, K1, residue_module(K1), linear_dual(regular_module(R2))):
        p = _write(tmp_path, "x.json", obj)
        code, out, _ = _cli(capsys, "validate", p, "--echo")
        assert code == 0 and out == Path(p).read_text()
        rep = json.loads(_cli(capsys, "validate", p, "--echo", "--json")[1])
        assert io.dumps(rep["echo"]) == Path(p).read_text()


def test_extension_verbs(tmp_path, capsys):
    rng = np.random.default_rng(4)
    k = residue_module(R1)
    e = random_cocycle(k, k, rng)
    p = _write(tmp_path, "e.json", e)
    code, out, _ = _cli(capsys, "is-split", p, "--json")
    assert code == 0
    code, out, _ = _cli(capsys, "baer-sum", p, p, "--json")
    rep = json.loads(out)
    assert code == 0 and rep["agree"]
    summed = io.load(rep["sum"])
    assert json.loads(_cli(capsys, "is-split", _write(tmp_path, "s.json", summed), "--json")[1])["split"]


def test_voigt_on_residue_field(capsys):
    rep = json.loads(_cli(capsys, "voigt", SAMPLES / "k.json", "--json")[1])
    assert rep == {"verb": "voigt", "t_dim": 1, "orbit_dim": 0, "yext_dim": 1, "tau_kernel_dim": 0,
                   "tau_rank": 1, "witnesses_ok": True, "verdict": "equal"}


def test_output_file_and_determinism(tmp_path, capsys):
    R = SAMPLES / "dual_numbers.json"
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["orbits", str(R), "--dims", "2", "--json", "-o", str(a)]) == 0
    assert main(["orbits", str(R), "--dims", "2", "--json", "-o", str(b)]) == 0
    assert a.read_text() == b.read_text()
    rep = json.loads(a.read_text())
    assert rep["points"] == 4 and rep["orbits"] == 2


def test_field_override(capsys):
    code, out, _ = _cli(capsys, "homology", SAMPLES / "k.json", "--field", "p:3", "--json")
    assert code == 0 and json.loads(out)["homology"] == {"0": 1}


def test_run_job_directly():
    code, rep = run(Job("tangent", [str(SAMPLES / "k.json")]))
    assert code == 0 and rep["tangent_dim"] == rep["tangent_dim_jacobian"] == 1
    code, rep = run(Job("ext", [str(SAMPLES / "k.json")] * 2, {"bound": 0}))
    assert code == 2 and "positive" in rep["error"]


def test_console_entry_point():
    out = subprocess.run([sys.executable, "-m", "dgmod.cli", "validate", str(SAMPLES / "m2.json")],
                         capture_output=True, text=True)
    assert out.returncode == 0 and "valid" in out.stdout
