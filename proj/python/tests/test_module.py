import math
import pathlib
import shutil

import pytest

import gamacro

ROOT = pathlib.Path(__file__).resolve().parents[2]
STDLIB = ROOT / "stdlib"


@pytest.fixture(scope="module")
def stdlib():
    p = gamacro.Project(str(STDLIB))
    assert p.ok, p.diagnostics
    return p


def test_listing(stdlib):
    assert {"e3d", "cga5d", "p4d"} <= set(stdlib.frames)
    assert "GetNormalToVectors" in stdlib.macros
    assert "Vector3D" in stdlib.bindings
    name, frame, blades = stdlib.inputs("GetNormalToVectors")[0]
    assert (name, frame, len(blades)) == ("u", "e3d", 8)
    assert stdlib.outputs("CgaPoint")[0][:2] == ("p", "cga5d")


def test_cross_product_body(stdlib):
    binds = [(f"{mv}.e{i + 1}", f"<{mv}.{c}>") for mv in "uv" for i, c in enumerate("xyz")]
    binds += [(f"w.e{i + 1}", f"<w{c}>") for i, c in enumerate("xyz")]
    r = stdlib.generate("GetNormalToVectors", binds)
    assert r["ok"]
    assert r["body"] == "wx = u.y*v.z - u.z*v.y\nwy = -u.x*v.z + u.z*v.x\nwz = u.x*v.y - u.y*v.x\n"
    assert r["assignments"] == 3 and r["temporaries"] == 0
    env = {"u.x": 1, "u.y": 2, "u.z": 3, "v.x": -4, "v.y": 5, "v.z": 0.5}
    out = gamacro.interpret(r["body"], env)
    assert out["wx"] == pytest.approx(2 * 0.5 - 3 * 5)
    assert out["wz"] == pytest.approx(1 * 5 - 2 * -4)


def test_csharp_dialect(stdlib):
    r = stdlib.generate("Julia3", dialect="csharp")
    assert r["ok"]
    assert all(line.endswith(";") for line in r["body"].splitlines())


def test_every_macro_verifies(stdlib):
    for name in stdlib.macros:
        report = stdlib.verify(name, samples=50, seed=3)
        assert report["pass"], (name, report)


def test_oracle_run(stdlib):
    p = stdlib.run("CgaPoint", {"x": {"e1": 1.0}})["p"]
    assert p == {"e0": 1.0, "e1": 1.0, "einf": 0.5}
    z, c = complex(0.3, -0.7), complex(-0.1, 0.2)
    y = stdlib.run("Julia3", {"x": {"e1": z.real, "e2": z.imag}, "c": {"e1": c.real, "e2": c.imag}})["y"]
    want = z**3 + c
    assert math.isclose(y["e1"], want.real, abs_tol=1e-12)
    assert math.isclose(y["e2"], want.imag, abs_tol=1e-12)


def test_errors_carry_codes(stdlib, tmp_path):
    with pytest.raises(gamacro.GamacroError) as e:
        stdlib.generate("NoSuchMacro")
    assert e.value.code == "UnknownMacroName"
    with pytest.raises(gamacro.GamacroError) as e:
        stdlib.generate("Julia3", dialect="fortran")
    assert e.value.code == "UnknownDialect"
    (tmp_path / "frames.gmac").write_text("define frame f3 as\n  basis: {e1; e2; e3}\n  Euclidean\nend frame\n")
    (tmp_path / "subspaces.gmac").write_text("define subspace nosuch.Vectors as basis {e1} end subspace\n")
    broken = gamacro.Project(str(tmp_path))
    assert not broken.ok
    assert broken.diagnostics[0]["code"] == "UnknownFrame"


def test_project_commands(tmp_path):
    src = ROOT / "example_projects" / "cross_product"
    work = tmp_path / "cross_product"
    shutil.copytree(src, work)
    assert gamacro.check(work / "gamacro.conf")["ok"]
    r = gamacro.generate(work / "gamacro.conf", mirror=tmp_path / "mirror", jobs=1)
    assert r["ok"] and r["stats"]["binding_points"] == 1
    assert (tmp_path / "mirror" / "src" / "Normals.cs").read_text() == (src / "src" / "Normals.cs").read_text()
    v = gamacro.verify(work / "gamacro.conf", samples=100)
    assert v["ok"] and v["points"][0]["status"] == "pass"
