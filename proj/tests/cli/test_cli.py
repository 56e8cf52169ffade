import json
import os
import subprocess
from pathlib import Path

ROOT = Path(__file__).resolve().parents[2]

FRAMES = "define frame e3d as basis: {e1; e2; e3} Euclidean end frame\n"


def run(gamacro, *args, env=None):
    full_env = dict(os.environ, **(env or {}))
    return subprocess.run([gamacro, *args], capture_output=True, text=True, env=full_env)


def lines(out):
    return [json.loads(l) for l in out.splitlines() if l.strip()]


def project(tmp_path, files, conf="dsl_dir = dsl\nsources = src/*.txt\n"):
    (tmp_path / "dsl").mkdir()
    (tmp_path / "src").mkdir()
    for name, text in files.items():
        (tmp_path / name).write_text(text)
    (tmp_path / "gamacro.conf").write_text(conf)
    return str(tmp_path / "gamacro.conf")


def test_check_clean_stdlib(gamacro):
    r = run(gamacro, "check", "--project", str(ROOT / "stdlib" / "gamacro.conf"))
    assert r.returncode == 0, r.stdout
    assert r.stdout == ""


def test_unknown_frame_reports_span(gamacro, tmp_path):
    conf = project(tmp_path, {
        "dsl/frames.gmac": FRAMES,
        "dsl/subspaces.gmac": "\ndefine subspace e3x.Vectors as basis {e1} end subspace\n",
    })
    r = run(gamacro, "check", "--project", conf)
    assert r.returncode == 1
    [d] = lines(r.stdout)
    assert d["code"] == "UnknownFrame"
    assert d["file"].endswith("subspaces.gmac")
    assert d["line"] == 2 and d["col"] >= 1
    assert set(d) >= {"file", "line", "col", "end_line", "end_col", "severity", "code", "message"}


def test_cyclic_macro(gamacro, tmp_path):
    conf = project(tmp_path, {
        "dsl/frames.gmac": FRAMES,
        "dsl/macros.gmac": "define macro M as inputs: {u as e3d.Multivector} outputs: {w as e3d.Multivector}\n"
                           "  performs: call M {u : u; w : w} end macro\n",
    })
    r = run(gamacro, "check", "--project", conf)
    assert r.returncode == 1
    assert lines(r.stdout)[0]["code"] == "CyclicMacroCall"


def test_generate_twice_is_byte_identical(gamacro, cross_project):
    conf = str(cross_project / "gamacro.conf")
    src = cross_project / "src" / "Normals.cs"
    r1 = run(gamacro, "generate", "--project", conf)
    first = src.read_bytes()
    r2 = run(gamacro, "generate", "--project", conf)
    assert r1.returncode == 0 and r2.returncode == 0
    assert src.read_bytes() == first
    stats = lines(r2.stdout)[-1]["stats"]
    assert stats["binding_points"] == 1
    assert stats["assignments"] == 3
    assert stats["temporaries"] == 0
    assert stats["files_changed"] == 0


def test_missing_macro_leaves_file_untouched(gamacro, cross_project):
    src = cross_project / "src" / "Normals.cs"
    text = src.read_text().replace("GMac : GetNormalToVectors", "GMac : NoSuchMacro")
    text = text.replace("wx = u.y*v.z - u.z*v.y;", "wx = 42;")
    src.write_text(text)
    r = run(gamacro, "generate", "--project", str(cross_project / "gamacro.conf"))
    assert r.returncode == 1
    assert lines(r.stdout)[0]["code"] == "UnknownMacroName"
    assert src.read_text() == text


def test_corrupted_block_fails_verify(gamacro, cross_project):
    conf = str(cross_project / "gamacro.conf")
    assert run(gamacro, "verify", "--project", conf).returncode == 0
    src = cross_project / "src" / "Normals.cs"
    src.write_text(src.read_text().replace("wx = u.y*v.z - u.z*v.y;", "wx = u.y*v.z + u.z*v.y;"))
    r = run(gamacro, "verify", "--project", conf)
    assert r.returncode == 1
    report = lines(r.stdout)[0]
    assert report["status"] == "fail"
    assert report["failures"] > 0


def test_missing_block_fails_verify(gamacro, tmp_path):
    conf = project(tmp_path, {
        "dsl/frames.gmac": FRAMES,
        "dsl/macros.gmac": "define macro Id as inputs: {u as e3d.Multivector} outputs: {w as e3d.Multivector}\n"
                           "  performs: w = u; end macro\n",
        "src/a.txt": '// GMac : Id\n// GMac.Bind("u.e1", "<x>")\n// GMac.Bind("w.e1", "<y>")\n// GMac end\n',
    })
    r = run(gamacro, "verify", "--project", conf)
    assert r.returncode == 1
    assert lines(r.stdout)[0]["message"] == "no generated block"


def test_seeded_verify_is_deterministic(gamacro, tmp_path):
    conf = str(ROOT / "example_projects" / "plucker_kernel" / "gamacro.conf")
    a = run(gamacro, "verify", "--project", conf, "--seed", "9", "--jobs", "3")
    b = run(gamacro, "verify", "--project", conf, "--seed", "9", "--jobs", "1")
    assert a.returncode == 0
    assert a.stdout == b.stdout


def test_mirror_keeps_sources(gamacro, cross_project, tmp_path):
    src = cross_project / "src" / "Normals.cs"
    before = src.read_text()
    stripped = before.split("            // <auto-generated by gamacro>")[0]
    stripped += "            #endregion\n        }\n    }\n}\n"
    src.write_text(stripped)
    mirror = tmp_path / "out"
    r = run(gamacro, "generate", "--project", str(cross_project / "gamacro.conf"), "--mirror", str(mirror))
    assert r.returncode == 0
    assert src.read_text() == stripped
    assert (mirror / "src" / "Normals.cs").read_text() == before


def identity_project(tmp_path, binds):
    return project(tmp_path, {
        "dsl/frames.gmac": FRAMES,
        "dsl/macros.gmac": "define macro Id as inputs: {u as e3d.Multivector} outputs: {w as e3d.Multivector}\n"
                           "  performs: w = u; end macro\n",
        "src/a.txt": "// GMac : Id\n" + "".join(f'// GMac.Bind("{a}", "{b}")\n' for a, b in binds) + "// GMac end\n",
    })


def test_strict_rejects_unbound_inputs(gamacro, tmp_path):
    conf = identity_project(tmp_path, [("u.e1", "<x>"), ("w.e1", "<y>")])
    assert run(gamacro, "generate", "--project", conf).returncode == 0
    r = run(gamacro, "generate", "--project", conf, "--strict")
    assert r.returncode == 1
    assert "UnboundInputCoefficient" in [d["code"] for d in lines(r.stdout) if "code" in d]


def test_emit_zeros_adds_zero_outputs(gamacro, tmp_path):
    conf = identity_project(tmp_path, [("u.e1", "<x>"), ("w.e1", "<y>")])
    plain = lines(run(gamacro, "generate", "--project", conf, "--mirror", str(tmp_path / "a")).stdout)[-1]
    zeros = lines(run(gamacro, "generate", "--project", conf, "--emit-zeros", "--mirror", str(tmp_path / "b")).stdout)[-1]
    assert plain["stats"]["assignments"] == 1
    assert zeros["stats"]["assignments"] == 8
    text = (tmp_path / "b" / "src" / "a.txt").read_text()
    assert "w_s = 0\n" in text and "w_e1_e2 = 0\n" in text


def test_unknown_dialect_and_bad_config(gamacro, cross_project, tmp_path):
    r = run(gamacro, "check", "--project", str(cross_project / "gamacro.conf"), "--dialect", "fortran")
    assert r.returncode == 1
    assert lines(r.stdout)[0]["code"] == "UnknownDialect"
    bad = tmp_path / "bad.conf"
    bad.write_text("colour = blue\n")
    r = run(gamacro, "check", "--project", str(bad))
    assert r.returncode == 1
    assert lines(r.stdout)[0]["code"] == "ConfigError"


def test_log_level_from_environment(gamacro, cross_project):
    r = run(gamacro, "generate", "--project", str(cross_project / "gamacro.conf"), env={"GAMACRO_LOG": "debug"})
    assert "[debug]" in r.stderr
    quiet = run(gamacro, "generate", "--project", str(cross_project / "gamacro.conf"))
    assert "[debug]" not in quiet.stderr and "[info]" not in quiet.stderr


def test_stats_count_emitted_temporaries(gamacro, tmp_path):
    (tmp_path / "src").mkdir()
    (tmp_path / "gamacro.conf").write_text(f"dsl_dir = {ROOT / 'stdlib'}\nsources = src/*.txt\n")
    binds = "".join(f'// GMac.Bind("{p}", "PointE3", "{o}")\n' for p, o in [("p", "a"), ("q", "b")])
    src = tmp_path / "src" / "d.txt"
    src.write_text("// GMac : PointDistance2\n" + binds + '// GMac.Bind("d.1", "<d>")\n// GMac end\n')
    r = run(gamacro, "generate", "--project", str(tmp_path / "gamacro.conf"))
    assert r.returncode == 0, r.stdout
    stats = lines(r.stdout)[-1]["stats"]
    body = src.read_text().split("// <auto-generated by gamacro>\n")[1].split("// </auto-generated>")[0]
    assert stats["temporaries"] == sum(l.startswith("var") for l in body.splitlines())
    assert stats["assignments"] == len(body.splitlines())
