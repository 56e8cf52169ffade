"""Geometric-algebra macro compiler.

    p = gamacro.Project("stdlib")
    p.generate("GetNormalToVectors", [("u", "Vector3D", "u"), ...])["body"]
    p.run("CgaPoint", {"x": {"e1": 1.0}})
    gamacro.generate("example_projects/cross_product/gamacro.conf", mirror="/tmp/out")
"""
import json
import os

from ._gamacro import GamacroError, Project, interpret, _run_project

__all__ = ["GamacroError", "Project", "interpret", "check", "generate", "verify"]

GamacroError.code = property(lambda self: self.args[0])
GamacroError.message = property(lambda self: self.args[1])


def _run(command, project, overrides):
    if "mirror" in overrides:
        overrides["mirror"] = os.path.abspath(overrides["mirror"])
    status, lines = _run_project(command, os.fspath(project), overrides)
    records = [json.loads(line) for line in lines]
    return {
        "ok": status == 0,
        "diagnostics": [r for r in records if "severity" in r],
        "points": [r for r in records if "status" in r],
        "stats": next(r["stats"] for r in records if "stats" in r),
    }


def check(project="gamacro.conf", **overrides):
    """Parses and compiles the DSL files of a project."""
    return _run("check", project, overrides)


def generate(project="gamacro.conf", **overrides):
    """Generates code at every binding point. Overrides: dialect, mirror, strict,
    emit_zeros, verify, samples, seed, jobs."""
    return _run("generate", project, overrides)


def verify(project="gamacro.conf", **overrides):
    """Checks existing generated blocks against the numeric oracle."""
    return _run("verify", project, overrides)
