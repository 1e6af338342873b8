"""Acceptance suite: every criterion runs through the bundled CLI scenarios.

Each test prints one ``CRITERION i: PASS|FAIL`` line (visible under ``-v``
or ``-s``).  Time budgets are wall-clock and measured after a JIT warm-up.
"""

from __future__ import annotations

import json
import math
import time

import pytest

from nilergodic import cli
from nilergodic.config import load_config
from nilergodic.ergodicity import matrix_structure
from nilergodic.experiments import ExperimentConfig, compare
from nilergodic.group import GroupElement
from nilergodic.nilmanifold import TestFunction
from nilergodic.scalars import Radical, parse_scalar, sqrt

pytestmark = pytest.mark.acceptance


@pytest.fixture(scope="module", autouse=True)
def warm_jit():
    # compile (or load from cache) the float kernels outside the timed region
    for n in (2, 3, 4):
        a = GroupElement.from_upper(n, {(i, i + 1): sqrt(2) for i in range(n - 1)})
        compare(ExperimentConfig(a, GroupElement.identity(n), [TestFunction.constant(n)] * n,
                                 n_steps=10, m_samples=10))


def run(tmp_path, command, scenario, *extra):
    out = tmp_path / scenario
    t0 = time.perf_counter()
    code = cli.main([command, "--config", f"bundled:{scenario}", "--out", str(out), *extra])
    elapsed = time.perf_counter() - t0
    report = json.loads((out / "report.json").read_text())
    return code, report, elapsed


def announce(capsys, number, ok, detail):
    with capsys.disabled():
        print(f"\nCRITERION {number}: {'PASS' if ok else 'FAIL'} ({detail})")


def all_checks_full(report, cases):
    return all(c["passed"] == c["total"] == cases
               for g in report["groups"].values() for c in g["checks"].values())


def test_criterion_1_exact_algebra(tmp_path, capsys):
    code, rep, dt = run(tmp_path, "verify-star", "exact_algebra")
    groups = rep["groups"]
    need = {"associativity", "identity", "inverse", "closure", "lattice_closure"}
    ok = (code == 0 and dt <= 30 and set(groups) == {"U3", "U4", "U5"}
          and all(need <= set(g["checks"]) for g in groups.values())
          and all_checks_full(rep, 200))
    announce(capsys, 1, ok, f"{rep['passed']}/{rep['total']} checks in {dt:.1f}s")
    assert ok


def test_criterion_2_leibman_extension(tmp_path, capsys):
    code, rep, dt = run(tmp_path, "verify-star", "leibman_extension")
    cfg = load_config("bundled:leibman_extension", "verify-star")["homomorphism"]
    check = rep["groups"]["homomorphism_U4"]["checks"]["poly_seq_homomorphism"]
    ok = (code == 0 and dt <= 30 and cfg["range"] == [-3, 8]
          and check["passed"] == check["total"] == 100)
    announce(capsys, 2, ok, f"{check['passed']}/{check['total']} pairs in {dt:.1f}s")
    assert ok


def test_criterion_3_intertwining(tmp_path, capsys):
    code, rep, dt = run(tmp_path, "verify-intertwine", "intertwining")
    g = rep["groups"]
    ok = (code == 0 and dt <= 60
          and g["U4"]["checks"]["intertwine"]["passed"] == 100
          and g["U5"]["checks"]["intertwine"]["passed"] == 100
          and g["well_defined_U4"]["checks"]["well_defined"]["passed"] == 100
          and rep["passed"] == rep["total"])
    announce(capsys, 3, ok, f"{rep['passed']}/{rep['total']} checks in {dt:.1f}s")
    assert ok


def test_criterion_4_commutator_lemma(tmp_path, capsys):
    code, rep, dt = run(tmp_path, "verify-lemma", "commutator_lemma")
    need = {"leading_identity", "slot_m", "slot_m_plus_1", "tail"}
    ok = (code == 0 and dt <= 60 and set(rep["groups"]) == {"U5_level2", "U5_level3"}
          and all(need <= set(g["checks"]) for g in rep["groups"].values())
          and rep["passed"] == rep["total"] > 0)
    announce(capsys, 4, ok, f"{rep['passed']}/{rep['total']} checks in {dt:.1f}s")
    assert ok


ERGODIC_SCENARIOS = ["ergodic_T_sqrt", "ergodic_T_rational", "ergodic_Sx_e",
                     "ergodic_Sx_half_third", "ergodic_Sx_u4_e", "ergodic_Sx_u4_x"]


def test_criterion_5_ergodicity(tmp_path, capsys):
    t0 = time.perf_counter()
    reps = {s: run(tmp_path, "ergodic-check", s) for s in ERGODIC_SCENARIOS}
    dt = time.perf_counter() - t0
    problems = []
    S = matrix_structure(3)
    if S.brackets[(0, 1)] != (0, 0, 1) or S.torus_dim != 2:
        problems.append("U3 structure constants")
    struct = reps["ergodic_T_sqrt"][1]["structure"]
    if {"left": "X12", "right": "X23", "value": {"X13": "1"}} not in struct["brackets"]:
        problems.append("reported bracket table")
    if not reps["ergodic_T_sqrt"][1]["ergodic"]:
        problems.append("T at (sqrt2, sqrt3)")
    rat = reps["ergodic_T_rational"][1]
    if rat["ergodic"] or not rat["witness_sound"]:
        problems.append("rational T witness")
    for s in ERGODIC_SCENARIOS[2:]:
        if reps[s][1]["target"] != "S_x" or not reps[s][1]["ergodic"]:
            problems.append(s)
    # every negative verdict: re-check chi . alpha in Z from the reported data
    for code, rep, _ in reps.values():
        if code != 0:
            problems.append(f"exit {code}")
        if not rep["ergodic"]:
            alpha = [parse_scalar(v) for v in rep["rotation"]]
            dot = sum((a * c for a, c in zip(alpha, rep["witness"])), Radical.coerce(0))
            if not any(rep["witness"]) or not dot.is_integer():
                problems.append("unsound witness")
    ok = not problems and dt <= 60
    announce(capsys, 5, ok, f"{len(reps)} scenarios in {dt:.1f}s"
             + (f"; problems: {problems}" if problems else ""))
    assert ok


def test_criterion_6_weyl(tmp_path, capsys):
    code, rep, dt = run(tmp_path, "average", "weyl_rotation")
    z = complex(rep["time_average"]["re"], rep["time_average"]["im"])
    cfg = load_config("bundled:weyl_rotation", "average")
    alpha = math.sqrt(2)
    bound = 2 / (cfg["n_steps"] * abs(1 - complex(math.cos(2 * math.pi * alpha),
                                                  math.sin(2 * math.pi * alpha))))
    # the geometric-series bound is exact, so it must hold up to round-off
    ok = (code == 0 and dt <= 10 and cfg["n_steps"] == 10**5
          and abs(z) <= 1e-3 and abs(z) <= bound * (1 + 1e-6))
    announce(capsys, 6, ok, f"|average| = {abs(z):.2e} (bound {bound:.2e}) in {dt:.1f}s")
    assert ok


def _diff_ok(rep, tol):
    return rep["abs_difference"] <= tol + 3 * rep["stderr"]


def test_criterion_7_lesigne(tmp_path, capsys):
    t0 = time.perf_counter()
    reps = {s: run(tmp_path, "compare", s) for s in
            ("lesigne_nonresonant_e", "lesigne_resonant_e",
             "lesigne_nonresonant_x", "lesigne_resonant_x")}
    dt = time.perf_counter() - t0
    problems = []
    for name, (code, rep, _) in reps.items():
        cfg = rep["config"]
        if cfg["n_steps"] != 10**6 or cfg["m_samples"] != 10**6:
            problems.append(f"{name}: scale")
        if code != 0:
            problems.append(f"{name}: exit {code}")
        if "nonresonant" in name:
            mods = (_abs(rep["time_average"]), _abs(rep["limit_estimate"]))
            if max(mods) > 5e-3:
                problems.append(f"{name}: moduli {mods}")
        elif not _diff_ok(rep, 5e-3):
            problems.append(f"{name}: diff {rep['abs_difference']:.2e}")
    x_half_third = [["1", "1/2", "0"], ["0", "1", "1/3"], ["0", "0", "1"]]
    for name in ("lesigne_nonresonant_x", "lesigne_resonant_x"):
        if reps[name][1]["config"]["x"] != x_half_third:
            problems.append(f"{name}: base point")
    worst = max(r["abs_difference"] for _, r, _ in reps.values())
    ok = not problems and dt <= 600
    announce(capsys, 7, ok, f"max |avg - limit| = {worst:.2e} in {dt:.1f}s"
             + (f"; problems: {problems}" if problems else ""))
    assert ok


def _abs(z):
    return abs(complex(z["re"], z["im"]))


def test_criterion_8_k3(tmp_path, capsys):
    t0 = time.perf_counter()
    reps = {s: run(tmp_path, "compare", s) for s in ("k3_resonant", "k3_nonresonant")}
    dt = time.perf_counter() - t0
    problems = []
    for name, (code, rep, _) in reps.items():
        cfg = rep["config"]
        if rep["n"] != 4 or len(cfg["functions"]) != 4:
            problems.append(f"{name}: shape")
        if cfg["n_steps"] != 2 * 10**5 or cfg["m_samples"] != 10**6:
            problems.append(f"{name}: scale")
        if code != 0 or not _diff_ok(rep, 2e-2):
            problems.append(f"{name}: diff {rep['abs_difference']:.2e}")
    # the resonant case must have a limit bounded away from zero
    if _abs(reps["k3_resonant"][1]["limit_estimate"]) < 0.1:
        problems.append("resonant limit is negligible")
    ok = not problems and dt <= 900
    diffs = ", ".join(f"{n}: {r['abs_difference']:.2e}" for n, (_, r, _) in reps.items())
    announce(capsys, 8, ok, f"{diffs} in {dt:.1f}s"
             + (f"; problems: {problems}" if problems else ""))
    assert ok


def test_criterion_9_measure(tmp_path, capsys):
    code, rep, dt = run(tmp_path, "verify-group", "measure_consistency")
    check = rep["groups"]["measure_U3"]["checks"]["mean_vs_cube"]
    cfg = load_config("bundled:measure_consistency", "verify-group")["measure"]
    ok = (code == 0 and dt <= 60 and cfg["samples"] == 10**5
          and check["passed"] == check["total"] == 5)
    announce(capsys, 9, ok, f"{check['passed']}/{check['total']} functions in {dt:.1f}s")
    assert ok


DETERMINISM = [("compare", "determinism_small"), ("verify-star", "leibman_extension"),
               ("ergodic-check", "ergodic_Sx_half_third"), ("average", "weyl_rotation")]


def test_criterion_10_determinism(tmp_path, capsys):
    mismatched = []
    for command, scenario in DETERMINISM:
        blobs = []
        for rep in ("a", "b"):
            out = tmp_path / f"{scenario}_{rep}"
            cli.main([command, "--config", f"bundled:{scenario}", "--out", str(out)])
            blobs.append(tuple((out / f).read_bytes() for f in sorted(p.name for p in out.iterdir())))
        if blobs[0] != blobs[1]:
            mismatched.append(scenario)
    ok = not mismatched
    announce(capsys, 10, ok, f"{len(DETERMINISM)} scenarios rerun"
             + (f"; differing: {mismatched}" if mismatched else ", byte-identical"))
    assert ok

