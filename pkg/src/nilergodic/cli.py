"""Command-line front-end.

    nilergodic COMMAND --config FILE|bundled:NAME [--out DIR] [--seed S]
                       [--mode exact|float] [--jobs J]

Exit codes: 0 pass, 1 verdict fail, 2 config error or unsupported dimension.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from pathlib import Path
from typing import Sequence

from . import __version__
from .config import (
    COMMANDS,
    ConfigError,
    bundled_scenarios,
    check_dimension,
    ergodic_inputs,
    experiment_from_config,
    load_config,
    parse_functions,
    validate_report,
)
from .ergodicity import green_ergodic_Sx, green_ergodic_T, matrix_structure
from .experiments import (
    average_json,
    compare,
    limit_integral,
    limit_json,
    nonconventional_average,
)
from .nilmanifold import coordinate_order
from .scalars import ModeError
from .suites import verify_group, verify_intertwine, verify_lemma, verify_measure, verify_star

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2
TRACE_HEADER = ("n", "re", "im", "abs_diff_running")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="nilergodic",
        description="Exact algebra checks and multiple ergodic averages on U_n / U_n(Z).",
    )
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True
    helps = {
        "verify-group": "group axioms, lower central series, charts, reduction",
        "verify-star": "⋆-group axioms, lattice closure, sequence homomorphism",
        "verify-intertwine": "the embedding intertwines S_x with the diagonal action",
        "verify-lemma": "coordinate pattern of ⋆-commutators",
        "ergodic-check": "ergodicity of T (or of S_x when x is given)",
        "average": "non-conventional time average along an orbit",
        "limit": "the limit integral by sampling",
        "compare": "time average against the limit integral",
    }
    for name in COMMANDS:
        sp = sub.add_parser(name, help=helps[name], description=helps[name])
        sp.add_argument("--config", required=True,
                        help="YAML config path, or bundled:NAME for a shipped scenario")
        sp.add_argument("--out", type=Path,
                        help="output directory for report.json (and trace.csv); "
                             "prints the report to stdout when omitted")
        sp.add_argument("--seed", type=int, help="override the config seed")
        sp.add_argument("--mode", choices=("exact", "float"), help="override arithmetic mode")
        sp.add_argument("--jobs", type=int, help="worker threads for sampling")
        sp.add_argument("--timing", action="store_true",
                        help="add wall-clock timings to the report (breaks byte-reproducibility)")
        sp.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub.add_parser("scenarios", help="list bundled scenarios")
    return p


# -- command handlers ------------------------------------------------------------


def _mode(cfg: dict, args) -> str:
    return args.mode or cfg.get("mode", "exact")


def _seed(cfg: dict, args) -> int:
    return args.seed if args.seed is not None else int(cfg.get("seed", 0))


def _verify(command: str, cfg: dict, args) -> dict:
    mode, seed = _mode(cfg, args), _seed(cfg, args)
    cases = int(cfg.get("cases", 100))
    if command == "verify-group":
        res = verify_group(cfg.get("ns", [3, 4, 5]), cases, seed, mode)
        if "measure" in cfg:
            m = cfg["measure"]
            n = check_dimension(int(m["n"]))
            fns = parse_functions(m["functions"], n) if m.get("functions") else None
            meas = verify_measure(n, int(m["samples"]), seed, fns)
            res["groups"].update({f"measure_{k}": v for k, v in meas["groups"].items()})
            res["passed"] += meas["passed"]
            res["total"] += meas["total"]
            res["verdict"] = "pass" if res["passed"] == res["total"] else "fail"
    elif command == "verify-star":
        res = verify_star(cfg.get("ns", [3, 4, 5]), cases, seed, mode, cfg.get("homomorphism"))
    elif command == "verify-intertwine":
        if mode != "exact":
            raise ModeError("intertwining is checked coset-exactly; use --mode exact")
        wd = cfg.get("well_defined") or {}
        res = verify_intertwine(cfg.get("ns", [4, 5]), cases, seed,
                                int(wd.get("cases", 0)), int(wd.get("n", 4)))
    else:
        res = verify_lemma(int(cfg.get("n", 5)), cfg.get("levels", [2, 3]), cases, seed, mode)
    return {"kind": "verify", "mode": mode, "seed": seed, **res}


def _structure_json(n: int) -> dict:
    """Nonzero brackets of U_n on the basis ``X_ij`` (1-based labels)."""
    S = matrix_structure(n)
    labels = [f"X{i + 1}{j + 1}" for i, j in coordinate_order(n)]
    brackets = []
    for (a, b), v in sorted(S.brackets.items()):
        if any(v):
            brackets.append({"left": labels[a], "right": labels[b],
                             "value": {labels[c]: str(w) for c, w in enumerate(v) if w}})
    return {"dim": S.dim, "brackets": brackets, "derived_dim": len(S.derived_basis),
            "torus_dim": S.torus_dim, "jacobi": S.jacobi_holds()}


def _ergodic(cfg: dict, args) -> dict:
    if _mode(cfg, args) != "exact":
        raise ModeError("ergodicity is decided from exact input; use --mode exact")
    a, x = ergodic_inputs(cfg)
    if x is None:
        res, target = green_ergodic_T(a), "T"
    else:
        if a.n < 3:
            raise ConfigError("S_x needs n >= 3")
        res, target = green_ergodic_Sx(a, x), "S_x"
    out = {"kind": "ergodic", "n": a.n, "target": target, **res.to_json()}
    if cfg.get("structure"):
        out["structure"] = _structure_json(a.n)
    sound = res.witness_sound is not False
    out["verdict"] = "pass" if sound else "fail"
    return out


def _experiment(command: str, cfg: dict, args) -> tuple[dict, list | None, bool]:
    if (args.mode or cfg.get("mode", "float")) != "float":
        raise ModeError("orbit dynamics run in float mode; a and x stay exact in the config")
    ecfg = experiment_from_config(cfg, seed=args.seed, jobs=args.jobs)
    echo = _echo(cfg, ecfg.seed)
    if command == "average":
        t0 = time.perf_counter()
        trace = nonconventional_average(ecfg)
        out = average_json(ecfg, trace, echo)
        if args.timing:
            out["timing"] = {"average_s": time.perf_counter() - t0}
        rows = [(c, v.real, v.imag, "") for c, v in zip(trace.checkpoints, trace.values)]
        return out, rows, out["verdict"] == "pass"
    if command == "limit":
        t0 = time.perf_counter()
        out = limit_json(ecfg, limit_integral(ecfg), echo)
        if args.timing:
            out["timing"] = {"limit_s": time.perf_counter() - t0}
        return out, None, out["verdict"] == "pass"
    report = compare(ecfg, config_echo=echo, with_timing=args.timing)
    return report.to_json(), report.trace_rows(), report.ok


def _echo(cfg: dict, seed: int) -> dict:
    echo = {k: v for k, v in cfg.items() if k != "description"}
    echo["seed"] = seed
    return echo


# -- output ----------------------------------------------------------------------


def dump_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def write_outputs(out: Path, report: dict, rows: list | None) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(dump_json(report), encoding="utf-8")
    if rows is not None:
        with open(out / "trace.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(TRACE_HEADER)
            for n, re_, im, diff in rows:
                w.writerow((n, repr(float(re_)), repr(float(im)),
                            "" if diff == "" else repr(float(diff))))


def _summary(report: dict) -> str:
    kind = report["kind"]
    head = f"{report['command']} [{report.get('name') or '-'}]: {report['verdict']}"
    if kind == "verify":
        return f"{head} ({report['passed']}/{report['total']} checks)"
    if kind == "ergodic":
        return f"{head} (ergodic={report['ergodic']}, witness={report['witness']})"
    if kind == "compare":
        return (f"{head} (|avg - limit| = {report['abs_difference']:.3g}, tol "
                f"{report['tolerance']:.3g} + 3*{report['stderr']:.2g})")
    if kind == "average":
        z = report["time_average"]
        return f"{head} (average = {z['re']:.6g}{z['im']:+.6g}i)"
    z = report["limit_estimate"]
    return f"{head} (limit = {z['re']:.6g}{z['im']:+.6g}i, stderr {report['stderr']:.2g})"


def run(args: argparse.Namespace) -> int:
    """Execute one scenario; returns the exit code."""
    command = args.command
    try:
        cfg = load_config(args.config, command)
        if args.jobs is not None and args.jobs < 1:
            raise ConfigError("--jobs must be >= 1")
        if command.startswith("verify-"):
            report, rows, ok = _verify(command, cfg, args), None, None
        elif command == "ergodic-check":
            report, rows, ok = _ergodic(cfg, args), None, None
        else:
            report, rows, ok = _experiment(command, cfg, args)
    except (ConfigError, ModeError) as exc:
        print(f"nilergodic: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        # dimension and shape problems surfacing from the library
        print(f"nilergodic: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    report = {"schema_version": 1, "command": command, "name": cfg.get("name", ""), **report}
    validate_report(report)
    if ok is None:
        ok = report["verdict"] == "pass"
    if args.out is not None:
        write_outputs(args.out, report, rows)
        print(_summary(report))
    else:
        sys.stdout.write(dump_json(report))
    return EXIT_PASS if ok else EXIT_FAIL


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "scenarios":
        for name in bundled_scenarios():
            print(name)
        return EXIT_PASS
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return run(args)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
