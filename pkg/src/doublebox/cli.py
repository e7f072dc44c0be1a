"""Command-line front end: emit, decompose, singular, certify, verify, sweep.

Exit codes: 0 success, 2 usage error, 3 a verification check failed,
1 internal error.  Output is deterministic for fixed flags: JSON is written
with sorted keys and no timing information.

Seeds: ``--seed s`` selects the instance seed ``derive_seed(s, 0)``; sweep
instance ``i`` uses ``derive_seed(s, i)``, so a one-seed sweep reproduces the
instance that ``verify`` examines.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .exactpoly import SparsePoly
from .graphkit import build_family_graph, first_symanzik_enumerative
from .hodgecert import (
    injectivity_of_a,
    order2_vanishing_quadrics,
    span_separation_certificate,
)
from .singularlocus import (
    DEFAULT_TOL,
    genericity_report,
    verify_conic_singularity,
)
from .symanzik import (
    decompose,
    derive_seed,
    mass_form,
    massive_second_symanzik,
    parse_signature,
    sample_kinematics,
    second_symanzik,
    swap_quadric_labels,
)

log = logging.getLogger("doublebox")

EXIT_OK, EXIT_INTERNAL, EXIT_USAGE, EXIT_FAILED = 0, 1, 2, 3
DOUBLE_BOX = (3, 1, 3)


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    family: tuple[int, int, int]
    D: int
    signature: str | None
    seed: int
    seeds: int
    tolerance: float
    out: Path | None
    fmt: str
    jobs: int
    perturb: bool

    @property
    def instance_seed(self) -> int:
        return derive_seed(self.seed, 0)


def _family(text: str) -> tuple[int, int, int]:
    try:
        parts = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"family must be m,b,n integers, got {text!r}") from None
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("family must have exactly three components")
    return parts


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--family", type=_family, default=DOUBLE_BOX, help="m,b,n (default 3,1,3)")
    common.add_argument("--D", type=int, default=4, help="spacetime dimension of the momenta")
    common.add_argument("--signature", default=None, help='metric signs, e.g. "++++" or "+---"')
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", type=float, default=DEFAULT_TOL)
    common.add_argument("--out", type=Path, default=None, help="output directory")
    common.add_argument("--format", choices=("json", "text"), default="json")
    common.add_argument("--inject-perturbation", action="store_true", help=argparse.SUPPRESS)

    parser = argparse.ArgumentParser(prog="doublebox", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("emit", parents=[common], help="graph, phi, psi and Psi for one instance")
    sub.add_parser("decompose", parents=[common], help="Q, Q', A-matrix and residual")
    sub.add_parser("singular", parents=[common], help="singular locus diagnostics (3,1,3)")
    sub.add_parser("certify", parents=[common], help="exact quadric-space certificates (3,1,3)")
    sub.add_parser("verify", parents=[common], help="all checks for one instance")
    sweep = sub.add_parser("sweep", parents=[common], help="genericity reports over many seeds")
    sweep.add_argument("--seeds", type=int, default=100)
    sweep.add_argument("--jobs", type=int, default=1)
    return parser


def make_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(
        command=args.command,
        family=args.family,
        D=args.D,
        signature=args.signature,
        seed=args.seed,
        seeds=getattr(args, "seeds", 1),
        tolerance=args.tol,
        out=args.out,
        fmt=args.format,
        jobs=getattr(args, "jobs", 1),
        perturb=args.inject_perturbation,
    )
    if any(x < 1 for x in cfg.family):
        raise UsageError(f"family components must be >= 1, got {cfg.family}")
    if cfg.D < 1:
        raise UsageError("--D must be at least 1")
    if not cfg.tolerance > 0:
        raise UsageError("--tol must be positive")
    if cfg.seeds < 1:
        raise UsageError("--seeds must be at least 1")
    if cfg.jobs < 1:
        raise UsageError("--jobs must be at least 1")
    if cfg.seed < 0:
        raise UsageError("--seed must be nonnegative")
    try:
        parse_signature(cfg.signature, cfg.D)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return cfg


# -- instance construction ------------------------------------------------------


def _instance(cfg: RunConfig, seed: int | None = None):
    graph = build_family_graph(*cfg.family)
    sig = parse_signature(cfg.signature, cfg.D)
    kin = sample_kinematics(graph, cfg.D, cfg.instance_seed if seed is None else seed, sig)
    return graph, kin


def _require_b1(cfg: RunConfig) -> None:
    if cfg.family[1] != 1:
        raise UsageError("this command needs an (m,1,n) family")


def _require_double_box(cfg: RunConfig) -> None:
    if cfg.family != DOUBLE_BOX:
        raise UsageError("this command is defined for the (3,1,3) double box only")


def perturbation(d) -> SparsePoly:
    """x_1 times the first two last-block variables (x_1 x_5 x_6 on the double box).

    Added to Psi it breaks singularity along the conic in the last block.
    """
    xs = SparsePoly.variables(d.nvars)
    last = d.last_block
    return xs[0] * xs[last[0]] * xs[last[min(1, len(last) - 1)]]


def _poly_entry(p: SparsePoly) -> dict:
    return {"json": p.to_json(), "text": p.to_str()}


def _check(name: str, passed: bool, value=None) -> dict:
    return {"name": name, "pass": bool(passed), "value": value}


# -- commands ---------------------------------------------------------------------


def cmd_emit(cfg: RunConfig) -> tuple[dict, int]:
    graph, kin = _instance(cfg)
    phi = first_symanzik_enumerative(graph)
    psi = second_symanzik(graph, kin)
    big = mass_form(graph, kin) * phi + psi
    report = {
        "instance_seed": cfg.instance_seed,
        "graph": graph.to_json(),
        "kinematics": kin.to_json(),
        "phi": _poly_entry(phi),
        "psi": _poly_entry(psi),
        "Psi": _poly_entry(big),
    }
    return report, EXIT_OK


def cmd_decompose(cfg: RunConfig) -> tuple[dict, int]:
    _require_b1(cfg)
    graph, kin = _instance(cfg)
    psi = massive_second_symanzik(graph, kin)
    d = decompose(psi, cfg.family[0], cfg.family[2])
    report = {
        "instance_seed": cfg.instance_seed,
        "decomposition": d.to_json(),
        "Q": d.Q.to_str(),
        "Qprime": d.Qprime.to_str(),
        "residual_zero": d.is_valid,
    }
    return report, EXIT_OK if d.is_valid else EXIT_FAILED


def _decomposition_suite(cfg: RunConfig, graph, kin) -> tuple[list[dict], object, SparsePoly]:
    m, _, n = cfg.family
    psi = massive_second_symanzik(graph, kin)
    d = decompose(psi, m, n)
    a = d.a_poly()
    mid_sq = [0] * d.nvars
    mid_sq[d.middle] = 2
    checks = [
        _check("decomposition_residual_zero", d.is_valid, len(d.residual)),
        _check("a_has_no_middle_square", a.coefficient(mid_sq) == 0 and d.A_matrix[m, 0] == 0,
               str(a.coefficient(mid_sq))),
    ]
    return checks, d, psi


def _conic_suite(cfg: RunConfig, psi: SparsePoly, d) -> list[dict]:
    target = psi + perturbation(d) if cfg.perturb else psi
    if (d.m, d.n) == (3, 3):
        d = swap_quadric_labels(d)
    result = verify_conic_singularity(target, d)
    witnesses = [
        {"component": comp, "variable": f"x{var + 1}", "restriction": poly.to_str()}
        for comp, var, poly in result.witnesses
    ]
    return [_check("conic_singularity", result.passed, witnesses)]


def _certificate_suite(d) -> list[dict]:
    d = swap_quadric_labels(d)
    out = []
    order2 = order2_vanishing_quadrics()
    out.append(_check(order2.name, order2.passed and order2.details["basis_is_x4_squared"], order2.to_json()))
    inj = injectivity_of_a(d)
    out.append(_check(inj.name, inj.passed, inj.to_json()))
    sep = span_separation_certificate(d)
    for cert in (sep, *sep.companions):
        ok = cert.passed and cert.details["generator_span_dimension"] == 7
        out.append(_check(cert.name, ok, {k: v for k, v in cert.to_json().items() if k != "companions"}))
    return out


def _genericity(cfg: RunConfig, seed: int) -> dict:
    graph, kin = _instance(cfg, seed)
    report = genericity_report(graph, kin, cfg.tolerance, seed=seed)
    out = report.to_json()
    out["x4_squared_max_on_points"] = repr(max(
        (abs(p.coordinates[3]) ** 2 for p in report.points), default=0.0
    ))
    return out


def cmd_singular(cfg: RunConfig) -> tuple[dict, int]:
    _require_double_box(cfg)
    graph, kin = _instance(cfg)
    checks, d, psi = _decomposition_suite(cfg, graph, kin)
    checks += _conic_suite(cfg, psi, d)
    gen = _genericity(cfg, cfg.instance_seed)
    ok = all(c["pass"] for c in checks) and gen["pass"]
    return {"instance_seed": cfg.instance_seed, "checks": checks, "genericity": gen}, \
        EXIT_OK if ok else EXIT_FAILED


def cmd_certify(cfg: RunConfig) -> tuple[dict, int]:
    _require_double_box(cfg)
    graph, kin = _instance(cfg)
    checks, d, _ = _decomposition_suite(cfg, graph, kin)
    if not d.is_valid:
        return {"instance_seed": cfg.instance_seed, "checks": checks}, EXIT_FAILED
    checks += _certificate_suite(d)
    ok = all(c["pass"] for c in checks)
    return {"instance_seed": cfg.instance_seed, "checks": checks}, EXIT_OK if ok else EXIT_FAILED


def cmd_verify(cfg: RunConfig) -> tuple[dict, int]:
    """Decomposition, conic singularity and certificates gate the exit code.

    The genericity section (isolated singular points) is reported but does
    not affect the exit status; ``singular`` and ``sweep`` judge it.
    """
    _require_b1(cfg)
    graph, kin = _instance(cfg)
    checks, d, psi = _decomposition_suite(cfg, graph, kin)
    suites = {"decomposition": checks}
    if d.is_valid:
        suites["conics"] = _conic_suite(cfg, psi, d)
    if cfg.family == DOUBLE_BOX and d.is_valid:
        suites["certify"] = _certificate_suite(d)
        genericity = _genericity(cfg, cfg.instance_seed)
    else:
        suites["certify"] = "not applicable"
        genericity = "not applicable"
    failed = [c["name"] for s in suites.values() if isinstance(s, list) for c in s if not c["pass"]]
    report = {
        "instance_seed": cfg.instance_seed,
        "suites": suites,
        "genericity": genericity,
        "failed_checks": failed,
        "pass": not failed,
    }
    return report, EXIT_FAILED if failed else EXIT_OK


def _sweep_one(args) -> dict:
    cfg, seed = args
    return _genericity(cfg, seed)


def cmd_sweep(cfg: RunConfig) -> tuple[dict, int]:
    _require_double_box(cfg)
    seeds = [derive_seed(cfg.seed, i) for i in range(cfg.seeds)]
    work = [(cfg, s) for s in seeds]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            reports = list(pool.map(_sweep_one, work))
    else:
        reports = [_sweep_one(w) for w in work]
    counts = Counter()
    failures = Counter()
    for r in reports:
        for d in r["diagnostics"]:
            if d["name"] == "s_point_count":
                counts[str(d["value"])] += 1
            if not d["pass"]:
                failures[d["name"]] += 1
    passed = sum(r["pass"] for r in reports)
    summary = {
        "master_seed": cfg.seed,
        "seeds": cfg.seeds,
        "D": cfg.D,
        "passed": passed,
        "pass_rate": passed / len(reports),
        "s_point_count_histogram": dict(sorted(counts.items())),
        "diagnostic_failures": dict(sorted(failures.items())),
    }
    return {"summary": summary, "reports": reports}, EXIT_OK


COMMANDS = {
    "emit": cmd_emit,
    "decompose": cmd_decompose,
    "singular": cmd_singular,
    "certify": cmd_certify,
    "verify": cmd_verify,
    "sweep": cmd_sweep,
}


# -- output -------------------------------------------------------------------------


def to_json_text(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def to_text(command: str, report: dict) -> str:
    lines = [f"doublebox {command}"]
    if command == "emit":
        g = report["graph"]
        lines.append(f"family {g['family']}  vertices {len(g['vertices'])}  edges {len(g['edges'])}")
        for key in ("phi", "psi", "Psi"):
            lines.append(f"{key} = {report[key]['text']}")
        return "\n".join(lines) + "\n"
    if command == "decompose":
        lines.append(f"Q  = {report['Q']}")
        lines.append(f"Q' = {report['Qprime']}")
        lines.append(f"residual zero: {report['residual_zero']}")
        return "\n".join(lines) + "\n"
    if command == "sweep":
        for k, v in report["summary"].items():
            lines.append(f"{k}: {v}")
        return "\n".join(lines) + "\n"
    checks = report.get("checks") or [c for s in report.get("suites", {}).values()
                                      if isinstance(s, list) for c in s]
    for c in checks:
        lines.append(f"{'PASS' if c['pass'] else 'FAIL'}  {c['name']}")
    gen = report.get("genericity")
    if isinstance(gen, dict):
        lines.append("genericity (isolated singular points):")
        for d in gen["diagnostics"]:
            lines.append(f"  {'PASS' if d['pass'] else 'FAIL'}  {d['name']} = {d['value']}")
    return "\n".join(lines) + "\n"


def write_outputs(cfg: RunConfig, report: dict) -> None:
    text = to_text(cfg.command, report)
    body = to_json_text(report)
    if cfg.out is None:
        sys.stdout.write(body if cfg.fmt == "json" else text)
        return
    cfg.out.mkdir(parents=True, exist_ok=True)
    files = {f"{cfg.command}.json": body, f"{cfg.command}.txt": text}
    if cfg.command == "emit":
        files.update({
            "graph.json": to_json_text(report["graph"]),
            "kinematics.json": to_json_text(report["kinematics"]),
            "phi.json": to_json_text(report["phi"]["json"]),
            "psi.json": to_json_text(report["psi"]["json"]),
            "psi_massive.json": to_json_text(report["Psi"]["json"]),
        })
    for name, content in files.items():
        (cfg.out / name).write_text(content, encoding="utf-8")


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(
        level=os.environ.get("DOUBLEBOX_LOG_LEVEL", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = make_config(args)
        report, code = COMMANDS[cfg.command](cfg)
        write_outputs(cfg, report)
    except UsageError as exc:
        print(f"doublebox: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        log.error("I/O failure: %s", exc)
        return EXIT_INTERNAL
    except Exception:  # noqa: BLE001 - last-resort boundary
        log.exception("internal error")
        return EXIT_INTERNAL
    return code


if __name__ == "__main__":
    sys.exit(main())
