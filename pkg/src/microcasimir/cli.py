"""Command-line front end.

Exit codes: 0 success, 1 usage or input error, 2 numerical non-convergence
(or, for ``replay``, a run that did not reproduce).
"""
from __future__ import annotations

import argparse
import json
import math
import re
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

from . import __version__
from . import halfspace, kernels, macroscopic, slabs
from .material import DEFAULT_LENGTH_UNIT_M, load_material
from .quadrature import QuadratureSpec
from .results import ConvergenceReport, EnergyResult, Scale

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2

_LENGTH_RE = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*(m|nm)?\s*$")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_length(text: str, length_unit_m: float = DEFAULT_LENGTH_UNIT_M) -> float:
    """``"2.5"`` (reduced units), ``"3nm"`` or ``"1e-9m"`` -> reduced length."""
    m = _LENGTH_RE.match(str(text))
    if not m:
        raise UsageError(f"cannot parse length {text!r}")
    value = float(m.group(1))
    unit = m.group(2)
    if unit == "m":
        value = value / length_unit_m
    elif unit == "nm":
        value = value * 1e-9 / length_unit_m
    if not value > 0:
        raise UsageError(f"length must be > 0, got {text!r}")
    return value


@dataclass
class RunManifest:
    command: str
    argv: list[str]
    parameters: dict[str, Any]
    tolerances: dict[str, Any]
    seed: int | None
    version: str
    wall_time: float = 0.0
    results: list[dict[str, Any]] = field(default_factory=list)
    output: str = ""

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True, default=str)


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def _rows(named: list[tuple[str, EnergyResult]]):
    for name, r in named:
        yield {"name": name, **r.to_dict()}


def render(named: list[tuple[str, EnergyResult]], fmt: str) -> str:
    rows = list(_rows(named))
    if fmt == "json":
        return json.dumps(rows, indent=2)
    if fmt == "csv":
        lines = ["name,coefficient,scale,error,regime,converged"]
        for r in rows:
            lines.append(",".join([r["name"], repr(r["coefficient"]), r["scale"], repr(r["error"]),
                                   r["regime"], str(r["converged"]).lower()]))
        return "\n".join(lines) + "\n"
    headers = ["name", "coefficient", "scale", "error", "regime", "converged"]
    table = [[r["name"], f"{r['coefficient']:.10g}", r["scale"], f"{r['error']:.3g}", r["regime"],
              "yes" if r["converged"] else "NO"] for r in rows]
    widths = [max(len(h), *(len(t[i]) for t in table)) for i, h in enumerate(headers)]
    out = ["  ".join(h.ljust(w) for h, w in zip(headers, widths))]
    out.append("  ".join("-" * w for w in widths))
    out += ["  ".join(c.ljust(w) for c, w in zip(t, widths)) for t in table]
    return "\n".join(out) + "\n"


def _dimensionless(x: float) -> EnergyResult:
    return EnergyResult(x, Scale.DIMENSIONLESS, 0.0, regime="derived")


def _spec(args, default: QuadratureSpec) -> QuadratureSpec:
    return default if args.tol is None else default.with_(rel_tol=args.tol)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_pair(args) -> list[tuple[str, EnergyResult]]:
    m = load_material(args.material, args.length_unit_m)
    r = parse_length(args.r, args.length_unit_m)
    res = kernels.pair_energy(m, r, args.regime, _spec(args, QuadratureSpec(rel_tol=1e-10)))
    return [("U2", res)]


def cmd_triplet(args) -> list[tuple[str, EnergyResult]]:
    m = load_material(args.material, args.length_unit_m)
    parts = args.sides.split(",")
    if len(parts) != 3:
        raise UsageError("--sides needs three comma-separated lengths")
    t = kernels.Triangle(*(parse_length(p, args.length_unit_m) for p in parts))
    res = kernels.triplet_energy(m, t, args.regime, _spec(args, QuadratureSpec(rel_tol=1e-10)))
    return [("U3", res)]


def cmd_cp(args) -> list[tuple[str, EnergyResult]]:
    cfg = halfspace.HalfspaceConfig(parse_length(args.d, args.length_unit_m),
                                    parse_length(args.radius, args.length_unit_m))
    out = []
    if args.order in ("2", "both"):
        out.append(("W2_CP", halfspace.w2_cp_analytic(cfg)))
        out.append(("W2_CP_numeric", halfspace.w2_cp_numeric(cfg)))
    if args.order in ("3", "both"):
        w3 = halfspace.w3_cp(cfg, _spec(args, halfspace.DEFAULT_K_SPEC), args.levels)
        out.append(("alpha", EnergyResult(w3.metadata["alpha"], Scale.DIMENSIONLESS,
                                          4.0 * w3.error_estimate * 8 * math.pi ** 3 / 9, regime="extrapolated",
                                          converged=w3.converged)))
        out.append(("W3_CP", w3))
        if args.order == "both":
            w2 = out[0][1]
            out.append(("W3_over_abs_W2", _dimensionless(abs(w3.coefficient / w2.coefficient))))
    return out


def cmd_casimir(args) -> list[tuple[str, EnergyResult]]:
    cfg = slabs.SlabConfig(parse_length(args.d, args.length_unit_m), parse_length(args.radius, args.length_unit_m))
    out = []
    w2 = slabs.w2_per_area(cfg)
    w3 = None
    if args.order in ("2", "both"):
        out.append(("W2_per_area", w2))
    if args.order in ("3", "both"):
        source = None
        if args.w3_source == "microscopic":
            source = halfspace.w3_cp(halfspace.HalfspaceConfig(1.0), _spec(args, halfspace.DEFAULT_K_SPEC))
        elif args.w3_source == "macroscopic":
            source = macroscopic.many_body_coefficient(2)
        w3 = slabs.w3_per_area(cfg, w3_cp=source)
        out.append(("W3_per_area", w3))
    if args.order in ("ideal", "both"):
        out.append(("W_ideal_per_area", macroscopic.casimir_ideal_per_area(cfg.d)))
    if args.order == "both":
        out.append(("pairwise_fraction", _dimensionless(slabs.pairwise_fraction(cfg))))
        out.append(("W3_over_W2", _dimensionless(slabs.three_to_two_ratio(cfg, w3))))
        out.append(("partial_sum_fraction", _dimensionless(slabs.partial_sum_fraction(cfg, w3))))
    return out


def cmd_macro(args) -> list[tuple[str, EnergyResult]]:
    if args.order == "total":
        text = args.epsilon.strip().lower()
        try:
            eps = math.inf if text in ("inf", "infinite", "infinity") else float(text)
        except ValueError as exc:
            raise UsageError(f"bad --epsilon {args.epsilon!r}") from exc
        return [("W_total", macroscopic.w_total(eps))]
    order = int(args.order)
    return [(f"W_order{order}", macroscopic.many_body_coefficient(order))]


def _study_lambda_ladder(args) -> ConvergenceReport:
    q = _spec(args, QuadratureSpec(rel_tol=1e-4, max_subdivisions=400_000))
    report = halfspace.lambda_ladder(1.0, q, args.levels)
    if args.mc_samples:
        from .quadrature import integrate_monte_carlo
        lam = report.rows[0].param
        mc = integrate_monte_carlo(lambda p: halfspace.probe_frame_integrand(p, 1.0, lam),
                                   [0.0] * 4, [1.0] * 4, args.mc_samples, args.seed)
        report.notes["monte_carlo"] = {"cutoff": lam, "value": mc.value, "stderr": mc.error_estimate,
                                       "adaptive": report.rows[0].value}
    return report


def _study_lattice(args) -> ConvergenceReport:
    cfg = halfspace.HalfspaceConfig(1.0)
    report = ConvergenceReport("lattice-w2")
    values, prev = [], None
    for k in range(args.levels):
        h = 0.25 / 2 ** k
        r = halfspace.lattice_oracle_w2(cfg, h)
        diff = abs(r.coefficient - prev) if prev is not None else abs(r.coefficient - halfspace.W2_CP_COEFF)
        report.add(h, r.coefficient, diff, r.metadata["sites"])
        values.append(r.coefficient)
        prev = r.coefficient
    if len(values) > 1:
        # cell-centred sums converge as h^2
        limit = (4.0 * values[-1] - values[-2]) / 3.0
        report.add(0.0, limit, abs(limit - values[-1]), 0)
    steps = [abs(v - halfspace.W2_CP_COEFF) for v in values]
    report.notes["monotone"] = all(b < a for a, b in zip(steps, steps[1:]))
    return report


def _study_scaling(args) -> ConvergenceReport:
    q = _spec(args, QuadratureSpec(rel_tol=1e-4, max_subdivisions=400_000))
    report = ConvergenceReport("scaling-law")
    ds = [0.5, 1.0, 2.0, 4.0]
    vals, errs = [], []
    for d in ds:
        r = halfspace.dK_dd(d, q, args.levels)
        report.add(d, r.value * d ** 5, r.error_estimate * d ** 5, r.evaluations)
        vals.append(r.value * d ** 5)
        errs.append(r.error_estimate * d ** 5)
    w = [1.0 / max(e, 1e-300) ** 2 for e in errs]
    mean = sum(v * wi for v, wi in zip(vals, w)) / sum(w)
    spread = max(vals) - min(vals)
    report.add(0.0, mean, max(spread, math.sqrt(1.0 / sum(w))), 0)
    report.notes["monotone"] = spread <= 2.0 * max(errs) + 2.0 * min(errs)
    return report


STUDIES = {"lambda-ladder": _study_lambda_ladder, "lattice-w2": _study_lattice, "scaling-law": _study_scaling}


def cmd_convergence(args) -> ConvergenceReport:
    if args.levels < 1:
        raise UsageError("--levels must be >= 1")
    return STUDIES[args.study](args)


# ---------------------------------------------------------------------------
# parser / main
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=None, help="relative quadrature tolerance")
    common.add_argument("--format", choices=["table", "csv", "json"], default="table")
    common.add_argument("--manifest", default="microcasimir_manifest.json",
                        help="where to write the run manifest ('-' for stderr)")
    common.add_argument("--length-unit-m", type=float, default=DEFAULT_LENGTH_UNIT_M,
                        help="metres per reduced length unit, for SI-suffixed lengths and presets")

    parser = _Parser(prog="microcasimir", description="Microscopic many-body Casimir and Casimir-Polder energies.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("pair", parents=[common], help="two-body energy")
    p.add_argument("--material", default="perfect")
    p.add_argument("--r", required=True)
    p.add_argument("--regime", choices=["auto", "nonret", "ret", "full"], default="auto")

    p = sub.add_parser("triplet", parents=[common], help="three-body energy")
    p.add_argument("--material", default="perfect")
    p.add_argument("--sides", required=True)
    p.add_argument("--regime", choices=["auto", "nonret", "ret", "full"], default="auto")

    p = sub.add_parser("cp", parents=[common], help="nanoparticle / half-space")
    p.add_argument("--d", default="1")
    p.add_argument("--radius", default="1")
    p.add_argument("--order", choices=["2", "3", "both"], default="both")
    p.add_argument("--levels", type=int, default=halfspace.DEFAULT_LADDER_LEVELS)

    p = sub.add_parser("casimir", parents=[common], help="half-space / half-space per unit area")
    p.add_argument("--d", default="1")
    p.add_argument("--radius", default="1")
    p.add_argument("--order", choices=["2", "3", "both", "ideal"], default="both")
    p.add_argument("--w3-source", choices=["exact", "macroscopic", "microscopic"], default="exact")

    p = sub.add_parser("macro", parents=[common], help="macroscopic reference energies")
    p.add_argument("--epsilon", default="inf")
    p.add_argument("--order", choices=["total", "1", "2", "3"], default="total")

    p = sub.add_parser("convergence", parents=[common], help="convergence studies as CSV")
    p.add_argument("--study", choices=sorted(STUDIES), required=True)
    p.add_argument("--levels", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mc-samples", type=int, default=0)

    p = sub.add_parser("replay", help="re-run a manifest and compare outputs")
    p.add_argument("manifest_path")
    return parser


COMMANDS = {"pair": cmd_pair, "triplet": cmd_triplet, "cp": cmd_cp, "casimir": cmd_casimir, "macro": cmd_macro}


def _write_manifest(manifest: RunManifest, dest: str) -> None:
    if dest == "-":
        print(manifest.to_json(), file=sys.stderr)
    else:
        Path(dest).write_text(manifest.to_json() + "\n")


def _execute(args) -> tuple[str, list[dict[str, Any]], int]:
    if args.command == "convergence":
        report = cmd_convergence(args)
        text = report.to_csv()
        ok = bool(report.notes.get("monotone", True)) and bool(report.notes.get("converged", True))
        results = [{"param": r.param, "value": r.value, "error": r.error, "evals": r.evals} for r in report.rows]
        results.append({"notes": report.notes})
        return text, results, EXIT_OK if ok else EXIT_NUMERIC
    named = COMMANDS[args.command](args)
    text = render(named, args.format)
    results = [{"name": n, **r.to_dict(), "metadata": r.metadata} for n, r in named]
    code = EXIT_OK if all(r.converged for _, r in named) else EXIT_NUMERIC
    return text, results, code


def _replay(path: str) -> int:
    stored = json.loads(Path(path).read_text())
    argv = list(stored["argv"])
    args = build_parser().parse_args(argv)
    text, _, _ = _execute(args)
    sys.stdout.write(text)
    same = text == stored["output"]
    print(f"reproduced: {'yes' if same else 'NO'}", file=sys.stderr)
    return EXIT_OK if same else EXIT_NUMERIC


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "replay":
        return _replay(args.manifest_path)
    start = time.perf_counter()
    try:
        text, results, code = _execute(args)
    except (UsageError, ValueError) as exc:
        parser.print_usage(sys.stderr)
        print(f"microcasimir: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    sys.stdout.write(text)
    params = {k: v for k, v in vars(args).items() if k not in ("manifest",)}
    manifest = RunManifest(
        command=args.command, argv=argv, parameters=params,
        tolerances={"rel_tol": args.tol}, seed=getattr(args, "seed", None), version=__version__,
        wall_time=time.perf_counter() - start, results=results, output=text,
    )
    _write_manifest(manifest, args.manifest)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
