"""Command-line front end.

Exit codes: 0 on success, 2 when an input or precondition is rejected,
3 when an enumeration budget or solver cap is exhausted.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import random
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

from . import criteria, curvature, generators, layered, vel
from .sequences import (ExcessSpec, LayerSpec, SpecError, fraction_str, mixed_spec, rm1_spec,
                        seven_regular_spec)
from .triangulation import WindowError, ball, main_body, random_connected_selection

log = logging.getLogger("cptyper")

PRESETS = {
    "rm1": rm1_spec,
    "mixed": mixed_spec,
    "seven-regular": seven_regular_spec,
}


class UsageError(Exception):
    pass


def _load_spec(text: str | None) -> dict[str, Any] | None:
    """A preset name, a path to a JSON file, or inline JSON."""
    if text is None:
        return None
    if text in PRESETS:
        return PRESETS[text]().to_dict()
    path = Path(text)
    if path.exists():
        return json.loads(path.read_text())
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        raise UsageError(f"--spec is neither a preset, a file nor JSON: {text!r}") from None


def _generator(args) -> generators.GraphGenerator:
    spec = _load_spec(args.spec)
    kind = (args.gen or (spec or {}).get("kind") or "").replace("_", "-")
    if kind == "hexagonal":
        return generators.hexagonal()
    if spec is None:
        raise UsageError(f"--gen {kind or '?'} needs --spec")
    if kind == "layered":
        return generators.layered(LayerSpec.from_dict(spec))
    if kind == "ring-stack":
        return generators.ring_stack(ExcessSpec.from_dict(spec))
    raise UsageError(f"unknown generator {kind!r}")


def _window(args):
    if args.radius is None or args.radius < 1:
        raise UsageError("--radius must be at least 1")
    return _generator(args).build(args.radius)


def _emit(args, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _table(rows: list[dict[str, Any]], fmt: str) -> str:
    def enc(x):
        return fraction_str(x) if isinstance(x, Fraction) else x
    rows = [{k: enc(v) for k, v in r.items()} for r in rows]
    if fmt == "json":
        return json.dumps(rows, indent=1, sort_keys=True) + "\n"
    if not rows:
        return ""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def _json(data: Any) -> str:
    return json.dumps(data, indent=1, sort_keys=True, default=str) + "\n"


# ---------------------------------------------------------------------------
# commands


def cmd_generate(args) -> int:
    window = _window(args)
    _emit(args, window.to_json() + "\n")
    log.info("window with %d vertices", len(window))
    return 0


def cmd_profile(args) -> int:
    window = _window(args)
    n_max = args.nmax if args.nmax is not None else window.complete_radius - 1
    profile = criteria.excess_profile(window, window.root, n_max, main_bodies=args.main_bodies)
    rows = profile.rows()
    first, second = criteria.series_T1(profile)
    rs = criteria.series_rodin_sullivan(profile)
    nw = criteria.series_nash_williams(profile)
    acc = {"sum_inv_a": 0.0, "sum_inv_aa": 0.0, "sum_inv_S": 0.0, "sum_inv_dB": 0.0}
    for row in rows[1:]:
        n = row["n"]
        acc["sum_inv_a"] += 1 / profile.a[n]
        if n + 1 < len(profile.a):
            acc["sum_inv_aa"] += 1 / (profile.a[n] + profile.a[n + 1])
        acc["sum_inv_S"] += 1 / profile.sphere[n]
        acc["sum_inv_dB"] += 1 / profile.edge_boundary[n]
        row.update(acc)
    rows[0].update({k: 0.0 for k in acc})
    if args.format == "json":
        verdicts = {v.name: v.to_dict() for v in (first, second, rs, nw)}
        _emit(args, _json({"profile": rows, "series": verdicts}))
    else:
        _emit(args, _table(rows, "csv"))
    return 0


def cmd_gauss_bonnet(args) -> int:
    window = _window(args)
    n_max = args.nmax if args.nmax is not None else window.complete_radius - 1
    rows = []
    for n in range(n_max + 1):
        B = ball(window, window.root, n)
        for label, S in ((f"B_{n}", B), (f"A_{n}", main_body(B))):
            row = curvature.gauss_bonnet_row(S, label)
            rows.append(_gb_dict(row))
    rng = random.Random(args.seed)
    for i in range(args.samples):
        S = random_connected_selection(window, rng.randint(1, 40), rng, drop_edges=0.3)
        rows.append(_gb_dict(curvature.gauss_bonnet_row(S, f"random_{i}")))
    _emit(args, _table(rows, args.format))
    bad = [r for r in rows if r["residual1"] != "0/1" or r["residual2"] != "0/1"]
    return 1 if bad else 0


def _gb_dict(row: curvature.GaussBonnetRow) -> dict[str, Any]:
    return {"label": row.label, "kappa": row.kappa, "tau_o": row.tau_o, "chi": row.chi,
            "kappa_interior": row.kappa_interior, "tau_i": row.tau_i, "chi_interior": row.chi_interior,
            "residual1": fraction_str(row.residual1), "residual2": fraction_str(row.residual2)}


def _vel_target(args):
    """(window, family, exact value or None) for the vel command."""
    spec = _load_spec(args.spec) or {}
    kind = (args.gen or spec.get("kind") or "").replace("_", "-")
    if kind == "tiling":
        tiling = generators.SquareTiling.from_dict(spec)
        if tiling.shape == "ring" and not tiling.offsets:
            tiling = generators.ring_tiling(tiling.counts)
        exact, _, window = vel.vel_exact_tiling(tiling)
        return window, vel.tiling_family(window), exact
    if kind == "mesh":
        window = generators.triangular_mesh(generators.MeshSpec(int(spec.get("size", args.radius or 1))))
        rows = generators.mesh_rows(window)
        n = len(rows) - 1
        exact = sum((Fraction(1, k) for k in range(1, n + 2)), Fraction(0))
        return window, vel.PathFamily(frozenset(rows[0]), frozenset(rows[-1])), exact
    if kind == "comparison":
        lspec = LayerSpec.from_dict(spec)
        n = args.nmax or 1
        graph = generators.comparison_graph(lspec, n)
        exact = layered.vel_closed_form(lspec, n)[-1]
        return graph.window, vel.PathFamily(frozenset([graph.window.root]), frozenset(graph.terminals)), exact
    window = _window(args)
    return window, vel.frontier_family(window, [window.root]), None


def cmd_vel(args) -> int:
    window, family, exact = _vel_target(args)
    result = vel.vel_solve(window, family, tolerance=args.tolerance, iteration_cap=args.cap or 10_000)
    report = {"value": result.value, "lower": result.lower, "upper": result.upper, "rounds": result.rounds,
              "constraints": len(result.witnesses)}
    if exact is not None:
        report["exact"] = fraction_str(exact)
        report["error"] = abs(result.value - float(exact))
    if args.format == "csv":
        text = "vertex,mu\n" + "".join(f"{v},{x}\n" for v, x in result.metric.to_rows())
        _emit(args, text)
        sys.stderr.write(_json(report))
    else:
        report["metric"] = dict(result.metric.to_rows())
        report["trace"] = result.trace
        _emit(args, _json(report))
    return 0


def cmd_flow(args) -> int:
    spec = _load_spec(args.spec)
    if spec is None:
        raise UsageError("flow needs a ring-stack --spec")
    espec = ExcessSpec.from_dict(spec)
    rows = []
    if args.radius:
        window = generators.ring_stack(espec).build(args.radius)
        flow = vel.water_flow(window)
        residuals = flow.conservation_residuals()
        if any(r != 0 for r in residuals.values()) or flow.net_outflow(flow.source) != 1:
            log.error("flow conservation fails")
            return 1
        if args.format == "json" and args.nmax is None:
            _emit(args, _json({"edges": flow.to_rows()}))
            return 0
    n_max = args.nmax if args.nmax is not None else (args.radius or 2) - 1
    report = vel.ring_stack_energies(espec, n_max)
    for n in range(n_max + 1):
        rows.append({"n": n, "level_energy": report.level_energy[n], "truncated": report.truncated[n],
                     "truncated_float": float(report.truncated[n]), "bound": float(report.bound[n])})
    _emit(args, _table(rows, args.format))
    return 0 if report.ok else 1


def cmd_certify(args) -> int:
    window = _window(args)
    kind = args.kind
    if kind == "partition":
        parts = [[v] for v in window.complete_vertices]
        cert = criteria.partition_certificate(window, parts, Fraction(args.eps), args.K)
    elif kind == "ball-degree":
        cert = criteria.ball_degree_certificate(window, args.K)
    else:
        g = criteria.power(args.alpha) if args.g == "power" else criteria.log_power(args.alpha)
        S0 = ball(window, window.root, 1).vertices
        cert = criteria.perimetric_certificate(window, S0, g, args.cap or 12)
    _emit(args, _json(cert.to_dict()))
    return 0


def cmd_layered(args) -> int:
    spec = _load_spec(args.spec)
    if spec is None:
        raise UsageError("layered needs --spec")
    lspec = LayerSpec.from_dict(spec)
    n_max = args.nmax or 4
    _emit(args, _table(layered.table(lspec, n_max), args.format))
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cptyper", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, radius=True):
        p.add_argument("--gen", help="hexagonal, layered, ring-stack (vel also: tiling, mesh, comparison)")
        p.add_argument("--spec", help="preset name, JSON file or inline JSON")
        if radius:
            p.add_argument("--radius", type=int)
        p.add_argument("--nmax", type=int)
        p.add_argument("--out")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--tolerance", type=float, default=1e-6)
        p.add_argument("--cap", type=int)

    for name, func in (("generate", cmd_generate), ("profile", cmd_profile), ("gauss-bonnet", cmd_gauss_bonnet),
                       ("vel", cmd_vel), ("flow", cmd_flow), ("certify", cmd_certify), ("layered", cmd_layered)):
        p = sub.add_parser(name)
        common(p)
        p.set_defaults(func=func)
        if name == "profile":
            p.add_argument("--main-bodies", type=int, default=20,
                           help="check the extra-edge identity on A_n for n up to this radius")
        if name == "gauss-bonnet":
            p.add_argument("--samples", type=int, default=20, help="random connected selections")
        if name == "certify":
            p.add_argument("--kind", choices=("partition", "ball-degree", "perimetric"), required=True)
            p.add_argument("--eps", default="1/6")
            p.add_argument("-K", type=int, default=1)
            p.add_argument("--g", choices=("power", "log-power"), default="power")
            p.add_argument("--alpha", default="1")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.tolerance <= 0:
        sys.stderr.write("error: --tolerance must be positive\n")
        return 2
    try:
        return args.func(args)
    except (criteria.BudgetExceeded, vel.VelCapExceeded) as exc:
        sys.stderr.write(f"budget exceeded: {exc}\n")
        return 3
    except (UsageError, SpecError, WindowError, criteria.HypothesisViolated, ValueError, KeyError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
