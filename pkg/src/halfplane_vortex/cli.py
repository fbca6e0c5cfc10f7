"""Command-line front end: ``halfplane-vortex <subcommand> ...``.

Every run writes its outputs plus ``manifest.json`` into ``--out``. Exit
status: 0 success, 1 domain error or failed self-test, 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from . import __version__
from .errors import DomainError

FMT = ".17g"


def _floats(text: str, n: int | None = None, name: str = "value") -> list[float]:
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"{name}: expected comma-separated numbers, got {text!r}")
    if n is not None and len(vals) != n:
        raise argparse.ArgumentTypeError(f"{name}: expected {n} numbers, got {len(vals)}")
    return vals


def _grid6(text):
    v = _floats(text, 6, "--grid")
    if v[4] != int(v[4]) or v[5] != int(v[5]):
        raise argparse.ArgumentTypeError("--grid: nx and ny must be integers")
    return v[:4] + [int(v[4]), int(v[5])]


def _window4(text):
    return _floats(text, 4, "--window")


def _float_list(text):
    return _floats(text, None, "list")


def _write_manifest(out, subcommand, params, outputs):
    path = os.path.join(out, "manifest.json")
    with open(path, "w") as fh:
        json.dump({"subcommand": subcommand, "params": params, "outputs": outputs, "version": __version__},
                  fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _out(args, name):
    os.makedirs(args.out, exist_ok=True)
    return os.path.join(args.out, name)


def _params(args):
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "command")}


def cmd_simulate(args):
    from .integrator import IntegratorConfig, collapse_diagnostic, integrate, write_trajectory_csv
    from .model import dump_state, load_state

    state = load_state(args.state)
    cfg = IntegratorConfig(args.dt, args.steps, args.record_every)
    rec = integrate(state, cfg)
    outputs = [_out(args, "trajectory.csv")]
    write_trajectory_csv(rec, outputs[0])
    summary = {
        "samples": len(rec),
        "truncated": rec.truncated,
        "energy_drift_relative": format(rec.relative_energy_drift(), FMT),
        "momentum_drift": format(rec.momentum_drift(), FMT),
    }
    if args.collapse_diagnostic:
        rep = collapse_diagnostic(state, cfg)
        summary["collapse"] = {
            "monotone_decreasing": rep.monotone_decreasing,
            "zero_crossing": rep.zero_crossing,
            "r_min": format(rep.r_min, FMT),
            "exp_rate": format(rep.exp_rate, FMT),
            "algebraic_exponent": format(rep.algebraic_exponent, FMT),
            "truncated": rep.truncated,
        }
    path = _out(args, "summary.json")
    with open(path, "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    outputs.append(path)
    if args.emit_final:
        dump_state(rec.final_state, args.emit_final)
        outputs.append(args.emit_final)
    print(json.dumps(summary, sort_keys=True))
    return outputs


def cmd_phase(args):
    from .phase import PhaseCase, extract_level_curves, grid_evaluate, write_field_csv, write_polylines_csv

    case = PhaseCase(args.case, args.alpha)
    x0, x1, y0, y1, nx, ny = args.grid
    field = grid_evaluate(case, (x0, x1), (y0, y1), nx, ny)
    lines = extract_level_curves(field, args.levels or [])
    outputs = [_out(args, "field.csv"), _out(args, "levels.csv")]
    write_field_csv(field, outputs[0])
    write_polylines_csv(lines, outputs[1])
    print(f"{int(field.in_domain.sum())} in-domain samples, {len(lines)} polylines")
    return outputs


def cmd_equilibria(args):
    from .equilibria import EquilibriumFamily, MultistartSpec, solve_family, write_solutions_csv

    fam = EquilibriumFamily(args.family, args.alpha, args.beta)
    sols = solve_family(fam, MultistartSpec(random_starts=args.multistart, seed=args.seed))
    path = _out(args, "solutions.csv")
    write_solutions_csv(sols, path)
    for s in sols:
        print(f"{s.coords[0]:.6g} {s.coords[1]:.6g}  y3={s.derived_y3:.6g}  residual={s.residual_norm:.2e}")
    print(f"{len(sols)} solution(s)")
    return [path]


def cmd_streamlines(args):
    from .phase import write_field_csv
    from .streamlines import StreamConfig, field_grid, find_stagnation_points, write_stagnation_csv

    cfg = StreamConfig(args.config, args.alpha, args.beta)
    if args.window:
        x0, x1, y0, y1 = args.window
        if not (x1 > x0 and y1 > y0 and y0 >= 0):
            raise DomainError("--window needs x0 < x1 and 0 <= y0 < y1")
        region = ((x0, x1), (y0, y1))
    else:
        region = cfg.default_region()
    pts = find_stagnation_points(cfg, region)
    field = field_grid(cfg, region[0], (0.0, region[1][1]), args.resolution, args.resolution)
    outputs = [_out(args, "field.csv"), _out(args, "stagnation.csv")]
    write_field_csv(field, outputs[0])
    write_stagnation_csv(cfg, pts, outputs[1])
    for p in pts:
        print(f"{p.classification.value:10s} ({p.position[0]:.6g}, {p.position[1]:.6g})  det={p.hessian_det:.3e}")
    print(f"{len(pts)} stagnation point(s)")
    return outputs


def cmd_certify(args):
    from .equilibria import stacked_equilibrium_check, verify_no_equilibrium_opposite

    cert = verify_no_equilibrium_opposite(args.ymax, args.samples, seed=args.seed)
    report = {
        "opposite_pair": {
            "samples": cert.samples,
            "min_gap": format(cert.min_gap, FMT),
            "argmin_y1_y2_dx": [format(v, FMT) for v in cert.argmin],
            "min_geometric_part": format(cert.min_geometric, FMT),
            "model_mismatch": format(cert.model_mismatch, FMT),
            "no_equilibrium": cert.positive,
        },
        "stacked": [],
    }
    for a in args.alpha_list:
        r = stacked_equilibrium_check(a)
        report["stacked"].append({
            "alpha": format(a, FMT),
            "xdot": [format(v, FMT) for v in r.xdot],
            "ydot": [format(v, FMT) for v in r.ydot],
            "speed": format(r.speed, FMT),
            "relative_equilibrium": r.is_relative_equilibrium,
        })
    path = _out(args, "certificate.json")
    with open(path, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"opposite pair: min xdot1-xdot2 = {cert.min_gap:.3e} over {cert.samples} samples")
    for s in report["stacked"]:
        print(f"stacked alpha={s['alpha']}: relative equilibrium {s['relative_equilibrium']}, speed {s['speed']}")
    ok = cert.positive and all(s["relative_equilibrium"] for s in report["stacked"])
    return [path], ok


def cmd_selftest(args):
    from .acceptance import CRITERIA

    results = []
    for c in CRITERIA:
        r = c()
        print(r.line(), flush=True)
        results.append(r)
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} criteria passed")
    path = _out(args, "selftest.json")
    with open(path, "w") as fh:
        json.dump([{"criterion": r.number, "name": r.name, "passed": r.passed, "detail": r.detail}
                   for r in results], fh, indent=2)
        fh.write("\n")
    return [path], passed == len(results)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="halfplane-vortex", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--out", default=".", help="output directory (default: current)")
        sp.set_defaults(func=func)
        return sp

    s = add("simulate", cmd_simulate, "integrate a state JSON with RK4")
    s.add_argument("--state", required=True, help="state JSON file")
    s.add_argument("--dt", type=float, default=1e-3)
    s.add_argument("--steps", type=int, default=10000)
    s.add_argument("--record-every", type=int, default=10)
    s.add_argument("--collapse-diagnostic", action="store_true")
    s.add_argument("--emit-final", metavar="PATH", help="write the final state JSON here")

    s = add("phase", cmd_phase, "reduced Hamiltonian field and level curves")
    s.add_argument("--case", required=True, choices=["two_layer_opposite", "two_layer_same", "one_layer_case1",
                                                     "one_layer_case2", "one_layer_case3"])
    s.add_argument("--alpha", type=float, default=0.0)
    s.add_argument("--grid", type=_grid6, required=True, metavar="x0,x1,y0,y1,nx,ny")
    s.add_argument("--levels", type=float, nargs="*", default=[])

    s = add("equilibria", cmd_equilibria, "solve a symmetric three-vortex family")
    s.add_argument("--family", required=True, choices=["horizontal", "vertical"])
    s.add_argument("--alpha", type=float, required=True)
    s.add_argument("--beta", type=float, required=True)
    s.add_argument("--multistart", type=int, default=200, help="number of random starts")
    s.add_argument("--seed", type=int, default=42)

    s = add("streamlines", cmd_streamlines, "layer-1 streamfunction and stagnation points")
    s.add_argument("--config", required=True, choices=["same_sign_horizontal", "same_sign_vertical",
                                                       "opposite_horizontal", "opposite_vertical"])
    s.add_argument("--alpha", type=float, required=True)
    s.add_argument("--beta", type=float, required=True)
    s.add_argument("--window", type=_window4, metavar="x0,x1,y0,y1")
    s.add_argument("--resolution", type=int, default=200, help="field samples per axis")

    s = add("certify", cmd_certify, "two-vortex equilibrium certificates")
    s.add_argument("--ymax", type=float, default=10.0)
    s.add_argument("--samples", type=int, default=100_000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--alpha-list", type=_float_list, default=[0.5, 1.0, 2.0, 4.0], metavar="a1,a2,...")

    add("selftest", cmd_selftest, "run the acceptance suite")
    return p


def _join_list_flags(argv):
    """Turn ``--grid -1,...`` into ``--grid=-1,...`` so argparse accepts negative lists."""
    out = []
    it = iter(argv)
    for a in it:
        if a in ("--grid", "--window", "--alpha-list"):
            nxt = next(it, None)
            out.append(a if nxt is None else f"{a}={nxt}")
        else:
            out.append(a)
    return out


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(_join_list_flags(sys.argv[1:] if argv is None else list(argv)))
    if getattr(args, "multistart", 0) < 0 or (args.command == "simulate" and args.record_every < 1):
        parser.error("counts must be non-negative")
    try:
        result = args.func(args)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    outputs, ok = result if isinstance(result, tuple) else (result, True)
    _write_manifest(args.out, args.command, _params(args), outputs)
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
