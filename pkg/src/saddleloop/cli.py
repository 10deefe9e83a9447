"""Batch command-line interface.

Commands: classify, slice, portrait, continue, sphere. Every command
echoes its resolved configuration as JSON on stdout before any output;
re-running from the same configuration reproduces outputs byte for byte.

Exit codes: 0 success, 2 usage/parameter error, 3 numerical failure
(diagnostic JSON on stderr).
"""
from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import continuation, manifolds, models, normalform
from .flow import (EquilibriumClass, FlowError, find_all_equilibria, integrate)
from .manifolds import ManifoldError, compute_separatrix
from .normalform import (DegeneracyError, DomainError, ParameterError,
                         RangeError, UnfoldingParams, classify_loop_type,
                         classify_regime, slice_atlas, sphere_atlas)
from .svg import SvgCanvas

SCHEMA_LINE = "# schema: v1"

REGION_COLORS = {
    "NonCentralSNICeroclinic": "#000000",
    "HeteroclinicLoop": "#1b1b1b",
    "HeteroclinicGamma1Only": "#8c6bb1",
    "NonCentralHetGamma2Only": "#6baed6",
    "CentralHetGamma2WithPO": "#fee391",
    "CentralHeteroclinicLoop": "#3182bd",
    "HomoclinicP2": "#31a354",
    "HomoclinicP1": "#74c476",
    "NonCentralSNIC": "#e34a33",
    "CentralSNIC": "#fcae91",
    "PeriodicOrbitBothSeparatrices": "#ffffcc",
    "PeriodicOrbitGamma2Only": "#ffeda0",
    "PeriodicOrbitGamma1Only": "#fed976",
    "NoInvariantSet": "#ffffff",
}

EQ_COLORS = {
    EquilibriumClass.SADDLE: "#e377c2",
    EquilibriumClass.SADDLE_NODE_CANDIDATE: "#ffdf00",
    EquilibriumClass.STABLE_NODE: "#1f77b4",
    EquilibriumClass.UNSTABLE_NODE: "#2ca02c",
    EquilibriumClass.STABLE_FOCUS: "#17becf",
    EquilibriumClass.UNSTABLE_FOCUS: "#98df8a",
    EquilibriumClass.DEGENERATE: "#7f7f7f",
}


class CliError(Exception):
    """Usage or parameter problem; maps to exit code 2."""


def _echo_config(args: argparse.Namespace, command: str):
    cfg = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    cfg["command"] = command
    print(json.dumps(cfg, sort_keys=True))


def _unfolding_from_args(args) -> UnfoldingParams:
    try:
        return UnfoldingParams(mu1=getattr(args, "mu1", 0.0),
                               mu2=getattr(args, "mu2", 0.0),
                               mu3=getattr(args, "mu3", 0.0), rho=args.rho,
                               lambda_s=args.ls, lambda_u=args.lu,
                               delta=args.delta, eps=args.eps,
                               a1=args.a1, a2=args.a2)
    except (ParameterError, DegeneracyError) as err:
        raise CliError(str(err)) from err


def _parse_params(items) -> dict[str, float]:
    out: dict[str, float] = {}
    for item in items or []:
        if "=" not in item:
            raise CliError(f"parameter override {item!r} is not name=value")
        k, v = item.split("=", 1)
        try:
            out[k.strip()] = float(v)
        except ValueError:
            raise CliError(f"parameter {k!r} has non-numeric value {v!r}") from None
    return out


def _resolve_model(ref: str, overrides: dict[str, float]):
    if ref in models.BUILTIN_NAMES:
        try:
            return models.builtin(ref, **overrides)
        except KeyError as err:
            raise CliError(str(err)) from err
    if os.path.exists(ref):
        try:
            fld = models.load_model(ref)
            return fld.with_params(**overrides) if overrides else fld
        except (ValueError, KeyError) as err:
            raise CliError(f"bad model file {ref!r}: {err}") from err
    raise CliError(f"unknown model {ref!r}: not a builtin "
                   f"{models.BUILTIN_NAMES} and not a file")


def _csv_open(path):
    fh = open(path, "w", encoding="utf-8", newline="\n")
    fh.write(SCHEMA_LINE + "\n")
    return fh


def _floats(csv_text: str, n: int, what: str) -> tuple[float, ...]:
    parts = csv_text.split(",")
    if len(parts) != n:
        raise CliError(f"{what} needs {n} comma-separated numbers")
    try:
        return tuple(float(p) for p in parts)
    except ValueError:
        raise CliError(f"{what} has a non-numeric entry: {csv_text!r}") from None


def cmd_classify(args):
    p = _unfolding_from_args(args)
    try:
        label = classify_regime((args.mu1, args.mu2, args.mu3), p, tol=args.tol)
        loop = classify_loop_type(p.rho, p.lambda_s, p.lambda_u)
    except (ParameterError, DegeneracyError, DomainError) as err:
        raise CliError(str(err)) from err
    curves = {}
    try:
        curves["homoclinic_p2_mu2"] = normalform.curve_homoclinic_p2(args.mu3, p)
    except (RangeError, DomainError):
        curves["homoclinic_p2_mu2"] = None
    try:
        curves["r1_zero_mu3"] = normalform.curve_r1_zero(args.mu2, p)
    except (RangeError, DomainError):
        curves["r1_zero_mu3"] = None
    print(json.dumps({
        "region": label.region.value,
        "separatrix_fate_g1": label.separatrix_fate_g1.value,
        "separatrix_fate_g2": label.separatrix_fate_g2.value,
        "loop_type": loop.value,
        "curves": curves,
    }, sort_keys=True))
    return 0


def cmd_slice(args):
    p = _unfolding_from_args(args)
    g = _floats(args.grid, 4, "--grid")
    if args.n < 2:
        raise CliError("--n must be at least 2")
    try:
        mu2s, mu3s, labels = slice_atlas(args.mu1, (g[0], g[1]), (g[2], g[3]),
                                         args.n, p, tol=args.tol)
    except ParameterError as err:
        raise CliError(str(err)) from err
    os.makedirs(args.out, exist_ok=True)
    csv_path = os.path.join(args.out, "slice.csv")
    with _csv_open(csv_path) as fh:
        fh.write("mu2,mu3,region\n")
        for i, m2 in enumerate(mu2s):
            for j, m3 in enumerate(mu3s):
                fh.write(f"{m2!r},{m3!r},{labels[i, j].region.value}\n")
    _slice_svg(os.path.join(args.out, "slice.svg"), args.mu1, mu2s, mu3s,
               labels, p)
    print(f"wrote {csv_path}")
    return 0


def _slice_svg(path, mu1, mu2s, mu3s, labels, p: UnfoldingParams):
    window = (mu2s[0], mu2s[-1], mu3s[0], mu3s[-1])
    canvas = SvgCanvas(window)
    w2 = mu2s[1] - mu2s[0]
    w3 = mu3s[1] - mu3s[0]
    for i, m2 in enumerate(mu2s):
        for j, m3 in enumerate(mu3s):
            color = REGION_COLORS[labels[i, j].region.value]
            canvas.rect(m2 - w2 / 2, m3 - w3 / 2, w2, w3, color)
    # overlay the analytic curves
    mu1_eff = 0.0 if abs(mu1) < normalform.MU1_ZERO else mu1
    hc = []
    floor = np.sqrt(mu1_eff) if mu1_eff > 0 else (0.0 if mu1_eff == 0 else None)
    for m3 in np.linspace(mu3s[0], mu3s[-1], 600):
        if floor is not None and m3 <= floor + 1e-12:
            continue
        try:
            hc.append((normalform.curve_homoclinic_p2(float(m3),
                                                      p.with_mu(mu1, 0, 0)), m3))
        except (RangeError, DomainError):
            continue
    canvas.polyline([pt for pt in hc if window[0] <= pt[0] <= window[1]],
                    color="#006d2c", width=1.5)
    if mu1_eff >= 0:
        snic = []
        for m2 in np.linspace(mu2s[0], mu2s[-1], 600):
            if m2 >= 0:
                continue
            try:
                snic.append((m2, normalform.curve_r1_zero(float(m2),
                                                          p.with_mu(mu1, 0, 0))))
            except (RangeError, DomainError):
                continue
        canvas.polyline([pt for pt in snic if window[2] <= pt[1] <= window[3]],
                        color="#a50f15", width=1.5)
    canvas.axes("mu2", "mu3")
    canvas.text(canvas.margin, 20, f"regimes at mu1 = {mu1:g}")
    canvas.write(path)


def cmd_portrait(args):
    fld = _resolve_model(args.model, _parse_params(args.params))
    box = _floats(args.box, 4, "--box")
    ics = [_floats(ic, 2, "--ic") for ic in (args.ic or [])]
    os.makedirs(args.out, exist_ok=True)
    try:
        equilibria = find_all_equilibria(fld, box, grid_n=args.grid_n)
    except FlowError as err:
        _numerical_failure(err)
    trajectories = []
    for ic in ics:
        trajectories.append(integrate(fld, ic, (0.0, args.tmax),
                                      rtol=1e-9, atol=1e-12))
    separatrices = []
    for eq in equilibria:
        flavors = []
        if eq.eq_class is EquilibriumClass.SADDLE:
            flavors = ["unstable", "stable"]
        elif eq.eq_class is EquilibriumClass.SADDLE_NODE_CANDIDATE:
            flavors = ["center_unstable", "center_stable", "stable"]
        for flavor in flavors:
            for branch in ("plus", "minus"):
                try:
                    separatrices.append(compute_separatrix(
                        fld, eq, flavor, branch, offset=1e-5,
                        horizon=args.sep_time, rtol=1e-9, max_step=1.0))
                except (ValueError, FlowError):
                    continue

    traj_path = os.path.join(args.out, "trajectories.csv")
    with _csv_open(traj_path) as fh:
        fh.write("kind,index,flavor,t,x,y\n")
        for i, tr in enumerate(trajectories):
            for t, s in zip(tr.t, tr.states):
                fh.write(f"trajectory,{i},,{t!r},{s[0]!r},{s[1]!r}\n")
        for i, sep in enumerate(separatrices):
            for t, s in zip(sep.trajectory.t, sep.trajectory.states):
                fh.write(f"separatrix,{i},{sep.flavor}_{sep.branch},"
                         f"{t!r},{s[0]!r},{s[1]!r}\n")
    eq_path = os.path.join(args.out, "equilibria.json")
    with open(eq_path, "w", encoding="utf-8") as fh:
        json.dump([{
            "position": [float(e.position[0]), float(e.position[1])],
            "class": e.eq_class.value,
            "eigenvalues_real": [float(v) for v in e.eigenvalues.real],
            "eigenvalues_imag": [float(v) for v in e.eigenvalues.imag],
        } for e in equilibria], fh, sort_keys=True, indent=1)
        fh.write("\n")

    canvas = SvgCanvas((box[0], box[1], box[2], box[3]))
    for sep in separatrices:
        pts = [(s[0], s[1]) for s in sep.trajectory.states
               if box[0] <= s[0] <= box[1] and box[2] <= s[1] <= box[3]]
        stable_side = sep.flavor in manifolds.BACKWARD_FLAVORS
        canvas.polyline(pts, color="#888888", width=1.0, dashed=not stable_side)
    for tr in trajectories:
        pts = [(s[0], s[1]) for s in tr.states]
        canvas.polyline(pts, color="#000000", width=1.4)
    for e in equilibria:
        canvas.circle(e.position[0], e.position[1], 5.0,
                      EQ_COLORS[e.eq_class])
    canvas.axes("x", "y")
    canvas.text(canvas.margin, 20, f"phase portrait: {args.model}")
    canvas.write(os.path.join(args.out, "portrait.svg"))
    print(f"wrote {traj_path}")
    return 0


def cmd_continue(args):
    fld = _resolve_model(args.model, _parse_params(args.params))
    if args.param not in dict(fld.param_schema):
        raise CliError(f"model has no parameter {args.param!r}")
    rng = _floats(args.range, 2, "--range")
    if rng[0] == rng[1]:
        raise CliError("--range must be a nondegenerate interval")
    box = _floats(args.box, 4, "--box")
    os.makedirs(args.out, exist_ok=True)
    try:
        branches = continuation.continue_equilibria(fld, args.param, rng,
                                                    seed_box=box)
    except (FlowError, continuation.ContinuationError) as err:
        _numerical_failure(err)
    events = continuation.merged_events(branches)

    csv_path = os.path.join(args.out, "branches.csv")
    with _csv_open(csv_path) as fh:
        fh.write("branch,param,x,y,eig1_re,eig1_im,eig2_re,eig2_im,"
                 "det,trace,stable\n")
        for bi, br in enumerate(branches):
            for row in continuation.branch_csv_rows(br):
                fh.write(",".join([str(bi)] + [repr(v) if isinstance(v, float)
                                               else str(v) for v in row]) + "\n")

    periodic_info = None
    if args.periodic:
        try:
            pb = continuation.track_periodic(fld, args.param, rng, box=box)
            labels = {}
            for side in ("lower", "upper"):
                bracket = getattr(pb, f"{side}_bracket")
                if bracket is None:
                    labels[side] = "open"
                    continue
                q_in = bracket[1] if side == "lower" else bracket[0]
                sample = next(s for s in pb.samples if s.param == q_in)
                try:
                    labels[side] = continuation.classify_cycle_end(
                        fld, args.param, sample, side=side, box=box,
                        period_threshold=args.period_threshold)
                except continuation.ContinuationError as err:
                    labels[side] = f"unclassified ({err})"
            periodic_info = {
                "lower_bracket": pb.lower_bracket,
                "upper_bracket": pb.upper_bracket,
                "endpoint_labels": labels,
                "n_samples": len(pb.samples),
            }
        except continuation.ContinuationError as err:
            periodic_info = {"error": str(err)}

    ev_path = os.path.join(args.out, "events.json")
    with open(ev_path, "w", encoding="utf-8") as fh:
        json.dump({
            "events": [{"kind": e.kind, "param": e.param,
                        "state": [float(e.state[0]), float(e.state[1])]}
                       for e in events],
            "periodic": periodic_info,
        }, fh, sort_keys=True, indent=1)
        fh.write("\n")
    print(f"wrote {csv_path}")
    return 0


def cmd_sphere(args):
    p = _unfolding_from_args(args)
    if args.samples < 1:
        raise CliError("--samples must be positive")
    try:
        atlas = sphere_atlas(args.radius, args.samples, p, tol=args.tol)
    except ParameterError as err:
        raise CliError(str(err)) from err
    os.makedirs(args.out, exist_ok=True)
    csv_path = os.path.join(args.out, "sphere.csv")
    with _csv_open(csv_path) as fh:
        fh.write("mu1,mu2,mu3,proj_x,proj_y,region\n")
        for mu, proj, label in atlas:
            fh.write(f"{mu[0]!r},{mu[1]!r},{mu[2]!r},{proj[0]!r},{proj[1]!r},"
                     f"{label.region.value}\n")
    print(f"wrote {csv_path}")
    return 0


def _numerical_failure(err):
    sys.stderr.write(json.dumps({"error": type(err).__name__,
                                 "message": str(err)}) + "\n")
    raise SystemExit(3)


def _add_unfolding_flags(sp, with_mu23: bool = True):
    sp.add_argument("--mu1", type=float, required=True)
    if with_mu23:
        sp.add_argument("--mu2", type=float, required=True)
        sp.add_argument("--mu3", type=float, required=True)
    sp.add_argument("--rho", type=float, default=-1.0,
                    help="non-central eigenvalue (default -1)")
    sp.add_argument("--ls", type=float, default=-2.0,
                    help="stable saddle eigenvalue (default -2)")
    sp.add_argument("--lu", type=float, default=1.0,
                    help="unstable saddle eigenvalue (default 1)")
    sp.add_argument("--delta", type=float, default=0.1,
                    help="half-width of the saddle-node box (default 0.1)")
    sp.add_argument("--eps", type=float, default=0.1,
                    help="half-width of the saddle box (default 0.1)")
    sp.add_argument("--a1", type=float, default=-1.0)
    sp.add_argument("--a2", type=float, default=-1.0)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="saddleloop",
        description="Planar saddle-node/saddle separatrix-loop toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("classify", help="regime at one unfolding point")
    _add_unfolding_flags(sp)
    sp.add_argument("--tol", type=float, default=1e-9,
                    help="curve-membership tolerance (default 1e-9)")
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("slice", help="regime atlas on a (mu2, mu3) grid")
    _add_unfolding_flags(sp, with_mu23=False)
    sp.add_argument("--grid", required=True,
                    help="mu2_lo,mu2_hi,mu3_lo,mu3_hi")
    sp.add_argument("--n", type=int, required=True, help="grid nodes per axis")
    sp.add_argument("--tol", type=float, default=None,
                    help="curve tolerance (default: half a grid cell)")
    sp.add_argument("--out", required=True, help="output directory")
    sp.set_defaults(func=cmd_slice)

    sp = sub.add_parser("portrait", help="phase portrait with separatrices")
    sp.add_argument("--model", required=True,
                    help=f"builtin {models.BUILTIN_NAMES} or a JSON file")
    sp.add_argument("--params", nargs="*", metavar="NAME=VALUE")
    sp.add_argument("--ic", action="append", metavar="X,Y",
                    help="initial condition (repeatable)")
    sp.add_argument("--tmax", type=float, default=100.0)
    sp.add_argument("--sep-time", type=float, default=60.0,
                    help="separatrix integration horizon (default 60)")
    sp.add_argument("--box", default="-8,8,-4,4",
                    help="equilibrium search box x_lo,x_hi,y_lo,y_hi")
    sp.add_argument("--grid-n", type=int, default=15)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_portrait)

    sp = sub.add_parser("continue",
                        help="equilibrium continuation with SN/HB events")
    sp.add_argument("--model", required=True)
    sp.add_argument("--params", nargs="*", metavar="NAME=VALUE")
    sp.add_argument("--param", required=True, help="continuation parameter")
    sp.add_argument("--range", required=True, help="lo,hi")
    sp.add_argument("--box", default="-8,8,-4,4")
    sp.add_argument("--periodic", action="store_true",
                    help="also track the attracting cycle and label its "
                         "endpoints (slow)")
    sp.add_argument("--period-threshold", type=float, default=100.0,
                    help="period blow-up threshold for endpoint labels")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_continue)

    sp = sub.add_parser("sphere", help="regime atlas on a parameter sphere")
    sp.add_argument("--radius", type=float, required=True)
    sp.add_argument("--samples", type=int, required=True)
    sp.add_argument("--rho", type=float, default=-1.0)
    sp.add_argument("--ls", type=float, default=-2.0)
    sp.add_argument("--lu", type=float, default=1.0)
    sp.add_argument("--delta", type=float, default=0.1)
    sp.add_argument("--eps", type=float, default=0.1)
    sp.add_argument("--a1", type=float, default=-1.0)
    sp.add_argument("--a2", type=float, default=-1.0)
    sp.add_argument("--tol", type=float, default=1e-9)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_sphere)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    _echo_config(args, args.command)
    try:
        return args.func(args)
    except CliError as err:
        sys.stderr.write(f"error: {err}\n")
        return 2
    except (ParameterError, DegeneracyError, DomainError, RangeError,
            ValueError, KeyError) as err:
        sys.stderr.write(f"error: {err}\n")
        return 2
    except (FlowError, ManifoldError, continuation.ContinuationError,
            ArithmeticError) as err:
        sys.stderr.write(json.dumps({"error": type(err).__name__,
                                     "message": str(err)}) + "\n")
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
