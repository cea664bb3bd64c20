"""Command-line front end emitting CSV/JSON artifacts.

All commands are deterministic: identical inputs produce byte-identical
output files.  Numeric failures exit with status 3 and a machine-readable
JSON error on stderr; usage errors exit with status 2.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import charfun, kernels, model, simulate, stability
from .errors import AngioDelayError

_DEFAULT_PARAMS = model.HAHNFELDT_PARAMS


def _fmt(value) -> str:
    if isinstance(value, float):
        if math.isinf(value):
            return "inf"
        return f"{value:.12g}"
    return str(value)


def _write_csv(path, header, rows):
    lines = [",".join(header)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    text = "\n".join(lines) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _write_json(path, payload):
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _load_params(args):
    if getattr(args, "params", None):
        with open(args.params) as fh:
            return model.params_from_json(fh.read())
    return _DEFAULT_PARAMS, model.LOG_GROWTH


def _with_overrides(params, args):
    updates = {}
    if getattr(args, "alpha", None) is not None:
        updates["alpha"] = args.alpha
    if getattr(args, "mu", None) is not None:
        updates["mu"] = args.mu
    if not updates:
        return params
    data = params.to_dict()
    data.update(updates)
    return model.ModelParams(**data)


def _parse_grid(spec: str) -> np.ndarray:
    try:
        start, stop, step = (float(part) for part in spec.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must be start:stop:step, got {spec!r}")
    if step <= 0 or stop < start:
        raise argparse.ArgumentTypeError(f"bad grid {spec!r}")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(n)


def _parse_floats(spec: str):
    return [float(p) for p in spec.split(",") if p != ""]


def _parse_ints(spec: str):
    return [int(p) for p in spec.split(",") if p != ""]


def _tau_critical(params, m):
    a_cr = stability.critical_erlang_rate(params, m, m)
    if a_cr is stability.ALWAYS_STABLE:
        return math.inf
    return m / a_cr


def cmd_steady(args):
    params, _ = _load_params(args)
    params = _with_overrides(params, args)
    eq = model.steady_state(params)
    rates = model.derived_rates(params)
    _write_json(args.out, {
        "p_e": eq.p_e, "q_e": eq.q_e,
        "beta": rates.beta, "gamma": rates.gamma,
        "params": params.to_dict(),
    })
    return 0


def cmd_critical_a(args):
    params, _ = _load_params(args)
    params = _with_overrides(params, args)
    a_cr = stability.critical_erlang_rate(params, args.m1, args.m2)
    always = a_cr is stability.ALWAYS_STABLE
    payload = {
        "m1": args.m1, "m2": args.m2,
        "always_stable": always,
        "a_critical": None if always else a_cr,
        "tau_critical": "inf" if always else max(args.m1, args.m2) / a_cr,
        "params": params.to_dict(),
    }
    _write_json(args.out, payload)
    return 0


def cmd_critical_sigma(args):
    params, _ = _load_params(args)
    params = _with_overrides(params, args)
    result = stability.critical_erlang_shift(params, args.m1, args.m2, args.a)
    if isinstance(result, stability.UnstableAtZero):
        payload = {"unstable_at_zero": True, "rhp_count": result.rhp_count}
    else:
        payload = {
            "unstable_at_zero": False,
            "sigma0": result.sigma0,
            "omega0": result.omega0,
            "multiple_root": result.multiple_root,
            "candidates": [
                {"omega": c.omega, "sigma_first": c.sigma_first,
                 "period": c.period, "direction": c.direction, "simple": c.simple}
                for c in result.candidates
            ],
        }
    payload["params"] = params.to_dict()
    payload["a"] = args.a
    _write_json(args.out, payload)
    return 0


def cmd_switch_curve(args):
    params, _ = _load_params(args)
    params = _with_overrides(params, args)
    curve = stability.tent_switch_curve(params, args.grid)
    rows = list(zip(curve.epsilon, curve.sigma, curve.omega))
    _write_csv(args.out, ["epsilon", "sigma_cr", "omega0"], rows)
    return 0


def cmd_fig_zabek(args):
    params, _ = _load_params(args)
    params = _with_overrides(params, args)
    rows = []
    for mu in args.mu_list:
        data = params.to_dict()
        data["mu"] = mu
        p_mu = model.ModelParams(**data)
        curve = stability.tent_switch_curve(p_mu, args.grid)
        rows += [(mu, e, s, w) for e, s, w in zip(curve.epsilon, curve.sigma, curve.omega)]
    _write_csv(args.out, ["mu", "epsilon", "sigma_cr", "omega0"], rows)
    return 0


def cmd_hodograph(args):
    params, _ = _load_params(args)
    params = _with_overrides(params, args)
    k1 = kernels.kernel_from_json(args.kernel1)
    k2 = kernels.kernel_from_json(args.kernel2)
    cf = charfun.CharFunction(params, k1, k2)
    omegas = np.linspace(0.0, args.omega_max, args.steps + 1)
    pts = charfun.hodograph_points(cf, omegas)
    _write_csv(args.out, ["omega", "re_W", "im_W"], [tuple(row) for row in pts])
    return 0


def cmd_simulate(args):
    params, h = _load_params(args)
    params = _with_overrides(params, args)
    k1 = kernels.kernel_from_json(args.kernel1)
    k2 = kernels.kernel_from_json(args.kernel2)
    cfg = simulate.SimConfig(dt=args.dt, T=args.T, quad_order=args.quad_order)
    initial = simulate.constant_history(args.x0, args.y0)
    traj = simulate.simulate(params, h, k1, k2, initial, cfg)
    p, q = traj.original_coordinates()
    rows = list(zip(traj.t, traj.x, traj.y, p, q))
    _write_csv(args.out, ["t", "x", "y", "p", "q"], rows)
    verdict = simulate.classify_trajectory(traj, window=args.T / 4.0)
    meta = {
        "params": params.to_dict(),
        "kernel1": k1.to_dict(),
        "kernel2": k2.to_dict(),
        "config": cfg.to_dict(),
        "initial": {"x0": args.x0, "y0": args.y0},
        "classification": {
            "kind": type(verdict).__name__,
            **{k: v for k, v in getattr(verdict, "__dict__", {}).items()},
        },
    }
    meta_path = None if args.out in (None, "-") else args.out + ".meta.json"
    _write_json(meta_path, meta)
    return 0


def cmd_table1(args):
    params, _ = _load_params(args)
    rows = []
    for alpha in args.alpha_list:
        for mu in args.mu_list:
            for m in args.m_list:
                data = params.to_dict()
                data["alpha"] = alpha
                data["mu"] = mu
                rows.append((alpha, mu, m, _tau_critical(model.ModelParams(**data), m)))
    _write_csv(args.out, ["alpha", "mu", "m", "tau_cr0"], rows)
    return 0


def cmd_fig_zalodmu(args):
    params, _ = _load_params(args)
    rows = []
    for m in args.m_list:
        for mu in args.grid:
            data = params.to_dict()
            data["alpha"] = args.alpha if args.alpha is not None else params.alpha
            data["mu"] = mu
            rows.append((m, mu, _tau_critical(model.ModelParams(**data), m)))
    _write_csv(args.out, ["m", "mu", "tau_cr0"], rows)
    return 0


_AKR_CASES = ((1, 1), (2, 2), (3, 3), (1, 2), (2, 1))


def cmd_fig_akr(args):
    params, _ = _load_params(args)
    rows = []
    for m1, m2 in _AKR_CASES:
        for mu in args.grid:
            data = params.to_dict()
            data["alpha"] = args.alpha if args.alpha is not None else params.alpha
            data["mu"] = mu
            a_cr = stability.critical_erlang_rate(model.ModelParams(**data), m1, m2)
            rows.append((m1, m2, mu, 0.0 if a_cr is stability.ALWAYS_STABLE else a_cr))
    _write_csv(args.out, ["m1", "m2", "mu", "a_cr"], rows)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="angiodelay",
        description="Analyze and simulate angiogenesis models with distributed delays",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out_default=None):
        p.add_argument("--params", help="JSON parameter file")
        p.add_argument("--alpha", type=float, help="override alpha")
        p.add_argument("--mu", type=float, help="override mu")
        p.add_argument("--out", default=out_default, help="output path ('-' for stdout)")

    p = sub.add_parser("steady", help="steady state and derived rates")
    common(p)
    p.set_defaults(func=cmd_steady)

    p = sub.add_parser("critical-a", help="critical Erlang rate at zero shift")
    common(p)
    p.add_argument("--m1", type=int, required=True)
    p.add_argument("--m2", type=int, required=True)
    p.set_defaults(func=cmd_critical_a)

    p = sub.add_parser("critical-sigma", help="first destabilising shift for Erlang kernels")
    common(p)
    p.add_argument("--m1", type=int, required=True)
    p.add_argument("--m2", type=int, required=True)
    p.add_argument("--a", type=float, required=True)
    p.set_defaults(func=cmd_critical_sigma)

    p = sub.add_parser("switch-curve", help="tent-kernel stability switch curve")
    common(p)
    p.add_argument("--grid", type=_parse_grid, required=True,
                   help="half-width grid start:stop:step")
    p.set_defaults(func=cmd_switch_curve)

    p = sub.add_parser("fig-zabek", help="switch curves for several treatment rates")
    common(p)
    p.add_argument("--grid", type=_parse_grid, required=True)
    p.add_argument("--mu-list", dest="mu_list", type=_parse_floats, required=True)
    p.set_defaults(func=cmd_fig_zabek)

    p = sub.add_parser("hodograph", help="characteristic values along the imaginary axis")
    common(p)
    p.add_argument("--kernel1", required=True, help="kernel JSON")
    p.add_argument("--kernel2", required=True, help="kernel JSON")
    p.add_argument("--omega-max", dest="omega_max", type=float, default=20.0)
    p.add_argument("--steps", type=int, default=2000)
    p.set_defaults(func=cmd_hodograph)

    p = sub.add_parser("simulate", help="integrate the nonlinear system")
    common(p)
    p.add_argument("--kernel1", required=True)
    p.add_argument("--kernel2", required=True)
    p.add_argument("--x0", type=float, default=0.1)
    p.add_argument("--y0", type=float, default=0.1)
    p.add_argument("--dt", type=float, required=True)
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--quad-order", dest="quad_order", type=int, default=8)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("table1", help="critical average delays over a treatment/shape grid")
    common(p)
    p.add_argument("--alpha-list", dest="alpha_list", type=_parse_floats, default=[1.0, 0.0])
    p.add_argument("--mu-list", dest="mu_list", type=_parse_floats,
                   default=[0.0, 2.0, 4.0, 5.85])
    p.add_argument("--m-list", dest="m_list", type=_parse_ints, default=[1, 2, 3])
    p.set_defaults(func=cmd_table1)

    p = sub.add_parser("fig-zalodmu", help="critical average delay against treatment rate")
    common(p)
    p.add_argument("--grid", type=_parse_grid, required=True, help="mu grid start:stop:step")
    p.add_argument("--m-list", dest="m_list", type=_parse_ints, default=[1, 2, 3])
    p.set_defaults(func=cmd_fig_zalodmu)

    p = sub.add_parser("fig-akr", help="critical rate against treatment rate, all shape pairs")
    common(p)
    p.add_argument("--grid", type=_parse_grid, required=True, help="mu grid start:stop:step")
    p.set_defaults(func=cmd_fig_akr)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except AngioDelayError as exc:
        sys.stderr.write(json.dumps({
            "error": type(exc).__name__,
            "message": str(exc),
        }) + "\n")
        return 3


if __name__ == "__main__":
    sys.exit(main())
