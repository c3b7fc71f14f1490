"""``planckian``: figure data and bound evaluations as CSV or JSON.

Energies are read in units of ``k_B T`` and times are reported in units of
``tau_Pl``; computations run at ``beta = 1``.  ``--beta`` only adds
natural-unit time columns.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Callable

import numpy as np

from . import __version__
from .bound import EPS_MAX, chi_lower_optimized, pairwise_chi
from .errors import BoundViolation, DegeneratePair, NumericalInstability
from .metrology import chi_tilde_diagonal, chi_tilde_gapped, chi_tilde_qubit
from .rlm import (
    CouplingSchedule,
    RlmConfig,
    dot_hamiltonian,
    fermi_dirac,
    forbidden_region_check,
    rlm_steady_state_constant,
    thermalization_times,
)
from .quantum import bures_angle_diagonal

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL = 0, 2, 3
UNITS = "hbar = k_B = 1; energies in k_B T; times in tau_Pl = hbar / k_B T"

DEFAULT_EPS = {
    "fig-bounds": [0.0, 0.05, 0.1, 0.2, 0.3],
    "rlm-constant": [0.05, 0.1, 0.15, 0.2, 0.25, 0.3],
    "chi": [0.0],
}
DEFAULT_PAIRS = [(0.0, 1.0), (-1.0, 1.0), (0.0, 3.0)]


class UsageError(Exception):
    pass


def _interior_grid(n: int) -> np.ndarray:
    """``n`` evenly spaced points strictly inside (0, 1)."""
    return np.linspace(0.0, 1.0, n + 2)[1:-1]


def _eps_list(args) -> list[float]:
    eps = args.eps if args.eps is not None else DEFAULT_EPS.get(args.command, [])
    if not eps:
        raise UsageError("--eps list is empty")
    if any(not 0.0 <= e <= 1.0 for e in eps):
        raise UsageError("--eps values are in units of eps_max and must lie in [0, 1]")
    return list(eps)


def _positive(name: str, value: float) -> float:
    if not value > 0:
        raise UsageError(f"--{name} must be positive")
    return value


def _time_columns(t_tau: float, beta: float) -> dict:
    return {"t_tau_pl": t_tau, "t": t_tau * beta}


# ------------------------------------------------------------------ commands


def cmd_fig_bounds(args):
    eps = _eps_list(args)
    n = args.pstar_grid or 199
    rows = []
    for e in eps:
        for p in _interior_grid(n):
            res = chi_lower_optimized(float(p), e * EPS_MAX)
            rows.append({"p_star": float(p), "eps": e, "chi_lower": res.value,
                         "alpha": res.witness["alpha"], "delta": res.witness["delta"]})
    return rows, {"eps": eps, "pstar_grid": n}


def cmd_fig_qfi(args):
    n = args.grid or 199
    dims = args.dims or [2, 3, 10, 30, 100]
    if any(d < 2 for d in dims):
        raise UsageError("--dims must be >= 2")
    rows = []
    for p in _interior_grid(n):
        p = float(p)
        row = {"p": p, "chi_diagonal": chi_tilde_diagonal(cg=p), "chi_qubit": chi_tilde_qubit(p)}
        for d in dims:
            row[f"gapped_d{d}"] = chi_tilde_gapped(p, d) if p >= 0.5 else math.nan
        rows.append(row)
    return rows, {"grid": n, "dims": dims}


def cmd_tradeoff(args):
    n = args.grid or 50
    if n < 2:
        raise UsageError("--grid must be >= 2")
    rows = []
    for e in np.linspace(0.0, 1.0, n):
        res = chi_lower_optimized(0.5, float(e) * EPS_MAX)
        rows.append({"eps": float(e), "chi_lower": res.value,
                     "delta": res.witness["delta"], "alpha": res.witness["alpha"]})
    return rows, {"grid": n, "p_star": 0.5}


def _thermal_angle(p, q):
    return float(bures_angle_diagonal(np.array([p, 1.0 - p]), np.array([q, 1.0 - q])))


def cmd_rlm_constant(args):
    e1, e2 = args.e1, args.e2
    p0 = (args.p0 or [0.5])[0]
    meta = {"e1": e1, "e2": e2, "p0": p0, "panel": args.panel}
    rows = []
    if args.panel == "c":
        n = args.grid or 20
        energies = np.linspace(-3.0, 3.0, n)
        couplings = np.linspace(3.0 / n, 3.0, n)
        for E in energies:
            q = float(fermi_dirac(E, 1.0))
            for g in couplings:
                p_inf = rlm_steady_state_constant(float(E), float(g), 1.0)
                d = _thermal_angle(p_inf, q)
                rows.append({"E": float(E), "g": float(g), "p_inf": p_inf,
                             "D_inf": d, "D_inf_eps_max": d / EPS_MAX})
        meta["grid"] = n
        return rows, meta

    if args.panel == "b":
        n = args.grid or 41
        eps = list(np.linspace(0.0, 0.4, n)[1:])
        couplings = args.g or [1.0]
    else:
        eps = _eps_list(args)
        couplings = args.g or [0.25, 0.5, 1.0, 1.5, 2.0, 3.0]
    if any(e <= 0.0 for e in eps):
        raise UsageError("thermalization times need eps > 0")
    h1, h2 = dot_hamiltonian(e1), dot_hamiltonian(e2)
    for g in couplings:
        _positive("g", g)
        times = {}
        for E in (e1, e2):
            cfg = RlmConfig(E, 1.0, p0, CouplingSchedule.constant(g))
            times[E] = thermalization_times(cfg, [e * EPS_MAX for e in eps])
        for k, e in enumerate(eps):
            tau = max(times[e1][k], times[e2][k])
            bound = pairwise_chi(h1, h2, 1.0, e * EPS_MAX)
            rows.append({"g": g, "eps": float(e), "tau_min_tau_pl": tau,
                         "tau_e1": times[e1][k], "tau_e2": times[e2][k],
                         "bound_tau_pl": max(bound, 0.0), "chi_pair": bound})
    meta.update({"g": list(couplings), "eps": [float(e) for e in eps]})
    return rows, meta


def cmd_rlm_decaying(args):
    pairs = [(args.e1, args.e2)] if (args.e1_given or args.e2_given) else DEFAULT_PAIRS
    p0s = args.p0 or [0.0, 0.5, 1.0]
    if any(not 0.0 <= p <= 1.0 for p in p0s):
        raise UsageError("--p0 must lie in [0, 1]")
    a, b = _positive("a", args.a), _positive("b", args.b if args.b is not None else 0.01)
    tmax = _positive("tmax", args.tmax or 2.0)
    n = args.grid or 200
    times = np.linspace(0.0, tmax, n)
    sched = CouplingSchedule.decaying(a, b)
    rows = []
    for e1, e2 in pairs:
        for p0 in p0s:
            rep = forbidden_region_check(RlmConfig(e1, 1.0, p0, sched), e1, e2, times)
            for k, t in enumerate(times):
                rows.append({"e1": e1, "e2": e2, "p0": p0, **_time_columns(float(t), args.beta),
                             "p1": float(rep.p1[k]), "p2": float(rep.p2[k]),
                             "D1": float(rep.d1[k]), "D2": float(rep.d2[k]),
                             "rhs": float(rep.rhs[k]), "margin": float(rep.margins[k])})
    return rows, {"pairs": pairs, "p0": p0s, "a": a, "b": b, "tmax": tmax, "grid": n}


def cmd_chi(args):
    eps = _eps_list(args)
    h1, h2 = dot_hamiltonian(args.e1), dot_hamiltonian(args.e2)
    rows = []
    for e in eps:
        chi = pairwise_chi(h1, h2, 1.0, e * EPS_MAX)
        rows.append({"eps": e, "chi": chi, "tau_min_tau_pl": max(chi, 0.0)})
    return rows, {"e1": args.e1, "e2": args.e2, "eps": eps}


COMMANDS: dict[str, Callable] = {
    "fig-bounds": cmd_fig_bounds,
    "fig-qfi": cmd_fig_qfi,
    "tradeoff": cmd_tradeoff,
    "rlm-constant": cmd_rlm_constant,
    "rlm-decaying": cmd_rlm_decaying,
    "chi": cmd_chi,
}


# -------------------------------------------------------------------- output


def _cell(x):
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _json_value(x):
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, (list, tuple)):
        return [_json_value(v) for v in x]
    if isinstance(x, np.integer):
        return int(x)
    return x


def render(rows: list[dict], meta: dict, fmt: str) -> str:
    if fmt == "json":
        payload = {
            "meta": {k: _json_value(v) for k, v in meta.items()},
            "rows": [{k: _json_value(v) for k, v in r.items()} for r in rows],
        }
        return json.dumps(payload, indent=1) + "\n"
    buf = io.StringIO()
    for key, value in meta.items():
        buf.write(f"# {key}: {json.dumps(_json_value(value))}\n")
    fields = list(rows[0]) if rows else []
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(fields)
    for r in rows:
        writer.writerow([_cell(r[f]) for f in fields])
    return buf.getvalue()


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--beta", type=float, default=1.0,
                        help="inverse temperature used for natural-unit time columns")
    common.add_argument("--eps", type=float, action="append",
                        help="error tolerance in units of eps_max (repeatable)")
    common.add_argument("--pstar-grid", type=int, help="number of interior p* points")
    common.add_argument("--e1", type=float, help="first dot energy (k_B T)")
    common.add_argument("--e2", type=float, help="second dot energy (k_B T)")
    common.add_argument("--a", type=float, default=1.0, help="decaying coupling strength")
    common.add_argument("--b", type=float, help="decaying coupling offset (tau_Pl)")
    common.add_argument("--p0", type=float, action="append", help="initial occupation (repeatable)")
    common.add_argument("--g", type=float, action="append", help="constant coupling (repeatable)")
    common.add_argument("--tmax", type=float, help="trajectory horizon (tau_Pl)")
    common.add_argument("--grid", type=int, help="grid resolution")
    common.add_argument("--dims", type=int, action="append", help="dimensions for gapped curves")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", help="output path (default: stdout)")

    parser = argparse.ArgumentParser(prog="planckian", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("fig-bounds", parents=[common], help="optimized lower bounds on chi over p*")
    sub.add_parser("fig-qfi", parents=[common], help="locally-exact bounds versus population")
    sub.add_parser("tradeoff", parents=[common], help="chi at p* = 1/2 versus eps")
    rc = sub.add_parser("rlm-constant", parents=[common], help="constant-coupling dot machine")
    rc.add_argument("--panel", choices=("a", "b", "c"), default="a")
    sub.add_parser("rlm-decaying", parents=[common], help="decaying-coupling trajectories")
    sub.add_parser("chi", parents=[common], help="pairwise chi for two dot energies")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.e1_given, args.e2_given = args.e1 is not None, args.e2 is not None
    args.e1 = 0.0 if args.e1 is None else args.e1
    args.e2 = 1.0 if args.e2 is None else args.e2
    if args.grid is not None and args.grid < 1 or args.pstar_grid is not None and args.pstar_grid < 1:
        parser.error("grid sizes must be positive")
    if not args.beta > 0:
        parser.error("--beta must be positive")
    try:
        rows, params = COMMANDS[args.command](args)
    except (UsageError, DegeneratePair) as exc:
        parser.error(str(exc))
    except (NumericalInstability, BoundViolation) as exc:
        print(f"planckian: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    meta = {"command": args.command, "version": __version__, "units": UNITS,
            "beta": args.beta, "seed": args.seed, **params}
    text = render(rows, meta, args.format)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
