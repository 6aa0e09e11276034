"""Command-line driver: sweeps, datasets and machine-readable outputs.

Output CSVs carry a versioned schema string in a leading comment line and
print every float with 17 significant digits so reruns round-trip exactly.
A JSON sidecar (<out>.json) records the full resolved configuration.

Configuration precedence: built-in defaults < flat key=value config file
(--config) < explicit command-line flags.
"""

import argparse
from concurrent.futures import ProcessPoolExecutor
import json
import os
import sys

import numpy as np

from . import __version__
from .bogoliubov import fluctuation_table
from .dynamics import build_basis, ensemble_run
from .exceptions import TrimerError
from .freqplan import (
    ResonatorTable, plan_report, plan_to_json, plan_tones, required_coupling,
    spurious_scan,
)
from .meanfield import classify_phase, meanfield_observables
from .model import ModelParams, critical_coupling
from .spectral import converged_ground_state, spectrum_sweep

SWEEP_SCHEMA = "trimer-sweep-csv v1"
MEANFIELD_SCHEMA = "trimer-meanfield-csv v1"
BOGOLIUBOV_SCHEMA = "trimer-bogoliubov-csv v1"

SWEEP_COLUMNS = [
    "g0", "eta", "lambda", "E0", "E1", "E2", "E3", "E4",
    "n_rescaled", "g2", "coskewness",
    "sector0", "sector1", "sector2", "sector3", "sector4",
]
TRAJ_COLUMNS = SWEEP_COLUMNS + ["n_stderr", "cosk_stderr", "converged"]


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def write_csv(path, schema, columns, rows):
    with open(path, "w") as fh:
        fh.write(f"# {schema}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def read_csv(path, expect_schema):
    """Parser for our own CSVs; rejects unknown schema versions."""
    with open(path) as fh:
        header = fh.readline().strip()
        if not header.startswith("# ") or header[2:] != expect_schema:
            raise ValueError(f"unknown CSV schema {header!r}, expected {expect_schema!r}")
        columns = fh.readline().strip().split(",")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    return columns, rows


def write_sidecar(path, config):
    doc = dict(config)
    doc["code_version"] = __version__
    with open(path + ".json", "w") as fh:
        json.dump(doc, fh, indent=2, default=str)


def load_config_file(path):
    out = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            out[key.strip().replace("-", "_")] = value.strip()
    return out


def _workers():
    env = os.environ.get("TRIMER_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _g0_grid(args):
    if args.g0_steps < 1:
        raise ValueError("g0-steps must be >= 1")
    if args.g0_steps == 1:
        return [args.g0_min]
    return list(np.linspace(args.g0_min, args.g0_max, args.g0_steps))


def _eta_list(args):
    return [float(x) for x in str(args.eta).split(",")]


def _sector_tags(res):
    tags = [str(st.sector) for st in res.merged[:5]]
    return tags + [""] * (5 - len(tags))


def _spectral_rows(p_template, grid, args):
    rows = []
    for eta in _eta_list(args):
        p_eta = ModelParams(p_template.omega, p_template.u0, 0.0, eta, p_template.kappa)
        results = spectrum_sweep(
            p_eta, grid, k=5, cutoff=args.cutoff,
            c_start=args.cutoff_start, max_cutoff=args.cutoff_max,
        )
        for g0, res in zip(grid, results):
            energies = [res.energy(j) if j < len(res.merged) else float("nan")
                        for j in range(5)]
            obs = res.observables
            rows.append(
                [g0, eta, res.params.lam, *energies,
                 obs.n_rescaled, obs.g2_zero[0], obs.coskewness,
                 *_sector_tags(res)]
            )
    return rows


def cmd_sweep(args):
    p = ModelParams(args.omega, args.u0, 0.0, 1.0, args.kappa)
    rows = _spectral_rows(p, _g0_grid(args), args)
    write_csv(args.out, SWEEP_SCHEMA, SWEEP_COLUMNS, rows)
    write_sidecar(args.out, vars(args))
    return 0


def cmd_spectrum(args):
    p = ModelParams(args.omega, args.u0, args.g0_min, _eta_list(args)[0], args.kappa)
    res = converged_ground_state(p, args.cutoff_start, k=5, max_cutoff=args.cutoff_max)
    from .observables import observable_set  # local: heavy import path
    basis = build_basis(res.cutoff_used)
    obs = observable_set(res.global_vector(0, basis), basis, p.eta)
    energies = [res.energy(j) for j in range(min(5, len(res.merged)))]
    energies += [float("nan")] * (5 - len(energies))
    row = [p.g0, p.eta, p.lam, *energies, obs.n_rescaled, obs.g2_zero[0],
           obs.coskewness, *_sector_tags(res)]
    write_csv(args.out, SWEEP_SCHEMA, SWEEP_COLUMNS, [row])
    cfg = vars(args)
    cfg["cutoff_used"] = res.cutoff_used
    cfg["convergence"] = res.convergence
    write_sidecar(args.out, cfg)
    return 0


def cmd_meanfield(args):
    rows = []
    cols = ["g0", "eta", "lambda", "regime", "l", "lambda_max",
            "E_plus", "E_minus", "n_rescaled_pred", "coskewness_pred"]
    for eta in _eta_list(args):
        for g0 in _g0_grid(args):
            p = ModelParams(args.omega, args.u0, g0, eta, args.kappa)
            rep = classify_phase(p)
            mf = meanfield_observables(p)
            rows.append([g0, eta, p.lam, rep.regime, rep.stability_window,
                         rep.lambda_max_estimate, rep.energy_plus, rep.energy_minus,
                         mf["n_rescaled"], mf["coskewness"]])
    write_csv(args.out, MEANFIELD_SCHEMA, cols, rows)
    write_sidecar(args.out, vars(args))
    return 0


def cmd_bogoliubov(args):
    cols = ["g0", "lambda", "lambda_tilde", "omega_tilde", "stable",
            "u2", "y2", "z2", "pu2", "py2", "pz2",
            "x2_local", "xx_cross", "p2_local", "pp_cross"]
    rows = []
    for g0 in _g0_grid(args):
        p = ModelParams(args.omega, args.u0, g0, _eta_list(args)[0], args.kappa)
        rep = fluctuation_table(p.lam, p)
        rows.append([g0, rep.lam, rep.lambda_tilde, rep.omega_tilde, int(rep.stable),
                     *[x if x is not None else float("nan")
                       for x in (rep.u2, rep.y2, rep.z2, rep.pu2, rep.py2, rep.pz2,
                                 rep.x2_local, rep.xx_cross, rep.p2_local,
                                 rep.pp_cross)]])
    write_csv(args.out, BOGOLIUBOV_SCHEMA, cols, rows)
    write_sidecar(args.out, vars(args))
    return 0


def cmd_trajectories(args):
    eta = _eta_list(args)[0]
    basis = build_basis(args.cutoff or args.cutoff_start)
    rows = []
    for g0 in _g0_grid(args):
        p = ModelParams(args.omega, args.u0, g0, eta, args.kappa)
        stats = ensemble_run(p, basis, args.ntraj, args.tmax, args.dt,
                             master_seed=args.seed, workers=_workers())
        rows.append(
            [g0, eta, p.lam,
             float("nan"), float("nan"), float("nan"), float("nan"), float("nan"),
             stats.n_rescaled, stats.g2[0], stats.coskewness,
             "", "", "", "", "",
             stats.n_stderr / eta, stats.coskewness_stderr, int(stats.converged)]
        )
    write_csv(args.out, SWEEP_SCHEMA, TRAJ_COLUMNS, rows)
    write_sidecar(args.out, vars(args))
    return 0


def cmd_freqplan(args):
    table = ResonatorTable(freqs={
        "a": tuple(float(x) for x in args.freqs_a.split(",")),
        "b": tuple(float(x) for x in args.freqs_b.split(",")),
        "c": tuple(float(x) for x in args.freqs_c.split(",")),
    })
    plan = plan_tones(table, args.omega_eff)
    g = args.coupling
    if g is None:
        p = ModelParams(args.omega_eff or args.omega, args.u0, 0.0, args.eta_val)
        g = required_coupling(p)
    plan = spurious_scan(table, plan, coupling=g)
    with open(args.out, "w") as fh:
        fh.write(plan_to_json(plan))
    print(plan_report(plan))
    return 0


def build_parser():
    ap = argparse.ArgumentParser(prog="trimer", description=__doc__)
    ap.add_argument("--config", help="flat key=value config file")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--omega", type=float, default=1.0)
        sp.add_argument("--u0", type=float, default=1.0)
        sp.add_argument("--g0-min", type=float, default=0.0)
        sp.add_argument("--g0-max", type=float, default=1.0)
        sp.add_argument("--g0-steps", type=int, default=1)
        sp.add_argument("--eta", default="1", help="eta or comma list of etas")
        sp.add_argument("--kappa", type=float, default=0.0)
        sp.add_argument("--cutoff", type=int, default=None,
                        help="fixed Fock cutoff (skips the convergence probe)")
        sp.add_argument("--cutoff-start", type=int, default=4)
        sp.add_argument("--cutoff-max", type=int, default=120)
        sp.add_argument("--ntraj", type=int, default=100)
        sp.add_argument("--tmax", type=float, default=20.0)
        sp.add_argument("--dt", type=float, default=0.01)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", default="out.csv")

    for name, fn in (("spectrum", cmd_spectrum), ("sweep", cmd_sweep),
                     ("meanfield", cmd_meanfield), ("bogoliubov", cmd_bogoliubov),
                     ("trajectories", cmd_trajectories)):
        sp = sub.add_parser(name)
        common(sp)
        sp.set_defaults(func=fn)

    fp = sub.add_parser("freqplan")
    fp.add_argument("--freqs-a", required=True, help="comma list, fundamental first")
    fp.add_argument("--freqs-b", required=True)
    fp.add_argument("--freqs-c", required=True)
    fp.add_argument("--omega-eff", type=float, required=True)
    fp.add_argument("--omega", type=float, default=1.0)
    fp.add_argument("--u0", type=float, default=1.0)
    fp.add_argument("--eta-val", type=float, default=10.0)
    fp.add_argument("--coupling", type=float, default=None,
                    help="effective g; defaults to the critical value")
    fp.add_argument("--out", default="plan.json")
    fp.set_defaults(func=cmd_freqplan)
    return ap


def _apply_config(ap, argv):
    """Config-file values become parser defaults; explicit flags still win."""
    ns, _ = ap.parse_known_args(argv)
    if ns.config:
        cfg = load_config_file(ns.config)
        for action in ap._subparsers._group_actions[0].choices.values():
            defaults = {}
            for act in action._actions:
                key = act.dest
                if key in cfg:
                    val = cfg[key]
                    defaults[key] = act.type(val) if act.type else val
            action.set_defaults(**defaults)
    return ap.parse_args(argv)


def main(argv=None):
    ap = build_parser()
    try:
        args = _apply_config(ap, argv if argv is not None else sys.argv[1:])
        return args.func(args)
    except (TrimerError, ValueError, OSError) as exc:
        record = {"error": type(exc).__name__, "message": str(exc)}
        print(json.dumps(record), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
