"""Command-line front end.

Every subcommand writes one table (CSV or JSON) to ``--out`` or stdout.
Numbers are written with 12 significant digits. Stochastic subcommands
require ``--seed``. A ``--config`` file of ``key=value`` lines supplies
defaults; explicit flags override it. ``QCLONE_THREADS`` caps the worker
threads used by parallel subcommands.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import bounds, cloning_maps, ks, stimulated, vatoms
from .fock import (
    ConvergenceError,
    EvolutionParams,
    FockState,
    ResourceError,
    evolve,
    lambda_schwinger,
)
from .qubit_core import random_ket


class PreconditionError(Exception):
    pass


@dataclass
class Table:
    columns: list
    rows: list
    meta: dict = field(default_factory=dict)


def _fmt(x):
    if isinstance(x, bool) or x is None:
        return "" if x is None else str(x).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".12g")
    return str(x)


def _json_value(x):
    if isinstance(x, (float, np.floating)):
        x = float(format(float(x), ".12g"))
        return None if np.isnan(x) else x
    if isinstance(x, np.integer):
        return int(x)
    return x


def render(table: Table, fmt: str) -> str:
    if fmt == "json":
        doc = {
            "meta": {k: _json_value(v) for k, v in table.meta.items()},
            "columns": table.columns,
            "rows": [[_json_value(v) for v in row] for row in table.rows],
        }
        return json.dumps(doc, indent=1, sort_keys=False) + "\n"
    buf = io.StringIO()
    for k, v in table.meta.items():
        buf.write(f"# {k}={_fmt(v)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table.columns)
    for row in table.rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _threads() -> int:
    raw = os.environ.get("QCLONE_THREADS")
    if raw is None:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise PreconditionError(f"QCLONE_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise PreconditionError("QCLONE_THREADS must be a positive integer")
    return n


def _grid(t_max: float, points: int) -> np.ndarray:
    if points < 1:
        raise PreconditionError("--points must be positive")
    if t_max < 0:
        raise PreconditionError("--t-max must be non-negative")
    return np.linspace(0.0, t_max, points)


# ---------------------------------------------------------------------------
# subcommands


def cmd_clone_fidelity(args) -> Table:
    rows = []
    if args.random_psi:
        psi = random_ket(2, args.seed)
    else:
        try:
            psi = np.array([complex(x) for x in args.psi.split(",")])
        except ValueError:
            raise PreconditionError(f"cannot parse --psi {args.psi!r}") from None
        if psi.shape != (2,) or np.linalg.norm(psi) == 0:
            raise PreconditionError("--psi needs two amplitudes, not both zero")
        psi = psi / np.linalg.norm(psi)
    out = cloning_maps.gm_apply(psi, args.n, args.m)
    f_formula = cloning_maps.optimal_fidelity(args.n, args.m, exact=True)
    for i in range(args.m):
        rows.append([args.n, args.m, i, out.fidelity(i), float(f_formula), str(f_formula)])
    return Table(["N", "M", "clone", "fidelity", "formula", "formula_exact"], rows)


def cmd_stimulated_evolve(args) -> Table:
    grid = _grid(args.t_max, args.points)
    rows = []
    for t in grid:
        if args.method == "ladder":
            s = stimulated.evolve_ladder(stimulated.StimulatedLadder.initial(args.m, args.atoms), t)
            probs = s.probabilities
        elif args.method == "large-m":
            probs = stimulated.large_m_solution(args.m, args.atoms, t).probabilities
        else:
            init = FockState.basis((args.m, 0, 0, 0, args.atoms))
            final = evolve(lambda_schwinger(), init, EvolutionParams(float(t), "block_diagonalize"))
            probs = np.array([abs(final.inner(stimulated.f_basis_state(args.m, args.atoms, l))) ** 2
                              for l in range(args.atoms + 1)])
        for l, p in enumerate(probs):
            rows.append([float(t), l, float(p), stimulated.ladder_fidelity(args.m, l)])
    return Table(["gamma_t", "l", "probability", "fidelity"], rows,
                 {"m": args.m, "N": args.atoms, "method": args.method})


def cmd_vatom_curves(args) -> Table:
    grid = _grid(args.t_max, args.points)
    table = vatoms.simulate_vatoms(args.atoms, grid, allow_large=args.allow_large,
                                   threads=_threads())
    c = vatoms.fidelity_curves(table)
    n_all = table.mean_photons()
    n_right = table.mean_right()
    rows = [[float(t), c.f_clones[i], c.f_opt[i], c.f_rand[i], n_all[i], n_right[i]]
            for i, t in enumerate(grid)]
    return Table(["gamma_t", "f_clones", "f_opt", "f_rand", "N_all", "N_right"], rows,
                 {"N": args.atoms})


def cmd_pdc(args) -> Table:
    if args.gamma_t < 0:
        raise PreconditionError("--gamma-t must be non-negative")
    cfg = stimulated.PDCConfig.from_gamma_t(args.n, args.gamma_t, args.cutoff)
    state = stimulated.pdc_final_state(cfg)
    rows = []
    for M in range(max(args.n, 1), args.m_max + 1):
        ps = stimulated.pdc_postselect(state, M)
        if ps is None:
            continue
        opt = cloning_maps.optimal_fidelity(args.n, M) if args.n >= 1 else float("nan")
        rows.append([M, ps.weight, ps.fidelity(), opt, ps.anticlone_fidelity()])
    return Table(["M", "weight", "fidelity", "optimal", "anticlone_fidelity"], rows,
                 {"N": args.n, "Gamma": cfg.Gamma})


def cmd_bounds(args) -> Table:
    if args.n_max < 1:
        raise PreconditionError("--n-max must be at least 1")
    rows = []
    for N in range(1, args.n_max + 1):
        s_lp, _ = bounds.bound_1toN(N)
        exact = bounds.s_max_formula(N)
        rows.append([N, s_lp, str(exact), (1 + s_lp) / 2])
    return Table(["N", "s_max_lp", "s_max_formula", "F"], rows)


def _ks_state(name: str) -> ks.PathSpinState:
    if name == "psi1":
        return ks.prepare_psi1()
    named = {"chi+-": (1, -1), "chi-+": (-1, 1), "chi++": (1, 1), "chi--": (-1, -1)}
    if name in named:
        return ks.chi(*named[name])
    basis = {lab.replace(",", ""): i for i, lab in enumerate(ks.BASIS_LABELS)}
    if name in basis:
        v = np.zeros(4)
        v[basis[name]] = 1
        return ks.PathSpinState(v)
    raise PreconditionError(f"unknown state {name!r}")


def cmd_ks_run(args) -> Table:
    state = _ks_state(args.state)
    dev = ks.joint_device() if args.device == "joint" else ks.device(args.device)
    hist = ks.run_device(dev, state, args.shots, args.seed, args.visibility)
    if args.device == "joint":
        tag_names = ["Z1X2", "X1Z2"]
    else:
        tag_names = list(hist.tags[0])
    rows = [[d] + [t[n] for n in tag_names] + [p, c] for d, t, p, c in hist.rows()]
    return Table(["detector"] + tag_names + ["probability", "counts"], rows,
                 {"device": args.device, "state": args.state, "shots": args.shots})


def cmd_ks_color(args) -> Table:
    try:
        kset = ks.KSSet.load(args.file)
    except OSError as e:
        raise PreconditionError(f"cannot read {args.file}: {e}") from None
    res = ks.ks_colorable(kset)
    meta = {"status": "COLORABLE" if res.colorable else "UNCOLORABLE",
            "triads": len(kset.triads)}
    if args.epsilon is not None:
        if len(kset.triads) < 2:
            raise PreconditionError("the finite-precision bound needs at least two triads")
        mc = ks.nchv_montecarlo(kset, args.epsilon, args.trials, args.seed, args.mode)
        bound = ks.finite_precision_bound(len(kset.triads), args.epsilon)
        meta.update({"epsilon": args.epsilon, "bound": bound.bound, "testable": bound.testable,
                     "p_hat": mc.p_hat, "sigma": mc.sigma, "mode": args.mode})
    if res.colorable:
        rows = [["assign", d, v] for d, v in res.assignment.items()]
    else:
        rows = [["conflict", " ".join(t), ""] for t in res.conflict]
    return Table(["kind", "item", "value"], rows, meta)


def cmd_remote_prep(args) -> Table:
    if not 1 <= args.dim <= 8 or args.elements < 1:
        raise PreconditionError("--dim must lie in 1..8 and --elements be positive")
    rng = np.random.default_rng(args.seed)
    rows = []
    for inst in range(args.instances):
        vecs = [random_ket(args.dim, rng) for _ in range(args.elements)]
        x = rng.random(args.elements)
        x = x / x.sum()
        p = bounds.RemotePrepProblem.build(list(zip(x, vecs)))
        effects = bounds.remote_prepare(p)
        cond = bounds.conditional_states(p, effects)
        completeness = float(np.abs(sum(effects) - np.eye(p.rank)).max())
        for i, (xi, v, c) in enumerate(zip(x, vecs, cond)):
            target = xi * np.outer(v, v.conj())
            rows.append([inst, i, float(xi), p.rank, float(np.abs(c - target).max()), completeness])
    return Table(["instance", "element", "weight", "rank", "reconstruction_error",
                  "completeness_error"], rows)


COMMANDS = {
    "clone-fidelity": cmd_clone_fidelity,
    "stimulated-evolve": cmd_stimulated_evolve,
    "vatom-curves": cmd_vatom_curves,
    "pdc": cmd_pdc,
    "bounds": cmd_bounds,
    "ks-run": cmd_ks_run,
    "ks-color": cmd_ks_color,
    "remote-prep": cmd_remote_prep,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--config", help="file of key=value defaults")
    common.add_argument("--seed", type=int, help="seed for stochastic commands")

    parser = argparse.ArgumentParser(prog="qclone", description="Quantum cloning calculations.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("clone-fidelity", parents=[common], help="optimal N -> M qubit cloner")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--psi", default="1,0", help="input amplitudes a,b (default: 1,0)")
    p.add_argument("--random-psi", action="store_true", help="draw the input at random (needs --seed)")

    p = sub.add_parser("stimulated-evolve", parents=[common], help="Lambda-atom ladder dynamics")
    p.add_argument("--m", type=int, required=True, help="input photons")
    p.add_argument("--atoms", "--N", dest="atoms", type=int, required=True)
    p.add_argument("--t-max", type=float, default=1.0)
    p.add_argument("--points", type=int, default=11)
    p.add_argument("--method", choices=("ladder", "fock", "large-m"), default="ladder")

    p = sub.add_parser("vatom-curves", parents=[common], help="V-atom fidelity curves")
    p.add_argument("--atoms", "--N", dest="atoms", type=int, default=4)
    p.add_argument("--t-max", type=float, default=3.0)
    p.add_argument("--points", type=int, default=120)
    p.add_argument("--allow-large", action="store_true", help="permit N = 5, 6")

    p = sub.add_parser("pdc", parents=[common], help="down-conversion cloner")
    p.add_argument("--n", type=int, required=True, help="seed photons")
    p.add_argument("--gamma-t", type=float, default=0.4)
    p.add_argument("--m-max", type=int, default=4)
    p.add_argument("--cutoff", type=int)

    p = sub.add_parser("bounds", parents=[common], help="1 -> N no-signaling bound")
    p.add_argument("--n-max", type=int, default=8)

    p = sub.add_parser("ks-run", parents=[common], help="run a path-spin device")
    p.add_argument("--device", choices=("a", "b", "c", "d", "joint"), default="joint")
    p.add_argument("--state", default="psi1",
                   help="psi1, chi+-, chi-+, chi++, chi--, or a basis label such as uz+")
    p.add_argument("--shots", type=int, default=1000)
    p.add_argument("--visibility", type=float, default=1.0)

    p = sub.add_parser("ks-color", parents=[common], help="KS colorability of a triad file")
    p.add_argument("--file", required=True)
    p.add_argument("--epsilon", type=float, help="also run the finite-precision Monte Carlo")
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--mode", choices=("independent", "adversarial"), default="independent")

    p = sub.add_parser("remote-prep", parents=[common], help="random remote-preparation instances")
    p.add_argument("--dim", type=int, default=3)
    p.add_argument("--elements", type=int, default=4)
    p.add_argument("--instances", type=int, default=5)
    return parser


def read_config(path) -> dict:
    out = {}
    for n, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{n}: expected key=value")
        k, v = line.split("=", 1)
        out[k.strip().replace("-", "_")] = v.strip()
    return out


def _prescan(argv):
    """(command, config path) without running the full parser."""
    command = next((a for a in argv if not a.startswith("-")), None)
    config = None
    for i, a in enumerate(argv):
        if a == "--config" and i + 1 < len(argv):
            config = argv[i + 1]
        elif a.startswith("--config="):
            config = a.split("=", 1)[1]
    return command, config


def _apply_config(parser, argv):
    """Parse argv with config-file values installed as subcommand defaults."""
    command, config = _prescan(argv)
    if config and command in COMMANDS:
        try:
            cfg = read_config(config)
        except (OSError, ValueError) as e:
            parser.error(f"config: {e}")
        sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
        sp = sub.choices[command]
        actions = {a.dest: a for a in sp._actions}
        defaults = {}
        for k, v in cfg.items():
            if k not in actions or k in ("config", "help"):
                sp.error(f"config: unknown key {k!r}")
            a = actions[k]
            if isinstance(a, argparse._StoreTrueAction):
                defaults[k] = v.lower() in ("1", "true", "yes")
                continue
            try:
                defaults[k] = a.type(v) if a.type else v
            except ValueError:
                sp.error(f"config: bad value {v!r} for {k}")
            if a.choices and defaults[k] not in a.choices:
                sp.error(f"config: {k} must be one of {list(a.choices)}")
            a.required = False
        sp.set_defaults(**defaults)
    args = parser.parse_args(argv)
    if args.seed is None and _is_stochastic(args):
        sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
        sub.choices[args.command].error("this run is stochastic and needs --seed")
    return args


def _is_stochastic(args) -> bool:
    if args.command == "ks-run":
        return args.shots > 0
    if args.command == "remote-prep":
        return True
    if args.command == "clone-fidelity":
        return args.random_psi
    if args.command == "ks-color":
        return args.epsilon is not None
    return False


def execute(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = _apply_config(parser, argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        table = COMMANDS[args.command](args)
        text = render(table, args.format)
        if args.out:
            try:
                Path(args.out).write_text(text)
            except OSError as e:
                raise PreconditionError(f"cannot write {args.out}: {e}") from None
        else:
            sys.stdout.write(text)
    except (PreconditionError, ValueError, ConvergenceError, ResourceError,
            bounds.DecompositionMismatch) as e:
        print(f"qclone {args.command}: error: {e}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(execute())
