"""Command-line front end.

Subcommands wrap the library modules: `analyze` runs the full stationary /
entropy-production / cycle analysis with its internal cross-checks, `maxent`
and `birkhoff` expose the two RDS representations, `simulate` samples
trajectories and `cftp` draws perfect samples.  Randomized commands refuse
to run without an explicit --seed.

Exit codes: 0 success (all cross-checks pass), 1 usage or input errors,
2 a cross-check failed, 3 coupling-from-the-past did not coalesce.

Reports embed the input file's SHA-256, the tool version and the seed, and
are emitted either as `key = value` text or as JSON (--format structured);
JSON floats use shortest round-trip notation, so re-parsing a structured
report reproduces every scalar bit-exactly.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__, birkhoff, cycles, entropy, rds, simulate, trees
from .core import (
    EPS_ALG,
    CoalescenceError,
    RdsmcError,
    StochasticMatrix,
    load_matrix,
    uniform_vector,
    xlogx,
)


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _load_matrix_file(path: str) -> tuple[StochasticMatrix, dict]:
    p = Path(path)
    m = load_matrix(p.read_text())
    prov = {"path": str(p), "sha256": _sha256(p), "version": __version__}
    return m, prov


def _load_rds_file(path: str) -> tuple[rds.RDSMeasure, dict]:
    p = Path(path)
    q = rds.load_rds(p.read_text())
    prov = {"path": str(p), "sha256": _sha256(p), "version": __version__}
    return q, prov


def _check(checks: list, name: str, value: float, tol: float) -> None:
    checks.append(
        {"name": name, "value": value, "tolerance": tol, "passed": bool(value <= tol)}
    )


def _emit(report: dict, args, trailer: str = "") -> None:
    if args.format == "structured":
        text = json.dumps(report, indent=2)
    else:
        text = _as_text(report)
        if trailer:
            text += "\n" + trailer.rstrip("\n")
    if args.report:
        Path(args.report).write_text(text + "\n")
    else:
        print(text)


def _as_text(obj: dict, prefix: str = "") -> str:
    lines = []
    for key, val in obj.items():
        name = f"{prefix}{key}"
        if isinstance(val, dict):
            lines.append(_as_text(val, prefix=name + "."))
        elif isinstance(val, list) and val and isinstance(val[0], dict):
            for k, item in enumerate(val):
                lines.append(_as_text(item, prefix=f"{name}[{k}]."))
        else:
            lines.append(f"{name} = {val!r}")
    return "\n".join(lines)


def _cycle_entries(cw: cycles.CycleWeights) -> list[dict]:
    return [
        {
            "cycle": [i + 1 for i in c],
            "w": w,
            "p": cw.pc[c],
        }
        for c, w in cw.sorted_items()
    ]


def cmd_analyze(args) -> int:
    m, prov = _load_matrix_file(args.matrix)
    m.require_symmetric_support()
    checks: list[dict] = []

    pi_tree, sigma = trees.hill_stationary(m)
    pi_lin = entropy.linear_stationary(m)
    pi_gap = float(np.max(np.abs(pi_tree - pi_lin)))
    _check(checks, "stationary_methods_agree", pi_gap, 1e-8)
    residual = float(np.max(np.abs(pi_tree @ m.m - pi_tree)))
    _check(checks, "stationary_fixed_point", residual, EPS_ALG)

    ep = entropy.ep_rate(m)
    forms = {
        "edge_form": ep.ep_rate,
        "flux_ratio_form": ep.flux_ratio_form,
        "reversal_form": ep.reversal_form,
        "antisymmetric_form": ep.antisymmetric_form,
    }
    _check(
        checks,
        "ep_forms_agree",
        max(forms.values()) - min(forms.values()),
        EPS_ALG,
    )

    cw = cycles.cycle_weights(m)
    w_form, pc_form = cycles.cycle_ep_forms(m)
    forms["cycle_form"] = w_form
    forms["cycle_distribution_form"] = pc_form
    _check(checks, "cycle_ep_matches_edge_ep", abs(w_form - ep.ep_rate), EPS_ALG)
    length_sum = sum(w * len(c) for c, w in cw.weights.items())
    _check(checks, "cycle_lengths_sum_to_one", abs(length_sum - 1.0), EPS_ALG)
    circ = cycles.circulation_identities(m)
    _check(checks, "circulation_states", circ.state_defect, EPS_ALG)
    _check(checks, "circulation_edges", circ.edge_defect, EPS_ALG)

    report = {
        "schema": "rdsmc.analysis/1",
        "input": prov,
        "n": m.n,
        "stationary": {
            "tree": [float(x) for x in pi_tree],
            "linear": [float(x) for x in pi_lin],
            "max_disagreement": pi_gap,
        },
        "sigma": sigma,
        "h_mc": entropy.metric_entropy_mc(m, pi_tree),
        "h_rds_maxent": float(
            sum(-xlogx(float(x)) for row in m.m for x in row)
        ),
        "ep": forms,
        "detailed_balance": ep.detailed_balance,
        "lambda": cw.lam,
        "cycles": _cycle_entries(cw),
    }

    if m.is_doubly_stochastic:
        q = birkhoff.birkhoff_decompose(m)
        bound = birkhoff.ep_upper_bound(q)
        report["birkhoff"] = {
            "support_size": len(q.maps),
            "ep_upper_bound": bound,
        }
        gap = 0.0 if math.isinf(bound) else max(0.0, ep.ep_rate - bound)
        _check(checks, "ep_within_birkhoff_bound", gap, EPS_ALG)

    report["checks"] = checks
    table = "cycle_table:\n" + cycles.format_cycle_report(cw)
    _emit(report, args, trailer=table)
    return 0 if all(c["passed"] for c in checks) else 2


def cmd_maxent(args) -> int:
    m, prov = _load_matrix_file(args.matrix)
    q = rds.maxent_rds(m)
    entries = [
        {"map": [v + 1 for v in alpha.image], "weight": w}
        for alpha, w in q.support()
    ]
    total = sum(e["weight"] for e in entries)
    checks: list[dict] = []
    _check(checks, "weights_sum_to_one", abs(total - 1.0), 1e-9)
    back = rds.induce_markov(q)
    _check(
        checks,
        "reinduces_input",
        float(np.max(np.abs(back.m - m.m))),
        EPS_ALG,
    )
    report = {
        "schema": "rdsmc.maxent/1",
        "input": prov,
        "n": m.n,
        "support_size": len(entries),
        "metric_entropy": rds.rds_metric_entropy(q),
        "maps": entries,
        "checks": checks,
    }
    _emit(report, args)
    return 0 if all(c["passed"] for c in checks) else 2


def cmd_birkhoff(args) -> int:
    m, prov = _load_matrix_file(args.matrix)
    q = birkhoff.birkhoff_decompose(m)
    dual = birkhoff.dual_measure(q)
    checks: list[dict] = []
    back = rds.induce_markov(q)
    _check(
        checks, "reinduces_input", float(np.max(np.abs(back.m - m.m))), EPS_ALG
    )
    size_ok = len(q.maps) <= (m.n - 1) ** 2 + 1
    checks.append(
        {
            "name": "support_within_caratheodory_bound",
            "value": float(len(q.maps)),
            "tolerance": float((m.n - 1) ** 2 + 1),
            "passed": size_ok,
        }
    )
    report = {
        "schema": "rdsmc.birkhoff/1",
        "input": prov,
        "n": m.n,
        "support_size": len(q.maps),
        "permutations": [
            {"map": [v + 1 for v in alpha.image], "weight": w}
            for alpha, w in q.support()
        ],
        "dual": [
            {"map": [v + 1 for v in alpha.image], "weight": w}
            for alpha, w in dual.support()
        ],
        "ep_upper_bound": birkhoff.ep_upper_bound(q),
        "checks": checks,
    }
    _emit(report, args)
    return 0 if all(c["passed"] for c in checks) else 2


def cmd_simulate(args) -> int:
    if (args.matrix is None) == (args.rds is None):
        raise argparse.ArgumentTypeError("pass exactly one of --matrix / --rds")
    if args.matrix:
        m, prov = _load_matrix_file(args.matrix)
        if args.initial_state is not None:
            traj = simulate.simulate_mc_from(
                m, args.initial_state - 1, args.steps, args.seed
            )
        else:
            traj = simulate.simulate_mc(
                m, uniform_vector(m.n), args.steps, args.seed
            )
        n = m.n
        pi, _ = trees.hill_stationary(m)
        freq = np.bincount(traj.states, minlength=n) / len(traj.states)
        extra = {
            "stationary": [float(x) for x in pi],
            "empirical_frequencies": [float(x) for x in freq],
            "max_frequency_gap": float(np.max(np.abs(freq - pi))),
        }
    else:
        q, prov = _load_rds_file(args.rds)
        start = (args.initial_state or 1) - 1
        run = simulate.simulate_rds(
            simulate.IIDMapSource(q), [start], args.steps, args.seed
        )
        traj = run.trajectories[0]
        n = q.n
        freq = np.bincount(traj.states, minlength=n) / len(traj.states)
        extra = {"empirical_frequencies": [float(x) for x in freq]}
    report = {
        "schema": "rdsmc.simulate/1",
        "input": prov,
        "seed": args.seed,
        "generator": traj.generator,
        "steps": args.steps,
        **extra,
    }
    if args.trajectory:
        Path(args.trajectory).write_text(simulate.dump_trajectory(traj))
        report["trajectory_file"] = args.trajectory
    _emit(report, args)
    return 0


def cmd_cftp(args) -> int:
    if (args.matrix is None) == (args.rds is None):
        raise argparse.ArgumentTypeError("pass exactly one of --matrix / --rds")
    if args.rds:
        q, prov = _load_rds_file(args.rds)
        pi = None
    else:
        m, prov = _load_matrix_file(args.matrix)
        q = rds.maxent_rds(m)
        pi, _ = trees.hill_stationary(m)
    states, horizons = simulate.cftp_sample_many(
        q, args.seed, args.samples, args.cap_doublings
    )
    n = q.n
    freq = np.bincount(states, minlength=n) / len(states)
    report = {
        "schema": "rdsmc.cftp/1",
        "input": prov,
        "seed": args.seed,
        "samples": args.samples,
        "states": [int(s) + 1 for s in states[:100]],
        "empirical_frequencies": [float(x) for x in freq],
        "max_horizon": int(horizons.max()),
    }
    if pi is not None:
        report["stationary"] = [float(x) for x in pi]
        report["max_frequency_gap"] = float(np.max(np.abs(freq - pi)))
    _emit(report, args)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rdsmc",
        description="Finite-state Markov chain / RDS entropy and cycle analysis",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, *, seeded=False, steps=False):
        p.add_argument("--format", choices=["text", "structured"], default="text")
        p.add_argument("--report", metavar="FILE", help="write the report here")
        if seeded:
            p.add_argument("--seed", type=int, required=True,
                           help="mandatory for stochastic commands")
        if steps:
            p.add_argument("--steps", type=int, required=True)

    p = sub.add_parser("analyze", help="stationary / entropy / cycle report")
    p.add_argument("--matrix", required=True, metavar="FILE")
    add_common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("maxent", help="maximum-entropy RDS of a chain")
    p.add_argument("--matrix", required=True, metavar="FILE")
    add_common(p)
    p.set_defaults(func=cmd_maxent)

    p = sub.add_parser("birkhoff", help="permutation mixture of a doubly stochastic chain")
    p.add_argument("--matrix", required=True, metavar="FILE")
    add_common(p)
    p.set_defaults(func=cmd_birkhoff)

    p = sub.add_parser("simulate", help="sample a trajectory")
    p.add_argument("--matrix", metavar="FILE")
    p.add_argument("--rds", metavar="FILE")
    p.add_argument("--initial-state", type=int, metavar="I",
                   help="1-indexed start state (default: uniform draw)")
    p.add_argument("--trajectory", metavar="FILE", help="dump the path here")
    add_common(p, seeded=True, steps=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("cftp", help="perfect sampling by coupling from the past")
    p.add_argument("--matrix", metavar="FILE")
    p.add_argument("--rds", metavar="FILE")
    p.add_argument("--samples", type=int, default=1)
    p.add_argument("--cap-doublings", type=int,
                   default=simulate.DEFAULT_CFTP_DOUBLINGS)
    add_common(p, seeded=True)
    p.set_defaults(func=cmd_cftp)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CoalescenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (RdsmcError, OSError, argparse.ArgumentTypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
