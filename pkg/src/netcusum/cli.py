"""Command line interface.

Exit codes: 0 success, 2 invalid input, 3 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from .cusum import CusumProcess
from .detect import TestConfig, make_grid, run_test
from .errors import ConvergenceError, ValidationError
from .generators import SamplingModel, Scenario, scenario_delta_grid, simulate
from .graph_core import (
    DynamicNetwork,
    MANIFEST,
    SnapshotGraph,
    read_csv,
    read_edge_dir,
    read_manifest,
    write_csv,
    write_edge_dir,
)
from .graphon import (
    LabeledSnapshot,
    NodeSchedule,
    graphon_from_dict,
    restrict_common,
    sample_graphon_network,
)
from .harness import ExperimentSpec, run_power_sweep, run_risk_heatmap
from .ingest import IngestionSpec, ingest_edge_list
from .localize import estimate_cp
from .spectral import SpectralConfig

SCHEDULE = "schedule.json"


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _float_list(text: str) -> list[float]:
    """``a,b,c`` or ``start:stop:step`` (inclusive)."""
    if ":" in text:
        start, stop, step = (float(x) for x in text.split(":"))
        count = int(round((stop - start) / step))
        return [round(start + i * step, 10) for i in range(count + 1)]
    return [float(x) for x in text.split(",") if x]


# --------------------------------------------------------------------------
# Graphon sequences on disk


def write_graphon_dir(seq, schedule: NodeSchedule, path: str) -> None:
    os.makedirs(path, exist_ok=True)
    for t, snap in enumerate(seq, 1):
        lab = snap.labels
        with open(os.path.join(path, f"t{t}.edges"), "w", newline="\n") as fh:
            for i, j in snap.graph.edges():
                fh.write(f"{lab[i]} {lab[j]}\n")
    with open(os.path.join(path, SCHEDULE), "w", newline="\n") as fh:
        fh.write(schedule.to_json() + "\n")
    with open(os.path.join(path, MANIFEST), "w", newline="\n") as fh:
        fh.write(_json({"format": "graphon-seq", "N": schedule.N, "T": schedule.T}))


def read_graphon_dir(path: str):
    with open(os.path.join(path, SCHEDULE)) as fh:
        schedule = NodeSchedule.from_json(fh.read())
    seq = []
    for t, labels in enumerate(schedule.presence, 1):
        pos = {int(v): k for k, v in enumerate(labels)}
        adj = np.zeros((labels.size, labels.size), dtype=np.uint8)
        with open(os.path.join(path, f"t{t}.edges")) as fh:
            for line in fh:
                if line.strip():
                    a, b = (pos[int(x)] for x in line.split())
                    adj[a, b] = adj[b, a] = 1
        seq.append(LabeledSnapshot(labels, SnapshotGraph(adj)))
    return seq, schedule


def load_network(path: str) -> DynamicNetwork:
    """Edge directory, graphon directory (restricted to common nodes) or CSV."""
    if os.path.isdir(path):
        if read_manifest(path).get("format") == "graphon-seq":
            seq, schedule = read_graphon_dir(path)
            return restrict_common(seq, schedule)
        return read_edge_dir(path)
    return read_csv(path)


# --------------------------------------------------------------------------
# Subcommands


def _spectral(args) -> SpectralConfig:
    return SpectralConfig(seed=args.seed)


def _grid_arg(text: str, T: int):
    if text.startswith("tau:"):
        return "known_tau", int(text[4:])
    kinds = {"dyadic": "dyadic", "dyadic-mid": "dyadic_plus_midpoint", "full": "full"}
    if text not in kinds:
        raise ValidationError(f"unknown grid {text!r}")
    return kinds[text], None


def _sparsity_arg(text: str):
    named = {"auto": "auto", "kappa": "estimate_kappa", "omega": "estimate_omega"}
    if text in named:
        return named[text]
    try:
        return float(text)
    except ValueError:
        raise ValidationError(f"--kappa must be a number, auto, kappa or omega; got {text!r}") from None


def cmd_gen(args):
    sc = Scenario(args.scenario, args.n, args.T, args.tau, args.delta, args.rho)
    sampling = SamplingModel.parse(args.sampling, sc.n)
    net = simulate(sc, sampling, seed=args.seed)
    if args.format == "csv":
        write_csv(net, args.out)
    else:
        write_edge_dir(net, args.out)


def cmd_gen_graphon(args):
    w1 = graphon_from_dict(json.loads(args.w1))
    w2 = graphon_from_dict(json.loads(args.w2))
    schedule = NodeSchedule.generate(args.N, args.T, args.presence_prob, seed=args.seed)
    seq = sample_graphon_network(w1, w2, args.tau, args.rho, schedule, seed=args.seed)
    write_graphon_dir(seq, schedule, args.out)


def cmd_test(args):
    net = load_network(args.input)
    grid, tau = _grid_arg(args.grid, net.T)
    cfg = TestConfig(
        alpha=args.alpha,
        grid=grid,
        tau=tau,
        threshold=args.threshold,
        sparsity=_sparsity_arg(args.kappa),
        spectral=_spectral(args),
    )
    _emit(_json(run_test(net, cfg).to_dict()), args.out)


def cmd_localize(args):
    net = load_network(args.input)
    _emit(_json(estimate_cp(net, _spectral(args)).to_dict()), args.out)


def cmd_cusum_trace(args):
    net = load_network(args.input)
    grid, tau = _grid_arg(args.grid, net.T)
    process = CusumProcess(net, _spectral(args))
    lines = ["t,norm"] + [f"{t},{v!r}" for t, v in process.norms(make_grid(grid, net.T, tau))]
    _emit("\n".join(lines) + "\n", args.out)


def _spec_from_args(args, **extra) -> ExperimentSpec:
    if args.config:
        with open(args.config) as fh:
            cfg = json.load(fh)
    else:
        cfg = {}
    deltas = _float_list(args.deltas) if args.deltas else cfg.pop("deltas", None)
    if deltas is None:
        deltas = scenario_delta_grid(args.scenario or cfg.get("scenario"), 0.01)
    base = dict(
        scenario=args.scenario,
        n=args.n,
        T=args.T,
        tau=args.tau,
        replicates=args.replicates,
        master_seed=args.seed,
        rho=args.rho,
        alpha=args.alpha,
        workers=args.workers,
    )
    base.update({k: v for k, v in extra.items() if v is not None})
    cfg.update({k: v for k, v in base.items() if v is not None})
    cfg["deltas"] = tuple(deltas)
    if "spectral" in cfg and isinstance(cfg["spectral"], dict):
        cfg["spectral"] = SpectralConfig(**cfg["spectral"])
    for key in ("tests", "p_values"):
        if key in cfg:
            cfg[key] = tuple(cfg[key])
    missing = [k for k in ("scenario", "n", "T", "tau") if k not in cfg]
    if missing:
        raise ValidationError(f"missing experiment settings: {', '.join(missing)}")
    return ExperimentSpec(**cfg)


def cmd_power_sweep(args):
    spec = _spec_from_args(
        args,
        tests=tuple(args.tests.split(",")) if args.tests else None,
        threshold=args.threshold,
        sparsity=args.kappa,
    )
    result = run_power_sweep(spec)
    _emit(result.to_csv(), args.out)
    if args.summary:
        _emit(_json(result.summary()), args.summary)


def cmd_risk_heatmap(args):
    spec = _spec_from_args(
        args,
        p_values=tuple(_float_list(args.p_values)) if args.p_values else None,
        sampling=args.sampling,
    )
    _emit(run_risk_heatmap(spec).to_csv(), args.out)


def cmd_ingest(args):
    net = ingest_edge_list(IngestionSpec(args.input, args.min_duration, args.level))
    write_edge_dir(net, args.out)


def _experiment_args(p):
    p.add_argument("--config", help="JSON file with ExperimentSpec fields")
    p.add_argument("--scenario")
    p.add_argument("--n", type=int)
    p.add_argument("--T", type=int)
    p.add_argument("--tau", type=int)
    p.add_argument("--rho", type=float)
    p.add_argument("--deltas", help="a,b,c or start:stop:step")
    p.add_argument("--replicates", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--out")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="netcusum", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="simulate a benchmark scenario")
    p.add_argument("--scenario", required=True, help="1-5 or er, sbm2_between, ...")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--T", type=int, required=True)
    p.add_argument("--tau", type=int, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--rho", type=float)
    p.add_argument("--sampling", default="full", help="full | uniform:<p> | block:<p>[:k1,k2]")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("dir", "csv"), default="dir")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("gen-graphon", help="simulate a graphon network with node churn")
    p.add_argument("--w1", required=True, help='JSON, e.g. {"type": "const", "c": 0.5}')
    p.add_argument("--w2", required=True)
    p.add_argument("--N", type=int, required=True, help="size of the node universe")
    p.add_argument("--T", type=int, required=True)
    p.add_argument("--tau", type=int, required=True)
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--presence-prob", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_graphon)

    p = sub.add_parser("test", help="test for a change-point")
    p.add_argument("--input", required=True)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--grid", default="dyadic-mid", help="tau:<k> | dyadic | dyadic-mid | full")
    p.add_argument("--threshold", choices=("theoretical", "practical"), default="practical")
    p.add_argument("--kappa", default="auto", help="<value> | auto | kappa | omega")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("localize", help="estimate the change-point location")
    p.add_argument("--input", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_localize)

    p = sub.add_parser("cusum-trace", help="CUSUM spectral norms as t,norm CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--grid", default="full")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_cusum_trace)

    p = sub.add_parser("power-sweep", help="power and ENR over a delta grid")
    _experiment_args(p)
    p.add_argument("--tests", help="comma list of tau,dyadic,full")
    p.add_argument("--threshold", choices=("theoretical", "practical"))
    p.add_argument("--kappa", help="known | estimate_kappa | estimate_omega")
    p.add_argument("--summary", help="write minimal detectable ENR per test (JSON)")
    p.set_defaults(func=cmd_power_sweep)

    p = sub.add_parser("risk-heatmap", help="localization risk over a (p, delta) grid")
    _experiment_args(p)
    p.add_argument("--p-values", help="a,b,c or start:stop:step")
    p.add_argument("--sampling", choices=("uniform", "block"))
    p.set_defaults(func=cmd_risk_heatmap)

    p = sub.add_parser("ingest", help="trip CSV to daily snapshots")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--min-duration", type=float, default=180.0)
    p.add_argument("--level", type=float, default=0.9975)
    p.set_defaults(func=cmd_ingest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ConvergenceError as exc:
        print(f"error: {exc} (best estimate {exc.best_estimate})", file=sys.stderr)
        return 3
    except (OSError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
