"""Command-line front end.

Subcommands: learn-graph (solver run with persisted outputs), cluster
(spectral clustering on a learned or precomputed graph), ssl (label
propagation), recover (low-rank recovery, optionally on image stacks), and
metrics (standalone label scoring). Every run writes a manifest.json with
the resolved configuration so it can be replayed; all outputs are
deterministic given the manifest (wall time aside).

Exit codes: 0 success, 1 usage or input error, 2 solver hit the iteration
cap without converging (outputs are still written).
"""

import argparse
import json
import os
import sys
import time

import numpy as np

from . import __version__, data_io
from .errors import InvalidInputError, NumericalError
from .learning import (
    PartialLabels,
    accuracy,
    hard_labels,
    lgc_propagate,
    nmi,
    purity,
    spectral_cluster,
)
from .solver import Mode, SolverConfig, solve

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NO_CONVERGENCE = 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _add_output_flags(p):
    p.add_argument("--output-dir", default=".", help="directory for all outputs")
    p.add_argument("--seed", type=int, default=0, help="seed for randomized stages")


def _add_learn_flags(p, with_mode):
    p.add_argument("--beta", type=float, default=None,
                   help="graph smoothness weight (no default; pick per dataset)")
    p.add_argument("--k", type=int, default=10, help="neighbors per sample")
    p.add_argument("--mu", type=float, default=1.0, help="penalty parameter")
    p.add_argument("--alpha", type=float, default=None,
                   help="sparsity weight; defaults to 1/sqrt(max(m, n))")
    p.add_argument("--tol", type=float, default=1e-6, help="residual tolerance")
    p.add_argument("--max-iters", type=int, default=300)
    p.add_argument("--mu-growth", type=float, default=1.0,
                   help="multiplicative mu escalation per iteration (1 = fixed)")
    p.add_argument("--orientation", choices=["columns", "rows"], default="columns",
                   help="how samples are laid out in the input table")
    if with_mode:
        p.add_argument("--mode", choices=[m.value for m in Mode], default="rgc")
        p.add_argument("--graph", default=None,
                       help="fixed affinity graph (.mtx) for --mode fixed-graph")


def build_parser():
    parser = _Parser(prog="robustgraph", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("learn-graph", help="decompose a matrix and learn its affinity graph")
    p.add_argument("--input", required=True, help="data matrix (.csv, .mtx, or image dir)")
    _add_learn_flags(p, with_mode=True)
    _add_output_flags(p)
    p.set_defaults(func=cmd_learn_graph)

    p = sub.add_parser("cluster", help="spectral clustering on a learned or given graph")
    p.add_argument("--graph", default=None, help="precomputed affinity graph (.mtx)")
    p.add_argument("--input", default=None, help="learn the graph from this matrix first")
    p.add_argument("--clusters", type=int, required=True)
    p.add_argument("--truth", default=None, help="ground-truth labels (.csv) for scoring")
    _add_learn_flags(p, with_mode=False)
    _add_output_flags(p)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("ssl", help="semisupervised classification by label propagation")
    p.add_argument("--graph", default=None, help="precomputed affinity graph (.mtx)")
    p.add_argument("--input", default=None, help="learn the graph from this matrix first")
    p.add_argument("--labels", required=True, help="partial labels (.csv; unlabeled rows absent)")
    p.add_argument("--lambda", dest="lam", type=float, required=True,
                   help="label-fit weight of the propagation objective")
    p.add_argument("--truth", default=None, help="ground-truth labels for scoring")
    _add_learn_flags(p, with_mode=False)
    _add_output_flags(p)
    p.set_defaults(func=cmd_ssl)

    p = sub.add_parser("recover", help="low-rank recovery; writes images for image input")
    p.add_argument("--input", required=True, help="data matrix (.csv, .mtx, or image dir)")
    _add_learn_flags(p, with_mode=True)
    _add_output_flags(p)
    p.set_defaults(func=cmd_recover)

    p = sub.add_parser("metrics", help="score predicted labels against ground truth")
    p.add_argument("--pred", required=True)
    p.add_argument("--truth", required=True)
    _add_output_flags(p)
    p.set_defaults(func=cmd_metrics)

    return parser


def _solver_config(args, mode=None):
    if args.beta is None:
        raise InvalidInputError("--beta is required to run the solver")
    if mode is None:
        mode = Mode(args.mode)
    fixed = None
    if mode is Mode.FIXED_GRAPH:
        if getattr(args, "graph", None) is None:
            raise InvalidInputError("--mode fixed-graph needs --graph")
        fixed = data_io.load_graph(args.graph)
    return SolverConfig(
        beta=args.beta,
        alpha=args.alpha,
        k=args.k,
        mu=args.mu,
        tol=args.tol,
        max_iters=args.max_iters,
        mode=mode,
        fixed_graph=fixed,
        mu_growth=args.mu_growth,
        seed=args.seed,
    )


def _config_dict(cfg, shape):
    return {
        "alpha": float(cfg.resolved_alpha(shape)),
        "beta": cfg.beta,
        "k": cfg.k,
        "max_iters": cfg.max_iters,
        "mode": cfg.mode.value,
        "mu": cfg.mu,
        "mu_growth": cfg.mu_growth,
        "tol": cfg.tol,
    }


def _write_manifest(outdir, command, config, inputs, outputs, seed, started):
    import scipy

    manifest = {
        "command": command,
        "config": config,
        "inputs": inputs,
        "outputs": sorted(outputs + ["manifest.json"]),
        "seed": seed,
        "versions": {
            "numpy": np.__version__,
            "robustgraph": __version__,
            "scipy": scipy.__version__,
        },
        "wall_time_s": time.perf_counter() - started,
    }
    data_io._atomic_write_text(
        os.path.join(outdir, "manifest.json"),
        json.dumps(manifest, sort_keys=True, indent=2) + "\n",
    )


def _write_metrics(outdir, metrics):
    text = json.dumps(metrics, sort_keys=True, indent=2) + "\n"
    data_io._atomic_write_text(os.path.join(outdir, "metrics.json"), text)
    sys.stdout.write(text)


def cmd_learn_graph(args):
    started = time.perf_counter()
    x, _ = data_io.load_matrix(args.input, orientation=args.orientation)
    cfg = _solver_config(args)
    result = solve(x, cfg)
    outdir = args.output_dir
    os.makedirs(outdir, exist_ok=True)
    outputs = ["D.mtx", "E.mtx", "history.csv"]
    data_io.save_matrix(os.path.join(outdir, "D.mtx"), result.D)
    data_io.save_matrix(os.path.join(outdir, "E.mtx"), result.E)
    data_io.save_history(os.path.join(outdir, "history.csv"), result.history)
    if result.S is not None:
        data_io.save_graph(os.path.join(outdir, "S.mtx"), result.S)
        outputs.append("S.mtx")
    inputs = {"input": args.input, "orientation": args.orientation}
    if cfg.mode is Mode.FIXED_GRAPH:
        inputs["graph"] = args.graph
    _write_manifest(outdir, "learn-graph", _config_dict(cfg, x.shape), inputs,
                    outputs, args.seed, started)
    return EXIT_OK if result.converged else EXIT_NO_CONVERGENCE


def _obtain_graph(args):
    """Load --graph or learn one from --input; returns (graph, ok, inputs, config)."""
    if args.graph is not None and args.input is not None:
        raise InvalidInputError("give either --graph or --input, not both")
    if args.graph is not None:
        return data_io.load_graph(args.graph), True, {"graph": args.graph}, None
    if args.input is None:
        raise InvalidInputError("either --graph or --input is required")
    x, _ = data_io.load_matrix(args.input, orientation=args.orientation)
    cfg = _solver_config(args, mode=Mode.RGC)
    result = solve(x, cfg)
    inputs = {"input": args.input, "orientation": args.orientation}
    return result.S, result.converged, inputs, _config_dict(cfg, x.shape)


def cmd_cluster(args):
    started = time.perf_counter()
    graph, ok, inputs, config = _obtain_graph(args)
    labels = spectral_cluster(graph, args.clusters, seed=args.seed)
    outdir = args.output_dir
    os.makedirs(outdir, exist_ok=True)
    outputs = ["labels.csv"]
    data_io.save_labels(os.path.join(outdir, "labels.csv"), labels)
    if args.truth is not None:
        idx, values = data_io.load_labels(args.truth)
        truth = data_io.full_assignment(idx, values, graph.n)
        inputs["truth"] = args.truth
        _write_metrics(outdir, {
            "acc": accuracy(labels, truth),
            "nmi": nmi(labels, truth),
            "purity": purity(labels, truth),
        })
        outputs.append("metrics.json")
    config = config or {}
    config["clusters"] = args.clusters
    _write_manifest(outdir, "cluster", config, inputs, outputs, args.seed, started)
    return EXIT_OK if ok else EXIT_NO_CONVERGENCE


def cmd_ssl(args):
    started = time.perf_counter()
    graph, ok, inputs, config = _obtain_graph(args)
    indices, values = data_io.load_labels(args.labels)
    partial = PartialLabels.from_pairs(graph.n, indices, values)
    scores = lgc_propagate(graph, partial, args.lam)
    pred = hard_labels(scores)
    outdir = args.output_dir
    os.makedirs(outdir, exist_ok=True)
    outputs = ["labels.csv", "soft_labels.csv"]
    data_io.save_labels(os.path.join(outdir, "labels.csv"), pred)
    data_io.save_soft_labels(os.path.join(outdir, "soft_labels.csv"), scores)
    inputs["labels"] = args.labels
    if args.truth is not None:
        idx, tvals = data_io.load_labels(args.truth)
        truth = data_io.full_assignment(idx, tvals, graph.n)
        inputs["truth"] = args.truth
        # score over the unlabeled samples only; classes are already aligned
        scored = ~partial.mask if (~partial.mask).any() else np.ones(graph.n, dtype=bool)
        _write_metrics(outdir, {
            "acc": float(np.mean(pred[scored] == truth[scored])),
            "n_scored": int(scored.sum()),
        })
        outputs.append("metrics.json")
    config = config or {}
    config["lambda"] = args.lam
    _write_manifest(outdir, "ssl", config, inputs, outputs, args.seed, started)
    return EXIT_OK if ok else EXIT_NO_CONVERGENCE


def cmd_recover(args):
    started = time.perf_counter()
    stack = None
    if os.path.isdir(args.input):
        stack = data_io.load_image_stack(args.input)
        x = stack.matrix
    else:
        x, _ = data_io.load_matrix(args.input, orientation=args.orientation)
    cfg = _solver_config(args)
    result = solve(x, cfg)
    outdir = args.output_dir
    os.makedirs(outdir, exist_ok=True)
    outputs = ["D.mtx", "E.mtx", "history.csv"]
    data_io.save_matrix(os.path.join(outdir, "D.mtx"), result.D)
    data_io.save_matrix(os.path.join(outdir, "E.mtx"), result.E)
    data_io.save_history(os.path.join(outdir, "history.csv"), result.history)
    if stack is not None:
        img_dir = os.path.join(outdir, "recovered")
        os.makedirs(img_dir, exist_ok=True)
        for col, name in enumerate(stack.names):
            stem = os.path.splitext(name)[0]
            image = data_io.reconstruct_image(result.D[:, col], stack.height, stack.width)
            data_io.save_image(os.path.join(img_dir, f"{stem}.png"), image)
            outputs.append(f"recovered/{stem}.png")
    inputs = {"input": args.input}
    if cfg.mode is Mode.FIXED_GRAPH:
        inputs["graph"] = args.graph
    _write_manifest(outdir, "recover", _config_dict(cfg, x.shape), inputs,
                    outputs, args.seed, started)
    return EXIT_OK if result.converged else EXIT_NO_CONVERGENCE


def cmd_metrics(args):
    started = time.perf_counter()
    pred_idx, pred_vals = data_io.load_labels(args.pred)
    truth_idx, truth_vals = data_io.load_labels(args.truth)
    if pred_idx.size != truth_idx.size:
        raise InvalidInputError(
            f"label counts differ: {pred_idx.size} predicted vs {truth_idx.size} true"
        )
    n = pred_idx.size
    pred = data_io.full_assignment(pred_idx, pred_vals, n)
    truth = data_io.full_assignment(truth_idx, truth_vals, n)
    outdir = args.output_dir
    os.makedirs(outdir, exist_ok=True)
    _write_metrics(outdir, {
        "acc": accuracy(pred, truth),
        "nmi": nmi(pred, truth),
        "purity": purity(pred, truth),
    })
    _write_manifest(outdir, "metrics", {}, {"pred": args.pred, "truth": args.truth},
                    ["metrics.json"], args.seed, started)
    return EXIT_OK


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return EXIT_ERROR
    try:
        return args.func(args)
    except (InvalidInputError, NumericalError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
