"""Command-line interface: generate / mus / twonn / hidalgo / summarize.

Exit codes: 0 success, 1 usage error, 2 data error. Reports and results go
to stdout; warnings and progress go to stderr. Every command that writes
files also writes a run manifest (flags, input hashes, seed, version,
elapsed, output list) alongside them.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import __version__
from . import io as iomod
from .geometry import Metric, PointCloud, compute_mus
from .hidalgo import HidalgoChains, HidalgoConfig, PriorType, run_hidalgo
from .hidalgo import report as hidalgo_report
from .posterior import (
    ID_SUMMARY_COLUMNS,
    cluster_frequencies,
    cluster_from_psm,
    id_by_class,
    nn_distance_profile,
    postprocess,
)
from .twonn import report as twonn_report
from .twonn import twonn_bayes, twonn_linfit, twonn_mle
from .datasets import gaussmix, hypercube, pareto_ratios, swissroll


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 on usage problems, not argparse's 2
        raise UsageError(message)


def _add_input_flags(p: argparse.ArgumentParser, with_metric: bool = True) -> None:
    p.add_argument("--input", help="dense numeric CSV of observations")
    p.add_argument("--dist", help="precomputed square distance-matrix CSV")
    p.add_argument(
        "--no-header",
        action="store_true",
        help="input CSV has no header row",
    )
    if with_metric:
        p.add_argument(
            "--metric",
            default="euclidean",
            choices=["euclidean", "manhattan", "canberra"],
            help="distance definition used when reading --input",
        )


def _load_input(args) -> tuple[PointCloud | None, np.ndarray | None, list[str]]:
    """Returns (cloud, dist_mat, consumed_paths)."""
    if args.dist is not None:
        data, _, _ = iomod.read_matrix_csv(args.dist, header=not args.no_header)
        return None, data, [args.dist]
    if args.input is not None:
        data, names, class_labels = iomod.read_matrix_csv(
            args.input, header=not args.no_header
        )
        if class_labels is not None:
            print(
                "note: ignoring non-numeric 'class' column in input",
                file=sys.stderr,
            )
        return PointCloud(data, names), None, [args.input]
    raise UsageError("one of --input or --dist is required")


def _require_unit_interval(name: str, value: float, open_left=True, open_right=True):
    lo_ok = value > 0.0 if open_left else value >= 0.0
    hi_ok = value < 1.0 if open_right else value <= 1.0
    if not (lo_ok and hi_ok):
        raise UsageError(f"--{name} must lie in the unit interval, got {value}")


# ---------------------------------------------------------------------------
# generate
# ---------------------------------------------------------------------------


def _cmd_generate(args) -> int:
    started = time.perf_counter()
    if args.kind == "pareto" and args.d is None:
        raise UsageError("--kind pareto requires --d")
    labels = None
    if args.kind == "swissroll":
        cloud = swissroll(args.n, args.seed)
        data, names = cloud.data, cloud.col_names
    elif args.kind == "hypercube":
        cloud = hypercube(args.n, args.seed)
        data, names = cloud.data, cloud.col_names
    elif args.kind == "gaussmix":
        cloud, labels = gaussmix(args.n, args.seed)
        data, names = cloud.data, cloud.col_names
    else:
        data = pareto_ratios(args.n, args.d, args.seed)[:, None]
        names = ["mu"]
    iomod.write_matrix_csv(args.out, data, names, class_labels=labels)
    iomod.write_manifest(
        args.out + ".manifest.json",
        "generate",
        _arg_dict(args),
        [],
        [args.out],
        args.seed,
        started,
        __version__,
    )
    return 0


# ---------------------------------------------------------------------------
# mus
# ---------------------------------------------------------------------------


def _cmd_mus(args) -> int:
    started = time.perf_counter()
    cloud, dist, inputs = _load_input(args)
    with_adjacency = args.adjacency_out is not None
    ratios = compute_mus(
        cloud,
        dist,
        metric=args.metric,
        n1=args.n1,
        n2=args.n2,
        with_adjacency=with_adjacency,
        q=args.q,
    )
    table = np.column_stack([np.arange(ratios.mus.size), ratios.mus])
    outputs = []
    if args.out is not None:
        iomod.write_matrix_csv(args.out, table, ["index", "mu"])
        outputs.append(args.out)
    else:
        print("index,mu")
        for i, m in enumerate(ratios.mus):
            print(f"{i},{iomod.FLOAT_FMT % m}")
    if with_adjacency:
        iomod.write_matrix_csv(
            args.adjacency_out,
            ratios.adjacency.astype(np.int64),
            [f"j{c}" for c in range(ratios.adjacency.shape[1])],
        )
        outputs.append(args.adjacency_out)
    if outputs:
        iomod.write_manifest(
            outputs[0] + ".manifest.json",
            "mus",
            _arg_dict(args),
            inputs,
            outputs,
            None,
            started,
            __version__,
        )
    return 0


# ---------------------------------------------------------------------------
# twonn
# ---------------------------------------------------------------------------


def _cmd_twonn(args) -> int:
    started = time.perf_counter()
    _require_unit_interval("alpha", args.alpha)
    _require_unit_interval("c-trimmed", args.c_trimmed, open_left=False)
    if args.a_d <= 0 or args.b_d <= 0:
        raise UsageError("--a-d and --b-d must be positive")
    if args.plot_data is not None and args.method == "mle":
        raise UsageError("--plot-data is only available for linfit and bayes")
    cloud, dist, inputs = _load_input(args)
    ratios = compute_mus(cloud, dist, metric=args.metric)
    if args.method == "linfit":
        fit = twonn_linfit(ratios.mus, alpha=args.alpha, c_trimmed=args.c_trimmed)
    elif args.method == "mle":
        fit = twonn_mle(
            ratios.mus,
            alpha=args.alpha,
            c_trimmed=args.c_trimmed,
            unbiased=args.unbiased,
        )
    else:
        fit = twonn_bayes(
            ratios.mus,
            alpha=args.alpha,
            a_d=args.a_d,
            b_d=args.b_d,
            c_trimmed=args.c_trimmed,
        )

    payload = {
        "estimate": fit.estimate,
        "interval": [fit.lower, fit.upper],
        "config": {
            "method": fit.method,
            "alpha": fit.alpha,
            "c_trimmed": fit.c_trimmed,
            "metric": args.metric,
            "n_original": fit.n_original,
            "n_used": fit.n_used,
        },
    }
    if fit.method == "mle":
        payload["config"]["unbiased"] = args.unbiased
    if fit.method == "bayes":
        payload["config"]["a_d"] = args.a_d
        payload["config"]["b_d"] = args.b_d
        payload["estimates"] = {
            key: fit.extras[key] for key in ("mean", "median", "mode")
        }

    if args.output == "json":
        rendered = iomod.dumps_json(payload)
    elif args.output == "csv":
        rendered = (
            "method,estimate,lower,upper,alpha,c_trimmed,n_original,n_used\n"
            + ",".join(
                [
                    fit.method,
                    iomod.FLOAT_FMT % fit.estimate,
                    iomod.FLOAT_FMT % fit.lower,
                    iomod.FLOAT_FMT % fit.upper,
                    "%g" % fit.alpha,
                    "%g" % fit.c_trimmed,
                    str(fit.n_original),
                    str(fit.n_used),
                ]
            )
        )
    else:
        rendered = twonn_report(fit)

    outputs = []
    if args.out is not None:
        iomod.atomic_write_text(args.out, rendered + "\n")
        outputs.append(args.out)
    else:
        print(rendered)
    if args.plot_data is not None:
        if fit.method == "linfit":
            iomod.write_matrix_csv(
                args.plot_data,
                np.column_stack([fit.extras["x"], fit.extras["y"]]),
                ["log_mu", "neg_log_sf"],
            )
        else:
            iomod.write_matrix_csv(
                args.plot_data,
                np.column_stack(
                    [
                        fit.extras["grid_d"],
                        fit.extras["grid_prior"],
                        fit.extras["grid_posterior"],
                    ]
                ),
                ["d", "prior_density", "posterior_density"],
            )
        outputs.append(args.plot_data)
    if outputs:
        iomod.write_manifest(
            outputs[0] + ".manifest.json",
            "twonn",
            _arg_dict(args),
            inputs,
            outputs,
            None,
            started,
            __version__,
        )
    return 0


# ---------------------------------------------------------------------------
# hidalgo
# ---------------------------------------------------------------------------


def _config_from_args(args) -> HidalgoConfig:
    if args.prior != "conjugate" and args.nominal_dim is None:
        raise UsageError(f"--prior {args.prior} requires --nominal-dim")
    _require_unit_interval("pi-mass", args.pi_mass)
    if not 0.5 < args.xi < 1.0:
        raise UsageError(f"--xi must lie in (0.5, 1), got {args.xi}")
    config = HidalgoConfig(
        K=args.k,
        q=args.q,
        xi=args.xi,
        alpha_dirichlet=args.alpha_dirichlet,
        a0_d=args.a0_d,
        b0_d=args.b0_d,
        prior_type=PriorType.coerce(args.prior),
        D=args.nominal_dim,
        pi_mass=args.pi_mass,
        nsim=args.nsim,
        burn_in=args.burn_in,
        thinning=args.thinning,
        seed=args.seed,
    )
    try:
        config.validate()
    except ValueError as exc:
        raise UsageError(str(exc))
    return config


def write_run_dir(chains: HidalgoChains, out_dir: str) -> list[str]:
    """Persist one run: chain CSVs plus the config echo."""
    os.makedirs(out_dir, exist_ok=True)
    cfg = chains.config
    paths = []

    def _path(name: str) -> str:
        p = os.path.join(out_dir, name)
        paths.append(p)
        return p

    kdim = cfg.K
    iomod.write_matrix_csv(
        _path("cluster_prob.csv"),
        chains.cluster_prob,
        [f"pi_{k}" for k in range(1, kdim + 1)],
    )
    iomod.write_matrix_csv(
        _path("membership_labels.csv"),
        chains.membership_labels,
        [f"z_{i}" for i in range(1, chains.n_obs + 1)],
    )
    iomod.write_matrix_csv(
        _path("id_raw.csv"),
        chains.id_raw,
        [f"d_{k}" for k in range(1, kdim + 1)],
    )
    iomod.write_json(
        _path("config.json"),
        {
            "K": cfg.K,
            "q": cfg.q,
            "xi": cfg.xi,
            "alpha_dirichlet": cfg.alpha_dirichlet,
            "a0_d": cfg.a0_d,
            "b0_d": cfg.b0_d,
            "prior_type": cfg.prior_type.value,
            "D": cfg.D,
            "pi_mass": cfg.pi_mass,
            "nsim": cfg.nsim,
            "burn_in": cfg.burn_in,
            "thinning": cfg.thinning,
            "seed": cfg.seed,
            "n_obs": chains.n_obs,
            "removed_duplicates": chains.removed_duplicates,
        },
    )
    return paths


def read_run_dir(run_dir: str) -> HidalgoChains:
    """Reload a persisted run."""
    with open(os.path.join(run_dir, "config.json")) as fh:
        raw = json.load(fh)
    config = HidalgoConfig(
        K=raw["K"],
        q=raw["q"],
        xi=raw["xi"],
        alpha_dirichlet=raw["alpha_dirichlet"],
        a0_d=raw["a0_d"],
        b0_d=raw["b0_d"],
        prior_type=PriorType.coerce(raw["prior_type"]),
        D=raw["D"],
        pi_mass=raw["pi_mass"],
        nsim=raw["nsim"],
        burn_in=raw["burn_in"],
        thinning=raw["thinning"],
        seed=raw["seed"],
    )
    cluster_prob, _, _ = iomod.read_matrix_csv(os.path.join(run_dir, "cluster_prob.csv"))
    labels, _, _ = iomod.read_matrix_csv(os.path.join(run_dir, "membership_labels.csv"))
    id_raw, _, _ = iomod.read_matrix_csv(os.path.join(run_dir, "id_raw.csv"))
    return HidalgoChains(
        cluster_prob=cluster_prob,
        membership_labels=labels.astype(np.int64),
        id_raw=id_raw,
        config=config,
        elapsed=0.0,
        n_obs=labels.shape[1],
        removed_duplicates=raw.get("removed_duplicates", 0),
    )


def _cmd_hidalgo(args) -> int:
    started = time.perf_counter()
    config = _config_from_args(args)
    cloud, dist, inputs = _load_input(args)
    chains = run_hidalgo(
        cloud, dist, config=config, metric=args.metric, verbose=not args.quiet
    )
    outputs = write_run_dir(chains, args.out_dir)
    iomod.write_manifest(
        os.path.join(args.out_dir, "manifest.json"),
        "hidalgo",
        _arg_dict(args),
        inputs,
        outputs,
        args.seed,
        started,
        __version__,
    )
    print(hidalgo_report(chains))
    return 0


# ---------------------------------------------------------------------------
# summarize
# ---------------------------------------------------------------------------


def _cmd_summarize(args) -> int:
    started = time.perf_counter()
    chains = read_run_dir(args.run_dir)
    out_dir = args.out_dir or args.run_dir
    os.makedirs(out_dir, exist_ok=True)
    summary = postprocess(chains, k_clusters=args.k_clusters, linkage=args.linkage)
    outputs = []
    inputs = []

    def _path(name: str) -> str:
        p = os.path.join(out_dir, name)
        outputs.append(p)
        return p

    n = summary.id_summary.shape[0]
    iomod.write_matrix_csv(
        _path("id_summary.csv"),
        np.column_stack([np.arange(n), summary.id_summary]),
        ["index"] + ID_SUMMARY_COLUMNS,
    )
    iomod.write_matrix_csv(
        _path("psm.csv"),
        summary.psm,
        [f"p{j}" for j in range(n)],
    )
    if summary.clusters is not None:
        iomod.write_matrix_csv(
            _path("clusters.csv"),
            np.column_stack([np.arange(n), summary.clusters]),
            ["index", "cluster"],
        )
        freqs = cluster_frequencies(summary.clusters)
        headers = [f"Cluster {k}" for k in range(1, freqs.size + 1)]
        widths = [max(len(h) + 1, len(str(v)) + 1) for h, v in zip(headers, freqs)]
        print("Estimated clustering solution summary:")
        print()
        print(f"Method: dendrogram ({args.linkage} linkage).")
        print(f"Retrieved clusters: {args.k_clusters}.")
        print("Clustering frequencies:")
        print()
        print("|" + "|".join(h.rjust(w) for h, w in zip(headers, widths)) + "|")
        print("|" + "|".join("-" * (w - 1) + ":" for w in widths) + "|")
        print("|" + "|".join(str(v).rjust(w) for v, w in zip(freqs, widths)) + "|")
    if args.class_file is not None:
        classes = iomod_read_class(args.class_file, args.class_column, not args.no_header)
        inputs.append(args.class_file)
        names, stats = id_by_class(summary.id_postpr, classes)
        with open(_path("id_by_class.csv"), "w") as fh:
            fh.write("class,mean,median,sd\n")
            for cls, row in zip(names, stats):
                fh.write(
                    f"{cls},{iomod.FLOAT_FMT % row[0]},"
                    f"{iomod.FLOAT_FMT % row[1]},{iomod.FLOAT_FMT % row[2]}\n"
                )
    if args.input is not None or args.dist is not None:
        cloud, dist, extra_inputs = _load_input(args)
        inputs.extend(extra_inputs)
        profile = nn_distance_profile(cloud, dist, metric=args.metric)
        iomod.write_matrix_csv(
            _path("nn_profile.csv"),
            profile,
            [f"r{j}" for j in range(1, profile.shape[1] + 1)],
        )
    iomod.write_manifest(
        os.path.join(out_dir, "summarize_manifest.json"),
        "summarize",
        _arg_dict(args),
        inputs,
        outputs,
        None,
        started,
        __version__,
    )
    return 0


def iomod_read_class(path: str, column: str, header: bool) -> np.ndarray:
    import csv as _csv

    with open(path, newline="") as fh:
        rows = [row for row in _csv.reader(fh) if row]
    if not rows:
        raise ValueError(f"{path}: empty CSV")
    if header:
        names = [c.strip() for c in rows[0]]
        if column not in names:
            raise ValueError(f"{path}: no column named {column!r}")
        j = names.index(column)
        rows = rows[1:]
    else:
        if len(rows[0]) != 1:
            raise ValueError(f"{path}: headerless class file must have one column")
        j = 0
    return np.array([r[j] for r in rows])


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------


def _arg_dict(args) -> dict:
    skip = {"func"}
    return {k: v for k, v in vars(args).items() if k not in skip}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="idim", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("generate", help="write a synthetic benchmark dataset")
    p.add_argument(
        "--kind",
        required=True,
        choices=["swissroll", "hypercube", "gaussmix", "pareto"],
    )
    p.add_argument(
        "--n",
        type=int,
        required=True,
        help="number of rows (per component for gaussmix)",
    )
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--d", type=float, help="Pareto shape (pareto kind only)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("mus", help="compute NN distance ratios")
    _add_input_flags(p)
    p.add_argument("--n1", type=int, default=1)
    p.add_argument("--n2", type=int, default=2)
    p.add_argument("--q", type=int, default=3)
    p.add_argument("--out", help="ratio CSV (default: stdout)")
    p.add_argument("--adjacency-out", help="also write the q-NN adjacency CSV here")
    p.set_defaults(func=_cmd_mus)

    p = sub.add_parser("twonn", help="homogeneous intrinsic dimension")
    _add_input_flags(p)
    p.add_argument("--method", default="mle", choices=["linfit", "mle", "bayes"])
    p.add_argument("--alpha", type=float, default=0.95)
    p.add_argument("--c-trimmed", type=float, default=0.01)
    p.add_argument("--a-d", type=float, default=0.001)
    p.add_argument("--b-d", type=float, default=0.001)
    p.add_argument(
        "--unbiased",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="use the (n-1)/S estimator instead of n/S",
    )
    p.add_argument("--output", default="text", choices=["text", "json", "csv"])
    p.add_argument("--out", help="write the rendered result to this file")
    p.add_argument(
        "--plot-data",
        help="write plot-ready CSV (linfit points or bayes density grid)",
    )
    p.set_defaults(func=_cmd_twonn)

    p = sub.add_parser("hidalgo", help="heterogeneous mixture sampler")
    _add_input_flags(p)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--q", type=int, default=3)
    p.add_argument("--xi", type=float, default=0.75)
    p.add_argument("--alpha-dirichlet", type=float, default=0.05)
    p.add_argument("--a0-d", type=float, default=1.0)
    p.add_argument("--b0-d", type=float, default=1.0)
    p.add_argument(
        "--prior",
        default="conjugate",
        choices=["conjugate", "truncated", "truncated-pointmass"],
    )
    p.add_argument("--nominal-dim", type=int)
    p.add_argument("--pi-mass", type=float, default=0.5)
    p.add_argument("--nsim", type=int, default=2000)
    p.add_argument("--burn-in", type=int, default=2000)
    p.add_argument("--thinning", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--quiet", action="store_true", help="suppress progress output")
    p.set_defaults(func=_cmd_hidalgo)

    p = sub.add_parser("summarize", help="postprocess a hidalgo run directory")
    p.add_argument("run_dir")
    p.add_argument("--k-clusters", type=int)
    p.add_argument(
        "--linkage", default="average", choices=["average", "complete", "single"]
    )
    p.add_argument(
        "--class",
        dest="class_file",
        help="CSV holding a class column to stratify estimates",
    )
    p.add_argument("--class-column", default="class")
    p.add_argument("--out-dir", help="default: the run directory itself")
    _add_input_flags(p)
    p.set_defaults(func=_cmd_summarize)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entrypoint() -> None:
    sys.exit(main())
