"""Command-line front end.

Subcommands: ``simulate``, ``fit``, ``init``, ``lscd``, ``experiment`` and
``eigvals``.  All numeric outputs are CSV or JSON.  Experiment configuration
comes from a flat dotted-key JSON file plus ``LSNET_*`` environment
overrides plus command-line flags (flags win).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import apply_env_overrides, load_config
from .dataio import (
    SCHEMA_VERSION,
    format_float,
    ingest_covariate,
    ingest_edge_list,
    read_adjacency_csv,
    write_matrix_csv,
    write_vector_csv,
)
from .experiments import ExperimentSpec, run_experiment
from .fitting import FitConfig, fit
from .initializers import InitConfig, gram_eigenvalues, initialize
from .community import lscd
from .simulate import KernelSpec, generate_model, sample_adjacency

FULL_SCALE_DEFAULTS = {
    "experiment.n_grid": [500, 1000, 2000, 4000, 8000],
    "experiment.k_grid": [2, 4, 8],
    "experiment.replicates": 30,
}


def _add_network_args(p):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--edge-list", help="edge list file (two ids per line)")
    src.add_argument("--adjacency", help="dense 0/1 adjacency CSV")
    p.add_argument("--covariate", help="covariate file")
    p.add_argument(
        "--covariate-kind",
        choices=("dense_matrix", "node_attribute_indicator"),
        default="dense_matrix",
    )


def _add_fit_args(p):
    p.add_argument("--k", type=int, default=2, help="latent dimension")
    p.add_argument("--eta", type=float, default=0.2, help="step-size constant")
    p.add_argument("--iters", "-T", dest="T", type=int, default=500, help="iteration count")
    p.add_argument("--projection-mode", choices=("practical", "theoretical"), default="practical")
    p.add_argument("--m1", type=float, default=None, help="bound constant (theoretical mode)")
    p.add_argument("--init-method", choices=("usvt", "lifted_pgd", "random"), default="usvt")
    p.add_argument("--init-iters", type=int, default=10, help="lifted-init iteration count")
    p.add_argument("--init-m1", type=float, default=4.0, help="clamp constant for the USVT init")
    p.add_argument("--seed", type=int, default=0)


def _load_network(args):
    if args.edge_list:
        A = ingest_edge_list(args.edge_list)
    else:
        A = read_adjacency_csv(args.adjacency)
    X = None
    if args.covariate:
        X = ingest_covariate(args.covariate, args.covariate_kind, expected_n=A.n)
    return A, X


def _init_config(args):
    return InitConfig(
        method=args.init_method,
        k=args.k,
        M1=args.init_m1,
        T=args.init_iters,
        seed=args.seed,
    )


def _out_dir(args):
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _cmd_simulate(args):
    out = _out_dir(args)
    kernel = KernelSpec(kind=args.kernel)
    truth = generate_model(
        n=args.n,
        d=args.d,
        kernel=kernel,
        seed=args.seed,
        center_separation=args.center_separation,
        truncate_before_shift=not args.truncate_after_shift,
    )
    A = sample_adjacency(truth, seed=args.adjacency_seed)
    write_vector_csv(out / "alpha_star.csv", truth.alpha_star, label="alpha_star")
    if truth.Z_star is not None:
        write_matrix_csv(out / "z_star.csv", truth.Z_star, label="z_star")
    write_matrix_csv(out / "g_star.csv", truth.G_star, label="g_star")
    write_matrix_csv(out / "x.csv", truth.X.entries, label="covariate")
    write_matrix_csv(out / "adjacency.csv", A.entries, label="adjacency")
    if args.emit_probabilities:
        write_matrix_csv(out / "probabilities.csv", truth.P, label="probabilities")
    meta = {
        "schema_version": SCHEMA_VERSION,
        "n": args.n,
        "d": args.d,
        "kernel": args.kernel,
        "seed": args.seed,
        "adjacency_seed": args.adjacency_seed,
        "center_separation": args.center_separation,
        "truncate_before_shift": not args.truncate_after_shift,
        "beta_star": truth.beta_star,
        "m1_bound": truth.m1_bound,
        "files": sorted(p.name for p in out.iterdir() if p.is_file() and p.name != "truth_meta.json"),
    }
    with open(out / "truth_meta.json", "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote ground truth bundle to {out}")
    return 0


def _cmd_fit(args):
    out = _out_dir(args)
    A, X = _load_network(args)
    init = initialize(A, X, _init_config(args))
    cfg = FitConfig(
        k=args.k, eta=args.eta, T=args.T, projection_mode=args.projection_mode, M1=args.m1
    )
    params, trace = fit(A, X, init, cfg)
    write_matrix_csv(out / "z_hat.csv", params.Z, label="z_hat")
    write_vector_csv(out / "alpha_hat.csv", params.alpha, label="alpha_hat")
    with open(out / "trace.csv", "w", newline="") as fh:
        fh.write(f"# lsnet trace schema_version={SCHEMA_VERSION}\n")
        fh.write("iteration,objective\n")
        for i, h in enumerate(trace.objective):
            fh.write(f"{i},{format_float(h)}\n")
    with open(out / "fit_meta.json", "w") as fh:
        json.dump(
            {
                "schema_version": SCHEMA_VERSION,
                "n": A.n,
                "k": args.k,
                "beta_hat": params.beta,
                "objective_initial": float(trace.objective[0]),
                "objective_final": float(trace.objective[-1]),
                "iterations": trace.iterations,
                "init_method": args.init_method,
                "projection_mode": args.projection_mode,
                "eta": args.eta,
            },
            fh,
            indent=2,
            sort_keys=True,
        )
        fh.write("\n")
    print(f"fit complete: objective {format_float(trace.objective[0])} -> "
          f"{format_float(trace.objective[-1])} in {trace.iterations} iterations")
    return 0


def _cmd_init(args):
    out = _out_dir(args)
    A, X = _load_network(args)
    params = initialize(A, X, _init_config(args))
    write_matrix_csv(out / "z0.csv", params.Z, label="z0")
    write_vector_csv(out / "alpha0.csv", params.alpha, label="alpha0")
    with open(out / "init_meta.json", "w") as fh:
        json.dump(
            {
                "schema_version": SCHEMA_VERSION,
                "n": A.n,
                "k": args.k,
                "beta0": params.beta,
                "method": args.init_method,
            },
            fh,
            indent=2,
            sort_keys=True,
        )
        fh.write("\n")
    print(f"initialization ({args.init_method}) written to {out}")
    return 0


def _cmd_lscd(args):
    out = _out_dir(args)
    A, X = _load_network(args)
    k_fit = args.k if args.k is not None else args.clusters
    fit_cfg = FitConfig(
        k=k_fit, eta=args.eta, T=args.T, projection_mode=args.projection_mode, M1=args.m1
    )
    init_cfg = InitConfig(
        method=args.init_method, k=k_fit, M1=args.init_m1, T=args.init_iters, seed=args.seed
    )
    labels, params = lscd(
        A,
        X,
        k_fit=k_fit,
        num_clusters=args.clusters,
        fit_config=fit_cfg,
        init_config=init_cfg,
        restarts=args.restarts,
        seed=args.seed,
    )
    with open(out / "labels.csv", "w", newline="") as fh:
        fh.write(f"# lsnet labels schema_version={SCHEMA_VERSION}\n")
        fh.write("node,label\n")
        for i, lab in enumerate(labels):
            fh.write(f"{i},{lab}\n")
    write_matrix_csv(out / "z_hat.csv", params.Z, label="z_hat")
    write_vector_csv(out / "alpha_hat.csv", params.alpha, label="alpha_hat")
    sizes = np.bincount(labels, minlength=args.clusters)
    with open(out / "lscd_meta.json", "w") as fh:
        json.dump(
            {
                "schema_version": SCHEMA_VERSION,
                "n": A.n,
                "clusters": args.clusters,
                "k_fit": k_fit,
                "beta_hat": params.beta,
                "cluster_sizes": sizes.tolist(),
            },
            fh,
            indent=2,
            sort_keys=True,
        )
        fh.write("\n")
    print(f"lscd: cluster sizes {sizes.tolist()}, outputs in {out}")
    return 0


def _cmd_eigvals(args):
    out = _out_dir(args)
    A, X = _load_network(args)
    cfg = InitConfig(
        method="lifted_pgd",
        k=1,
        T=args.init_iters,
        lam=args.lam,
        gamma=args.gamma,
        eta=args.eta,
    )
    eigvals, lam, suggested_k = gram_eigenvalues(A, X, cfg)
    write_vector_csv(out / "g_eigenvalues.csv", eigvals, label="g_eigenvalues")
    with open(out / "eigvals_meta.json", "w") as fh:
        json.dump(
            {
                "schema_version": SCHEMA_VERSION,
                "n": A.n,
                "lambda": lam,
                "suggested_k": suggested_k,
                "iterations": args.init_iters,
            },
            fh,
            indent=2,
            sort_keys=True,
        )
        fh.write("\n")
    print(f"eigenvalue diagnostic: {suggested_k} eigenvalue(s) exceed lambda = {lam:.6g}")
    return 0


def _cmd_experiment(args):
    cfg = {}
    if args.full_scale:
        cfg.update(FULL_SCALE_DEFAULTS)
    if args.config:
        cfg.update(load_config(args.config))
    cfg = apply_env_overrides(cfg)
    # flag overrides (only when given on the command line)
    overrides = {
        "experiment.seed": args.seed,
        "experiment.out_dir": args.out_dir,
        "experiment.threads": args.threads,
        "experiment.replicates": args.replicates,
        "fit.projection_mode": args.projection_mode,
        "init.method": args.init_method,
    }
    for key, value in overrides.items():
        if value is not None:
            cfg[key] = value
    spec = ExperimentSpec.from_config(cfg)
    result = run_experiment(spec)
    print(
        f"experiment {spec.kind}: {len(result.rows)} rows, "
        f"{result.failures} failed; wrote {result.results_path}"
    )
    return 1 if result.failures else 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="lsnet",
        description="Latent space network models: simulate, fit, initialize, cluster, run experiments.",
    )
    parser.add_argument("--version", action="version", version=f"lsnet {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a ground-truth model and one adjacency draw")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, default=2, help="latent dimension of the truth")
    p.add_argument("--kernel", choices=("inner_product", "distance", "gaussian"),
                   default="inner_product")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--adjacency-seed", type=int, default=1)
    p.add_argument("--center-separation", type=float, default=None)
    p.add_argument("--truncate-after-shift", action="store_true",
                   help="truncate latent coordinates after adding the center")
    p.add_argument("--emit-probabilities", action="store_true")
    p.add_argument("--out-dir", default="truth")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("fit", help="fit the model to an ingested network")
    _add_network_args(p)
    _add_fit_args(p)
    p.add_argument("--out-dir", default="fit_out")
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("init", help="run an initializer only")
    _add_network_args(p)
    _add_fit_args(p)
    p.add_argument("--out-dir", default="init_out")
    p.set_defaults(func=_cmd_init)

    p = sub.add_parser("lscd", help="latent-space community detection")
    _add_network_args(p)
    _add_fit_args(p)
    p.add_argument("--clusters", type=int, required=True)
    p.add_argument("--restarts", type=int, default=20, help="k-means restarts")
    p.add_argument("--out-dir", default="lscd_out")
    p.set_defaults(func=_cmd_lscd)

    p = sub.add_parser("experiment", help="run an experiment grid from a config file")
    p.add_argument("--config", help="flat dotted-key JSON config")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out-dir", default=None)
    p.add_argument("--threads", type=int, default=None, help="worker-pool size")
    p.add_argument("--replicates", type=int, default=None)
    p.add_argument("--projection-mode", choices=("practical", "theoretical"), default=None)
    p.add_argument("--init-method", choices=("usvt", "lifted_pgd", "random"), default=None)
    p.add_argument("--full-scale", action="store_true",
                   help="use the full-size grid defaults (n up to 8000, 30 replicates)")
    p.set_defaults(func=_cmd_experiment)

    p = sub.add_parser("eigvals", help="dump the lifted iterate's eigenvalues (dimension diagnostic)")
    _add_network_args(p)
    p.add_argument("--init-iters", type=int, default=10)
    p.add_argument("--eta", type=float, default=0.2)
    p.add_argument("--lam", type=float, default=None)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--out-dir", default="eigvals_out")
    p.set_defaults(func=_cmd_eigvals)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"lsnet: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
