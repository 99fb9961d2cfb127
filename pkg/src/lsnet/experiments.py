"""Experiment grid runner with reproducible seeding and CSV/JSON emission.

Five experiment kinds:

* ``scaling``          -- relative errors across (n, k) grids, one generated
                          model per cell, fresh adjacency draws per replicate;
* ``init_comparison``  -- the three initializers head to head on one model;
* ``kernel_misspec``   -- kernel-model truth fitted at several latent
                          dimensions (adjacency copies shared across fit-k);
* ``lscd_eval``        -- community detection accuracy, one fresh model and
                          adjacency per replicate seed;
* ``single_fit``       -- one fit of an ingested network, no truth.

Per-job RNG streams are integers derived from (master seed, stream tag,
cell index, replicate index), so results are independent of the worker-pool
size and rerunning a spec reproduces every output byte for byte.  Wall-clock
times are deliberately kept out of results.csv and summary.json (they would
break reproducibility); they land in the timings.csv sidecar instead.
"""

from __future__ import annotations

import dataclasses
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .community import kmeans
from .dataio import SCHEMA_VERSION, format_float, ingest_covariate, ingest_edge_list
from .fitting import FitConfig, fit
from .initializers import InitConfig, init_random, initialize
from .metrics import misclustering_rate, relative_errors
from .simulate import KernelSpec, generate_model, sample_adjacency

__all__ = ["ExperimentSpec", "ExperimentResult", "run_experiment", "RESULT_COLUMNS"]

EXPERIMENT_KINDS = ("scaling", "init_comparison", "kernel_misspec", "lscd_eval", "single_fit")

_STREAM_MODEL, _STREAM_ADJ, _STREAM_INIT, _STREAM_CLUSTER = 0, 1, 2, 3

RESULT_COLUMNS = [
    "schema_version",
    "kind",
    "cell",
    "replicate",
    "n",
    "d",
    "k",
    "fit_k",
    "kernel",
    "init_method",
    "projection_mode",
    "eta",
    "T",
    "model_seed",
    "adj_seed",
    "init_seed",
    "cluster_seed",
    "status",
    "error",
    "p_hat",
    "objective_initial",
    "objective_final",
    "iterations",
    "rel_err_theta",
    "rel_err_theta_root",
    "rel_err_g",
    "e_t",
    "dist_z",
    "misclustering",
]


@dataclass
class ExperimentSpec:
    """Declarative description of one experiment run."""

    kind: str = "scaling"
    out_dir: str = "results"
    seed: int = 0
    replicates: int = 10
    threads: int = 1
    # model grids
    n_grid: tuple = (500, 1000, 2000)
    k_grid: tuple = (2,)
    fit_k_grid: tuple = (1, 2, 4, 8)
    kernel: str = "inner_product"
    d: int = 4
    center_separation: float | None = None
    num_clusters: int = 2
    # fitting / initialization
    eta: float = 0.2
    T: int = 500
    projection_mode: str = "practical"
    M1: float | None = None
    init_method: str = "usvt"
    init_T: int = 10
    init_M1: float = 4.0
    kmeans_restarts: int = 20
    # single_fit inputs
    edge_list: str | None = None
    covariate: str | None = None
    covariate_kind: str = "dense_matrix"
    fit_k: int = 2

    def __post_init__(self):
        if self.kind not in EXPERIMENT_KINDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}; expected one of {EXPERIMENT_KINDS}")
        if self.replicates < 1:
            raise ValueError("replicate count must be >= 1")
        self.n_grid = tuple(int(n) for n in self.n_grid)
        self.k_grid = tuple(int(k) for k in self.k_grid)
        self.fit_k_grid = tuple(int(k) for k in self.fit_k_grid)
        if self.kind != "single_fit":
            if not self.n_grid or not self.k_grid or not self.fit_k_grid:
                raise ValueError("grids must be nonempty")

    CONFIG_KEYS = {
        "experiment.kind": "kind",
        "experiment.out_dir": "out_dir",
        "experiment.seed": "seed",
        "experiment.replicates": "replicates",
        "experiment.threads": "threads",
        "experiment.n_grid": "n_grid",
        "experiment.k_grid": "k_grid",
        "experiment.fit_k_grid": "fit_k_grid",
        "experiment.kernel": "kernel",
        "experiment.d": "d",
        "experiment.center_separation": "center_separation",
        "experiment.num_clusters": "num_clusters",
        "experiment.edge_list": "edge_list",
        "experiment.covariate": "covariate",
        "experiment.covariate_kind": "covariate_kind",
        "experiment.fit_k": "fit_k",
        "fit.eta": "eta",
        "fit.T": "T",
        "fit.projection_mode": "projection_mode",
        "fit.M1": "M1",
        "init.method": "init_method",
        "init.T": "init_T",
        "init.M1": "init_M1",
        "community.kmeans_restarts": "kmeans_restarts",
    }

    @classmethod
    def from_config(cls, cfg):
        """Build a spec from a flat dotted-key mapping; unknown keys are errors."""
        kwargs = {}
        for key, value in cfg.items():
            if key not in cls.CONFIG_KEYS:
                raise ValueError(
                    f"unknown config key {key!r}; known keys: {sorted(cls.CONFIG_KEYS)}"
                )
            kwargs[cls.CONFIG_KEYS[key]] = value
        return cls(**kwargs)

    def to_config(self):
        field_to_key = {v: k for k, v in self.CONFIG_KEYS.items()}
        out = {}
        for f in dataclasses.fields(self):
            if f.name in field_to_key:
                value = getattr(self, f.name)
                out[field_to_key[f.name]] = list(value) if isinstance(value, tuple) else value
        return out


@dataclass
class ExperimentResult:
    rows: list
    summary: dict
    failures: int
    results_path: Path
    summary_path: Path
    timings_path: Path


def _derived_seed(master, tag, cell, replicate):
    ss = np.random.SeedSequence(int(master), spawn_key=(int(tag), int(cell), int(replicate)))
    return int(ss.generate_state(1, np.uint64)[0])


def _jobs_for(spec):
    """The deterministic job list; every job carries its own derived seeds."""
    jobs = []

    def add(cell, replicate, n, d, k, fit_k, kernel, method, model_rep=0):
        jobs.append(
            {
                "index": len(jobs),
                "cell": cell,
                "replicate": replicate,
                "n": n,
                "d": d,
                "k": k,
                "fit_k": fit_k,
                "kernel": kernel,
                "init_method": method,
                "model_seed": _derived_seed(spec.seed, _STREAM_MODEL, cell, model_rep),
                "adj_seed": _derived_seed(spec.seed, _STREAM_ADJ, cell, replicate),
                "init_seed": _derived_seed(spec.seed, _STREAM_INIT, cell, replicate),
                "cluster_seed": _derived_seed(spec.seed, _STREAM_CLUSTER, cell, replicate),
            }
        )

    if spec.kind == "scaling":
        cell = 0
        for n in spec.n_grid:
            for k in spec.k_grid:
                for rep in range(spec.replicates):
                    add(cell, rep, n, k, k, k, "inner_product", spec.init_method)
                cell += 1
    elif spec.kind == "init_comparison":
        cell = 0
        for n in spec.n_grid:
            for k in spec.k_grid:
                for rep in range(spec.replicates):
                    for method in ("lifted_pgd", "usvt", "random"):
                        add(cell, rep, n, k, k, k, "inner_product", method)
                cell += 1
    elif spec.kind == "kernel_misspec":
        cell = 0
        for n in spec.n_grid:
            for rep in range(spec.replicates):
                for fit_k in spec.fit_k_grid:
                    add(cell, rep, n, spec.d, spec.d, fit_k, spec.kernel, spec.init_method)
            cell += 1
    elif spec.kind == "lscd_eval":
        cell = 0
        for n in spec.n_grid:
            for rep in range(spec.replicates):
                # a fresh model per replicate: each seed is a full simulation
                add(cell, rep, n, spec.num_clusters, spec.num_clusters,
                    spec.num_clusters, "inner_product", spec.init_method, model_rep=rep)
            cell += 1
    else:  # single_fit
        add(0, 0, 0, 0, spec.fit_k, spec.fit_k, "", spec.init_method)
    return jobs


def _blank_row(spec, job):
    row = {c: "" for c in RESULT_COLUMNS}
    row.update(
        schema_version=SCHEMA_VERSION,
        kind=spec.kind,
        cell=job["cell"],
        replicate=job["replicate"],
        n=job["n"],
        d=job["d"],
        k=job["k"],
        fit_k=job["fit_k"],
        kernel=job["kernel"],
        init_method=job["init_method"],
        projection_mode=spec.projection_mode,
        eta=spec.eta,
        T=spec.T,
        model_seed=job["model_seed"],
        adj_seed=job["adj_seed"],
        init_seed=job["init_seed"],
        cluster_seed=job["cluster_seed"],
        status="ok",
        error="",
    )
    return row


def _make_init(spec, job, A, X):
    method = job["init_method"]
    if method == "random":
        return init_random(A.n, job["fit_k"], scale=1.0, seed=job["init_seed"])
    cfg = InitConfig(
        method=method,
        k=job["fit_k"],
        M1=spec.init_M1,
        T=spec.init_T,
        seed=job["init_seed"],
    )
    return initialize(A, X, cfg)


def _fit_cfg(spec, fit_k):
    return FitConfig(
        k=fit_k,
        eta=spec.eta,
        T=spec.T,
        projection_mode=spec.projection_mode,
        M1=spec.M1,
    )


def _run_job(spec, job):
    """Worker body; returns (row, wall_seconds)."""
    t0 = time.perf_counter()
    row = _blank_row(spec, job)
    try:
        if spec.kind == "single_fit":
            A = ingest_edge_list(spec.edge_list)
            X = (
                ingest_covariate(spec.covariate, spec.covariate_kind, expected_n=A.n)
                if spec.covariate
                else None
            )
            row["n"] = A.n
            row["p_hat"] = A.edge_density()
            init = _make_init(spec, job, A, X)
            params, trace = fit(A, X, init, _fit_cfg(spec, job["fit_k"]))
            row.update(
                objective_initial=trace.objective[0],
                objective_final=trace.objective[-1],
                iterations=trace.iterations,
            )
            row["_trace"] = trace.objective.tolist()
            row["_params"] = params
            return row, time.perf_counter() - t0

        kernel = KernelSpec(kind=job["kernel"])
        truth = generate_model(
            n=job["n"],
            d=job["d"],
            kernel=kernel,
            seed=job["model_seed"],
            center_separation=spec.center_separation,
        )
        A = sample_adjacency(truth, seed=job["adj_seed"])
        row["p_hat"] = A.edge_density()
        X = truth.X
        init = _make_init(spec, job, A, X)
        params, trace = fit(
            A, X, init, _fit_cfg(spec, job["fit_k"]), truth=truth, track_errors=False
        )
        report = relative_errors(params, truth)
        row.update(
            objective_initial=trace.objective[0],
            objective_final=trace.objective[-1],
            iterations=trace.iterations,
            rel_err_theta=report.rel_err_theta,
            rel_err_theta_root=float(np.sqrt(report.rel_err_theta)),
            rel_err_g=report.rel_err_g,
            e_t=report.e_t,
            dist_z=report.dist_z,
        )
        if spec.kind == "lscd_eval":
            labels = kmeans(
                params.Z,
                spec.num_clusters,
                restarts=spec.kmeans_restarts,
                seed=job["cluster_seed"],
            )
            row["misclustering"] = misclustering_rate(labels, truth.community_labels())
    except Exception as exc:  # recorded per-row; the grid keeps going
        row["status"] = "failed"
        message = " ".join(f"{type(exc).__name__}: {exc}".split())
        row["error"] = message.replace(",", ";")
    return row, time.perf_counter() - t0


def _percentiles(values):
    q1, med, q3 = np.percentile(np.asarray(values, dtype=float), [25.0, 50.0, 75.0])
    return {"q1": float(q1), "median": float(med), "q3": float(q3)}


def _cell_stats(rows, keys, metrics=("rel_err_theta", "rel_err_g", "misclustering")):
    """Group ok-rows by ``keys`` and attach quartile stats per metric."""
    groups = {}
    for row in rows:
        if row["status"] != "ok":
            continue
        gk = tuple(row[k] for k in keys)
        groups.setdefault(gk, []).append(row)
    out = []
    for gk in sorted(groups):
        stat = {k: v for k, v in zip(keys, gk)}
        stat["count"] = len(groups[gk])
        for metric in metrics:
            vals = [r[metric] for r in groups[gk] if r[metric] != ""]
            if vals:
                stat[metric] = _percentiles(vals)
        out.append(stat)
    return out


def _loglog_slope(xs, ys):
    xs = np.log(np.asarray(xs, dtype=float))
    ys = np.log(np.asarray(ys, dtype=float))
    return float(np.polyfit(xs, ys, 1)[0])


def _summarize(spec, rows):
    summary = {
        "schema_version": SCHEMA_VERSION,
        "kind": spec.kind,
        "config": spec.to_config(),
        "failed_rows": sum(1 for r in rows if r["status"] != "ok"),
    }
    if spec.kind == "scaling":
        cells = _cell_stats(rows, ("n", "k"))
        summary["cells"] = cells
        slopes = {}
        for k in spec.k_grid:
            pts = [(c["n"], c["rel_err_theta"]["median"]) for c in cells
                   if c["k"] == k and "rel_err_theta" in c]
            if len(pts) >= 2:
                ns, meds = zip(*pts)
                slope_sq = _loglog_slope(ns, meds)
                slopes[str(k)] = {
                    # slope of the squared Frobenius ratio of the error
                    "rel_err_theta": slope_sq,
                    # slope of its square root, the 1/sqrt(n)-comparable error
                    "rel_err_theta_root": slope_sq / 2.0,
                }
        summary["slopes"] = slopes
    elif spec.kind == "init_comparison":
        cells = _cell_stats(rows, ("n", "k", "init_method"))
        summary["cells"] = cells
        medians = {
            c["init_method"]: c["rel_err_theta"]["median"]
            for c in cells
            if "rel_err_theta" in c
        }
        summary["method_medians_rel_err_theta"] = medians
        if medians:
            vals = list(medians.values())
            summary["max_min_median_ratio"] = max(vals) / min(vals)
    elif spec.kind == "kernel_misspec":
        summary["cells"] = _cell_stats(rows, ("n", "fit_k"))
    elif spec.kind == "lscd_eval":
        summary["cells"] = _cell_stats(rows, ("n",))
    return summary


def _write_results_csv(path, rows):
    with open(path, "w", newline="") as fh:
        fh.write(",".join(RESULT_COLUMNS))
        fh.write("\n")
        for row in rows:
            fields = []
            for col in RESULT_COLUMNS:
                val = row[col]
                if isinstance(val, float):
                    fields.append(format_float(val))
                else:
                    fields.append(str(val))
            fh.write(",".join(fields))
            fh.write("\n")


def _write_timings_csv(path, timings):
    with open(path, "w", newline="") as fh:
        fh.write(f"# lsnet timings schema_version={SCHEMA_VERSION} (not reproducible by design)\n")
        fh.write("row,wall_seconds\n")
        for idx, seconds in enumerate(timings):
            fh.write(f"{idx},{seconds:.6f}\n")


def _write_single_fit_outputs(out_dir, rows):
    from .dataio import write_matrix_csv, write_vector_csv

    for row in rows:
        trace = row.pop("_trace", None)
        params = row.pop("_params", None)
        if trace is not None:
            with open(out_dir / "trace.csv", "w", newline="") as fh:
                fh.write(f"# lsnet trace schema_version={SCHEMA_VERSION}\n")
                fh.write("iteration,objective\n")
                for i, h in enumerate(trace):
                    fh.write(f"{i},{format_float(h)}\n")
        if params is not None:
            write_matrix_csv(out_dir / "z_hat.csv", params.Z, label="z_hat")
            write_vector_csv(out_dir / "alpha_hat.csv", params.alpha, label="alpha_hat")
            with open(out_dir / "fit_meta.json", "w") as fh:
                json.dump(
                    {
                        "schema_version": SCHEMA_VERSION,
                        "beta_hat": params.beta,
                        "n": params.n,
                        "k": params.k,
                    },
                    fh,
                    indent=2,
                )
                fh.write("\n")


def run_experiment(spec):
    """Run the grid, write results.csv / summary.json / timings.csv, return them."""
    out_dir = Path(spec.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    jobs = _jobs_for(spec)

    results = [None] * len(jobs)
    timings = [0.0] * len(jobs)
    workers = max(1, int(spec.threads))
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for job, (row, seconds) in zip(jobs, pool.map(_run_job, [spec] * len(jobs), jobs)):
                results[job["index"]] = row
                timings[job["index"]] = seconds
    else:
        for job in jobs:
            row, seconds = _run_job(spec, job)
            results[job["index"]] = row
            timings[job["index"]] = seconds

    if spec.kind == "single_fit":
        _write_single_fit_outputs(out_dir, results)

    summary = _summarize(spec, results)
    results_path = out_dir / "results.csv"
    summary_path = out_dir / "summary.json"
    timings_path = out_dir / "timings.csv"
    _write_results_csv(results_path, results)
    with open(summary_path, "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    _write_timings_csv(timings_path, timings)

    failures = summary["failed_rows"]
    return ExperimentResult(
        rows=results,
        summary=summary,
        failures=failures,
        results_path=results_path,
        summary_path=summary_path,
        timings_path=timings_path,
    )
