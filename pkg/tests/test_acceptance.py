"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to watch the lines appear;
the full module takes on the order of ten minutes (criteria 3-5 run real
fitting grids at n up to 2000).
"""

import subprocess
import sys
import time

import numpy as np
import pytest

from lsnet.experiments import ExperimentSpec, run_experiment
from lsnet.fitting import FitConfig, fit, project_z
from lsnet.initializers import InitConfig, init_usvt, psd_project
from lsnet.metrics import procrustes_dist
from lsnet.model import double_center, gradients
from lsnet.simulate import KernelSpec, generate_model, sample_adjacency

from test_metrics import grid_procrustes_k2, random_orthogonal
from test_model import finite_diff_gradients, random_instance

pytestmark = pytest.mark.acceptance


class Budget:
    def __init__(self, number, name, seconds):
        self.number = number
        self.name = name
        self.seconds = seconds
        self.start = time.perf_counter()

    def finish(self, detail):
        elapsed = time.perf_counter() - self.start
        ok = elapsed < self.seconds
        status = "PASS" if ok else "FAIL"
        print(
            f"\nACCEPTANCE #{self.number} {self.name}: {status} "
            f"({detail}) [{elapsed:.1f}s / budget {self.seconds:.0f}s]"
        )
        assert ok, f"criterion {self.number} exceeded its runtime budget: {elapsed:.1f}s"


def test_criterion_01_gradient_oracle():
    budget = Budget(1, "gradient-oracle", 5.0)
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(20):
        n = int(rng.integers(4, 11))
        k = int(rng.integers(1, 4))
        A, X, params = random_instance(rng, n, k)
        gz, ga, gb = gradients(A, X, params)
        fz, fa, fb = finite_diff_gradients(A, X, params, h=1e-5)
        for g, f in ((gz, fz), (ga, fa), (np.atleast_1d(gb), np.atleast_1d(fb))):
            rel = np.linalg.norm(g - f) / max(np.linalg.norm(f), 1e-12)
            worst = max(worst, rel)
        assert worst < 1e-6
    budget.finish(f"20 instances, worst relative error {worst:.2e} < 1e-6")


def test_criterion_02_procrustes_invariance():
    budget = Budget(2, "procrustes-invariance", 10.0)
    rng = np.random.default_rng(7)
    worst = 0.0
    for i in range(50):
        k = 2 if i % 2 == 0 else 3
        z = rng.normal(size=(20, k))
        q = random_orthogonal(rng, k)
        dist, _ = procrustes_dist(z, z @ q)
        worst = max(worst, dist)
        assert dist < 1e-10
    worst_grid = 0.0
    for _ in range(5):
        z1 = rng.normal(size=(20, 2))
        z2 = rng.normal(size=(20, 2))
        dist, _ = procrustes_dist(z1, z2)
        ref = grid_procrustes_k2(z1, z2, num_angles=1_000_000)
        worst_grid = max(worst_grid, abs(dist - ref))
        assert abs(dist - ref) < 1e-5
    budget.finish(
        f"50 rotations worst dist {worst:.1e} < 1e-10; grid-oracle gap {worst_grid:.1e} < 1e-5"
    )


@pytest.mark.slow
def test_criterion_03_scaling_law(tmp_path):
    budget = Budget(3, "scaling-law", 600.0)
    spec = ExperimentSpec(
        kind="scaling",
        out_dir=str(tmp_path / "scaling"),
        n_grid=(500, 1000, 2000),
        k_grid=(2,),
        replicates=10,
        eta=0.2,
        T=500,
        init_method="usvt",
        projection_mode="practical",
        seed=20240501,
    )
    result = run_experiment(spec)
    assert result.failures == 0
    # slope of the 1/sqrt(n)-scale error (the Frobenius-norm ratio); the
    # squared ratio's slope is exactly twice this and is reported alongside
    slope = result.summary["slopes"]["2"]["rel_err_theta_root"]
    assert -0.65 < slope < -0.35
    budget.finish(f"slope {slope:.3f} in (-0.65, -0.35)")


@pytest.mark.slow
def test_criterion_04_initialization_robustness(tmp_path):
    budget = Budget(4, "initialization-robustness", 600.0)
    spec = ExperimentSpec(
        kind="init_comparison",
        out_dir=str(tmp_path / "init_cmp"),
        n_grid=(1000,),
        k_grid=(4,),
        replicates=10,
        eta=0.2,
        T=500,
        init_T=10,
        seed=20240502,
    )
    result = run_experiment(spec)
    assert result.failures == 0
    ratio = result.summary["max_min_median_ratio"]
    medians = result.summary["method_medians_rel_err_theta"]
    assert ratio < 1.25
    budget.finish(
        "median rel-Theta errors "
        + ", ".join(f"{m}={v:.4f}" for m, v in sorted(medians.items()))
        + f"; max/min {ratio:.3f} < 1.25"
    )


@pytest.mark.slow
def test_criterion_05_kernel_misspecification(tmp_path):
    budget = Budget(5, "kernel-misspecification", 600.0)
    spec = ExperimentSpec(
        kind="kernel_misspec",
        out_dir=str(tmp_path / "misspec"),
        n_grid=(2000,),
        fit_k_grid=(1, 2, 4, 8),
        kernel="gaussian",
        d=4,
        replicates=3,
        eta=0.2,
        T=400,
        seed=20240503,
    )
    result = run_experiment(spec)
    assert result.failures == 0
    medians = {
        c["fit_k"]: c["rel_err_theta"]["median"] for c in result.summary["cells"]
    }
    best_interior = min(medians[2], medians[4])
    assert best_interior < medians[1]
    budget.finish(
        "median rel-Theta by fit-k "
        + ", ".join(f"k={k}: {medians[k]:.4f}" for k in sorted(medians))
        + f"; best interior {best_interior:.4f} < k=1 value {medians[1]:.4f}"
    )


def test_criterion_06_schoenberg_property():
    budget = Budget(6, "schoenberg-property", 5.0)
    spec = KernelSpec(kind="distance")
    rng = np.random.default_rng(99)
    worst = np.inf
    for _ in range(20):
        z = rng.normal(size=(50, int(rng.integers(1, 5)))) * rng.uniform(0.5, 3.0)
        g = double_center(spec.matrix(z))
        worst = min(worst, float(np.linalg.eigvalsh(g).min()))
        assert worst >= -1e-8 * 50
    budget.finish(f"20 z-sets, min eigenvalue {worst:.2e} >= -5e-7")


@pytest.mark.slow
def test_criterion_07_lscd_accuracy(tmp_path):
    budget = Budget(7, "lscd-accuracy", 300.0)
    spec = ExperimentSpec(
        kind="lscd_eval",
        out_dir=str(tmp_path / "lscd"),
        n_grid=(1000,),
        num_clusters=2,
        replicates=10,
        eta=0.2,
        T=500,
        center_separation=4.0,
        seed=20240504,
    )
    result = run_experiment(spec)
    assert result.failures == 0
    median = result.summary["cells"][0]["misclustering"]["median"]
    assert median < 0.05
    budget.finish(f"median misclustering over 10 seeds {median:.4f} < 0.05")


def test_criterion_08_projection_correctness():
    budget = Budget(8, "projection-correctness", 5.0)
    rng = np.random.default_rng(17)
    worst_idem = worst_clip = 0.0
    for _ in range(20):
        m = rng.normal(size=(8, 8))
        m = (m + m.T) / 2.0
        p = psd_project(m)
        worst_idem = max(worst_idem, float(np.linalg.norm(psd_project(p) - p)))
        w, v = np.linalg.eigh(m)
        clip_ref = (v * np.clip(w, 0.0, None)) @ v.T
        worst_clip = max(worst_clip, float(np.abs(p - clip_ref).max()))
        assert worst_idem < 1e-10 and worst_clip < 1e-10

    # Dykstra against an independently coded tighter-tolerance reference
    worst_dyk = 0.0
    for seed in range(5):
        rng_d = np.random.default_rng(seed)
        z = rng_d.normal(size=(6, 2)) * 2.0
        m1 = 3.0
        ours = project_z(z, "theoretical", M1=m1, max_iters=5000, tol=1e-12)
        x = z.copy()
        p_inc = np.zeros_like(z)
        q_inc = np.zeros_like(z)
        cap = m1 / 3.0
        for _ in range(100_000):
            y = x + p_inc
            y = y - y.mean(axis=0, keepdims=True)
            p_inc = x + p_inc - y
            w = y + q_inc
            sq = np.sum(w * w, axis=1)
            scale = np.where(sq > cap, np.sqrt(cap / np.where(sq > 0.0, sq, 1.0)), 1.0)
            x_new = w * scale[:, None]
            q_inc = w - x_new
            if np.linalg.norm(x_new - x) < 1e-14:
                x = x_new
                break
            x = x_new
        worst_dyk = max(worst_dyk, float(np.linalg.norm(ours - x)))
        assert worst_dyk < 1e-6
    budget.finish(
        f"psd idempotence {worst_idem:.1e}, clip gap {worst_clip:.1e} (both < 1e-10); "
        f"Dykstra vs reference {worst_dyk:.1e} < 1e-6"
    )


def test_criterion_09_descent_sanity():
    budget = Budget(9, "descent-sanity", 30.0)
    truth = generate_model(200, 2, seed=31)
    A = sample_adjacency(truth, seed=32)
    init = init_usvt(A, truth.X, InitConfig(k=2))
    _, trace = fit(A, truth.X, init, FitConfig(k=2, T=200, eta=1e-3))
    steps = np.diff(trace.objective)
    worst = float(steps.max())
    assert np.all(steps <= 1e-8)
    budget.finish(f"200 steps at eta=1e-3, max objective increase {worst:.2e} <= 1e-8")


def test_criterion_10_cli_determinism(tmp_path):
    budget = Budget(10, "cli-determinism", 60.0)
    cfg_path = tmp_path / "cfg.json"
    out_dir = tmp_path / "out"
    cfg_path.write_text(
        """{
  "experiment.kind": "scaling",
  "experiment.n_grid": [50],
  "experiment.k_grid": [2],
  "experiment.replicates": 2,
  "experiment.seed": 12,
  "experiment.out_dir": %s,
  "fit.T": 20
}""" % repr(str(out_dir)).replace("'", '"')
    )

    def run_cli():
        proc = subprocess.run(
            [sys.executable, "-m", "lsnet.cli", "experiment", "--config", str(cfg_path)],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0, proc.stderr
        return (out_dir / "results.csv").read_bytes(), (out_dir / "summary.json").read_bytes()

    csv1, json1 = run_cli()
    csv2, json2 = run_cli()
    assert csv1 == csv2
    assert json1 == json2
    budget.finish(f"two CLI runs, {len(csv1)} CSV bytes identical")
