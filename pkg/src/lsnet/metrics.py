"""Error metrics, Procrustes alignment, tuning heuristics and cluster scoring."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .model import _as_entries, assemble_theta, logit

__all__ = [
    "ErrorReport",
    "procrustes_dist",
    "et_metric",
    "relative_errors",
    "estimate_m2",
    "estimate_lambda",
    "misclustering_rate",
]


@dataclass(frozen=True)
class ErrorReport:
    """Relative errors are squared Frobenius ratios; dist_z is the Procrustes distance."""

    rel_err_g: float
    rel_err_theta: float
    e_t: float
    dist_z: float


def procrustes_dist(Z1, Z2):
    """min_{R in O(k)} ||Z1 - Z2 R||_F and the minimizing orthogonal R.

    R = U V' from the SVD of Z2' Z1 (reflections included).
    """
    Z1 = np.asarray(Z1, dtype=float)
    Z2 = np.asarray(Z2, dtype=float)
    if Z1.shape != Z2.shape:
        raise ValueError(f"shape mismatch: {Z1.shape} vs {Z2.shape}")
    u, _, vt = np.linalg.svd(Z2.T @ Z1)
    r = u @ vt
    dist = float(np.linalg.norm(Z1 - Z2 @ r))
    return dist, r


def et_metric(Z_t, alpha_t, beta_t, truth):
    """Alignment energy  ||Z*||_op^2 dist(Z_t, Z*)^2 + 2||da 1'||_F^2 + ||db X||_F^2.

    The alpha term equals 2n ||alpha_t - alpha*||^2 and the beta term
    (beta_t - beta*)^2 ||X||_F^2.  Kernel truths supply Z* as the top-k
    factor of G*.
    """
    Z_t = np.asarray(Z_t, dtype=float)
    z_star = truth.latent_factor(Z_t.shape[1])
    sv = np.linalg.svd(z_star, compute_uv=False)
    op2 = float(sv[0] ** 2) if sv.size else 0.0
    dist, _ = procrustes_dist(Z_t, z_star)
    n = truth.n
    d_alpha = np.asarray(alpha_t, dtype=float) - truth.alpha_star
    x_fro2 = truth.X.frob_norm() ** 2
    return float(
        op2 * dist**2
        + 2.0 * n * float(d_alpha @ d_alpha)
        + (float(beta_t) - truth.beta_star) ** 2 * x_fro2
    )


def relative_errors(params, truth, X=None):
    """Squared relative errors of Theta and Z Z' against the truth.

    Kernel truths are compared against the full G*, so the report includes
    the rank-k approximation error.
    """
    if X is None:
        X = truth.X
    theta_hat = assemble_theta(params, X)
    denom_theta = float(np.vdot(truth.theta_star, truth.theta_star))
    denom_g = float(np.vdot(truth.G_star, truth.G_star))
    if denom_theta == 0.0 or denom_g == 0.0:
        raise ValueError("truth has zero-norm Theta or G; relative errors undefined")
    d_theta = theta_hat - truth.theta_star
    g_hat = params.gram()
    d_g = g_hat - truth.G_star
    z_star = truth.latent_factor(params.k)
    dist, _ = procrustes_dist(params.Z, z_star)
    return ErrorReport(
        rel_err_g=float(np.vdot(d_g, d_g)) / denom_g,
        rel_err_theta=float(np.vdot(d_theta, d_theta)) / denom_theta,
        e_t=et_metric(params.Z, params.alpha, params.beta, truth),
        dist_z=dist,
    )


def _error_tracker(truth, ws, k, X):
    """Per-iteration error recorder reusing the fit workspace's packed Theta."""
    theta_star_p = ws.pack_symmetric(truth.theta_star)
    w = ws.packed_weights()
    denom_theta = float(w @ (theta_star_p**2))
    denom_g = float(np.vdot(truth.G_star, truth.G_star))
    if denom_theta == 0.0 or denom_g == 0.0:
        raise ValueError("truth has zero-norm Theta or G; relative errors undefined")
    g_star_p = ws.pack_symmetric(truth.G_star)
    iu = np.triu_indices(ws.n)
    z_star = truth.latent_factor(k)
    sv = np.linalg.svd(z_star, compute_uv=False)
    op2 = float(sv[0] ** 2) if sv.size else 0.0
    x_fro2 = truth.X.frob_norm() ** 2
    n = truth.n

    def record(errs, Z, alpha, beta):
        d = ws.packed_theta() - theta_star_p
        errs["rel_theta"].append(float(w @ (d * d)) / denom_theta)
        d_g = ws.G.T[iu] - g_star_p
        errs["rel_g"].append(float(w @ (d_g * d_g)) / denom_g)
        dist, _ = procrustes_dist(Z, z_star)
        d_alpha = alpha - truth.alpha_star
        errs["e_t"].append(
            float(
                op2 * dist**2
                + 2.0 * n * float(d_alpha @ d_alpha)
                + (float(beta) - truth.beta_star) ** 2 * x_fro2
            )
        )

    return record


def estimate_m2(A):
    """M2-hat = -logit(p-hat) with p-hat = sum_ij A_ij / n^2."""
    entries = _as_entries(A)
    n = entries.shape[0]
    p_hat = float(entries.sum() / (n * n))
    if p_hat <= 0.0:
        raise ValueError("estimate_m2: graph has no edges (p-hat = 0)")
    return -logit(p_hat)


def estimate_lambda(A, m2_hat=None, mode="empirical", c0=1.0):
    """Regularization level for the lifted objective.

    empirical (default): 2 sqrt(n p-hat).  theory: c0 sqrt(max{n e^{-M2},
    log n}) with M2 estimated from the graph unless supplied.
    """
    entries = _as_entries(A)
    n = entries.shape[0]
    p_hat = float(entries.sum() / (n * n))
    if mode == "empirical":
        if p_hat <= 0.0:
            raise ValueError("estimate_lambda: graph has no edges (p-hat = 0)")
        return 2.0 * math.sqrt(n * p_hat)
    if mode == "theory":
        if m2_hat is None:
            m2_hat = estimate_m2(A)
        return float(c0) * math.sqrt(max(n * math.exp(-m2_hat), math.log(n)))
    raise ValueError(f"unknown lambda mode {mode!r}")


_PERMUTATION_CAP = 8


def misclustering_rate(predicted, truth):
    """Smallest mismatch fraction over all relabelings of the predicted classes."""
    predicted = np.asarray(predicted)
    truth = np.asarray(truth)
    if predicted.shape != truth.shape or predicted.ndim != 1:
        raise ValueError("predicted and truth must be 1-d label vectors of equal length")
    n = predicted.shape[0]
    pred_classes = np.unique(predicted)
    true_classes = np.unique(truth)
    m = max(pred_classes.size, true_classes.size)
    if m > _PERMUTATION_CAP:
        raise ValueError(
            f"{m} classes exceeds the brute-force cap of {_PERMUTATION_CAP}; "
            "use a Hungarian-assignment extension for larger label sets"
        )
    pred_idx = np.searchsorted(pred_classes, predicted)
    true_idx = np.searchsorted(true_classes, truth)
    confusion = np.zeros((m, m), dtype=np.int64)
    np.add.at(confusion, (true_idx, pred_idx), 1)
    best = 0
    for perm in itertools.permutations(range(m)):
        matched = sum(confusion[perm[j], j] for j in range(m))
        if matched > best:
            best = matched
    return float(n - best) / n
