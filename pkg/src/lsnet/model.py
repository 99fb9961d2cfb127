"""Model core: parameter containers, the logit-scale matrix, likelihood and gradients.

The undirected binary network A on n nodes is modeled through a symmetric
logit-scale matrix

    Theta = alpha 1' + 1 alpha' + beta * X + Z Z'

with per-node degree parameters alpha, an optional symmetric pairwise
covariate X with coefficient beta, and latent vectors stacked as rows of Z.
Edges are independent Bernoulli(sigmoid(Theta_ij)) for i < j.

Theta matrices are plain (n, n) float arrays; they are symmetric whenever the
inputs are.  The fitting objective is the all-pairs negative log-likelihood
(diagonal included; A has zero diagonal so diagonal terms only add
log(1 + exp(Theta_ii)) and keep every gradient in closed matrix form).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "AdjacencyMatrix",
    "CovariateMatrix",
    "ParameterSet",
    "sigmoid",
    "logit",
    "softplus",
    "assemble_theta",
    "neg_log_likelihood",
    "gradients",
    "center_cols",
    "double_center",
]


def _as_entries(m):
    """Accept a wrapped matrix type or a bare array."""
    return np.asarray(getattr(m, "entries", m), dtype=float)


def _check_square_symmetric(entries, name, tol=0.0):
    if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {entries.shape}")
    gap = np.abs(entries - entries.T).max() if entries.size else 0.0
    if gap > tol:
        raise ValueError(f"{name} must be symmetric; max |M_ij - M_ji| = {gap:.3e}")


@dataclass(frozen=True, eq=False)
class AdjacencyMatrix:
    """Symmetric binary adjacency matrix with zero diagonal."""

    entries: np.ndarray

    def __post_init__(self):
        entries = np.ascontiguousarray(np.asarray(self.entries, dtype=float))
        _check_square_symmetric(entries, "adjacency")
        if np.any(np.diag(entries) != 0.0):
            raise ValueError("adjacency must have a zero diagonal (no self-loops)")
        if not np.isin(entries, (0.0, 1.0)).all():
            raise ValueError("adjacency entries must be 0 or 1")
        object.__setattr__(self, "entries", entries)

    @property
    def n(self):
        return self.entries.shape[0]

    def edge_density(self):
        """sum_ij A_ij / n^2 (the p-hat used by tuning heuristics)."""
        n = self.n
        return float(self.entries.sum() / (n * n))


@dataclass(frozen=True, eq=False)
class CovariateMatrix:
    """Symmetric real pairwise covariate with zero diagonal.

    ``absent`` marks X = 0; fitters skip every beta update in that case.
    """

    entries: np.ndarray
    absent: bool = False

    def __post_init__(self):
        entries = np.ascontiguousarray(np.asarray(self.entries, dtype=float))
        _check_square_symmetric(entries, "covariate", tol=1e-9)
        diag_max = np.abs(np.diag(entries)).max() if entries.size else 0.0
        if diag_max > 1e-12:
            raise ValueError(f"covariate diagonal must be zero; max |X_ii| = {diag_max:.3e}")
        if self.absent and np.any(entries != 0.0):
            raise ValueError("absent covariate must have all-zero entries")
        object.__setattr__(self, "entries", entries)

    @classmethod
    def none(cls, n):
        """The X = 0 covariate on n nodes."""
        return cls(np.zeros((n, n)), absent=True)

    @property
    def n(self):
        return self.entries.shape[0]

    def frob_norm(self):
        return float(np.linalg.norm(self.entries))

    def max_abs(self):
        return float(np.abs(self.entries).max()) if self.entries.size else 0.0


@dataclass(frozen=True, eq=False)
class ParameterSet:
    """Model state (Z, alpha, beta); rows of Z are the latent vectors."""

    Z: np.ndarray
    alpha: np.ndarray
    beta: float = 0.0

    def __post_init__(self):
        Z = np.ascontiguousarray(np.asarray(self.Z, dtype=float))
        alpha = np.ascontiguousarray(np.asarray(self.alpha, dtype=float))
        if Z.ndim != 2:
            raise ValueError(f"Z must be 2-d (n, k), got shape {Z.shape}")
        if alpha.ndim != 1 or alpha.shape[0] != Z.shape[0]:
            raise ValueError(
                f"alpha length {alpha.shape} does not match Z rows {Z.shape[0]}"
            )
        object.__setattr__(self, "Z", Z)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", float(self.beta))

    @property
    def n(self):
        return self.Z.shape[0]

    @property
    def k(self):
        return self.Z.shape[1]

    def gram(self):
        return self.Z @ self.Z.T


def sigmoid(x):
    """Stable sigmoid 1 / (1 + exp(-x)); elementwise on arrays."""
    arr = np.asarray(x, dtype=float)
    e = np.exp(-np.abs(arr))
    out = np.where(arr >= 0.0, 1.0 / (1.0 + e), e / (1.0 + e))
    return float(out) if out.ndim == 0 else out


def logit(p):
    """Inverse sigmoid; raises on arguments outside the open interval (0, 1)."""
    arr = np.asarray(p, dtype=float)
    if np.any(arr <= 0.0) or np.any(arr >= 1.0):
        bad = arr[(arr <= 0.0) | (arr >= 1.0)]
        raise ValueError(f"logit is defined on (0, 1) only; got {bad.flat[0]!r}")
    out = np.log(arr) - np.log1p(-arr)
    return float(out) if out.ndim == 0 else out


def softplus(x):
    """log(1 + exp(x)) without overflow; equals -log(1 - sigmoid(x))."""
    arr = np.asarray(x, dtype=float)
    out = np.maximum(arr, 0.0) + np.log1p(np.exp(-np.abs(arr)))
    return float(out) if out.ndim == 0 else out


def center_cols(Z):
    """Column centering J Z with J = I - 11'/n (projection onto JZ = Z)."""
    Z = np.asarray(Z, dtype=float)
    return Z - Z.mean(axis=0, keepdims=True)


def double_center(M):
    """J M J computed in O(n^2) (subtract row/column means, add grand mean)."""
    M = np.asarray(M, dtype=float)
    row = M.mean(axis=1, keepdims=True)
    col = M.mean(axis=0, keepdims=True)
    return M - row - col + M.mean()


def assemble_theta(params, X):
    """Theta = alpha 1' + 1 alpha' + beta X + Z Z', diagonal included."""
    Xe = _as_entries(X)
    if Xe.shape[0] != params.n:
        raise ValueError(f"covariate size {Xe.shape[0]} != parameter size {params.n}")
    alpha = params.alpha
    theta = params.Z @ params.Z.T
    theta += alpha[:, None]
    theta += alpha[None, :]
    if not getattr(X, "absent", False):
        theta += params.beta * Xe
    return theta


def neg_log_likelihood(A, theta):
    """All-pairs negative log-likelihood  -sum_ij [A_ij Theta_ij + log(1 - sigmoid(Theta_ij))].

    Computed as sum_ij softplus(Theta_ij) - <A, Theta>; finite for all finite
    Theta.
    """
    Ae = _as_entries(A)
    theta = np.asarray(theta, dtype=float)
    if Ae.shape != theta.shape:
        raise ValueError(f"shape mismatch: A {Ae.shape} vs Theta {theta.shape}")
    return float(softplus(theta).sum() - np.vdot(Ae, theta))


def gradients(A, X, params):
    """Gradients of ``neg_log_likelihood(A, assemble_theta(params, X))``.

    Returns (gZ, gAlpha, gBeta) with

        gZ     = -2 (A - sigmoid(Theta)) Z
        gAlpha = -2 (A - sigmoid(Theta)) 1
        gBeta  = -<A - sigmoid(Theta), X>     (reported as 0 when X is absent)
    """
    Ae = _as_entries(A)
    theta = assemble_theta(params, X)
    resid = Ae - sigmoid(theta)
    g_z = -2.0 * resid @ params.Z
    g_alpha = -2.0 * resid.sum(axis=1)
    if getattr(X, "absent", False):
        g_beta = 0.0
    else:
        g_beta = -float(np.vdot(resid, _as_entries(X)))
    return g_z, g_alpha, g_beta
