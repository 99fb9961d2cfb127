"""Initializers for the projected gradient fitter.

Three routes:

* ``init_lifted_pgd`` runs a few proximal gradient steps on the lifted
  (Gram-matrix) regularized objective and factors the result;
* ``init_usvt`` denoises the adjacency by singular value thresholding,
  inverts the logit and splits off the additive effects by least squares;
* ``init_random`` draws centered Gaussian latents.

All three return a centered ParameterSet ready for `fit`.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .model import (
    CovariateMatrix,
    ParameterSet,
    center_cols,
    double_center,
    logit,
    sigmoid,
)

__all__ = [
    "InitConfig",
    "psd_project",
    "top_k_factor",
    "additive_logit_lstsq",
    "init_lifted_pgd",
    "init_usvt",
    "init_random",
    "initialize",
    "gram_eigenvalues",
]

INIT_METHODS = ("usvt", "lifted_pgd", "random")


@dataclass
class InitConfig:
    """Parameters for all initializer variants; unused fields are ignored.

    ``tau`` (threshold) and ``lam`` default to the data-driven choices
    sqrt(n p-hat) and 2 sqrt(n p-hat); ``gamma`` defaults to lam / n, a
    conservative value inside the admissible range gamma <= lam / ||G*||_op.
    """

    method: str = "usvt"
    k: int = 2
    # singular value thresholding
    tau: float | None = None
    M1: float = 4.0
    # lifted proximal gradient
    lam: float | None = None
    gamma: float | None = None
    eta: float = 0.2
    T: int = 10
    projection_mode: str = "practical"
    dykstra_max_iters: int = 100
    dykstra_tol: float = 1e-10
    # random
    scale: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.method not in INIT_METHODS:
            raise ValueError(f"unknown init method {self.method!r}; expected one of {INIT_METHODS}")
        if self.k < 1:
            raise ValueError("latent dimension k must be >= 1")
        if self.T < 0:
            raise ValueError("iteration count T must be >= 0")
        if self.M1 <= 0:
            raise ValueError("M1 must be positive")
        if self.projection_mode not in ("practical", "theoretical"):
            raise ValueError(f"unknown projection mode {self.projection_mode!r}")


def psd_project(M):
    """Nearest positive semi-definite matrix in Frobenius norm (eigenvalue clipping)."""
    M = np.asarray(M, dtype=float)
    drift = np.abs(M - M.T).max() if M.size else 0.0
    if drift > 1e-8:
        warnings.warn(
            f"psd_project: input asymmetric by {drift:.3e}; symmetrizing", RuntimeWarning
        )
    sym = (M + M.T) / 2.0
    w, v = np.linalg.eigh(sym)
    if w.size and w[0] >= 0.0:
        return sym
    w = np.clip(w, 0.0, None)
    return (v * w) @ v.T


def top_k_factor(G, k):
    """U_k D_k^{1/2} from the top-k eigenpairs of G, negative eigenvalues clipped.

    Missing positive directions leave zero columns so the shape is always
    (n, k); eigenvalues at relative noise level (1e-12 of the spectral
    radius) count as missing.
    """
    G = np.asarray(G, dtype=float)
    w, v = np.linalg.eigh((G + G.T) / 2.0)
    order = np.argsort(w)[::-1][:k]
    lam = np.clip(w[order], 0.0, None)
    lam[lam <= 1e-12 * np.abs(w).max(initial=0.0)] = 0.0
    z = v[:, order] * np.sqrt(lam)
    if z.shape[1] < k:
        z = np.hstack([z, np.zeros((G.shape[0], k - z.shape[1]))])
    return z


def additive_logit_lstsq(theta, X=None):
    """(alpha, beta) minimizing ||theta - (alpha 1' + 1 alpha' + beta X)||_F^2.

    Closed form in O(n^2): the alpha block of the normal equations is
    n I + 11' whose inverse is (I - 11'/(2n)) / n; beta follows from the
    Schur complement.  With X None or absent, beta = 0.
    """
    theta = np.asarray(theta, dtype=float)
    n = theta.shape[0]
    one_sum = theta @ np.ones(n)

    def k_inv(v):
        return v / n - v.sum() / (2.0 * n * n)

    if X is None or getattr(X, "absent", False):
        return k_inv(one_sum), 0.0
    xe = X.entries if isinstance(X, CovariateMatrix) else np.asarray(X, dtype=float)
    x_one = xe @ np.ones(n)
    denom = float(np.vdot(xe, xe)) - 2.0 * float(x_one @ k_inv(x_one))
    if denom <= 1e-12 * max(float(np.vdot(xe, xe)), 1.0):
        raise ValueError(
            "covariate is indistinguishable from additive degree effects; "
            "beta is not identifiable in the least-squares split"
        )
    beta = (float(np.vdot(theta, xe)) - 2.0 * float(x_one @ k_inv(one_sum))) / denom
    alpha = k_inv(one_sum - beta * x_one)
    return alpha, float(beta)


def _project_gram(G, mode, M1, max_iters, tol):
    """Projection of the lifted iterate onto its constraint set.

    practical: onto {PSD, centered} via eigenvalue clipping of J G J (exact:
    clipping a centered symmetric matrix keeps it centered, so the composite
    is the metric projection onto the intersection).  theoretical: Dykstra
    between that set and the entrywise box |G_ij| <= M1/3.
    """
    if mode == "practical":
        return psd_project(double_center(G))
    cap = M1 / 3.0
    x = np.asarray(G, dtype=float).copy()
    p = np.zeros_like(x)
    q = np.zeros_like(x)
    for _ in range(max_iters):
        y = psd_project(double_center(x + p))
        p = x + p - y
        x_new = np.clip(y + q, -cap, cap)
        q = y + q - x_new
        if np.linalg.norm(x_new - x) < tol:
            return x_new
        x = x_new
    return x


def _lifted_pgd_gram(A, X, cfg):
    """The lifted proximal-gradient loop; returns (G, alpha, beta, lam).

    Starts from (G, alpha, beta) = 0 and iterates

        G~     = G + eta (A - sigmoid(Theta) - lam I - gamma G)
        alpha~ = alpha + eta ((A - sigmoid(Theta)) 1 / (2n) - gamma alpha)
        beta~  = beta + eta (<A - sigmoid(Theta), X> / ||X||_F^2 - gamma beta)

    followed by the Gram projection.
    """
    n = A.n
    has_x = X is not None and not X.absent
    xe = X.entries if has_x else None
    p_hat = A.edge_density()
    lam = cfg.lam if cfg.lam is not None else 2.0 * math.sqrt(n * p_hat)
    gamma = cfg.gamma if cfg.gamma is not None else lam / n
    eta = cfg.eta

    G = np.zeros((n, n))
    alpha = np.zeros(n)
    beta = 0.0
    one = np.ones(n)
    x_fro2 = float(np.vdot(xe, xe)) if has_x else 1.0
    lam_eye = lam * np.eye(n)
    sqrt_n = math.sqrt(n)
    for _ in range(cfg.T):
        theta = alpha[:, None] + alpha[None, :] + G
        if has_x:
            theta += beta * xe
        resid = A.entries - sigmoid(theta)
        g_prev_norm = np.linalg.norm(G)
        g_tilde = G + eta * (resid - lam_eye - gamma * G)
        alpha = alpha + eta * ((resid @ one) / (2.0 * n) - gamma * alpha)
        if has_x:
            beta = beta + eta * (float(np.vdot(resid, xe)) / x_fro2 - gamma * beta)
        G = _project_gram(
            g_tilde, cfg.projection_mode, cfg.M1, cfg.dykstra_max_iters, cfg.dykstra_tol
        )
        # contraction bound every iterate must satisfy (fp slack only):
        # ||G_new|| <= ||G~|| <= (1 - eta*gamma) ||G_prev|| + eta (||resid|| + lam sqrt(n))
        g_tilde_norm = np.linalg.norm(g_tilde)
        bound = (1.0 - eta * gamma) * g_prev_norm + eta * (np.linalg.norm(resid) + lam * sqrt_n)
        assert np.linalg.norm(G) <= g_tilde_norm * (1.0 + 1e-9) + 1e-12
        assert g_tilde_norm <= bound * (1.0 + 1e-9) + 1e-12
    return G, alpha, beta, float(lam)


def init_lifted_pgd(A, X, cfg):
    """Lifted-space proximal PGD followed by a rank-k factorization of G^T.

    The factor is re-centered: eigenvectors attached to noise-level
    eigenvalues of the centered G need not be orthogonal to the all-ones
    vector, and the fitter's contract wants J Z = Z.
    """
    G, alpha, beta, _ = _lifted_pgd_gram(A, X, cfg)
    return ParameterSet(center_cols(top_k_factor(G, cfg.k)), alpha, beta)


def init_usvt(A, X, cfg):
    """Initialization by universal singular value thresholding.

    Keeps the singular components of A above tau (for symmetric A the SVD
    follows from the eigendecomposition: singular values |w_i| with left
    vectors sign(w_i) v_i), clamps the entries into [exp(-M1)/2, 1/2],
    inverts the logit of the symmetrized estimate, splits off (alpha, beta)
    by least squares and factors the centered PSD residual.
    """
    n = A.n
    p_hat = A.edge_density()
    tau = cfg.tau if cfg.tau is not None else math.sqrt(n * p_hat)
    if tau <= 0:
        raise ValueError("threshold tau must be positive")
    w, v = np.linalg.eigh(A.entries)
    keep = np.abs(w) >= tau
    p_tilde = (v[:, keep] * w[keep]) @ v[:, keep].T if keep.any() else np.zeros((n, n))
    p_clamped = np.clip(p_tilde, 0.5 * math.exp(-cfg.M1), 0.5)
    theta_hat = logit((p_clamped + p_clamped.T) / 2.0)
    has_x = X is not None and not X.absent
    alpha0, beta0 = additive_logit_lstsq(theta_hat, X if has_x else None)
    resid = theta_hat - alpha0[:, None] - alpha0[None, :]
    if has_x:
        resid -= beta0 * X.entries
    g_hat = psd_project(double_center(resid))
    return ParameterSet(center_cols(top_k_factor(g_hat, cfg.k)), alpha0, beta0)


def init_random(n, k, scale=1.0, seed=0):
    """Centered i.i.d. N(0, scale^2) latents; alpha = 0, beta = 0."""
    rng = np.random.default_rng(int(seed))
    z = scale * rng.standard_normal((n, k))
    return ParameterSet(center_cols(z), np.zeros(n), 0.0)


def initialize(A, X, cfg):
    """Dispatch on cfg.method."""
    if cfg.method == "usvt":
        return init_usvt(A, X, cfg)
    if cfg.method == "lifted_pgd":
        return init_lifted_pgd(A, X, cfg)
    return init_random(A.n, cfg.k, cfg.scale, cfg.seed)


def gram_eigenvalues(A, X, cfg):
    """Spectrum of the lifted iterate G^T, for the latent-dimension diagnostic.

    Returns (eigenvalues sorted descending, lam, suggested_k) where
    suggested_k counts the eigenvalues exceeding the regularization level
    used in the run.
    """
    G, _, _, lam = _lifted_pgd_gram(A, X, cfg)
    eigvals = np.sort(np.linalg.eigvalsh(G))[::-1]
    return eigvals, lam, int((eigvals > lam).sum())
