"""Synthetic network generation.

Ground-truth models follow the four-step recipe used throughout the
experiments: degree parameters -a_i / sum(a) with a_i ~ U[1, 3]; two latent
centers with U[-1, 1] coordinates; truncated-normal latent coordinates around
the centers (first half of the nodes on one center, second half on the
other); covariate X = n * Xt / ||Xt||_F with Xt_ij ~ min{|N(1, 1)|, 2}
symmetrized; beta = -sqrt(2).  The inner-product variant rescales the
centered latent matrix so ||Z Z'||_F = n; kernel variants instead set
G = J L J from the pairwise kernel matrix L.

Randomness is split into named substreams (alpha, latents, covariate) derived
from the model seed, so adjacency replicates drawn with `sample_adjacency`
differ only in their own stream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .model import (
    AdjacencyMatrix,
    CovariateMatrix,
    ParameterSet,
    center_cols,
    double_center,
    sigmoid,
)

__all__ = [
    "KernelSpec",
    "GroundTruth",
    "generate_model",
    "sample_adjacency",
    "indicator_covariate",
    "truncated_normal",
]

KERNEL_KINDS = ("inner_product", "distance", "gaussian")


@dataclass(frozen=True)
class KernelSpec:
    """Latent-link specification.

    distance kernel: l(z_i, z_j) = -||z_i - z_j||
    gaussian kernel: l(z_i, z_j) = scale * exp(-||z_i - z_j||^2 / bandwidth_sq)
    """

    kind: str = "inner_product"
    scale: float = 4.0
    bandwidth_sq: float = 9.0

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise ValueError(f"unknown kernel kind {self.kind!r}; expected one of {KERNEL_KINDS}")

    def matrix(self, z):
        """Pairwise kernel matrix L with L_ij = l(z_i, z_j)."""
        if self.kind == "inner_product":
            return z @ z.T
        if self.kind == "distance":
            return -squareform(pdist(z))
        sq = squareform(pdist(z, "sqeuclidean"))
        return self.scale * np.exp(-sq / self.bandwidth_sq)


@dataclass(frozen=True, eq=False)
class GroundTruth:
    """A fully specified generating model plus its derived matrices."""

    alpha_star: np.ndarray
    beta_star: float
    Z_star: np.ndarray | None  # latent factor (inner-product models only)
    G_star: np.ndarray
    theta_star: np.ndarray
    P: np.ndarray  # edge probabilities, zero diagonal
    X: CovariateMatrix
    kernel: KernelSpec
    latent_dim: int
    seed: int
    m1_bound: float  # smallest M1 whose constraint sets contain the truth

    @property
    def n(self):
        return self.G_star.shape[0]

    @property
    def params(self):
        """The truth as a ParameterSet (kernel truths use the top-d factor)."""
        Z = self.Z_star if self.Z_star is not None else self.latent_factor(self.latent_dim)
        return ParameterSet(Z, self.alpha_star, self.beta_star)

    def latent_factor(self, k):
        """Rank-k latent factor of G_star: U_k D_k^{1/2} from its top eigenpairs.

        For inner-product truths with matching k this is the stored Z_star.
        """
        if self.Z_star is not None and self.Z_star.shape[1] == k:
            return self.Z_star
        w, v = np.linalg.eigh(self.G_star)
        order = np.argsort(w)[::-1][:k]
        lam = np.clip(w[order], 0.0, None)
        factor = v[:, order] * np.sqrt(lam)
        if factor.shape[1] < k:
            factor = np.hstack([factor, np.zeros((self.n, k - factor.shape[1]))])
        return factor

    def community_labels(self):
        """The generating two-community split (first half vs second half)."""
        labels = np.ones(self.n, dtype=int)
        labels[: self.n // 2] = 0
        return labels


def truncated_normal(rng, size, bound=2.0):
    """Standard normal draws conditioned on [-bound, bound] (rejection)."""
    out = np.empty(size)
    filled = 0
    total = out.size
    while filled < total:
        draw = rng.standard_normal(total - filled)
        keep = draw[np.abs(draw) <= bound]
        out.flat[filled : filled + keep.size] = keep
        filled += keep.size
    return out


def _latent_coords(rng, n, d, centers, truncate_before_shift):
    mu1, mu2 = centers
    half = n // 2
    z = np.empty((n, d))
    for i in range(d):
        if truncate_before_shift:
            z[:half, i] = mu1[i] + truncated_normal(rng, half)
            z[half:, i] = mu2[i] + truncated_normal(rng, n - half)
        else:
            # truncate the already-shifted draw to [-2, 2]
            for rows, mu in ((slice(0, half), mu1[i]), (slice(half, n), mu2[i])):
                m = z[rows, i].size
                vals = np.empty(m)
                filled = 0
                while filled < m:
                    draw = mu + rng.standard_normal(m - filled)
                    keep = draw[np.abs(draw) <= 2.0]
                    vals[filled : filled + keep.size] = keep
                    filled += keep.size
                z[rows, i] = vals
    return z


def generate_model(
    n,
    d,
    kernel=KernelSpec(),
    seed=0,
    center_separation=None,
    truncate_before_shift=True,
):
    """Draw a ground-truth model on n nodes with d-dimensional latents.

    ``center_separation`` optionally rescales the two drawn centers about
    their midpoint so that ||mu1 - mu2|| equals the given value; the default
    keeps the raw U[-1, 1] draws (whose typical separation is well below the
    latent noise scale, so the two halves overlap heavily).
    ``truncate_before_shift`` matches the notation mu_i + N_[-2,2](0, 1);
    the alternative truncates after adding the center.
    """
    if n < 4:
        raise ValueError("need n >= 4")
    if d < 1:
        raise ValueError("need d >= 1")
    seed = int(seed)
    ss = np.random.SeedSequence(seed)
    rng_alpha, rng_z, rng_x = (np.random.default_rng(s) for s in ss.spawn(3))

    a = rng_alpha.uniform(1.0, 3.0, size=n)
    alpha_star = -a / a.sum()

    mu1 = rng_z.uniform(-1.0, 1.0, size=d)
    mu2 = rng_z.uniform(-1.0, 1.0, size=d)
    if center_separation is not None:
        mid = (mu1 + mu2) / 2.0
        delta = mu2 - mu1
        nrm = np.linalg.norm(delta)
        if nrm == 0.0:
            delta = np.zeros(d)
            delta[0] = 1.0
            nrm = 1.0
        delta = delta / nrm * float(center_separation)
        mu1 = mid - delta / 2.0
        mu2 = mid + delta / 2.0
    z = _latent_coords(rng_z, n, d, (mu1, mu2), truncate_before_shift)

    beta_star = -math.sqrt(2.0)
    xt = np.minimum(np.abs(rng_x.normal(1.0, 1.0, size=(n, n))), 2.0)
    xt = np.triu(xt, 1)
    xt = xt + xt.T
    X = CovariateMatrix(n * xt / np.linalg.norm(xt))

    if kernel.kind == "inner_product":
        z_star = center_cols(z)
        g = z_star @ z_star.T
        z_star = z_star * math.sqrt(n / np.linalg.norm(g))
        g_star = z_star @ z_star.T
    else:
        z_star = None
        g_star = double_center(kernel.matrix(z))

    theta_star = alpha_star[:, None] + alpha_star[None, :] + beta_star * X.entries + g_star
    p = sigmoid(theta_star)
    np.fill_diagonal(p, 0.0)

    if z_star is not None:
        latent_cap = float(np.max(np.einsum("ij,ij->i", z_star, z_star)))
    else:
        latent_cap = float(np.diag(g_star).max())
    m1_bound = 3.0 * max(
        latent_cap,
        float(np.abs(alpha_star).max()),
        abs(beta_star) * X.max_abs(),
    )

    return GroundTruth(
        alpha_star=alpha_star,
        beta_star=beta_star,
        Z_star=z_star,
        G_star=g_star,
        theta_star=theta_star,
        P=p,
        X=X,
        kernel=kernel,
        latent_dim=d,
        seed=seed,
        m1_bound=m1_bound,
    )


def sample_adjacency(truth, seed=0):
    """One adjacency draw: A_ij ~ Bernoulli(P_ij) independently for i < j."""
    rng = np.random.default_rng(int(seed))
    p = truth.P if isinstance(truth, GroundTruth) else np.asarray(truth, dtype=float)
    n = p.shape[0]
    u = rng.random((n, n))
    upper = (np.triu(u, 1) < np.triu(p, 1)).astype(float)
    return AdjacencyMatrix(upper + upper.T)


def indicator_covariate(labels):
    """X_ij = 1 iff labels match (i != j); zero diagonal."""
    labels = np.asarray(labels)
    n = labels.shape[0]
    if n < 2:
        raise ValueError("need at least 2 labels")
    x = (labels[:, None] == labels[None, :]).astype(float)
    np.fill_diagonal(x, 0.0)
    return CovariateMatrix(x)
