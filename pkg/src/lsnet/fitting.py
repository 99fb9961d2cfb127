"""Projected gradient descent fitter.

Each iteration takes a gradient step on (Z, alpha, beta) and projects:

    Z~     = Z + 2 etaZ (A - sigmoid(Theta)) Z
    alpha~ = alpha + 2 etaA (A - sigmoid(Theta)) 1
    beta~  = beta + etaB <A - sigmoid(Theta), X>

with constant step sizes etaZ = eta / ||Z0||_op^2, etaA = eta / (2n) and
etaB = eta / (2 ||X||_F^2).  The practical projection only re-centers the
columns of Z; the theoretical projection additionally enforces the bound
constraints (squared row norms of Z, |alpha_i| and |beta| max|X| all capped
at M1/3, or M1/2 when X is absent) with Dykstra's alternating scheme for the
Z set.  When X is absent the beta update is skipped entirely.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import FitWorkspace
from .model import CovariateMatrix, ParameterSet, center_cols

__all__ = [
    "FitConfig",
    "FitTrace",
    "FitDivergedError",
    "step_sizes",
    "project_z",
    "project_alpha",
    "project_beta",
    "fit",
]


class FitDivergedError(RuntimeError):
    """Raised when the objective stops being finite."""

    def __init__(self, iteration, value):
        self.iteration = iteration
        super().__init__(
            f"non-finite objective ({value!r}) at iteration {iteration}; "
            "reduce the step size eta"
        )


@dataclass
class FitConfig:
    """Configuration for `fit`.

    ``M1`` is only consulted in theoretical projection mode.  The optional
    plateau stop (off by default, keeping runs at exactly T iterations) halts
    once the relative objective change stays below ``plateau_tol`` for
    ``plateau_window`` consecutive iterations.
    """

    k: int = 2
    eta: float = 0.2
    T: int = 500
    projection_mode: str = "practical"
    M1: float | None = None
    dykstra_max_iters: int = 100
    dykstra_tol: float = 1e-10
    plateau_stop: bool = False
    plateau_tol: float = 1e-9
    plateau_window: int = 10

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("latent dimension k must be >= 1")
        if self.eta < 0:
            raise ValueError("step-size constant eta must be >= 0")
        if self.T < 0:
            raise ValueError("iteration count T must be >= 0")
        if self.projection_mode not in ("practical", "theoretical"):
            raise ValueError(f"unknown projection mode {self.projection_mode!r}")
        if self.projection_mode == "theoretical":
            if self.M1 is None or self.M1 <= 0:
                raise ValueError("theoretical projection mode needs M1 > 0")


@dataclass(eq=False)
class FitTrace:
    """Per-iteration history; ``objective`` has one entry per visited iterate."""

    objective: np.ndarray
    iterations: int
    e_t: np.ndarray | None = None
    rel_err_theta: np.ndarray | None = None
    rel_err_g: np.ndarray | None = None


def step_sizes(Z0, n, X, eta):
    """(etaZ, etaAlpha, etaBeta) from the step-size rule; etaBeta is 0 without X."""
    if eta == 0.0:
        return 0.0, 0.0, 0.0
    op = np.linalg.svd(np.asarray(Z0, dtype=float), compute_uv=False)
    op = float(op[0]) if op.size else 0.0
    if op == 0.0:
        raise ValueError("degenerate initialization: Z0 = 0 gives no Z step size")
    eta_z = eta / op**2
    eta_alpha = eta / (2.0 * n)
    if X is None or getattr(X, "absent", False):
        eta_beta = 0.0
    else:
        fro = X.frob_norm() if isinstance(X, CovariateMatrix) else float(np.linalg.norm(X))
        if fro == 0.0:
            eta_beta = 0.0
        else:
            eta_beta = eta / (2.0 * fro**2)
    return eta_z, eta_alpha, eta_beta


def _cap_rows(Z, cap_sq):
    """Scale rows so every squared row norm is at most cap_sq."""
    sq = np.einsum("ij,ij->i", Z, Z)
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(sq > cap_sq, np.sqrt(cap_sq / np.where(sq > 0, sq, 1.0)), 1.0)
    return Z * scale[:, None]


def project_z(Z, mode="practical", M1=None, divisor=3.0, max_iters=100, tol=1e-10):
    """Projection of Z onto the iterate constraint set.

    practical: column centering only.  theoretical: Dykstra's alternating
    projections between the centering subspace and the row-norm ball
    {max_i ||Z_i.||^2 <= M1/divisor}, run until the per-cycle Frobenius
    change drops below ``tol`` or ``max_iters`` cycles.
    """
    Z = np.asarray(Z, dtype=float)
    if mode == "practical":
        return center_cols(Z)
    if M1 is None or M1 <= 0:
        raise ValueError("theoretical projection needs M1 > 0")
    cap_sq = M1 / divisor
    x = Z.copy()
    p = np.zeros_like(Z)
    q = np.zeros_like(Z)
    for _ in range(max_iters):
        y = center_cols(x + p)
        p = x + p - y
        x_new = _cap_rows(y + q, cap_sq)
        q = y + q - x_new
        if np.linalg.norm(x_new - x) < tol:
            return x_new
        x = x_new
    return x


def project_alpha(alpha, M1, divisor=3.0):
    """Clamp every |alpha_i| at M1/divisor."""
    cap = M1 / divisor
    return np.clip(np.asarray(alpha, dtype=float), -cap, cap)


def project_beta(beta, x_max_abs, M1, divisor=3.0):
    """Clamp beta so |beta| * max|X_ij| stays at most M1/divisor."""
    if x_max_abs == 0.0:
        return float(beta)
    cap = M1 / (divisor * x_max_abs)
    return float(np.clip(beta, -cap, cap))


def fit(A, X, init, cfg, truth=None, track_errors=True):
    """Run the projected gradient fitter for exactly cfg.T iterations.

    Returns (ParameterSet, FitTrace).  The trace always carries the
    objective at every visited iterate (T + 1 values without early stopping).
    When ``truth`` is supplied and ``track_errors`` is set, it additionally
    records the per-iterate alignment energy e_t and the relative errors of
    Theta and Z Z' against the truth.
    """
    if X is None:
        X = CovariateMatrix.none(A.n)
    if A.n != X.n or A.n != init.n:
        raise ValueError("A, X and the initializer disagree on the node count")
    if init.k != cfg.k:
        raise ValueError(f"initializer has k={init.k} but config asks for k={cfg.k}")

    has_x = not X.absent
    divisor = 3.0 if has_x else 2.0
    theoretical = cfg.projection_mode == "theoretical"

    # projections apply after gradient steps only; the initializer is taken
    # as-is (all shipped initializers produce centered Z)
    Z = init.Z.copy()
    alpha = init.alpha.copy()
    beta = float(init.beta)

    ws = FitWorkspace(A.entries, X.entries if has_x else None)
    track = truth is not None and track_errors
    if track:
        from .metrics import _error_tracker

        record_errors = _error_tracker(truth, ws, cfg.k, X)

    objective = np.empty(cfg.T + 1)
    errs = {"e_t": [], "rel_theta": [], "rel_g": []} if track else None

    if cfg.T > 0:
        eta_z, eta_alpha, eta_beta = step_sizes(init.Z, A.n, X if has_x else None, cfg.eta)
    else:
        eta_z = eta_alpha = eta_beta = 0.0

    steps_done = 0
    x_max = X.max_abs() if has_x else 0.0
    for t in range(cfg.T):
        h = ws.objective(Z, alpha, beta)
        if not np.isfinite(h):
            raise FitDivergedError(t, h)
        rz, row_sums, gb = ws.residual_grads(Z)
        objective[t] = h
        if track:
            record_errors(errs, Z, alpha, beta)
        Z = project_z(
            Z + 2.0 * eta_z * rz,
            cfg.projection_mode,
            cfg.M1,
            divisor,
            cfg.dykstra_max_iters,
            cfg.dykstra_tol,
        )
        alpha = alpha + 2.0 * eta_alpha * row_sums
        if theoretical:
            alpha = project_alpha(alpha, cfg.M1, divisor)
        if has_x:
            beta = beta + eta_beta * gb
            if theoretical:
                beta = project_beta(beta, x_max, cfg.M1, divisor)
        steps_done = t + 1
        if cfg.plateau_stop and t + 1 >= cfg.plateau_window:
            lo = objective[t + 1 - cfg.plateau_window]
            if abs(objective[t] - lo) <= cfg.plateau_tol * max(abs(lo), 1.0):
                break

    h_final = ws.objective(Z, alpha, beta)
    if not np.isfinite(h_final):
        raise FitDivergedError(steps_done, h_final)
    objective[steps_done] = h_final
    if track:
        record_errors(errs, Z, alpha, beta)

    trace = FitTrace(
        objective=objective[: steps_done + 1].copy(),
        iterations=steps_done,
        e_t=np.asarray(errs["e_t"]) if track else None,
        rel_err_theta=np.asarray(errs["rel_theta"]) if track else None,
        rel_err_g=np.asarray(errs["rel_g"]) if track else None,
    )
    return ParameterSet(Z, alpha, beta), trace
