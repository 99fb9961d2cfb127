"""Fused inner-loop kernels for the projected gradient fitter.

The per-iteration work is dominated by elementwise passes over n x n
matrices.  Everything here operates on the packed upper triangle (i <= j)
and writes the symmetric residual into a rectangular buffer that BLAS
``dsymm``/``dsyrk`` consume directly, so each iteration touches each n^2
panel once instead of a dozen times.  numpy supplies the SIMD exp/log1p;
numba supplies the fused arithmetic passes (its scalar libm transcendentals
are slow, so none appear inside the jitted loops).

Semantics are identical to the plain implementations in :mod:`lsnet.model`:

    h       = sum_ij softplus(Theta_ij) - <A, Theta>
    resid   = A - sigmoid(Theta)
    rowsums = resid @ 1,  g_beta_inner = <resid, X>,  RZ = resid @ Z

and the equivalence is pinned by tests against the naive routes.
"""

from __future__ import annotations

import numpy as np
from numba import njit
from scipy.linalg.blas import dsymm, dsyrk


@njit(cache=True, fastmath={"reassoc", "contract", "arcp", "nsz"})
def _assemble_upper(G, X, has_x, beta, alpha, A, t_out, v_out, row_base):
    # Packs theta = G + beta X + a_i + a_j (upper triangle) into t_out and
    # -|theta| into v_out; returns all-pairs weighted sums of theta, |theta|
    # and A*theta (off-diagonal entries counted twice).
    n = G.shape[0]
    s_t = 0.0
    s_abs = 0.0
    s_at = 0.0
    d_t = 0.0
    d_abs = 0.0
    d_at = 0.0
    for i in range(n):
        ai = alpha[i]
        base = row_base[i] - i
        for j in range(i, n):
            t = G[i, j] + ai + alpha[j]
            if has_x:
                t += beta * X[i, j]
            idx = base + j
            t_out[idx] = t
            a = abs(t)
            v_out[idx] = -a
            s_t += t
            s_abs += a
            s_at += A[i, j] * t
        td = t_out[base + i]
        d_t += td
        d_abs += abs(td)
        d_at += A[i, i] * td
    return 2.0 * s_t - d_t, 2.0 * s_abs - d_abs, 2.0 * s_at - d_at


@njit(cache=True, fastmath={"reassoc", "contract", "arcp", "nsz"})
def _residual_upper(t, e, A, X, has_x, R, row_sums, row_base):
    # From packed theta (t) and e = exp(-|theta|), writes resid = A - sigmoid
    # into the upper triangle of R and accumulates row sums of the full
    # symmetric residual plus <resid, X> over all pairs.
    n = A.shape[0]
    gb = 0.0
    row_sums[:] = 0.0
    for i in range(n):
        base = row_base[i] - i
        rs_i = 0.0
        for j in range(i, n):
            idx = base + j
            eij = e[idx]
            num = 1.0 if t[idx] >= 0.0 else eij
            p = num / (1.0 + eij)
            r = A[i, j] - p
            R[i, j] = r
            rs_i += r
            row_sums[j] += r
            if has_x:
                gb += 2.0 * r * X[i, j]
        row_sums[i] += rs_i
        # the diagonal was counted twice above
        r_d = R[i, i]
        row_sums[i] -= r_d
        if has_x:
            gb -= r_d * X[i, i]
    return gb


class FitWorkspace:
    """Reusable buffers for one (A, X) problem instance."""

    def __init__(self, A, X_or_none):
        self.A = np.ascontiguousarray(A, dtype=float)
        n = self.A.shape[0]
        self.n = n
        self.has_x = X_or_none is not None
        self.X = (
            np.ascontiguousarray(X_or_none, dtype=float)
            if self.has_x
            else np.zeros((1, 1))
        )
        self.row_base = np.zeros(n, dtype=np.int64)
        if n > 1:
            np.cumsum(n - np.arange(n - 1), out=self.row_base[1:])
        m = n * (n + 1) // 2
        self.theta_p = np.empty(m)
        self.e_p = np.empty(m)
        self.lg_p = np.empty(m)
        self.diag_idx = self.row_base  # packed position of (i, i) is row_base[i]
        self.G = np.zeros((n, n), order="F")
        self.Rbuf = np.zeros((n, n), order="F")
        self.row_sums = np.empty(n)

    def _gram(self, Z):
        if Z.shape[1] == 0:
            self.G[:] = 0.0
            return
        # fills the fortran-lower triangle, i.e. G.T holds the C-order upper
        dsyrk(1.0, Z, c=self.G, overwrite_c=1, trans=0, lower=1)

    def _pack_theta(self, Z, alpha, beta):
        self._gram(Z)
        return _assemble_upper(
            self.G.T,
            self.X,
            self.has_x,
            beta,
            alpha,
            self.A,
            self.theta_p,
            self.e_p,
            self.row_base,
        )

    def _objective_from_packed(self, s_t, s_abs, s_at):
        # e_p currently holds -|theta|
        np.exp(self.e_p, out=self.e_p)
        np.log1p(self.e_p, out=self.lg_p)
        lg_all = 2.0 * self.lg_p.sum() - self.lg_p[self.diag_idx].sum()
        return 0.5 * (s_t + s_abs) + lg_all - s_at

    def objective(self, Z, alpha, beta):
        """Negative log-likelihood at (Z, alpha, beta).

        Leaves the packed Theta and e = exp(-|Theta|) buffers positioned for
        a subsequent `residual_grads` call at the same iterate.
        """
        s_t, s_abs, s_at = self._pack_theta(Z, alpha, beta)
        return float(self._objective_from_packed(s_t, s_abs, s_at))

    def residual_grads(self, Z):
        """(RZ, row_sums, g_beta_inner) at the iterate of the last `objective` call.

        RZ = (A - sigmoid(Theta)) Z, row_sums = (A - sigmoid(Theta)) 1 and
        g_beta_inner = <A - sigmoid(Theta), X>; the gradient-descent updates
        of the fitter are Z + 2 etaZ RZ, alpha + 2 etaA row_sums and
        beta + etaB g_beta_inner.  Callers must check the objective is
        finite first (the fastmath kernels assume finite inputs).
        """
        gb = _residual_upper(
            self.theta_p,
            self.e_p,
            self.A,
            self.X,
            self.has_x,
            self.Rbuf.T,
            self.row_sums,
            self.row_base,
        )
        # Rbuf's fortran-lower triangle now holds the symmetric residual
        rz = dsymm(1.0, self.Rbuf, np.asfortranarray(Z), side=0, lower=1)
        return rz, self.row_sums, float(gb)

    def packed_theta(self):
        """Packed upper-triangle view of Theta from the last evaluation."""
        return self.theta_p

    def packed_weights(self):
        """All-pairs multiplicities of the packed entries (2 off-diag, 1 diag)."""
        w = np.full(self.theta_p.shape, 2.0)
        w[self.diag_idx] = 1.0
        return w

    def pack_symmetric(self, M):
        """Packed upper triangle of a symmetric (n, n) matrix."""
        iu = np.triu_indices(self.n)
        return np.ascontiguousarray(M[iu])
