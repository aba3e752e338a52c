"""Dense linear algebra shared by every other module.

One symmetric eigendecomposition of the Gram matrix S serves the
least-squares solve, tightening and the conditioning diagnostics.
"""
import logging

import numpy as np
from scipy import linalg

from wavessm.errors import NoConvergence, NotPSD, RankDeficient
from wavessm.models import SpectrumReport, as_matrix

log = logging.getLogger(__name__)

RANK_TOL = 1e-12
SYM_TOL = 1e-10
POWER_TOL = 1e-10
POWER_MAX_ITER = 10_000


def _check_symmetric(S):
    scale = max(1.0, float(np.max(np.abs(S)))) if S.size else 1.0
    if np.max(np.abs(S - S.T), initial=0.0) > SYM_TOL * scale:
        raise ValueError("matrix is not symmetric within 1e-10")


def _eigh(S):
    S = as_matrix(S, "S")
    _check_symmetric(S)
    return linalg.eigh(S)


def _require_full_rank(values):
    lam_min, lam_max = float(values[0]), float(values[-1])
    if lam_max <= 0 or lam_min <= RANK_TOL * lam_max:
        raise RankDeficient(lam_min, lam_max)


def spd_inverse(S):
    """Inverse of a symmetric positive definite S through its eigenpairs."""
    values, vectors = _eigh(S)
    _require_full_rank(values)
    inv = (vectors / values) @ vectors.T
    return (inv + inv.T) / 2


def solve_row_lstsq(Y, F, weights=None):
    """Return X minimizing ||Y - X F||, i.e. Y W F^T (F W F^T)^-1.

    W = diag(weights) when given, else the identity.
    """
    Y = as_matrix(Y, "Y")
    F = as_matrix(F, "F")
    if Y.shape[1] != F.shape[1]:
        raise ValueError(f"Y {Y.shape} and F {F.shape} have different widths")
    FW = F if weights is None else F * np.asarray(weights, dtype=np.float64)
    S = FW @ F.T
    return (Y @ FW.T) @ spd_inverse((S + S.T) / 2)


def psd_inverse_sqrt(S):
    values, vectors = _eigh(S)
    lam_max = float(values[-1])
    if values[0] < -SYM_TOL * max(lam_max, 0.0):
        raise NotPSD(float(values[0]))
    _require_full_rank(values)
    M = (vectors / np.sqrt(values)) @ vectors.T
    return (M + M.T) / 2


def spectrum(S):
    S = as_matrix(S, "S")
    _check_symmetric(S)
    values = linalg.eigvalsh(S)
    lam_min, lam_max = float(values[0]), float(values[-1])
    kappa = lam_max / lam_min if lam_min > 0 else float("inf")
    return SpectrumReport(lam_min, lam_max, kappa)


def spectral_norm(M, tol=POWER_TOL, max_iter=POWER_MAX_ITER):
    """Largest singular value of M by block power iteration on M^T M.

    A small block with a Rayleigh-Ritz step keeps convergence fast when
    the leading singular values are clustered.
    """
    M = as_matrix(M, "M")
    n = M.shape[1]
    if M.size == 0 or not np.any(M):
        return 0.0
    gram = M.T @ M
    block = min(n, 8)
    V = np.random.default_rng(0).standard_normal((n, block))
    V, _ = np.linalg.qr(V)
    estimate = 0.0
    for step in range(1, max_iter + 1):
        W = gram @ V
        V, _ = np.linalg.qr(W)
        ritz = linalg.eigvalsh(V.T @ gram @ V)
        current = float(np.sqrt(max(ritz[-1], 0.0)))
        if abs(current - estimate) <= tol * max(current, 1e-300):
            log.debug("spectral norm %.6g after %d steps", current, step)
            return current
        estimate = current
    raise NoConvergence(f"power iteration did not converge in {max_iter} steps")


def _fix_sign(vectors):
    for j in range(vectors.shape[1]):
        col = vectors[:, j]
        mags = np.abs(col)
        # first entry within round-off of the largest magnitude decides the sign
        pivot = int(np.argmax(mags >= mags.max() * (1 - 1e-12)))
        if col[pivot] < 0:
            vectors[:, j] = -col
    return vectors


def sym_tridiag_eig(diag, offdiag, k):
    """The k largest eigenpairs of a symmetric tridiagonal matrix, descending.

    Eigenvectors are returned as columns.
    """
    d = np.asarray(diag, dtype=np.float64)
    e = np.asarray(offdiag, dtype=np.float64)
    m = d.size
    if e.size != m - 1:
        raise ValueError("offdiag must have one entry fewer than diag")
    if not 1 <= k <= m:
        raise ValueError(f"k must lie in [1, {m}]")
    if m == 1:
        return d.copy(), np.ones((1, 1))
    values, vectors = linalg.eigh_tridiagonal(d, e, select="i", select_range=(m - k, m - 1))
    order = np.argsort(values, kind="stable")[::-1]
    values = values[order]
    vectors = vectors[:, order]
    vectors /= np.linalg.norm(vectors, axis=0)
    return values, _fix_sign(vectors)
