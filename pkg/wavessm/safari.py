"""Continuous-time (A, B) from a sampled frame.

A is the positive matrix of h' = -(1/t) A h + (1/t) B u (scaled) or
h' = -(1/theta) A h + (1/theta) B u (translated); the minus sign lives in
the dynamics.
"""
import logging

import numpy as np

from wavessm.errors import BoundViolated
from wavessm.frames import frame_id, frame_operator
from wavessm.models import DualFrame, Measure, SsmPair
from wavessm.numerics import solve_row_lstsq, spd_inverse, spectral_norm, spectrum

log = logging.getLogger(__name__)

BOUND_SLACK = 1e-9
NUMERIC_DERIVATIVE_FAMILIES = ("db6", "dpss")


def row_derivative(frame):
    """Time derivative of every row: analytic if attached, else 2nd-order differences."""
    if frame.derivative is not None:
        return np.array(frame.derivative)
    if frame.L < 3:
        raise ValueError("numeric derivative needs L >= 3")
    return np.gradient(frame.F, frame.grid.dt, axis=1, edge_order=2)


def dual_frame(frame, weighted=False):
    """S^{-1} F with S = frame_operator(frame), or the L2(0,1) dual (F W F^T)^{-1} F when weighted."""
    S = frame_operator(frame)
    if weighted:
        S = S * frame.grid.dt
    return DualFrame(F_dual=spd_inverse(S) @ frame.F, weighted=weighted)


def project_derivative(Fdot, frame):
    """X = <Fdot, F> S^{-1} under the grid quadrature, S = frame_operator(frame).

    Checked against ||<Fdot, F>||_2 / lambda_min(S).
    """
    F = frame.F
    w = frame.grid.weights / frame.grid.dt
    X = solve_row_lstsq(Fdot, F, weights=w)
    lam_min = spectrum(frame_operator(frame)).lambda_min
    bound = spectral_norm((np.asarray(Fdot) * w) @ F.T) / lam_min * (1 + BOUND_SLACK)
    norm = spectral_norm(X)
    if norm > bound:
        raise BoundViolated(norm, bound)
    log.debug("projection norm %.6g within bound %.6g", norm, bound)
    return X


def _integrate_by_parts(frame, X, boundary):
    """Replace the symmetric part of X S by its integration-by-parts value.

    The skew part of <Fdot, F> is kept and the symmetric part becomes the
    exact boundary term. The derived A then has Re eig >= 0.
    """
    S = frame_operator(frame)
    M = X @ S
    M = (M - M.T) / 2 + boundary
    return M @ spd_inverse(S)


def _warn_relaxed(frame):
    if frame.derivative is None and frame.family in NUMERIC_DERIVATIVE_FAMILIES:
        log.warning(
            "%s atoms have no closed-form derivative; only the projection bound is enforced",
            frame.family,
        )


def derive_scaled(frame):
    _warn_relaxed(frame)
    Fdot = row_derivative(frame)
    upsilon = frame.grid.t * Fdot
    end = frame.F[:, -1]
    # <t phi', psi> + <phi, t psi'> = phi(1) psi(1) - <phi, psi>
    boundary = (np.outer(end, end) / frame.grid.dt - frame_operator(frame)) / 2
    X = _integrate_by_parts(frame, project_derivative(upsilon, frame), boundary)
    A = np.eye(frame.N) + X
    return SsmPair(A=A, B=end, measure=Measure.scaled(), source_frame_id=frame_id(frame))


def derive_translated(frame, theta=1.0):
    _warn_relaxed(frame)
    start, end = frame.F[:, 0], frame.F[:, -1]
    # <phi', psi> + <phi, psi'> = phi(1) psi(1) - phi(0) psi(0)
    boundary = (np.outer(end, end) - np.outer(start, start)) / (2 * frame.grid.dt)
    X = _integrate_by_parts(frame, project_derivative(row_derivative(frame), frame), boundary)
    dual = dual_frame(frame, weighted=True)
    # zero-time boundary operator: atoms at t=0 against the L2 dual at t=0
    Q = np.outer(start, dual.F_dual[:, 0])
    return SsmPair(
        A=X + Q,
        B=end,
        measure=Measure.translated(theta),
        source_frame_id=frame_id(frame),
    )


def derive(frame, measure):
    if measure.kind == "scaled":
        return derive_scaled(frame)
    return derive_translated(frame, measure.theta)


def legs_oracle(N):
    """Closed-form LegS pair in the positive-A convention."""
    if N < 1:
        raise ValueError("N must be >= 1")
    q = np.sqrt(2 * np.arange(N) + 1.0)
    A = np.tril(np.outer(q, q), -1) + np.diag(np.arange(1, N + 1, dtype=np.float64))
    return SsmPair(A=A, B=q, measure=Measure.scaled(), source_frame_id="legs")
