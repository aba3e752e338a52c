"""Discrete recurrences built from a continuous (A, B) pair."""
import logging

import numpy as np
from scipy import linalg

from wavessm.errors import Overflow, Singular
from wavessm.models import DiscreteSsm, JacobianMatrix, KernelSeries
from wavessm.safari import dual_frame

log = logging.getLogger(__name__)

DELTA_RANGE = (1e-3, 1e-1)
RESOLVENT_TOL = 1e-12
STATE_LIMIT = 1e12
LOCALITY_FRACTION = 0.9


def sample_delta(seed=0):
    """Log-uniform step size over DELTA_RANGE."""
    rng = np.random.default_rng(seed)
    lo, hi = np.log(DELTA_RANGE[0]), np.log(DELTA_RANGE[1])
    return float(np.exp(rng.uniform(lo, hi)))


def _bilinear(A, B, delta):
    n = A.shape[0]
    I = np.eye(n)
    lu, piv = linalg.lu_factor(I + delta / 2 * A, check_finite=False)
    pivots = np.abs(np.diag(lu))
    if pivots.min() <= RESOLVENT_TOL * max(pivots.max(), 1.0):
        raise Singular(f"I + delta/2 A is singular at delta={delta:g}")
    Abar = linalg.lu_solve((lu, piv), I - delta / 2 * A)
    Bbar = linalg.lu_solve((lu, piv), delta * B)
    return Abar, Bbar


def _continuous(pair):
    if pair.measure.kind == "translated":
        return pair.A / pair.measure.theta, pair.B / pair.measure.theta
    return np.asarray(pair.A), np.asarray(pair.B)


def bilinear_discretize(pair, delta=None, mode="lti", seed=0):
    """Bilinear map of (A, B); the translated measure contributes its 1/theta.

    In scaled_adaptive mode the stored matrices are those of the first step;
    run() recomputes them with delta_k = 1/(k+1).
    """
    if mode == "scaled_adaptive":
        delta = 1.0
    elif delta is None:
        delta = sample_delta(seed)
        log.debug("sampled delta=%.6g from seed %d", delta, seed)
    if not delta > 0:
        raise ValueError("delta must be positive")
    A, B = _continuous(pair)
    Abar, Bbar = _bilinear(A, B, delta)
    return DiscreteSsm(Abar=Abar, Bbar=Bbar, delta=float(delta), mode=mode, pair=pair)


def _steps(ssm, T):
    if ssm.mode == "lti":
        for _ in range(T):
            yield ssm.Abar, ssm.Bbar
        return
    A, B = _continuous(ssm.pair)
    for k in range(T):
        yield _bilinear(A, B, 1.0 / (k + 1))


def run(ssm, u, h0=None):
    """Iterate h_{k+1} = Abar h_k + Bbar u_k; returns (states, h_T).

    states[k] is the state after consuming u[k].
    """
    u = np.asarray(u, dtype=np.float64).reshape(-1)
    h = np.zeros(ssm.N) if h0 is None else np.array(h0, dtype=np.float64)
    states = np.empty((u.size, ssm.N))
    for k, (Abar, Bbar) in enumerate(_steps(ssm, u.size)):
        h = Abar @ h + Bbar * u[k]
        if not np.all(np.isfinite(h)) or np.max(np.abs(h)) > STATE_LIMIT:
            raise Overflow(k)
        states[k] = h
    return states, h.copy()


def check_bounded(rows):
    """Raise Overflow at the first row with a non-finite entry or one past STATE_LIMIT."""
    rows = np.asarray(rows)
    bad = ~np.all(np.isfinite(rows) & (np.abs(rows) <= STATE_LIMIT), axis=1)
    if bad.any():
        raise Overflow(int(np.argmax(bad)))
    return rows


def kernel(ssm, T, C=None):
    """K[l] = C Abar^l Bbar by repeated matrix-vector products."""
    if ssm.mode != "lti":
        raise ValueError("a time-varying recurrence has no single convolution kernel")
    if T < 1:
        raise ValueError("T must be >= 1")
    C = np.eye(ssm.N) if C is None else np.atleast_2d(np.asarray(C, dtype=np.float64))
    K = np.empty((T, C.shape[0]))
    v = np.array(ssm.Bbar)
    for l in range(T):
        K[l] = C @ v
        v = ssm.Abar @ v
    return KernelSeries(K=K)


def convolve_kernel(K, u):
    """Causal convolution y[t] = sum_l K[l] u[t-l], one column per output."""
    K = K.K if isinstance(K, KernelSeries) else np.asarray(K)
    u = np.asarray(u, dtype=np.float64).reshape(-1)
    if K.shape[0] < u.size:
        raise ValueError("kernel shorter than input")
    return np.stack([np.convolve(u, K[:, j])[: u.size] for j in range(K.shape[1])], axis=1)


def jacobian(ssm, T):
    """Columns G[:, t] = dh_T / du_t, filled right to left."""
    if T < 1:
        raise ValueError("T must be >= 1")
    G = np.empty((ssm.N, T))
    if ssm.mode == "lti":
        v = np.array(ssm.Bbar)
        for t in range(T - 1, -1, -1):
            G[:, t] = v
            v = ssm.Abar @ v
        return JacobianMatrix(G=G)
    steps = list(_steps(ssm, T))
    P = np.eye(ssm.N)
    for t in range(T - 1, -1, -1):
        Abar, Bbar = steps[t]
        G[:, t] = P @ Bbar
        P = P @ Abar
    return JacobianMatrix(G=G)


def decode_times(grid, measure, end_time=1.0):
    """Absolute times of the decoded samples."""
    if measure.kind == "scaled":
        return grid.t * end_time
    return end_time - measure.theta + grid.t * measure.theta


def decode_state(h, frame, dual=None):
    """Synthesize the remembered signal from a state via the L2 dual frame.

    Both measures warp the remembered history onto the frame grid, so the
    samples do not depend on the measure; decode_times places them in time.
    """
    h = np.asarray(h, dtype=np.float64).reshape(-1)
    if h.size != frame.N:
        raise ValueError(f"state has {h.size} entries, frame has {frame.N} atoms")
    if dual is None:
        dual = dual_frame(frame, weighted=True)
    return h @ dual.F_dual


def locality_profile(G, fraction=LOCALITY_FRACTION):
    """Shortest window holding `fraction` of each row's energy, and their mean."""
    G = G.G if isinstance(G, JacobianMatrix) else np.asarray(G)
    energy = G ** 2
    T = energy.shape[1]
    widths = np.zeros(energy.shape[0], dtype=int)
    for n, row in enumerate(energy):
        cum = np.concatenate(([0.0], np.cumsum(row)))
        total = cum[-1]
        if total == 0:
            continue
        need = fraction * total * (1 - 1e-12)
        ends = np.searchsorted(cum, cum[:-1] + need, side="left")
        valid = ends <= T
        widths[n] = int(np.min(ends[valid] - np.arange(T)[valid]))
    return widths, float(widths.mean()) if widths.size else 0.0
