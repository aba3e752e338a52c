"""Frame construction: sampled atoms on a uniform [0, 1] grid.

Wavelet families follow one pipeline: log-spaced pseudo-frequencies give
scales through the prototype's central frequency, each scale's width sets a
hop, and the atom budget is shared out between scales in proportion to how
many hops fit in the grid. Legendre rows come straight from the recurrence.
"""
import logging
from functools import lru_cache

import numpy as np
import pywt
from numpy.polynomial import hermite_e

from wavessm.checksum import fnv1a64
from wavessm.errors import DegenerateAtom, FilterInvalid, Unresolvable
from wavessm.models import FrameMatrix, Grid, WAVELET_FAMILIES
from wavessm.numerics import psd_inverse_sqrt, spectrum, sym_tridiag_eig

log = logging.getLogger(__name__)

MORLET_W0 = 5.0
PROTOTYPE_SPAN = 8.0
PROTOTYPE_SAMPLES = 4097
FFT_SIZE = 2 ** 16
MIN_ATOM_ENERGY = 1e-14
FLUSH = 1e-300
DB6_TAPS = 12
DPSS_MIN_WINDOW = 16
MIN_SCALE_SAMPLES = 2


# Prototypes

def gaussian_derivative(order, x):
    coef = np.zeros(order + 1)
    coef[order] = 1.0
    return (-1) ** order * hermite_e.hermeval(x, coef) * np.exp(-x * x / 2)


def _family_order(family, order):
    # mexhat is the negated second Gaussian derivative
    if family == "mexhat":
        return 2, -1.0
    return order, 1.0


def _check_filter(h):
    h = np.asarray(h, dtype=np.float64)
    if h.size != DB6_TAPS:
        raise FilterInvalid(f"db6 filter has {h.size} taps, expected {DB6_TAPS}")
    if abs(h.sum() - np.sqrt(2)) > 1e-10:
        raise FilterInvalid(f"db6 filter sums to {h.sum():.15f}, expected sqrt(2)")
    for m in range(DB6_TAPS // 2):
        shifted = float(np.dot(h[: h.size - 2 * m], h[2 * m:]))
        if abs(shifted - (1.0 if m == 0 else 0.0)) > 1e-10:
            raise FilterInvalid(f"db6 filter is not orthonormal at shift {2 * m}")
    g = wavelet_filter(h)
    j = np.arange(g.size, dtype=np.float64)
    for m in range(DB6_TAPS // 2):
        moment = float(np.sum(j ** m * g))
        if abs(moment) > 1e-8:
            raise FilterInvalid(f"db6 wavelet filter moment {m} is {moment:.3e}")
    return h


def wavelet_filter(h):
    """Quadrature mirror of the scaling filter: g_j = (-1)^j h_{n-1-j}."""
    h = np.asarray(h, dtype=np.float64)
    signs = (-1.0) ** np.arange(h.size)
    return signs * h[::-1]


@lru_cache(maxsize=None)
def db6_filter():
    return _check_filter(pywt.Wavelet("db6").rec_lo)


def _cascade_step(c, taps):
    up = np.zeros(2 * c.size - 1)
    up[::2] = c
    return np.sqrt(2) * np.convolve(up, taps)


@lru_cache(maxsize=None)
def db6_samples(levels=8):
    """db6 scaling function and wavelet on the dyadic grid x = n / 2**levels.

    Returns (x, phi, psi), both functions with unit L2 energy over their
    support [0, 11].
    """
    if levels < 4:
        raise ValueError("db6 cascade needs at least 4 levels")
    h = db6_filter()
    g = wavelet_filter(h)
    c = np.ones(1)
    for _ in range(levels - 1):
        c = _cascade_step(c, h)
    phi = _cascade_step(c, h)
    psi = _cascade_step(c, g)
    x = np.arange(phi.size) / 2.0 ** levels
    dx = 1.0 / 2.0 ** levels
    phi = phi / np.sqrt(np.sum(phi ** 2) * dx)
    psi = psi / np.sqrt(np.sum(psi ** 2) * dx)
    for a in (x, phi, psi):
        a.setflags(write=False)
    return x, phi, psi


def _prototype(family, order=1, levels=8):
    if family == "db6":
        x, _, psi = db6_samples(levels)
        return x, psi
    x = np.linspace(-PROTOTYPE_SPAN, PROTOTYPE_SPAN, PROTOTYPE_SAMPLES)
    if family == "morlet":
        return x, np.exp(-x * x / 2) * np.cos(MORLET_W0 * x)
    if family in ("gauss_deriv", "mexhat"):
        p, sign = _family_order(family, order)
        return x, sign * gaussian_derivative(p, x)
    raise ValueError(f"family {family!r} has no sampled prototype")


@lru_cache(maxsize=None)
def central_frequency(family, order=1, levels=8):
    """Energy peak of the prototype spectrum, in cycles per unit of x."""
    x, psi = _prototype(family, order, levels)
    dx = x[1] - x[0]
    power = np.abs(np.fft.rfft(psi, n=FFT_SIZE)) ** 2
    freqs = np.fft.rfftfreq(FFT_SIZE, dx)
    k = int(np.argmax(power[1:])) + 1
    offset = 0.0
    if k < power.size - 1:
        # parabolic refinement of the peak bin
        a, b, c = power[k - 1], power[k], power[k + 1]
        denom = a - 2 * b + c
        if denom != 0:
            offset = 0.5 * (a - c) / denom
    return float(freqs[k] + offset * (freqs[1] - freqs[0]))


def _energy_moments(x, psi):
    energy = psi ** 2
    total = energy.sum()
    mean = float(np.sum(x * energy) / total)
    var = float(np.sum((x - mean) ** 2 * energy) / total)
    return mean, np.sqrt(var)


@lru_cache(maxsize=None)
def prototype_spread(family, order=1, levels=8):
    """Energy-weighted standard deviation of the prototype in x."""
    return _energy_moments(*_prototype(family, order, levels))[1]


def pseudo_frequencies(f_min, f_max, n_scales):
    if not 0 < f_min < f_max:
        raise ValueError("need 0 < f_min < f_max")
    if n_scales < 1:
        raise ValueError("n_scales must be >= 1")
    return np.geomspace(f_min, f_max, n_scales)


def scales_from_frequencies(f_min, f_max, n_scales, f_c):
    return f_c / pseudo_frequencies(f_min, f_max, n_scales)


# Atoms

def _flush(v):
    return np.where(np.abs(v) < FLUSH, 0.0, v)


def atom_values(family, s, c, t, omega=None, order=1, levels=8):
    """Raw atom samples and their time derivative (None when not analytic)."""
    if not s > 0:
        raise ValueError("scale must be positive")
    x = (t - c) / s
    if family == "morlet":
        if omega is None:
            omega = 2 * np.pi * central_frequency("morlet") / s
        env = np.exp(-x * x / 2)
        values = env * np.cos(omega * t)
        deriv = -(x / s) * values - omega * env * np.sin(omega * t)
        return _flush(values), _flush(deriv)
    if family in ("gauss_deriv", "mexhat"):
        p, sign = _family_order(family, order)
        values = sign * gaussian_derivative(p, x)
        deriv = sign * gaussian_derivative(p + 1, x) / s
        return _flush(values), _flush(deriv)
    if family == "db6":
        xs, _, psi = db6_samples(levels)
        centroid, _ = _energy_moments(xs, psi)
        values = np.interp(x + centroid, xs, psi, left=0.0, right=0.0)
        return _flush(values), None
    raise ValueError(f"family {family!r} has no shifted-prototype atom")


def _normalize(values):
    energy = float(np.sum(values ** 2))
    if energy < MIN_ATOM_ENERGY:
        raise DegenerateAtom(energy)
    return np.sqrt(energy)


def sample_atom(family, s, c, grid, omega=None, order=1):
    """Unit-energy samples of the atom at scale s and center c."""
    values, _ = atom_values(family, s, c, grid.t, omega=omega, order=order)
    return values / _normalize(values)


# Slepian tapers

def dpss_tapers(M, W, k):
    """First k discrete prolate spheroidal sequences, as rows of a (k, M) array."""
    if not 0 < W < 0.5:
        raise ValueError("half-bandwidth W must lie in (0, 0.5)")
    if not 1 <= k <= M:
        raise ValueError(f"taper count must lie in [1, {M}]")
    i = np.arange(M, dtype=np.float64)
    diag = ((M - 1 - 2 * i) / 2) ** 2 * np.cos(2 * np.pi * W)
    off = i[1:] * (M - i[1:]) / 2
    _, vectors = sym_tridiag_eig(diag, off, k)
    return vectors.T.copy()


def _place_taper(taper, center, L):
    row = np.zeros(L)
    start = int(round(center)) - taper.size // 2
    lo, hi = max(start, 0), min(start + taper.size, L)
    if hi > lo:
        row[lo:hi] = taper[lo - start:hi - start]
    return row


# Shift allocation

def allocate_shifts(widths, alpha, L, N):
    """Share N atoms between groups and place each group's centers.

    Counts follow largest-remainder apportionment of the hop counts
    L / (alpha * width * (L - 1)); centers are sample positions in [0, L-1].
    """
    widths = np.asarray(widths, dtype=np.float64)
    n_groups = widths.size
    if n_groups == 0 or np.any(widths <= 0):
        raise ValueError("widths must be positive")
    if N < n_groups:
        raise ValueError(f"N={N} cannot give every one of {n_groups} groups an atom")
    hops = alpha * widths * (L - 1)
    desired = L / hops
    if desired.sum() < N:
        log.debug("N=%d exceeds %.1f hop positions; atoms will overlap more densely", N, desired.sum())
    quota = N * desired / desired.sum()
    counts = np.floor(quota).astype(int)
    # rounded so exact ties survive float noise
    remainder = np.round(quota - counts, 12)
    # stable sort keeps the lower index first on equal remainders
    order = np.argsort(-remainder, kind="stable")
    counts[order[: N - counts.sum()]] += 1
    while np.any(counts == 0):
        counts[int(np.argmax(counts))] -= 1
        counts[int(np.argmin(counts))] += 1
    return [
        np.array([(L - 1) / 2]) if n == 1 else np.linspace(0, L - 1, n)
        for n in counts
    ]


# Legendre

def legendre_polys(n_max, x, derivative=False):
    """P_n(x) for n < n_max by the three-term recurrence (and P_n'(x))."""
    x = np.asarray(x, dtype=np.float64)
    P = np.zeros((n_max,) + x.shape)
    dP = np.zeros_like(P)
    if n_max == 0:
        return (P, dP) if derivative else P
    P[0] = 1.0
    if n_max > 1:
        P[1] = x
        dP[1] = 1.0
    for n in range(1, n_max - 1):
        P[n + 1] = ((2 * n + 1) * x * P[n] - n * P[n - 1]) / (n + 1)
        dP[n + 1] = dP[n - 1] + (2 * n + 1) * P[n]
    return (P, dP) if derivative else P


def legendre_basis(n_max, t, derivative=False):
    """Shifted orthonormal Legendre rows sqrt(2n+1) P_n(2t-1) on [0, 1]."""
    norms = np.sqrt(2 * np.arange(n_max) + 1.0)
    P, dP = legendre_polys(n_max, 2 * np.asarray(t, dtype=np.float64) - 1, derivative=True)
    shape = (n_max,) + (1,) * (P.ndim - 1)
    rows = norms.reshape(shape) * P
    if derivative:
        return rows, 2 * norms.reshape(shape) * dP
    return rows


def _legendre_frame(spec, grid):
    rows, deriv = legendre_basis(spec.N, grid.t, derivative=True)
    norms = np.linalg.norm(rows, axis=1)
    zeros = np.zeros(spec.N)
    return FrameMatrix(
        F=rows / norms[:, None],
        grid=grid,
        spec=spec,
        scales=zeros,
        centers=zeros,
        omegas=zeros,
        row_norms=norms,
        derivative=deriv / norms[:, None],
    )


# Frame assembly

def _dpss_groups(spec, grid):
    L = grid.length
    if spec.dpss_bandwidths is not None:
        bandwidths = np.asarray(spec.dpss_bandwidths)
    else:
        freqs = pseudo_frequencies(spec.f_min, spec.f_max, spec.n_scales)
        bandwidths = np.minimum(freqs / (L - 1), 0.25)
    groups = []
    for W in bandwidths:
        M = int(np.clip(round(4 / W), DPSS_MIN_WINDOW, L))
        tapers = dpss_tapers(M, float(W), min(spec.dpss_tapers, M))
        for taper in tapers:
            _, spread = _energy_moments(np.arange(M, dtype=np.float64), taper)
            groups.append({"taper": taper, "W": float(W), "M": M, "width": spread / (L - 1)})
    return groups


def resolvable_f_max(spec):
    """Largest pseudo-frequency whose atom keeps MIN_SCALE_SAMPLES samples per unit scale."""
    f_c = central_frequency(spec.family, spec.order, spec.db6_levels)
    ceiling = f_c * (spec.L - 1) / MIN_SCALE_SAMPLES
    if spec.f_min >= ceiling:
        raise Unresolvable(spec.f_min, ceiling)
    if spec.f_max > ceiling:
        log.info("%s: f_max %.4g capped at %.4g for L=%d", spec.family, spec.f_max, ceiling, spec.L)
    return min(spec.f_max, ceiling)


def _wavelet_groups(spec):
    f_c = central_frequency(spec.family, spec.order, spec.db6_levels)
    sigma0 = prototype_spread(spec.family, spec.order, spec.db6_levels)
    freqs = pseudo_frequencies(spec.f_min, resolvable_f_max(spec), spec.n_scales)
    scales = f_c / freqs
    if spec.morlet_omegas is not None:
        if len(spec.morlet_omegas) != spec.n_scales:
            raise ValueError("morlet_omegas needs one modulation per scale")
        omegas = np.asarray(spec.morlet_omegas)
    elif spec.morlet_modulation == "grid":
        omegas = np.pi * freqs * spec.L / (spec.L - 1)
    else:
        omegas = 2 * np.pi * freqs
    return [
        {"scale": float(s), "omega": float(w), "width": float(s * sigma0)}
        for s, w in zip(scales, omegas)
    ]


def build_frame(spec):
    """Sample, row-normalize and annotate the frame a spec describes."""
    grid = Grid(spec.L)
    if spec.family == "legendre":
        frame = _legendre_frame(spec, grid)
        log.debug("built legendre frame N=%d L=%d", spec.N, spec.L)
        return frame
    if spec.family not in WAVELET_FAMILIES:
        raise ValueError(f"unknown frame family {spec.family!r}")

    dpss = spec.family == "dpss"
    groups = _dpss_groups(spec, grid) if dpss else _wavelet_groups(spec)
    centers = allocate_shifts([g["width"] for g in groups], spec.hop_factor, spec.L, spec.N)

    rows, derivs, norms = [], [], []
    meta_scales, meta_centers, meta_omegas = [], [], []
    for group, group_centers in zip(groups, centers):
        for center in group_centers:
            if dpss:
                values = _place_taper(group["taper"], center, spec.L)
                deriv = None
                meta_scales.append(group["M"] / (spec.L - 1))
                meta_omegas.append(2 * np.pi * group["W"] * (spec.L - 1))
            else:
                values, deriv = atom_values(
                    spec.family, group["scale"], center * grid.dt, grid.t,
                    omega=group["omega"], order=spec.order, levels=spec.db6_levels,
                )
                meta_scales.append(group["scale"])
                meta_omegas.append(group["omega"] if spec.family == "morlet" else 0.0)
            norm = _normalize(values)
            rows.append(values / norm)
            derivs.append(None if deriv is None else deriv / norm)
            norms.append(norm)
            meta_centers.append(center * grid.dt)

    analytic = all(d is not None for d in derivs)
    log.debug("built %s frame N=%d L=%d over %d groups", spec.family, spec.N, spec.L, len(groups))
    return FrameMatrix(
        F=np.vstack(rows),
        grid=grid,
        spec=spec,
        scales=np.asarray(meta_scales),
        centers=np.asarray(meta_centers),
        omegas=np.asarray(meta_omegas),
        row_norms=np.asarray(norms),
        derivative=np.vstack(derivs) if analytic else None,
    )


def frame_operator(frame):
    """S = F diag(w / dt) F^T, the Gram matrix under the grid quadrature.

    Interior weights are 1, so S differs from F F^T only through the end
    corrections; rows orthonormal in L2(0,1) give S proportional to I.
    """
    F = frame.F
    S = (F * (frame.grid.weights / frame.grid.dt)) @ F.T
    return (S + S.T) / 2


def tighten(frame):
    """Whiten the rows: F <- S^{-1/2} F, derivative carried along."""
    M = psd_inverse_sqrt(frame_operator(frame))
    derivative = None if frame.derivative is None else M @ frame.derivative
    return frame.evolve(F=M @ frame.F, derivative=derivative, tightened=True)


def make_frame(spec):
    frame = build_frame(spec)
    if spec.tighten:
        frame = tighten(frame)
    return frame


def frame_diagnostics(frame):
    report = spectrum(frame_operator(frame))
    log.debug("%s N=%d kappa=%.6g", frame.family, frame.N, report.condition_number)
    return report


def restore_amplitudes(frame):
    """Undo row normalization, giving back the atoms as sampled."""
    if frame.tightened:
        raise ValueError("a tightened frame has no per-row amplitudes")
    scale = frame.row_norms[:, None]
    derivative = None if frame.derivative is None else frame.derivative * scale
    return frame.evolve(F=frame.F * scale, derivative=derivative, unit_norm=False)


def analyze(frame, f):
    """L2(0,1) inner products <f, phi_n> with the grid quadrature weights."""
    return frame.F @ (frame.grid.weights * np.asarray(f, dtype=np.float64))


def parseval_truncation_gap(frame, f, subset, project=True):
    """Tail energy minus squared truncation error, both under frame_operator's weights.

    Non-negative (up to round-off) for a tightened frame once f is replaced
    by its projection onto the row span.
    """
    F = frame.F
    w = frame.grid.weights / frame.grid.dt
    f = np.asarray(f, dtype=np.float64)
    if project:
        f = F.T @ (F @ (w * f))
    coeffs = F @ (w * f)
    keep = np.zeros(F.shape[0], dtype=bool)
    keep[np.asarray(subset, dtype=int)] = True
    residual = f - coeffs[keep] @ F[keep]
    return float(np.sum(coeffs[~keep] ** 2) - residual @ (w * residual))


def frame_id(frame):
    return fnv1a64(np.ascontiguousarray(frame.F).tobytes())
