"""N-term approximation of step signals: Legendre, db6 DWT and CWT + OMP."""
import logging
from concurrent.futures import ThreadPoolExecutor
from math import comb

import numpy as np
import pywt
from scipy import linalg
from scipy.special import roots_legendre

from wavessm.errors import BadLength, DegenerateAtom, ZeroError
from wavessm.frames import MORLET_W0, gaussian_derivative, legendre_basis
from wavessm.models import ApproxReport, Dictionary, Grid, TestSignal

log = logging.getLogger(__name__)

SIGNAL_KINDS = ("one_step", "two_step", "star", "custom")
DEFAULT_PIECES = {
    "one_step": ((0.5,), (0.0, 1.0)),
    "two_step": ((1 / 3, 2 / 3), (0.0, 1.0, 0.3)),
    # indicator of [0, 1/2]; its Legendre coefficients have a closed form
    "star": ((0.5,), (1.0, 0.0)),
}
LEGENDRE_CEILING = 2048
DWT_LEVELS = 6
DWT_MODES = ("periodization", "symmetric", "zero")
# thresholding extends the ends instead of wrapping them
THRESHOLD_MODE = "symmetric"
OMP_RIDGE = 1e-7
OMP_TOL = 1e-12
EXACT_TOL = 1e-12


# Signals and metric

def make_test_signal(kind, grid, breakpoints=None, amplitudes=None):
    """Piecewise-constant signal, right-continuous at breakpoints."""
    if kind not in SIGNAL_KINDS:
        raise ValueError(f"unknown signal kind {kind!r}")
    if kind != "custom":
        default_bp, default_amp = DEFAULT_PIECES[kind]
        breakpoints = default_bp if breakpoints is None else breakpoints
        amplitudes = default_amp if amplitudes is None else amplitudes
    if breakpoints is None or amplitudes is None:
        raise ValueError("custom signals need breakpoints and amplitudes")
    bp = tuple(float(b) for b in breakpoints)
    amps = tuple(float(a) for a in amplitudes)
    if len(amps) != len(bp) + 1:
        raise ValueError("need one more amplitude than breakpoints")
    if any(not 0 < b < 1 for b in bp) or any(b >= c for b, c in zip(bp, bp[1:])):
        raise ValueError("breakpoints must increase strictly inside (0, 1)")
    piece = np.searchsorted(np.asarray(bp), grid.t, side="right")
    samples = np.asarray(amps)[piece]
    samples.setflags(write=False)
    return TestSignal(kind=kind, samples=samples, grid=grid, breakpoints=bp, amplitudes=amps)


def error_l2(f, g, grid):
    diff = np.asarray(f, dtype=np.float64) - np.asarray(g, dtype=np.float64)
    if diff.shape != (grid.length,):
        raise ValueError("signals must match the grid length")
    return float(np.sqrt(grid.dt * np.sum(diff ** 2)))


# Legendre

def _pieces(signal):
    edges = (0.0,) + signal.breakpoints + (1.0,)
    return [(a, b, amp) for a, b, amp in zip(edges, edges[1:], signal.amplitudes) if amp != 0]


def legendre_project(signal, K=LEGENDRE_CEILING, quad_order=None):
    """a_n = <f, l_n> on L2(0,1) for n < K, Gauss-Legendre on each constant piece."""
    if not 1 <= K <= LEGENDRE_CEILING:
        raise ValueError(f"K must lie in [1, {LEGENDRE_CEILING}]")
    q = 2 * K if quad_order is None else quad_order
    if q < 2 * K:
        raise ValueError("quad_order must be at least 2K")
    nodes, weights = roots_legendre(q)
    coeffs = np.zeros(K)
    for a, b, amp in _pieces(signal):
        t = (b - a) / 2 * nodes + (a + b) / 2
        w = amp * (b - a) / 2 * weights
        x = 2 * t - 1
        # accumulate row by row so the (K, q) table is never stored
        prev, cur = np.zeros_like(x), np.ones_like(x)
        for n in range(K):
            coeffs[n] += np.sqrt(2 * n + 1) * np.dot(w, cur)
            prev, cur = cur, ((2 * n + 1) * x * cur - n * prev) / (n + 1)
    return coeffs


def _legendre_at_zero(m):
    if m < 0 or m % 2:
        return 0.0
    k = m // 2
    return (-1) ** k * comb(2 * k, k) / 4 ** k


def step_coeff_closed_form(n):
    """Legendre coefficient of the indicator of [0, 1/2]."""
    if n < 1:
        raise ValueError("closed form holds for n >= 1")
    return (_legendre_at_zero(n + 1) - _legendre_at_zero(n - 1)) / (2 * np.sqrt(2 * n + 1))


def _top_indices(coeffs, N):
    # stable sort keeps the lower index first among equal magnitudes
    return np.sort(np.argsort(-np.abs(coeffs), kind="stable")[:N])


def best_n_term(coeffs, N, basis, signal, method="legendre_bestN"):
    """Keep the N largest coefficients and synthesize on the signal grid."""
    coeffs = np.asarray(coeffs, dtype=np.float64)
    chosen = _top_indices(coeffs, N)
    recon = coeffs[chosen] @ np.asarray(basis)[chosen] if chosen.size else np.zeros(signal.grid.length)
    return ApproxReport(
        method=method,
        budget=N,
        selected=tuple(int(i) for i in chosen),
        error=error_l2(signal.samples, recon, signal.grid),
        reconstruction=recon,
    )


def legendre_best_n(signal, N, K=LEGENDRE_CEILING, coeffs=None):
    if coeffs is None:
        coeffs = legendre_project(signal, K)
    chosen = _top_indices(coeffs, N)
    top = int(chosen.max()) + 1 if chosen.size else 0
    basis = np.zeros((coeffs.size, signal.grid.length))
    if top:
        basis[:top] = legendre_basis(top, signal.grid.t)
    return best_n_term(coeffs, N, basis, signal)


# db6 DWT

def dwt_db6(x, levels=DWT_LEVELS, direction="forward", mode="periodization"):
    """Multilevel db6 transform (list of arrays) or its inverse.

    Periodization keeps the transform orthonormal. Other PyWavelets modes
    extend the signal past its ends instead of wrapping it, so a signal
    whose ends differ gets no artificial jump at t = 0.
    """
    if mode not in DWT_MODES:
        raise ValueError(f"unknown boundary mode {mode!r}")
    if direction == "forward":
        # pywt refuses read-only buffers such as TestSignal samples
        x = np.array(x, dtype=np.float64)
        if x.size % 2 ** levels:
            raise BadLength(f"length {x.size} is not a multiple of 2**{levels}")
        return pywt.wavedec(x, "db6", mode=mode, level=levels)
    if direction == "inverse":
        return pywt.waverec([np.array(c, dtype=np.float64) for c in x], "db6", mode=mode)
    raise ValueError(f"unknown direction {direction!r}")


def dwt_threshold_n(signal, N, levels=DWT_LEVELS, coeffs=None, mode=THRESHOLD_MODE):
    """Hard-threshold to the N largest DWT coefficients and reconstruct.

    Every coefficient the chosen mode produces counts against the budget.
    """
    if coeffs is None:
        coeffs = dwt_db6(signal.samples, levels, mode=mode)
    flat = np.concatenate(coeffs)
    chosen = _top_indices(flat, N)
    kept = np.zeros_like(flat)
    kept[chosen] = flat[chosen]
    bounds = np.cumsum([0] + [c.size for c in coeffs])
    recon = dwt_db6([kept[a:b] for a, b in zip(bounds, bounds[1:])], direction="inverse", mode=mode)
    recon = recon[:signal.grid.length]
    return ApproxReport(
        method="dwt_threshold",
        budget=N,
        selected=tuple(int(i) for i in chosen),
        error=error_l2(signal.samples, recon, signal.grid),
        reconstruction=recon,
    )


# CWT dictionary and OMP

def mother_wavelet(name):
    """Mother wavelet of x by its PyWavelets-style name (mexh, morl, gausP)."""
    if name in ("mexh", "mexhat"):
        return lambda x: -gaussian_derivative(2, x)
    if name in ("morl", "morlet"):
        return lambda x: np.exp(-x * x / 2) * np.cos(MORLET_W0 * x)
    if name.startswith("gaus") and name[4:].isdigit() and int(name[4:]) >= 1:
        order = int(name[4:])
        return lambda x: gaussian_derivative(order, x)
    raise ValueError(f"unknown mother wavelet {name!r}")


def build_cwt_dictionary(mother, grid, n_scales=32, n_shifts=512, a_min=None, a_max=0.15):
    a_min = 3 * grid.dt if a_min is None else a_min
    if not 0 < a_min < a_max:
        raise ValueError("need 0 < a_min < a_max")
    psi = mother_wavelet(mother)
    scales = np.geomspace(a_min, a_max, n_scales)
    shifts = np.linspace(0, 1, n_shifts) if n_shifts > 1 else np.array([0.5])
    atoms = np.empty((n_scales * n_shifts, grid.length))
    atom_scales = np.repeat(scales, n_shifts)
    atom_shifts = np.tile(shifts, n_scales)
    for i, (a, b) in enumerate(zip(atom_scales, atom_shifts)):
        row = psi((grid.t - b) / a) / np.sqrt(a)
        energy = grid.dt * float(row @ row)
        if energy < 1e-14:
            raise DegenerateAtom(energy)
        atoms[i] = row / np.sqrt(energy)
    log.debug("%s dictionary: %d atoms on L=%d", mother, atoms.shape[0], grid.length)
    return Dictionary(atoms=atoms, grid=grid, mother=mother, scales=atom_scales, shifts=atom_shifts)


def omp_ridge(dictionary, f, N, ridge=OMP_RIDGE):
    """Greedy pursuit with a ridge-regularized refit after each pick."""
    if not 1e-9 <= ridge <= 1e-4:
        raise ValueError("ridge must lie in [1e-9, 1e-4]")
    D = dictionary.atoms
    if N > D.shape[0]:
        raise ValueError("budget exceeds dictionary size")
    grid = dictionary.grid
    f = np.asarray(getattr(f, "samples", f), dtype=np.float64)
    dt = grid.dt
    recon = np.zeros_like(f)
    residual = f.copy()
    selected, norms = [], []
    for _ in range(N):
        if np.sqrt(dt * residual @ residual) <= OMP_TOL:
            break
        corr = np.abs(dt * (D @ residual))
        corr[selected] = -1.0
        selected.append(int(np.argmax(corr)))
        Ds = D[selected]
        # ridge acts on the plain sample-sum normal equations
        gram = Ds @ Ds.T + ridge * np.eye(len(selected))
        coef = linalg.solve(gram, Ds @ f, assume_a="pos")
        recon = coef @ Ds
        residual = f - recon
        norms.append(float(np.sqrt(dt * residual @ residual)))
    log.debug("omp picked %d of %d atoms", len(selected), N)
    return ApproxReport(
        method="omp",
        budget=N,
        selected=tuple(selected),
        error=error_l2(f, recon, grid),
        reconstruction=recon,
        residual_norms=tuple(norms),
    )


def rate_slope(budgets, errors):
    """Least-squares slope of log error against log budget."""
    budgets = np.asarray(budgets, dtype=np.float64)
    errors = np.asarray(errors, dtype=np.float64)
    if budgets.size < 3 or budgets.size != errors.size:
        raise ValueError("need at least 3 (budget, error) pairs")
    for n, e in zip(budgets, errors):
        if e <= EXACT_TOL:
            raise ZeroError(int(n))
    if np.any(errors < 0):
        raise ValueError("errors must be non-negative")
    return float(np.polyfit(np.log(budgets), np.log(errors), 1)[0])


# Sweeps

def _method_errors(method, signal, budgets, settings):
    if method == "legendre":
        coeffs = legendre_project(signal, settings.get("K", LEGENDRE_CEILING))
        return "legendre", [legendre_best_n(signal, n, coeffs=coeffs).error for n in budgets]
    if method == "db6":
        levels = settings.get("levels", DWT_LEVELS)
        coeffs = dwt_db6(signal.samples, levels, mode=THRESHOLD_MODE)
        return "db6", [dwt_threshold_n(signal, n, levels, coeffs=coeffs).error for n in budgets]
    if method.startswith("omp:"):
        mother = method[4:]
        dictionary = build_cwt_dictionary(
            mother, signal.grid,
            n_scales=settings.get("n_scales", 32),
            n_shifts=settings.get("n_shifts", 512),
            a_min=settings.get("a_min"),
            a_max=settings.get("a_max", 0.15),
        )
        report = omp_ridge(dictionary, signal, max(budgets), settings.get("ridge", OMP_RIDGE))
        zero = error_l2(signal.samples, np.zeros(signal.grid.length), signal.grid)
        norms = (zero,) + report.residual_norms
        # pursuit is nested: the budget-n error is the residual after n picks
        return mother, [norms[min(n, len(norms) - 1)] for n in budgets]
    raise ValueError(f"unknown method {method!r}")


def sweep(signals, methods, budgets, L=2048, workers=1, **settings):
    """Long-format rows (method, family, N, error, slope, signal), fixed order."""
    grid = Grid(L)
    budgets = sorted(int(n) for n in budgets)
    cells = [(s, m) for s in signals for m in methods]

    def evaluate(cell):
        kind, method = cell
        signal = make_test_signal(kind, grid)
        family, errors = _method_errors(method, signal, budgets, settings)
        try:
            slope = rate_slope(budgets, errors)
        except ZeroError as exc:
            slope = str(exc)
        label = method.split(":")[0]
        return [
            {"method": label, "family": family, "N": n, "error": e, "slope": slope, "signal": kind}
            for n, e in zip(budgets, errors)
        ]

    with ThreadPoolExecutor(max_workers=max(workers, 1)) as pool:
        results = list(pool.map(evaluate, cells))
    return [row for rows in results for row in rows]
