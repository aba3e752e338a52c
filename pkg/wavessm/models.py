from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Optional

import numpy as np

# families built from a shifted and dilated prototype; legendre is built directly
WAVELET_FAMILIES = ("morlet", "gauss_deriv", "mexhat", "dpss", "db6")
FAMILIES = WAVELET_FAMILIES + ("legendre",)
MEASURES = ("scaled", "translated")
MODES = ("lti", "scaled_adaptive")
# angular: omega = 2 pi f; grid: omega = pi f L / (L - 1)
MORLET_MODULATIONS = ("angular", "grid")


def valid_family(family):
    return family in FAMILIES


def valid_measure(kind):
    return kind in MEASURES


def _frozen(a):
    a = np.asarray(a, dtype=np.float64)
    a.setflags(write=False)
    return a


def as_matrix(a, name="matrix"):
    """Coerce to a finite 2-D float64 array."""
    m = np.asarray(a, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} has non-finite entries")
    return m


@dataclass(frozen=True)
class SpectrumReport:
    lambda_min: float
    lambda_max: float
    condition_number: float


@dataclass(frozen=True)
class Grid:
    length: int

    def __post_init__(self):
        if self.length < 2:
            raise ValueError("grid needs at least 2 points")

    @property
    def dt(self):
        return 1.0 / (self.length - 1)

    @cached_property
    def t(self):
        t = _frozen(np.arange(self.length) / (self.length - 1))
        return t

    @cached_property
    def weights(self):
        """Quadrature weights for L2(0,1); exact for cubics when L >= 7."""
        w = np.full(self.length, self.dt)
        if self.length >= 7:
            ends = np.array([3 / 8, 7 / 6, 23 / 24]) * self.dt
            w[:3] = ends
            w[-3:] = ends[::-1]
        else:
            w[0] = w[-1] = self.dt / 2
        return _frozen(w)

    def inner(self, f, g):
        return float(np.sum(self.weights * np.asarray(f) * np.asarray(g)))


@dataclass(frozen=True)
class FrameSpec:
    family: str
    N: int
    L: int
    f_min: float = 4.0
    f_max: float = 64.0
    n_scales: int = 4
    hop_factor: float = 0.75
    order: int = 1
    morlet_omegas: Optional[tuple] = None
    morlet_modulation: str = "angular"
    dpss_bandwidths: Optional[tuple] = None
    dpss_tapers: int = 2
    db6_levels: int = 8
    rng_seed: int = 0
    tighten: bool = True

    def __post_init__(self):
        if not valid_family(self.family):
            raise ValueError(f"unknown frame family {self.family!r}")
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if self.L < 3:
            raise ValueError("L must be >= 3")
        if not 0 < self.f_min < self.f_max:
            raise ValueError("need 0 < f_min < f_max")
        if self.morlet_modulation not in MORLET_MODULATIONS:
            raise ValueError(f"unknown morlet modulation {self.morlet_modulation!r}")
        if self.hop_factor <= 0:
            raise ValueError("hop_factor must be positive")
        if self.family == "gauss_deriv" and self.order < 1:
            raise ValueError("gauss_deriv order P must be >= 1")
        for name in ("morlet_omegas", "dpss_bandwidths"):
            value = getattr(self, name)
            if value is not None:
                object.__setattr__(self, name, tuple(float(v) for v in value))

    def to_dict(self):
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        for name in ("morlet_omegas", "dpss_bandwidths"):
            if d[name] is not None:
                d[name] = list(d[name])
        return d


@dataclass(frozen=True)
class FrameMatrix:
    F: np.ndarray
    grid: Grid
    spec: FrameSpec
    scales: np.ndarray
    centers: np.ndarray
    omegas: np.ndarray
    row_norms: np.ndarray
    unit_norm: bool = True
    tightened: bool = False
    derivative: Optional[np.ndarray] = None

    def __post_init__(self):
        F = as_matrix(self.F, "F")
        if F.shape[1] != self.grid.length:
            raise ValueError("frame width does not match grid length")
        object.__setattr__(self, "F", _frozen(F))
        for name in ("scales", "centers", "omegas", "row_norms"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        if self.derivative is not None:
            object.__setattr__(self, "derivative", _frozen(as_matrix(self.derivative, "derivative")))

    @property
    def N(self):
        return self.F.shape[0]

    @property
    def L(self):
        return self.F.shape[1]

    @property
    def family(self):
        return self.spec.family

    def evolve(self, **changes):
        return replace(self, **changes)


@dataclass(frozen=True)
class Measure:
    kind: str
    theta: float = 1.0

    def __post_init__(self):
        if not valid_measure(self.kind):
            raise ValueError(f"unknown measure {self.kind!r}")
        if self.kind == "translated" and not self.theta > 0:
            raise ValueError("translated measure needs theta > 0")

    @classmethod
    def scaled(cls):
        return cls("scaled")

    @classmethod
    def translated(cls, theta=1.0):
        return cls("translated", theta)


@dataclass(frozen=True)
class SsmPair:
    A: np.ndarray
    B: np.ndarray
    measure: Measure
    source_frame_id: str = ""

    def __post_init__(self):
        A = as_matrix(self.A, "A")
        B = np.asarray(self.B, dtype=np.float64).reshape(-1)
        if A.shape != (B.size, B.size):
            raise ValueError(f"A {A.shape} and B {B.shape} disagree")
        if not np.all(np.isfinite(B)):
            raise ValueError("B has non-finite entries")
        object.__setattr__(self, "A", _frozen(A))
        object.__setattr__(self, "B", _frozen(B))

    @property
    def N(self):
        return self.B.size


@dataclass(frozen=True)
class DualFrame:
    F_dual: np.ndarray
    weighted: bool = False


@dataclass(frozen=True)
class DiscreteSsm:
    Abar: np.ndarray
    Bbar: np.ndarray
    delta: float
    mode: str = "lti"
    C: Optional[np.ndarray] = None
    pair: Optional[SsmPair] = None
    spectral_radius: float = field(init=False)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown stepping mode {self.mode!r}")
        if self.mode == "scaled_adaptive" and self.pair is None:
            raise ValueError("scaled_adaptive stepping needs the continuous pair")
        object.__setattr__(self, "Abar", _frozen(as_matrix(self.Abar, "Abar")))
        object.__setattr__(self, "Bbar", _frozen(np.asarray(self.Bbar, dtype=np.float64).reshape(-1)))
        radius = float(np.max(np.abs(np.linalg.eigvals(self.Abar)))) if self.Abar.size else 0.0
        object.__setattr__(self, "spectral_radius", radius)

    @property
    def N(self):
        return self.Bbar.size


@dataclass(frozen=True)
class KernelSeries:
    K: np.ndarray

    @property
    def T(self):
        return self.K.shape[0]


@dataclass(frozen=True)
class JacobianMatrix:
    G: np.ndarray

    @property
    def T(self):
        return self.G.shape[1]


@dataclass(frozen=True)
class TestSignal:
    kind: str
    samples: np.ndarray
    grid: Grid
    breakpoints: tuple = ()
    amplitudes: tuple = ()

    __test__ = False  # not a pytest class


@dataclass(frozen=True)
class Dictionary:
    atoms: np.ndarray
    grid: Grid
    mother: str
    scales: np.ndarray
    shifts: np.ndarray

    @property
    def size(self):
        return self.atoms.shape[0]


@dataclass(frozen=True)
class ApproxReport:
    method: str
    budget: int
    selected: tuple
    error: float
    reconstruction: Optional[np.ndarray] = None
    residual_norms: tuple = ()


@dataclass(frozen=True)
class CopyTaskInstance:
    T: int
    signal: np.ndarray
    markers: np.ndarray
    windows: tuple
    target: np.ndarray
    seed: int

    @property
    def W(self):
        return len(self.windows)

    @property
    def D(self):
        return self.windows[0][1] if self.windows else 0

    def window_mask(self):
        mask = np.zeros(self.T, dtype=bool)
        for start, length in self.windows:
            mask[start:start + length] = True
        return mask


@dataclass(frozen=True)
class TaskReport:
    family: str
    measure: str
    N: int
    W: int
    window_mse: float
    target_mse: float
    seed: Optional[int] = None
    divergent: bool = False
