import numpy as np
import pytest

from wavessm.frames import build_frame, make_frame, restore_amplitudes
from wavessm.models import FrameSpec, Grid


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def grid512():
    return Grid(512)


@pytest.fixture(scope="session")
def legendre8():
    """Orthonormal shifted Legendre rows, N=8 on a fine grid."""
    return restore_amplitudes(build_frame(FrameSpec("legendre", 8, 8192, tighten=False)))


@pytest.fixture(scope="session")
def tight_frames():
    """One tightened frame per family, N=16 on L=512."""
    families = ("morlet", "gauss_deriv", "mexhat", "dpss", "db6", "legendre")
    return {f: make_frame(FrameSpec(f, 16, 512)) for f in families}


@pytest.fixture
def out_dir(tmp_path):
    return str(tmp_path / "out")
