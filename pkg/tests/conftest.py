import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_rotation(rng, dim=3):
    """Haar-ish random proper rotation via QR."""
    mat = rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(mat)
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def gaussian_on(grid, lam=1.0, center=None, k0=None):
    """Closed-form Gaussian samples, independent of sample_gaussian."""
    n = grid.dim
    center = np.zeros(n) if center is None else np.asarray(center, float)
    k0 = np.zeros(n) if k0 is None else np.asarray(k0, float)
    mesh = grid.coordinate_mesh()
    r2 = sum((m - c) ** 2 for m, c in zip(mesh, center))
    phase = sum(kj * m for kj, m in zip(k0, mesh))
    return (2 * np.pi * lam**2) ** (-n / 4.0) * np.exp(-r2 / (4 * lam**2)) * np.exp(1j * phase)
