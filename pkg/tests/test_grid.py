import numpy as np
import pytest

from gridqm.fourier import forward
from gridqm.grid import (
    dump_wavefunction,
    inner,
    load_wavefunction,
    make_grid,
    norm,
    normalize,
    sample_gaussian,
    save_wavefunction,
)


def test_make_grid_spacings():
    g = make_grid(1, 256, 40.0)
    assert g.dq == pytest.approx(0.15625, abs=0)
    assert g.dk == pytest.approx(2 * np.pi / 40.0, abs=0)
    # dq * dk * N = 2 pi up to floating representation
    assert g.dq * g.dk * g.points_per_axis == pytest.approx(2 * np.pi, rel=1e-15)


def test_make_grid_smallest_3d():
    g = make_grid(3, 4, 1.0)
    assert g.total_points == 64


@pytest.mark.parametrize(
    "args",
    [(1, 100, 10.0), (1, 2, 10.0), (0, 256, 10.0), (4, 16, 10.0), (1, 256, 0.0), (1, 256, -3.0)],
)
def test_make_grid_rejects(args):
    with pytest.raises(ValueError):
        make_grid(*args)


def test_make_grid_memory_cap():
    with pytest.raises(ValueError):
        make_grid(3, 512, 10.0)  # 2^27 points > default cap
    make_grid(3, 512, 10.0, max_points=2**27)


def test_gaussian_norm_quadrature():
    # oracle: trapezoid of the closed-form density on an independent fine grid
    lam = 1.0
    x = np.linspace(-20, 20, 20001)
    dens = (2 * np.pi * lam**2) ** -0.5 * np.exp(-(x**2) / (2 * lam**2))
    assert np.trapezoid(dens, x) == pytest.approx(1.0, abs=1e-12)
    g = make_grid(1, 512, 40.0)
    psi = sample_gaussian(g, lam)
    assert abs(norm(psi) - 1.0) < 1e-10


def test_gaussian_peak_value():
    for dim, n, L in [(1, 512, 40.0), (2, 64, 16.0)]:
        g = make_grid(dim, n, L)
        psi = sample_gaussian(g, 1.0)
        origin = (n // 2,) * dim
        assert psi.values[origin] == pytest.approx((2 * np.pi) ** (-dim / 4.0), rel=1e-14)


def test_gaussian_preconditions():
    g = make_grid(1, 256, 40.0)
    with pytest.raises(ValueError):
        sample_gaussian(g, g.dq)  # unresolvable
    with pytest.raises(ValueError):
        sample_gaussian(g, 10.0)  # wider than L/8
    with pytest.raises(ValueError):
        sample_gaussian(g, 1.0, k0=[0.6 * g.k_max])


def test_inner_normalized_and_antilinear():
    g = make_grid(1, 512, 40.0)
    psi = sample_gaussian(g, 1.0)
    assert inner(psi, psi) == pytest.approx(1.0, abs=1e-10)
    c = 0.3 - 1.7j
    assert inner(psi.with_values(c * psi.values), psi) == pytest.approx(np.conj(c), abs=1e-10)


def test_inner_modulated_overlap_oracle():
    # oracle: <e^{ik1 q} g | e^{ik2 q} g> = e^{-lam^2 |k1-k2|^2/2} e^{i phase...};
    # computed here by independent trapezoid quadrature of the closed form
    lam, k1, k2 = 1.0, 3.0, -3.0
    x = np.linspace(-20, 20, 40001)
    dens = (2 * np.pi * lam**2) ** -0.5 * np.exp(-(x**2) / (2 * lam**2))
    oracle = np.trapezoid(dens * np.exp(1j * (k2 - k1) * x), x)
    assert abs(oracle) == pytest.approx(np.exp(-(lam**2) * (k2 - k1) ** 2 / 2), rel=1e-10)
    g = make_grid(1, 512, 40.0)
    a = sample_gaussian(g, lam, k0=[k1])
    b = sample_gaussian(g, lam, k0=[k2])
    val = inner(a, b)
    assert val == pytest.approx(oracle, abs=1e-12)
    assert abs(val) < 2e-8  # effectively orthogonal


def test_inner_grid_mismatch():
    a = sample_gaussian(make_grid(1, 256, 40.0), 1.0)
    b = sample_gaussian(make_grid(1, 512, 40.0), 1.0)
    with pytest.raises(ValueError):
        inner(a, b)


def test_inner_sesquilinear(rng):
    g = make_grid(1, 128, 20.0)
    psi = sample_gaussian(g, 1.0)
    phi = sample_gaussian(g, 0.8, center=[0.5])
    chi = sample_gaussian(g, 1.2, center=[-0.7], k0=[1.0])
    alpha = complex(rng.normal(), rng.normal())
    beta = complex(rng.normal(), rng.normal())
    mix = phi.with_values(alpha * phi.values + beta * chi.values)
    expected = np.conj(alpha) * inner(phi, psi) + np.conj(beta) * inner(chi, psi)
    assert inner(mix, psi) == pytest.approx(expected, abs=1e-12)


def test_normalize():
    g = make_grid(1, 256, 30.0)
    psi = sample_gaussian(g, 1.0)
    double = psi.with_values(2.0 * psi.values)
    n1 = normalize(double)
    n2 = normalize(psi)
    np.testing.assert_allclose(n1.values, n2.values, atol=1e-14)
    assert abs(norm(n1) - 1.0) < 1e-12
    zero = psi.with_values(np.zeros(g.shape))
    assert norm(zero) == 0.0
    with pytest.raises(ValueError):
        normalize(zero)


def test_parseval_lattice_identity():
    g = make_grid(1, 512, 40.0)
    psi = sample_gaussian(g, 1.0, center=[0.3], k0=[2.0])
    lhs = np.sum(np.abs(psi.values) ** 2) * g.cell_volume
    ft = forward(psi)
    rhs = (2 * np.pi) ** g.dim * np.sum(np.abs(ft.values) ** 2) * g.k_cell_volume
    assert abs(lhs - rhs) / lhs < 1e-10


def test_values_immutable():
    g = make_grid(1, 128, 20.0)
    psi = sample_gaussian(g, 1.0)
    with pytest.raises(ValueError):
        psi.values[0] = 1.0


def test_serialization_roundtrip(tmp_path):
    g = make_grid(2, 32, 16.0)
    psi = sample_gaussian(g, 2.0, center=[0.25, -0.5], k0=[1.0, 0.0])
    path = tmp_path / "state.txt"
    save_wavefunction(path, psi)
    back = load_wavefunction(path)
    assert back.grid == g
    np.testing.assert_array_equal(back.values, psi.values)  # 17 digits round-trip floats
    text = dump_wavefunction(psi)
    header = text.splitlines()[0]
    assert header.startswith("# {") and '"dim": 2' in header
    assert len(text.splitlines()) == 1 + g.total_points
