import numpy as np
import pytest

from gridqm.fourier import forward
from gridqm.grid import Wavefunction, make_grid, normalize, sample_gaussian
from gridqm.operators import EuclideanElement, rotation_matrix
from gridqm.states import (
    CHI_WAVEVECTOR_BUDGET,
    CorrelationQuery,
    characteristic,
    characteristic_many,
    chi_from_correlations,
    correlation,
    correlation_fxy,
    expectation,
    gaussian_probe,
    phase_space_table,
    position_spread,
    rotation_correlation_reduction,
    shift_correlation,
    shift_correlation_table,
    twisted_posdef_min_eig,
    wigner,
    wigner_lattice_k,
    wigner_many,
    wigner_marginals,
)

SHIFT = EuclideanElement.shift_only


@pytest.fixture(scope="module")
def line():
    g = make_grid(1, 512, 40.0)
    return g, sample_gaussian(g, 1.0)


def test_expectation_basics(line):
    g, psi = line
    assert expectation(np.ones(g.shape), psi) == pytest.approx(1.0, abs=1e-10)
    q = g.axis_coordinates()
    # oracle: int q^2 e^{-q^2/2}/sqrt(2 pi) dq = 1 (trapezoid, independent grid)
    x = np.linspace(-25, 25, 50001)
    moment = np.trapezoid(x**2 * np.exp(-(x**2) / 2), x) / np.sqrt(2 * np.pi)
    assert moment == pytest.approx(1.0, abs=1e-12)
    assert expectation(q**2, psi).real == pytest.approx(moment, abs=1e-8)
    k0 = 1.3
    val = expectation(np.exp(1j * k0 * q), psi)
    assert val == pytest.approx(np.exp(-(k0**2) / 2), abs=1e-10)


def test_correlation_reduces_to_expectation(line):
    g, psi = line
    q = g.axis_coordinates()
    f = np.exp(-(q**2) / 5) * (1 + 0.2 * np.sin(q))
    e = EuclideanElement.identity(1)
    assert correlation_fxy(f, e, e, psi) == pytest.approx(expectation(f, psi), abs=1e-12)
    query = CorrelationQuery(f, e, e)
    assert correlation(query, psi) == pytest.approx(expectation(f, psi), abs=1e-12)


def test_correlation_gaussian_closed_form(line):
    # point-mass probe: F = e^{-|a-b|^2/8 lam^2} e^{-i k(a+b)/2} e^{-lam^2 k^2/2}
    g, psi = line
    a, b = 0.9, -0.6
    k0 = 8 * g.dk
    f = np.exp(1j * k0 * g.axis_coordinates())
    got = correlation_fxy(f, SHIFT([a]), SHIFT([b]), psi)
    want = (
        np.exp(-((a - b) ** 2) / 8.0)
        * np.exp(-0.5j * k0 * (a + b))
        * np.exp(-0.5 * k0**2)
    )
    assert got == pytest.approx(want, abs=1e-10)


def test_correlation_conjugate_symmetry(line):
    g, psi = line
    q = g.axis_coordinates()
    f = np.exp(-(q**2) / 6) * (1 + 0.4j * np.sin(0.5 * q))
    x, y = SHIFT([0.7]), SHIFT([-0.4])
    lhs = correlation_fxy(np.conj(f), y, x, psi)
    rhs = np.conj(correlation_fxy(f, x, y, psi))
    assert lhs == pytest.approx(rhs, abs=1e-10)


def test_correlation_ray_invariance(line):
    g, psi = line
    rng = np.random.default_rng(2)
    rotated = psi.with_values(np.exp(1.23j) * psi.values)
    q = g.axis_coordinates()
    for _ in range(50):
        f = rng.normal() * np.exp(-(q**2) / 7) + rng.normal() * np.cos(rng.normal() * q)
        x, y = SHIFT(rng.normal(size=1)), SHIFT(rng.normal(size=1))
        v1 = correlation_fxy(f, x, y, psi)
        v2 = correlation_fxy(f, x, y, rotated)
        assert v1 == pytest.approx(v2, abs=1e-12)


def test_distinct_rays_distinguishable(line):
    g, psi = line
    other = sample_gaussian(g, 1.0, center=[1.0])
    q = g.axis_coordinates()
    f = np.exp(-(q**2) / 4)
    diff = abs(
        correlation_fxy(f, SHIFT([0.0]), SHIFT([0.0]), psi)
        - correlation_fxy(f, SHIFT([0.0]), SHIFT([0.0]), other)
    )
    assert diff > 1e-3


def test_characteristic_normalization_and_bound(line):
    g, psi = line
    assert characteristic(psi, 0.0, 0.0) == pytest.approx(1.0, abs=1e-10)
    rng = np.random.default_rng(4)
    for _ in range(20):
        val = characteristic(psi, rng.normal(), rng.normal())
        assert abs(val) <= 1.0 + 1e-10


def test_characteristic_gaussian_closed_form(line):
    g, psi = line
    # independent oracle: plain Riemann sum of the defining integral with
    # analytically evaluated half-shifted Gaussians (no spectral machinery)
    def oracle(k, q):
        x = g.axis_coordinates()
        amp = (2 * np.pi) ** -0.25
        plus = amp * np.exp(-((x + q / 2) ** 2) / 4)
        minus = amp * np.exp(-((x - q / 2) ** 2) / 4)
        return np.sum(np.exp(1j * k * x) * plus * minus) * g.dq

    assert oracle(1.0, 0.0) == pytest.approx(np.exp(-0.5), rel=1e-10)
    assert characteristic(psi, 1.0, 0.0) == pytest.approx(np.exp(-0.5), abs=1e-10)
    for k, q in [(0.5, 1.0), (1.7, -0.8), (2.0, 2.0)]:
        closed = np.exp(-(k**2) / 2) * np.exp(-(q**2) / 8)
        assert characteristic(psi, k, q) == pytest.approx(closed, abs=1e-10)
        assert oracle(k, q) == pytest.approx(closed, abs=1e-10)


def test_characteristic_conjugate_symmetry(line):
    g, psi0 = line
    psi = sample_gaussian(g, 1.0, center=[0.4], k0=[1.1])
    rng = np.random.default_rng(8)
    for _ in range(10):
        k, q = rng.normal(size=2)
        assert np.conj(characteristic(psi, k, q)) == pytest.approx(
            characteristic(psi, -k, -q), abs=1e-10
        )


def test_ftochar_consistency(line):
    # F(f, a, b) = sum_k ftil(k) e^{-i k (a+b)/2} chi(k, b-a) dk
    g, psi = line
    rng = np.random.default_rng(6)
    q = g.axis_coordinates()
    kvec = g.axis_wavevectors()
    worst = 0.0
    for _ in range(50):
        f = rng.normal() * np.exp(-(q**2) / 6) + rng.normal() * np.exp(-(q**2) / 9) * np.cos(q)
        a, b = rng.normal(size=2)
        direct = correlation_fxy(f, SHIFT([a]), SHIFT([b]), psi)
        ftil = forward(Wavefunction(g, f)).values
        chis = characteristic_many(psi, kvec[:, None], [b - a])
        via_chi = np.sum(ftil * np.exp(-0.5j * kvec * (a + b)) * chis) * g.dk
        worst = max(worst, abs(direct - via_chi) / max(abs(direct), 1e-12))
    assert worst < 1e-8


def test_wigner_gaussian_closed_form(line):
    g, psi = line
    assert wigner(psi, 0.0, 0.0) == pytest.approx(2.0, abs=1e-10)
    for q, k in [(0.5, 0.3), (-1.2, 0.9), (2.0, -1.5)]:
        closed = 2.0 * np.exp(-(q**2) / 2) * np.exp(-2.0 * k**2)
        assert wigner(psi, q, k) == pytest.approx(closed, abs=1e-10)


def test_wigner_real(line):
    g, _ = line
    psi = sample_gaussian(g, 1.0, center=[0.6], k0=[1.5])
    rng = np.random.default_rng(9)
    for _ in range(10):
        q, k = rng.normal(size=2)
        val = complex(wigner_many(psi, [q], np.array([[k]]))[0])
        assert abs(val.imag) < 1e-10


def test_wigner_marginals():
    g = make_grid(1, 128, 24.0)
    psi = sample_gaussian(g, 1.0, center=[0.4], k0=[1.0])
    marg_q, marg_k = wigner_marginals(psi)
    np.testing.assert_allclose(marg_q, np.abs(psi.values) ** 2, atol=1e-8)
    ft = forward(psi)
    np.testing.assert_allclose(
        marg_k, (2 * np.pi) ** g.dim * np.abs(ft.values) ** 2, atol=1e-8
    )


def test_wigner_superposition_negativity(line):
    g, _ = line
    d = 4.0  # centers at +-d with d = 4 lam
    a = sample_gaussian(g, 1.0, center=[d])
    b = sample_gaussian(g, 1.0, center=[-d])
    cat = normalize(a.with_values(a.values + b.values))
    ks = np.linspace(-3.0, 3.0, 121)[:, None]
    mid = wigner_many(cat, [0.0], ks).real
    peak = wigner(cat, d, 0.0)
    assert np.min(mid) < -0.1 * peak


def test_wigner_chi_fourier_pairing():
    # rho(q, k) = (2 pi)^-n sum_{k', q'} e^{-i k' q} e^{i k q'} chi(k', q') dk' dq'
    # (box must hold the slow e^{-q'^2/8} tail of chi for off-lattice k)
    g = make_grid(1, 128, 24.0)
    psi = sample_gaussian(g, 1.0, center=[0.3])
    kvec = g.axis_wavevectors()
    qvec = g.axis_coordinates()
    chi_grid = np.stack([characteristic_many(psi, kvec[:, None], [qv]) for qv in qvec], axis=1)
    # chi_grid[i, j] = chi(k_i, q_j)
    for q0, k0 in [(0.0, 0.0), (0.5, 0.25), (-0.75, 1.0)]:
        phases = np.exp(-1j * kvec[:, None] * q0) * np.exp(1j * k0 * qvec[None, :])
        via_chi = np.sum(phases * chi_grid) * g.dk * g.dq / (2 * np.pi)
        direct = wigner(psi, q0, k0)
        assert complex(via_chi) == pytest.approx(direct, abs=1e-8)


def test_wigner_lattice_row_matches_scalar(line):
    g, psi = line
    row = wigner_lattice_k(psi, [0.5]).real
    kvec = g.axis_wavevectors()
    for idx in (0, 3, 50):
        assert row[idx] == pytest.approx(wigner(psi, 0.5, kvec[idx]), abs=1e-12)


def test_phase_space_table_defaults(line):
    g, psi = line
    table = phase_space_table(psi, "characteristic")
    assert table.values.shape == (33 * 33,)
    s = position_spread(psi)
    assert s == pytest.approx(1.0, abs=1e-6)
    assert np.max(np.abs(table.k_points)) == pytest.approx(4.0 / s, rel=1e-6)
    assert np.max(np.abs(table.q_points)) == pytest.approx(4.0 * s, rel=1e-6)
    # stored symmetric pairs satisfy conj chi(k, q) = chi(-k, -q)
    vals = table.values.reshape(33, 33)
    np.testing.assert_allclose(np.conj(vals), vals[::-1, ::-1], atol=1e-10)
    csv = table.to_csv()
    assert csv.splitlines()[0] == "k1,q1,re,im"
    assert len(csv.splitlines()) == 1 + 33 * 33


def test_twisted_posdef(line):
    g, psi = line
    assert twisted_posdef_min_eig(lambda k, q: characteristic(psi, k, q), [((0.0,), (0.0,))]) == pytest.approx(1.0, abs=1e-10)
    rng = np.random.default_rng(12)
    pts = [(rng.normal(), rng.normal()) for _ in range(16)]
    assert twisted_posdef_min_eig(lambda k, q: characteristic(psi, k, q), pts) > -1e-8


def test_twisted_posdef_detects_fake():
    fake = lambda k, q: 1.0 if (abs(float(np.atleast_1d(k)[0])) < 1e-12 and abs(float(np.atleast_1d(q)[0])) < 1e-12) else 1.5
    val = twisted_posdef_min_eig(fake, [((0.0,), (0.0,)), ((1.0,), (0.5,))])
    assert val < -0.4


def test_twisted_posdef_rejects_nonhermitian():
    bad = lambda k, q: 1.0 + float(np.atleast_1d(k)[0])  # breaks conj symmetry
    with pytest.raises(ValueError):
        twisted_posdef_min_eig(bad, [((0.0,), (0.0,)), ((1.0,), (0.0,))])


def test_chi_inversion(line):
    g, psi = line
    oracle = lambda f, a, b: shift_correlation(f, a, b, psi)
    assert chi_from_correlations(oracle, [0.0], [0.0], g) == pytest.approx(1.0, abs=1e-8)
    got = chi_from_correlations(oracle, [1.0], [0.0], g)
    assert got == pytest.approx(np.exp(-0.5), abs=1e-6)
    got = chi_from_correlations(oracle, [2.5], [0.7], g)
    assert got == pytest.approx(characteristic(psi, 2.5, 0.7), abs=1e-6)


def test_chi_inversion_budget(line):
    g, _ = line
    assert CHI_WAVEVECTOR_BUDGET == 4.0
    with pytest.raises(ValueError):
        chi_from_correlations(lambda f, a, b: 0.0, [8.0], [0.0], g)


def test_rotation_reduction_2d():
    g = make_grid(2, 32, 10.0)
    lam = 1.25
    mesh = g.coordinate_mesh()
    r2 = sum(m**2 for m in mesh)
    psi = Wavefunction(g, (2 * np.pi * lam**2) ** -0.5 * np.exp(-r2 / (4 * lam**2)))
    table = shift_correlation_table(psi)
    f = np.exp(-r2 / 6) * (1 + 0.4 * np.cos(mesh[0]))
    quarter = rotation_matrix(2, None, np.pi / 2)
    a = np.array([2 * g.dq, -g.dq])
    b = np.array([g.dq, g.dq])
    cases = [
        (EuclideanElement(a, quarter), EuclideanElement(b, np.eye(2))),
        (EuclideanElement(a, np.eye(2)), EuclideanElement(b, np.eye(2))),
        (EuclideanElement(a, quarter), EuclideanElement(b, quarter.T)),
    ]
    for x, y in cases:
        red = rotation_correlation_reduction(f, x, y, table, g)
        direct = correlation_fxy(f, x, y, psi)
        assert abs(red - direct) < 1e-4
    zero = rotation_correlation_reduction(np.zeros(g.shape), cases[0][0], cases[0][1], table, g)
    assert abs(zero) == 0.0


def test_rotation_reduction_guards():
    g = make_grid(2, 32, 10.0)
    psi = sample_gaussian(g, 1.25)
    table = shift_correlation_table(psi)
    f = gaussian_probe(g)
    tilted = EuclideanElement([0.0, 0.0], rotation_matrix(2, None, 0.3))
    with pytest.raises(ValueError):
        rotation_correlation_reduction(f, tilted, EuclideanElement.identity(2), table, g)


def test_probe_normalization():
    g = make_grid(1, 512, 40.0)
    gp = gaussian_probe(g)
    assert np.sum(gp) * g.dq == pytest.approx(1.0, rel=1e-12)


def test_characteristic_and_wigner_2d():
    # dimension-generic paths: closed forms for a displaced 2D Gaussian
    # (the rho integrand has twice the state's width, hence the roomy box)
    g = make_grid(2, 128, 24.0)
    center = np.array([0.2, -0.1])
    psi = sample_gaussian(g, 1.0, center=center)
    for k, q in [((0.7, -0.3), (0.5, 0.2)), ((1.0, 0.0), (0.0, 1.0))]:
        k, q = np.array(k), np.array(q)
        chi = characteristic(psi, k, q)
        chi_ref = (np.exp(1j * k @ center) * np.exp(-(k @ k) / 2)
                   * np.exp(-(q @ q) / 8))
        assert chi == pytest.approx(chi_ref, abs=1e-10)
        qr = q - center
        rho_ref = 4.0 * np.exp(-(qr @ qr) / 2) * np.exp(-2.0 * (k @ k))
        assert wigner(psi, q, k) == pytest.approx(rho_ref, abs=1e-7)


def test_wigner_marginals_2d():
    g = make_grid(2, 32, 16.0)
    psi = sample_gaussian(g, 2.0)
    marg_q, marg_k = wigner_marginals(psi)
    np.testing.assert_allclose(marg_q, np.abs(psi.values) ** 2, atol=1e-10)
    ft = forward(psi)
    np.testing.assert_allclose(marg_k, (2 * np.pi) ** 2 * np.abs(ft.values) ** 2, atol=1e-10)


def test_rotation_reduction_1d_consistency():
    g = make_grid(1, 64, 12.0)
    q = g.axis_coordinates()
    psi = Wavefunction(g, (2 * np.pi) ** -0.25 * np.exp(-(q**2) / 4))
    table = shift_correlation_table(psi)
    f = np.exp(-(q**2) / 5) * (1 + 0.3 * np.sin(q))
    x = EuclideanElement([2 * g.dq], np.eye(1))
    y = EuclideanElement([-g.dq], np.eye(1))
    red = rotation_correlation_reduction(f, x, y, table, g)
    direct = correlation_fxy(f, x, y, psi)
    assert abs(red - direct) < 1e-8
