"""A quantum particle on the circle: compact configuration space S^1.

Angles live on the lattice alpha_j = 2 pi j / N.  The rotation unitaries
U(alpha') psi(alpha) = psi(alpha - alpha' mod 2 pi) act spectrally and are
exact for any real angle.  Their generator K (U(alpha) = e^{-i alpha K},
note the minus sign) has the integer spectrum; with the convention here
the lattice modes are the integers in (-N/2, N/2].  The free frequency
operator Omega = (c / 2 kappa) K^2 has eigenvalues n^2 c / 2 kappa, each
twofold degenerate except n = 0, and basis states are stationary.

The position operator multiplies by alpha in [0, 2 pi); its seam
discontinuity at alpha = 0 means the canonical commutation relation
i[K, Q] = 1 holds on the lattice only for states that vanish (with their
derivatives) at the seam.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import _is_power_of_two, _locked


@dataclass(frozen=True)
class CircleGrid:
    """Uniform angle lattice 2 pi j / N on [0, 2 pi)."""

    points: int

    def __post_init__(self):
        if self.points < 4 or not _is_power_of_two(self.points):
            raise ValueError(f"points must be a power of two >= 4, got {self.points}")

    @property
    def spacing(self) -> float:
        return 2.0 * np.pi / self.points

    def angles(self) -> np.ndarray:
        return self.spacing * np.arange(self.points)

    def modes(self) -> np.ndarray:
        """Integer wavenumbers in (-N/2, N/2], FFT storage order."""
        n = self.points
        m = np.fft.fftfreq(n, d=1.0 / n)
        m[n // 2] = n // 2  # Nyquist assigned to +N/2
        return m.astype(int)


@dataclass(frozen=True)
class CircleWavefunction:
    grid: CircleGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.shape != (self.grid.points,):
            raise ValueError(f"expected {self.grid.points} samples, got {values.shape}")
        object.__setattr__(self, "values", _locked(values))

    def with_values(self, values) -> "CircleWavefunction":
        return CircleWavefunction(self.grid, values)


def circle_inner(phi: CircleWavefunction, psi: CircleWavefunction) -> complex:
    if phi.grid != psi.grid:
        raise ValueError("operands live on different circle grids")
    return complex(np.vdot(phi.values, psi.values) * phi.grid.spacing)


def circle_norm(psi: CircleWavefunction) -> float:
    return float(np.sqrt(np.sum(np.abs(psi.values) ** 2) * psi.grid.spacing))


def circle_basis(n: int, grid: CircleGrid) -> CircleWavefunction:
    """Orthonormal basis state psi_n(alpha) = (2 pi)^{-1/2} e^{i n alpha}."""
    if abs(n) >= grid.points // 2:
        raise ValueError(f"mode {n} aliases on a {grid.points}-point lattice")
    return CircleWavefunction(
        grid, np.exp(1j * n * grid.angles()) / np.sqrt(2.0 * np.pi)
    )


def circle_rotate(alpha_prime: float, psi: CircleWavefunction) -> CircleWavefunction:
    """U(alpha') psi(alpha) = psi(alpha - alpha' mod 2 pi), exact spectrally."""
    if alpha_prime == 0.0:
        return psi
    modes = psi.grid.modes()
    ft = np.fft.fft(psi.values)
    return psi.with_values(np.fft.ifft(np.exp(-1j * modes * alpha_prime) * ft))


def circle_k_apply(psi: CircleWavefunction) -> CircleWavefunction:
    """K psi: multiplication by the integer mode number in Fourier space."""
    modes = psi.grid.modes()
    return psi.with_values(np.fft.ifft(modes * np.fft.fft(psi.values)))


def circle_position_apply(psi: CircleWavefunction) -> CircleWavefunction:
    """Q psi(alpha) = alpha psi(alpha) with alpha in [0, 2 pi)."""
    return psi.with_values(psi.grid.angles() * psi.values)


def circle_evolve(t: float, psi: CircleWavefunction, kappa: float, c: float = 1.0) -> CircleWavefunction:
    """Free evolution: mode n picks up e^{-i (n^2 c / 2 kappa) t}."""
    if kappa == 0.0:
        raise ValueError("kappa must be nonzero")
    modes = psi.grid.modes()
    phase = np.exp(-1j * (modes.astype(float) ** 2 * c / (2.0 * kappa)) * t)
    return psi.with_values(np.fft.ifft(phase * np.fft.fft(psi.values)))


def circle_correlation_closed_form(f: np.ndarray, alpha1: float, alpha2: float,
                                   n: int, grid: CircleGrid) -> complex:
    """F(f, a', a'') = e^{i n (a' - a'')} (2 pi)^{-1} int f(alpha) d alpha."""
    f = np.asarray(f)
    mean = np.sum(f) * grid.spacing / (2.0 * np.pi)
    return complex(np.exp(1j * n * (alpha1 - alpha2)) * mean)


def circle_correlation_direct(f: np.ndarray, alpha1: float, alpha2: float,
                              n: int, grid: CircleGrid) -> complex:
    """< U(a'')^* psi_n | f^ | U(a')^* psi_n > evaluated on the lattice."""
    psi = circle_basis(n, grid)
    ket = circle_rotate(-alpha1, psi)
    bra = circle_rotate(-alpha2, psi)
    return circle_inner(bra, ket.with_values(np.asarray(f) * ket.values))


def circle_k_matrix(grid: CircleGrid) -> np.ndarray:
    """Dense matrix of K on the lattice; its spectrum is (-N/2, N/2] exactly."""
    n = grid.points
    eye = np.eye(n, dtype=complex)
    cols = [circle_k_apply(CircleWavefunction(grid, eye[:, j])).values for j in range(n)]
    return np.stack(cols, axis=1)


def circle_spectrum(grid: CircleGrid, kappa: float, c: float = 1.0) -> list[dict]:
    """(n, K eigenvalue, Omega eigenvalue) rows for every basis mode."""
    half = grid.points // 2
    rows = []
    for n in range(-(half - 1), half):
        rows.append(
            {"n": n, "k_eigenvalue": float(n), "omega_eigenvalue": n * n * c / (2.0 * kappa)}
        )
    return rows


def circle_bump(grid: CircleGrid, center: float = np.pi, width: float = 0.35) -> CircleWavefunction:
    """Normalized Gaussian bump vanishing (to machine precision) at the seam."""
    alphas = grid.angles()
    vals = np.exp(-((alphas - center) ** 2) / (2.0 * width**2))
    psi = CircleWavefunction(grid, vals)
    return psi.with_values(vals / circle_norm(psi))
