"""Expectation values, correlation functions and phase-space diagnostics.

The central objects are

    F(f, x, y)  = < U(y)* psi | f^ | U(x)* psi >        (correlation)
    chi(k, q)   = sum_q' e^{i k.q'} conj(psi(q'+q/2)) psi(q'-q/2) dq^n
    rho(q, k)   = sum_q' e^{i k.q'} conj(psi(q+q'/2)) psi(q-q'/2) dq^n

The q/2 offsets are generally off lattice, so both chi and rho are
computed with exact spectral machinery: arbitrary real shifts for chi,
and a two-fold band-limited upsampling for the half-lattice arguments of
rho.  Nothing here interpolates by index arithmetic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .fourier import forward
from .grid import GridSpec, Wavefunction, inner, norm
from .operators import (
    EuclideanElement,
    as_lattice_rotation,
    euclidean_adjoint_apply,
    multiply,
    position_apply,
    shift,
)

_REDUCTION_CAP = 2**22


def expectation(f: np.ndarray, psi: Wavefunction) -> complex:
    """<f^> = sum_q f(q) |psi(q)|^2 dq^n for a normalized state."""
    f = np.asarray(f)
    if f.shape != psi.grid.shape:
        raise ValueError(f"function shape {f.shape} does not match grid {psi.grid.shape}")
    return complex(np.sum(f * np.abs(psi.values) ** 2) * psi.grid.cell_volume)


@dataclass(frozen=True)
class CorrelationQuery:
    """A correlation probe: function samples f plus two euclidean elements."""

    f: np.ndarray
    x: EuclideanElement
    y: EuclideanElement


def correlation(query: CorrelationQuery, psi: Wavefunction) -> complex:
    between = multiply(np.asarray(query.f), euclidean_adjoint_apply(query.x, psi))
    return inner(euclidean_adjoint_apply(query.y, psi), between)


def correlation_fxy(f: np.ndarray, x: EuclideanElement, y: EuclideanElement,
                    psi: Wavefunction) -> complex:
    return correlation(CorrelationQuery(np.asarray(f), x, y), psi)


def shift_correlation(f: np.ndarray, a, b, psi: Wavefunction) -> complex:
    """F(f, a, b) with pure shifts, the workhorse of the inversion exercises."""
    dim = psi.grid.dim
    return correlation_fxy(
        f, EuclideanElement.shift_only(np.broadcast_to(np.asarray(a, float), (dim,))),
        EuclideanElement.shift_only(np.broadcast_to(np.asarray(b, float), (dim,))), psi
    )


# --- characteristic function -------------------------------------------------

def _phase_sum(grid: GridSpec, u: np.ndarray, k_points: np.ndarray) -> np.ndarray:
    """sum_q' e^{i k.q'} u(q') dq^n for each row k of k_points."""
    pts = grid.coordinate_points()
    return np.exp(1j * k_points @ pts.T) @ u.ravel() * grid.cell_volume


def characteristic_many(psi: Wavefunction, k_points: np.ndarray, q) -> np.ndarray:
    """chi(k, q) for a batch of wavevectors at one phase-space offset q."""
    grid = psi.grid
    q = np.broadcast_to(np.atleast_1d(np.asarray(q, float)), (grid.dim,))
    k_points = np.atleast_2d(np.asarray(k_points, float))
    plus = shift(-0.5 * q, psi)   # psi(q' + q/2)
    minus = shift(0.5 * q, psi)   # psi(q' - q/2)
    u = np.conj(plus.values) * minus.values
    return _phase_sum(grid, u, k_points)


def characteristic(psi: Wavefunction, k, q) -> complex:
    grid = psi.grid
    k = np.broadcast_to(np.atleast_1d(np.asarray(k, float)), (grid.dim,))
    return complex(characteristic_many(psi, k[None, :], q)[0])


# --- Wigner function ---------------------------------------------------------

def _upsample2(values: np.ndarray) -> np.ndarray:
    """Exact band-limited refinement onto the half-step lattice."""
    n = values.shape[0]
    dim = values.ndim
    spectrum = np.fft.fftshift(np.fft.fftn(values))
    shape = tuple(2 * s for s in values.shape)
    padded = np.zeros(shape, dtype=np.complex128)
    center = tuple(slice(n // 2, n // 2 + n) for _ in range(dim))
    padded[center] = spectrum
    return np.fft.ifftn(np.fft.ifftshift(padded)) * 2**dim


def _half_shift_product(psi: Wavefunction, q) -> np.ndarray:
    """u(q') = conj(psi(q + q'/2)) psi(q - q'/2) on the q' lattice."""
    grid = psi.grid
    q = np.broadcast_to(np.atleast_1d(np.asarray(q, float)), (grid.dim,))
    phi = shift(-q, psi)  # phi(x) = psi(x + q)
    fine = _upsample2(phi.values)
    n = grid.points_per_axis
    # q'_i = -L/2 + i dq sits at fine index i + N/2; its negative at -(that).
    idx = (np.arange(n) + n // 2) % (2 * n)
    neg = (-idx) % (2 * n)
    plus = fine[np.ix_(*([idx] * grid.dim))]
    minus = fine[np.ix_(*([neg] * grid.dim))]
    return np.conj(plus) * minus


def wigner_many(psi: Wavefunction, q, k_points: np.ndarray) -> np.ndarray:
    """rho(q, k) for a batch of wavevectors at one position q (real parts)."""
    u = _half_shift_product(psi, q)
    k_points = np.atleast_2d(np.asarray(k_points, float))
    vals = _phase_sum(psi.grid, u, k_points)
    return vals


def wigner(psi: Wavefunction, q, k) -> float:
    grid = psi.grid
    k = np.broadcast_to(np.atleast_1d(np.asarray(k, float)), (grid.dim,))
    val = complex(wigner_many(psi, q, k[None, :])[0])
    return val.real


def wigner_lattice_k(psi: Wavefunction, q) -> np.ndarray:
    """rho(q, k) on the full wavevector lattice (FFT order), one FFT."""
    grid = psi.grid
    u = _half_shift_product(psi, q)
    from .fourier import _alternating_sign

    sign = _alternating_sign(grid)
    # sum_q' u e^{+i k q'} dq^n = conj(transform of conj(u))
    return np.conj(sign * np.fft.fftn(np.conj(u))) * grid.cell_volume


def wigner_marginals(psi: Wavefunction) -> tuple[np.ndarray, np.ndarray]:
    """((2pi)^-n int rho dk over lattice q, (2pi)^-n int rho dq over lattice k).

    The first should reproduce |psi(q)|^2, the second (2pi)^n |psit(k)|^2.
    """
    grid = psi.grid
    if grid.total_points > 16384:
        raise ValueError("marginal sweep is desk scale: N^dim <= 16384")
    two_pi_n = (2.0 * np.pi) ** grid.dim
    marg_q = np.empty(grid.shape)
    marg_k = np.zeros(grid.shape)
    for flat in range(grid.total_points):
        idx = np.unravel_index(flat, grid.shape)
        qpt = np.array([grid.axis_coordinates()[i] for i in idx])
        row = wigner_lattice_k(psi, qpt).real
        marg_q[idx] = np.sum(row) * grid.k_cell_volume / two_pi_n
        marg_k += row * grid.cell_volume / two_pi_n
    return marg_q, marg_k


# --- sampled tables ----------------------------------------------------------

def position_spread(psi: Wavefunction) -> float:
    """Mean-over-axes position standard deviation of the state."""
    grid = psi.grid
    n2 = norm(psi) ** 2
    sigmas = []
    for j in range(1, grid.dim + 1):
        qpsi = position_apply(j, psi)
        mean = inner(psi, qpsi).real / n2
        mean2 = inner(qpsi, qpsi).real / n2
        sigmas.append(np.sqrt(max(mean2 - mean**2, 0.0)))
    return float(np.mean(sigmas))


@dataclass(frozen=True)
class PhaseSpaceTable:
    """Sampled chi(k, q) or rho(q, k) values with their sample points."""

    kind: str  # "characteristic" | "wigner"
    k_points: np.ndarray  # (m, dim)
    q_points: np.ndarray  # (m, dim)
    values: np.ndarray  # (m,) complex for chi, real for rho
    grid: GridSpec

    def to_csv(self, reference: np.ndarray | None = None) -> str:
        dim = self.grid.dim
        head = [f"k{j + 1}" for j in range(dim)] + [f"q{j + 1}" for j in range(dim)]
        head += ["re", "im"]
        if reference is not None:
            head += ["ref_re", "ref_im", "abs_err"]
        lines = [",".join(head)]
        vals = np.asarray(self.values, dtype=complex)
        for i in range(vals.size):
            row = [f"{c:.17g}" for c in self.k_points[i]]
            row += [f"{c:.17g}" for c in self.q_points[i]]
            row += [f"{vals[i].real:.17g}", f"{vals[i].imag:.17g}"]
            if reference is not None:
                ref = complex(reference[i])
                row += [f"{ref.real:.17g}", f"{ref.imag:.17g}", f"{abs(vals[i] - ref):.17g}"]
            lines.append(",".join(row))
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        payload = {
            "kind": self.kind,
            "grid": {"dim": self.grid.dim, "N": self.grid.points_per_axis, "L": self.grid.box_length},
            "k_points": self.k_points.tolist(),
            "q_points": self.q_points.tolist(),
            "re": np.asarray(self.values, complex).real.tolist(),
            "im": np.asarray(self.values, complex).imag.tolist(),
        }
        return json.dumps(payload, sort_keys=True)


def default_sample_axes(psi: Wavefunction, points_per_axis: int = 33) -> tuple[np.ndarray, np.ndarray]:
    """Default 1D sweeps: k in [-4/s, 4/s], q in [-4s, 4s], s the position spread."""
    s = position_spread(psi)
    ks = np.linspace(-4.0 / s, 4.0 / s, points_per_axis)
    qs = np.linspace(-4.0 * s, 4.0 * s, points_per_axis)
    return ks, qs


def phase_space_table(psi: Wavefunction, kind: str, points_per_axis: int = 33) -> PhaseSpaceTable:
    """Product table over the default axis-1 sweeps (other components zero)."""
    grid = psi.grid
    ks, qs = default_sample_axes(psi, points_per_axis)
    k_rows, q_rows, values = [], [], []
    zero_tail = np.zeros(grid.dim - 1)
    for qval in qs:
        qvec = np.concatenate(([qval], zero_tail))
        k_batch = np.stack([np.concatenate(([kv], zero_tail)) for kv in ks])
        if kind == "characteristic":
            vals = characteristic_many(psi, k_batch, qvec)
        elif kind == "wigner":
            vals = wigner_many(psi, qvec, k_batch).real
        else:
            raise ValueError(f"unknown table kind {kind!r}")
        k_rows.append(k_batch)
        q_rows.append(np.repeat(qvec[None, :], len(ks), axis=0))
        values.append(vals)
    return PhaseSpaceTable(
        kind=kind,
        k_points=np.concatenate(k_rows),
        q_points=np.concatenate(q_rows),
        values=np.concatenate(values),
        grid=grid,
    )


# --- twisted positive definiteness -------------------------------------------

def twisted_posdef_min_eig(chi: Callable, points, herm_tol: float = 1e-10) -> float:
    """Minimum eigenvalue of A[j,j'] = e^{i(k_j.q_j' - k_j'.q_j)/2} chi(k_j'-k_j, q_j'-q_j).

    For chi sampled from a genuine state the matrix is positive
    semidefinite up to discretization noise; a clearly negative
    eigenvalue certifies the table cannot come from any wavefunction.
    """
    pts = [(np.atleast_1d(np.asarray(k, float)), np.atleast_1d(np.asarray(q, float)))
           for k, q in points]
    m = len(pts)
    if not 1 <= m <= 64:
        raise ValueError(f"need between 1 and 64 points, got {m}")
    a = np.empty((m, m), dtype=np.complex128)
    for j, (kj, qj) in enumerate(pts):
        for jp, (kp, qp) in enumerate(pts):
            twist = np.exp(0.5j * (float(kj @ qp) - float(kp @ qj)))
            a[j, jp] = twist * complex(chi(kp - kj, qp - qj))
    if np.max(np.abs(a - a.conj().T)) > herm_tol:
        raise ValueError("sampled matrix is not Hermitian: inconsistent chi source")
    return float(np.linalg.eigvalsh(0.5 * (a + a.conj().T))[0])


# --- inversion exercises -------------------------------------------------------

CHI_WAVEVECTOR_BUDGET = 4.0


def gaussian_probe(grid: GridSpec) -> np.ndarray:
    """The unit-width probe (2 pi)^{-n/2} e^{-|q|^2/2} used by the inversions."""
    mesh = grid.coordinate_mesh()
    r2 = sum(m**2 for m in mesh)
    return (2.0 * np.pi) ** (-grid.dim / 2.0) * np.exp(-0.5 * r2)


def chi_from_correlations(f_oracle: Callable, k, d, grid: GridSpec) -> complex:
    """Recover chi(k, d) from shift correlations alone.

    chi(k, d) = e^{|k|^2/2} sum_c e^{i c.k} F(g, c - d/2, c + d/2) dq^n
    with the Gaussian probe g.  The e^{|k|^2/2} amplification caps usable
    wavevectors at |k| <= 4 (about 3000x), keeping 1e-10 quadrature noise
    below 1e-6.

    f_oracle(f_values, a, b) must return F(f, a, b) for the grid state.
    """
    k = np.broadcast_to(np.atleast_1d(np.asarray(k, float)), (grid.dim,))
    d = np.broadcast_to(np.atleast_1d(np.asarray(d, float)), (grid.dim,))
    kn = float(np.linalg.norm(k))
    if kn > CHI_WAVEVECTOR_BUDGET:
        raise ValueError(
            f"|k|={kn:.3f} exceeds the amplification budget {CHI_WAVEVECTOR_BUDGET}: "
            f"e^(|k|^2/2) would magnify quadrature noise by {np.exp(0.5 * kn * kn):.3g}"
        )
    if grid.dim > 2 or grid.total_points > 4096:
        raise ValueError("correlation inversion is desk scale: dim <= 2 and N^dim <= 4096")
    g = gaussian_probe(grid)
    total = 0.0 + 0.0j
    for c in grid.coordinate_points():
        total += np.exp(1j * float(c @ k)) * complex(f_oracle(g, c - 0.5 * d, c + 0.5 * d))
    return complex(np.exp(0.5 * kn * kn) * total * grid.cell_volume)


def shift_correlation_table(psi: Wavefunction) -> Callable[[np.ndarray], np.ndarray]:
    """Factory for the lattice table F(f, a', b') over all lattice pairs.

    The returned callable maps probe samples to an array of shape
    grid.shape + grid.shape whose [i..., j...] entry is F(f, a'_i, b'_j).
    Rows are assembled with circular rolls (lattice shifts are exact) and
    an FFT cross-correlation over b'.
    """
    grid = psi.grid

    def table(f_values: np.ndarray) -> np.ndarray:
        f_values = np.asarray(f_values)
        vals = psi.values
        out = np.empty(grid.shape + grid.shape, dtype=np.complex128)
        axes = tuple(range(grid.dim))
        for flat in range(grid.total_points):
            idx = np.unravel_index(flat, grid.shape)
            rolled = np.roll(vals, shift=[-i for i in idx], axis=axes)  # psi(q + a')
            h = f_values * rolled
            # row over b': sum_q h(q) conj(psi(q + b')) dq^n, a circular correlation
            out[idx] = _cross_correlate(h, vals) * grid.cell_volume
        return out

    return table


def _cross_correlate(h: np.ndarray, psi_values: np.ndarray) -> np.ndarray:
    """c(b') = sum_q h(q) conj(psi(q + b')) via FFTs, all lattice lags at once."""
    # c(b) = conj(sum_q conj(h(q)) psi(q+b)) = conj(ifft(conj(fft h) . fft psi))(b)
    d = np.fft.ifftn(np.conj(np.fft.fftn(h)) * np.fft.fftn(psi_values))
    return np.conj(d)


def rotation_correlation_reduction(
    f: np.ndarray,
    x: EuclideanElement,
    y: EuclideanElement,
    f_shift_table: Callable[[np.ndarray], np.ndarray],
    grid: GridSpec,
    k_cut: float = 2.8,
) -> complex:
    """Rotated correlation F(f, (a, R), (b, M)) from shift-only correlations.

    F = (2 pi)^-n sum_{k,k'} ftil(M^-1 k' - R^-1 k) e^{i k.a} e^{-i k'.b}
        e^{|k'-k|^2/2} T(k, k') dk^2n ,
    T(k, k') = sum_{a',b'} e^{-i k.a'} e^{i k'.b'} F(g, a', b') dq^2n .

    (The inversion of the shift-correlation transform fixes the constant
    at (2 pi)^-n; it is pinned here by the identity-rotation consistency
    check against the direct correlation.)

    The e^{|k'-k|^2/2} factor amplifies quadrature noise, so the lattice
    sum is restricted to |k|, |k'| <= k_cut; states must have negligible
    spectral mass beyond the cut for the reduction to be meaningful.
    Rotations must be lattice symmetries (the wavevector argument of ftil
    then stays on the lattice).
    """
    dim = grid.dim
    if dim > 2:
        raise ValueError("reduction is desk scale: dim <= 2 only")
    if grid.total_points**2 > _REDUCTION_CAP:
        raise ValueError("lattice pair table would exceed the desk-scale cap")
    for rot in (x.rot, y.rot):
        if as_lattice_rotation(rot, dim) is None:
            raise ValueError("reduction requires lattice-symmetry rotations")
    if k_cut >= 0.5 * grid.k_max:
        raise ValueError("k_cut must stay below half the Nyquist band")

    g = gaussian_probe(grid)
    table = f_shift_table(g)

    # T(k, k') on the full lattice: e^{-i k.a'} over the first axis group,
    # e^{+i k'.b'} over the second.  The table is indexed by roll offset
    # (a' = i dq mod L), and for lattice wavevectors the phases depend on
    # a' only mod L, so these are plain FFTs with no centering phases.
    n_tot = grid.total_points
    t_full = np.fft.fftn(table, axes=tuple(range(dim)))
    t_full = np.fft.ifftn(t_full, axes=tuple(range(dim, 2 * dim))) * n_tot
    t_full = (t_full * grid.cell_volume**2).reshape(n_tot, n_tot)

    ftil = forward(Wavefunction(grid, np.asarray(f, dtype=complex))).values
    kpts = grid.wavevector_points()
    keep = np.nonzero(np.max(np.abs(kpts), axis=1) <= k_cut)[0]
    rinv = x.rot.T
    minv = y.rot.T
    dk = grid.dk
    n = grid.points_per_axis
    total = 0.0 + 0.0j
    for i in keep:
        k = kpts[i]
        for j in keep:
            kp = kpts[j]
            w = minv @ kp - rinv @ k
            widx = tuple((np.rint(w / dk).astype(int)) % n)
            phase = np.exp(1j * (float(k @ x.a) - float(kp @ y.a)))
            gain = np.exp(0.5 * float((kp - k) @ (kp - k)))
            total += ftil[widx] * phase * gain * t_full[i, j]
    vol = grid.k_cell_volume**2
    return complex((2.0 * np.pi) ** (-dim) * total * vol)
