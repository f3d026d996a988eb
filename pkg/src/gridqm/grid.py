"""Discretized configuration space and Hilbert-space primitives.

The configuration space is a periodic box [-L/2, L/2)^dim sampled on a
uniform lattice with N points per axis (N a power of two), so that
dq = L/N and the wavevector lattice spacing is dk = 2*pi/L.  All inner
products are plain Riemann sums times dq^dim, which is spectrally exact
for the band-limited periodic functions this package produces.

Wavefunctions are immutable value objects: the sample array is locked
after construction and every operation returns a fresh object.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

# Total-point cap keeps accidental 3D requests desk sized.
DEFAULT_MAX_POINTS = 2**24


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid over [-L/2, L/2)^dim."""

    dim: int
    points_per_axis: int
    box_length: float

    @property
    def dq(self) -> float:
        return self.box_length / self.points_per_axis

    @property
    def dk(self) -> float:
        return 2.0 * np.pi / self.box_length

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points_per_axis,) * self.dim

    @property
    def total_points(self) -> int:
        return self.points_per_axis**self.dim

    @property
    def cell_volume(self) -> float:
        """Quadrature weight dq^dim of one lattice cell."""
        return self.dq**self.dim

    @property
    def k_cell_volume(self) -> float:
        return self.dk**self.dim

    @property
    def k_max(self) -> float:
        """Nyquist wavevector pi/dq per axis."""
        return np.pi / self.dq

    def axis_coordinates(self) -> np.ndarray:
        """Lattice positions -L/2 + i*dq along one axis."""
        n = self.points_per_axis
        return -0.5 * self.box_length + self.dq * np.arange(n)

    def axis_wavevectors(self) -> np.ndarray:
        """Wavevector lattice m*dk, m in [-N/2, N/2), in FFT storage order."""
        n = self.points_per_axis
        return 2.0 * np.pi * np.fft.fftfreq(n, d=self.dq)

    def coordinate_mesh(self) -> tuple[np.ndarray, ...]:
        axes = [self.axis_coordinates()] * self.dim
        return np.meshgrid(*axes, indexing="ij")

    def wavevector_mesh(self) -> tuple[np.ndarray, ...]:
        axes = [self.axis_wavevectors()] * self.dim
        return np.meshgrid(*axes, indexing="ij")

    def coordinate_points(self) -> np.ndarray:
        """All lattice points as a (total_points, dim) array, row-major."""
        mesh = self.coordinate_mesh()
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def wavevector_points(self) -> np.ndarray:
        mesh = self.wavevector_mesh()
        return np.stack([m.ravel() for m in mesh], axis=-1)


def make_grid(
    dim: int,
    points_per_axis: int,
    box_length: float,
    max_points: int = DEFAULT_MAX_POINTS,
) -> GridSpec:
    """Validated GridSpec constructor."""
    if dim not in (1, 2, 3):
        raise ValueError(f"dim must be 1, 2 or 3, got {dim}")
    if points_per_axis < 4 or not _is_power_of_two(points_per_axis):
        raise ValueError(
            f"points_per_axis must be a power of two >= 4, got {points_per_axis}"
        )
    if not box_length > 0:
        raise ValueError(f"box_length must be positive, got {box_length}")
    if points_per_axis**dim > max_points:
        raise ValueError(
            f"grid of {points_per_axis}^{dim} points exceeds cap {max_points}"
        )
    return GridSpec(dim=dim, points_per_axis=points_per_axis, box_length=float(box_length))


def _locked(values: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(values, dtype=np.complex128)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class Wavefunction:
    """Complex samples of a state on a GridSpec lattice."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        values = self.values
        if values.shape != self.grid.shape:
            if values.size == self.grid.total_points:
                values = values.reshape(self.grid.shape)
            else:
                raise ValueError(
                    f"values shape {self.values.shape} incompatible with grid {self.grid.shape}"
                )
        object.__setattr__(self, "values", _locked(values))

    def with_values(self, values: np.ndarray) -> "Wavefunction":
        return Wavefunction(self.grid, values)


def _check_same_grid(a, b) -> None:
    if a.grid != b.grid:
        raise ValueError("operands live on different grids")


def inner(phi: Wavefunction, psi: Wavefunction) -> complex:
    """Inner product <phi|psi>, antilinear in phi, linear in psi."""
    _check_same_grid(phi, psi)
    return complex(np.vdot(phi.values, psi.values) * phi.grid.cell_volume)


def norm(psi: Wavefunction) -> float:
    return float(np.sqrt(np.sum(np.abs(psi.values) ** 2) * psi.grid.cell_volume))


def normalize(psi: Wavefunction) -> Wavefunction:
    n = norm(psi)
    if n == 0.0:
        raise ValueError("cannot normalize the zero vector")
    return psi.with_values(psi.values / n)


def sample_gaussian(
    grid: GridSpec,
    lam: float,
    center=None,
    k0=None,
) -> Wavefunction:
    """Sample the Gaussian state (2 pi lam^2)^(-n/4) exp(-|q-center|^2/4 lam^2) e^{i k0.q}.

    lam must be resolvable (lam >= 4 dq) and comfortably inside the box
    (lam <= L/8); the modulation wavevector must stay inside half the
    Nyquist band so shifted spectra remain representable.  The samples
    are the exact closed-form values, not renormalized: the unit norm is
    a consequence of the quadrature and holds to ~1e-10 once the tails
    clear the box edge (lam <~ L/10).
    """
    n = grid.dim
    center = np.zeros(n) if center is None else np.atleast_1d(np.asarray(center, float))
    k0 = np.zeros(n) if k0 is None else np.atleast_1d(np.asarray(k0, float))
    if center.shape != (n,) or k0.shape != (n,):
        raise ValueError("center and k0 must match the grid dimension")
    if lam < 4.0 * grid.dq:
        raise ValueError(
            f"lam={lam} under-resolved: need lam >= 4*dq = {4.0 * grid.dq}"
        )
    if lam > grid.box_length / 8.0:
        raise ValueError(
            f"lam={lam} too wide for the box: need lam <= L/8 = {grid.box_length / 8.0}"
        )
    if np.linalg.norm(k0) > 0.5 * grid.k_max:
        raise ValueError(
            f"|k0|={np.linalg.norm(k0)} exceeds half the Nyquist band {0.5 * grid.k_max}"
        )
    mesh = grid.coordinate_mesh()
    r2 = sum((m - c) ** 2 for m, c in zip(mesh, center))
    phase = sum(kj * m for kj, m in zip(k0, mesh))
    amp = (2.0 * np.pi * lam**2) ** (-n / 4.0)
    values = amp * np.exp(-r2 / (4.0 * lam**2)) * np.exp(1j * phase)
    return Wavefunction(grid, values)


# --- columnar text serialization ------------------------------------------
#
# Format: first line is "# " + JSON header {dim, N, L}; every following
# line is "q_1 ... q_n re im" in row-major lattice order, 17 significant
# digits.

def dump_wavefunction(psi: Wavefunction, extra_header: dict | None = None) -> str:
    grid = psi.grid
    meta = {"dim": grid.dim, "N": grid.points_per_axis, "L": grid.box_length}
    if extra_header:
        meta.update(extra_header)
    points = grid.coordinate_points()
    flat = psi.values.ravel()
    lines = ["# " + json.dumps(meta, sort_keys=True)]
    for row, z in zip(points, flat):
        cols = [f"{c:.17g}" for c in row] + [f"{z.real:.17g}", f"{z.imag:.17g}"]
        lines.append(" ".join(cols))
    return "\n".join(lines) + "\n"


def save_wavefunction(path, psi: Wavefunction, extra_header: dict | None = None) -> None:
    with open(path, "w") as fh:
        fh.write(dump_wavefunction(psi, extra_header))


def load_wavefunction(path) -> Wavefunction:
    with open(path) as fh:
        first = fh.readline()
        if not first.startswith("#"):
            raise ValueError("missing JSON header line")
        meta = json.loads(first.lstrip("#").strip())
        grid = make_grid(int(meta["dim"]), int(meta["N"]), float(meta["L"]))
        data = np.loadtxt(fh)
    data = np.atleast_2d(data)
    if data.shape != (grid.total_points, grid.dim + 2):
        raise ValueError(f"expected {grid.total_points} rows of {grid.dim + 2} columns")
    values = data[:, -2] + 1j * data[:, -1]
    return Wavefunction(grid, values.reshape(grid.shape))
