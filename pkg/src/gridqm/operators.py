"""The standard representation: multiplication, shift, rotation and Weyl unitaries.

Conventions fixed here and used everywhere else:

    shift:   U(a) psi(q) = psi(q - a),   spectrally:  psit(k) -> e^{-i k.a} psit(k)
    rotate:  U(a, R) psi(q) = psi(R^-1 (q - a))
    K_j:     shift generator, K_j psi = -i d psi/dq_j  (k_j in k-space);
             U(a) = e^{-i a.K}
    Q_j:     multiplication by the principal coordinate q_j in [-L/2, L/2)
    weyl:    e^{i(k.Q - a.K)} = e^{-i k.a/2} * multiply(e^{i k.q}) o shift(a)

Shifts act through exact spectral phases, so arbitrary real shift vectors
are unitary to machine precision.  Rotations are exact index permutations
for signed-permutation matrices ("lattice rotations"); any other rotation
falls back to trigonometric resampling, which is band-limited-exact but
accumulates roundoff at the 1e-10 level and is guarded by a size cap.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .fourier import forward, inverse
from .grid import GridSpec, Wavefunction, inner, norm

_ORTHO_TOL = 1e-12


def rotation_matrix(dim: int, axis, angle: float) -> np.ndarray:
    """Right-handed rotation by `angle`; `axis` is 1-based in 3D, ignored in 2D."""
    c, s = np.cos(angle), np.sin(angle)
    if dim == 2:
        return np.array([[c, -s], [s, c]])
    if dim == 3:
        j = int(axis) - 1
        if j not in (0, 1, 2):
            raise ValueError(f"axis must be 1, 2 or 3, got {axis}")
        others = [i for i in range(3) if i != j]
        out = np.eye(3)
        out[others[0], others[0]] = c
        out[others[0], others[1]] = -s
        out[others[1], others[0]] = s
        out[others[1], others[1]] = c
        return out
    raise ValueError("rotations need dim >= 2")


def check_rotation(mat: np.ndarray, dim: int) -> np.ndarray:
    mat = np.asarray(mat, dtype=float)
    if mat.shape != (dim, dim):
        raise ValueError(f"rotation must be {dim}x{dim}, got {mat.shape}")
    if np.max(np.abs(mat.T @ mat - np.eye(dim))) > 1e-10:
        raise ValueError("matrix is not orthogonal")
    if abs(np.linalg.det(mat) - 1.0) > 1e-10:
        raise ValueError("matrix is not a proper rotation (det != +1)")
    return mat


@dataclass(frozen=True)
class EuclideanElement:
    """Group element (a, R): shift vector a after rotation R."""

    a: np.ndarray
    rot: np.ndarray

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.a, dtype=float))
        rot = check_rotation(self.rot, a.size)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "rot", rot)

    @staticmethod
    def identity(dim: int) -> "EuclideanElement":
        return EuclideanElement(np.zeros(dim), np.eye(dim))

    @staticmethod
    def shift_only(a) -> "EuclideanElement":
        a = np.atleast_1d(np.asarray(a, dtype=float))
        return EuclideanElement(a, np.eye(a.size))

    def compose(self, other: "EuclideanElement") -> "EuclideanElement":
        """(b, M)(a, R) = (b + M a, M R)."""
        return EuclideanElement(self.a + self.rot @ other.a, self.rot @ other.rot)

    def inverse(self) -> "EuclideanElement":
        rinv = self.rot.T
        return EuclideanElement(-rinv @ self.a, rinv)


# --- elementary actions -----------------------------------------------------

def multiply(f: np.ndarray, psi: Wavefunction) -> Wavefunction:
    """Multiplication operator: (f^ psi)(q) = f(q) psi(q)."""
    f = np.asarray(f)
    if f.shape != psi.grid.shape:
        raise ValueError(f"function shape {f.shape} does not match grid {psi.grid.shape}")
    return psi.with_values(f * psi.values)


def shift(a, psi: Wavefunction) -> Wavefunction:
    """Exact spectral shift, psi(q) -> psi(q - a), for any real vector a."""
    grid = psi.grid
    a = np.atleast_1d(np.asarray(a, dtype=float))
    if a.shape != (grid.dim,):
        raise ValueError(f"shift vector must have {grid.dim} components")
    if not np.any(a):
        return psi
    ft = forward(psi)
    mesh = grid.wavevector_mesh()
    phase = np.exp(-1j * sum(aj * m for aj, m in zip(a, mesh)))
    return inverse(ft.with_values(ft.values * phase))


def as_lattice_rotation(rot: np.ndarray, dim: int):
    """Return (perm, signs) if rot is a signed permutation, else None."""
    rot = np.asarray(rot, dtype=float)
    perm = np.zeros(dim, dtype=int)
    signs = np.zeros(dim, dtype=int)
    for row in range(dim):
        nz = np.nonzero(np.abs(rot[row]) > 0.5)[0]
        if nz.size != 1:
            return None
        col = nz[0]
        val = rot[row, col]
        rest = np.delete(rot[row], col)
        if abs(abs(val) - 1.0) > _ORTHO_TOL or (rest.size and np.max(np.abs(rest)) > _ORTHO_TOL):
            return None
        perm[row] = col
        signs[row] = 1 if val > 0 else -1
    if len(set(perm.tolist())) != dim:
        return None
    return perm, signs


def _apply_lattice_rotation(rot: np.ndarray, psi: Wavefunction) -> Wavefunction:
    # psi'(q) = psi(R^-1 q); R^-1 q has axis j equal to sign_j * q_perm_j,
    # where (perm, signs) describe R^-1 = R^T.  Negation on the periodic
    # lattice is the index map i -> (-i) mod N.
    grid = psi.grid
    dim = grid.dim
    inv = as_lattice_rotation(np.asarray(rot).T, dim)
    perm, signs = inv
    n = grid.points_per_axis
    idx_out = np.indices(grid.shape)
    src = []
    for j in range(dim):
        ij = idx_out[perm[j]]
        if signs[j] < 0:
            ij = (-ij) % n
        src.append(ij)
    # src[j] is the lattice index of (R^-1 q)_j expressed on axis j of psi:
    # gather psi at index vector (src[0], ..., src[n-1]).
    return psi.with_values(psi.values[tuple(src)])


def _shear(values: np.ndarray, grid: GridSpec, move_axis: int, drive_axis: int,
           s: float) -> np.ndarray:
    """psi(q) -> psi(q - s*q_drive along move_axis), an exact spectral shear.

    Row-wise circular shift by s times the driving coordinate; every row
    shift is an exact trigonometric interpolation of that row.
    """
    if s == 0.0:
        return values
    k = grid.axis_wavevectors()
    q = grid.axis_coordinates()
    shape_k = [1] * grid.dim
    shape_k[move_axis] = grid.points_per_axis
    shape_q = [1] * grid.dim
    shape_q[drive_axis] = grid.points_per_axis
    phase = np.exp(-1j * s * k.reshape(shape_k) * q.reshape(shape_q))
    ft = np.fft.fft(values, axis=move_axis)
    return np.fft.ifft(phase * ft, axis=move_axis)


def _quarter_turn_matrix(dim: int, i: int, j: int) -> np.ndarray:
    out = np.eye(dim)
    out[i, i] = 0.0
    out[j, j] = 0.0
    out[i, j] = -1.0
    out[j, i] = 1.0
    return out


def _rotate_plane(psi: Wavefunction, i: int, j: int, theta: float) -> Wavefunction:
    """Rotate by theta in the ordered coordinate plane (i, j).

    Quarter turns are split off as exact index permutations; the residual
    angle (at most pi/4) is realized by the three-shear factorization
    R(t) = X(-tan(t/2)) Y(sin t) X(-tan(t/2)), each factor an exact
    spectral shear.  For states supported well inside the box this is
    accurate to roundoff; mass near the box edge wraps through the seam.
    """
    grid = psi.grid
    theta = float(theta) % (2.0 * np.pi)
    quarters = int(np.rint(theta / (0.5 * np.pi)))
    resid = theta - quarters * 0.5 * np.pi
    out = psi
    qturn = _quarter_turn_matrix(grid.dim, i, j)
    for _ in range(quarters % 4):
        out = _apply_lattice_rotation(qturn, out)
    if abs(resid) > 1e-15:
        a = -np.tan(0.5 * resid)
        b = np.sin(resid)
        vals = _shear(out.values, grid, i, j, a)
        vals = _shear(vals, grid, j, i, b)
        vals = _shear(vals, grid, i, j, a)
        out = out.with_values(vals)
    return out


def _euler_zyz(rot: np.ndarray) -> tuple[float, float, float]:
    """Angles (alpha, beta, gamma) with rot = Rz(alpha) Ry(beta) Rz(gamma)."""
    cos_beta = np.clip(rot[2, 2], -1.0, 1.0)
    beta = float(np.arccos(cos_beta))
    if abs(np.sin(beta)) > 1e-12:
        alpha = float(np.arctan2(rot[1, 2], rot[0, 2]))
        gamma = float(np.arctan2(rot[2, 1], -rot[2, 0]))
        return alpha, beta, gamma
    if cos_beta > 0.0:
        return float(np.arctan2(rot[1, 0], rot[0, 0])), 0.0, 0.0
    flip = np.diag([-1.0, 1.0, -1.0])  # Ry(pi)
    residual = rot @ flip  # Rz(alpha) since Ry(pi)^-1 = Ry(pi)
    return float(np.arctan2(residual[1, 0], residual[0, 0])), float(np.pi), 0.0


def rotate(rot: np.ndarray, psi: Wavefunction) -> Wavefunction:
    """U(0, R) psi(q) = psi(R^-1 q).

    Signed-permutation rotations are exact index permutations.  General
    rotations factor into planar rotations (zyz Euler angles in 3D), each
    realized by quarter turns plus three exact spectral shears; the
    result is exact to roundoff for interior-supported states.
    """
    grid = psi.grid
    if grid.dim < 2:
        raise ValueError("rotations are unsupported in one dimension")
    rot = check_rotation(rot, grid.dim)
    if as_lattice_rotation(rot, grid.dim) is not None:
        return _apply_lattice_rotation(rot, psi)
    if grid.dim == 2:
        theta = float(np.arctan2(rot[1, 0], rot[0, 0]))
        return _rotate_plane(psi, 0, 1, theta)
    alpha, beta, gamma = _euler_zyz(rot)
    out = _rotate_plane(psi, 0, 1, gamma)   # Rz(gamma) acts first
    out = _rotate_plane(out, 2, 0, beta)    # Ry(beta) in the ordered (z, x) plane
    return _rotate_plane(out, 0, 1, alpha)


def euclidean_apply(x: EuclideanElement, psi: Wavefunction) -> Wavefunction:
    """U(a, R) psi(q) = psi(R^-1 (q - a)) = shift(a) rotate(R) psi."""
    out = psi if psi.grid.dim == 1 else rotate(x.rot, psi)
    return shift(x.a, out)


def euclidean_adjoint_apply(x: EuclideanElement, psi: Wavefunction) -> Wavefunction:
    return euclidean_apply(x.inverse(), psi)


def wavevector_apply(j: int, psi: Wavefunction) -> Wavefunction:
    """K_j psi = -i d psi / dq_j, as multiplication by k_j in k-space."""
    grid = psi.grid
    if not 1 <= j <= grid.dim:
        raise ValueError(f"axis {j} out of range for dim {grid.dim}")
    ft = forward(psi)
    kj = grid.wavevector_mesh()[j - 1]
    return inverse(ft.with_values(kj * ft.values))


def position_apply(j: int, psi: Wavefunction) -> Wavefunction:
    """Q_j psi(q) = q_j psi(q) with q_j the principal coordinate in [-L/2, L/2)."""
    grid = psi.grid
    if not 1 <= j <= grid.dim:
        raise ValueError(f"axis {j} out of range for dim {grid.dim}")
    qj = grid.coordinate_mesh()[j - 1]
    return psi.with_values(qj * psi.values)


def weyl(k, a, psi: Wavefunction) -> Wavefunction:
    """Weyl operator e^{i(k.Q - a.K)} psi = e^{-i k.a/2} e^{i k.q} psi(q - a)."""
    grid = psi.grid
    k = np.atleast_1d(np.asarray(k, dtype=float))
    a = np.atleast_1d(np.asarray(a, dtype=float))
    if k.shape != (grid.dim,) or a.shape != (grid.dim,):
        raise ValueError("k and a must match the grid dimension")
    out = shift(a, psi)
    mesh = grid.coordinate_mesh()
    phase = np.exp(1j * sum(kj * m for kj, m in zip(k, mesh)))
    return out.with_values(np.exp(-0.5j * float(k @ a)) * phase * out.values)


def weyl_phase(k, a, kp, ap) -> complex:
    """Composition phase: weyl(k,a) weyl(k',a') = phase * weyl(k+k', a+a')."""
    k = np.atleast_1d(np.asarray(k, float))
    a = np.atleast_1d(np.asarray(a, float))
    kp = np.atleast_1d(np.asarray(kp, float))
    ap = np.atleast_1d(np.asarray(ap, float))
    return complex(np.exp(0.5j * (float(k @ ap) - float(kp @ a))))


# --- operator handles -------------------------------------------------------

@dataclass(frozen=True)
class OperatorHandle:
    """Tagged description of a linear operator on wavefunctions.

    kind: one of multiply | shift | rotate | euclidean | wavevector |
    position | weyl | chain.  Unitary-tagged handles preserve the norm.
    """

    kind: str
    payload: tuple = field(default=())

    def apply(self, psi: Wavefunction) -> Wavefunction:
        kind = self.kind
        if kind == "multiply":
            return multiply(self.payload[0], psi)
        if kind == "shift":
            return shift(self.payload[0], psi)
        if kind == "rotate":
            return rotate(self.payload[0], psi)
        if kind == "euclidean":
            return euclidean_apply(self.payload[0], psi)
        if kind == "wavevector":
            return wavevector_apply(self.payload[0], psi)
        if kind == "position":
            return position_apply(self.payload[0], psi)
        if kind == "weyl":
            return weyl(self.payload[0], self.payload[1], psi)
        if kind == "chain":
            out = psi
            for op in reversed(self.payload):
                out = op.apply(out)
            return out
        raise ValueError(f"unknown operator kind {kind!r}")

    @property
    def unitary(self) -> bool:
        if self.kind in ("shift", "rotate", "euclidean", "weyl"):
            return True
        if self.kind == "multiply":
            mags = np.abs(np.asarray(self.payload[0]))
            return bool(np.max(np.abs(mags - 1.0)) < 1e-12)
        if self.kind == "chain":
            return all(op.unitary for op in self.payload)
        return False

    def __mul__(self, other: "OperatorHandle") -> "OperatorHandle":
        return OperatorHandle("chain", (self, other))


def multiply_op(f) -> OperatorHandle:
    return OperatorHandle("multiply", (np.asarray(f),))


def shift_op(a) -> OperatorHandle:
    return OperatorHandle("shift", (np.atleast_1d(np.asarray(a, float)),))


def rotate_op(rot) -> OperatorHandle:
    return OperatorHandle("rotate", (np.asarray(rot, float),))


def weyl_op(k, a) -> OperatorHandle:
    return OperatorHandle(
        "weyl",
        (np.atleast_1d(np.asarray(k, float)), np.atleast_1d(np.asarray(a, float))),
    )


# --- diagnostics ------------------------------------------------------------

def ccr_residual(psi: Wavefunction) -> np.ndarray:
    """Per-axis residual ||(i[K_j, Q_j] - 1) psi|| / ||psi||.

    Small (< 1e-8) only when both psi and q_j psi are band limited and
    interior supported; spectral mass at the Nyquist shell or box-edge
    support shows up as an O(1) residual.
    """
    n = norm(psi)
    if n == 0.0:
        raise ValueError("ccr_residual needs a nonzero state")
    out = np.empty(psi.grid.dim)
    for j in range(1, psi.grid.dim + 1):
        kq = wavevector_apply(j, position_apply(j, psi))
        qk = position_apply(j, wavevector_apply(j, psi))
        resid = 1j * (kq.values - qk.values) - psi.values
        out[j - 1] = np.sqrt(np.sum(np.abs(resid) ** 2) * psi.grid.cell_volume) / n
    return out


def expectation_value(op: OperatorHandle, psi: Wavefunction) -> complex:
    return inner(psi, op.apply(psi))


def heisenberg_picture_check(op: OperatorHandle, psi: Wavefunction, t: float, evolve) -> float:
    """Norm gap || A psi_t - (A_t psi)_t || for A_t = V(t) A V(t)^*.

    `evolve(t, psi)` must implement the state evolution psi_t = V(t)^* psi;
    then A_t acts as evolve(-t) o A o evolve(t).
    """
    psi_t = evolve(t, psi)
    lhs = op.apply(psi_t)
    a_t_psi = evolve(-t, op.apply(evolve(t, psi)))
    rhs = evolve(t, a_t_psi)
    gap = lhs.values - rhs.values
    return float(np.sqrt(np.sum(np.abs(gap) ** 2) * psi.grid.cell_volume))
