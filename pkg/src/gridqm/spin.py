"""SU(2) covering machinery for SO(3) and spinor fields.

The covering map Xi sends u in SU(2) to the rotation defined by
u M(q) u* = M(Xi(u) q), M(q) = sum_j q_j sigma_j.  Its two-valued inverse
is fixed here as the section

    section(R) = cos(theta/2) I - i sin(theta/2) M(n)

for R the right-handed rotation by theta in [0, pi] about n, i.e. the
lift with positive trace; the theta = pi ambiguity is broken by the sign
of the first nonzero entry in reading order (positive real part,
else positive imaginary part).  With this convention
covering_map(section(R)) = R round-trips exactly.

The pm 1 multiplier of the section and the path-lifted elements classify
the two homotopy classes of closed rotation paths: a 2 pi winding lifts
to -I, a 4 pi winding back to +I.

Spinor fields are pairs of wavefunctions; rotations act by the section
on the component index and by the spatial rotation on each component.
Rotations are given as 3x3 matrices throughout; on grids of dimension
below three only rotations fixing the missing axes are representable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Wavefunction, inner, norm
from .operators import EuclideanElement, check_rotation, euclidean_adjoint_apply, multiply, rotate, shift

_SU2_TOL = 1e-12

_PAULI = (
    np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
    np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
)


def pauli(j: int) -> np.ndarray:
    if j not in (1, 2, 3):
        raise ValueError(f"Pauli index must be 1, 2 or 3, got {j}")
    return _PAULI[j - 1].copy()


def m_of_q(q) -> np.ndarray:
    """The traceless Hermitian matrix M(q) = sum_j q_j sigma_j; det = -|q|^2."""
    q = np.asarray(q, dtype=float)
    if q.shape != (3,):
        raise ValueError("M(q) needs a 3-vector")
    return q[0] * _PAULI[0] + q[1] * _PAULI[1] + q[2] * _PAULI[2]


def check_su2(u) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2):
        raise ValueError("SU(2) elements are 2x2 matrices")
    if np.max(np.abs(u.conj().T @ u - np.eye(2))) > 1e-10:
        raise ValueError("matrix is not unitary")
    if abs(np.linalg.det(u) - 1.0) > 1e-10:
        raise ValueError("matrix does not have determinant 1")
    return u


def covering_map(u) -> np.ndarray:
    """Xi(u) in SO(3), column j given by conjugating sigma_j with u."""
    u = check_su2(u)
    ud = u.conj().T
    rot = np.empty((3, 3))
    for j in range(3):
        conj = u @ _PAULI[j] @ ud
        for i in range(3):
            val = 0.5 * np.trace(_PAULI[i] @ conj)
            rot[i, j] = val.real
    return rot


def _quaternion_of(rot: np.ndarray) -> tuple[float, np.ndarray]:
    """(cos(theta/2), sin(theta/2) n) via the stable trace-branch extraction."""
    t = np.trace(rot)
    if t > 0.0:
        s = np.sqrt(t + 1.0) * 2.0
        w = 0.25 * s
        x = (rot[2, 1] - rot[1, 2]) / s
        y = (rot[0, 2] - rot[2, 0]) / s
        z = (rot[1, 0] - rot[0, 1]) / s
    else:
        i = int(np.argmax(np.diag(rot)))
        if i == 0:
            s = np.sqrt(1.0 + rot[0, 0] - rot[1, 1] - rot[2, 2]) * 2.0
            w = (rot[2, 1] - rot[1, 2]) / s
            x = 0.25 * s
            y = (rot[0, 1] + rot[1, 0]) / s
            z = (rot[0, 2] + rot[2, 0]) / s
        elif i == 1:
            s = np.sqrt(1.0 - rot[0, 0] + rot[1, 1] - rot[2, 2]) * 2.0
            w = (rot[0, 2] - rot[2, 0]) / s
            x = (rot[0, 1] + rot[1, 0]) / s
            y = 0.25 * s
            z = (rot[1, 2] + rot[2, 1]) / s
        else:
            s = np.sqrt(1.0 - rot[0, 0] - rot[1, 1] + rot[2, 2]) * 2.0
            w = (rot[1, 0] - rot[0, 1]) / s
            x = (rot[0, 2] + rot[2, 0]) / s
            y = (rot[1, 2] + rot[2, 1]) / s
            z = 0.25 * s
    return float(w), np.array([x, y, z])


def section(rot) -> np.ndarray:
    """The fixed inverse of the covering map: tr > 0 lift, tie-broken at pi."""
    rot = check_rotation(np.asarray(rot, float), 3)
    w, vec = _quaternion_of(rot)
    u = w * np.eye(2, dtype=complex) - 1j * m_of_q(vec)
    if w > _SU2_TOL:
        return u
    if w < -_SU2_TOL:
        return -u
    # rotation angle pi: positive real part of the first nonzero entry,
    # else positive imaginary part
    for entry in u.ravel():
        if abs(entry) > _SU2_TOL:
            if entry.real < -_SU2_TOL:
                return -u
            if abs(entry.real) <= _SU2_TOL and entry.imag < 0.0:
                return -u
            return u
    raise ValueError("degenerate rotation matrix")


def multiplier(rot_a, rot_b) -> int:
    """xi(R, R') = v(R) v(R') v(R R')^* in {+1, -1}."""
    va = section(rot_a)
    vb = section(rot_b)
    vab = section(np.asarray(rot_a, float) @ np.asarray(rot_b, float))
    prod = va @ vb @ vab.conj().T
    val = 0.5 * np.trace(prod)
    if np.max(np.abs(prod - val * np.eye(2))) > 1e-10:
        raise ValueError("section product is not a scalar matrix")
    sign = int(np.rint(val.real))
    if sign not in (-1, 1) or abs(val - sign) > 1e-10:
        raise ValueError(f"multiplier {val} is not +-1")
    return sign


@dataclass(frozen=True)
class RotationPath:
    """Ordered rotations from the identity with small geodesic steps."""

    steps: tuple

    def __post_init__(self):
        steps = tuple(np.asarray(s, dtype=float) for s in self.steps)
        if not steps:
            raise ValueError("path must contain at least the identity")
        if np.max(np.abs(steps[0] - np.eye(3))) > 1e-12:
            raise ValueError("path must start at the identity")
        object.__setattr__(self, "steps", steps)


def geodesic_angle(rot_a: np.ndarray, rot_b: np.ndarray) -> float:
    rel = rot_b @ rot_a.T
    return float(np.arccos(np.clip(0.5 * (np.trace(rel) - 1.0), -1.0, 1.0)))


def lift_path(path: RotationPath) -> np.ndarray:
    """Continuity lift of a rotation path into SU(2).

    Closed paths end at +I or -I according to their homotopy class.
    Steps with geodesic angle >= pi/2 would make the near-identity lift
    ambiguous and are rejected.
    """
    u = np.eye(2, dtype=complex)
    prev = path.steps[0]
    for step in path.steps[1:]:
        angle = geodesic_angle(prev, step)
        if angle >= 0.5 * np.pi:
            raise ValueError(f"path step of geodesic angle {angle:.3f} >= pi/2 is ambiguous")
        u = section(step @ prev.T) @ u
        prev = step
    return u


def winding_path(axis, total_angle: float, steps: int) -> RotationPath:
    """Uniform path winding by total_angle about a fixed axis."""
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    mats = []
    for i in range(steps + 1):
        theta = total_angle * i / steps
        w, s = np.cos(theta), np.sin(theta)
        kmat = np.array(
            [[0.0, -axis[2], axis[1]], [axis[2], 0.0, -axis[0]], [-axis[1], axis[0], 0.0]]
        )
        mats.append(np.eye(3) + s * kmat + (1.0 - w) * (kmat @ kmat))
    return RotationPath(tuple(mats))


# --- spinor fields -----------------------------------------------------------

@dataclass(frozen=True)
class SpinorField:
    """Pair of wavefunctions on a shared grid, jointly normalized."""

    psi0: Wavefunction
    psi1: Wavefunction

    def __post_init__(self):
        if self.psi0.grid != self.psi1.grid:
            raise ValueError("spinor components must share a grid")

    @property
    def grid(self):
        return self.psi0.grid


def spinor_norm(field: SpinorField) -> float:
    return float(np.sqrt(norm(field.psi0) ** 2 + norm(field.psi1) ** 2))


def spinor_normalize(field: SpinorField) -> SpinorField:
    n = spinor_norm(field)
    if n == 0.0:
        raise ValueError("cannot normalize the zero spinor")
    return SpinorField(
        field.psi0.with_values(field.psi0.values / n),
        field.psi1.with_values(field.psi1.values / n),
    )


def _spatial_rotation(rot3: np.ndarray, dim: int) -> np.ndarray:
    """Reduce a 3x3 rotation to the grid dimension; it must fix missing axes."""
    if dim == 3:
        return rot3
    fixed = rot3[dim:, dim:]
    if np.max(np.abs(fixed - np.eye(3 - dim))) > 1e-12 or np.max(
        np.abs(rot3[:dim, dim:])
    ) > 1e-12:
        raise ValueError(f"rotation does not act within the first {dim} axes")
    return rot3[:dim, :dim]


def _rotate_component(rot3: np.ndarray, psi: Wavefunction) -> Wavefunction:
    sub = _spatial_rotation(rot3, psi.grid.dim)
    if psi.grid.dim == 1:
        return psi  # only the identity survives the reduction
    return rotate(sub, psi)


def _resolve_spin(rot_or_u) -> tuple[np.ndarray, np.ndarray]:
    """(spin matrix u, 3x3 rotation) from either a rotation or an SU(2) element."""
    arr = np.asarray(rot_or_u)
    if arr.shape == (2, 2):
        u = check_su2(arr)
        return u, covering_map(u)
    rot = check_rotation(np.asarray(arr, float), 3)
    return section(rot), rot


def spinor_rotate(rot_or_u, field: SpinorField) -> SpinorField:
    """U(R) on spinors: the section mixes components, R moves the arguments.

    Passing an explicit SU(2) element (e.g. a path-lifted one) selects
    that lift instead of the section's sign choice.
    """
    u, rot3 = _resolve_spin(rot_or_u)
    r0 = _rotate_component(rot3, field.psi0)
    r1 = _rotate_component(rot3, field.psi1)
    return SpinorField(
        r0.with_values(u[0, 0] * r0.values + u[0, 1] * r1.values),
        r1.with_values(u[1, 0] * r0.values + u[1, 1] * r1.values),
    )


def spinor_shift(a, field: SpinorField) -> SpinorField:
    return SpinorField(shift(a, field.psi0), shift(a, field.psi1))


def spinor_euclid(a, rot_or_u, field: SpinorField) -> SpinorField:
    """U(a, R) = U(a) U(R) on spinor fields."""
    return spinor_shift(a, spinor_rotate(rot_or_u, field))


def spinor_expectation(f: np.ndarray, field: SpinorField) -> complex:
    """<f> = <psi0|f^|psi0> + <psi1|f^|psi1>."""
    return inner(field.psi0, multiply(f, field.psi0)) + inner(
        field.psi1, multiply(f, field.psi1)
    )


def _spatial_adjoint(a, rot3: np.ndarray, psi: Wavefunction) -> Wavefunction:
    dim = psi.grid.dim
    sub = _spatial_rotation(rot3, dim) if dim > 1 else np.eye(1)
    x = EuclideanElement(np.broadcast_to(np.asarray(a, float), (dim,)), sub)
    return euclidean_adjoint_apply(x, psi)


def spinor_correlation(f: np.ndarray, x: tuple, y: tuple, field: SpinorField) -> complex:
    """F(f, (a, R), (b, M)) = Tr[ v(R)^* X v(M) ] for the spinor state.

    X[j, j'] = < U(b, M)^* psi_j' | f^ | U(a, R)^* psi_j > built from the
    spatial parts alone; the spin matrices may be passed explicitly as
    SU(2) elements to select a particular lift.
    """
    a, rot_u = x
    b, mot_u = y
    u_r, rot3 = _resolve_spin(rot_u)
    u_m, mot3 = _resolve_spin(mot_u)
    comps = (field.psi0, field.psi1)
    kets = [_spatial_adjoint(a, rot3, c) for c in comps]
    bras = [_spatial_adjoint(b, mot3, c) for c in comps]
    xmat = np.empty((2, 2), dtype=complex)
    for j in range(2):
        fket = multiply(np.asarray(f), kets[j])
        for jp in range(2):
            xmat[j, jp] = inner(bras[jp], fket)
    return complex(np.trace(u_r.conj().T @ xmat @ u_m))
