"""The 10-parameter Galilei group and free dynamics.

Group law and inverse:

    (b, M, s, w)(a, R, t, v) = (b + M a + t w, M R, s + t, w + M v)
    (a, R, t, v)^-1 = (-R^-1(a - t v), R^-1, -t, -R^-1 v)

The free frequency operator is Omega = (c/2 kappa) K^2 + d; states evolve
by psi_t = V(t)^* psi, i.e. mode k picks up e^{-i((c/2 kappa)|k|^2 + d)t},
while the group element (0, I, t, 0) is represented by V(t) = e^{+i Omega t}
itself.  The projective representation is

    U(a, R, t, v) = U(a - t v, R) R(R^-1 v) V(t),     R(v) = e^{i kappa (v/c).Q}

with multiplier

    xi(g2; g1) = exp(i (kappa/c) [w.Ma - s|v|^2/2 - (s+t) w.Mv])

which multiplier_residual verifies at the operator level.  kappa is the
single physical parameter (conventionally m = hbar*kappa/c); kappa < 0
describes the time-reversed particle and d drops out of every physical
quantity.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .fourier import forward, inverse
from .grid import GridSpec, Wavefunction, inner, norm
from .operators import (
    EuclideanElement,
    check_rotation,
    euclidean_adjoint_apply,
    euclidean_apply,
    position_apply,
    shift,
)


@dataclass(frozen=True)
class GalileiElement:
    """Group element (a, rot, t, v): shift, rotation, time, boost velocity."""

    a: np.ndarray
    rot: np.ndarray
    t: float
    v: np.ndarray

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.a, dtype=float))
        v = np.atleast_1d(np.asarray(self.v, dtype=float))
        if a.shape != v.shape:
            raise ValueError("shift and velocity must share a dimension")
        rot = check_rotation(self.rot, a.size)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "rot", rot)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "t", float(self.t))

    @staticmethod
    def identity(dim: int) -> "GalileiElement":
        return GalileiElement(np.zeros(dim), np.eye(dim), 0.0, np.zeros(dim))


def compose(g2: GalileiElement, g1: GalileiElement) -> GalileiElement:
    """(b,M,s,w)(a,R,t,v) = (b + Ma + tw, MR, s + t, w + Mv)."""
    return GalileiElement(
        g2.a + g2.rot @ g1.a + g1.t * g2.v,
        g2.rot @ g1.rot,
        g2.t + g1.t,
        g2.v + g2.rot @ g1.v,
    )


def inverse_element(g: GalileiElement) -> GalileiElement:
    rinv = g.rot.T
    return GalileiElement(-rinv @ (g.a - g.t * g.v), rinv, -g.t, -rinv @ g.v)


@dataclass(frozen=True)
class FreeDynamics:
    """Free-particle dynamics data: Omega = (c/2 kappa) K^2 + beta.K + d.

    kappa = 0 admits no boost-compatible dynamics and is rejected; the
    linear term beta is a diagnostic knob only (any nonzero beta breaks
    the multiplier law, which is the point of exposing it) and defaults
    to zero in production use.
    """

    kappa: float
    c: float = 1.0
    d: float = 0.0
    beta: tuple = ()

    def __post_init__(self):
        if self.kappa == 0.0:
            raise ValueError("kappa = 0 admits no boost-compatible free dynamics")
        if not self.c > 0:
            raise ValueError("c must be positive")

    def frequency(self, k_sq: np.ndarray, k_mesh=None) -> np.ndarray:
        """f(k) = (c/2 kappa)|k|^2 + beta.k + d on wavevector arrays."""
        out = (self.c / (2.0 * self.kappa)) * k_sq + self.d
        if self.beta and k_mesh is not None:
            out = out + sum(bj * km for bj, km in zip(self.beta, k_mesh))
        return out


def _evolution_phase(grid: GridSpec, dyn: FreeDynamics, t: float, sign: float) -> np.ndarray:
    mesh = grid.wavevector_mesh()
    k_sq = sum(m**2 for m in mesh)
    return np.exp(sign * 1j * dyn.frequency(k_sq, mesh) * t)


def evolve(t: float, psi: Wavefunction, dyn: FreeDynamics) -> Wavefunction:
    """Schroedinger flow psi_t = V(t)^* psi: mode k times e^{-i f(k) t}."""
    if t == 0.0:
        return psi
    ft = forward(psi)
    return inverse(ft.with_values(ft.values * _evolution_phase(psi.grid, dyn, t, -1.0)))


def time_translation(t: float, psi: Wavefunction, dyn: FreeDynamics) -> Wavefunction:
    """The group unitary V(t) = e^{+i Omega t}; the inverse of evolve(t)."""
    if t == 0.0:
        return psi
    ft = forward(psi)
    return inverse(ft.with_values(ft.values * _evolution_phase(psi.grid, dyn, t, +1.0)))


def boost(v, psi: Wavefunction, dyn: FreeDynamics) -> Wavefunction:
    """R(v) psi = e^{i kappa (v/c).q} psi: shifts <K> by kappa v/c."""
    grid = psi.grid
    v = np.broadcast_to(np.atleast_1d(np.asarray(v, float)), (grid.dim,))
    u = dyn.kappa * v / dyn.c
    if np.linalg.norm(u) > 0.5 * grid.k_max:
        raise ValueError(
            f"boost wavevector |kappa v/c| = {np.linalg.norm(u):.3f} exceeds "
            f"half the Nyquist band {0.5 * grid.k_max:.3f}"
        )
    mesh = grid.coordinate_mesh()
    phase = np.exp(1j * sum(uj * m for uj, m in zip(u, mesh)))
    return psi.with_values(phase * psi.values)


def galilei_apply(g: GalileiElement, psi: Wavefunction, dyn: FreeDynamics) -> Wavefunction:
    """The projective representation U(a,R,t,v) = U(a - tv, R) R(R^-1 v) V(t).

    Note V(t) here is the group unitary e^{+i Omega t}: the physically
    evolved state is produced by the adjoint, psi_t = U(0,I,t,0)^* psi.
    """
    out = time_translation(g.t, psi, dyn)
    out = boost(g.rot.T @ g.v, out, dyn)
    return euclidean_apply(EuclideanElement(g.a - g.t * g.v, g.rot), out)


def galilei_adjoint_apply(g: GalileiElement, psi: Wavefunction, dyn: FreeDynamics) -> Wavefunction:
    """U(a,R,t,v)^* psi, the state observed in the transformed frame."""
    out = euclidean_adjoint_apply(EuclideanElement(g.a - g.t * g.v, g.rot), psi)
    out = boost(-(g.rot.T @ g.v), out, dyn)
    return evolve(g.t, out, dyn)


def galilei_multiplier(g2: GalileiElement, g1: GalileiElement, dyn: FreeDynamics) -> complex:
    """Closed-form multiplier xi with U(g2) U(g1) = xi U(g2 g1)."""
    return complex(np.exp(1j * multiplier_exponent(g2, g1, dyn)))


def multiplier_exponent(g2: GalileiElement, g1: GalileiElement, dyn: FreeDynamics) -> float:
    """(kappa/c) [w.Ma - s|v|^2/2 - (s+t) w.Mv] for g2=(b,M,s,w), g1=(a,R,t,v)."""
    ma = g2.rot @ g1.a
    mv = g2.rot @ g1.v
    w = g2.v
    s, t = g2.t, g1.t
    val = float(w @ ma) - 0.5 * s * float(g1.v @ g1.v) - (s + t) * float(w @ mv)
    return (dyn.kappa / dyn.c) * val


def multiplier_residual(
    g2: GalileiElement, g1: GalileiElement, psi: Wavefunction, dyn: FreeDynamics
) -> float:
    """|| U(g2) U(g1) psi - xi(g2,g1) U(g2 g1) psi ||, the empirical arbiter."""
    lhs = galilei_apply(g2, galilei_apply(g1, psi, dyn), dyn)
    xi = galilei_multiplier(g2, g1, dyn)
    rhs = galilei_apply(compose(g2, g1), psi, dyn)
    gap = lhs.values - xi * rhs.values
    return float(np.sqrt(np.sum(np.abs(gap) ** 2) * psi.grid.cell_volume))


# --- kinematic diagnostics ---------------------------------------------------

def position_expectation(psi: Wavefunction) -> np.ndarray:
    n2 = norm(psi) ** 2
    return np.array(
        [inner(psi, position_apply(j, psi)).real / n2 for j in range(1, psi.grid.dim + 1)]
    )


def position_variance(psi: Wavefunction) -> np.ndarray:
    n2 = norm(psi) ** 2
    out = np.empty(psi.grid.dim)
    for j in range(1, psi.grid.dim + 1):
        qpsi = position_apply(j, psi)
        mean = inner(psi, qpsi).real / n2
        out[j - 1] = inner(qpsi, qpsi).real / n2 - mean**2
    return out


def wavevector_expectation(psi: Wavefunction) -> np.ndarray:
    ft = forward(psi)
    weights = np.abs(ft.values) ** 2
    total = np.sum(weights)
    mesh = psi.grid.wavevector_mesh()
    return np.array([float(np.sum(m * weights) / total) for m in mesh])


@dataclass(frozen=True)
class MassFit:
    """Linear fit of the packet drift <Q>_t = <Q>_0 + (c t / kappa) <K>."""

    kappa: float
    slope: float
    fit_residual: float
    axis: int

    def mass_over_hbar(self, c: float) -> float:
        """Documentation-only conversion m/hbar = kappa/c."""
        return self.kappa / c


def mass_extraction(
    psi: Wavefunction, dyn: FreeDynamics, t_samples: Sequence[float], edge_margin: float = 4.0
) -> MassFit:
    """Recover kappa from free-packet drift along the fastest axis.

    Aborts if the packet center comes within edge_margin standard
    deviations of the box edge at any sample time.
    """
    t_samples = np.asarray(list(t_samples), dtype=float)
    if t_samples.size < 2:
        raise ValueError("need at least two sample times")
    k_mean = wavevector_expectation(psi)
    axis = int(np.argmax(np.abs(k_mean)))
    if abs(k_mean[axis]) < 1e-12:
        raise ValueError("state has <K> = 0 on every axis; boost it first")
    half_box = 0.5 * psi.grid.box_length
    centers = np.empty_like(t_samples)
    for i, t in enumerate(t_samples):
        psi_t = evolve(float(t), psi, dyn)
        center = position_expectation(psi_t)
        spread = np.sqrt(position_variance(psi_t))
        if np.any(np.abs(center) + edge_margin * spread > half_box):
            raise ValueError(f"packet reaches the box edge at t = {t}")
        centers[i] = center[axis]
    coeffs = np.polyfit(t_samples, centers, 1)
    slope = float(coeffs[0])
    fit_residual = float(np.max(np.abs(np.polyval(coeffs, t_samples) - centers)))
    kappa = dyn.c * float(k_mean[axis]) / slope
    return MassFit(kappa=kappa, slope=slope, fit_residual=fit_residual, axis=axis + 1)


def moving_frame_state(psi: Wavefunction, v, t: float, dyn: FreeDynamics) -> Wavefunction:
    """The state observed at time t in a frame moving with velocity v.

    Frames coincide at t = 0.  Passing to the moving frame is the active
    transformation by the inverse frame motion, which works out to

        e^{-i kappa (v/c).q} e^{-i (kappa/c) t |v|^2 / 2} psi_t(q + t v)

    (a boost of the evolved state re-centered by -t v), so that
    <Q>_{v,t} = <Q>_{0,t} - t v.
    """
    dim = psi.grid.dim
    v = np.broadcast_to(np.atleast_1d(np.asarray(v, float)), (dim,))
    out = shift(-t * v, evolve(t, psi, dyn))
    out = boost(-v, out, dyn)
    phase = np.exp(-0.5j * (dyn.kappa / dyn.c) * t * float(v @ v))
    return out.with_values(phase * out.values)


def boosted_frame_position(psi: Wavefunction, v, t: float, dyn: FreeDynamics) -> np.ndarray:
    """<Q> in the frame moving with velocity v at time t."""
    return position_expectation(moving_frame_state(psi, v, t, dyn))


def time_reverse(psi: Wavefunction) -> Wavefunction:
    """Anti-unitary time reversal: pointwise complex conjugation."""
    return psi.with_values(np.conj(psi.values))


def reversed_dynamics(dyn: FreeDynamics) -> FreeDynamics:
    """Dynamics of the time-reversed particle: kappa -> -kappa, d -> -d."""
    return replace(dyn, kappa=-dyn.kappa, d=-dyn.d)


@dataclass(frozen=True)
class HeisenbergSolution:
    """Q_t = Q + (t c / kappa) K and K_t = K as coefficient pairs."""

    t: float
    q_on_q: float
    q_on_k: float
    k_on_q: float
    k_on_k: float


def heisenberg_free_solution(t: float, dyn: FreeDynamics) -> HeisenbergSolution:
    """Closed-form Heisenberg flow from [Q, Omega] = (i c / kappa) K, [K, Omega] = 0."""
    return HeisenbergSolution(
        t=float(t), q_on_q=1.0, q_on_k=float(t) * dyn.c / dyn.kappa, k_on_q=0.0, k_on_k=1.0
    )


def heisenberg_verify(sol: HeisenbergSolution, psi: Wavefunction, dyn: FreeDynamics) -> float:
    """Max axis discrepancy between <Q_t> on psi and <Q> on the evolved state."""
    lhs = sol.q_on_q * position_expectation(psi) + sol.q_on_k * wavevector_expectation(psi)
    rhs = position_expectation(evolve(sol.t, psi, dyn))
    k_lhs = sol.k_on_k * wavevector_expectation(psi) + sol.k_on_q * position_expectation(psi)
    k_rhs = wavevector_expectation(evolve(sol.t, psi, dyn))
    return float(max(np.max(np.abs(lhs - rhs)), np.max(np.abs(k_lhs - k_rhs))))
