"""Batch front end: demos, invariant suites, diagnostics and file exports.

Every output file starts with a JSON header carrying the artifact
version, the command, the resolved configuration and the seed, and all
numbers are printed with 17 significant digits, so a rerun with the same
configuration reproduces every file byte for byte.

Exit codes: 0 all checks passed, 1 an invariant or tolerance failed,
2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .circle import (
    CircleGrid,
    circle_basis,
    circle_bump,
    circle_correlation_closed_form,
    circle_correlation_direct,
    circle_evolve,
    circle_inner,
    circle_k_apply,
    circle_k_matrix,
    circle_position_apply,
    circle_spectrum,
)
from .fourier import convolve, forward, inverse, involution
from .galilei import (
    FreeDynamics,
    GalileiElement,
    compose,
    evolve,
    galilei_multiplier,
    heisenberg_free_solution,
    heisenberg_verify,
    multiplier_exponent,
    multiplier_residual,
    position_expectation,
    time_reverse,
)
from .grid import (
    Wavefunction,
    inner,
    load_wavefunction,
    make_grid,
    norm,
    sample_gaussian,
    save_wavefunction,
)
from .operators import (
    ccr_residual,
    multiply,
    rotation_matrix,
    shift,
    weyl,
    weyl_phase,
)
from .spin import (
    SpinorField,
    covering_map,
    lift_path,
    multiplier as spin_multiplier,
    section,
    spinor_correlation,
    winding_path,
)
from .states import (
    characteristic,
    phase_space_table,
    twisted_posdef_min_eig,
    wigner_marginals,
)
from .uniqueness import (
    VNProjection,
    compression_residual,
    range_state,
    rank_one_gap,
    vn_dense,
    vn_dense_weyl,
    weyl_vs_bch_state_residual,
    witness_correlation,
    witness_reference,
)

ENV_OUT = "GRIDQM_OUT"


@dataclass
class RunConfig:
    command: str = ""
    grid_dim: int = 1
    grid_n: int = 512
    box: float = 40.0
    kappa: float = 1.0
    c: float = 1.0
    lam: float = 1.0
    d: float = 0.0
    seed: int = 1234
    out: str = ""
    plots: bool = True
    tol_overrides: dict = field(default_factory=dict)

    def header(self) -> dict:
        cfg = asdict(self)
        cfg.pop("out")  # a location, not configuration: reruns elsewhere match
        return {
            "artifact": "gridqm",
            "version": __version__,
            "command": self.command,
            "config": cfg,
            "seed": self.seed,
        }

    def tol(self, key: str, default: float) -> float:
        return float(self.tol_overrides.get(key, default))


def _fmt(x) -> str:
    if isinstance(x, complex):
        return f"{x.real:.17g},{x.imag:.17g}"
    return f"{float(x):.17g}"


def _write_csv(path: Path, cfg: RunConfig, columns, rows) -> None:
    lines = ["# " + json.dumps(cfg.header(), sort_keys=True), ",".join(columns)]
    for row in rows:
        lines.append(",".join(_fmt(v) if not isinstance(v, str) else v for v in row))
    path.write_text("\n".join(lines) + "\n")


def _write_json(path: Path, cfg: RunConfig, body: dict) -> None:
    payload = {"header": cfg.header()}
    payload.update(body)
    path.write_text(json.dumps(payload, sort_keys=True, indent=1) + "\n")


# --- gaussian demo ------------------------------------------------------------

def cmd_demo_gaussian(cfg: RunConfig, out_dir: Path) -> int:
    grid = make_grid(cfg.grid_dim, cfg.grid_n, cfg.box)
    psi = sample_gaussian(grid, cfg.lam)
    lam = cfg.lam
    n = grid.dim

    chi_table = phase_space_table(psi, "characteristic")
    k2 = np.sum(chi_table.k_points**2, axis=1)
    q2 = np.sum(chi_table.q_points**2, axis=1)
    chi_ref = np.exp(-0.5 * lam**2 * k2) * np.exp(-q2 / (8.0 * lam**2))
    chi_err = float(np.max(np.abs(chi_table.values - chi_ref)))

    wig_table = phase_space_table(psi, "wigner")
    k2w = np.sum(wig_table.k_points**2, axis=1)
    q2w = np.sum(wig_table.q_points**2, axis=1)
    wig_ref = 2.0**n * np.exp(-q2w / (2.0 * lam**2)) * np.exp(-2.0 * lam**2 * k2w)
    wig_err = float(np.max(np.abs(np.real(wig_table.values) - wig_ref)))

    cols = [f"k{j+1}" for j in range(n)] + [f"q{j+1}" for j in range(n)]
    _write_csv(
        out_dir / "chi.csv", cfg, cols + ["re", "im", "ref_re", "ref_im", "abs_err"],
        [
            list(chi_table.k_points[i]) + list(chi_table.q_points[i])
            + [chi_table.values[i].real, chi_table.values[i].imag,
               chi_ref[i], 0.0, abs(chi_table.values[i] - chi_ref[i])]
            for i in range(chi_ref.size)
        ],
    )
    _write_csv(
        out_dir / "wigner.csv", cfg, cols + ["value", "ref", "abs_err"],
        [
            list(wig_table.k_points[i]) + list(wig_table.q_points[i])
            + [np.real(wig_table.values[i]), wig_ref[i],
               abs(np.real(wig_table.values[i]) - wig_ref[i])]
            for i in range(wig_ref.size)
        ],
    )

    chi_tol = cfg.tol("max_chi_error", 1e-8)
    wig_tol = cfg.tol("max_wigner_error", 1e-6)
    ok = chi_err < chi_tol and wig_err < wig_tol
    _write_json(
        out_dir / "report.json", cfg,
        {
            "max_chi_error": chi_err,
            "max_wigner_error": wig_err,
            "tolerances": {"max_chi_error": chi_tol, "max_wigner_error": wig_tol},
            "pass": bool(ok),
        },
    )
    if cfg.plots:
        from .plotting import save_phase_space_figure

        mid = chi_ref.size // 2  # central q = 0 sweep
        points = chi_table.k_points[:, 0]
        sweep = slice(mid - mid % 33, mid - mid % 33 + 33)
        save_phase_space_figure(
            out_dir / "demo_gaussian.png",
            points[sweep], chi_table.values[sweep], chi_ref[sweep],
            np.real(wig_table.values[sweep]), wig_ref[sweep],
        )
    return 0 if ok else 1


# --- invariant registry --------------------------------------------------------

def _invariant_suite(cfg: RunConfig, rng: np.random.Generator):
    """Yield (name, measured, default_tolerance) across every module."""
    grid = make_grid(1, 256, 30.0)
    psi = sample_gaussian(grid, 1.0, center=[0.4], k0=[1.0])
    phi = sample_gaussian(grid, 0.8, center=[-0.6], k0=[-0.5])
    dyn = FreeDynamics(kappa=cfg.kappa, c=cfg.c)
    q = grid.axis_coordinates()

    rt = inverse(forward(psi))
    yield "fourier_roundtrip", float(np.max(np.abs(rt.values - psi.values))), 1e-12

    lhs = np.sum(np.abs(psi.values) ** 2) * grid.dq
    rhs = (2 * np.pi) * np.sum(np.abs(forward(psi).values) ** 2) * grid.dk
    yield "parseval", abs(lhs - rhs) / abs(lhs), 1e-10

    f = np.exp(-(q**2) / 5) * (1 + 0.3 * np.cos(q))
    g2 = np.exp(-(q**2) / 7) * np.sin(0.5 * q)
    prod = forward(Wavefunction(grid, f * g2))
    conv = convolve(forward(Wavefunction(grid, f)), forward(Wavefunction(grid, g2)))
    yield "convolution_theorem", float(np.max(np.abs(prod.values - conv.values))), 1e-10

    tf = forward(psi)
    yield "involution_involutive", float(
        np.max(np.abs(involution(involution(tf)).values - tf.values))
    ), 1e-15

    yield "gaussian_norm", abs(norm(psi) - 1.0), 1e-8

    alpha, beta = complex(rng.normal(), rng.normal()), complex(rng.normal(), rng.normal())
    mix = phi.with_values(alpha * phi.values + beta * psi.values)
    sesq = inner(mix, psi) - (np.conj(alpha) * inner(phi, psi) + np.conj(beta) * inner(psi, psi))
    yield "inner_sesquilinear", abs(sesq), 1e-12

    s1 = shift([0.31], shift([0.47], psi))
    yield "shift_group_law", float(np.max(np.abs(s1.values - shift([0.78], psi).values))), 1e-12

    a = 13 * grid.dq
    lhs_cov = shift([a], multiply(f, shift([-a], psi)))
    rhs_cov = multiply(np.roll(f, 13), psi)
    yield "shift_covariance", float(np.max(np.abs(lhs_cov.values - rhs_cov.values))), 1e-12

    k1, a1, k2, a2 = rng.normal(size=4)
    w12 = weyl([k1], [a1], weyl([k2], [a2], psi))
    ref = weyl([k1 + k2], [a1 + a2], psi)
    ph = weyl_phase([k1], [a1], [k2], [a2])
    yield "weyl_composition", float(np.max(np.abs(w12.values - ph * ref.values))), 1e-12

    yield "ccr_residual", float(np.max(ccr_residual(psi))), 1e-8

    from .operators import wavevector_apply

    herm = inner(phi, wavevector_apply(1, psi)) - inner(wavevector_apply(1, phi), psi)
    yield "k_hermitian", abs(herm), 1e-10

    g1 = GalileiElement([0.4], np.eye(1), 0.2, [0.6])
    g2el = GalileiElement([-0.3], np.eye(1), 0.5, [-0.8])
    g3 = GalileiElement([0.1], np.eye(1), -0.4, [0.3])
    lhs_e = multiplier_exponent(g2el, g1, dyn) + multiplier_exponent(compose(g2el, g1), g3, dyn)
    rhs_e = multiplier_exponent(g1, g3, dyn) + multiplier_exponent(g2el, compose(g1, g3), dyn)
    yield "galilei_cocycle_exponent", abs(lhs_e - rhs_e), 1e-12

    yield "galilei_multiplier_residual", multiplier_residual(g2el, g1, psi, dyn), 1e-8

    yield "evolve_unitary", abs(norm(evolve(0.7, psi, dyn)) - norm(psi)), 1e-12

    e1 = position_expectation(evolve(0.5, psi, FreeDynamics(kappa=cfg.kappa, c=cfg.c, d=0.0)))
    e2 = position_expectation(evolve(0.5, psi, FreeDynamics(kappa=cfg.kappa, c=cfg.c, d=7.3)))
    yield "d_irrelevance", float(np.max(np.abs(e1 - e2))), 1e-10

    th = time_reverse(evolve(0.4, psi, dyn))
    rhs_t = evolve(-0.4, time_reverse(psi), dyn)
    yield "time_reversal_flow", float(np.max(np.abs(th.values - rhs_t.values))), 1e-10

    sol = heisenberg_free_solution(0.6, dyn)
    yield "heisenberg_solution", heisenberg_verify(sol, psi, dyn), 1e-8

    bad = 0
    for _ in range(100):
        mats = []
        for _ in range(3):
            m = rng.normal(size=(3, 3))
            qmat, _ = np.linalg.qr(m)
            if np.linalg.det(qmat) < 0:
                qmat[:, 0] *= -1
            mats.append(qmat)
        ra, rb, rc = mats
        if spin_multiplier(ra, rb) * spin_multiplier(ra @ rb, rc) != spin_multiplier(
            rb, rc
        ) * spin_multiplier(ra, rb @ rc):
            bad += 1
    yield "spin_cocycle_violations", float(bad), 0.5

    lift = lift_path(winding_path([0.0, 0.0, 1.0], 2 * np.pi, 16))
    yield "path_lift_2pi", float(np.max(np.abs(lift + np.eye(2)))), 1e-10

    rot = covering_map(section(rotation_matrix(3, 1, 1.1)))
    yield "section_roundtrip", float(np.max(np.abs(rot - rotation_matrix(3, 1, 1.1)))), 1e-10

    yield "chi_normalization", abs(characteristic(psi, 0.0, 0.0) - 1.0), 1e-10

    wgrid = make_grid(1, 128, 24.0)
    wstate = sample_gaussian(wgrid, 1.0)
    marg_q, _ = wigner_marginals(wstate)
    yield "wigner_marginal_q", float(np.max(np.abs(marg_q - np.abs(wstate.values) ** 2))), 1e-8

    pts = [(rng.normal(), rng.normal()) for _ in range(8)]
    mineig = twisted_posdef_min_eig(lambda kk, qq: characteristic(psi, kk, qq), pts)
    yield "twisted_posdef_min_eig", max(0.0, -mineig), 1e-8

    vn_grid = make_grid(1, 128, 32.0)
    proj = VNProjection(vn_grid)
    e_mat = vn_dense(proj)
    yield "vn_idempotent", float(np.linalg.norm(e_mat @ e_mat - e_mat, 2)), 1e-8
    yield "vn_symmetric", float(np.linalg.norm(e_mat - e_mat.conj().T, 2)), 1e-10
    yield "vn_rank_gap", rank_one_gap(e_mat), 1e-6
    qv = vn_grid.axis_coordinates()
    fv = np.exp(-(qv**2) / 6) * (1 + 0.2 * np.cos(qv))
    yield "vn_compression", compression_residual(proj, fv, 0.7, e_mat=e_mat), 1e-6

    cgrid = CircleGrid(64)
    kmat = circle_k_matrix(cgrid)
    evs = np.sort(np.linalg.eigvalsh(0.5 * (kmat + kmat.conj().T)))
    yield "circle_k_integers", float(np.max(np.abs(evs - np.arange(-31, 33)))), 1e-10

    p2 = circle_basis(2, cgrid)
    ov = circle_inner(p2, circle_evolve(0.9, p2, cfg.kappa, cfg.c))
    yield "circle_stationary", abs(abs(ov) - 1.0), 1e-12

    angles = cgrid.angles()
    fc = 1.0 + 0.5 * np.cos(angles) - 0.2 * np.sin(2 * angles)
    cdiff = circle_correlation_closed_form(fc, 0.3, 1.1, 2, cgrid) - circle_correlation_direct(
        fc, 0.3, 1.1, 2, cgrid
    )
    yield "circle_correlation", abs(cdiff), 1e-10


def cmd_check_invariants(cfg: RunConfig, out_dir: Path) -> int:
    rng = np.random.default_rng(cfg.seed)
    results = []
    for name, measured, default_tol in _invariant_suite(cfg, rng):
        tol = cfg.tol(name, default_tol)
        results.append(
            {"name": name, "measured": float(measured), "tolerance": tol,
             "pass": bool(measured < tol)}
        )
    all_pass = all(r["pass"] for r in results)
    _write_json(out_dir / "invariants.json", cfg, {"results": results, "pass": all_pass})
    if cfg.plots:
        from .plotting import save_invariant_chart

        save_invariant_chart(
            out_dir / "invariants.png",
            [r["name"] for r in results],
            [max(r["measured"], 1e-18) for r in results],
            [r["tolerance"] for r in results],
        )
    return 0 if all_pass else 1


# --- cocycle table --------------------------------------------------------------

def cmd_cocycle_table(cfg: RunConfig, out_dir: Path) -> int:
    rng = np.random.default_rng(cfg.seed)
    dyn = FreeDynamics(kappa=cfg.kappa, c=cfg.c, d=cfg.d)
    rows = []
    residuals = []

    grid1 = make_grid(1, 256, 30.0)
    psi1 = sample_gaussian(grid1, 1.0)
    for _ in range(120):
        g1 = GalileiElement(rng.normal(size=1) * 0.6, np.eye(1), rng.normal() * 0.4,
                            rng.normal(size=1) * 0.8)
        g2 = GalileiElement(rng.normal(size=1) * 0.6, np.eye(1), rng.normal() * 0.4,
                            rng.normal(size=1) * 0.8)
        xi = galilei_multiplier(g2, g1, dyn)
        res = multiplier_residual(g2, g1, psi1, dyn)
        residuals.append(res)
        rows.append([1, g2.a[0], g2.t, g2.v[0], g1.a[0], g1.t, g1.v[0], xi.real, xi.imag, res])

    # box-edge amplitude must stay below the 1e-8 target: non-lattice boost
    # phases see the principal-coordinate seam
    grid2 = make_grid(2, 128, 28.0)
    psi2 = sample_gaussian(grid2, 1.0)
    quarter = rotation_matrix(2, None, np.pi / 2)
    for i in range(80):
        rot1 = np.linalg.matrix_power(quarter, int(rng.integers(0, 4)))
        rot2 = np.linalg.matrix_power(quarter, int(rng.integers(0, 4)))
        g1 = GalileiElement(rng.normal(size=2) * 0.5, rot1, rng.normal() * 0.3,
                            rng.normal(size=2) * 0.6)
        g2 = GalileiElement(rng.normal(size=2) * 0.5, rot2, rng.normal() * 0.3,
                            rng.normal(size=2) * 0.6)
        xi = galilei_multiplier(g2, g1, dyn)
        res = multiplier_residual(g2, g1, psi2, dyn)
        residuals.append(res)
        rows.append([2, g2.a[0], g2.t, g2.v[0], g1.a[0], g1.t, g1.v[0], xi.real, xi.imag, res])

    _write_csv(
        out_dir / "cocycle.csv", cfg,
        ["dim", "b1", "s", "w1", "a1", "t", "v1", "xi_re", "xi_im", "residual"],
        rows,
    )
    tol = cfg.tol("max_residual", 1e-8)
    worst = float(np.max(residuals))
    _write_json(out_dir / "report.json", cfg,
                {"cases": len(rows), "max_residual": worst, "tolerance": tol,
                 "pass": bool(worst < tol)})
    if cfg.plots:
        from .plotting import save_residual_figure

        save_residual_figure(out_dir / "cocycle.png", residuals, tol,
                             "projective multiplier residuals")
    return 0 if worst < tol else 1


# --- spin demo -------------------------------------------------------------------

def cmd_spin_demo(cfg: RunConfig, out_dir: Path) -> int:
    rng = np.random.default_rng(cfg.seed)
    grid = make_grid(2, 128, 20.0)
    psi = sample_gaussian(grid, 1.0)
    base = sample_gaussian(grid, 1.0, center=[0.3, -0.2])
    field = SpinorField(psi.with_values(psi.values / np.sqrt(2.0)),
                        base.with_values(base.values / np.sqrt(2.0)))
    q1, q2 = grid.coordinate_mesh()
    f = np.exp(-(q1**2 + q2**2) / 6.0)

    rows = []
    phase_errs = []
    deltas, m_re, m_im, r_re, r_im = [], [], [], [], []
    for _ in range(12):
        alpha, beta = rng.uniform(-2.0, 2.0, size=2)
        ra = rotation_matrix(3, 3, alpha)
        rb = rotation_matrix(3, 3, beta)
        xi = spin_multiplier(ra, rb)
        corr = spinor_correlation(f, ([0.0, 0.0], ra), ([0.0, 0.0], rb), field)
        # component phases for the section convention v = e^{-i(angle/2) s3}
        zero = psi.with_values(np.zeros(grid.shape))
        f0 = SpinorField(psi, zero)
        c0 = spinor_correlation(f, ([0.0, 0.0], ra), ([0.0, 0.0], rb), f0)
        x00 = spinor_correlation(f, ([0.0, 0.0], np.eye(3)), ([0.0, 0.0], np.eye(3)), f0)
        ref = np.exp(0.5j * (alpha - beta)) * x00
        err = abs(c0 - ref)
        phase_errs.append(err)
        rows.append([alpha, beta, float(xi), corr.real, corr.imag, err])
        deltas.append(alpha - beta)
        m_re.append((c0 / x00).real)
        m_im.append((c0 / x00).imag)
        r_re.append(np.cos(0.5 * (alpha - beta)))
        r_im.append(np.sin(0.5 * (alpha - beta)))

    xi_pi = spin_multiplier(rotation_matrix(3, 3, np.pi), rotation_matrix(3, 3, np.pi))
    rows.append([np.pi, np.pi, float(xi_pi), 0.0, 0.0, abs(xi_pi + 1)])

    lift2 = lift_path(winding_path([1.0, 0.0, 0.0], 2 * np.pi, 16))
    lift4 = lift_path(winding_path([0.0, 1.0, 0.0], 4 * np.pi, 32))
    lift2_err = float(np.max(np.abs(lift2 + np.eye(2))))
    lift4_err = float(np.max(np.abs(lift4 - np.eye(2))))

    _write_csv(out_dir / "spin.csv", cfg,
               ["alpha", "beta", "xi", "corr_re", "corr_im", "phase_err"], rows)
    tol = cfg.tol("max_phase_error", 1e-8)
    lift_tol = cfg.tol("max_lift_error", 1e-10)
    ok = (max(phase_errs) < tol and xi_pi == -1 and lift2_err < lift_tol
          and lift4_err < lift_tol)
    _write_json(out_dir / "report.json", cfg, {
        "xi_pi_pi": xi_pi,
        "max_phase_error": float(max(phase_errs)),
        "lift_2pi_error": lift2_err,
        "lift_4pi_error": lift4_err,
        "tolerances": {"max_phase_error": tol, "max_lift_error": lift_tol},
        "pass": bool(ok),
    })
    if cfg.plots:
        from .plotting import save_spin_phase_figure

        order = np.argsort(deltas)
        save_spin_phase_figure(out_dir / "spin.png",
                               np.asarray(deltas)[order], np.asarray(m_re)[order],
                               np.asarray(m_im)[order], np.asarray(r_re)[order],
                               np.asarray(r_im)[order])
    return 0 if ok else 1


# --- von Neumann check ------------------------------------------------------------

def cmd_vn_check(cfg: RunConfig, out_dir: Path) -> int:
    rng = np.random.default_rng(cfg.seed)
    grid = make_grid(1, 128, 32.0)
    proj = VNProjection(grid)
    e_mat = vn_dense(proj)
    e_weyl = vn_dense_weyl(proj)
    q = grid.axis_coordinates()

    comp_errors = []
    for _ in range(50):
        coeff = rng.normal(size=3)
        f = (coeff[0] * np.exp(-(q**2) / 7) + coeff[1] * np.cos(0.8 * q) * np.exp(-(q**2) / 9)
             + coeff[2] * np.sin(0.5 * q) * np.exp(-(q**2) / 8))
        a = float(rng.uniform(-2.0, 2.0))
        comp_errors.append(compression_residual(proj, f, a, e_mat=e_mat))

    seed_state = sample_gaussian(grid, 1.2, center=[0.5], k0=[0.7])
    chi_state = range_state(proj, seed_state)
    wit_errors = []
    for _ in range(20):
        coeff = rng.normal(size=2)
        f = coeff[0] * np.exp(-(q**2) / 6) + coeff[1] * np.cos(0.6 * q) * np.exp(-(q**2) / 8)
        a, b = rng.uniform(-1.5, 1.5, size=2)
        wit_errors.append(
            abs(witness_correlation(chi_state, f, a, b) - witness_reference(grid, f, a, b))
        )

    svals = np.linalg.svd(e_mat, compute_uv=False)
    report = {
        "e2_gap": float(np.linalg.norm(e_mat @ e_mat - e_mat, 2)),
        "adjoint_gap": float(np.linalg.norm(e_mat - e_mat.conj().T, 2)),
        "rank_one_gap": rank_one_gap(e_mat),
        "build_route_gap": float(np.linalg.norm(e_mat - e_weyl, 2)),
        "bch_state_residual": weyl_vs_bch_state_residual(grid, 1.3, 0.8,
                                                         sample_gaussian(grid, 1.0)),
        "max_compression_error": float(np.max(comp_errors)),
        "max_witness_error": float(np.max(wit_errors)),
    }
    tols = {
        "e2_gap": cfg.tol("e2_gap", 1e-8),
        "adjoint_gap": cfg.tol("adjoint_gap", 1e-10),
        "rank_one_gap": cfg.tol("rank_one_gap", 1e-6),
        "build_route_gap": cfg.tol("build_route_gap", 1e-8),
        "bch_state_residual": cfg.tol("bch_state_residual", 1e-8),
        "max_compression_error": cfg.tol("max_compression_error", 1e-6),
        "max_witness_error": cfg.tol("max_witness_error", 1e-6),
    }
    ok = all(report[k] < tols[k] for k in tols)
    _write_json(out_dir / "vn_check.json", cfg,
                {"results": report, "tolerances": tols, "pass": bool(ok)})
    if cfg.plots:
        from .plotting import save_singular_values_figure

        save_singular_values_figure(out_dir / "vn_spectrum.png", svals[:40])
    return 0 if ok else 1


# --- circle spectrum ----------------------------------------------------------------

def cmd_circle_spectrum(cfg: RunConfig, out_dir: Path) -> int:
    cgrid = CircleGrid(cfg.grid_n if cfg.grid_n <= 1024 else 64)
    rows = circle_spectrum(cgrid, cfg.kappa, cfg.c)
    _write_csv(out_dir / "circle_spectrum.csv", cfg,
               ["n", "k_eigenvalue", "omega_eigenvalue"],
               [[r["n"], r["k_eigenvalue"], r["omega_eigenvalue"]] for r in rows])

    kmat = circle_k_matrix(cgrid)
    evs = np.sort(np.linalg.eigvalsh(0.5 * (kmat + kmat.conj().T)))
    half = cgrid.points // 2
    k_gap = float(np.max(np.abs(evs - np.arange(-half + 1, half + 1))))

    bump = circle_bump(cgrid)
    kq = circle_k_apply(circle_position_apply(bump))
    qk = circle_position_apply(circle_k_apply(bump))
    resid = 1j * (kq.values - qk.values) - bump.values
    ccr_bump = float(np.sqrt(np.sum(np.abs(resid) ** 2) * cgrid.spacing))

    p2 = circle_basis(2, cgrid)
    stat = abs(abs(circle_inner(p2, circle_evolve(1.3, p2, cfg.kappa, cfg.c))) - 1.0)

    tol_k = cfg.tol("k_integer_gap", 1e-10)
    tol_ccr = cfg.tol("ccr_bump_residual", 1e-8)
    tol_stat = cfg.tol("stationary_gap", 1e-12)
    ok = k_gap < tol_k and ccr_bump < tol_ccr and stat < tol_stat
    _write_json(out_dir / "report.json", cfg, {
        "rows": len(rows),
        "k_integer_gap": k_gap,
        "ccr_bump_residual": ccr_bump,
        "stationary_gap": float(stat),
        "tolerances": {"k_integer_gap": tol_k, "ccr_bump_residual": tol_ccr,
                       "stationary_gap": tol_stat},
        "pass": bool(ok),
    })
    if cfg.plots:
        from .plotting import save_spectrum_figure

        ns = [r["n"] for r in rows]
        save_spectrum_figure(out_dir / "circle_spectrum.png", ns,
                             [r["k_eigenvalue"] for r in rows],
                             [r["omega_eigenvalue"] for r in rows])
    return 0 if ok else 1


# --- state export -------------------------------------------------------------------

def cmd_export_state(cfg: RunConfig, out_dir: Path) -> int:
    grid = make_grid(cfg.grid_dim, cfg.grid_n, cfg.box)
    psi = sample_gaussian(grid, cfg.lam)
    path = out_dir / "state.txt"
    save_wavefunction(path, psi, extra_header=cfg.header())
    back = load_wavefunction(path)
    err = float(np.max(np.abs(back.values - psi.values)))
    from .fourier import dump_spectral

    (out_dir / "spectrum.txt").write_text(dump_spectral(forward(psi), extra_header=cfg.header()))
    _write_json(out_dir / "report.json", cfg,
                {"roundtrip_error": err, "pass": bool(err == 0.0)})
    return 0 if err == 0.0 else 1


# --- configuration plumbing ----------------------------------------------------------

_COMMANDS = {
    "demo-gaussian": cmd_demo_gaussian,
    "check-invariants": cmd_check_invariants,
    "cocycle-table": cmd_cocycle_table,
    "spin-demo": cmd_spin_demo,
    "vn-check": cmd_vn_check,
    "circle-spectrum": cmd_circle_spectrum,
    "export-state": cmd_export_state,
}


def _load_config_file(path: str) -> dict:
    text = Path(path).read_text().strip()
    if text.startswith("{"):
        return json.loads(text)
    out = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        out[key.strip()] = value.strip()
    return out


_CONFIG_FIELDS = {
    "grid_dim": int, "grid_n": int, "box": float, "kappa": float, "c": float,
    "lam": float, "d": float, "seed": int, "out": str, "plots": lambda v: str(v).lower() not in ("0", "false", "no"),
}


def build_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(command=args.command)
    if args.config:
        file_values = _load_config_file(args.config)
        for key, value in file_values.items():
            if key == "tol_overrides":
                cfg.tol_overrides.update({k: float(v) for k, v in dict(value).items()})
                continue
            if key not in _CONFIG_FIELDS:
                raise ValueError(f"unknown config key {key!r}")
            setattr(cfg, key, _CONFIG_FIELDS[key](value))
    # flags win over the file
    for flag, key in [("grid_dim", "grid_dim"), ("grid_n", "grid_n"), ("box", "box"),
                      ("kappa", "kappa"), ("c", "c"), ("lam", "lam"), ("d", "d"),
                      ("seed", "seed"), ("out", "out")]:
        value = getattr(args, flag)
        if value is not None:
            setattr(cfg, key, value)
    if args.no_plots:
        cfg.plots = False
    for item in args.tol_override or []:
        key, _, value = item.partition("=")
        if not value:
            raise ValueError(f"bad --tol-override {item!r}: expected KEY=VAL")
        tol = float(value)
        if tol <= 0:
            raise ValueError(f"tolerance for {key!r} must be positive")
        cfg.tol_overrides[key.strip()] = tol
    if not cfg.out:
        cfg.out = os.environ.get(ENV_OUT, "gridqm-out")
    return cfg


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gridqm",
        description="Covariant quantum mechanics on periodic grids: demos and checks.",
    )
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", help="JSON or key=value configuration file")
    parser.add_argument("--grid-n", dest="grid_n", type=int, default=None)
    parser.add_argument("--grid-dim", dest="grid_dim", type=int, default=None)
    parser.add_argument("--box", type=float, default=None)
    parser.add_argument("--kappa", type=float, default=None)
    parser.add_argument("--c", type=float, default=None)
    parser.add_argument("--lambda", dest="lam", type=float, default=None)
    parser.add_argument("--d", type=float, default=None)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--out", default=None)
    parser.add_argument("--tol-override", action="append", metavar="KEY=VAL")
    parser.add_argument("--no-plots", action="store_true")
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        cfg = build_config(args)
        out_dir = Path(cfg.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        return _COMMANDS[args.command](cfg, out_dir)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"gridqm: configuration error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
