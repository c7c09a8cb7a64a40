"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line."""

import math

import numpy as np
import pytest

from conftest import MULTIPLE, SEMI, L, cached_report
from hillkrein.elliptic import complete_K
from hillkrein.etaprobe import eta_curve, cnoidal_unit
from hillkrein.grid import Grid
from hillkrein.hillops import analytic_cnoidal_eigs, assemble_hill, inv_quadratic_form
from hillkrein.stability import Verdict, betas, block_data, s_matrix
from hillkrein.waves import (
    Family,
    WaveProfile,
    d_l2_domega,
    eval_wave_derivative,
    l2_norm_sq,
    ode_residual,
    omega_from_k,
    wave_samples,
)

U, S, X = Verdict.UNSTABLE, Verdict.STABLE, Verdict.INCONCLUSIVE


@pytest.fixture
def verdict_line(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {number}: {'PASS' if ok else 'FAIL'} - {detail}")
        return ok
    return emit


def test_criterion_01_dnoidal_verdicts(verdict_line):
    rows, ok = [], True
    for case, expected in zip(MULTIPLE, (U, S, S, S)):
        rep = cached_report(MULTIPLE[case], Family.DNOIDAL)
        good = rep.krein.verdict is expected and rep.jl.verdict is expected
        if expected is S:
            good &= rep.jl.max_re <= 1e-4 * rep.profile.omega
        ok &= good
        rows.append(f"{case}:{rep.krein.verdict.value}/{rep.jl.verdict.value}")
    assert verdict_line(1, ok, "dnoidal full " + " ".join(rows))


def test_criterion_02_cnoidal_free_B(verdict_line):
    rep = cached_report(MULTIPLE["IV"], Family.CNOIDAL)
    kr = rep.krein
    ok = (kr.n_L, kr.n_V, kr.diff, kr.verdict) == (4, 1, 3, U) and rep.jl.max_re > 1e-3
    assert verdict_line(2, ok, f"n_L={kr.n_L} n_V={kr.n_V} diff={kr.diff} {kr.verdict.value}, "
                               f"max Re={rep.jl.max_re:.3e}")


def test_criterion_03_odd_snoidal(verdict_line):
    got = []
    for case in MULTIPLE:
        kr = cached_report(MULTIPLE[case], Family.SNOIDAL, "odd").krein
        got.append((kr.n_L, kr.diff, kr.verdict))
    ok = got == [(2, 1, U), (1, 0, S), (2, 0, S), (1, 0, S)]
    assert verdict_line(3, ok, "odd (n_L, diff, verdict) " + str([(a, b, c.value) for a, b, c in got]))


def test_criterion_04_semitrivial(verdict_line):
    full = {g: cached_report(p, Family.CNOIDAL).krein for g, p in SEMI.items()}
    odd = {g: cached_report(p, Family.SNOIDAL, "odd").krein for g, p in SEMI.items()}
    c2 = full[2.0]
    ok = (c2.n_L, c2.n_V, c2.verdict) == (4, 1, U)
    ok &= [odd[g].verdict for g in SEMI] == [S, S, U, U]
    ok &= all(full[g].verdict is X for g in (1.0, 4.0, 6.0))
    detail = (f"full gamma=kappa1: n_L={c2.n_L} n_V={c2.n_V} {c2.verdict.value}; "
              f"full I,III,IV: {[full[g].verdict.value for g in (1.0, 4.0, 6.0)]}; "
              f"odd: {[odd[g].verdict.value for g in SEMI]}")
    assert verdict_line(4, ok, detail)


def test_criterion_05_analytic_eigenvalues(verdict_line):
    # lowest L1 eigenvalue taken from the Rayleigh quotient of the listed
    # eigenfunction, (1 - 2k^2 - 2a) 16K^2/L^2
    g = Grid(256, L)
    worst = 0.0
    for k in (0.75, 0.85, 0.95):
        p = WaveProfile.from_k(Family.CNOIDAL, L, k)
        scale = 16 * complete_K(k) ** 2 / L**2
        for which, beta in (("L1", 3.0), ("L2", 1.0)):
            exact = np.sort([lam for lam, _ in analytic_cnoidal_eigs(which, k, L)])
            disc = np.linalg.eigvalsh(assemble_hill(beta, p, g).matrix)[: len(exact)]
            err = np.abs(disc - exact) / np.maximum(np.abs(exact), scale)
            worst = max(worst, float(np.max(err)))
    lam1 = analytic_cnoidal_eigs("L1", 0.8, L)[1][0]
    ok = worst <= 1e-6 and abs(lam1 + 3.098) < 5e-4
    assert verdict_line(5, ok, f"max relative error {worst:.2e} (lowest L1 eigenvalue in the "
                               f"(1-2k^2-2a) form, see 5b); lambda1(k=0.8) = {lam1:.4f}")


def test_criterion_05b_printed_lowest_formula(verdict_line):
    # record that (1 - 6k^2 - 2a) 16K^2/L^2 is not an eigenvalue of the discrete L1
    g = Grid(256, L)
    gaps = []
    for k in (0.75, 0.85, 0.95):
        p = WaveProfile.from_k(Family.CNOIDAL, L, k)
        s = 16 * complete_K(k) ** 2 / L**2
        a = math.sqrt(1 - k * k + k**4)
        vals = np.linalg.eigvalsh(assemble_hill(3.0, p, g).matrix)
        gaps.append(float(np.min(np.abs(vals - (1 - 6 * k * k - 2 * a) * s))))
    ok = min(gaps) > 0.1
    assert verdict_line("5b", ok, f"printed lowest-L1 formula misses the spectrum by >= {min(gaps):.3f}")


def test_criterion_06_mass_derivative(verdict_line):
    ok, worst = True, 0.0
    grids = {Family.DNOIDAL: np.linspace(0.2, 0.98, 20), Family.CNOIDAL: np.linspace(0.72, 0.98, 20)}
    for fam, ks in grids.items():
        w_lo = omega_from_k(fam, L, fam.k_range[0])
        for k in ks:
            p = WaveProfile.from_k(fam, L, float(k), 2.0)
            d = d_l2_domega(p)
            h = 1e-4 * (p.omega - w_lo)
            fd = (l2_norm_sq(WaveProfile.from_omega(fam, L, p.omega + h, 2.0))
                  - l2_norm_sq(WaveProfile.from_omega(fam, L, p.omega - h, 2.0))) / (2 * h)
            ok &= d > 0
            worst = max(worst, abs(d - fd) / abs(fd))
    ok &= worst <= 1e-6
    assert verdict_line(6, ok, f"positive on both 20-point grids; max FD mismatch {worst:.2e}")


def test_criterion_07_eta_curve(verdict_line):
    samples = eta_curve(0.72, 0.99, 50)
    g = Grid(512, L)
    worst = 0.0
    for s in samples:
        p = cnoidal_unit(s.k, L)
        q = inv_quadratic_form(assemble_hill(1.0, p, g), eval_wave_derivative(p, g.nodes))
        worst = max(worst, abs(s.chi_phi_inner - q) / abs(q))
    ok = len(samples) == 50 and all(s.ok and s.eta > 0 for s in samples) and worst <= 1e-5
    assert verdict_line(7, ok, f"min eta {min(s.eta for s in samples):.4f}; IVP vs matrix {worst:.2e}")


def test_criterion_08_inverse_identity(verdict_line):
    g = Grid(256, L)
    worst = 0.0
    c = MULTIPLE["I"].cscale
    for fam in (Family.DNOIDAL, Family.CNOIDAL):
        p = WaveProfile.from_k(fam, L, 0.8, c)
        val = inv_quadratic_form(assemble_hill(3.0 * c, p, g), wave_samples(p, g))
        target = -0.5 * d_l2_domega(p)
        worst = max(worst, abs(val - target) / abs(target))
    assert verdict_line(8, worst <= 1e-5, f"max relative mismatch {worst:.2e}")


def _ordered(ops, order, j=6):
    lam = {lab: np.linalg.eigvalsh(op.matrix)[:j] for lab, op in ops.items()}
    return all(np.all(lam[a] < lam[b]) for a, b in zip(order, order[1:]))


def test_criterion_09_comparison_orderings(verdict_line):
    from hillkrein.stability import slot_operators

    orders = {"I": ("L1", "L3", "L2", "L4"), "II": ("L1", "L2", "L3", "L4")}
    g = Grid(256, L)
    results = []
    for case, order in orders.items():
        params = MULTIPLE[case]
        data = block_data(params)
        for fam, par in ((Family.DNOIDAL, "full"), (Family.CNOIDAL, "full"), (Family.SNOIDAL, "odd")):
            p = WaveProfile.from_k(fam, L, 0.8, params.cscale)
            ops = dict(zip(data.slot_labels, slot_operators(p, data, g, par)))
            results.append(_ordered(ops, order))
    assert verdict_line(9, all(results), f"{sum(results)}/{len(results)} orderings hold")


def test_criterion_10_structure(verdict_line):
    sim = max(block_data(p).similarity_error() for p in MULTIPLE.values())
    S1 = s_matrix(MULTIPLE["I"])
    blocks = np.sort(np.concatenate([np.linalg.eigvalsh(S1[:2, :2]), np.linalg.eigvalsh(S1[2:, 2:])]))
    beta_ok = np.allclose(betas(MULTIPLE["I"]), (7.5, 2.5, 4.5, -0.5), rtol=1e-14)
    beta_ok &= np.allclose(blocks, np.sort(betas(MULTIPLE["I"])), rtol=1e-12)
    g = Grid(256, L)
    res = max(ode_residual(WaveProfile.from_k(f, L, 0.8, 2.5), g) for f in Family)
    sym = 0.0
    for case in MULTIPLE:
        jl = cached_report(MULTIPLE[case], Family.CNOIDAL).jl
        lam = jl.eigenvalues[jl.trusted]
        for mu in (-lam, np.conj(lam)):
            sym = max(sym, float(np.max(np.abs(lam[:, None] - mu[None, :]).min(axis=1))))
    ok = sim <= 1e-10 and beta_ok and res <= 1e-8 and sym <= 1e-6
    assert verdict_line(10, ok, f"S=RMR^-1 err {sim:.1e}; betas ok={beta_ok}; ODE residual {res:.1e}; "
                                f"J L symmetry {sym:.1e}")
