"""Acceptance checks, one PASS/FAIL line per criterion.

Run alone with ``pytest tests/test_acceptance.py -v``; the lines are repeated
in the terminal summary.  Expensive minimizations are module-scoped fixtures
shared between criteria.
"""
import math
import warnings

import numpy as np
import pytest

from gpvortex import analytic, gp2d, radial, vortex
from gpvortex.params import ReducedParams

from conftest import record

S, GAMMA = 4.0, 1.0
ALPHA = math.sqrt(6.0)

# independent 40-digit evaluations of the closed forms (mpmath)
OMEGA_C_ORACLE = 41.89755987820824956757
BIG_OMEGA_C_ORACLE = 13.81976597885341917061
X_OUT_ORACLE = 0.99234319760992796417
MU_TF_ORACLE = 96.97227580439728879900

CONVERGED_STATES = []


def _remember(label, result, rp):
    CONVERGED_STATES.append((label, result, rp))
    return result


def gv_bracket(omega0):
    return ALPHA / 2 + math.sqrt(ALPHA / (2 * math.pi * omega0)) / (2 * math.pi)


# ---------------------------------------------------------------- 1, 2

def test_criterion_01_critical_speeds():
    w = analytic.omega_c(0.1, S, GAMMA)
    W = analytic.Omega_c(0.1, S, GAMMA)
    ew = abs(w / OMEGA_C_ORACLE - 1)
    eW = abs(W / BIG_OMEGA_C_ORACLE - 1)
    ok = ew < 1e-9 and eW < 1e-9
    record(1, ok, f"omega_c={w:.10f} (rel err {ew:.1e}), Omega_c={W:.10f} (rel err {eW:.1e})")
    assert ok


def test_criterion_02_tf_exactness():
    tf = analytic.tf_profile(ReducedParams(0.1, S, GAMMA, "omega", 0.0))
    ex = abs(tf.x_out / X_OUT_ORACLE - 1)
    em = abs(tf.mu_tf / MU_TF_ORACLE - 1)
    ok = ex < 1e-8 and em < 1e-8 and tf.x_in == 0.0
    record(2, ok, f"x_out rel err {ex:.1e}, mu_TF rel err {em:.1e}")
    assert ok


# ---------------------------------------------------------------- 3, 4

def test_criterion_03_giant_vortex_energy_bracket():
    ladder = (25.0, 100.0, 400.0)
    rel, excess = [], []
    for o0 in ladder:
        rp = ReducedParams.from_omega0(0.05, S, GAMMA, o0)
        e = radial.gv_profile(rp).energy / rp.speed
        rel.append(abs(e / gv_bracket(o0) - 1))
        excess.append(e - ALPHA / 2)
    slope = np.polyfit(np.log(ladder), np.log(excess), 1)[0]
    ok = max(rel) < 0.02 and -0.6 <= slope <= -0.4
    record(3, ok, f"max rel dev from bracket {max(rel):.2e}, fitted exponent {slope:.3f}")
    assert ok


def test_criterion_04_gaussian_and_symmetry_trends():
    gauss, sym = [], []
    for o0 in (10.0, 100.0, 1000.0):
        rp = ReducedParams.from_omega0(0.05, S, GAMMA, o0)
        gauss.append(radial.check_gaussian_closeness(radial.gv_profile(rp), Omega0=o0))
        annulus = radial.gv_profile(rp, annulus=True)
        sym_dev = radial.check_symmetry_closeness(annulus, radial.sym_profile(rp))
        # same normalization as the Gaussian deviation
        sym.append(sym_dev * rp.eps * math.sqrt(2 * math.pi) * rp.speed**-0.25)
    decreasing = all(b < a for a, b in zip(gauss, gauss[1:]))
    closer = all(s < g for s, g in zip(sym, gauss))
    ok = decreasing and closer
    record(4, ok, "gaussian dev " + ", ".join(f"{g:.2e}" for g in gauss)
           + "; symmetry dev " + ", ".join(f"{s:.2e}" for s in sym))
    assert ok


# ---------------------------------------------------------------- 5

def test_criterion_05_energy_decoupling_identity():
    rp = ReducedParams(0.1, S, GAMMA, "Omega", 0.8 * analytic.Omega_c(0.1, S, GAMMA))
    half = 1.5 * analytic.tf_profile(rp).x_out
    cfg = gp2d.GPConfig(rp, truncation_radius=half)
    like = gp2d.ComplexField2D.zeros(128, half)
    g0 = gp2d.g0_on_grid(radial.g0_profile(rp), like, cfg)
    X, Y = like.mesh()
    rng = np.random.default_rng(5)
    worst = 0.0
    ok = True
    for _ in range(20):
        u = np.zeros_like(X, dtype=complex)
        for _ in range(6):
            kx, ky = rng.normal(scale=3.0, size=2)
            u += complex(*rng.normal(size=2)) * np.exp(1j * (kx * X + ky * Y))
        psi = like.copy(values=np.real(g0.values) * (1 + 0.05 * u)).normalized()
        d = gp2d.decouple_energy(psi, g0, rp, cfg=cfg)
        allowed = 1e-6 * abs(d.E_gp) + d.budget
        worst = max(worst, abs(d.defect) / allowed)
        ok &= abs(d.defect) <= allowed
    record(5, ok, f"20 random fields, worst |defect|/allowance {worst:.2e}")
    assert ok


# ---------------------------------------------------------------- 6

HOLE_FACTORS = (0.5, 0.8, 1.6, 2.0)


def _lattice_minimizer(rp, n, tol=1e-7):
    tf = analytic.tf_profile(rp)
    half = 1.5 * tf.x_out
    trial = gp2d.trial_vortex_lattice(rp, n=n, half_width=half,
                                      hole_winding=int(round(rp.speed * tf.x_in**2)))
    cfg = gp2d.GPConfig(rp, tol_residual=tol, max_iters=6000, truncation_radius=half)
    return gp2d.minimize(trial, cfg)


@pytest.fixture(scope="module")
def hole_sweep():
    oc = analytic.Omega_c(0.1, S, GAMMA)
    out = {}
    for fac in HOLE_FACTORS:
        rp = ReducedParams(0.1, S, GAMMA, "Omega", fac * oc)
        res = _lattice_minimizer(rp, 256)
        out[fac] = _remember(f"hole sweep {fac} Omega_c", res, rp)
    return out


@pytest.mark.slow
def test_criterion_06_hole_transition(hole_sweep):
    rows = []
    ok = True
    for fac, res in hole_sweep.items():
        h = vortex.detect_hole(res.psi)
        rows.append(f"{fac}:{h:.3f}")
        ok &= res.converged
        if fac < 0.9:
            ok &= h == 0.0
        elif fac > 1.5:
            ok &= h > 0.1
    record(6, ok, "hole radius by Omega/Omega_c " + " ".join(rows))
    assert ok


# ---------------------------------------------------------------- 7, 8

LATTICE_RP = ReducedParams(0.08, S, GAMMA, "Omega", 37.5)


@pytest.fixture(scope="module")
def lattice_state():
    res = _lattice_minimizer(LATTICE_RP, 384)
    return _remember("lattice eps=0.08", res, LATTICE_RP)


@pytest.mark.slow
def test_criterion_07_vorticity_uniformity(lattice_state):
    rp = LATTICE_RP
    assert abs(rp.eps * rp.speed - 3.0) < 1e-12
    region = vortex.build_region("R_bulk", rp)
    cells = vortex.find_vortices(lattice_state.psi, speed=rp.speed)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", vortex.SmallRegionWarning)
        a = vortex.uniformity_ratio(lattice_state.psi, region, rp.speed, 0.0, math.pi / 2, cells=cells)
        b = vortex.uniformity_ratio(lattice_state.psi, region, rp.speed, math.pi, 1.5 * math.pi,
                                    cells=cells)
    within = all(0.7 <= u.ratio <= 1.3 for u in (a, b))
    mutual = abs(a.ratio - b.ratio) <= 0.25 * max(a.ratio, b.ratio)
    ok = lattice_state.converged and within and mutual
    record(7, ok, f"quarter-annulus ratios {a.ratio:.3f} and {b.ratio:.3f} "
           f"(R_bulk [{region.x_lo:.3f}, {region.x_hi:.3f}])")
    assert ok


@pytest.mark.slow
def test_criterion_08_lattice_energy(lattice_state):
    rp = LATTICE_RP
    e_tf = analytic.tf_energy(analytic.tf_profile(rp))
    lead = rp.speed * abs(math.log(rp.eps**4 * rp.speed)) / 6
    factor = (lattice_state.energy - e_tf) / lead
    ok = lattice_state.converged and 0.5 <= factor <= 2.0
    record(8, ok, f"(E_GP - E_TF)/leading term = {factor:.3f}")
    assert ok


# ---------------------------------------------------------------- 9, 10

GV_LADDER = (0.1, 0.3, 1.0, 3.0, 10.0)


@pytest.fixture(scope="module")
def gv_sweep():
    out = []
    for o0 in GV_LADDER:
        rp = ReducedParams.from_omega0(0.25, S, GAMMA, o0)
        seeded = gp2d.seeded_giant_vortex(rp, count=8)
        res = gp2d.minimize(seeded, gp2d.GPConfig(rp, tol_residual=1e-7, max_iters=4000))
        _remember(f"giant vortex Omega0={o0}", res, rp)
        region = vortex.build_region("A_bulk", rp)
        cells = [c for c in vortex.find_vortices(res.psi, speed=rp.speed)
                 if region.contains(math.hypot(c.x, c.y))]
        out.append((o0, rp, res, region, len(cells)))
    return out


@pytest.mark.slow
def test_criterion_09_giant_vortex_regime(gv_sweep):
    free = [row for row in gv_sweep if row[4] == 0]
    assert free, "no vortex-free A_bulk on the ladder"
    o0, rp, res, region, _ = free[0]
    stays_free = all(row[4] == 0 for row in gv_sweep if row[0] >= o0)
    deg = vortex.degree_on_circle(res.psi, 1.0)
    ratio = vortex.min_ratio_to_profile(res.psi, radial.gv_profile(rp), region)
    deg_err = abs(deg - rp.speed) / rp.speed
    ok = res.converged and stays_free and deg_err <= 0.05 and ratio >= 0.9
    record(9, ok, f"first vortex-free Omega0={o0} (Omega={rp.speed:.1f}), degree {deg} "
           f"(rel err {deg_err:.3f}), min |psi|/g_GV {ratio:.4f}")
    assert ok


def _fd_second_variation(fn, n, d, rp, P, M, t=1e-4):
    nt = 4 * d + 8
    th = 2 * np.pi * np.arange(nt) / nt
    xi = P[:, None] * np.exp(1j * d * th) + M[:, None] * np.exp(-1j * d * th)
    base = np.repeat(fn.values[:, None], nt, axis=1).astype(complex)
    cfg = gp2d.GPConfig(rp)

    def energy(s):
        return gp2d.energy(gp2d.PolarField(fn.grid, base + s * xi, n).normalized(), cfg)

    return (energy(t) + energy(-t) - 2 * energy(0.0)) / (2 * t * t)


@pytest.fixture(scope="module")
def symmetric_vortex(gv_sweep):
    o0 = next(row[0] for row in gv_sweep if row[4] == 0)
    rp = ReducedParams.from_omega0(0.25, S, GAMMA, o0)
    n, fn, _ = radial.optimal_winding(rp)
    return rp, n, fn


@pytest.mark.slow
def test_criterion_10_symmetry_breaking(symmetric_vortex):
    rp, n, fn = symmetric_vortex
    qs, agree = [], []
    for d in range(1, 9):
        P, M = radial.xi_components(fn, n, d)
        nrm = math.sqrt(fn.grid.integrate(P**2 + M**2))
        P, M = P / nrm, M / nrm
        q = radial.second_variation_Q(fn, n, d, rp, P=P, M=M)
        fd = _fd_second_variation(fn, n, d, rp, P, M)
        qs.append(q)
        agree.append(abs(q - fd) / abs(fd))
    negative = min(qs) < 0
    matches = max(agree) <= 0.05
    record(10, negative and matches,
           f"n={n}, min_d Q = {min(qs):.4g} (negative: {negative}), "
           f"max |Q - FD|/|FD| = {max(agree):.2e}")
    assert matches
    assert negative, "no d in 1..8 makes the second variation negative"


# ---------------------------------------------------------------- 11

def _random_smooth_phase_fields(rng, count, n=16):
    """exp(i phi) times a few planted unit vortices, phi a random low-mode Fourier sum."""
    x = np.linspace(-1, 1, n)
    X, Y = np.meshgrid(x, x)
    for _ in range(count):
        phi = np.zeros_like(X)
        for _ in range(4):
            kx, ky = rng.normal(scale=2.0, size=2)
            phi += rng.normal() * np.sin(kx * X + ky * Y + rng.uniform(0, 2 * np.pi))
        z = X + 1j * Y
        v = np.exp(1j * phi)
        for _ in range(rng.integers(0, 4)):
            z0 = complex(*rng.uniform(-0.8, 0.8, size=2))
            v = v * (z - z0) if rng.random() < 0.5 else v * np.conj(z - z0)
        yield gp2d.ComplexField2D(v, (-1, 1, -1, 1))


@pytest.mark.slow
def test_criterion_11_invariant_suites(hole_sweep, lattice_state, gv_sweep):
    rng = np.random.default_rng(11)
    worst = 0.0
    for fld in _random_smooth_phase_fields(rng, 10_000):
        c = vortex.plaquette_circulation(fld)
        worst = max(worst, float(np.max(np.abs(c - np.rint(c)))))
    integral = worst < 1e-9

    gaps = []
    for label, res, rp in CONVERGED_STATES:
        if not res.converged:
            continue
        cfg = gp2d.GPConfig(rp)
        e = gp2d.energy(res.psi, cfg)
        mu = gp2d.chemical_potential(res.psi, cfg)
        q = gp2d.quartic_norm(res.psi)
        gaps.append(abs(mu - (e + q / rp.eps**2)) / abs(mu))
    identity = bool(gaps) and max(gaps) <= 1e-8

    # |mu_v| <= |grad u|^2 on u = psi / g0 from a lattice minimizer
    rp = LATTICE_RP
    psi = lattice_state.psi
    g0 = gp2d.g0_on_grid(radial.g0_profile(rp), psi, gp2d.GPConfig(rp))
    g = np.real(g0.values)
    trusted = g * g > gp2d.UNTRUSTED_THRESHOLD * np.max(g * g)
    u = np.where(trusted, psi.values / np.where(trusted, g, 1.0), 0.0)
    muv, grad2 = gp2d.vorticity_and_gradient(u, psi.hx, psi.hy)
    excess = float(np.max((np.abs(muv) - grad2)[trusted]))
    bounded = excess <= 1e-12 * float(np.max(grad2))

    ok = integral and identity and bounded
    record(11, ok, f"winding deviation {worst:.1e} over 10^4 fields; "
           f"mu identity max gap {max(gaps) if gaps else float('nan'):.1e} over {len(gaps)} states; "
           f"max(|mu_v| - |grad u|^2) = {excess:.1e}")
    assert ok
