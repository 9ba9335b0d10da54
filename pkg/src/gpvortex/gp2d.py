"""Two-dimensional GP minimization, trial states and energy decoupling.

Two discretizations share one minimizer:

* `ComplexField2D`: uniform Cartesian grid with homogeneous Dirichlet data on
  the bounding square.  The kinetic term uses Peierls link phases, so
  |(grad - iA) psi|^2 becomes sum over links |e^{-i theta_l} psi_j - psi_i|^2 / h^2.
* `PolarField`: cell-centred radial nodes times a periodic angular grid,
  storing phi with psi = e^{i n theta} phi.  Angular derivatives are spectral,
  radial ones finite-volume.  Used where the circulation is too large for a
  Cartesian grid.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import fft as sfft

from . import analytic, radial
from .errors import DomainError, SolverError
from .params import BIG_OMEGA_FRAME, OMEGA_FRAME, ReducedParams

UNTRUSTED_THRESHOLD = 1e-10
_ROUNDOFF = 1e-13


# ---------------------------------------------------------------- fields

@dataclass(eq=False)
class ComplexField2D:
    """values[j, i] = psi(x_i, y_j); nodes are interior, psi = 0 on the bounds."""

    values: np.ndarray
    bounds: tuple

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.ndim != 2:
            raise DomainError("field values must be a 2D array")
        x0, x1, y0, y1 = (float(b) for b in self.bounds)
        if not (x1 > x0 and y1 > y0):
            raise DomainError("empty bounding box")
        self.bounds = (x0, x1, y0, y1)

    @classmethod
    def zeros(cls, n, half_width, ny=None):
        ny = n if ny is None else ny
        return cls(np.zeros((ny, n), complex), (-half_width, half_width, -half_width, half_width))

    @classmethod
    def from_function(cls, fun, n, half_width):
        fld = cls.zeros(n, half_width)
        X, Y = fld.mesh()
        fld.values = np.asarray(fun(X, Y), dtype=complex) * np.ones_like(X)
        return fld

    @property
    def nx(self):
        return self.values.shape[1]

    @property
    def ny(self):
        return self.values.shape[0]

    @property
    def hx(self):
        return (self.bounds[1] - self.bounds[0]) / (self.nx + 1)

    @property
    def hy(self):
        return (self.bounds[3] - self.bounds[2]) / (self.ny + 1)

    @property
    def cell_area(self):
        return self.hx * self.hy

    @property
    def x(self):
        return self.bounds[0] + self.hx * np.arange(1, self.nx + 1)

    @property
    def y(self):
        return self.bounds[2] + self.hy * np.arange(1, self.ny + 1)

    def mesh(self):
        return np.meshgrid(self.x, self.y)

    def radius(self):
        X, Y = self.mesh()
        return np.hypot(X, Y)

    def density(self):
        return np.abs(self.values) ** 2

    @property
    def mass(self):
        return float(np.sum(self.density()) * self.cell_area)

    def normalized(self):
        m = self.mass
        if not m > 0:
            raise DomainError("cannot normalize a zero field")
        return replace(self, values=self.values / math.sqrt(m))

    def copy(self, values=None):
        return ComplexField2D(self.values.copy() if values is None else values, self.bounds)

    def same_grid(self, other):
        return self.values.shape == other.values.shape and self.bounds == other.bounds


@dataclass(eq=False)
class PolarField:
    """psi(r, theta) = exp(i winding theta) values[i, k] on an annular grid."""

    grid: radial.RadialGrid
    values: np.ndarray
    winding: int = 0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.ndim != 2 or self.values.shape[0] != self.grid.size:
            raise DomainError("polar values must have shape (n_r, n_theta)")

    @property
    def ntheta(self):
        return self.values.shape[1]

    @property
    def r(self):
        return self.grid.nodes

    @property
    def theta(self):
        return 2 * np.pi * np.arange(self.ntheta) / self.ntheta

    @property
    def weights(self):
        return self.grid.weights[:, None] / self.ntheta

    def density(self):
        return np.abs(self.values) ** 2

    @property
    def mass(self):
        return float(np.sum(self.weights * self.density()))

    def normalized(self):
        return replace(self, values=self.values / math.sqrt(self.mass))

    def full_values(self):
        return self.values * np.exp(1j * self.winding * self.theta)[None, :]

    def copy(self, values=None):
        return PolarField(self.grid, self.values.copy() if values is None else values, self.winding)

    def to_cartesian(self, n, half_width):
        """Bilinear resampling in (r, theta) onto a Cartesian grid (for rendering)."""
        fld = ComplexField2D.zeros(n, half_width)
        X, Y = fld.mesh()
        R, T = np.hypot(X, Y), np.mod(np.arctan2(Y, X), 2 * np.pi)
        r = self.r
        nt = self.ntheta
        tk = T / (2 * np.pi) * nt
        k0 = np.floor(tk).astype(int) % nt
        k1 = (k0 + 1) % nt
        wt = tk - np.floor(tk)
        ir = np.clip(np.searchsorted(r, R) - 1, 0, r.size - 2)
        wr = np.clip((R - r[ir]) / (r[ir + 1] - r[ir]), 0, 1)
        v = self.values
        val = ((1 - wr) * ((1 - wt) * v[ir, k0] + wt * v[ir, k1])
               + wr * ((1 - wt) * v[ir + 1, k0] + wt * v[ir + 1, k1]))
        inside = (R >= r[0]) & (R <= r[-1])
        fld.values = np.where(inside, val * np.exp(1j * self.winding * T), 0)
        return fld


# ---------------------------------------------------------------- configuration

@dataclass(frozen=True)
class GPConfig:
    rp: ReducedParams
    dt: float = 1.0
    max_iters: int = 20000
    tol_energy: float = 1e-12
    tol_residual: float = 1e-6
    truncation_radius: float | None = None
    magnetic: bool = True
    method: str = "cg"
    window: int = 20

    @property
    def frame(self):
        return self.rp.frame

    def without_rotation(self):
        return replace(self, magnetic=False)


def scalar_potential(rp: ReducedParams, r):
    """Potential multiplying |psi|^2 besides the magnetic term."""
    r = np.asarray(r, dtype=float)
    if rp.frame == OMEGA_FRAME:
        return r**rp.s / rp.eps**2 - 0.5 * rp.gamma * rp.speed**2 * r**2
    return rp.gamma * rp.speed**2 * analytic.eval_W(r, rp.s)


def default_half_width(rp: ReducedParams):
    tf = analytic.tf_profile(rp)
    if rp.frame == OMEGA_FRAME:
        return 1.5 * tf.x_out
    return max(1.5 * tf.x_out, 1.0 + 12.0 * rp.speed**-0.5)


def make_grid(rp: ReducedParams, n: int, half_width=None) -> ComplexField2D:
    return ComplexField2D.zeros(n, default_half_width(rp) if half_width is None else half_width)


def resolution_ok(fld: ComplexField2D, rp: ReducedParams) -> bool:
    h = max(fld.hx, fld.hy)
    return h <= rp.eps / 4 and (rp.speed == 0 or h <= rp.speed**-0.5 / 4)


# ---------------------------------------------------------------- discrete operators

class _CartesianOps:
    def __init__(self, fld: ComplexField2D, cfg: GPConfig):
        self.shape = fld.values.shape
        self.bounds = fld.bounds
        self.hx, self.hy = fld.hx, fld.hy
        self.dA = fld.cell_area
        X, Y = fld.mesh()
        self.V = scalar_potential(cfg.rp, np.hypot(X, Y))
        self.c = 1.0 / cfg.rp.eps**2
        a = cfg.rp.speed if cfg.magnetic else 0.0
        # A = a (-y, x); link phases are exact line integrals
        self.ex = np.exp(1j * a * fld.y * self.hx)[:, None]
        self.ey = np.exp(-1j * a * fld.x * self.hy)[None, :]
        kx = np.arange(1, self.shape[1] + 1)
        ky = np.arange(1, self.shape[0] + 1)
        lx = (2 - 2 * np.cos(np.pi * kx / (self.shape[1] + 1))) / self.hx**2
        ly = (2 - 2 * np.cos(np.pi * ky / (self.shape[0] + 1))) / self.hy**2
        self.lap_eig = ly[:, None] + lx[None, :]
        self.vmin = float(self.V.min())

    def inner(self, a, b):
        return float(np.real(np.vdot(a, b))) * self.dA

    def neg_lap(self, psi):
        """-Delta_A psi with Dirichlet data."""
        hx2, hy2 = self.hx**2, self.hy**2
        out = (2 / hx2 + 2 / hy2) * psi
        out[:, :-1] -= self.ex * psi[:, 1:] / hx2
        out[:, 1:] -= np.conj(self.ex) * psi[:, :-1] / hx2
        out[:-1, :] -= self.ey * psi[1:, :] / hy2
        out[1:, :] -= np.conj(self.ey) * psi[:-1, :] / hy2
        return out

    def kinetic(self, psi):
        return 0.5 * self.neg_lap(psi)

    def precond(self, g, sigma, veff=None):
        # S (sigma - Delta/2)^{-1} S with S = (sigma / (sigma + veff_+))^{1/2}
        scale = 1.0 if veff is None else np.sqrt(sigma / (sigma + np.maximum(veff, 0.0)))
        t = sfft.dstn(g * scale, type=1, norm="ortho")
        t /= sigma + 0.5 * self.lap_eig
        return sfft.idstn(t, type=1, norm="ortho") * scale


class _PolarOps:
    def __init__(self, fld: PolarField, cfg: GPConfig):
        self.grid = fld.grid
        self.nt = fld.ntheta
        r = fld.r
        self.r = r
        self.w = (fld.grid.weights / self.nt)[:, None]
        self.V = scalar_potential(cfg.rp, r)[:, None] * np.ones((1, self.nt))
        self.c = 1.0 / cfg.rp.eps**2
        a = cfg.rp.speed if cfg.magnetic else 0.0
        m = np.fft.fftfreq(self.nt, 1.0 / self.nt)
        self.ang = 0.5 * ((m[None, :] + fld.winding - a * r[:, None] ** 2) / r[:, None]) ** 2
        lo_dirichlet = fld.grid.edges[0] > 0
        self.kd, self.ko = fld.grid.stiffness_bands(lo_dirichlet, True)
        self.vmin = float(self.V.min())

    def inner(self, a, b):
        return float(np.sum(self.w * np.real(np.conj(a) * b)))

    def _kin_radial(self, p):
        out = self.kd[:, None] * p
        out[1:] += self.ko[:, None] * p[:-1]
        out[:-1] += self.ko[:, None] * p[1:]
        return out

    def kinetic(self, p):
        rad = 0.5 * self._kin_radial(p) / (self.w * self.nt)
        return rad + np.fft.ifft(self.ang * np.fft.fft(p, axis=1), axis=1)

    def precond(self, g, sigma, veff=None):
        F = np.fft.fft(g, axis=1)
        wr = self.w[:, 0] * self.nt
        diag = 0.5 * self.kd[:, None] + wr[:, None] * (sigma + self.ang + self.V[:, :1])
        off = 0.5 * self.ko
        X = _thomas_batched(off, diag, wr[:, None] * F)
        return np.fft.ifft(X, axis=1)


def _thomas_batched(off, diag, rhs):
    """Solve symmetric tridiagonal systems (one per column) with shared off-diagonal."""
    n = diag.shape[0]
    cp = np.empty_like(diag)
    dp = np.empty_like(rhs)
    cp[0] = off[0] / diag[0]
    dp[0] = rhs[0] / diag[0]
    for i in range(1, n):
        den = diag[i] - off[i - 1] * cp[i - 1]
        if i < n - 1:
            cp[i] = off[i] / den
        dp[i] = (rhs[i] - off[i - 1] * dp[i - 1]) / den
    x = np.empty_like(rhs)
    x[-1] = dp[-1]
    for i in range(n - 2, -1, -1):
        x[i] = dp[i] - cp[i] * x[i + 1]
    return x


def _ops(fld, cfg):
    if isinstance(fld, PolarField):
        return _PolarOps(fld, cfg)
    return _CartesianOps(fld, cfg)


def _energy_terms(ops, psi):
    kin = ops.kinetic(psi)
    dens = np.abs(psi) ** 2
    E = ops.inner(psi, kin) + ops.inner(dens, ops.V) + ops.c * ops.inner(dens, dens)
    Hpsi = kin + (ops.V + 2 * ops.c * dens) * psi
    return E, Hpsi


# ---------------------------------------------------------------- energy

def _check_normalized(fld, tol=1e-8):
    if abs(fld.mass - 1.0) > tol:
        raise DomainError(f"field is not normalized (mass {fld.mass:.12g})")


def energy(psi, cfg: GPConfig) -> float:
    """Discrete GP energy (covariant form)."""
    _check_normalized(psi)
    return float(_energy_terms(_ops(psi, cfg), psi.values)[0])


def chemical_potential(psi, cfg: GPConfig) -> float:
    ops = _ops(psi, cfg)
    _, Hpsi = _energy_terms(ops, psi.values)
    return ops.inner(psi.values, Hpsi) / ops.inner(psi.values, psi.values)


def gp_residual(psi, cfg: GPConfig) -> float:
    """||H psi - mu psi|| / (|mu| ||psi||)."""
    ops = _ops(psi, cfg)
    _, Hpsi = _energy_terms(ops, psi.values)
    n2 = ops.inner(psi.values, psi.values)
    mu = ops.inner(psi.values, Hpsi) / n2
    r = Hpsi - mu * psi.values
    return math.sqrt(ops.inner(r, r) / n2) / abs(mu)


def quartic_norm(psi) -> float:
    """||psi||_4^4."""
    if isinstance(psi, PolarField):
        return float(np.sum(psi.weights * psi.density() ** 2))
    return float(np.sum(psi.density() ** 2) * psi.cell_area)


def energy_lz(psi: ComplexField2D, cfg: GPConfig) -> float:
    """Energy with the rotation written as -speed <psi, L_z psi> + 1/2 speed^2 r^2 |psi|^2."""
    _check_normalized(psi)
    v = psi.values
    hx, hy = psi.hx, psi.hy
    p = np.pad(v, 1)
    dxf = (p[1:-1, 1:] - p[1:-1, :-1]) / hx
    dyf = (p[1:, 1:-1] - p[:-1, 1:-1]) / hy
    grad2 = 0.5 * (np.sum(np.abs(dxf) ** 2) + np.sum(np.abs(dyf) ** 2))
    dxc = (p[1:-1, 2:] - p[1:-1, :-2]) / (2 * hx)
    dyc = (p[2:, 1:-1] - p[:-2, 1:-1]) / (2 * hy)
    X, Y = psi.mesh()
    a = cfg.rp.speed if cfg.magnetic else 0.0
    rot = -a * np.sum(np.imag(np.conj(v) * (X * dyc - Y * dxc)))
    R2 = X * X + Y * Y
    pot = np.sum((0.5 * a * a * R2 + scalar_potential(cfg.rp, np.sqrt(R2))) * np.abs(v) ** 2)
    quart = np.sum(np.abs(v) ** 4) / cfg.rp.eps**2
    return float((grad2 + rot + pot + quart) * psi.cell_area)


# ---------------------------------------------------------------- minimizer

@dataclass(frozen=True, eq=False)
class MinimizeResult:
    psi: object
    energy: float
    mu: float
    residual: float
    iterations: int
    converged: bool
    chemical_identity_gap: float = math.nan
    trace: tuple = field(repr=False, default=())

    def __iter__(self):
        return iter((self.psi, self.energy, self.mu))


def _line_point(ops, psi, d, tau):
    """Energy and directional derivative at the retraction of psi + tau d."""
    q = psi + tau * d
    nrm = math.sqrt(ops.inner(q, q))
    q /= nrm
    E, H = _energy_terms(ops, q)
    mu = ops.inner(q, H)
    return E, tau, q, H, 2 * ops.inner(H - mu * q, d) / nrm


def minimize(psi0, cfg: GPConfig, callback=None, require_convergence=False) -> MinimizeResult:
    """Preconditioned descent on the unit sphere.

    The step is a semi-implicit gradient-flow step, (sigma - 1/2 Delta)^{-1}
    applied to the gradient, retracted by normalization; with ``method='cg'``
    successive directions are combined Polak-Ribiere style.  A backtracking
    line search keeps the energy nonincreasing.
    """
    if cfg.method not in ("cg", "flow"):
        raise DomainError(f"unknown method {cfg.method!r}")
    fld = psi0.normalized()
    ops = _ops(fld, cfg)
    psi = fld.values.copy()
    E, Hpsi = _energy_terms(ops, psi)
    mu = ops.inner(psi, Hpsi)
    g = Hpsi - mu * psi
    sigma = max(abs(mu), 1.0) + max(0.0, -ops.vmin)
    tau = cfg.dt
    d_prev = g_prev = Pg_prev = None
    trace = [E]
    converged = False
    res = math.inf
    it = 0
    for it in range(1, cfg.max_iters + 1):
        res = math.sqrt(ops.inner(g, g)) / abs(mu)
        if res <= cfg.tol_residual and len(trace) > cfg.window:
            if abs(trace[-cfg.window - 1] - E) <= cfg.tol_energy * abs(E):
                converged = True
                break
        Pg = ops.precond(g, sigma, ops.V + 2 * ops.c * np.abs(psi) ** 2 - mu)
        Pg -= ops.inner(psi, Pg) * psi
        d = -Pg
        if cfg.method == "cg" and d_prev is not None:
            beta = max(0.0, ops.inner(g - g_prev, Pg) / ops.inner(g_prev, Pg_prev))
            dt_ = d_prev - ops.inner(psi, d_prev) * psi
            d = -Pg + beta * dt_
            if ops.inner(g, d) >= 0:
                d = -Pg
        slope = 2 * ops.inner(g, d)
        if slope >= 0:
            break
        best = None
        slack = _ROUNDOFF * abs(E)
        for _ in range(40):
            cand = [_line_point(ops, psi, d, tau)]
            if cand[0][4] > slope:
                t2 = tau * slope / (slope - cand[0][4])
                t2 = min(max(t2, 0.05 * tau), 20 * tau)
                cand.append(_line_point(ops, psi, d, t2))
            low = min(c[0] for c in cand)
            # energies equal to round-off: fall back on the directional derivative
            best = min((c for c in cand if c[0] <= low + slack), key=lambda c: abs(c[4]))
            if best[0] <= E + slack:
                break
            tau *= 0.25
            best = None
        if best is None:
            if res <= 10 * cfg.tol_residual:
                converged = True
                break
            raise SolverError("line search failed", residual=res, energy=E, iteration=it)
        E_new, tau, psi, Hpsi, _ = best
        if not np.isfinite(E_new):
            raise SolverError("energy is not finite", iteration=it)
        d_prev, g_prev, Pg_prev = d, g, Pg
        E = E_new
        mu = ops.inner(psi, Hpsi)
        g = Hpsi - mu * psi
        trace.append(E)
        if callback is not None:
            callback(it, E, res)
    else:
        res = math.sqrt(ops.inner(g, g)) / abs(mu)
        converged = res <= cfg.tol_residual
    if require_convergence and not converged:
        raise SolverError("GP minimization did not converge", residual=res, energy=E, iterations=it)
    out = psi0.copy(values=psi)
    q = ops.inner(np.abs(psi) ** 2, np.abs(psi) ** 2)
    gap = abs(mu - (E + ops.c * q)) / abs(mu)
    return MinimizeResult(out, float(E), float(mu), float(res), it, converged, float(gap), tuple(trace))


# ---------------------------------------------------------------- trial states

def lattice_points(speed, radius_max, cell_area=None):
    """Triangular lattice with the given cell area (default pi / speed) inside a disc."""
    area = math.pi / speed if cell_area is None else cell_area
    ell = math.sqrt(2 * area / math.sqrt(3))
    m = int(math.ceil(radius_max / ell)) + 2
    i, j = np.meshgrid(np.arange(-m, m + 1), np.arange(-m, m + 1))
    px = ell * (i + 0.5 * j)
    py = ell * (math.sqrt(3) / 2) * j
    pts = np.stack([px.ravel(), py.ravel()], axis=1)
    return pts[np.hypot(pts[:, 0], pts[:, 1]) <= radius_max]


def default_core_radius(rp: ReducedParams):
    return rp.eps ** (2 / 3) * rp.speed ** (-1 / 3)


def trial_vortex_lattice(rp: ReducedParams, n: int = 256, t: float | None = None, g0=None,
                         half_width=None, region=None, hole_winding: int = 0,
                         cell_area=None, offset=(0.0, 0.0)) -> ComplexField2D:
    """g0-weighted field with unit vortices on a triangular lattice and linear cores of radius t."""
    t = default_core_radius(rp) if t is None else t
    if t >= rp.speed**-0.5:
        raise DomainError("core radius must be much smaller than speed^-1/2")
    fld = make_grid(rp, n, half_width)
    if g0 is None:
        g0 = radial.g0_profile(rp)
    tf = analytic.tf_profile(rp)
    lo, hi = (tf.x_in, tf.x_out) if region is None else region
    X, Y = fld.mesh()
    R = np.hypot(X, Y)
    amp = g0(R)
    pts = lattice_points(rp.speed, hi) + np.asarray(offset)
    rr = np.hypot(pts[:, 0], pts[:, 1])
    pts = pts[(rr > lo) & (rr < hi)]
    phase = hole_winding * np.arctan2(Y, X)
    core = np.ones_like(R)
    for px, py in pts:
        dx, dy = X - px, Y - py
        phase += np.arctan2(dy, dx)
        core = np.minimum(core, np.hypot(dx, dy) / t)
    fld.values = amp * core * np.exp(1j * phase)
    return fld.normalized()


def polar_grid(rp: ReducedParams, nr=None, half=None, fine=32.0):
    """Annular grid around x = 1; by default the same grid the radial giant-vortex solver uses."""
    if half is None and nr is None:
        return radial.default_grid(radial.RadialProblem("gv", rp), fine=fine)
    if half is None:
        half = radial.default_grid(radial.RadialProblem("gv", rp)).bounds[1] - 1.0
    lo, hi = max(0.0, 1.0 - half), 1.0 + half
    if nr is None:
        nr = int(math.ceil((hi - lo) * math.sqrt(rp.speed) * fine))
    return radial.RadialGrid.uniform(lo, hi, nr)


def trial_giant_vortex(rp: ReducedParams, grid=None, ntheta: int = 8) -> PolarField:
    """Matched Gaussian times exp(i floor(Omega) theta), cut off smoothly inside 1 - eps."""
    if rp.frame != BIG_OMEGA_FRAME:
        raise DomainError("giant-vortex trial needs Omega-frame parameters")
    grid = polar_grid(rp) if grid is None else grid
    r = grid.nodes
    f = radial.scaled_gaussian(rp, r)
    e = rp.eps
    s = np.clip((r - (1 - 2 * e)) / e, 0, 1)
    f = f * s * s * (3 - 2 * s)
    vals = np.repeat(f[:, None], ntheta, axis=1).astype(complex)
    return PolarField(grid, vals, winding=int(math.floor(rp.speed))).normalized()


def ring_vortex_field(base: PolarField, count: int, radius: float = 1.0, core=None, sign=1):
    """Imprint ``count`` unit vortices evenly on a circle (seeds symmetry-broken states)."""
    r, th = base.r, base.theta
    R, T = np.meshgrid(r, th, indexing="ij")
    X, Y = R * np.cos(T), R * np.sin(T)
    core = 0.5 * (r[-1] - r[0]) / 6 if core is None else core
    phase = np.zeros_like(R)
    amp = np.ones_like(R)
    for k in range(count):
        a = 2 * np.pi * (k + 0.5) / count
        dx, dy = X - radius * math.cos(a), Y - radius * math.sin(a)
        phase += sign * np.arctan2(dy, dx)
        amp *= np.tanh(np.hypot(dx, dy) / core)
    # keep the circulation outside the ring unchanged: the hole carries count fewer quanta
    phase -= sign * count * T
    return base.copy(values=base.values * amp * np.exp(1j * phase)).normalized()


def polar_ntheta(rp: ReducedParams, per_core=4, minimum=16):
    """Angular resolution putting ``per_core`` points across a healing length at x = 1."""
    core = rp.eps * rp.speed ** -0.25
    n = max(minimum, int(math.ceil(per_core * 2 * np.pi / core)))
    return 1 << (n - 1).bit_length()


def seeded_giant_vortex(rp: ReducedParams, count=0, ntheta=None, grid=None, radius=1.0):
    """Giant-vortex trial with ``count`` extra unit vortices on the circle ``radius``."""
    ntheta = polar_ntheta(rp) if ntheta is None else ntheta
    base = trial_giant_vortex(rp, grid=grid, ntheta=ntheta)
    if count == 0:
        return base
    return ring_vortex_field(base, count, radius=radius, core=rp.eps * rp.speed ** -0.25)


# ---------------------------------------------------------------- decoupling

@dataclass(frozen=True, eq=False)
class Decoupling:
    E_gp: float
    E_hat: float
    F: float
    defect: float
    budget: float
    untrusted_mass: float
    g0_residual: float
    g: np.ndarray = field(repr=False, default=None)


def g0_on_grid(g0: radial.RadialProfile, like: ComplexField2D, cfg: GPConfig, polish=True,
               tol_residual=1e-11, max_iters=5000):
    """Radial profile resampled on the 2D grid, optionally re-minimized there (no vector potential)."""
    R = like.radius()
    fld = like.copy(values=g0(R).astype(complex)).normalized()
    if polish:
        c0 = replace(cfg.without_rotation(), tol_residual=tol_residual, max_iters=max_iters,
                     tol_energy=1e-15)
        res = minimize(fld, c0)
        fld = res.psi
    vals = np.abs(fld.values)
    return fld.copy(values=vals.astype(complex))


def decouple_energy(psi: ComplexField2D, g0, rp: ReducedParams, polish=True, cfg=None) -> Decoupling:
    """Split E[psi] into E_hat[g0] + F[u] with u = psi / g0 and report the residual defect budget."""
    cfg = GPConfig(rp) if cfg is None else cfg
    _check_normalized(psi)
    if isinstance(g0, ComplexField2D):
        gfld = g0
    else:
        gfld = g0_on_grid(g0, psi, cfg, polish=polish)
    g = np.real(gfld.values)
    ops_hat = _CartesianOps(gfld, cfg.without_rotation())
    E_hat, Hg = _energy_terms(ops_hat, g.astype(complex))
    mu_hat = ops_hat.inner(g, Hg)
    r = np.real(Hg) - mu_hat * g
    g0_res = math.sqrt(ops_hat.inner(r, r)) / abs(mu_hat)
    trusted = g * g > UNTRUSTED_THRESHOLD * np.max(g * g)
    u = np.where(trusted, psi.values / np.where(trusted, g, 1.0), 0.0)
    untrusted = float(np.sum(np.abs(psi.values[~trusted]) ** 2) * psi.cell_area)
    ops = _CartesianOps(psi, cfg)
    hx2, hy2 = ops.hx**2, ops.hy**2
    kin = (np.sum(g[:, :-1] * g[:, 1:] * np.abs(ops.ex * u[:, 1:] - u[:, :-1]) ** 2) / hx2
           + np.sum(g[:-1, :] * g[1:, :] * np.abs(ops.ey * u[1:, :] - u[:-1, :]) ** 2) / hy2)
    a = np.abs(u) ** 2
    F = (0.5 * kin + ops.c * np.sum(g**4 * (1 - a) ** 2)) * psi.cell_area
    E_gp = float(_energy_terms(ops, psi.values)[0])
    defect = E_gp - E_hat - F
    budget = math.sqrt(np.sum((g * r) ** 2) * np.sum((a - 1)[trusted] ** 2)) * psi.cell_area
    return Decoupling(E_gp, float(E_hat), float(F), float(defect), float(budget), untrusted,
                      float(g0_res), g)


def reduced_energy_E(phi: PolarField, gv: radial.RadialProfile, rp: ReducedParams, eta=None):
    """E_eps[u] and F_eps[u] on A_eps for u = phi / g (phi in the floor(Omega) gauge).

    Returns (E, F).
    """
    if phi.winding != math.floor(rp.speed):
        raise DomainError("field must be stored in the floor(Omega) gauge")
    eta = radial.default_eta(rp.eps) if eta is None else eta
    half = rp.eps**2 * eta
    r = phi.r
    m = (r >= 1 - half) & (r <= 1 + half)
    if m.sum() < 3:
        raise DomainError("polar grid does not resolve A_eps")
    rr = r[m]
    g = gv(rr)[:, None]
    u = phi.values[m] / g
    nt = phi.ntheta
    dr = np.gradient(u, rr, axis=0)
    k = np.fft.fftfreq(nt, 1.0 / nt)
    dth = np.fft.ifft(1j * k[None, :] * np.fft.fft(u, axis=1), axis=1) / rr[:, None]
    B = rp.speed * rr - math.floor(rp.speed) / rr
    cur = np.imag(np.conj(u) * dth)
    grad2 = np.abs(dr) ** 2 + np.abs(dth) ** 2
    pot = (1 - np.abs(u) ** 2) ** 2 * g * g / rp.eps**2
    w = phi.grid.weights[m][:, None] / nt
    g2 = g * g
    E = float(np.sum(w * g2 * (0.5 * grad2 - B[:, None] * cur + pot)))
    F = float(np.sum(w * g2 * (0.5 * grad2 + pot)))
    return E, F


def vorticity_and_gradient(u: np.ndarray, hx: float, hy: float):
    """Pointwise mu_v = -2 Im(d1 u conj(d2 u)) and |grad u|^2 with central differences."""
    d1 = np.gradient(u, hx, axis=1)
    d2 = np.gradient(u, hy, axis=0)
    muv = -2 * np.imag(d1 * np.conj(d2))
    return muv, np.abs(d1) ** 2 + np.abs(d2) ** 2


def polar_u(phi: PolarField, gv: radial.RadialProfile, region):
    """u = phi / g on the nodes of ``region`` (lo, hi)."""
    m = (phi.r >= region[0]) & (phi.r <= region[1])
    return phi.r[m], phi.values[m] / gv(phi.r[m])[:, None]
