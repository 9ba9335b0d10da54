"""One-dimensional constrained minimizers for radial density profiles.

Discretization is finite-volume on cell-centred nodes: the kinetic energy is
1/2 sum_faces a_k (f_k - f_{k-1})^2 with face weight a_k = area(e_k)/dx_k, which
is a second-order discretization of -1/2 (f'' + f'/x).  The discrete energy
is what the flow decreases, so the chemical potential identity
mu = E + c ||f||_4^4 holds exactly for the discrete problem.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg, optimize

from . import analytic
from .errors import DomainError, SolverError
from .params import BIG_OMEGA_FRAME, OMEGA_FRAME, ReducedParams

KINDS = ("g0-omega", "g0-Omega", "gv", "gv-annulus", "sym", "symmetric-vortex")
_ROUNDOFF = 1e-13       # energy increase tolerated as round-off
_DECAY_ACTION = 18.0   # exp(-2*18) ~ 2e-16 relative density at the truncation radius


# ---------------------------------------------------------------- grid

@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Cell-centred grid given by its cell edges.

    ``radial=True`` uses the planar measure 2 pi x dx, otherwise 2 pi dx.
    """

    edges: np.ndarray
    radial: bool = True
    nodes: np.ndarray = field(init=False, repr=False)
    weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        e = np.asarray(self.edges, dtype=float)
        if e.ndim != 1 or e.size < 3 or np.any(np.diff(e) <= 0) or e[0] < 0:
            raise DomainError("edges must be a strictly increasing array of radii >= 0")
        object.__setattr__(self, "edges", e)
        object.__setattr__(self, "nodes", 0.5 * (e[1:] + e[:-1]))
        if self.radial:
            w = np.pi * (e[1:] - e[:-1]) * (e[1:] + e[:-1])
        else:
            w = 2 * np.pi * (e[1:] - e[:-1])
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, lo, hi, n, radial=True):
        return cls(np.linspace(lo, hi, int(n) + 1), radial=radial)

    @property
    def bounds(self):
        return float(self.edges[0]), float(self.edges[-1])

    @property
    def size(self):
        return self.nodes.size

    def same_nodes(self, other) -> bool:
        return self.size == other.size and np.array_equal(self.edges, other.edges)

    def integrate(self, values):
        return float(np.dot(self.weights, values))

    def _area(self, x):
        return 2 * np.pi * x if self.radial else 2 * np.pi * np.ones_like(x)

    def stiffness_bands(self, dirichlet_lo: bool, dirichlet_hi: bool):
        """Diagonal and off-diagonal of the kinetic stiffness matrix K."""
        x, e = self.nodes, self.edges
        face = self._area(e[1:-1]) / np.diff(x)
        diag = np.zeros_like(x)
        diag[1:] += face
        diag[:-1] += face
        if dirichlet_lo and e[0] > 0:
            diag[0] += self._area(e[:1])[0] / (x[0] - e[0])
        if dirichlet_hi:
            diag[-1] += self._area(e[-1:])[0] / (e[-1] - x[-1])
        return diag, -face


# ---------------------------------------------------------------- problem

@dataclass(frozen=True)
class RadialProblem:
    kind: str
    params: ReducedParams
    n: int = 0
    eta: float | None = None
    quartic: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown radial problem kind {self.kind!r}")
        if self.n < 0:
            raise DomainError("winding must be >= 0")
        if self.kind in ("gv", "gv-annulus", "sym") and self.params.frame != BIG_OMEGA_FRAME:
            raise DomainError(f"{self.kind} needs Omega-frame parameters")
        if self.kind in ("gv", "gv-annulus") and self.params.speed < 1:
            raise DomainError("giant-vortex problems need Omega >= 1")

    @property
    def rp(self):
        if self.kind == "g0-omega":
            return self.params.to_frame(OMEGA_FRAME)
        if self.kind == "g0-Omega":
            return self.params.to_frame(BIG_OMEGA_FRAME)
        return self.params

    @property
    def eta_value(self):
        return default_eta(self.params.eps) if self.eta is None else self.eta

    @property
    def coupling(self):
        return self.quartic / self.params.eps**2

    @property
    def radial_measure(self):
        return self.kind != "sym"

    @property
    def neumann(self):
        return self.kind in ("gv-annulus", "sym")

    @property
    def alpha(self):
        return analytic.alpha(self.params.s, self.params.gamma)

    def potential(self, x):
        rp = self.rp
        x = np.asarray(x, dtype=float)
        eps, s, g, w = rp.eps, rp.s, rp.gamma, rp.speed
        if self.kind == "g0-omega":
            return x**s / eps**2 - 0.5 * g * w**2 * x**2
        if self.kind == "g0-Omega":
            return g * w**2 * analytic.eval_W(x, s)
        if self.kind in ("gv", "gv-annulus"):
            return w**2 * analytic.eval_U(x, w, s, g)
        if self.kind == "sym":
            return 0.5 * self.alpha**2 * w**2 * (1 - x) ** 2
        # symmetric vortex of winding n
        with np.errstate(divide="ignore"):
            rot = 0.5 * ((self.n - w * x * x) / x) ** 2 if self.n else 0.5 * (w * x) ** 2
        if rp.frame == OMEGA_FRAME:
            return rot + x**s / eps**2 - 0.5 * g * w**2 * x**2
        return rot + g * w**2 * analytic.eval_W(x, s)

    def annulus(self):
        h = self.params.eps**2 * self.eta_value
        return 1.0 - h, 1.0 + h


def default_eta(eps):
    return abs(math.log(eps)) ** 1.5


# ---------------------------------------------------------------- profile

@dataclass(frozen=True, eq=False)
class RadialProfile:
    grid: RadialGrid = field(repr=False)
    values: np.ndarray = field(repr=False)
    energy: float
    mu: float
    max_position: float
    residual: float
    problem: RadialProblem | None = None
    iterations: int = 0
    trace: tuple = field(repr=False, default=())

    @property
    def nodes(self):
        return self.grid.nodes

    def mass(self):
        return self.grid.integrate(self.values**2)

    def __call__(self, x):
        """Linear interpolation, zero outside the grid."""
        return np.interp(x, self.grid.nodes, self.values, left=0.0, right=0.0)

    def to_csv_rows(self):
        return list(zip(self.grid.nodes, self.values, self.grid.weights))


@dataclass
class _Discrete:
    grid: RadialGrid
    V: np.ndarray
    c: float
    kdiag: np.ndarray
    koff: np.ndarray

    @classmethod
    def build(cls, problem, grid):
        V = problem.potential(grid.nodes)
        if not np.all(np.isfinite(V)):
            raise DomainError("potential is not finite on the grid (singular at x=0?)")
        dl = not problem.neumann
        dh = not problem.neumann
        kd, ko = grid.stiffness_bands(dl, dh)
        return cls(grid, V, problem.coupling, kd, ko)

    def kin(self, f):
        kf = self.kdiag * f
        kf[1:] += self.koff * f[:-1]
        kf[:-1] += self.koff * f[1:]
        return kf

    def energy(self, f):
        w = self.grid.weights
        return 0.5 * np.dot(f, self.kin(f)) + np.dot(w, self.V * f * f + self.c * f**4)

    def apply_H(self, f):
        return 0.5 * self.kin(f) / self.grid.weights + (self.V + 2 * self.c * f * f) * f

    def state(self, f):
        w = self.grid.weights
        Hf = self.apply_H(f)
        mu = np.dot(w, f * Hf)
        r = Hf - mu * f
        rel = math.sqrt(np.dot(w, r * r)) / max(abs(mu) * math.sqrt(np.dot(w, f * f)), 1e-300)
        return self.energy(f), mu, rel

    def normalize(self, f):
        return f / math.sqrt(np.dot(self.grid.weights, f * f))

    def flow_step(self, f, dt, shift):
        w = self.grid.weights
        diag = w + dt * (0.5 * self.kdiag + w * (self.V + shift + 2 * self.c * f * f))
        ab = np.empty((2, f.size))
        ab[0, 0] = 0.0
        ab[0, 1:] = dt * 0.5 * self.koff
        ab[1] = diag
        g = linalg.solveh_banded(ab, w * f, check_finite=False)
        return self.normalize(g)


def _tf_on_grid(grid, V, c):
    """Discrete TF density (mu - V)_+ / (2c) with unit mass; returns (rho, mu)."""
    w = grid.weights
    mass = lambda mu: np.dot(w, np.maximum(mu - V, 0.0)) / (2 * c) - 1.0
    lo = float(V.min())
    hi = lo + 1.0
    while mass(hi) < 0:
        hi = lo + 2 * (hi - lo)
    mu = optimize.brentq(mass, lo, hi, xtol=1e-14, rtol=1e-14)
    return np.maximum(mu - V, 0.0) / (2 * c), mu


def _gaussian_init(problem, x):
    w = problem.params.speed
    y = math.sqrt(w) * (1 - x)
    g = analytic.gaussian_profile(problem.alpha)
    return (2 * math.pi) ** -0.5 * w**0.25 * g(y)


def default_init(problem, grid):
    x = grid.nodes
    if problem.kind in ("gv", "gv-annulus", "sym"):
        f = _gaussian_init(problem, x)
    elif problem.coupling > 0:
        V = problem.potential(x)
        rho, _ = _tf_on_grid(grid, V, problem.coupling)
        f = np.sqrt(rho)
    else:
        V = problem.potential(x)
        f = np.exp(-(V - V.min()) / max(1e-12, np.ptp(V)) * 50)
    f = f + 1e-6 * f.max() * np.exp(-((x - x[np.argmax(f)]) / (0.25 * (x[-1] - x[0]))) ** 2)
    return f / math.sqrt(grid.integrate(f * f))


# ---------------------------------------------------------------- grids

def _spacing(problem, fine):
    w = problem.params.speed
    scale = min(problem.params.eps, w**-0.5 if w > 0 else 1.0)
    return scale / fine


def _decay_domain(problem, lo, hi, scan=200001):
    """Truncation radii where the WKB action from the allowed region exceeds a threshold."""
    xs = np.linspace(lo, hi, scan)
    if xs[0] == 0.0:
        xs[0] = 0.5 * (xs[1] - xs[0]) if problem.kind == "symmetric-vortex" and problem.n else 0.0
    V = problem.potential(xs)
    V = np.where(np.isfinite(V), V, np.finfo(float).max / 4)
    imin = int(np.argmin(V))
    c = problem.coupling
    wts = 2 * np.pi * xs * np.gradient(xs)
    if c > 0:
        mass = lambda mu: np.dot(wts, np.maximum(mu - V, 0.0)) / (2 * c) - 1.0
        top = V[imin] + 1.0
        while mass(top) < 0:
            top = V[imin] + 2 * (top - V[imin])
        mu = optimize.brentq(mass, V[imin], top, xtol=1e-12)
    else:
        mu = V[imin]
    j = slice(max(imin - 2, 0), min(imin + 3, xs.size))
    curv = np.max(np.gradient(np.gradient(V[j], xs[j]), xs[j])) if xs[j].size >= 3 else 0.0
    mu += 2.0 * math.sqrt(max(curv, 0.0)) + 1e-12 * abs(mu)
    allowed = np.nonzero(V <= mu)[0]
    a, b = allowed[0], allowed[-1]
    k = np.sqrt(2 * np.maximum(V - mu, 0.0))
    dx = xs[1] - xs[0]
    out = np.cumsum(k[b:]) * dx
    idx = np.searchsorted(out, _DECAY_ACTION)
    x_hi = xs[min(b + idx, xs.size - 1)]
    inn = np.cumsum(k[: a + 1][::-1]) * dx
    idx = np.searchsorted(inn, _DECAY_ACTION)
    x_lo = 0.0 if idx >= inn.size else xs[a - idx]
    return x_lo, x_hi


def default_grid(problem: RadialProblem, fine: float = 32.0, max_nodes: int = 400_000) -> RadialGrid:
    """Grid resolving min(eps, speed^-1/2) with `fine` nodes per unit of that scale."""
    h = _spacing(problem, fine)
    kind = problem.kind
    if kind in ("gv-annulus", "sym"):
        lo, hi = problem.annulus()
    elif kind == "gv":
        w = problem.params.speed
        a = problem.alpha
        y_tf = (3.0 / (2 * math.pi * a * a * math.sqrt(problem.params.omega0))) ** (1 / 3)
        half = (12.0 / math.sqrt(a) + 3.0 * y_tf) / math.sqrt(w)
        lo, hi = max(0.0, 1.0 - half), 1.0 + half
    else:
        rp = problem.rp
        if kind == "symmetric-vortex":
            span = 4.0
        else:
            tf = analytic.tf_profile(rp)
            span = 2.0 * tf.x_out + 1.0
        lo, hi = _decay_domain(problem, 0.0, span)
        if lo < 4 * h:
            lo = 0.0
    n = int(math.ceil((hi - lo) / h))
    n = min(max(n, 200), max_nodes)
    return RadialGrid.uniform(lo, hi, n, radial=problem.radial_measure)


# ---------------------------------------------------------------- solver

def minimize_radial(problem: RadialProblem, grid: RadialGrid | None = None, init=None,
                    tol_residual: float = 1e-8, tol_energy: float = 1e-12,
                    max_iters: int = 200_000, window: int = 50) -> RadialProfile:
    """Projected gradient flow with semi-implicit steps and step halving on energy increase."""
    if grid is None:
        grid = default_grid(problem)
    if grid.radial != problem.radial_measure:
        raise DomainError("grid measure does not match the problem kind")
    disc = _Discrete.build(problem, grid)
    if init is None:
        f = default_init(problem, grid)
    else:
        f = init.values if isinstance(init, RadialProfile) else np.asarray(init, dtype=float)
        if f.shape != grid.nodes.shape:
            f = np.interp(grid.nodes, init.grid.nodes, init.values) if isinstance(init, RadialProfile) else f
        f = disc.normalize(np.abs(f))
    shift = max(0.0, -float(disc.V.min())) + 1.0
    E, mu, res = disc.state(f)
    scale = max(abs(mu), 1.0)
    dt = 10.0 / scale
    dt_max = 1e8 / scale
    trace = [E]
    it = 0
    while it < max_iters:
        it += 1
        slack = _ROUNDOFF * (abs(E) + scale)
        for _ in range(60):
            g = disc.flow_step(f, dt, shift)
            Eg = disc.energy(g)
            if np.isfinite(Eg) and Eg <= E + slack:
                break
            dt *= 0.5
        else:
            if res <= tol_residual:
                break
            raise SolverError("step control failed to decrease the energy", residual=res, energy=E)
        if g.min() < -1e-12:
            raise SolverError("negative density excursion", minimum=float(g.min()))
        f = np.maximum(g, 0.0)
        E, mu, res = disc.state(f)
        trace.append(E)
        dt = min(dt * 1.5, dt_max)
        if res <= tol_residual and it >= window:
            past = trace[-window - 1]
            if abs(past - E) <= tol_energy * max(abs(E), 1e-300):
                break
    else:
        raise SolverError("radial flow did not converge", residual=res, energy=E, iterations=it)
    return _profile(problem, grid, f, disc, it, trace)


def _peak_position(x, f):
    """Vertex of the parabola through the largest node value and its neighbours."""
    k = int(np.argmax(f))
    if k == 0 or k == f.size - 1:
        return float(x[k])
    x0, x1, x2 = x[k - 1:k + 2]
    f0, f1, f2 = f[k - 1:k + 2]
    den = (x0 - x1) * (x0 - x2) * (x1 - x2)
    a = (x2 * (f1 - f0) + x1 * (f0 - f2) + x0 * (f2 - f1)) / den
    b = (x2 * x2 * (f0 - f1) + x1 * x1 * (f2 - f0) + x0 * x0 * (f1 - f2)) / den
    if a >= 0:
        return float(x1)
    return float(np.clip(-b / (2 * a), x0, x2))


def _profile(problem, grid, f, disc, it=0, trace=()):
    E, mu, res = disc.state(f)
    return RadialProfile(grid=grid, values=f, energy=float(E), mu=float(mu),
                         max_position=_peak_position(grid.nodes, f), residual=float(res),
                         problem=problem, iterations=it, trace=tuple(trace))


def evaluate_profile(problem, grid, values) -> RadialProfile:
    """Wrap arbitrary normalized values as a profile with energy, mu and residual."""
    disc = _Discrete.build(problem, grid)
    return _profile(problem, grid, disc.normalize(np.asarray(values, float)), disc)


def gv_profile(rp, annulus=False, eta=None, quartic=1.0, grid=None, **kw):
    kind = "gv-annulus" if annulus else "gv"
    return minimize_radial(RadialProblem(kind, rp, eta=eta, quartic=quartic), grid=grid, **kw)


def sym_profile(rp, eta=None, quartic=1.0, grid=None, **kw):
    return minimize_radial(RadialProblem("sym", rp, eta=eta, quartic=quartic), grid=grid, **kw)


def g0_profile(rp, grid=None, **kw):
    kind = "g0-omega" if rp.frame == OMEGA_FRAME else "g0-Omega"
    return minimize_radial(RadialProblem(kind, rp), grid=grid, **kw)


# ---------------------------------------------------------------- diagnostics

def bulk_annulus(rp, c_frac=0.8):
    """A_bulk = 1 +- c |log eps|^{1/2} Omega^{-1/2} with c = c_frac * sqrt(2/alpha)."""
    a = analytic.alpha(rp.s, rp.gamma)
    half = c_frac * math.sqrt(2 / a) * math.sqrt(abs(math.log(rp.eps))) / math.sqrt(rp.speed)
    return 1.0 - half, 1.0 + half


def check_gaussian_closeness(profile: RadialProfile, Omega0=None, region=None) -> float:
    """sup over the bulk annulus of |sqrt(2 pi) Omega^{-1/4} g - g_osc(Omega^{1/2}(1-x))| * eps."""
    prob = profile.problem
    if prob is None or prob.kind not in ("gv", "gv-annulus"):
        raise DomainError("expected a giant-vortex profile")
    rp = prob.params
    if Omega0 is not None and not math.isclose(Omega0, rp.omega0, rel_tol=1e-12):
        raise DomainError("Omega0 does not match the profile's parameters")
    w = rp.speed
    lo, hi = bulk_annulus(rp) if region is None else region
    x = profile.nodes
    m = (x >= lo) & (x <= hi)
    g_osc = analytic.gaussian_profile(prob.alpha)
    dev = np.abs(math.sqrt(2 * math.pi) * w**-0.25 * profile.values[m] - g_osc(math.sqrt(w) * (1 - x[m])))
    return float(dev.max() * rp.eps)


def check_symmetry_closeness(gv: RadialProfile, sym: RadialProfile) -> float:
    if not gv.grid.same_nodes(sym.grid):
        raise DomainError("profiles live on different grids")
    return float(np.max(np.abs(gv.values - sym.values)))


def scaled_gaussian(rp, x):
    """Gaussian reference in the units of the profile: (2 pi)^{-1/2} Omega^{1/4} g_osc(Omega^{1/2}(1-x))."""
    w = rp.speed
    g = analytic.gaussian_profile(analytic.alpha(rp.s, rp.gamma))
    return (2 * math.pi) ** -0.5 * w**0.25 * g(math.sqrt(w) * (1 - np.asarray(x)))


@dataclass(frozen=True)
class FPotentials:
    x: np.ndarray
    F1: np.ndarray
    F2: np.ndarray
    jump: float
    lo: float
    hi: float
    x_max: float

    def f1(self, x):
        return np.interp(x, self.x, self.F1)

    def f2(self, x):
        return np.interp(x, self.x, self.F2)


def potentials_F(profile: RadialProfile, Omega=None) -> FPotentials:
    """Antiderivatives of Omega (t - 1/t) g^2 anchored at the ends of A_{sqrt eta}."""
    prob = profile.problem
    rp = prob.params
    w = rp.speed if Omega is None else Omega
    half = rp.eps**2 * math.sqrt(prob.eta_value)
    lo, hi = 1 - half, 1 + half
    x = profile.nodes
    if lo < x[0] or hi > x[-1]:
        raise DomainError("profile does not cover A_sqrt(eta)")
    inner = x[(x > lo) & (x < hi)]
    xs = np.concatenate(([lo], inner, [hi]))
    g2 = profile(xs) ** 2
    dens = w * (xs - 1 / xs) * g2
    cum = np.concatenate(([0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(xs))))
    total = cum[-1]
    F1 = cum
    F2 = cum - total
    xm = profile.max_position
    jump = float(np.interp(xm, xs, F1) - np.interp(xm, xs, F2))
    return FPotentials(x=xs, F1=F1, F2=F2, jump=jump, lo=lo, hi=hi, x_max=xm)


def decay_constant(profile: RadialProfile, floor=1e-280) -> float:
    """Largest c with g^2 <= C eps^-2 exp(-c Omega (|1-x| - eps^2 eta^{1/4})^2) on the tail window."""
    prob = profile.problem
    rp = prob.params
    x, g2 = profile.nodes, profile.values**2
    shift = rp.eps**2 * prob.eta_value**0.25
    d = np.abs(1 - x) - shift
    C = g2.max() * rp.eps**2
    m = (d > 0) & (g2 > floor * g2.max())
    if not np.any(m):
        return math.inf
    cs = -np.log(np.maximum(g2[m] * rp.eps**2 / C, floor)) / (rp.speed * d[m] ** 2)
    return float(cs.min())


# ---------------------------------------------------------------- symmetric vortices and Q_n

def symmetric_vortex_profile(n: int, rp: ReducedParams, grid=None, init=None, **kw) -> RadialProfile:
    return minimize_radial(RadialProblem("symmetric-vortex", rp, n=int(n)), grid=grid, init=init, **kw)


def optimal_winding(rp: ReducedParams, grid=None, center=None, **kw):
    """Integer n minimizing E_n (discrete descent from ``center``); returns (n, profile, energies)."""
    n0 = int(round(rp.speed if center is None else center))
    if grid is None:
        grid = default_grid(RadialProblem("symmetric-vortex", rp, n=max(n0, 0)))
    cache = {}

    def get(n):
        if n not in cache:
            prev = cache.get(n - 1) or cache.get(n + 1)
            cache[n] = symmetric_vortex_profile(n, rp, grid=grid, init=prev, **kw)
        return cache[n]

    n = max(n0, 0)
    while True:
        here = get(n).energy
        up = get(n + 1).energy
        down = get(n - 1).energy if n > 0 else math.inf
        if up < here:
            n += 1
        elif down < here:
            n -= 1
        else:
            break
    energies = {k: v.energy for k, v in sorted(cache.items())}
    return n, cache[n], energies


def xi_components(fn: RadialProfile, n: int, d: int):
    """Radial parts (P, M) of the test function Xi = P e^{i(n+d)theta} + M e^{i(n-d)theta}."""
    x, f = fn.nodes, fn.values
    fp = np.gradient(f, x)
    xm = fn.max_position
    A = np.where(x <= xm, x ** (d + 1) * fp, 0.0)
    B = np.where(x <= xm, n * x**d * f, n * xm**d * f)
    return A + B, A - B


def _mode_energy(grid, V, kdiag, koff, p, m, speed):
    """Quadratic form 1/2 int |p'|^2 + 1/2 ((m - speed x^2)/x)^2 p^2 + V p^2 (2 pi x dx)."""
    x = grid.nodes
    kp = kdiag * p
    kp[1:] += koff * p[:-1]
    kp[:-1] += koff * p[1:]
    ang = 0.5 * ((m - speed * x * x) / x) ** 2
    return 0.5 * np.dot(p, kp) + np.dot(grid.weights, (ang + V) * p * p)


def second_variation_Q(fn: RadialProfile, n: int, d: int, rp: ReducedParams, P=None, M=None) -> float:
    """Q_n[Xi] for the angular two-mode test function, integrated over theta exactly."""
    if d < 1:
        raise DomainError("d must be >= 1")
    if P is None or M is None:
        P, M = xi_components(fn, n, d)
    grid = fn.grid
    x, f = grid.nodes, fn.values
    c = 1.0 / rp.eps**2
    kd, ko = grid.stiffness_bands(True, True)
    w = rp.speed
    if rp.frame == OMEGA_FRAME:
        base = x**rp.s / rp.eps**2 - 0.5 * rp.gamma * w**2 * x**2
    else:
        base = rp.gamma * w**2 * analytic.eval_W(x, rp.s)
    V = base + 4 * c * f * f - fn.mu
    q = _mode_energy(grid, V, kd, ko, P, n + d, w) + _mode_energy(grid, V, kd, ko, M, n - d, w)
    q += grid.integrate(4 * c * f * f * P * M)
    return float(q)
