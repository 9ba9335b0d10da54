"""Thomas-Fermi theory, effective potentials, critical speeds, Gaussian profiles."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from .errors import DomainError, SolverError
from .params import BIG_OMEGA_FRAME, OMEGA_FRAME, ReducedParams

_XTOL = 1e-15


def _check_s(s):
    if not (math.isfinite(s) and s > 2):
        raise DomainError(f"trap exponent must satisfy s > 2, got {s}")


def alpha(s, gamma):
    """Curvature of the giant-vortex potential at x=1: alpha^2 = 4 + gamma (s-2)."""
    _check_s(s)
    return math.sqrt(4.0 + gamma * (s - 2.0))


def eval_W(x, s):
    """Effective potential (x^s - 1)/s - (x^2 - 1)/2, minimal (=0) at x=1."""
    _check_s(s)
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise DomainError("W is defined for x >= 0")
    d = x - 1.0
    with np.errstate(divide="ignore"):
        pow_m1 = np.expm1(s * np.log1p(d))
    out = pow_m1 / s - d - 0.5 * d * d
    return out if out.ndim else float(out)


def eval_U(x, Omega, s, gamma):
    """Giant-vortex potential 1/2 B^2 / Omega^2 + gamma W with B = Omega x - floor(Omega)/x."""
    if Omega < 1:
        raise DomainError("U needs Omega >= 1")
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError("U is singular at x = 0")
    a = math.floor(Omega) / Omega
    b = (x * x - a) / x
    out = 0.5 * b * b + gamma * eval_W(x, s)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class EffectivePotentials:
    s: float
    gamma: float
    Omega: float = 1.0

    @property
    def alpha(self):
        return alpha(self.s, self.gamma)

    def W(self, x):
        return eval_W(x, self.s)

    def U(self, x):
        return eval_U(x, self.Omega, self.s, self.gamma)

    def W_taylor2(self, x):
        return 0.5 * (self.s - 2.0) * (1.0 - np.asarray(x)) ** 2

    def U_taylor2(self, x):
        return 0.5 * self.alpha**2 * (np.asarray(x) - 1.0) ** 2


# ---------------------------------------------------------------- critical speeds

def omega_c(eps, s, gamma):
    """Closed-form expression 2^{s/(s+2)} gamma^{-1/2} (2(s+2)/(pi(s-2)))^{(s+2)/(2(s-2))} / eps.

    This is the printed first-hole speed; it does not coincide with the
    Thomas-Fermi hole threshold, which `omega_hole_threshold` computes.
    """
    _check_s(s)
    base = 2 * (s + 2) / (math.pi * (s - 2))
    return 2 ** (s / (s + 2)) * gamma**-0.5 * base ** ((s + 2) / (2 * (s - 2))) / eps


def omega_hole_threshold(eps, s, gamma):
    """Speed at which the TF density first vanishes at the origin (omega frame)."""
    _check_s(s)
    base = 4 * (s + 2) / (math.pi * (s - 2))
    return math.sqrt(2.0 / gamma) * base ** ((s - 2) / (2 * (s + 2))) / eps


def Omega_c(eps, s, gamma):
    _check_s(s)
    return 2 * math.sqrt(2 * (s + 2) / (math.pi * gamma * (s - 2))) * (2 / s) ** (2 / (s - 2)) / eps


@dataclass(frozen=True)
class SpeedScale:
    exponent: float        # Omega_rot ~ eps**exponent
    scale: float           # eps**exponent
    omega_frame_exponent: float = -4.0   # Omega ~ eps**-4, i.e. omega0 = Omega eps^4 fixed


def third_speed_scale(eps, s):
    """Order of magnitude of the giant-vortex transition speed (no sharp constant)."""
    _check_s(s)
    e = -4.0 * (s - 2) / (s + 2)
    return SpeedScale(exponent=e, scale=eps**e)


# ---------------------------------------------------------------- Gaussian

@dataclass(frozen=True)
class GaussianProfile:
    """g(y) = pi^{-1/4} alpha^{1/4} exp(-alpha y^2 / 2), ground state of -1/2 d^2 + 1/2 alpha^2 y^2."""

    alpha: float

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        return math.pi**-0.25 * self.alpha**0.25 * np.exp(-0.5 * self.alpha * y * y)

    def oscillator_energy(self):
        a = self.alpha
        f = lambda y: 0.5 * (a * y * self(y)) ** 2 + 0.5 * a * a * y * y * self(y) ** 2
        return integrate.quad(f, -np.inf, np.inf, epsabs=1e-14)[0]


def gaussian_profile(alpha_value):
    if not alpha_value > 0:
        raise DomainError("alpha must be positive")
    return GaussianProfile(float(alpha_value))


# ---------------------------------------------------------------- Thomas-Fermi

@dataclass(frozen=True)
class TFProfile:
    frame: str
    mu_tf: float
    x_in: float
    x_out: float
    params: ReducedParams

    def density(self, x):
        x = np.asarray(x, dtype=float)
        out = np.maximum(_tf_bracket(self.params, self.mu_tf, x), 0.0)
        return out if out.ndim else float(out)

    def mass(self):
        return _tf_mass(self.params, self.mu_tf, self.x_in, self.x_out)

    def energy(self):
        return tf_energy(self)


def _tf_bracket(rp, mu, x):
    """Unclipped TF density."""
    eps = rp.eps
    if rp.frame == OMEGA_FRAME:
        return 0.5 * (eps**2 * mu - x**rp.s + 0.5 * rp.gamma * eps**2 * rp.speed**2 * x**2)
    return 0.5 * eps**2 * (mu - rp.gamma * rp.speed**2 * eval_W(x, rp.s))


def _tf_mass(rp, mu, x_in, x_out):
    if x_out <= x_in:
        return 0.0
    f = lambda x: 2 * math.pi * x * max(_tf_bracket(rp, mu, x), 0.0)
    val, _ = integrate.quad(f, x_in, x_out, epsabs=1e-13, epsrel=1e-12, limit=200)
    return val


def _grow(fun, lo, start):
    """Smallest hi = start*2^j with fun(hi) < 0 (fun positive at lo)."""
    hi = max(start, lo * 2 + 1e-300)
    for _ in range(200):
        if fun(hi) < 0:
            return hi
        hi *= 2
    raise SolverError("failed to bracket TF support edge", last=hi)


def _support(rp, mu):
    """Roots of the TF bracket: (x_in, x_out); empty support gives (x, x)."""
    s = rp.s
    p = lambda x: float(_tf_bracket(rp, mu, x))
    if rp.frame == OMEGA_FRAME:
        xs = (rp.gamma * rp.eps**2 * rp.speed**2 / s) ** (1.0 / (s - 2))
    else:
        xs = 1.0
    if p(xs) <= 0:
        return xs, xs
    if p(0.0) >= 0:
        x_in = 0.0
    else:
        x_in = optimize.brentq(p, 0.0, xs, xtol=_XTOL, rtol=4 * np.finfo(float).eps)
    hi = _grow(p, xs, max(2 * xs, 1.0))
    x_out = optimize.brentq(p, xs, hi, xtol=_XTOL, rtol=4 * np.finfo(float).eps)
    return x_in, x_out


def tf_profile(rp: ReducedParams) -> TFProfile:
    """TF minimizer: chemical potential fixed by unit mass, support radii by root finding."""
    if rp.frame == OMEGA_FRAME:
        xs = (rp.gamma * rp.eps**2 * rp.speed**2 / rp.s) ** (1.0 / (rp.s - 2))
        mu_lo = (xs**rp.s - 0.5 * rp.gamma * rp.eps**2 * rp.speed**2 * xs**2) / rp.eps**2
    else:
        mu_lo = 0.0

    def excess(mu):
        return _tf_mass(rp, mu, *_support(rp, mu)) - 1.0

    step = max(1.0, abs(mu_lo))
    mu_hi = mu_lo + step
    for _ in range(200):
        if excess(mu_hi) > 0:
            break
        step *= 2
        mu_hi = mu_lo + step
    else:
        raise SolverError("TF chemical potential bracket failed", mu_lo=mu_lo, mu_hi=mu_hi)
    mu = optimize.brentq(excess, mu_lo, mu_hi, xtol=1e-300, rtol=4 * np.finfo(float).eps,
                         maxiter=500)
    x_in, x_out = _support(rp, mu)
    return TFProfile(frame=rp.frame, mu_tf=mu, x_in=x_in, x_out=x_out, params=rp)


def tf_energy(profile: TFProfile) -> float:
    rp = profile.params
    eps, s, g, w = rp.eps, rp.s, rp.gamma, rp.speed
    if rp.frame == OMEGA_FRAME:
        def dens(x):
            r = profile.density(x)
            return (x**s * r + r * r - 0.5 * g * eps**2 * w**2 * x**2 * r) / eps**2
    else:
        def dens(x):
            r = profile.density(x)
            return r * r / eps**2 + g * w**2 * eval_W(x, s) * r
    val, _ = integrate.quad(lambda x: 2 * math.pi * x * dens(x), profile.x_in, profile.x_out,
                            epsabs=1e-10, epsrel=1e-13, limit=200)
    return val


def tf_chemical_identity_gap(profile: TFProfile) -> float:
    """mu - (E + eps^-2 ||rho||_2^2); zero for the TF minimizer."""
    eps = profile.params.eps
    l2, _ = integrate.quad(lambda x: 2 * math.pi * x * profile.density(x) ** 2,
                           profile.x_in, profile.x_out, epsabs=1e-13, epsrel=1e-13)
    return profile.mu_tf - (tf_energy(profile) + l2 / eps**2)


def tf_edge_width_asymptotic(rp: ReducedParams) -> float:
    """Large eps*Omega prediction for |1 - x_in| and |x_out - 1|."""
    if rp.frame != BIG_OMEGA_FRAME:
        raise DomainError("expected Omega-frame parameters")
    return (3 / (2 * math.pi * rp.gamma * (rp.s - 2))) ** (1 / 3) * (rp.eps * rp.speed) ** (-2 / 3)
