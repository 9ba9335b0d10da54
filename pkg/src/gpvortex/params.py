"""Physical and reduced parameters, and the maps between the two scalings.

Two nondimensional frames are used throughout:

* ``omega`` frame: lengths in units of R_eps, rotation speed ``omega``.
* ``Omega`` frame: lengths in units of r_m, rotation speed ``Omega``.
"""
from __future__ import annotations

import math
import numbers
from dataclasses import dataclass, replace

from .errors import DomainError

OMEGA_FRAME = "omega"
BIG_OMEGA_FRAME = "Omega"
FRAMES = (OMEGA_FRAME, BIG_OMEGA_FRAME)


def _positive(name, value):
    if not (isinstance(value, numbers.Real) and math.isfinite(value) and value > 0):
        raise DomainError(f"{name} must be finite and positive, got {value!r}")
    return float(value)


def _exponent(s):
    s = _positive("s", s)
    if s <= 2:
        raise DomainError(f"trap exponent must satisfy s > 2, got {s}")
    return s


@dataclass(frozen=True)
class TrapParams:
    """Physical trap V = k r^s + 1/2 oosc^2 r^2 rotating at ``orot``."""

    eps: float
    s: float
    k: float
    gamma: float
    oosc: float
    orot: float

    def __post_init__(self):
        _positive("eps", self.eps)
        _exponent(self.s)
        _positive("k", self.k)
        _positive("orot", self.orot)
        if not (0 < self.gamma <= 1):
            raise DomainError(f"gamma must lie in (0, 1], got {self.gamma}")
        if not (math.isfinite(self.oosc) and self.oosc >= 0):
            raise DomainError(f"oosc must be finite and >= 0, got {self.oosc}")
        if self.oosc >= self.orot:
            raise DomainError("rotation speed must exceed the harmonic trap frequency")
        eff2 = self.orot**2 - self.oosc**2
        if not math.isclose(eff2, self.gamma * self.orot**2, rel_tol=1e-12, abs_tol=0.0):
            raise DomainError("inconsistent (gamma, oosc, orot): need orot^2 - oosc^2 = gamma orot^2")

    @classmethod
    def from_gamma(cls, eps, s, k, gamma, orot):
        """Derive the harmonic frequency from gamma."""
        oosc = float(orot) * math.sqrt(max(0.0, 1.0 - gamma))
        return cls(eps=eps, s=s, k=k, gamma=gamma, oosc=oosc, orot=orot)

    @classmethod
    def from_oosc(cls, eps, s, k, oosc, orot):
        """Derive gamma from the harmonic frequency."""
        gamma = 1.0 - (oosc / orot) ** 2
        return cls(eps=eps, s=s, k=k, gamma=gamma, oosc=oosc, orot=orot)

    def to_reduced(self, frame: str) -> "ReducedParams":
        if frame not in (OMEGA_FRAME, BIG_OMEGA_FRAME):
            raise DomainError(f"unknown frame {frame!r}")
        length = r_eps(self) if frame == OMEGA_FRAME else r_m(self)
        try:
            speed = length**2 * self.orot
        except OverflowError:
            raise DomainError(f"{frame}-frame speed overflows a double") from None
        return ReducedParams(eps=self.eps, s=self.s, gamma=self.gamma, frame=frame, speed=speed)


@dataclass(frozen=True)
class ReducedParams:
    """Nondimensional parameters in one of the two frames."""

    eps: float
    s: float
    gamma: float
    frame: str
    speed: float

    def __post_init__(self):
        _positive("eps", self.eps)
        _exponent(self.s)
        if not (0 < self.gamma <= 1):
            raise DomainError(f"gamma must lie in (0, 1], got {self.gamma}")
        if self.frame not in FRAMES:
            raise DomainError(f"frame must be one of {FRAMES}, got {self.frame!r}")
        if self.frame == OMEGA_FRAME and self.speed == 0:
            object.__setattr__(self, "speed", 0.0)
        else:
            _positive("speed", self.speed)

    @classmethod
    def from_omega0(cls, eps, s, gamma, omega0):
        return cls(eps=eps, s=s, gamma=gamma, frame=BIG_OMEGA_FRAME,
                   speed=_positive("omega0", omega0) / eps**4)

    @property
    def omega0(self) -> float:
        if self.frame != BIG_OMEGA_FRAME:
            raise DomainError("omega0 is defined only in the Omega frame")
        return self.speed * self.eps**4

    def with_speed(self, speed) -> "ReducedParams":
        return replace(self, speed=speed)

    def to_frame(self, frame: str) -> "ReducedParams":
        if frame == self.frame:
            return self
        if frame == OMEGA_FRAME:
            return replace(self, frame=frame, speed=omega_from_Omega(self))
        if frame == BIG_OMEGA_FRAME:
            return replace(self, frame=frame, speed=Omega_from_omega(self))
        raise DomainError(f"unknown frame {frame!r}")


def r_eps(params: TrapParams) -> float:
    """Length unit R_eps = (k eps^2)^(-1/(s+2))."""
    k = _positive("k", params.k)
    eps = _positive("eps", params.eps)
    s = _exponent(params.s)
    return (k * eps**2) ** (-1.0 / (s + 2))


def r_m(params: TrapParams) -> float:
    """Radius of the minimum of the effective potential."""
    s = _exponent(params.s)
    orot = _positive("orot", params.orot)
    gamma = _positive("gamma", params.gamma)
    k = _positive("k", params.k)
    try:
        return (gamma * orot**2 / (s * k)) ** (1.0 / (s - 2))
    except OverflowError:
        raise DomainError(f"r_m overflows a double at s = {s:g}") from None


def omega_from_Omega(rp: ReducedParams) -> float:
    if rp.frame != BIG_OMEGA_FRAME:
        raise DomainError("expected Omega-frame parameters")
    s, g = rp.s, rp.gamma
    return (s / g) ** (2 / (s + 2)) * rp.eps ** (-4 / (s + 2)) * rp.speed ** ((s - 2) / (s + 2))


def Omega_from_omega(rp: ReducedParams) -> float:
    if rp.frame != OMEGA_FRAME:
        raise DomainError("expected omega-frame parameters")
    s, g = rp.s, rp.gamma
    base = rp.speed * (g / s) ** (2 / (s + 2)) * rp.eps ** (4 / (s + 2))
    try:
        return base ** ((s + 2) / (s - 2))
    except OverflowError:
        raise DomainError(f"Omega overflows a double at s = {s:g}") from None
