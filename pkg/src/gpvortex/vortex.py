"""Phase-singularity analysis: plaquette windings, circle degrees, regions and holes."""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import ndimage

from . import analytic
from .errors import DomainError
from .gp2d import ComplexField2D, PolarField
from .params import BIG_OMEGA_FRAME, OMEGA_FRAME, Omega_from_omega, ReducedParams

REGION_KINDS = ("R_bulk", "A_bulk", "A_eps", "A_Omega")
DEFAULT_HOLE_THRESHOLD = 1e-8
ZERO_AMPLITUDE = 1e-12


class DegreeUndefined(DomainError):
    """The field vanishes (numerically) on the requested contour."""


class SmallRegionWarning(UserWarning):
    pass


def _wrap(dphi):
    """Wrap phase differences to (-pi, pi]."""
    return -np.mod(-dphi + np.pi, 2 * np.pi) + np.pi


# ---------------------------------------------------------------- plaquettes

def _values(psi):
    """Array whose plaquettes are analysed, and whether axis 1 is periodic.

    For polar fields the stored factor phi is used: the gauge factor
    exp(i n theta) is smooth on every plaquette and carries no winding there.
    """
    if isinstance(psi, PolarField):
        return psi.values, True
    return psi.values, False


def _corners(v, periodic):
    if periodic:
        v = np.concatenate([v, v[:, :1]], axis=1)
    return v[:-1, :-1], v[:-1, 1:], v[1:, 1:], v[1:, :-1]


def plaquette_circulation(psi):
    """Sum of wrapped phase increments around every cell, divided by 2 pi (unrounded)."""
    v, periodic = _values(psi)
    ph = [np.angle(z) for z in _corners(v, periodic)]
    tot = _wrap(ph[1] - ph[0]) + _wrap(ph[2] - ph[1]) + _wrap(ph[3] - ph[2]) + _wrap(ph[0] - ph[3])
    circ = tot / (2 * np.pi)
    # corners run (r, th) -> (r, th+) -> (r+, th+) -> (r+, th): clockwise in the plane
    return -circ if isinstance(psi, PolarField) else circ


def plaquette_windings(psi, zero_tol=ZERO_AMPLITUDE):
    """Winding of every cell (counterclockwise in the plane) and the indeterminate mask.

    Cell (j, i) has corners (j, i), (j, i+1), (j+1, i+1), (j+1, i).  Cells with a
    corner amplitude below ``zero_tol * max|psi|`` are indeterminate (winding 0 there).
    For polar fields axis 0 is r and axis 1 is theta.
    """
    v, periodic = _values(psi)
    w = np.rint(plaquette_circulation(psi)).astype(int)
    amp = np.abs(v)
    floor = zero_tol * amp.max() if amp.size else 0.0
    bad = np.zeros_like(w, dtype=bool)
    for z in _corners(v, periodic):
        bad |= np.abs(z) <= floor
    w[bad] = 0
    return w, bad


def plaquette_winding(psi, cell_index, zero_tol=ZERO_AMPLITUDE):
    """Winding of one cell, or None when a corner amplitude vanishes."""
    w, bad = plaquette_windings(psi, zero_tol)
    j, i = cell_index
    if bad[j, i]:
        return None
    return int(w[j, i])


def _cell_centres(psi):
    if isinstance(psi, PolarField):
        r = psi.r
        th = psi.theta
        rm = 0.5 * (r[:-1] + r[1:])
        tm = th + np.pi / psi.ntheta
        R, T = np.meshgrid(rm, tm, indexing="ij")
        return R * np.cos(T), R * np.sin(T)
    x, y = psi.x, psi.y
    X, Y = np.meshgrid(0.5 * (x[:-1] + x[1:]), 0.5 * (y[:-1] + y[1:]))
    return X, Y


def _envelope_window(psi, speed):
    if isinstance(psi, PolarField):
        if speed and speed > 0:
            ell = math.sqrt(2 * math.pi / (math.sqrt(3) * speed))
            dr = float(np.mean(np.diff(psi.r)))
            nr = 2 * max(1, int(round(ell / dr))) + 1
            nt = 2 * max(1, int(round(ell / (psi.r.mean() * 2 * np.pi / psi.ntheta)))) + 1
            return (nr, min(nt, psi.ntheta))
        return (9, 9)
    if speed and speed > 0:
        ell = math.sqrt(2 * math.pi / (math.sqrt(3) * speed))
        k = 2 * max(1, int(round(ell / max(psi.hx, psi.hy)))) + 1
        return (k, k)
    return (9, 9)


def _corner_min_density(psi):
    v, periodic = _values(psi)
    return np.minimum.reduce([np.abs(z) ** 2 for z in _corners(v, periodic)])


def _envelope(psi, size):
    v, periodic = _values(psi)
    dens = np.abs(v) ** 2
    mode = ("nearest", "wrap") if periodic else "nearest"
    env = ndimage.maximum_filter(dens, size=size, mode=mode)
    return np.maximum.reduce(list(_corners(env, periodic)))


def _presence(psi, size):
    v, periodic = _values(psi)
    sigma = tuple(k / 4 for k in size)
    mode = ("nearest", "wrap") if periodic else "nearest"
    sm = ndimage.gaussian_filter(np.abs(v) ** 2, sigma=sigma, mode=mode)
    return np.maximum.reduce(list(_corners(sm, periodic)))


@dataclass(frozen=True)
class VortexCell:
    x: float
    y: float
    winding: int
    merged: bool = False


def find_vortices(psi, speed=None, core_fraction=0.5, zero_tol=ZERO_AMPLITUDE,
                  window=None, max_grow=8, min_presence=1e-2):
    """Vortex cells: nonzero winding and a corner density below core_fraction of the local envelope.

    Cells where the density smoothed over half a lattice spacing is below
    ``min_presence`` times its peak lie in the exponentially small tails, where
    the phase carries no information, and are skipped.

    Connected clusters of indeterminate cells are replaced by the smallest
    enclosing index rectangle whose boundary amplitudes are all nonzero; its
    contour winding is reported once at the cluster centroid.
    """
    w, bad = plaquette_windings(psi, zero_tol)
    size = _envelope_window(psi, speed) if window is None else window
    env = _envelope(psi, size)
    cmin = _corner_min_density(psi)
    pres = _presence(psi, size)
    is_vortex = (w != 0) & (cmin < core_fraction * env) & (pres > min_presence * pres.max())
    X, Y = _cell_centres(psi)
    taken = np.zeros_like(bad)
    cells = []
    if bad.any():
        v, periodic = _values(psi)
        amp = np.abs(v)
        floor = zero_tol * amp.max()
        lab, nlab = ndimage.label(bad)
        for k, sl in enumerate(ndimage.find_objects(lab), start=1):
            j0, j1 = sl[0].start, sl[0].stop
            i0, i1 = sl[1].start, sl[1].stop
            for _ in range(max_grow):
                ring = _rect_ring(v, j0, j1, i0, i1, periodic)
                if ring is not None and np.all(np.abs(ring) > floor):
                    break
                j0, j1, i0, i1 = max(j0 - 1, 0), min(j1 + 1, w.shape[0]), i0 - 1, i1 + 1
                if not periodic:
                    i0, i1 = max(i0, 0), min(i1, w.shape[1])
            else:
                continue
            wind = _contour_winding(ring)
            if isinstance(psi, PolarField):
                wind = -wind
            jj, ii = np.nonzero(lab == k)
            taken[j0:j1, np.arange(i0, i1) % w.shape[1]] = True
            if wind != 0:
                ii = ii % w.shape[1]
                cells.append(VortexCell(float(X[jj, ii].mean()), float(Y[jj, ii].mean()), int(wind), True))
    jj, ii = np.nonzero(is_vortex & ~taken)
    for j, i in zip(jj, ii):
        cells.append(VortexCell(float(X[j, i]), float(Y[j, i]), int(w[j, i])))
    return cells


def _rect_ring(v, j0, j1, i0, i1, periodic):
    """Corner values along the boundary of cells [j0, j1) x [i0, i1), counterclockwise in (i, j)."""
    nj, ni = v.shape
    if j1 + 1 > nj or (not periodic and (i0 < 0 or i1 + 1 > ni)):
        return None
    ii = np.arange(i0, i1 + 1) % ni if periodic else np.arange(i0, i1 + 1)
    bottom = v[j0, ii]
    right = v[j0 + 1:j1 + 1, ii[-1]]
    top = v[j1, ii[::-1]][1:]
    left = v[j0:j1, ii[0]][::-1]
    return np.concatenate([bottom, right, top, left])


def _contour_winding(ring):
    ph = np.angle(np.concatenate([ring, ring[:1]]))
    return int(np.rint(np.sum(_wrap(np.diff(ph))) / (2 * np.pi)))


# ---------------------------------------------------------------- circles and holes

def degree_on_circle(psi, radius, samples=None, amp_tol=1e-6):
    """Winding number of psi along the circle |x| = radius (counterclockwise)."""
    if radius <= 0:
        raise DomainError("radius must be positive")
    if isinstance(psi, PolarField):
        r = psi.r
        if not (r[0] <= radius <= r[-1]):
            raise DomainError("circle lies outside the polar grid")
        i = min(np.searchsorted(r, radius) - 1, r.size - 2)
        i = max(i, 0)
        t = (radius - r[i]) / (r[i + 1] - r[i])
        ring = (1 - t) * psi.values[i] + t * psi.values[i + 1]
        peak = np.abs(psi.values).max()
        if np.abs(ring).min() <= amp_tol * peak:
            raise DegreeUndefined(f"field vanishes on the circle of radius {radius}")
        return psi.winding + _contour_winding(ring)
    h = min(psi.hx, psi.hy)
    n = samples or max(256, int(8 * 2 * np.pi * radius / h))
    th = 2 * np.pi * np.arange(n) / n
    ring = _bilinear(psi, radius * np.cos(th), radius * np.sin(th))
    peak = np.abs(psi.values).max()
    if np.abs(ring).min() <= amp_tol * peak:
        raise DegreeUndefined(f"field vanishes on the circle of radius {radius}")
    return _contour_winding(ring)


def _bilinear(psi: ComplexField2D, px, py):
    v = np.pad(psi.values, 1)
    fx = (px - psi.bounds[0]) / psi.hx
    fy = (py - psi.bounds[2]) / psi.hy
    if np.any((fx < 0) | (fx > v.shape[1] - 1) | (fy < 0) | (fy > v.shape[0] - 1)):
        raise DomainError("circle leaves the computational box")
    i = np.clip(np.floor(fx).astype(int), 0, v.shape[1] - 2)
    j = np.clip(np.floor(fy).astype(int), 0, v.shape[0] - 2)
    tx, ty = fx - i, fy - j
    return ((1 - tx) * (1 - ty) * v[j, i] + tx * (1 - ty) * v[j, i + 1]
            + tx * ty * v[j + 1, i + 1] + (1 - tx) * ty * v[j + 1, i])


def _radial_samples(psi):
    if isinstance(psi, PolarField):
        return psi.r, np.max(psi.density(), axis=1), psi.grid.edges[0]
    R = psi.radius().ravel()
    return R, psi.density().ravel(), 0.0


def detect_hole(psi, threshold=DEFAULT_HOLE_THRESHOLD) -> float:
    """Largest x_h with sup_{|x| <= x_h} |psi|^2 <= threshold * max|psi|^2 (0 if none)."""
    r, dens, inner = _radial_samples(psi)
    order = np.argsort(r, kind="stable")
    r, dens = r[order], dens[order]
    above = np.nonzero(dens > threshold * dens.max())[0]
    k = above[0]
    if k == 0:
        return float(inner)
    return float(r[k - 1])


# ---------------------------------------------------------------- regions

@dataclass(frozen=True)
class BulkRegion:
    kind: str
    x_lo: float
    x_hi: float
    parameters: dict = field(default_factory=dict)

    @property
    def radii(self):
        return (self.x_lo, self.x_hi)

    def area(self, theta_span=2 * np.pi):
        return 0.5 * theta_span * (self.x_hi**2 - self.x_lo**2)

    def contains(self, r):
        r = np.asarray(r)
        return (r >= self.x_lo) & (r <= self.x_hi)


def default_beta(rp: ReducedParams):
    speed = _big_omega(rp)
    return 1.0 / abs(math.log(rp.eps**4 * speed))


def _big_omega(rp):
    return rp.speed if rp.frame == BIG_OMEGA_FRAME else Omega_from_omega(rp)


def build_region(kind, rp: ReducedParams, tf=None, beta=None, c=None, eta=None) -> BulkRegion:
    """Radii of the named annular region."""
    if kind not in REGION_KINDS:
        raise DomainError(f"unknown region kind {kind!r}")
    eps = rp.eps
    if kind == "A_eps":
        if rp.frame != BIG_OMEGA_FRAME:
            raise DomainError("A_eps is defined in the Omega frame")
        eta = abs(math.log(eps)) ** 1.5 if eta is None else eta
        h = eps**2 * eta
        return BulkRegion(kind, 1 - h, 1 + h, {"eta": eta})
    if kind == "A_bulk":
        if rp.frame != BIG_OMEGA_FRAME:
            raise DomainError("A_bulk is defined in the Omega frame")
        a = analytic.alpha(rp.s, rp.gamma)
        cmax = math.sqrt(2 / a)
        c = 0.8 * cmax if c is None else c
        if not 0 < c < cmax:
            raise DomainError(f"c must lie in (0, {cmax:.6g})")
        h = c * math.sqrt(abs(math.log(eps))) / math.sqrt(rp.speed)
        if h >= 1:
            raise DomainError("A_bulk reaches the origin: Omega too small for the giant-vortex regime")
        return BulkRegion(kind, 1 - h, 1 + h, {"c": c})
    if rp.frame == OMEGA_FRAME and rp.speed == 0:
        big = 0.0
    else:
        big = _big_omega(rp)
    if not (0 < rp.eps**4 * big < 1):
        raise DomainError("bulk regions need 0 < eps^4 Omega < 1 (lattice regime)")
    tf = analytic.tf_profile(rp) if tf is None else tf
    beta = default_beta(rp) if beta is None else beta
    if kind == "R_bulk":
        margin = beta / (1 + (eps * big) ** (2 / 3))
    else:
        margin = (eps * big) ** (-2 / 3) / abs(math.log(eps**4 * big))
    lo = tf.x_in + margin if tf.x_in > 0 else 0.0
    hi = tf.x_out - margin
    if not lo < hi:
        raise DomainError(f"{kind} is empty at these parameters")
    return BulkRegion(kind, lo, hi, {"beta": beta, "margin": margin})


def sector_area(region: BulkRegion, theta0, theta1):
    return region.area(theta1 - theta0)


# sector edges are resolved to this step, so theta and theta + 2 pi name one edge
_EDGE_STEP = 2 * np.pi / 2.0**44


def _edge(theta):
    e = np.round(np.mod(theta, 2 * np.pi) / _EDGE_STEP) * _EDGE_STEP
    return 0.0 if e >= 2 * np.pi else float(e)


def _in_sector(phi, theta0, theta1):
    """Half-open membership of absolute angles phi in [theta0, theta1) modulo 2 pi.

    Both ends are snapped once, so adjacent sectors sharing an end partition
    the circle exactly even when phi sits on the cut.
    """
    a, b = _edge(theta0), _edge(theta1)
    if a <= b:
        return (phi >= a) & (phi < b)
    return (phi >= a) | (phi < b)


def _angle_from(x, y, edge):
    """Signed angle of (x, y) measured from the ray at ``edge``, in (-pi, pi]."""
    c, s = np.cos(edge), np.sin(edge)
    return np.arctan2(y * c - x * s, x * c + y * s)


def _sector_weight(x, y, region, theta0, theta1, cell_size=0.0):
    """Fraction of each cell inside the annular sector.

    A cell of width ``cell_size`` centred at angle th covers [th - h, th + h]
    with h = cell_size / (2 r); its weight is the part of that arc inside the
    sector, so a vortex sitting on a sector edge is shared rather than being
    assigned by round-off.  ``cell_size = 0`` gives the half-open rule.
    """
    r = np.hypot(x, y)
    span = theta1 - theta0
    inside = region.contains(r)
    if span >= 2 * np.pi or (span > np.pi and _edge(theta0) == _edge(theta1)):
        return inside.astype(float)
    if _edge(theta0) == _edge(theta1):
        return np.zeros_like(r)
    point = _in_sector(np.mod(np.arctan2(y, x), 2 * np.pi), theta0, theta1).astype(float)
    if cell_size <= 0:
        return np.where(inside, point, 0.0)
    h = np.minimum(cell_size / (2 * np.maximum(r, 1e-300)), np.pi)
    a, b = _edge(theta0), _edge(theta1)
    da, db = _angle_from(x, y, a), _angle_from(x, y, b)
    live = h > 0
    hh = np.where(live, h, 1.0)
    # share of the arc on the positive side of each edge; a shared edge gives
    # complementary shares to the two sectors meeting there
    past_a = np.clip((da + hh) / (2 * hh), 0.0, 1.0)
    past_b = np.clip((db + hh) / (2 * hh), 0.0, 1.0)
    near_a, near_b = live & (np.abs(da) < h), live & (np.abs(db) < h)
    w = np.where(near_a, past_a, np.where(near_b, 1.0 - past_b, point))
    both = near_a & near_b
    if np.any(both):
        # arc straddles both edges: direct overlap with the sector and its shifts
        th = np.mod(np.arctan2(y, x) - theta0, 2 * np.pi)
        ov = np.zeros_like(th)
        for shift in (-2 * np.pi, 0.0, 2 * np.pi):
            ov += np.clip(np.minimum(h, shift + span - th) + np.minimum(h, th - shift), 0.0, None)
        w = np.where(both, np.minimum(ov / (2 * hh), 1.0), w)
    return np.where(inside, w, 0.0)


def vorticity(cells, region: BulkRegion, theta0=0.0, theta1=2 * np.pi, cell_size=0.0) -> float:
    """nu(S) = 2 pi * sum of windings of the cells inside the sector S."""
    if not cells:
        return 0.0
    x = np.array([c.x for c in cells])
    y = np.array([c.y for c in cells])
    d = np.array([c.winding for c in cells])
    return float(2 * np.pi * np.sum(d * _sector_weight(x, y, region, theta0, theta1, cell_size)))


@dataclass(frozen=True)
class Uniformity:
    ratio: float
    nu: float
    area: float
    count: int
    small_region: bool

    def __float__(self):
        return self.ratio


def uniformity_ratio(psi, region: BulkRegion, Omega, theta0=0.0, theta1=2 * np.pi,
                     cells=None, eps=None) -> Uniformity:
    """nu(S) / (Omega |S|) for the annular sector S of ``region``."""
    cells = find_vortices(psi, speed=Omega) if cells is None else cells
    area = sector_area(region, theta0, theta1)
    size = max(psi.hx, psi.hy) if isinstance(psi, ComplexField2D) else 0.0
    nu = vorticity(cells, region, theta0, theta1, cell_size=size)
    small = False
    if eps is not None:
        need = abs(math.log(eps**4 * Omega)) ** 2 / Omega
        if area <= need:
            small = True
            warnings.warn(f"region area {area:.4g} is not much larger than {need:.4g}", SmallRegionWarning)
    count = int(round(nu / (2 * np.pi)))
    return Uniformity(nu / (Omega * area), nu, area, count, small)


def min_ratio_to_profile(psi: PolarField, profile, region: BulkRegion) -> float:
    """min over region nodes of |psi| / g (g a radial profile)."""
    m = region.contains(psi.r)
    if not m.any():
        raise DomainError("region contains no grid nodes")
    g = profile(psi.r[m])
    return float(np.min(np.abs(psi.values[m]) / g[:, None]))


# ---------------------------------------------------------------- report

@dataclass
class VortexReport:
    zeros: list
    nu_total: float
    regions: dict
    degrees: dict
    hole_radius: float

    def to_dict(self):
        return {
            "zeros": [{"x": c.x, "y": c.y, "winding": c.winding, "merged": c.merged} for c in self.zeros],
            "nu_total": self.nu_total,
            "regions": self.regions,
            "degrees": {repr(float(k)): v for k, v in self.degrees.items()},
            "hole_radius": self.hole_radius,
        }

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), sort_keys=True, **kw)

    @property
    def count(self):
        return len(self.zeros)


def vortex_report(psi, speed=None, regions=(), circles=(), threshold=DEFAULT_HOLE_THRESHOLD) -> VortexReport:
    """Collect vortex cells, per-region vorticity, circle degrees and the hole radius.

    ``regions`` is an iterable of (name, BulkRegion, theta0, theta1).
    """
    cells = find_vortices(psi, speed=speed)
    nu_total = float(2 * np.pi * sum(c.winding for c in cells))
    reg = {}
    for name, region, t0, t1 in regions:
        nu = vorticity(cells, region, t0, t1)
        reg[name] = {"nu": nu, "area": sector_area(region, t0, t1), "x_lo": region.x_lo,
                     "x_hi": region.x_hi, "theta0": t0, "theta1": t1}
    deg = {}
    for R in circles:
        try:
            deg[R] = degree_on_circle(psi, R)
        except DegreeUndefined:
            deg[R] = None
    return VortexReport(cells, nu_total, reg, deg, detect_hole(psi, threshold))
