"""Second variation of the energy at the optimal symmetric vortex, mode by mode.

For each angular mode d the perturbation is the one built from the radial
profile; the quadratic form is compared with a finite difference of the
full polar energy along the same direction.

    python3 scripts/second_variation_scan.py --eps 0.25 --omega0 0.1 --dmax 8
"""
import argparse
import math
import sys

import numpy as np

from gpvortex import gp2d, radial
from gpvortex.params import ReducedParams


def finite_difference(fn, n, d, rp, P, M, t=1e-4):
    nt = 4 * d + 8
    th = 2 * np.pi * np.arange(nt) / nt
    xi = P[:, None] * np.exp(1j * d * th) + M[:, None] * np.exp(-1j * d * th)
    base = np.repeat(fn.values[:, None], nt, axis=1).astype(complex)
    cfg = gp2d.GPConfig(rp)

    def energy(s):
        return gp2d.energy(gp2d.PolarField(fn.grid, base + s * xi, n).normalized(), cfg)

    return (energy(t) + energy(-t) - 2 * energy(0.0)) / (2 * t * t)


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--eps", type=float, default=0.25)
    p.add_argument("--s", type=float, default=4.0)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--omega0", type=float, default=0.1)
    p.add_argument("--dmax", type=int, default=8)
    a = p.parse_args(argv)

    rp = ReducedParams.from_omega0(a.eps, a.s, a.gamma, a.omega0)
    n, fn, _ = radial.optimal_winding(rp)
    print(f"Omega = {rp.speed:.6g}, optimal winding n = {n}, energy {fn.energy:.12g}")
    print(f"{'d':>3} {'Q':>14} {'finite diff':>14} {'rel gap':>10}")
    for d in range(1, a.dmax + 1):
        P, M = radial.xi_components(fn, n, d)
        nrm = math.sqrt(fn.grid.integrate(P**2 + M**2))
        P, M = P / nrm, M / nrm
        q = radial.second_variation_Q(fn, n, d, rp, P=P, M=M)
        fd = finite_difference(fn, n, d, rp, P, M)
        print(f"{d:>3} {q:>14.6g} {fd:>14.6g} {abs(q - fd) / abs(fd):>10.2e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
