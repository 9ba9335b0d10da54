"""Sweep Omega across Omega_c and compare TF, radial and (optionally) 2D hole radii.

    python3 scripts/hole_sweep.py --eps 0.05 --factors 0.5 0.8 1.2 1.6 2.0
    python3 scripts/hole_sweep.py --eps 0.1 --gp2d --n 256
"""
import argparse
import math
import sys

import numpy as np

from gpvortex import analytic, gp2d, radial, vortex
from gpvortex.cli import write_csv
from gpvortex.params import ReducedParams


def radial_hole(prof, threshold):
    dens = prof.values**2
    above = np.nonzero(dens > threshold * dens.max())[0]
    return 0.0 if above[0] == 0 else float(prof.nodes[above[0] - 1])


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--eps", type=float, default=0.05)
    p.add_argument("--s", type=float, default=4.0)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--factors", type=float, nargs="+", default=[0.5, 0.8, 0.95, 1.05, 1.2, 1.6, 2.0])
    p.add_argument("--threshold", type=float, default=vortex.DEFAULT_HOLE_THRESHOLD)
    p.add_argument("--gp2d", action="store_true", help="also minimize the 2D functional")
    p.add_argument("--n", type=int, default=192)
    p.add_argument("--csv")
    a = p.parse_args(argv)

    oc = analytic.Omega_c(a.eps, a.s, a.gamma)
    print(f"Omega_c = {oc:.10g}")
    cols = ["factor", "Omega", "x_in_TF", "hole_radial", "hole_2d", "E_TF", "E_hat", "E_GP"]
    rows = []
    for fac in a.factors:
        rp = ReducedParams(a.eps, a.s, a.gamma, "Omega", fac * oc)
        tf = analytic.tf_profile(rp)
        g0 = radial.g0_profile(rp)
        row = dict(factor=fac, Omega=rp.speed, x_in_TF=tf.x_in, hole_radial=radial_hole(g0, a.threshold),
                   E_TF=analytic.tf_energy(tf), E_hat=g0.energy)
        if a.gp2d:
            half = 1.5 * tf.x_out
            trial = gp2d.trial_vortex_lattice(rp, n=a.n, half_width=half,
                                              hole_winding=int(round(rp.speed * tf.x_in**2)))
            res = gp2d.minimize(trial, gp2d.GPConfig(rp, tol_residual=1e-7, max_iters=6000))
            row.update(hole_2d=vortex.detect_hole(res.psi, a.threshold), E_GP=res.energy)
        rows.append(row)
        print("  ".join(f"{k}={row[k]:.6g}" for k in cols if row.get(k) is not None))
    if a.csv:
        write_csv(a.csv, cols, rows)
    return 0


if __name__ == "__main__":
    sys.exit(main())
