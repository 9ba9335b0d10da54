"""Omega0 ladder at fixed eps: seeded giant-vortex minimizations and the vortex-free annulus.

    python3 scripts/giant_vortex_sweep.py --eps 0.25 --omega0 0.1 0.3 1 3 10 --seeds 8
"""
import argparse
import math
import sys

from gpvortex import gp2d, radial, vortex
from gpvortex.cli import write_csv
from gpvortex.params import ReducedParams


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--eps", type=float, default=0.25)
    p.add_argument("--s", type=float, default=4.0)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--omega0", type=float, nargs="+", default=[0.1, 0.3, 1.0, 3.0, 10.0])
    p.add_argument("--seeds", type=int, default=8, help="unit vortices imprinted on the unit circle")
    p.add_argument("--csv")
    a = p.parse_args(argv)

    cols = ["Omega0", "Omega", "E_GP", "E_GV", "E_over_Omega", "bulk_vortices", "degree", "min_ratio",
            "converged"]
    rows = []
    for o0 in a.omega0:
        rp = ReducedParams.from_omega0(a.eps, a.s, a.gamma, o0)
        res = gp2d.minimize(gp2d.seeded_giant_vortex(rp, count=a.seeds),
                            gp2d.GPConfig(rp, tol_residual=1e-7, max_iters=4000))
        gv = radial.gv_profile(rp)
        region = vortex.build_region("A_bulk", rp)
        inside = [c for c in vortex.find_vortices(res.psi, speed=rp.speed)
                  if region.contains(math.hypot(c.x, c.y))]
        row = dict(Omega0=o0, Omega=rp.speed, E_GP=res.energy, E_GV=gv.energy,
                   E_over_Omega=res.energy / rp.speed, bulk_vortices=len(inside),
                   degree=vortex.degree_on_circle(res.psi, 1.0),
                   min_ratio=vortex.min_ratio_to_profile(res.psi, gv, region), converged=res.converged)
        rows.append(row)
        print("  ".join(f"{k}={row[k]:.6g}" if isinstance(row[k], float) else f"{k}={row[k]}" for k in cols))
    if a.csv:
        write_csv(a.csv, cols, rows)
    return 0


if __name__ == "__main__":
    sys.exit(main())
