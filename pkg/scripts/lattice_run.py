"""Minimize in the vortex-lattice regime and report vortex statistics.

    python3 scripts/lattice_run.py --eps 0.08 --Omega 37.5 --n 384 --ppm lattice.ppm
"""
import argparse
import math
import sys
import warnings

from gpvortex import analytic, gp2d, vortex
from gpvortex.cli import dump_json, render_heatmap, write_field
from gpvortex.params import ReducedParams


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--eps", type=float, default=0.08)
    p.add_argument("--Omega", type=float, default=37.5)
    p.add_argument("--s", type=float, default=4.0)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--n", type=int, default=256)
    p.add_argument("--ppm", help="density heat map")
    p.add_argument("--dump", help="binary field dump")
    a = p.parse_args(argv)

    rp = ReducedParams(a.eps, a.s, a.gamma, "Omega", a.Omega)
    tf = analytic.tf_profile(rp)
    half = 1.5 * tf.x_out
    trial = gp2d.trial_vortex_lattice(rp, n=a.n, half_width=half,
                                      hole_winding=int(round(rp.speed * tf.x_in**2)))
    res = gp2d.minimize(trial, gp2d.GPConfig(rp, tol_residual=1e-7, max_iters=6000),
                        callback=lambda i, E, r: i % 200 == 0 and print(f"  it {i:5d}  E {E:.12g}  res {r:.2e}"))
    psi = res.psi
    region = vortex.build_region("R_bulk", rp, tf)
    cells = vortex.find_vortices(psi, speed=rp.speed)
    quarters = {}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", vortex.SmallRegionWarning)
        for k in range(4):
            u = vortex.uniformity_ratio(psi, region, rp.speed, k * math.pi / 2, (k + 1) * math.pi / 2,
                                        cells=cells)
            quarters[f"q{k + 1}"] = u.ratio
        whole = vortex.uniformity_ratio(psi, region, rp.speed, cells=cells).ratio
    e_tf = analytic.tf_energy(tf)
    lead = rp.speed * abs(math.log(rp.eps**4 * rp.speed)) / 6
    summary = dict(eps=rp.eps, Omega=rp.speed, n=a.n, converged=res.converged, iterations=res.iterations,
                   energy=res.energy, mu=res.mu, residual=res.residual, vortex_cells=len(cells),
                   R_bulk=[region.x_lo, region.x_hi], uniformity_full=whole, uniformity_quarters=quarters,
                   energy_excess_over_leading=(res.energy - e_tf) / lead,
                   hole_radius=vortex.detect_hole(psi))
    dump_json(summary, sys.stdout)
    if a.ppm:
        render_heatmap(psi, "density", a.ppm)
    if a.dump:
        write_field(a.dump, psi, rp)
    return 0


if __name__ == "__main__":
    sys.exit(main())
