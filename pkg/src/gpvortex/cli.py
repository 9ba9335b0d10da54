"""Command-line front end and file formats.

Subcommands: tf, radial, gp2d, vortex, sweep, render.  Parameters come from a
flat ``key = value`` config file (``--config``) overridden by ``--set key=value``.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import json
import math
import os
import struct
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import analytic, gp2d, radial, vortex
from .errors import DomainError, SolverError
from .params import BIG_OMEGA_FRAME, OMEGA_FRAME, ReducedParams

AXES = ("omega", "Omega", "Omega0", "eps")
TASKS = ("tf", "radial", "gp2d", "vortex-report")
FMT = ".17g"

DEFAULTS = {
    "eps": 0.1,
    "s": 4.0,
    "gamma": 1.0,
    "frame": BIG_OMEGA_FRAME,
    "speed": 10.0,
    "n": 128,
    "half_width": None,
    "tol_residual": 1e-7,
    "tol_energy": 1e-12,
    "max_iters": 5000,
    "init": "auto",
    "seed": 0,
    "ntheta": None,
    "ring": 0,
    "hole_winding": None,
    "kind": "g0",
    "winding": 0,
    "threshold": vortex.DEFAULT_HOLE_THRESHOLD,
    "polar_from_omega0": 1.0,
}


# ---------------------------------------------------------------- config

def _coerce(text):
    text = text.strip()
    if text.lower() in ("none", ""):
        return None
    if "," in text:
        return [_coerce(t) for t in text.split(",") if t.strip()]
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    return text


def load_config(path=None, overrides=()):
    """Flat key=value config (``#`` comments) plus ``key=value`` overrides."""
    cfg = dict(DEFAULTS)
    if path is not None:
        parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
        parser.optionxform = str
        parser.read_string("[run]\n" + Path(path).read_text())
        cfg.update({k: _coerce(v) for k, v in parser["run"].items()})
    for item in overrides:
        if "=" not in item:
            raise DomainError(f"override {item!r} is not key=value")
        k, v = item.split("=", 1)
        cfg[k.strip()] = _coerce(v)
    return cfg


def params_from_config(cfg) -> ReducedParams:
    if cfg.get("omega0") is not None:
        return ReducedParams.from_omega0(float(cfg["eps"]), float(cfg["s"]), float(cfg["gamma"]),
                                         float(cfg["omega0"]))
    return ReducedParams(float(cfg["eps"]), float(cfg["s"]), float(cfg["gamma"]), str(cfg["frame"]),
                         float(cfg["speed"]))


def params_row(rp: ReducedParams):
    row = {"eps": rp.eps, "s": rp.s, "gamma": rp.gamma, "frame": rp.frame, "speed": rp.speed}
    row["omega0"] = rp.omega0 if rp.frame == BIG_OMEGA_FRAME else None
    return row


# ---------------------------------------------------------------- field dumps

_MAGIC = b"GPF1"
_VERSION = 1
_HEADER = struct.Struct("<4sHII4dB4d")
_FRAME_TAG = {OMEGA_FRAME: 0, BIG_OMEGA_FRAME: 1}


def write_field(path, psi: gp2d.ComplexField2D, rp: ReducedParams):
    """Binary dump: header, then nx*ny complex values as little-endian f64 pairs, row-major."""
    head = _HEADER.pack(_MAGIC, _VERSION, psi.nx, psi.ny, *psi.bounds, _FRAME_TAG[rp.frame],
                        rp.eps, rp.s, rp.gamma, rp.speed)
    payload = np.ascontiguousarray(psi.values, dtype="<c16").tobytes()
    with open(path, "wb") as fh:
        fh.write(head)
        fh.write(payload)


def read_field(path):
    """Inverse of `write_field`; returns (field, params)."""
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise DomainError("file too short for a field header")
    magic, ver, nx, ny, x0, x1, y0, y1, tag, eps, s, gamma, speed = _HEADER.unpack_from(data)
    if magic != _MAGIC:
        raise DomainError(f"bad magic {magic!r}")
    if ver != _VERSION:
        raise DomainError(f"unsupported field version {ver}")
    body = data[_HEADER.size:]
    if len(body) != 16 * nx * ny:
        raise DomainError("payload size does not match the header")
    vals = np.frombuffer(body, dtype="<c16").reshape(ny, nx).astype(complex)
    frame = {v: k for k, v in _FRAME_TAG.items()}[tag]
    return gp2d.ComplexField2D(vals, (x0, x1, y0, y1)), ReducedParams(eps, s, gamma, frame, speed)


# ---------------------------------------------------------------- text outputs

def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return format(float(v), FMT)
    return str(v)


def write_csv(path_or_file, header, rows):
    own = isinstance(path_or_file, (str, Path))
    fh = open(path_or_file, "w", newline="") if own else path_or_file
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(row.get(k) if isinstance(row, dict) else row[i]) for i, k in enumerate(header)])
    finally:
        if own:
            fh.close()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else repr(f)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def dump_json(obj, fh=None):
    text = json.dumps(_jsonable(obj), sort_keys=True, indent=2)
    if fh is None:
        return text
    fh.write(text + "\n")
    return text


# ---------------------------------------------------------------- images

def _gray(t):
    t = np.clip(t, 0, 1)
    v = (255 * t + 0.5).astype(np.uint8)
    return np.stack([v, v, v], axis=-1)


def _hue(h):
    """Cyclic colour map: hue h in [0, 1) at full saturation and value."""
    h6 = np.mod(h, 1.0) * 6
    k = np.stack([np.mod(5 + h6, 6), np.mod(3 + h6, 6), np.mod(1 + h6, 6)], axis=-1)
    rgb = 1 - np.clip(np.minimum(k, 4 - k), 0, 1)
    return (255 * rgb + 0.5).astype(np.uint8)


def render_heatmap(obj, quantity, path, size=256):
    """Write a binary PPM of density (linear gray) or phase (cyclic hue); returns the pixel array."""
    if quantity not in ("density", "phase"):
        raise DomainError("quantity must be 'density' or 'phase'")
    if isinstance(obj, radial.RadialProfile):
        hw = float(obj.grid.edges[-1])
        fld = gp2d.ComplexField2D.from_function(lambda X, Y: obj(np.hypot(X, Y)), size, hw)
        vals = fld.values
    elif isinstance(obj, gp2d.PolarField):
        vals = obj.to_cartesian(size, float(obj.grid.edges[-1])).values
    else:
        vals = obj.values
    vals = vals[::-1]  # first image row is the largest y
    if quantity == "density":
        d = np.abs(vals) ** 2
        peak = d.max()
        img = _gray(d / peak if peak > 0 else d)
    else:
        img = _hue((np.angle(vals) + np.pi) / (2 * np.pi))
    h, w = img.shape[:2]
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(img.tobytes())
    return img


def read_ppm(path):
    data = Path(path).read_bytes()
    parts = data.split(b"\n", 3)
    if parts[0] != b"P6":
        raise DomainError("not a binary PPM")
    w, h = map(int, parts[1].split())
    return np.frombuffer(parts[3], dtype=np.uint8).reshape(h, w, 3)


# ---------------------------------------------------------------- runs

def _uses_polar(cfg, rp):
    return rp.frame == BIG_OMEGA_FRAME and rp.omega0 >= float(cfg["polar_from_omega0"])


def initial_state(cfg, rp):
    init = cfg["init"]
    if init == "auto":
        init = "giant" if _uses_polar(cfg, rp) else "lattice"
    if init == "giant":
        return gp2d.seeded_giant_vortex(rp, int(cfg["ring"]), ntheta=cfg["ntheta"])
    n = int(cfg["n"])
    hw = cfg["half_width"]
    if init == "lattice":
        hole = cfg["hole_winding"]
        if hole is None and rp.frame == BIG_OMEGA_FRAME:
            tf = analytic.tf_profile(rp)
            hole = int(round(rp.speed * tf.x_in**2))
        return gp2d.trial_vortex_lattice(rp, n=n, half_width=hw, hole_winding=int(hole or 0))
    if init == "g0":
        g0 = radial.g0_profile(rp)
        fld = gp2d.make_grid(rp, n, hw)
        fld.values = g0(fld.radius()).astype(complex)
        return fld.normalized()
    if init == "random":
        rng = np.random.default_rng(int(cfg["seed"]))
        fld = gp2d.make_grid(rp, n, hw)
        g0 = radial.g0_profile(rp)(fld.radius())
        fld.values = g0 * (1 + 0.1 * rng.standard_normal(fld.values.shape)) * np.exp(
            2j * np.pi * rng.random(fld.values.shape) * 0.05)
        return fld.normalized()
    raise DomainError(f"unknown init {init!r}")


def gp_config(cfg, rp):
    return gp2d.GPConfig(rp, max_iters=int(cfg["max_iters"]), tol_energy=float(cfg["tol_energy"]),
                         tol_residual=float(cfg["tol_residual"]), truncation_radius=cfg["half_width"])


def run_gp2d(cfg, rp, callback=None):
    psi0 = initial_state(cfg, rp)
    return gp2d.minimize(psi0, gp_config(cfg, rp), callback=callback)


def _report_regions(rp, psi):
    regs = []
    if isinstance(psi, gp2d.PolarField):
        try:
            regs.append(("A_bulk", vortex.build_region("A_bulk", rp), 0.0, 2 * np.pi))
        except DomainError:
            pass
        return regs
    try:
        rb = vortex.build_region("R_bulk", rp)
        regs.append(("R_bulk", rb, 0.0, 2 * np.pi))
        regs.append(("R_bulk_q1", rb, 0.0, np.pi / 2))
        regs.append(("R_bulk_q3", rb, np.pi, 1.5 * np.pi))
    except DomainError:
        pass
    return regs


def _bulk_radius(rp, regs):
    if rp.frame == BIG_OMEGA_FRAME:
        return 1.0
    for name, reg, _, _ in regs:
        return 0.5 * (reg.x_lo + reg.x_hi)
    return None


def analyse(psi, rp, threshold=vortex.DEFAULT_HOLE_THRESHOLD):
    regs = _report_regions(rp, psi)
    R = _bulk_radius(rp, regs)
    circles = () if R is None else (R,)
    return vortex.vortex_report(psi, speed=rp.speed, regions=regs, circles=circles, threshold=threshold)


def run_point(job):
    """One sweep point; never raises, failures are recorded in the row."""
    cfg, tasks = job
    row = {k: None for k in CSV_COLUMNS}
    row["axis"], row["value"] = cfg.get("_axis"), cfg.get("_value")
    try:
        rp = params_from_config(cfg)
        row.update(params_row(rp))
        if "tf" in tasks:
            row["E_TF"] = analytic.tf_energy(analytic.tf_profile(rp))
        if "radial" in tasks:
            row["E_hat"] = radial.g0_profile(rp).energy
            if rp.frame == BIG_OMEGA_FRAME and rp.speed >= 1:
                row["E_GV"] = radial.gv_profile(rp).energy
        if "gp2d" in tasks or "vortex-report" in tasks:
            res = run_gp2d(cfg, rp)
            row["E_GP"], row["mu"] = res.energy, res.mu
            row["converged"] = res.converged
            if "vortex-report" in tasks:
                rep = analyse(res.psi, rp, float(cfg["threshold"]))
                row["hole_radius"] = rep.hole_radius
                if "A_bulk" in rep.regions:
                    row["vortex_count"] = int(round(rep.regions["A_bulk"]["nu"] / (2 * np.pi)))
                else:
                    row["vortex_count"] = rep.count
                deg = list(rep.degrees.values())
                row["bulk_degree"] = deg[0] if deg else None
                if "R_bulk" in rep.regions:
                    r = rep.regions["R_bulk"]
                    big = rp.speed if rp.frame == BIG_OMEGA_FRAME else None
                    if big:
                        row["uniformity_ratio"] = r["nu"] / (big * r["area"])
        row["status"] = "ok"
    except (DomainError, SolverError, ValueError, ArithmeticError) as exc:
        row["status"] = "error"
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


CSV_COLUMNS = ["axis", "value", "eps", "s", "gamma", "frame", "speed", "omega0", "E_TF", "E_hat", "E_GV",
               "E_GP", "mu", "converged", "vortex_count", "hole_radius", "bulk_degree", "uniformity_ratio",
               "status", "error"]


# ---------------------------------------------------------------- sweeps

@dataclass(frozen=True)
class SweepSpec:
    axis: str
    values: tuple
    tasks: tuple
    output: str = "sweep_out"
    base: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.axis not in AXES:
            raise DomainError(f"axis must be one of {AXES}")
        if not self.tasks:
            raise DomainError("task list is empty")
        bad = [t for t in self.tasks if t not in TASKS]
        if bad:
            raise DomainError(f"unknown tasks {bad}")
        v = np.asarray(self.values, dtype=float)
        if v.size == 0:
            raise DomainError("no sweep values")
        d = np.diff(v)
        if not (np.all(d > 0) or np.all(d < 0)):
            raise DomainError("sweep values must be strictly monotone")

    @classmethod
    def from_config(cls, cfg):
        if cfg.get("values") is not None:
            vals = cfg["values"]
            vals = tuple(float(v) for v in (vals if isinstance(vals, list) else [vals]))
        else:
            start, stop, num = float(cfg["start"]), float(cfg["stop"]), int(cfg["num"])
            space = np.geomspace if cfg.get("spacing", "linear") == "log" else np.linspace
            vals = tuple(float(v) for v in space(start, stop, num))
        tasks = cfg.get("tasks") or ()
        tasks = tuple(tasks if isinstance(tasks, list) else [tasks])
        return cls(str(cfg["axis"]), vals, tasks, str(cfg.get("output") or "sweep_out"), dict(cfg))

    def point_config(self, value):
        cfg = dict(self.base)
        cfg["_axis"], cfg["_value"] = self.axis, value
        if self.axis == "Omega0":
            cfg["omega0"] = value
        elif self.axis == "eps":
            cfg["eps"] = value
        else:
            cfg["omega0"] = None
            cfg["frame"] = OMEGA_FRAME if self.axis == "omega" else BIG_OMEGA_FRAME
            cfg["speed"] = value
        return cfg


def worker_count(n_jobs):
    cap = os.environ.get("GPVORTEX_THREADS")
    n = int(cap) if cap else (os.cpu_count() or 1)
    return max(1, min(n, n_jobs))


def transitions(rows, axis):
    ok = [r for r in rows if r["status"] == "ok"]
    out = {"first_vortex": None, "first_hole": None, "first_vortex_free_bulk": None}
    for r in ok:
        if out["first_vortex"] is None and (r["vortex_count"] or 0) >= 1:
            out["first_vortex"] = r["value"]
        if out["first_hole"] is None and (r["hole_radius"] or 0) > 0:
            out["first_hole"] = r["value"]
    counts = [(r["value"], r["vortex_count"]) for r in ok if r["vortex_count"] is not None]
    for i, (v, _) in enumerate(counts):
        if all(c == 0 for _, c in counts[i:]):
            out["first_vortex_free_bulk"] = v
            break
    out["axis"] = axis
    return out


def run_sweep(spec: SweepSpec, workers=None):
    """Run every point (worker pool, input order kept); write points.csv and summary.json."""
    jobs = [(spec.point_config(v), spec.tasks) for v in spec.values]
    nw = worker_count(len(jobs)) if workers is None else workers
    if nw == 1:
        rows = [run_point(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=nw) as pool:
            rows = list(pool.map(run_point, jobs))
    out = Path(spec.output)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "points.csv", CSV_COLUMNS, rows)
    summary = {"axis": spec.axis, "values": list(spec.values), "tasks": list(spec.tasks),
               "transitions": transitions(rows, spec.axis),
               "failures": [{"value": r["value"], "error": r["error"]} for r in rows if r["status"] != "ok"]}
    with open(out / "summary.json", "w") as fh:
        dump_json(summary, fh)
    return rows, summary


# ---------------------------------------------------------------- commands

def cmd_tf(args, cfg, out):
    rp = params_from_config(cfg)
    tf = analytic.tf_profile(rp)
    res = dict(params_row(rp), x_in=tf.x_in, x_out=tf.x_out, mu_tf=tf.mu_tf, energy=analytic.tf_energy(tf))
    if rp.frame == BIG_OMEGA_FRAME:
        res["Omega_c"] = analytic.Omega_c(rp.eps, rp.s, rp.gamma)
    else:
        res["omega_c"] = analytic.omega_c(rp.eps, rp.s, rp.gamma)
    if args.csv:
        x = np.linspace(0, tf.x_out * 1.1, int(cfg["n"]))
        write_csv(args.csv, ["x", "density"], [{"x": a, "density": b} for a, b in zip(x, tf.density(x))])
    dump_json(res, out)
    return 0


def cmd_radial(args, cfg, out):
    rp = params_from_config(cfg)
    kind = str(cfg["kind"])
    if kind == "g0":
        prof = radial.g0_profile(rp)
    elif kind in ("gv", "gv-annulus"):
        prof = radial.gv_profile(rp, annulus=kind == "gv-annulus")
    elif kind == "sym":
        prof = radial.sym_profile(rp)
    elif kind == "symmetric-vortex":
        prof = radial.symmetric_vortex_profile(int(cfg["winding"]), rp)
    else:
        raise DomainError(f"unknown radial kind {kind!r}")
    if args.csv:
        write_csv(args.csv, ["x", "f", "weight"], prof.to_csv_rows())
    dump_json(dict(params_row(rp), kind=kind, energy=prof.energy, mu=prof.mu, residual=prof.residual,
                   max_position=prof.max_position, nodes=prof.grid.size), out)
    return 0


def cmd_gp2d(args, cfg, out):
    rp = params_from_config(cfg)
    trace = []
    res = run_gp2d(cfg, rp, callback=lambda i, E, r: trace.append((i, E, r)))
    psi = res.psi
    if args.out:
        if isinstance(psi, gp2d.PolarField):
            psi = psi.to_cartesian(int(cfg["n"]), float(psi.grid.edges[-1]))
        write_field(args.out, psi, rp)
    if args.trace:
        write_csv(args.trace, ["iteration", "energy", "residual"],
                  [{"iteration": i, "energy": E, "residual": r} for i, E, r in trace])
    dump_json(dict(params_row(rp), energy=res.energy, mu=res.mu, residual=res.residual,
                   iterations=res.iterations, converged=res.converged,
                   chemical_identity_gap=res.chemical_identity_gap), out)
    return 0 if res.converged else 3


def cmd_vortex(args, cfg, out):
    psi, rp = read_field(args.field)
    rep = analyse(psi, rp, float(cfg["threshold"]))
    text = rep.to_json(indent=2)
    if args.json:
        Path(args.json).write_text(text + "\n")
    out.write(text + "\n")
    return 0


def cmd_sweep(args, cfg, out):
    if args.output:
        cfg["output"] = args.output
    spec = SweepSpec.from_config(cfg)
    rows, summary = run_sweep(spec, workers=args.workers)
    dump_json(summary, out)
    return 0


def cmd_render(args, cfg, out):
    psi, _ = read_field(args.field)
    render_heatmap(psi, args.quantity, args.out)
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="gpvortex", description="Rotating-condensate GP toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="flat key = value file")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
        return sp

    sp = common(sub.add_parser("tf", help="Thomas-Fermi profile"))
    sp.add_argument("--csv")
    sp.set_defaults(func=cmd_tf)
    sp = common(sub.add_parser("radial", help="radial minimization"))
    sp.add_argument("--csv")
    sp.set_defaults(func=cmd_radial)
    sp = common(sub.add_parser("gp2d", help="2D GP minimization"))
    sp.add_argument("--out", help="field dump path")
    sp.add_argument("--trace", help="energy trace CSV")
    sp.set_defaults(func=cmd_gp2d)
    sp = common(sub.add_parser("vortex", help="vortex report of a field dump"))
    sp.add_argument("field")
    sp.add_argument("--json")
    sp.set_defaults(func=cmd_vortex)
    sp = common(sub.add_parser("sweep", help="parameter sweep"))
    sp.add_argument("--output")
    sp.add_argument("--workers", type=int)
    sp.set_defaults(func=cmd_sweep)
    sp = common(sub.add_parser("render", help="PPM heat map of a field dump"))
    sp.add_argument("field")
    sp.add_argument("--quantity", choices=("density", "phase"), default="density")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_render)
    return p


def main(argv=None, out=None):
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.set)
        return args.func(args, cfg, out)
    except (DomainError, SolverError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
