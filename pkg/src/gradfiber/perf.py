"""Compiled versus fallback timing of the hot kernels.

Each backend runs in its own interpreter because the numba switch is read
once at import time.  ``python -m gradfiber.perf`` times the backend of the
current environment and prints JSON; :func:`compare` drives both.
"""
import json
import os
import subprocess
import sys
import time
from dataclasses import dataclass

import numpy as np


def _best(func, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        func()
        best = min(best, time.perf_counter() - t0)
    return best


def measure(n_points=64, repeat=3, seed=0):
    """Time the point kernel and one mechanical assembly in this process."""
    from . import _jit
    from .material import Material, evaluate_points
    from .scenarios import tension
    from .solver import Simulation
    from .solver.assembly import mechanical_element_arrays

    rng = np.random.default_rng(seed)
    mat = Material()
    mu, alpha, mp, pp, fp, L, M = mat.packed()
    F = np.eye(3) + rng.uniform(-0.05, 0.05, (n_points, 3, 3))
    G = rng.uniform(-0.01, 0.01, (n_points, 3, 3, 3))
    Fp = np.tile(np.eye(3), (n_points, 1, 1))
    rp = np.full(n_points, 0.53 * 60.0)
    th = np.full(n_points, 293.0)
    z, one = np.zeros(n_points), np.ones(n_points)

    def point_kernel():
        return evaluate_points(F, G, Fp, rp, th, one, one, one, z, z, z, 0.2,
                               mu, alpha, mp, pp, fp, L, M, True)

    out = point_kernel()  # compile / warm up
    checksum = float(np.sum(out[0]) + np.sum(out[2]))
    t_kernel = _best(point_kernel, repeat)

    sc = tension(mesh=(8, 2, 1))
    sim = Simulation(sc.patch, sc.material, sc.layout, sc.options)
    nq = sim.nqp
    P = rng.normal(size=(sim.ne, sim.nq, 3, 3))
    gfib = rng.normal(size=(sim.ne, sim.nq, 12))
    D = rng.normal(size=(sim.ne, sim.nq, 9, 9))
    Hf = rng.normal(size=(sim.ne, sim.nq, 12, 12))
    wdet = sim.quad.wdet

    def assembly():
        return mechanical_element_arrays(sim.quad.dR, sim.cfib, wdet, P, gfib, D, Hf, True)

    fe, Ke = assembly()
    checksum += float(np.sum(fe) + np.sum(Ke))
    t_assembly = _best(assembly, repeat)
    return {"numba": _jit.ENABLED, "n_points": n_points, "n_qp_assembly": int(nq),
            "kernel_s": t_kernel, "assembly_s": t_assembly, "checksum": checksum}


@dataclass
class Comparison:
    compiled: dict
    fallback: dict

    @property
    def kernel_speedup(self):
        return self.fallback["kernel_s"] / self.compiled["kernel_s"]

    @property
    def assembly_speedup(self):
        return self.fallback["assembly_s"] / self.compiled["assembly_s"]

    @property
    def agree(self):
        a, b = self.compiled["checksum"], self.fallback["checksum"]
        return abs(a - b) <= 1e-6 * max(1.0, abs(a))

    def report(self):
        c, f = self.compiled, self.fallback
        return "\n".join([
            f"{'':24s}{'numba':>12s}{'fallback':>12s}{'speedup':>10s}",
            f"{'point kernel (%d qp)' % c['n_points']:24s}{c['kernel_s']:12.4g}{f['kernel_s']:12.4g}"
            f"{self.kernel_speedup:10.1f}",
            f"{'assembly (%d qp)' % c['n_qp_assembly']:24s}{c['assembly_s']:12.4g}{f['assembly_s']:12.4g}"
            f"{self.assembly_speedup:10.1f}",
            f"results agree: {self.agree}",
        ])


def _run_backend(enabled, n_points, repeat, seed, threads):
    env = dict(os.environ, GRADFIBER_NUMBA="1" if enabled else "0")
    if threads:
        env["NUMBA_NUM_THREADS"] = str(threads)
    cmd = [sys.executable, "-m", "gradfiber.perf", "--points", str(n_points),
           "--repeat", str(repeat), "--seed", str(seed)]
    out = subprocess.run(cmd, env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def compare(n_points=64, repeat=3, seed=0, threads=0):
    """Time both backends in fresh interpreters."""
    return Comparison(_run_backend(True, n_points, repeat, seed, threads),
                      _run_backend(False, n_points, repeat, seed, threads))


def main(argv=None):
    import argparse

    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--points", type=int, default=64)
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)
    print(json.dumps(measure(args.points, args.repeat, args.seed)))


if __name__ == "__main__":
    main()
