"""Time the compiled kernels against the pure-Python fallback.

Usage: python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import timeit

import numpy as np

from slitlab import kernels
from slitlab.fem import build_template, instantiate
from slitlab.geometry import DomainSpec, Rectangle, SlitSpec


def workloads():
    spec = DomainSpec(Rectangle(1, 1), [SlitSpec((0.5, 0.5), 0, 0.2, "d")], chart_radius_r0=0.25)
    inst = instantiate(build_template(spec, 64), 0.1)
    coords, tris = inst.coords, inst.template.triangles
    rng = np.random.default_rng(0)
    pts = rng.uniform(0.05, 0.95, size=(20000, 2))
    cand = rng.integers(0, len(tris), size=(len(pts), 8))
    return {
        "radial_rk4 (20k steps)": lambda k: k.radial_rk4(12.0, 0.3, 0.0, 1.0, 4.0, 20000),
        "radial_shoot (20k steps)": lambda k: k.radial_shoot(12.0, 0.3, 0.0, 1.0, 4.0, 20000),
        f"p1_local ({len(tris)} triangles)": lambda k: k.p1_local(coords, tris),
        f"locate ({len(pts)} points x 8)": lambda k: k.locate(pts, coords, tris, cand),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = kernels.available_backends()
    names = sorted(backends)
    print(f"{'kernel':32s}" + "".join(f"{n:>14s}" for n in names) + ("   speedup" if len(names) == 2 else ""))
    for label, fn in workloads().items():
        times = {n: min(timeit.repeat(lambda: fn(backends[n]), number=1, repeat=args.repeat)) for n in names}
        row = f"{label:32s}" + "".join(f"{times[n] * 1e3:12.2f}ms" for n in names)
        if len(names) == 2:
            row += f"{times['python'] / times['compiled']:9.1f}x"
        print(row)
    if "compiled" not in backends:
        print("compiled extension not built; only the Python fallback was timed")


if __name__ == "__main__":
    main()
