"""Compare the compiled and numpy phi-term kernels.

Usage: python3 benchmarks/bench_kernels.py [--points N] [--nodes K] [--repeat R]

Two workloads are timed: the 6-term/4-density layout of the two-mode ARMA
schemes and the 14-term/6-density layout of the rate-splitting schemes,
each with every point owning its own filter shapes (the worst case for
shape sharing). Also times a full scheme evaluation through the public API.
"""
from __future__ import annotations

import argparse
import statistics
import time

import numpy as np

from gicreg import kernels
from gicreg.model import ChannelParams
from gicreg.quadrature import half_grid
from gicreg.schemes import _hk_terms, _two_mode_terms, evaluate_points, get_scheme
from gicreg.spectra import unit_shape_table


def _case(num, den, n_pts, n_nodes, rng):
    s = num.shape[1]
    nodes, wt = half_grid(n_nodes)
    u = n_pts * s
    ar = rng.uniform(-0.9, 0.9, size=(u, 1))
    ma = rng.uniform(-0.9, 0.9, size=(u, 1))
    shapes = np.ascontiguousarray(unit_shape_table(ar, ma, nodes))
    gains = rng.uniform(0.0, 10.0, size=(n_pts, s))
    idx = np.arange(u, dtype=np.int64).reshape(n_pts, s)
    return gains, idx, shapes, np.ascontiguousarray(wt), num, den


def _time(fn, args, repeat):
    out, ts = None, []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        ts.append(time.perf_counter() - t0)
    return statistics.median(ts), out


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=2000)
    ap.add_argument("--nodes", type=int, default=1024)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    a = ap.parse_args()
    rng = np.random.default_rng(a.seed)
    have = kernels.available_backends()
    print(f"backends: {', '.join(have)} (selected: {kernels.BACKEND})")
    if "compiled" not in have:
        print("compiled extension not built; only the numpy kernel can be timed")

    ch = ChannelParams(6.0, 1.0, 3.0, 0.1)
    layouts = {"two-mode (6x4)": _two_mode_terms(ch), "rate-splitting (14x6)": _hk_terms(ch)}
    print(f"\n{'layout':<24}{'backend':<10}{'seconds':>10}{'Mterm-nodes/s':>15}{'speedup':>9}{'max |diff|':>12}")
    for label, (num, den) in layouts.items():
        case = _case(np.ascontiguousarray(num), np.ascontiguousarray(den), a.points, a.nodes, rng)
        work = a.points * num.shape[0] * case[2].shape[1] / 1e6
        res = {}
        for name in have:
            res[name] = _time(kernels.get_backend(name), case, a.repeat)
        base = res["python"][0]
        for name in have:
            t, out = res[name]
            diff = float(np.abs(out - res["python"][1]).max())
            print(f"{label:<24}{name:<10}{t:>10.4f}{work / t:>15.1f}{base / t:>9.2f}{diff:>12.2e}")

    print("\nend-to-end scheme evaluation (random parameter rows)")
    for scheme, n in (("arma", 5000), ("hk-corollary", 5000)):
        sd = get_scheme(scheme)
        lo = np.where(sd.open_, -0.95, sd.lower)
        hi = np.where(sd.open_, 0.95, sd.upper)
        P = lo + rng.random((n, sd.dim)) * (hi - lo)
        times = {}
        for name in have:
            times[name], _ = _time(lambda P=P, name=name: evaluate_points(ch, scheme, P, backend=name), (), a.repeat)
        line = ", ".join(f"{k} {v:.3f} s" for k, v in times.items())
        print(f"  {scheme:<14}{n} rows: {line}")


if __name__ == "__main__":
    main()
