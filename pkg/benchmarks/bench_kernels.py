"""Compiled vs pure-Python bitmask kernels.

    python benchmarks/bench_kernels.py [--repeat 3]

Both backends are checked for identical results before timings are printed.
"""
import argparse
import time

from flowlab import _kernels_py
from flowlab.lattice import QuasiRect
from flowlab.oracle import Canvas, Window, _rearrangement_extent
from flowlab.steiner import rhombus_centre

try:
    from flowlab import _kernels
except ImportError:
    _kernels = None


def audit_args(window, qr):
    old = qr.cells()
    canvas = Canvas.covering(window.cells(), old, _rearrangement_extent(window),
                             [(0, 0), rhombus_centre(qr)])
    cc, cr = rhombus_centre(qr)
    return ([canvas.bit(c) for c in window.cells()], canvas.w, canvas.h, canvas.i0,
            canvas.j0, qr.m % 2 == 0, canvas.mask(old), canvas.weights(old),
            cc - canvas.i0, cr - canvas.j0, -canvas.i0, -canvas.j0)


def min_args(window, qr, p=1, q=1):
    old = qr.cells()
    canvas = Canvas.covering(window.cells(), old)
    return ([canvas.bit(c) for c in window.cells()], qr.size, canvas.mask(old),
            canvas.weights(old), canvas.w, p, q)


def best_of(fn, args, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    cases = [
        ("audit 3x3, qr (2,2,0)", "audit", audit_args(Window(-1, -1, 3, 3), QuasiRect(1, 2, 2))),
        ("audit 4x4, qr (3,2,1)", "audit", audit_args(Window(-1, -1, 4, 4), QuasiRect(1, 3, 2, 1))),
        ("min 5x5, 5 cells", "min_energy", min_args(Window.centred(5), QuasiRect(1, 3, 1, 2))),
    ]
    print(f"{'case':28s} {'python s':>10s} {'cython s':>10s} {'speedup':>8s}")
    for label, name, fargs in cases:
        tp, outp = best_of(getattr(_kernels_py, name), fargs, 1)
        if _kernels is None:
            print(f"{label:28s} {tp:10.4f} {'n/a':>10s} {'n/a':>8s}")
            continue
        tc, outc = best_of(getattr(_kernels, name), fargs, args.repeat)
        if tuple(outp) != tuple(outc):
            raise SystemExit(f"backends disagree on {label}")
        print(f"{label:28s} {tp:10.4f} {tc:10.4f} {tp / tc:8.0f}x")


if __name__ == "__main__":
    main()
