"""Time each hot kernel under the compiled extension and the numpy fallback.

    python3 benchmarks/bench_kernels.py [--reps N]

Prints one CSV row per (kernel, backend) and the speed-up of the compiled
version.  The two backends are also checked for agreement on every input.
"""
import argparse
import statistics
import time

import numpy as np

from deeploop import _fallback

try:
    from deeploop import _kernels
except ImportError:
    _kernels = None


def cases(rng):
    img = rng.integers(0, 256, size=(120, 160), dtype=np.uint8)
    big = rng.integers(0, 256, size=(480, 640), dtype=np.uint8)
    hinv = np.array([[0.8, 0.02, 15.0], [-0.01, 0.78, 12.0], [1e-4, -2e-4, 1.0]])
    x1 = rng.random((1, 120, 160)).astype(np.float32)
    x2 = rng.random((16, 30, 40)).astype(np.float32)
    pool_in = rng.random((8, 16, 60, 80)).astype(np.float32)
    out, arg = _fallback.maxpool2x2(pool_in)
    cols = rng.random((16 * 25, 30 * 40)).astype(np.float32)
    return {
        "hog_votes": lambda m: m.hog_votes(img / 255.0, 9),
        "warp_bilinear": lambda m: m.warp_bilinear(img, hinv),
        "resize_bilinear": lambda m: m.resize_bilinear(big, 120, 160),
        "im2col conv1": lambda m: m.im2col(x1, 5, 2, 2),
        "im2col conv2": lambda m: m.im2col(x2, 5, 1, 2),
        "col2im conv2": lambda m: m.col2im(cols, (16, 30, 40), 5, 1, 2),
        "maxpool2x2": lambda m: m.maxpool2x2(pool_in),
        "maxpool2x2_backward": lambda m: m.maxpool2x2_backward(out, arg, 60, 80),
    }


def timed(fn, reps):
    fn()
    t = []
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        t.append((time.perf_counter() - t0) * 1e3)
    return statistics.fmean(t), statistics.stdev(t)


def agree(a, b):
    a = a if isinstance(a, tuple) else (a,)
    b = b if isinstance(b, tuple) else (b,)
    return all(np.allclose(x, y, rtol=1e-5, atol=1e-6) for x, y in zip(a, b))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--reps", type=int, default=30)
    args = ap.parse_args()
    backends = {"numpy": _fallback}
    if _kernels is not None:
        backends["cython"] = _kernels
    else:
        print("# compiled extension not available; timing the numpy fallback only")
    print("kernel,backend,mean_ms,std_ms,speedup")
    for name, call in cases(np.random.default_rng(0)).items():
        base = None
        if _kernels is not None and not agree(call(_fallback), call(_kernels)):
            print(f"# WARNING: backends disagree on {name}")
        for bname, mod in backends.items():
            mean, std = timed(lambda: call(mod), args.reps)
            base = base or mean
            print(f"{name},{bname},{mean:.4f},{std:.4f},{base / mean:.2f}")


if __name__ == "__main__":
    main()
