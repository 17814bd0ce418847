"""Benchmark the numba kernels against their pure-numpy fallbacks.

Run from the repo root:

    python3 benchmarks/bench_kernels.py [--length 196] [--dim 768] [--repeats 50]

Sizes default to the ViT-B/16 geometry (196 patches of dimension 768).
If numba is unavailable (or PATCHMASK_NO_NUMBA=1) only the numpy column
is reported.
"""

import argparse
import time

import numpy as np

from patchmask import _kernels


def time_call(fn, *args, repeats):
    fn(*args)  # warm up (and trigger JIT compilation)
    start = time.perf_counter()
    for _ in range(repeats):
        fn(*args)
    return (time.perf_counter() - start) / repeats


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--length", type=int, default=196, help="patches per image")
    parser.add_argument("--dim", type=int, default=768, help="patch vector dimension")
    parser.add_argument("--repeats", type=int, default=50)
    parser.add_argument("--kmeans-k", type=int, default=12)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    vectors = np.ascontiguousarray(rng.standard_normal((args.length, args.dim)))
    sim = _kernels.pairwise_cosine_numpy(vectors)
    anchors = rng.choice(args.length, size=max(1, round(0.03 * args.length)), replace=False)
    centroids = np.ascontiguousarray(vectors[rng.choice(args.length, args.kmeans_k, replace=False)])
    labels, _ = _kernels.nearest_centroids_numpy(vectors, centroids)

    cases = [
        ("pairwise_cosine", (vectors,),
         _kernels.pairwise_cosine_numpy, _kernels.pairwise_cosine_numba),
        ("masked_by_anchors", (sim, anchors.astype(np.int64), 0.4),
         _kernels.masked_by_anchors_numpy, _kernels.masked_by_anchors_numba),
        ("nearest_centroids", (vectors, centroids),
         _kernels.nearest_centroids_numpy, _kernels.nearest_centroids_numba),
        ("centroid_sums", (vectors, labels, args.kmeans_k),
         _kernels.centroid_sums_numpy, _kernels.centroid_sums_numba),
    ]

    print(f"L={args.length} dim={args.dim} repeats={args.repeats} "
          f"(active impl: {_kernels.ACTIVE_IMPL})")
    header = f"{'kernel':<20} {'numpy':>12} {'numba':>12} {'speedup':>9}"
    print(header)
    print("-" * len(header))
    for name, call_args, numpy_fn, numba_fn in cases:
        numpy_time = time_call(numpy_fn, *call_args, repeats=args.repeats)
        if numba_fn is None:
            print(f"{name:<20} {numpy_time * 1e6:>10.1f}us {'n/a':>12} {'n/a':>9}")
            continue
        numba_time = time_call(numba_fn, *call_args, repeats=args.repeats)
        print(
            f"{name:<20} {numpy_time * 1e6:>10.1f}us {numba_time * 1e6:>10.1f}us "
            f"{numpy_time / numba_time:>8.2f}x"
        )


if __name__ == "__main__":
    main()
