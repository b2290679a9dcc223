#!/usr/bin/env python3
"""Reproduce the synthetic accuracy-ordering experiment.

Sweeps the three quantized methods over activation bit widths on planted-
outlier activations and prints one JSON line per cell, then a summary of
how often each outlier-handling method beat naive quantization.
"""

import argparse
import json

from muxq import (
    DenseMatrix,
    Granularity,
    Layout,
    Method,
    MethodConfig,
    SyntheticSpec,
    compare_to_fp,
    generate_synthetic,
)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--rows", type=int, default=512)
    ap.add_argument("--cols", type=int, default=768)
    ap.add_argument("--out-features", type=int, default=256)
    ap.add_argument("--channels", type=lambda s: [int(t) for t in s.split(",")],
                    default=[5, 100, 250, 400, 600, 700])
    ap.add_argument("--gain", type=float, default=30.0)
    ap.add_argument("--seeds", type=int, default=20)
    ap.add_argument("--act-bits", type=lambda s: [int(t) for t in s.split(",")],
                    default=[8, 7, 6, 5])
    ap.add_argument("--gran", choices=["tensor", "vector"], default="tensor")
    args = ap.parse_args()

    act_g, w_g = (
        (Granularity.PER_TENSOR, Granularity.PER_TENSOR)
        if args.gran == "tensor"
        else (Granularity.PER_TOKEN, Granularity.PER_CHANNEL)
    )
    wins = {m: {b: 0 for b in args.act_bits} for m in (Method.MUXQ, Method.MIXED)}
    for seed in range(args.seeds):
        x = generate_synthetic(
            SyntheticSpec(rows=args.rows, cols=args.cols, outlier_channels=args.channels,
                          outlier_gain=args.gain, seed=seed)
        )
        w = DenseMatrix(
            generate_synthetic(
                SyntheticSpec(rows=args.cols, cols=args.out_features, seed=10_000 + seed)
            ).data,
            Layout.WEIGHT,
        )
        for bits in args.act_bits:
            errs = {}
            for method in (Method.NAIVE, Method.MUXQ, Method.MIXED):
                cfg = MethodConfig(method=method, act_bits=bits, w_bits=8,
                                   act_granularity=act_g, w_granularity=w_g)
                _, stats = compare_to_fp(x, w, cfg)
                errs[method] = stats.rel_frobenius
                print(json.dumps({
                    "seed": seed, "act_bits": bits, "method": method.value,
                    "gran": args.gran, "rel_frobenius": stats.rel_frobenius,
                }))
            for method in (Method.MUXQ, Method.MIXED):
                wins[method][bits] += errs[method] < errs[Method.NAIVE]

    print("\nwins vs naive (lower rel_frobenius), out of", args.seeds, "seeds:")
    for method, per_bits in wins.items():
        row = "  ".join(f"b{b}:{n}" for b, n in sorted(per_bits.items(), reverse=True))
        print(f"  {method.value:6s} {row}")


if __name__ == "__main__":
    main()
