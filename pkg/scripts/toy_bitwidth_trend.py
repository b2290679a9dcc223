#!/usr/bin/env python3
"""Toy-model fidelity versus activation precision, per method.

Runs the bundled corpus through the planted-outlier toy model and prints a
small table of mean KL and top-1 agreement against the FP forward for each
(method, act_bits) cell.
"""

import argparse

from muxq import (
    Method,
    MethodConfig,
    QuantTargetSet,
    ToyConfig,
    build_toy,
    corpus_logits,
    load_corpus,
    mean_kl,
    top1_agreement,
)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--channels", type=lambda s: [int(t) for t in s.split(",")], default=[3, 17])
    ap.add_argument("--gain", type=float, default=20.0)
    ap.add_argument("--act-bits", type=lambda s: [int(t) for t in s.split(",")],
                    default=[8, 7, 6, 5])
    ap.add_argument("--targets", type=lambda s: s.split(","),
                    default=list(QuantTargetSet().names))
    args = ap.parse_args()

    model = build_toy(
        ToyConfig(seed=args.seed, outlier_channels=tuple(args.channels), outlier_gain=args.gain)
    )
    tokens = load_corpus()
    targets = QuantTargetSet.from_names(args.targets)
    ref = corpus_logits(model, tokens, MethodConfig(method=Method.FP), targets)

    print(f"{'method':8s} {'act_bits':>8s} {'mean_kl':>12s} {'top1':>8s}")
    for method in (Method.NAIVE, Method.MUXQ, Method.MIXED):
        for bits in args.act_bits:
            cfg = MethodConfig(method=method, act_bits=bits, w_bits=8)
            out = corpus_logits(model, tokens, cfg, targets)
            print(
                f"{method.value:8s} {bits:8d} {mean_kl(ref, out):12.6f} "
                f"{top1_agreement(ref, out):8.4f}"
            )


if __name__ == "__main__":
    main()
