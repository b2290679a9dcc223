"""Harness CLI: dump / eval / crosscheck.

``dump`` writes MUXT activation captures; ``eval`` reports fake-quantized
perplexity as JSON; ``crosscheck`` verifies parity with the primary CLI.
JSON goes to stdout, diagnostics to stderr; nonzero exit on failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from .methodcfg import TARGETS, HarnessConfig


def _bits(text):
    return math.inf if text == "inf" else int(text)


def _csv(text):
    return [t for t in text.split(",") if t]


def _load_model_and_tokens(args):
    from .models import load_model, random_model, synthetic_tokens, tokens_from_text

    if args.model:
        model = load_model(args.model)
    else:
        model = random_model(seed=args.random_seed)
    vocab = model.config.vocab_size
    if args.dataset_path:
        source = args.model if args.model else "gpt2"
        tokens = tokens_from_text(source, args.dataset_path, max_tokens=args.max_tokens)
    else:
        tokens = synthetic_tokens(args.synthetic_tokens, vocab, seed=args.random_seed)
    return model, tokens


def cmd_dump(args) -> int:
    from .dump import dump_activations

    model, tokens = _load_model_and_tokens(args)
    layers = None if args.layers == "all" else [int(t) for t in _csv(args.layers)]
    paths = dump_activations(
        model, tokens, args.out_dir, targets=_csv(args.targets), layers=layers, seq_len=args.seq_len
    )
    print(json.dumps({"written": paths}))
    return 0


def cmd_eval(args) -> int:
    from .perplexity import eval_perplexity

    cfg = HarnessConfig(
        method=args.method,
        act_bits=args.act_bits,
        w_bits=args.w_bits,
        act_granularity=args.act_gran,
        w_granularity=args.w_gran,
        theta=args.theta,
        exp_factor=args.exp_factor,
        targets=tuple(_csv(args.targets)),
    )
    model, tokens = _load_model_and_tokens(args)
    report = eval_perplexity(model, tokens, cfg, window=args.window, stride=args.stride)
    report["config"]["model"] = args.model or f"random(seed={args.random_seed})"
    report["config"]["dataset"] = args.dataset_path or f"synthetic({args.synthetic_tokens})"
    print(json.dumps(report))
    return 0


def cmd_crosscheck(args) -> int:
    from .crosscheck import cross_check

    ok, report = cross_check(
        primary_cli=args.primary, samples=args.samples, seed=args.seed
    )
    print(json.dumps({"pass": ok, "samples": report}))
    if not ok:
        for entry in report:
            if not entry["pass"]:
                print(
                    f"MISMATCH sample {entry['sample']} {entry['config']['method']}: "
                    f"primary={entry['primary']} harness={entry['harness']}",
                    file=sys.stderr,
                )
    return 0 if ok else 1


def _add_model_flags(p):
    p.add_argument("--model", default=None, help="HF name or local checkpoint dir")
    p.add_argument("--random-seed", type=int, default=0, help="offline random-weights fallback")
    p.add_argument("--dataset-path", default=None, help="plain-text file to tokenize")
    p.add_argument("--synthetic-tokens", type=int, default=2048)
    p.add_argument("--max-tokens", type=int, default=None)


def build_parser():
    parser = argparse.ArgumentParser(prog="hfharness")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dump", help="write per-(layer,target) MUXT activation captures")
    _add_model_flags(p)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--targets", default=",".join(TARGETS))
    p.add_argument("--layers", default="all")
    p.add_argument("--seq-len", type=int, default=512)
    p.set_defaults(func=cmd_dump)

    p = sub.add_parser("eval", help="fake-quantized perplexity")
    _add_model_flags(p)
    p.add_argument("--method", choices=["fp", "naive", "muxq", "mixed"], default="naive")
    p.add_argument("--act-bits", type=_bits, default=8)
    p.add_argument("--w-bits", type=_bits, default=8)
    p.add_argument("--act-gran", choices=["tensor", "token"], default="tensor")
    p.add_argument("--w-gran", choices=["tensor", "channel"], default="tensor")
    p.add_argument("--theta", type=float, default=6.0)
    p.add_argument("--exp-factor", type=int, default=2)
    p.add_argument("--targets", default=",".join(TARGETS))
    p.add_argument("--window", type=int, default=1024)
    p.add_argument("--stride", type=int, default=512)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("crosscheck", help="parity check against the primary CLI")
    p.add_argument("--primary", default="muxq")
    p.add_argument("--samples", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_crosscheck)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # surface one-line failures for batch use
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entrypoint()
