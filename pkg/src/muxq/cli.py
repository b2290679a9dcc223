"""Command-line front end: gen / eval / sweep / toy / profile.

Reports are machine-first JSON on stdout (CSV for profiles); diagnostics go
to stderr. Exit codes: 0 success, 2 configuration error, 3 I/O or parse
error. Setting MUXQ_THREADS caps the numeric libraries' thread pools for
the duration of a command.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import asdict, dataclass

from . import __version__
from .config import Method, MethodConfig
from .decompose import decompose
from .errors import ConfigError, DumpFormatError, MuxqError
from .evaluate import compare_to_fp
from .metrics import (
    ErrorStats,
    channel_max_profile,
    error_stats,
    mean_kl,
    profile_to_csv,
    top1_agreement,
)
from .outlier import detect_outlier_channels
from .quantcore import FP_BITS, Granularity
from .tensorio import DenseMatrix, Layout, SyntheticSpec, generate_synthetic, read_dump, write_dump
from .toymodel import (
    QuantTargetSet,
    ToyConfig,
    build_toy,
    corpus_logits,
    load_corpus,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3


@dataclass
class EvalReport:
    config: dict
    error_stats: dict
    wall_time_ms: float
    tool_version: str

    def to_json_dict(self) -> dict:
        return asdict(self)


def _bits(text: str):
    if text == "inf":
        return FP_BITS
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bit width must be an integer or 'inf': {text!r}")


def _int_list(text: str) -> list[int]:
    if not text.strip():
        return []
    return [int(tok) for tok in text.split(",")]


def _gran_pair(token: str) -> tuple[Granularity, Granularity]:
    # 'tensor' = per-tensor both sides; 'vector' = per-token acts, per-channel weights
    if token == "tensor":
        return Granularity.PER_TENSOR, Granularity.PER_TENSOR
    if token == "vector":
        return Granularity.PER_TOKEN, Granularity.PER_CHANNEL
    raise ConfigError(f"granularity must be 'tensor' or 'vector': {token!r}")


def _method_token(token: str) -> Method:
    try:
        return Method(token)
    except ValueError:
        raise ConfigError(f"unknown method {token!r}") from None


def _emit(args, payload) -> None:
    indent = 2 if getattr(args, "pretty", False) else None
    sys.stdout.write(json.dumps(payload, indent=indent) + "\n")


def _method_config(args, act_gran=None, w_gran=None) -> MethodConfig:
    return MethodConfig(
        method=Method(args.method),
        act_bits=args.act_bits,
        w_bits=args.w_bits,
        act_granularity=act_gran if act_gran is not None else Granularity(args.act_gran),
        w_granularity=w_gran if w_gran is not None else Granularity(args.w_gran),
        theta=args.theta,
        exp_factor=args.exp_factor,
        mode=args.mode,
    )


def cmd_gen(args) -> int:
    spec = SyntheticSpec(
        rows=args.rows,
        cols=args.cols,
        base_std=args.base_std,
        outlier_channels=tuple(args.outliers),
        outlier_gain=args.gain,
        seed=args.seed,
    )
    m = generate_synthetic(spec)
    if args.layout == "weight":
        m = DenseMatrix(m.data, Layout.WEIGHT)
    write_dump(m, args.out)
    print(f"wrote {m.rows}x{m.cols} {m.layout.name.lower()} matrix to {args.out}", file=sys.stderr)
    return EXIT_OK


def _eval_cell(x: DenseMatrix, w: DenseMatrix, cfg: MethodConfig, descriptors: dict) -> EvalReport:
    start = time.perf_counter()
    _, stats = compare_to_fp(x, w, cfg)
    elapsed = (time.perf_counter() - start) * 1000.0
    return EvalReport(
        config={**cfg.to_json_dict(), **descriptors},
        error_stats=stats.to_json_dict(),
        wall_time_ms=elapsed,
        tool_version=__version__,
    )


def _input_descriptors(args, x, w) -> dict:
    return {
        "acts": {"path": str(args.acts), "rows": x.rows, "cols": x.cols},
        "weights": {"path": str(args.weights), "rows": w.rows, "cols": w.cols},
        "seed": None,
    }


def cmd_eval(args) -> int:
    x = read_dump(args.acts)
    w = read_dump(args.weights)
    report = _eval_cell(x, w, _method_config(args), _input_descriptors(args, x, w))
    _emit(args, report.to_json_dict())
    return EXIT_OK


def cmd_sweep(args) -> int:
    x = read_dump(args.acts)
    w = read_dump(args.weights)
    reports = []
    for gran_token in args.grans:
        act_g, w_g = _gran_pair(gran_token)
        for method in args.methods:
            for bits in args.act_bits_list:
                cfg = MethodConfig(
                    method=_method_token(method),
                    act_bits=bits,
                    w_bits=args.w_bits,
                    act_granularity=act_g,
                    w_granularity=w_g,
                    theta=args.theta,
                    exp_factor=args.exp_factor,
                    mode=args.mode,
                )
                cell = _eval_cell(x, w, cfg, _input_descriptors(args, x, w))
                cell.config["granularity"] = gran_token
                reports.append(cell.to_json_dict())
    _emit(args, reports)
    return EXIT_OK


def cmd_toy(args) -> int:
    toy_cfg = ToyConfig(
        seed=args.seed,
        outlier_channels=tuple(args.outlier_channels),
        outlier_gain=args.gain,
    )
    act_g, w_g = _gran_pair(args.gran)
    cfg = _method_config(args, act_gran=act_g, w_gran=w_g)
    targets = QuantTargetSet.from_names(args.targets)
    model = build_toy(toy_cfg)
    tokens = load_corpus()
    start = time.perf_counter()
    fp_cfg = MethodConfig(method=Method.FP)
    ref = corpus_logits(model, tokens, fp_cfg, targets)
    cand = corpus_logits(model, tokens, cfg, targets)
    base = error_stats(DenseMatrix(ref), DenseMatrix(cand))
    stats = ErrorStats(
        rel_frobenius=base.rel_frobenius,
        max_abs_err=base.max_abs_err,
        sqnr_db=base.sqnr_db,
        mean_kl=mean_kl(ref, cand),
        top1_agreement=top1_agreement(ref, cand),
    )
    elapsed = (time.perf_counter() - start) * 1000.0
    report = EvalReport(
        config={
            **cfg.to_json_dict(),
            "seed": args.seed,
            "outlier_channels": list(args.outlier_channels),
            "outlier_gain": args.gain,
            "targets": list(targets.names),
            "granularity": args.gran,
            "corpus_tokens": int(tokens.size),
        },
        error_stats=stats.to_json_dict(),
        wall_time_ms=elapsed,
        tool_version=__version__,
    )
    _emit(args, report.to_json_dict())
    return EXIT_OK


def cmd_profile(args) -> int:
    x = read_dump(args.acts)
    if args.after_muxq:
        outliers = detect_outlier_channels(x, args.theta)
        x = decompose(x, outliers, args.exp_factor).body
    sys.stdout.write(profile_to_csv(channel_max_profile(x)))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="muxq",
        description="quantization evaluation toolkit (JSON reports on stdout)",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write a synthetic activation/weight MUXT dump")
    p.add_argument("--rows", type=int, required=True)
    p.add_argument("--cols", type=int, required=True)
    p.add_argument("--outliers", type=_int_list, default=[], metavar="I,J,K")
    p.add_argument("--gain", type=float, default=1.0)
    p.add_argument("--base-std", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--layout", choices=["activation", "weight"], default="activation")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    def add_method_flags(p, with_method=True):
        if with_method:
            p.add_argument("--method", choices=[m.value for m in Method], default="naive")
        p.add_argument("--act-bits", type=_bits, default=8)
        p.add_argument("--w-bits", type=_bits, default=8)
        p.add_argument("--theta", type=float, default=6.0)
        p.add_argument("--exp-factor", type=int, default=2)
        p.add_argument("--mode", choices=["fake", "int"], default="fake")
        p.add_argument("--pretty", action="store_true", help="indent the JSON output")

    p = sub.add_parser("eval", help="evaluate one method against the FP reference")
    p.add_argument("--acts", required=True)
    p.add_argument("--weights", required=True)
    add_method_flags(p)
    p.add_argument("--act-gran", choices=["tensor", "token"], default="tensor")
    p.add_argument("--w-gran", choices=["tensor", "channel"], default="tensor")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="method x bits x granularity cross product")
    p.add_argument("--acts", required=True)
    p.add_argument("--weights", required=True)
    p.add_argument("--methods", type=lambda s: s.split(","), default=["naive", "muxq", "mixed"])
    p.add_argument("--act-bits-list", type=_int_list, default=[8, 7, 6, 5])
    p.add_argument("--grans", type=lambda s: s.split(","), default=["tensor"])
    p.add_argument("--w-bits", type=_bits, default=8)
    p.add_argument("--theta", type=float, default=6.0)
    p.add_argument("--exp-factor", type=int, default=2)
    p.add_argument("--mode", choices=["fake", "int"], default="fake")
    p.add_argument("--pretty", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("toy", help="toy-model logit fidelity on the bundled corpus")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--outlier-channels", type=_int_list, default=[3, 17], metavar="I,J")
    p.add_argument("--gain", type=float, default=20.0)
    add_method_flags(p)
    p.add_argument("--gran", choices=["tensor", "vector"], default="tensor")
    p.add_argument("--targets", type=lambda s: s.split(","), default=list(QuantTargetSet().names))
    p.set_defaults(func=cmd_toy)

    p = sub.add_parser("profile", help="channel max-abs profile as CSV")
    p.add_argument("--acts", required=True)
    p.add_argument("--after-muxq", action="store_true", help="profile the decomposed body")
    p.add_argument("--theta", type=float, default=6.0)
    p.add_argument("--exp-factor", type=int, default=2)
    p.set_defaults(func=cmd_profile)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    limiter = None
    threads = os.environ.get("MUXQ_THREADS")
    if threads:
        try:
            from threadpoolctl import threadpool_limits

            limiter = threadpool_limits(limits=int(threads))
        except (ImportError, ValueError) as exc:
            print(f"MUXQ_THREADS ignored: {exc}", file=sys.stderr)
    try:
        return args.func(args)
    except (DumpFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ConfigError, MuxqError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    finally:
        if limiter is not None:
            limiter.unregister()


def entrypoint() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entrypoint()
