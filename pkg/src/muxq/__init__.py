"""muxq: low-precision quantization toolkit with exponent-shift outlier handling."""

__version__ = "0.1.0"

from .baselines import mixed_precision_gemm, naive_gemm
from .config import Method, MethodConfig
from .decompose import MuxqDecomposition, decompose, muxq_gemm, reconstruct
from .errors import (
    BadMagicError,
    ConfigError,
    DumpFormatError,
    HeaderFieldError,
    MuxqError,
    NonFinitePayloadError,
    ShapeError,
    TruncatedPayloadError,
    UnsupportedVersionError,
)
from .evaluate import compare_to_fp, run_method
from .metrics import (
    ErrorStats,
    channel_max_profile,
    error_stats,
    mean_kl,
    profile_to_csv,
    top1_agreement,
)
from .outlier import DEFAULT_THETA, OutlierSet, detect_outlier_channels
from .quantcore import (
    FP_BITS,
    Granularity,
    QuantizedTensor,
    dequantize,
    fake_quantize,
    fp_gemm,
    int_gemm,
    quantize_absmax,
)
from .tensorio import (
    DenseMatrix,
    Layout,
    SyntheticSpec,
    generate_synthetic,
    read_dump,
    write_dump,
)
from .toymodel import (
    QuantTargetSet,
    ToyConfig,
    ToyModel,
    build_toy,
    capture_activations,
    corpus_logits,
    forward_fp,
    forward_quantized,
    load_corpus,
)

__all__ = [
    "__version__",
    "BadMagicError",
    "ConfigError",
    "DEFAULT_THETA",
    "DenseMatrix",
    "DumpFormatError",
    "ErrorStats",
    "FP_BITS",
    "Granularity",
    "HeaderFieldError",
    "Layout",
    "Method",
    "MethodConfig",
    "MuxqDecomposition",
    "MuxqError",
    "NonFinitePayloadError",
    "OutlierSet",
    "QuantTargetSet",
    "QuantizedTensor",
    "ShapeError",
    "SyntheticSpec",
    "ToyConfig",
    "ToyModel",
    "TruncatedPayloadError",
    "UnsupportedVersionError",
    "build_toy",
    "capture_activations",
    "channel_max_profile",
    "compare_to_fp",
    "corpus_logits",
    "decompose",
    "dequantize",
    "detect_outlier_channels",
    "error_stats",
    "fake_quantize",
    "forward_fp",
    "forward_quantized",
    "fp_gemm",
    "generate_synthetic",
    "int_gemm",
    "load_corpus",
    "mean_kl",
    "mixed_precision_gemm",
    "muxq_gemm",
    "naive_gemm",
    "profile_to_csv",
    "quantize_absmax",
    "read_dump",
    "reconstruct",
    "run_method",
    "top1_agreement",
    "write_dump",
]
