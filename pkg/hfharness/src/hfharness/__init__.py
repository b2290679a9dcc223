"""hfharness: GPT-2 activation dumps and fake-quantized perplexity, bound to the muxq CLI."""

__version__ = "0.1.0"

from .crosscheck import cross_check
from .dump import dump_activations
from .methodcfg import TARGETS, HarnessConfig
from .muxt import LAYOUT_ACTIVATION, LAYOUT_WEIGHT, MuxtFormatError, read_muxt, write_muxt
from .patching import FakeQuantConv1D, patch_model, unpatch_model
from .perplexity import eval_perplexity, sliding_window_nll
from .quant import detect_outlier_columns, fake_quantize, method_output

__all__ = [
    "__version__",
    "TARGETS",
    "HarnessConfig",
    "LAYOUT_ACTIVATION",
    "LAYOUT_WEIGHT",
    "MuxtFormatError",
    "FakeQuantConv1D",
    "cross_check",
    "detect_outlier_columns",
    "dump_activations",
    "eval_perplexity",
    "fake_quantize",
    "method_output",
    "patch_model",
    "read_muxt",
    "sliding_window_nll",
    "unpatch_model",
    "write_muxt",
]
