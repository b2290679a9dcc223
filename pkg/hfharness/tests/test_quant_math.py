import math

import numpy as np
import torch

from hfharness.methodcfg import HarnessConfig
from hfharness.quant import detect_outlier_columns, fake_quantize, method_output


def test_absmax_frozen_example():
    x = torch.tensor([[1.0, -2.0], [0.5, 4.0]])
    fq = fake_quantize(x, 8, "tensor")
    s = np.float32(np.float64(4.0) / 127)
    expected = (np.array([[32, -64], [16, 127]], dtype=np.float64) * np.float64(s)).astype(
        np.float32
    )
    assert np.array_equal(fq.numpy(), expected)


def test_per_row_scales():
    x = torch.tensor([[1.0, 2.0], [4.0, 8.0]])
    fq = fake_quantize(x, 8, "row")
    expected = np.array(
        [
            [64 * np.float64(np.float32(2 / 127)), 127 * np.float64(np.float32(2 / 127))],
            [64 * np.float64(np.float32(8 / 127)), 127 * np.float64(np.float32(8 / 127))],
        ]
    ).astype(np.float32)
    assert np.array_equal(fq.numpy(), expected)


def test_zero_group_convention():
    x = torch.zeros(3, 4)
    assert torch.equal(fake_quantize(x, 8, "row"), x)


def test_inf_bits_is_identity():
    x = torch.randn(5, 5)
    assert fake_quantize(x, math.inf, "tensor") is x


def test_outlier_detection_is_strict():
    x = torch.tensor([[5.9, 6.0, -6.1], [0.0, 0.0, 0.0]])
    assert detect_outlier_columns(x, 6.0).tolist() == [2]


def test_muxq_degenerates_to_naive():
    g = torch.Generator().manual_seed(4)
    x = torch.randn(24, 16, generator=g)
    x[:, 3] *= 30.0
    w = torch.randn(16, 8, generator=g)
    naive = method_output(x, w, HarnessConfig(method="naive", act_bits=8))
    huge_theta = method_output(x, w, HarnessConfig(method="muxq", act_bits=8, theta=1e30))
    zero_e = method_output(x, w, HarnessConfig(method="muxq", act_bits=8, exp_factor=0))
    assert torch.equal(naive, huge_theta)
    assert torch.equal(naive, zero_e)


def test_mixed_degeneracies():
    g = torch.Generator().manual_seed(5)
    x = torch.randn(12, 10, generator=g)
    w = torch.randn(10, 6, generator=g)
    naive = method_output(x, w, HarnessConfig(method="naive"))
    assert torch.equal(naive, method_output(x, w, HarnessConfig(method="mixed", theta=1e30)))
    all_out = method_output(x, w, HarnessConfig(method="mixed", theta=1e-8))
    assert torch.allclose(all_out, x @ w, atol=1e-5)


def test_muxq_beats_naive_on_planted_outliers():
    g = torch.Generator().manual_seed(6)
    x = torch.randn(128, 64, generator=g)
    x[:, 5] *= 30.0
    x[:, 40] *= 30.0
    w = torch.randn(64, 32, generator=g)
    ref = (x.double() @ w.double()).float()
    errs = {}
    for method in ("naive", "muxq"):
        out = method_output(x, w, HarnessConfig(method=method, act_bits=8))
        errs[method] = torch.linalg.norm(out - ref).item()
    assert errs["muxq"] < errs["naive"]


def test_config_json_schema_round_trip():
    cfg = HarnessConfig(method="muxq", act_bits=6, w_bits=math.inf,
                        act_granularity="token", w_granularity="channel",
                        targets=("attn_in", "mlp_in"))
    d = cfg.to_json_dict()
    assert d["w_bits"] == "inf"
    assert HarnessConfig.from_json_dict(d) == cfg
