import numpy as np
import torch

import hfharness.quant as quant
from hfharness.crosscheck import _tie_probe, check_pair, cross_check
from hfharness.methodcfg import HarnessConfig

from conftest import needs_primary


@needs_primary
def test_cross_check_passes_on_sampled_pairs():
    ok, report = cross_check(samples=8, seed=3)
    assert ok, [r for r in report if not r["pass"]]
    assert max(r["rel_frobenius_diff"] for r in report) < 1e-6


@needs_primary
def test_zero_input_agrees_exactly():
    x = np.zeros((4, 6), dtype=np.float32)
    w = np.ones((6, 3), dtype=np.float32)
    entry = check_pair(x, w, HarnessConfig(method="naive"))
    assert entry["pass"]
    assert entry["primary"]["rel_frobenius"] == 0.0
    assert entry["harness"]["rel_frobenius"] == 0.0


@needs_primary
def test_rounding_mode_mismatch_detected(monkeypatch):
    # flipping the harness to half-to-even must break parity on tie probes
    rng = np.random.Generator(np.random.Philox(key=5))
    x, w = _tie_probe(rng)
    cfg = HarnessConfig(method="naive", act_bits=8, w_bits=8)
    baseline = check_pair(x, w, cfg)
    assert baseline["pass"], baseline
    monkeypatch.setattr(quant, "_ROUND_HALF_AWAY", "half_even")
    drifted = check_pair(x, w, cfg)
    assert not drifted["pass"], drifted
    assert drifted["rel_frobenius_diff"] > 100 * baseline["rel_frobenius_diff"]


def test_tie_probe_really_contains_ties():
    rng = np.random.Generator(np.random.Philox(key=6))
    x, _ = _tie_probe(rng)
    s = np.float32(np.abs(x).max().astype(np.float64) / 127)
    assert s == np.float32(0.125)
    t = x.astype(np.float64) / np.float64(s)
    frac = np.abs(t - np.floor(t))
    assert (np.isclose(frac, 0.5) | np.isclose(frac, 0.0)).all()
    assert np.isclose(frac, 0.5).mean() > 0.5


def test_half_even_hook_changes_codes_on_ties(monkeypatch):
    x = torch.tensor([[0.5 * 0.125, 127 * 0.125]], dtype=torch.float32)
    away = quant.fake_quantize(x, 8, "tensor")
    monkeypatch.setattr(quant, "_ROUND_HALF_AWAY", "half_even")
    even = quant.fake_quantize(x, 8, "tensor")
    assert not torch.equal(away, even)
