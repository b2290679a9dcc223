import os
import shutil

import pytest

from hfharness.models import random_model

PRIMARY_CLI = shutil.which("muxq")

# Pretrained-model runs need either hub access or local checkouts; point
# these at a GPT-2 checkpoint directory and a WikiText-2 test-split text file.
GPT2_PATH = os.environ.get("HFHARNESS_GPT2")
WIKITEXT_PATH = os.environ.get("HFHARNESS_WIKITEXT2")

needs_primary = pytest.mark.skipif(PRIMARY_CLI is None, reason="muxq CLI not on PATH")
needs_pretrained = pytest.mark.skipif(
    GPT2_PATH is None or WIKITEXT_PATH is None,
    reason="set HFHARNESS_GPT2 and HFHARNESS_WIKITEXT2 to run pretrained perplexity checks",
)


@pytest.fixture(scope="session")
def tiny_gpt2():
    return random_model(seed=0, n_layer=2, n_embd=64, n_head=4)


@pytest.fixture(scope="session")
def wide_gpt2():
    # full gpt2 hidden width, shallow for speed; random weights
    return random_model(seed=1, n_layer=2, n_embd=768, n_head=12)
