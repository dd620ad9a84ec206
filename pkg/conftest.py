import os

import numpy as np
import pytest
import soundfile as sf

from audio import generate_synthetic_corpus, write_corpus
from models import ModelConfig, preset


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def tiny_config():
    return preset("tiny")


@pytest.fixture
def grad_config():
    """Full architecture small enough for a per-coordinate finite-difference sweep."""
    return ModelConfig(N=8, L=4, B=4, H=8, Sc=4, P=3, X=2, R=2, C=2, family="custom")


@pytest.fixture
def short_records():
    return generate_synthetic_corpus(4, 0.1, seed=7)


@pytest.fixture(scope="session")
def corpus_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("corpus")
    write_corpus(generate_synthetic_corpus(3, 0.1, seed=3), str(out), verbose=False)
    return str(out)


@pytest.fixture(scope="session")
def noise_dir(tmp_path_factory):
    """Two short PCM-16 noise files (shorter than the corpus records, so they loop)."""
    out = tmp_path_factory.mktemp("noise")
    gen = np.random.default_rng(99)
    for k in range(2):
        samples = np.clip(0.3 * gen.standard_normal(300), -1, 1)
        sf.write(os.path.join(str(out), f"noise{k}.wav"), (samples * 32767).astype(np.int16), 8000, subtype="PCM_16")
    return str(out)

