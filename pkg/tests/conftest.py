"""Shared fixtures: random frame generators and a tiny on-disk corpus."""

from __future__ import annotations

import numpy as np
import pytest

from voxid import corpus, lp
from voxid.signal_prep import AudioSignal, FrameConfig, preprocess


def random_ar_frame(
    rng: np.random.Generator, order: int, length: int = 160
) -> tuple[np.ndarray, np.ndarray]:
    """A synthetic autoregressive frame and the true predictor taps."""
    ks = rng.uniform(-0.8, 0.8, order)
    coeffs = corpus.reflection_to_coefficients(ks)
    excitation = rng.standard_normal(length + 4 * order)
    signal = lp.synthesize(excitation, coeffs)
    return signal[-length:], coeffs


ACCEPTANCE_LINES: list[str] = []


def record_acceptance(line: str) -> None:
    ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng() -> np.random.Generator:
    """Fresh deterministic generator per test, independent of test order."""
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def speech_frames():
    """Preprocessed frames from one synthetic utterance."""
    voice = corpus.make_voices(2, seed=3)[0]
    samples = corpus.synth_utterance(corpus.utterance_rng(3, 0, 0), voice, 3.0)
    return preprocess(AudioSignal(samples, corpus.SAMPLE_RATE_HZ), FrameConfig())


@pytest.fixture(scope="session")
def tiny_corpus(tmp_path_factory):
    """A 3-speaker corpus small enough for fast end-to-end tests."""
    from voxid.sid_pipeline import synth_corpus

    root = tmp_path_factory.mktemp("tiny_corpus")
    manifest, manifest_path = synth_corpus(
        root,
        n_speakers=3,
        train_utterances=3,
        test_utterances=2,
        train_seconds=2.5,
        test_seconds=2.0,
        seed=11,
    )
    return manifest, manifest_path
