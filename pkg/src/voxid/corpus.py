"""Synthetic speech-like signal generation for desk-scale experiments.

Each synthetic speaker is an order-10 all-pole resonator (a stand-in vocal
tract) excited by a jittered impulse train at a speaker-specific pitch
period.  Utterances vary realistically around the speaker: the tract wobbles
a little per utterance (articulation), the pitch drifts and undulates
(intonation), and pulses carry timing and amplitude noise.

Two designated speakers share one base resonator and differ only in pitch,
so envelope features cannot separate them reliably while source features
can.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import lp

SAMPLE_RATE_HZ = 8000
VOCAL_TRACT_ORDER = 10
REFLECTION_MAGNITUDE = 0.7
PITCH_PERIOD_RANGE = (40, 120)  # samples at 8 kHz: 66.7 to 200 Hz
TWIN_PERIODS = (72, 120)  # the shared-tract pair, isolated at the top
# Other speakers draw periods from below this bound so that pitch drift
# never blurs them into the twins (or each other; see assign_pitch_periods).
OTHERS_PERIOD_MAX = 62
SNR_DB = 30.0

PERIOD_JITTER = 0.03  # per-pulse timing noise
SHIMMER = 0.15  # per-pulse amplitude noise
PITCH_DRIFT = 0.05  # per-utterance base-pitch offset
VIBRATO_DEPTH = 0.05  # slow pitch undulation within a burst
VIBRATO_HZ = 3.0
TRACT_WOBBLE = 0.08  # per-utterance reflection-coefficient offset
REFLECTION_CLIP = 0.85

SPEECH_PEAK = 0.6
PAD_SECONDS = 0.25
GAP_SECONDS = 0.2


@dataclass(frozen=True)
class SpeakerVoice:
    """Fixed per-speaker generator parameters."""

    speaker_id: str
    reflections: np.ndarray  # base vocal-tract reflection coefficients
    pitch_period: int  # samples

    @property
    def tract_coefficients(self) -> np.ndarray:
        """Predictor taps of the base (unwobbled) tract."""
        return reflection_to_coefficients(self.reflections)


def reflection_to_coefficients(reflection: np.ndarray) -> np.ndarray:
    """Step-up recursion from reflection coefficients to predictor taps."""
    reflection = np.asarray(reflection, dtype=np.float64)
    a = np.zeros(0)
    for i, k in enumerate(reflection, start=1):
        new_a = np.empty(i)
        new_a[: i - 1] = a - k * a[::-1]
        new_a[i - 1] = k
        a = new_a
    return a


def random_reflections(rng: np.random.Generator) -> np.ndarray:
    """Base reflection coefficients of a random stable vocal tract."""
    return rng.uniform(-REFLECTION_MAGNITUDE, REFLECTION_MAGNITUDE, VOCAL_TRACT_ORDER)


def wobbled_tract(rng: np.random.Generator, voice: SpeakerVoice) -> np.ndarray:
    """One utterance's tract: the base reflections nudged, still stable."""
    ks = voice.reflections + TRACT_WOBBLE * rng.uniform(-1.0, 1.0, voice.reflections.size)
    return reflection_to_coefficients(np.clip(ks, -REFLECTION_CLIP, REFLECTION_CLIP))


def impulse_train(
    rng: np.random.Generator,
    n_samples: int,
    period: float,
    jitter: float = PERIOD_JITTER,
    shimmer: float = SHIMMER,
    vibrato_depth: float = VIBRATO_DEPTH,
    vibrato_hz: float = VIBRATO_HZ,
    sample_rate_hz: int = SAMPLE_RATE_HZ,
) -> np.ndarray:
    """Quasi-periodic excitation with vibrato plus per-pulse wobble."""
    excitation = np.zeros(n_samples, dtype=np.float64)
    phase = rng.uniform(0.0, 2.0 * np.pi)
    position = rng.uniform(0.0, period)
    while position < n_samples:
        index = int(round(position))
        if index < n_samples:
            excitation[index] = 1.0 + shimmer * rng.uniform(-1.0, 1.0)
        undulation = 1.0 + vibrato_depth * np.sin(
            2.0 * np.pi * vibrato_hz * position / sample_rate_hz + phase
        )
        position += period * undulation * (1.0 + jitter * rng.uniform(-1.0, 1.0))
    return excitation


def synth_speech_burst(
    rng: np.random.Generator,
    voice: SpeakerVoice,
    n_samples: int,
    tract: np.ndarray,
    period: float,
    sample_rate_hz: int = SAMPLE_RATE_HZ,
) -> np.ndarray:
    """One voiced burst through an utterance-specific tract realization."""
    excitation = impulse_train(rng, n_samples, period, sample_rate_hz=sample_rate_hz)
    speech = lp.synthesize(excitation, tract)
    peak = np.max(np.abs(speech))
    if peak > 0:
        speech = speech * (SPEECH_PEAK / peak)
    return speech


def synth_utterance(
    rng: np.random.Generator,
    voice: SpeakerVoice,
    seconds: float,
    sample_rate_hz: int = SAMPLE_RATE_HZ,
) -> np.ndarray:
    """A padded utterance: noise-only lead-in, two speech bursts separated by
    a noise-only gap, and a noise-only tail, all at the configured SNR."""
    pad = int(round(PAD_SECONDS * sample_rate_hz))
    gap = int(round(GAP_SECONDS * sample_rate_hz))
    total = int(round(seconds * sample_rate_hz))
    speech_samples = total - 2 * pad - gap
    if speech_samples < 2 * sample_rate_hz // 10:
        raise ValueError(f"{seconds} s leaves no room for speech between pads")
    first = speech_samples // 2
    second = speech_samples - first

    tract = wobbled_tract(rng, voice)
    period = voice.pitch_period * (1.0 + PITCH_DRIFT * rng.uniform(-1.0, 1.0))
    samples = np.zeros(total, dtype=np.float64)
    samples[pad : pad + first] = synth_speech_burst(
        rng, voice, first, tract, period, sample_rate_hz
    )
    samples[pad + first + gap : pad + first + gap + second] = synth_speech_burst(
        rng, voice, second, tract, period, sample_rate_hz
    )

    speech_rms = np.sqrt(np.mean(samples[pad : pad + first] ** 2))
    noise_sigma = speech_rms / (10.0 ** (SNR_DB / 20.0))
    samples += noise_sigma * rng.standard_normal(total)
    return samples


def assign_pitch_periods(n_speakers: int, rng: np.random.Generator) -> list[int]:
    """Distinct, well-spaced integer periods; speakers 0 and 1 take the twins.

    The source stream discriminates on pulse-rate statistics, so the grid
    step is kept as coarse as the speaker count allows; pitch drift then
    cannot blur neighboring speakers together.
    """
    low = PITCH_PERIOD_RANGE[0]
    needed = n_speakers - 2
    for step in (6, 5, 4, 3, 2, 1):
        pool = np.arange(low, OTHERS_PERIOD_MAX + 1, step)
        if pool.size >= needed:
            break
    if pool.size < needed:
        raise ValueError(f"cannot assign {n_speakers} distinct pitch periods")
    others = rng.choice(pool, size=needed, replace=False)
    return list(TWIN_PERIODS)[:n_speakers] + [int(p) for p in others]


def make_voices(n_speakers: int, seed: int) -> list[SpeakerVoice]:
    """Deterministic speaker set; speakers 0 and 1 share a vocal tract."""
    if n_speakers < 2:
        raise ValueError("need at least two speakers")
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(0,)))
    periods = assign_pitch_periods(n_speakers, rng)
    voices = []
    shared = random_reflections(rng)
    for i in range(n_speakers):
        reflections = shared if i < 2 else random_reflections(rng)
        voices.append(
            SpeakerVoice(
                speaker_id=f"spk{i:02d}",
                reflections=reflections,
                pitch_period=periods[i],
            )
        )
    return voices


def utterance_rng(seed: int, speaker_index: int, utterance_index: int) -> np.random.Generator:
    """Independent, reproducible stream for one utterance."""
    return np.random.default_rng(
        np.random.SeedSequence(entropy=seed, spawn_key=(1, speaker_index, utterance_index))
    )
