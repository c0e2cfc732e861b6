"""Vocal-source features from the autocorrelation of the LP residual.

The LP residual carries what the all-pole vocal-tract model leaves behind:
periodicity from the glottal excitation, or noise-like structure for
unvoiced speech.  Correlating the normalized residual against itself over a
short range of lags summarizes that excitation in a fixed-length vector,
lag 0 included so overall residual energy survives normalization of scale
elsewhere in the pipeline.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import lp
from .errors import DegenerateResidual, LagTooLarge, NoFeatures
from .features import FeatureKind, FeatureMatrix
from .signal_prep import FrameSequence, frame_array

DEFAULT_LP_ORDER = 13
DEFAULT_MAX_LAG = 12


@dataclass(frozen=True)
class AcrlagConfig:
    """Residual-autocorrelation feature settings."""

    lp_order: int = DEFAULT_LP_ORDER
    max_lag: int = DEFAULT_MAX_LAG

    def __post_init__(self) -> None:
        if self.lp_order < 1:
            raise ValueError("lp_order must be at least 1")
        if self.max_lag < 0:
            raise ValueError("max_lag must be non-negative")

    @property
    def dim(self) -> int:
        return self.max_lag + 1


def normalize_residual(e: np.ndarray) -> np.ndarray:
    """Remove the mean, then scale the peak magnitude to one."""
    e = np.asarray(e, dtype=np.float64)
    if e.ndim != 1:
        raise ValueError("residual must be 1-D")
    if e.size == 0:
        raise DegenerateResidual("empty residual")
    centered = e - e.mean()
    peak = np.max(np.abs(centered))
    # A relative floor also rejects inputs that are constant up to round-off,
    # where dividing by the ulp-sized peak would amplify noise into a fake
    # feature vector.
    floor = np.max(np.abs(e)) * 1e-12
    if peak <= floor or not np.isfinite(peak):
        raise DegenerateResidual("residual is constant; nothing to correlate")
    return centered / peak


def acrlag_feature(e: np.ndarray, config: AcrlagConfig = AcrlagConfig()) -> np.ndarray:
    """Feature vector r[0..max_lag] of one normalized residual."""
    e = np.asarray(e, dtype=np.float64)
    if config.max_lag >= e.size:
        raise LagTooLarge(
            f"max_lag {config.max_lag} needs a residual longer than {e.size} samples"
        )
    return lp.autocorr(normalize_residual(e), config.max_lag)


def acrlag_vector(frame: np.ndarray, config: AcrlagConfig = AcrlagConfig()) -> np.ndarray:
    """Feature vector for one windowed frame: LP residual, then its
    lag-bounded autocorrelation."""
    frame = np.asarray(frame, dtype=np.float64)
    if config.max_lag >= frame.size:
        raise LagTooLarge(
            f"max_lag {config.max_lag} needs a frame longer than {frame.size} samples"
        )
    analysis = lp.analyze_frame(frame, config.lp_order)
    return acrlag_feature(analysis.residual, config)


def extract_acrlag(
    frames: FrameSequence | np.ndarray, config: AcrlagConfig = AcrlagConfig()
) -> FeatureMatrix:
    """ACRLAG matrix for every frame of an utterance.

    Frames the LP analysis cannot model (zero energy, unstable recursion) or
    whose residual collapses to a constant are dropped rather than padded.
    """
    data = frame_array(frames)
    if config.max_lag >= data.shape[1]:
        raise LagTooLarge(
            f"max_lag {config.max_lag} needs frames longer than {data.shape[1]} samples"
        )
    r = lp._autocorr_batch(data, config.lp_order)
    coeffs, _, _, valid = lp._levinson_batch(r)
    residuals = lp._residual_batch(data, coeffs)

    centered = residuals - residuals.mean(axis=1, keepdims=True)
    peaks = np.max(np.abs(centered), axis=1)
    floors = np.max(np.abs(residuals), axis=1) * 1e-12
    valid &= (peaks > floors) & np.isfinite(peaks)
    if not np.any(valid):
        raise NoFeatures("no frame produced a usable residual")
    normalized = centered[valid] / peaks[valid, None]
    vectors = lp._autocorr_batch(normalized, config.max_lag)
    return FeatureMatrix(FeatureKind.ACRLAG, vectors)
