"""Vocal-tract feature extraction: filterbank cepstra (MFCC, LFCC),
perceptual LP cepstra (PLPCC), and LP-transform features (LPCC, LSF, LAR).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.fft import dct

from . import lp
from .errors import FilterbankTooDense, NoFeatures, UnstableFilter
from .features import FeatureKind, FeatureMatrix
from .signal_prep import FrameSequence, frame_array

# Filterbank energies are floored before the log so silent bands stay finite.
LOG_FLOOR = 1e-10


class FrequencyScale(str, Enum):
    MEL = "mel"
    HERTZ = "hertz"


def mel_from_hertz(f: np.ndarray | float) -> np.ndarray | float:
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def hertz_from_mel(m: np.ndarray | float) -> np.ndarray | float:
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def bark_from_hertz(f: np.ndarray | float) -> np.ndarray | float:
    return 6.0 * np.arcsinh(np.asarray(f, dtype=np.float64) / 600.0)


def hertz_from_bark(z: np.ndarray | float) -> np.ndarray | float:
    return 600.0 * np.sinh(np.asarray(z, dtype=np.float64) / 6.0)


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class FilterbankConfig:
    """Triangular-filterbank cepstrum settings (MFCC when mel, LFCC when hertz)."""

    n_filters: int = 20
    scale: FrequencyScale = FrequencyScale.MEL
    f_low_hz: float = 0.0
    f_high_hz: float | None = None  # None means the Nyquist frequency
    n_cep: int = 19
    fft_size: int = 512

    def __post_init__(self) -> None:
        object.__setattr__(self, "scale", FrequencyScale(self.scale))
        if self.n_filters < 1:
            raise ValueError("need at least one filter")
        if self.n_cep < 1:
            raise ValueError("need at least one cepstral coefficient")
        if self.n_cep >= self.n_filters:
            raise ValueError("n_cep must be smaller than n_filters")
        if not _is_power_of_two(self.fft_size):
            raise ValueError("fft_size must be a power of two")
        if self.f_low_hz < 0:
            raise ValueError("f_low_hz must be non-negative")

    def band_edge_hz(self, sample_rate_hz: int) -> tuple[float, float]:
        high = self.f_high_hz if self.f_high_hz is not None else sample_rate_hz / 2.0
        if not self.f_low_hz < high <= sample_rate_hz / 2.0:
            raise ValueError(
                f"band edges ({self.f_low_hz}, {high}) must satisfy "
                f"0 <= low < high <= {sample_rate_hz / 2.0}"
            )
        return self.f_low_hz, high

    @property
    def feature_kind(self) -> FeatureKind:
        return FeatureKind.MFCC if self.scale is FrequencyScale.MEL else FeatureKind.LFCC


def build_filterbank(cfg: FilterbankConfig, sample_rate_hz: int) -> np.ndarray:
    """Triangular filter matrix of shape (n_filters, fft_size // 2 + 1).

    Boundary points are spaced equally on the configured scale; filter i
    rises linearly in hertz from point i to point i+1 (its center) and falls
    to point i+2, so adjacent filters overlap by construction.
    """
    f_low, f_high = cfg.band_edge_hz(sample_rate_hz)
    if cfg.scale is FrequencyScale.MEL:
        points = hertz_from_mel(
            np.linspace(mel_from_hertz(f_low), mel_from_hertz(f_high), cfg.n_filters + 2)
        )
    else:
        points = np.linspace(f_low, f_high, cfg.n_filters + 2)
    bin_hz = np.arange(cfg.fft_size // 2 + 1) * (sample_rate_hz / cfg.fft_size)

    bank = np.zeros((cfg.n_filters, bin_hz.size), dtype=np.float64)
    for i in range(cfg.n_filters):
        left, center, right = points[i], points[i + 1], points[i + 2]
        rising = (bin_hz - left) / (center - left)
        falling = (right - bin_hz) / (right - center)
        bank[i] = np.clip(np.minimum(rising, falling), 0.0, None)
        if np.count_nonzero(bank[i]) < 2:
            raise FilterbankTooDense(
                f"filter {i} covers fewer than 2 of the {bin_hz.size} FFT bins; "
                "increase fft_size or reduce n_filters"
            )
    return bank


def _power_spectra(frames: np.ndarray, fft_size: int) -> np.ndarray:
    spectra = np.fft.rfft(frames, n=fft_size, axis=1)
    return spectra.real**2 + spectra.imag**2


def fb_cepstra(frames: FrameSequence, cfg: FilterbankConfig = FilterbankConfig()) -> FeatureMatrix:
    """Filterbank cepstra: |FFT|^2 -> filterbank -> log -> DCT-II, c0 dropped."""
    bank = build_filterbank(cfg, frames.source_rate_hz)
    power = _power_spectra(frames.frames, cfg.fft_size)
    energies = power @ bank.T
    log_energies = np.log(np.maximum(energies, LOG_FLOOR))
    cepstra = dct(log_energies, type=2, norm="ortho", axis=1)
    return FeatureMatrix(cfg.feature_kind, cepstra[:, 1 : cfg.n_cep + 1])


def extract_mfcc(frames: FrameSequence, cfg: FilterbankConfig | None = None) -> FeatureMatrix:
    cfg = cfg if cfg is not None else FilterbankConfig(scale=FrequencyScale.MEL)
    if cfg.scale is not FrequencyScale.MEL:
        raise ValueError("MFCC extraction requires the mel scale")
    return fb_cepstra(frames, cfg)


def extract_lfcc(frames: FrameSequence, cfg: FilterbankConfig | None = None) -> FeatureMatrix:
    cfg = cfg if cfg is not None else FilterbankConfig(scale=FrequencyScale.HERTZ)
    if cfg.scale is not FrequencyScale.HERTZ:
        raise ValueError("LFCC extraction requires the hertz scale")
    return fb_cepstra(frames, cfg)


@dataclass(frozen=True)
class PlpConfig:
    """Perceptual-LP cepstrum settings."""

    model_order: int = 19
    n_cep: int = 19
    fft_size: int = 512
    n_bands: int | None = None  # None picks enough bands for the model order

    def __post_init__(self) -> None:
        if self.model_order < 1:
            raise ValueError("model_order must be at least 1")
        if self.n_cep < 1:
            raise ValueError("need at least one cepstral coefficient")
        if not _is_power_of_two(self.fft_size):
            raise ValueError("fft_size must be a power of two")

    def resolved_bands(self, sample_rate_hz: int) -> int:
        if self.n_bands is not None:
            if self.n_bands < self.model_order + 1:
                raise ValueError(
                    f"{self.n_bands} bands cannot support an order-{self.model_order} model"
                )
            return self.n_bands
        nyquist_bark = float(bark_from_hertz(sample_rate_hz / 2.0))
        # The band samples become the autocorrelation support, so the count
        # must exceed the model order with a little headroom.
        return max(int(np.ceil(nyquist_bark)) + 1, self.model_order + 2)


def equal_loudness(f: np.ndarray | float) -> np.ndarray | float:
    """Equal-loudness weight, the classical rational approximation.

    E(f) = (f^2 / (f^2 + 1.6e5))^2 * (f^2 + 1.44e6) / (f^2 + 9.61e6)
    """
    fsq = np.square(np.asarray(f, dtype=np.float64))
    return (fsq / (fsq + 1.6e5)) ** 2 * (fsq + 1.44e6) / (fsq + 9.61e6)


def bark_filterbank(n_bands: int, fft_size: int, sample_rate_hz: int) -> np.ndarray:
    """Critical-band weights of shape (n_bands, fft_size // 2 + 1).

    Band centers sit equally spaced on the Bark axis from 0 to the Nyquist
    Bark.  Each band is flat within +-0.5 Bark of its center and falls off
    exponentially outside: 10 dB per Bark below, 25 dB per Bark above.
    """
    bin_hz = np.arange(fft_size // 2 + 1) * (sample_rate_hz / fft_size)
    bin_bark = np.asarray(bark_from_hertz(bin_hz))
    centers = np.linspace(0.0, float(bark_from_hertz(sample_rate_hz / 2.0)), n_bands)
    lo = bin_bark[None, :] - centers[:, None] - 0.5
    hi = bin_bark[None, :] - centers[:, None] + 0.5
    return 10.0 ** np.minimum(0.0, np.minimum(hi, -2.5 * lo))


def _plp_from_power(
    power: np.ndarray, cfg: PlpConfig, sample_rate_hz: int
) -> tuple[np.ndarray, np.ndarray]:
    """PLPCC rows from power spectra; returns (cepstra, valid-row mask).

    The equal-loudness curve is folded into the band weights, and each band
    energy is divided by that weighted band area.  A flat power spectrum
    therefore maps to a flat auditory spectrum (the weighting's own response
    is divided out), and onward to near-zero predictor coefficients.
    """
    n_bands = cfg.resolved_bands(sample_rate_hz)
    bin_hz = np.arange(cfg.fft_size // 2 + 1) * (sample_rate_hz / cfg.fft_size)
    weights = bark_filterbank(n_bands, cfg.fft_size, sample_rate_hz)
    weights = weights * np.asarray(equal_loudness(bin_hz))[None, :]
    areas = weights.sum(axis=1)

    auditory = (power @ weights.T) / areas[None, :]
    loudness = np.cbrt(auditory)
    # Band samples stand in for the warped spectrum on [0, pi]; the inverse
    # real FFT of that half-spectrum is the model autocorrelation.
    r = np.fft.irfft(loudness, n=2 * (n_bands - 1), axis=1)[:, : cfg.model_order + 1]
    coeffs, _, _, valid = lp._levinson_batch(r)
    cepstra = np.zeros((power.shape[0], cfg.n_cep), dtype=np.float64)
    if np.any(valid):
        cepstra[valid] = lp._lpcc_batch(coeffs[valid], cfg.n_cep)
    return cepstra, valid


def plpcc(frames: FrameSequence, cfg: PlpConfig = PlpConfig()) -> FeatureMatrix:
    """Perceptual LP cepstra: Bark integration, equal loudness, cube-root
    loudness, all-pole fit, cepstral recursion."""
    power = _power_spectra(frames.frames, cfg.fft_size)
    cepstra, valid = _plp_from_power(power, cfg, frames.source_rate_hz)
    if not np.any(valid):
        raise NoFeatures("no frame supported a perceptual LP fit")
    return FeatureMatrix(FeatureKind.PLPCC, cepstra[valid])


LP_FEATURE_KINDS = (FeatureKind.LPCC, FeatureKind.LSF, FeatureKind.LAR)


def extract_lp_features(
    frames: FrameSequence | np.ndarray, kind: FeatureKind, order: int = 19
) -> FeatureMatrix:
    """LP-transform features (LPCC, LSF, or LAR) at the given model order."""
    kind = FeatureKind(kind)
    if kind not in LP_FEATURE_KINDS:
        raise ValueError(f"{kind.value} is not an LP-transform feature")
    r = lp._autocorr_batch(frame_array(frames), order)
    coeffs, reflection, _, valid = lp._levinson_batch(r)
    if kind is FeatureKind.LPCC:
        if not np.any(valid):
            raise NoFeatures("no frame supported an LP fit")
        return FeatureMatrix(kind, lp._lpcc_batch(coeffs[valid], order))
    if kind is FeatureKind.LAR:
        if not np.any(valid):
            raise NoFeatures("no frame supported an LP fit")
        return FeatureMatrix(kind, lp.lar(reflection[valid]))
    rows = []
    for i in np.flatnonzero(valid):
        try:
            rows.append(lp.lsf(coeffs[i]))
        except UnstableFilter:
            continue
    if not rows:
        raise NoFeatures("no frame yielded line spectral frequencies")
    return FeatureMatrix(kind, np.vstack(rows))
