"""Linear-prediction analysis: autocorrelation method, residuals, and
LP-derived coefficient transforms.

The predictor convention throughout is

    s_hat[n] = sum_{k=1..p} a[k] * s[n - k]

so the analysis (inverse) filter is A(z) = 1 - sum_k a[k] z^{-k}.  Arrays of
predictor coefficients hold [a1 .. ap] without the leading 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .errors import DegenerateFrame, LagTooLarge, NumericalFailure, UnstableFilter

# Frames whose zero-lag autocorrelation falls at or below this are treated as
# degenerate: there is no signal to model.
DEGENERATE_ENERGY_FLOOR = 1e-12


def autocorr(frame: np.ndarray, max_lag: int) -> np.ndarray:
    """One-sided autocorrelation r[0..max_lag], r[l] = sum_n x[n] x[n+l]."""
    frame = np.asarray(frame, dtype=np.float64)
    if frame.ndim != 1:
        raise ValueError("frame must be 1-D")
    n = frame.size
    if max_lag < 0:
        raise ValueError("max_lag must be non-negative")
    if max_lag >= n:
        raise LagTooLarge(f"max_lag {max_lag} needs a frame longer than {n} samples")
    full = np.correlate(frame, frame, mode="full")
    return full[n - 1 : n + max_lag].copy()


def _autocorr_batch(frames: np.ndarray, max_lag: int) -> np.ndarray:
    """Row-wise one-sided autocorrelation of a (n_frames, frame_len) array."""
    n = frames.shape[1]
    if max_lag >= n:
        raise LagTooLarge(f"max_lag {max_lag} needs a frame longer than {n} samples")
    out = np.empty((frames.shape[0], max_lag + 1), dtype=np.float64)
    for lag in range(max_lag + 1):
        out[:, lag] = np.einsum("ij,ij->i", frames[:, : n - lag], frames[:, lag:])
    return out


@dataclass(frozen=True)
class LevinsonResult:
    """Solution of the order-p normal equations."""

    coefficients: np.ndarray  # predictor taps a[1..p]
    reflection: np.ndarray  # reflection coefficients k[1..p]
    error_power: float  # final prediction-error power E_p


def _levinson_batch(r: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Levinson-Durbin over rows of r (shape (m, p + 1)).

    Returns (coefficients, reflection, error, valid).  Rows flagged invalid had
    r[0] <= 0, a non-finite intermediate, or |k| >= 1; their outputs are zeroed
    so callers can drop them without tripping on NaNs.
    """
    r = np.asarray(r, dtype=np.float64)
    m, cols = r.shape
    p = cols - 1
    a = np.zeros((m, p), dtype=np.float64)
    ks = np.zeros((m, p), dtype=np.float64)
    err = r[:, 0].copy()
    valid = (err > 0) & np.isfinite(err)
    for i in range(1, p + 1):
        acc = r[:, i].copy()
        if i > 1:
            acc -= np.einsum("mj,mj->m", a[:, : i - 1], r[:, i - 1 : 0 : -1])
        with np.errstate(divide="ignore", invalid="ignore"):
            k = np.where(valid, acc / err, 0.0)
        valid &= np.isfinite(k) & (np.abs(k) < 1.0)
        k = np.where(valid, k, 0.0)
        new_a = a.copy()
        new_a[:, i - 1] = k
        if i > 1:
            new_a[:, : i - 1] = a[:, : i - 1] - k[:, None] * a[:, i - 2 :: -1]
        a = new_a
        ks[:, i - 1] = k
        err = err * (1.0 - k * k)
        valid &= np.isfinite(err) & (err > 0)
    a[~valid] = 0.0
    ks[~valid] = 0.0
    err = np.where(valid, err, 0.0)
    return a, ks, err, valid


def levinson_durbin(r: np.ndarray, order: int) -> LevinsonResult:
    """Solve the autocorrelation normal equations of the given order."""
    r = np.asarray(r, dtype=np.float64)
    if r.ndim != 1:
        raise ValueError("autocorrelation sequence must be 1-D")
    if order < 1:
        raise ValueError("order must be at least 1")
    if r.size < order + 1:
        raise ValueError(f"need {order + 1} autocorrelation lags, got {r.size}")
    if r[0] <= DEGENERATE_ENERGY_FLOOR:
        raise DegenerateFrame(f"zero-lag autocorrelation {r[0]:g} is at or below the floor")
    a, ks, err, valid = _levinson_batch(r[None, : order + 1])
    if not valid[0]:
        raise NumericalFailure("Levinson-Durbin recursion lost stability")
    return LevinsonResult(a[0], ks[0], float(err[0]))


def residual(frame: np.ndarray, coefficients: np.ndarray) -> np.ndarray:
    """Inverse-filter the frame: e[n] = s[n] - sum_k a[k] s[n-k], zero history."""
    frame = np.asarray(frame, dtype=np.float64)
    coefficients = np.asarray(coefficients, dtype=np.float64)
    if frame.ndim != 1 or coefficients.ndim != 1:
        raise ValueError("frame and coefficients must be 1-D")
    fir = np.concatenate(([1.0], -coefficients))
    return lfilter(fir, [1.0], frame)


def _residual_batch(frames: np.ndarray, coefficients: np.ndarray) -> np.ndarray:
    """Per-row inverse filtering where row i uses coefficients[i]."""
    m, n = frames.shape
    p = coefficients.shape[1]
    out = frames.copy()
    for k in range(1, p + 1):
        out[:, k:] -= coefficients[:, k - 1 : k] * frames[:, : n - k]
    return out


def synthesize(excitation: np.ndarray, coefficients: np.ndarray) -> np.ndarray:
    """All-pole resynthesis 1/A(z); exact inverse of :func:`residual`."""
    excitation = np.asarray(excitation, dtype=np.float64)
    coefficients = np.asarray(coefficients, dtype=np.float64)
    fir = np.concatenate(([1.0], -coefficients))
    return lfilter([1.0], fir, excitation)


@dataclass(frozen=True)
class LpAnalysis:
    """Everything the order-p autocorrelation method yields for one frame."""

    order: int
    coefficients: np.ndarray
    reflection: np.ndarray
    error_power: float
    autocorrelation: np.ndarray
    residual: np.ndarray


def analyze_frame(frame: np.ndarray, order: int) -> LpAnalysis:
    """Full LP analysis of a single windowed frame."""
    frame = np.asarray(frame, dtype=np.float64)
    r = autocorr(frame, order)
    solved = levinson_durbin(r, order)
    e = residual(frame, solved.coefficients)
    return LpAnalysis(
        order=order,
        coefficients=solved.coefficients,
        reflection=solved.reflection,
        error_power=solved.error_power,
        autocorrelation=r,
        residual=e,
    )


def _lpcc_batch(coefficients: np.ndarray, n_cepstra: int) -> np.ndarray:
    """Cepstra of 1/A(z) from predictor rows, via the standard recursion.

    c[m] = a[m] + sum_{k=1..m-1} (k/m) c[k] a[m-k], with a[m] = 0 past the
    model order.
    """
    m_rows, p = coefficients.shape
    c = np.zeros((m_rows, n_cepstra), dtype=np.float64)
    for m in range(1, n_cepstra + 1):
        acc = coefficients[:, m - 1].copy() if m <= p else np.zeros(m_rows)
        for k in range(1, m):
            if m - k <= p:
                acc += (k / m) * c[:, k - 1] * coefficients[:, m - k - 1]
        c[:, m - 1] = acc
    return c


def lpcc(coefficients: np.ndarray, n_cepstra: int | None = None) -> np.ndarray:
    """LP-derived cepstral coefficients c[1..n] of the synthesis filter."""
    coefficients = np.asarray(coefficients, dtype=np.float64)
    if coefficients.ndim != 1:
        raise ValueError("coefficients must be 1-D")
    if n_cepstra is None:
        n_cepstra = coefficients.size
    if n_cepstra < 1:
        raise ValueError("need at least one cepstral coefficient")
    return _lpcc_batch(coefficients[None, :], n_cepstra)[0]


def lsf_polynomials(coefficients: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sum and difference palindromic polynomials (P, Q) of A(z).

    P(z) = A(z) + z^{-(p+1)} A(z^{-1}),  Q(z) = A(z) - z^{-(p+1)} A(z^{-1}).
    Returned in descending powers, length p + 2.
    """
    coefficients = np.asarray(coefficients, dtype=np.float64)
    a_poly = np.concatenate(([1.0], -coefficients))
    padded = np.concatenate((a_poly, [0.0]))
    flipped = np.concatenate(([0.0], a_poly[::-1]))
    return padded + flipped, padded - flipped


def lsf(coefficients: np.ndarray) -> np.ndarray:
    """Line spectral frequencies in radians, ascending in (0, pi)."""
    coefficients = np.asarray(coefficients, dtype=np.float64)
    p = coefficients.size
    p_poly, q_poly = lsf_polynomials(coefficients)
    angles = []
    for poly in (p_poly, q_poly):
        roots = np.roots(poly)
        theta = np.angle(roots)
        keep = (theta > 1e-9) & (theta < np.pi - 1e-9)
        angles.append(np.sort(theta[keep]))
    freqs = np.sort(np.concatenate(angles))
    if freqs.size != p:
        raise UnstableFilter(
            f"expected {p} line spectral frequencies, found {freqs.size}; "
            "the predictor is not minimum phase"
        )
    return freqs


def lsf_to_coeffs(freqs: np.ndarray) -> np.ndarray:
    """Rebuild predictor taps a[1..p] from line spectral frequencies."""
    freqs = np.asarray(freqs, dtype=np.float64)
    p = freqs.size
    if p < 1:
        raise ValueError("need at least one frequency")
    # P holds the even-indexed (0, 2, ...) ascending frequencies, Q the odd.
    p_freqs = freqs[0::2]
    q_freqs = freqs[1::2]

    def poly_from_pairs(pairs: np.ndarray) -> np.ndarray:
        poly = np.array([1.0])
        for w in pairs:
            poly = np.convolve(poly, [1.0, -2.0 * np.cos(w), 1.0])
        return poly

    p_poly = poly_from_pairs(p_freqs)
    q_poly = poly_from_pairs(q_freqs)
    if p % 2 == 0:
        p_poly = np.convolve(p_poly, [1.0, 1.0])  # root at z = -1
        q_poly = np.convolve(q_poly, [1.0, -1.0])  # root at z = +1
    else:
        q_poly = np.convolve(q_poly, [1.0, 0.0, -1.0])  # roots at z = +1 and -1
    a_poly = 0.5 * (p_poly + q_poly)
    return -a_poly[1 : p + 1]


def lar(reflection: np.ndarray) -> np.ndarray:
    """Log-area ratios log((1 + k) / (1 - k)) of reflection coefficients."""
    reflection = np.asarray(reflection, dtype=np.float64)
    if np.any(np.abs(reflection) >= 1.0):
        raise UnstableFilter("reflection coefficients must lie strictly inside (-1, 1)")
    return np.log((1.0 + reflection) / (1.0 - reflection))
