import numpy as np
import pytest
import scipy.linalg

from tests.conftest import random_ar_frame
from voxid import lp
from voxid.errors import DegenerateFrame, LagTooLarge, UnstableFilter


def toeplitz_solve(r: np.ndarray, order: int) -> np.ndarray:
    """Oracle: solve the normal equations directly as a dense linear system."""
    phi = scipy.linalg.toeplitz(r[:order])
    return scipy.linalg.solve(phi, r[1 : order + 1])


def series_log_cepstrum(coeffs: np.ndarray, n_cep: int) -> np.ndarray:
    """Oracle: cepstrum of 1/A(z) from the power series of -log A(z).

    With A(z) = 1 + sum p_k z^-k, the log derivative gives
    [log A]'(x) = A'(x)/A(x); long division of that ratio yields the series
    q_m, and [log A]_m = q_{m-1}/m.  Cepstra of 1/A are the negatives.
    """
    p = np.concatenate(([1.0], -np.asarray(coeffs)))  # A as a series in x
    dp = np.array([k * p[k] for k in range(1, p.size)])  # A'
    n = n_cep + 1
    q = np.zeros(n)
    remainder = np.pad(dp, (0, max(0, n - dp.size)))[:n].astype(float)
    divisor = np.pad(p, (0, max(0, n - p.size)))[:n]
    for m in range(n):
        q[m] = remainder[m]
        remainder[m:] -= q[m] * divisor[: n - m]
    log_a = np.array([q[m - 1] / m for m in range(1, n)])
    return -log_a


class TestAutocorr:
    def test_impulse(self):
        np.testing.assert_array_equal(
            lp.autocorr(np.array([1.0, 0, 0, 0]), 3), [1, 0, 0, 0]
        )

    def test_constant(self):
        np.testing.assert_array_equal(lp.autocorr(np.ones(3), 2), [3, 2, 1])

    def test_matches_brute_force(self, rng):
        x = rng.standard_normal(64)
        got = lp.autocorr(x, 20)
        expected = [
            sum(x[n] * x[n + m] for n in range(64 - m)) for m in range(21)
        ]
        np.testing.assert_allclose(got, expected, atol=1e-12)

    def test_zero_lag_dominates(self, rng):
        x = rng.standard_normal(128)
        r = lp.autocorr(x, 30)
        assert r[0] >= 0
        assert np.all(r[0] >= np.abs(r[1:]))

    def test_lag_too_large(self):
        with pytest.raises(LagTooLarge):
            lp.autocorr(np.ones(8), 8)


class TestLevinsonDurbin:
    def test_white_noise(self):
        out = lp.levinson_durbin(np.array([1.0, 0.0, 0.0]), 2)
        np.testing.assert_allclose(out.coefficients, [0.0, 0.0], atol=1e-15)
        assert out.error_power == pytest.approx(1.0)

    def test_order_one(self):
        out = lp.levinson_durbin(np.array([1.0, 0.5]), 1)
        np.testing.assert_allclose(out.coefficients, [0.5])
        assert out.error_power == pytest.approx(0.75)

    def test_matches_dense_solve_on_ar_frames(self, rng):
        for order in (8, 13, 20):
            frame, _ = random_ar_frame(rng, order)
            r = lp.autocorr(frame, order)
            got = lp.levinson_durbin(r, order)
            np.testing.assert_allclose(
                got.coefficients, toeplitz_solve(r, order), atol=1e-8
            )
            assert got.error_power > 0
            assert np.all(np.abs(got.reflection) < 1)

    def test_normal_equation_residual(self, rng):
        frame, _ = random_ar_frame(rng, 13)
        r = lp.autocorr(frame, 13)
        a = lp.levinson_durbin(r, 13).coefficients
        phi = scipy.linalg.toeplitz(r[:13])
        rhs = r[1:14]
        assert np.linalg.norm(phi @ a - rhs) <= 1e-6 * np.linalg.norm(rhs)

    def test_degenerate_frame(self):
        with pytest.raises(DegenerateFrame):
            lp.levinson_durbin(np.zeros(5), 4)

    def test_analyze_frame_bundles_everything(self, rng):
        frame, _ = random_ar_frame(rng, 10)
        analysis = lp.analyze_frame(frame, 10)
        assert analysis.order == 10
        assert analysis.residual.shape == frame.shape
        assert analysis.autocorrelation.shape == (11,)
        np.testing.assert_allclose(
            lp.synthesize(analysis.residual, analysis.coefficients), frame, atol=1e-8
        )


class TestResidual:
    def test_zero_coeffs_identity(self, rng):
        frame = rng.standard_normal(32)
        np.testing.assert_array_equal(lp.residual(frame, np.zeros(4)), frame)

    def test_pulse_train_round_trip(self, rng):
        # Drive 1/A(z) with a known pulse train and analyze with the true taps.
        _, coeffs = random_ar_frame(rng, 10)
        pulses = np.zeros(160)
        pulses[::40] = 1.0
        frame = lp.synthesize(pulses, coeffs)
        np.testing.assert_allclose(lp.residual(frame, coeffs), pulses, atol=1e-8)

    def test_synthesis_inverts_residual(self, rng):
        for order in (8, 13, 20):
            frame, _ = random_ar_frame(rng, order)
            a = lp.analyze_frame(frame, order).coefficients
            e = lp.residual(frame, a)
            scale = np.max(np.abs(frame))
            np.testing.assert_allclose(
                lp.synthesize(e, a) / scale, frame / scale, atol=1e-8
            )

    def test_whitening(self, rng):
        # The residual should be less self-correlated than the frame itself.
        wins = total = 0
        for _ in range(100):
            frame, _ = random_ar_frame(rng, 10)
            a = lp.analyze_frame(frame, 10).coefficients
            e = lp.residual(frame, a)
            r_frame = lp.autocorr(frame, 10)
            r_res = lp.autocorr(e, 10)
            wins += np.sum(np.abs(r_res[1:]) < np.abs(r_frame[1:]))
            total += 10
        assert wins / total > 0.95


class TestLpcc:
    def test_zero_coeffs(self):
        np.testing.assert_array_equal(lp.lpcc(np.zeros(5), 8), np.zeros(8))

    def test_order_one_expansion(self):
        alpha = 0.4
        got = lp.lpcc(np.array([alpha]), 2)
        np.testing.assert_allclose(got, [alpha, alpha**2 / 2])

    def test_matches_series_log_oracle(self, rng):
        for _ in range(20):
            _, coeffs = random_ar_frame(rng, 12)
            got = lp.lpcc(coeffs, 19)
            np.testing.assert_allclose(
                got, series_log_cepstrum(coeffs, 19), atol=1e-8
            )

    def test_default_length_matches_order(self):
        assert lp.lpcc(np.array([0.5, -0.2])).shape == (2,)


class TestLsf:
    def test_unit_predictor(self):
        np.testing.assert_allclose(
            lp.lsf(np.zeros(2)), [np.pi / 3, 2 * np.pi / 3], atol=1e-10
        )

    def test_interlacing(self, rng):
        # Odd/even-indexed frequencies alternate between P-roots and Q-roots.
        for order in (8, 13, 19):
            _, coeffs = random_ar_frame(rng, order)
            freqs = lp.lsf(coeffs)
            assert freqs.shape == (order,)
            assert np.all(np.diff(freqs) > 0)
            assert freqs[0] > 0 and freqs[-1] < np.pi
            p_poly, q_poly = lp.lsf_polynomials(coeffs)
            for i, w in enumerate(freqs):
                poly = p_poly if i % 2 == 0 else q_poly
                val = np.polyval(poly, np.exp(1j * w))
                assert abs(val) < 1e-6 * (1 + np.abs(poly).sum())

    def test_round_trip(self, rng):
        for order in (8, 13, 19, 20):
            _, coeffs = random_ar_frame(rng, order)
            freqs = lp.lsf(coeffs)
            np.testing.assert_allclose(lp.lsf_to_coeffs(freqs), coeffs, atol=1e-6)

    def test_non_minimum_phase_rejected(self):
        # A(z) with a root outside the unit circle.
        with pytest.raises(UnstableFilter):
            lp.lsf(np.array([2.5]))


class TestLar:
    def test_zero(self):
        np.testing.assert_array_equal(lp.lar(np.zeros(4)), np.zeros(4))

    def test_half(self):
        assert lp.lar(np.array([0.5]))[0] == pytest.approx(np.log(3.0))

    def test_odd_function(self, rng):
        k = rng.uniform(-0.99, 0.99, 50)
        np.testing.assert_allclose(lp.lar(-k), -lp.lar(k), atol=1e-12)

    def test_unstable_rejected(self):
        with pytest.raises(UnstableFilter):
            lp.lar(np.array([1.0]))
