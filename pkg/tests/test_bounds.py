import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from snrwall.bounds import (
    BoundValidityError,
    correlation_probes,
    general_wall_bound,
    gershgorin_bounds,
    h0_statistic_lower_bound,
    h1_statistic_upper_bound,
    kappa_max,
    kappa_max_combined,
    kappa_max_receiver,
    kappa_max_time,
    largest_offdiagonal,
    nonrobustness_inequality,
    rayleigh_eigen_bounds,
    snr_wall_lower_bound,
    validity_condition,
    wall_bound,
)
from snrwall.detector import hermitian_eigenvalues, mme_statistic
from snrwall.model import SignalModelParams, statistical_signal_covariance
from snrwall.noise import CorrelationModel, NoiseModel

ALPHA_005 = 1.05 / 0.95


def loop_signal_corr(p, q, m):
    """rho^s built entry by entry from the triangular autocorrelation."""
    g = p * (q + 1)
    r = np.zeros((g, g))
    for a in range(g):
        for b in range(g):
            lag = abs(a % (q + 1) - b % (q + 1))
            r[a, b] = max(0.0, 1.0 - lag / m)
    return r


def row_sums(r):
    return [sum(abs(r[i, j]) for j in range(r.shape[0]) if j != i) for i in range(r.shape[0])]


def receiver_corr(p, rho_h0=0.05, rho_h1=0.0):
    noise_h0 = np.eye(p)
    noise_h0[0, 1] = noise_h0[1, 0] = rho_h0
    noise_h1 = np.eye(p)
    noise_h1[0, 1] = noise_h1[1, 0] = rho_h1
    return CorrelationModel(np.ones((p, p)), noise_h1, noise_h0)


class TestH0Bound:
    @pytest.mark.parametrize("rho, expect", [(0.0, 1.0), (0.05, 1.1052631578947369), (0.5, 3.0)])
    def test_values(self, rho, expect):
        assert h0_statistic_lower_bound(rho) == pytest.approx(expect, rel=1e-12)

    def test_printed_value_rounding(self):
        assert abs(h0_statistic_lower_bound(0.05) - 1.10503) < 5e-3

    @given(st.floats(0, 0.999), st.floats(0, 0.999))
    def test_increasing(self, a, b):
        assume(a < b - 1e-9)
        assert 1 <= h0_statistic_lower_bound(a) < h0_statistic_lower_bound(b)

    @pytest.mark.parametrize("rho", [1.0, -0.1, 1.5])
    def test_rejects(self, rho):
        with pytest.raises(ValueError):
            h0_statistic_lower_bound(rho)


class TestRayleigh:
    def test_real_probes(self):
        s = 1 / math.sqrt(2)
        lo, up = rayleigh_eigen_bounds([[1, 0.05], [0.05, 1]], [s, s], [s, -s])
        assert (lo, up) == (pytest.approx(1.05), pytest.approx(0.95))

    def test_identity(self):
        q, _ = np.linalg.qr(np.random.default_rng(40).standard_normal((3, 3)))
        assert rayleigh_eigen_bounds(np.eye(3), q[:, 0], q[:, 1]) == (pytest.approx(1), pytest.approx(1))

    def test_complex_phase(self):
        r = np.array([[1, 0.05j], [-0.05j, 1]])
        s = 1 / math.sqrt(2)
        phase = np.exp(-1j * math.pi / 2)
        lo, up = rayleigh_eigen_bounds(r, [s, s * phase], [s, -s * phase])
        assert (lo, up) == (pytest.approx(1.05), pytest.approx(0.95))
        assert rayleigh_eigen_bounds(r) == (pytest.approx(1.05), pytest.approx(0.95))

    def test_automatic_probes_on_ar1_matrix(self):
        r = NoiseModel.ar1(0.1).statistical_covariance(1, 3).matrix
        lo, up = rayleigh_eigen_bounds(2.0 * r)
        assert lo == pytest.approx(2 * 1.1) and up == pytest.approx(2 * 0.9)
        assert largest_offdiagonal(r) == (pytest.approx(0.1), (0, 1))

    def test_probe_is_first_in_row_major_order(self):
        r = np.array([[1, 0, 0.3], [0, 1, 0.3], [0.3, 0.3, 1]])
        assert largest_offdiagonal(r)[1] == (0, 2)
        z1, z2 = correlation_probes(r)
        assert np.nonzero(z1)[0].tolist() == [0, 2]

    def test_rejects_non_unit(self):
        with pytest.raises(ValueError):
            rayleigh_eigen_bounds(np.eye(2), [1, 1], [1, -1])

    def test_sandwich(self):
        rng = np.random.default_rng(41)
        for _ in range(2000):
            g = int(rng.integers(2, 8))
            a = rng.standard_normal((g, g)) + 1j * rng.standard_normal((g, g))
            h = (a + a.conj().T) / 2
            z = [rng.standard_normal(g) + 1j * rng.standard_normal(g) for _ in range(2)]
            z = [v / np.linalg.norm(v) for v in z]
            spec = hermitian_eigenvalues(h)
            for q in rayleigh_eigen_bounds(h, *z):
                assert spec.min - 1e-12 <= q <= spec.max + 1e-12
            lo, up = rayleigh_eigen_bounds(h + g * np.eye(g))
            assert lo >= up


class TestGershgorin:
    def test_examples(self):
        assert gershgorin_bounds([[2, 1], [1, 2]]) == (3, 1)
        assert gershgorin_bounds(np.eye(4)) == (1, 1)
        up, lo = gershgorin_bounds([[1, 0.1, 0.01], [0.1, 1, 0.1], [0.01, 0.1, 1]])
        assert (up, lo) == (pytest.approx(1.2), pytest.approx(0.8))

    def test_unequal_diagonal_rejected(self):
        with pytest.raises(ValueError):
            gershgorin_bounds([[1, 0], [0, 2]])

    def test_containment(self):
        rng = np.random.default_rng(42)
        for _ in range(3000):
            g = int(rng.integers(2, 9))
            a = rng.standard_normal((g, g)) + 1j * rng.standard_normal((g, g))
            h = (a + a.conj().T) / 2
            np.fill_diagonal(h, rng.standard_normal())
            up, lo = gershgorin_bounds(h)
            spec = hermitian_eigenvalues(h)
            assert lo - 1e-12 <= spec.min and spec.max <= up + 1e-12


class TestH1Bound:
    @pytest.mark.parametrize("snr", [0.0, 0.01, 0.05, 0.3])
    def test_tight_for_two_receivers(self, snr):
        corr = receiver_corr(2)
        exact = mme_statistic([[1 + snr, snr], [snr, 1 + snr]])
        assert h1_statistic_upper_bound(corr, snr) == pytest.approx(1 + 2 * snr, rel=1e-12)
        assert exact == pytest.approx(1 + 2 * snr, rel=1e-12)

    def test_correlated_h1_noise(self):
        corr = receiver_corr(2, rho_h1=0.1)
        assert h1_statistic_upper_bound(corr, 0.05) == pytest.approx(4 / 3, rel=1e-12)

    def test_undefined_outside_validity(self):
        corr = receiver_corr(3)
        assert h1_statistic_upper_bound(corr, 1.5) is None

    def test_bounds_exact_statistic(self):
        params = SignalModelParams(oversampling=4, receivers=2, smoothing=2)
        corr = CorrelationModel.for_scenario(params, NoiseModel.ar1(0.1))
        rs = statistical_signal_covariance(params).matrix
        for snr in (0.01, 0.05, 0.1):
            up = h1_statistic_upper_bound(corr, snr)
            if up is not None:
                assert mme_statistic(snr * rs + np.eye(rs.shape[0])) <= up


class TestValidity:
    def test_white_noise_no_signal_correlation(self):
        corr = CorrelationModel(np.eye(3), np.eye(3), np.eye(3))
        assert validity_condition(corr, 100.0)

    @pytest.mark.parametrize("snr, expect", [(1.5, False), (0.5, True), (1.0, False), (0.999, True)])
    def test_three_receivers(self, snr, expect):
        assert validity_condition(receiver_corr(3), snr) is expect


class TestKappa:
    def test_receiver(self):
        assert [kappa_max_receiver(p) for p in (1, 2, 5)] == [0, 1, 4]

    @pytest.mark.parametrize("q, m, expect", [(3, 4, 2.0), (0, 4, 0.0), (0, 1, 0.0), (8, 4, 3.0), (2, 4, 1.5)])
    def test_time(self, q, m, expect):
        assert kappa_max_time(q, m) == pytest.approx(expect, abs=1e-12)

    def test_combined(self):
        assert kappa_max_combined(1, 2) == 2
        assert kappa_max_combined(2, 0) == 1
        assert kappa_max_combined(2, 2) == 5

    def test_time_brute_force(self):
        for q in range(13):
            for m in range(1, 9):
                rs = statistical_signal_covariance(SignalModelParams(m, 1.0, 1, q)).matrix.real
                assert np.allclose(rs, loop_signal_corr(1, q, m))
                sums = row_sums(rs)
                assert abs(kappa_max_time(q, m) - max(sums)) < 1e-12
                middle = (q + 2) // 2 - 1  # floor((g+1)/2), 1-based
                assert abs(sums[middle] - max(sums)) < 1e-12

    def test_combined_brute_force(self):
        for p in range(1, 4):
            for q in range(7):
                for m in range(1, 6):
                    sums = row_sums(loop_signal_corr(p, q, m))
                    assert abs(kappa_max(p, q, m) - max(sums)) < 1e-12
                    if p > 1:
                        assert abs(kappa_max_combined(p, kappa_max_time(q, m)) - max(sums)) < 1e-12

    @given(st.integers(0, 30), st.integers(1, 10))
    def test_time_nondecreasing(self, q, m):
        assert 0 <= kappa_max_time(q, m) <= kappa_max_time(q + 1, m)


class TestWall:
    def test_receiver_case(self):
        rep = snr_wall_lower_bound(ALPHA_005, 1.0)
        assert rep.defined
        assert rep.wall_linear == pytest.approx(0.0526316, abs=5e-8)
        assert rep.wall_db == pytest.approx(-12.788, abs=1e-3)
        assert math.isinf(rep.validity_snr_cap)
        assert rep.to_dict()["validity_snr_cap"] == "unbounded"

    def test_time_case_with_ar1_correlation(self):
        # the AR(1) matrix's largest correlation is 0.1
        rep = wall_bound(1, 3, 4, 0.1)
        assert rep.kappa_max == 2
        assert rep.validity_snr_cap == 1
        assert rep.wall_db == pytest.approx(-12.788, abs=1e-3)

    def test_time_case_kappa_two_with_rho_005(self):
        rep = snr_wall_lower_bound(ALPHA_005, 2.0)
        assert rep.wall_linear == pytest.approx(0.1 / 3.9, rel=1e-12)  # (alpha-1)/(3+alpha) = (0.1/0.95)/(3.9/0.95)

    def test_vanishing_coloring(self):
        assert snr_wall_lower_bound(1 + 1e-12, 1.0).wall_linear < 1e-12

    def test_kappa_below_one(self):
        rep = wall_bound(1, 0, 4, 0.05)
        assert not rep.defined and rep.kappa_max == 0
        assert "< 1" in rep.reason
        assert rep.to_dict()["wall_db"] is None

    def test_rho_out_of_range_reported(self):
        assert not wall_bound(2, 0, 4, 0.0).defined
        assert not wall_bound(2, 0, 4, 1.0).defined

    def test_alpha_must_exceed_one(self):
        with pytest.raises(ValueError):
            snr_wall_lower_bound(1.0, 1.0)

    @given(st.floats(1.0001, 1e6), st.floats(1, 50))
    def test_wall_always_under_cap(self, a, k):
        # (a-1)/(1+k+a(k-1)) < 1/(k-1)  <=>  2k > 0
        rep = snr_wall_lower_bound(a, k)
        assert rep.defined and 0 < rep.wall_linear < rep.validity_snr_cap

    def test_dict_keys(self):
        assert set(snr_wall_lower_bound(2.0, 2.0).to_dict()) == {
            "kappa_max", "alpha_max", "validity_snr_cap", "wall_linear", "wall_db", "defined"
        }

    @given(st.floats(1.001, 5), st.floats(1.001, 5), st.floats(1, 6))
    def test_increasing_in_alpha(self, a, b, k):
        assume(a < b * (1 - 1e-9))
        assert snr_wall_lower_bound(a, k).wall_linear < snr_wall_lower_bound(b, k).wall_linear

    @given(st.floats(1.001, 5), st.floats(1, 6), st.floats(1, 6))
    def test_decreasing_in_kappa(self, a, k1, k2):
        assume(k1 < k2 * (1 - 1e-9))
        assert snr_wall_lower_bound(a, k1).wall_linear > snr_wall_lower_bound(a, k2).wall_linear

    @pytest.mark.parametrize("p, q, rho", [(2, 0, 0.05), (1, 3, 0.1), (1, 3, 0.05), (1, 4, 0.1), (2, 2, 0.1), (3, 0, 0.2)])
    def test_closed_form_matches_inequality_scan(self, p, q, rho):
        params = SignalModelParams(oversampling=4, receivers=p, smoothing=q)
        corr = CorrelationModel.for_scenario(params, NoiseModel.white())
        rep = wall_bound(p, q, 4, rho)
        assert rep.defined
        assert general_wall_bound(corr, rho) == pytest.approx(rep.wall_linear, rel=1e-9)


class TestNonrobustness:
    def test_receiver_examples(self):
        corr = receiver_corr(2)
        assert nonrobustness_inequality(corr, 0.05, 0.05)
        assert not nonrobustness_inequality(corr, 0.06, 0.05)

    def test_vanishing_correlation(self):
        corr = receiver_corr(2)
        for snr in (1e-6, 0.01, 0.5):
            assert not nonrobustness_inequality(corr, snr, 1e-9)

    def test_error_kinds(self):
        with pytest.raises(BoundValidityError):
            nonrobustness_inequality(receiver_corr(3), 1.5, 0.05)
        with pytest.raises(ValueError) as exc:
            nonrobustness_inequality(receiver_corr(2), 0.05, 1.0)
        assert not isinstance(exc.value, BoundValidityError)

    @given(st.integers(2, 4), st.floats(0.01, 0.6), st.floats(0, 1 - 1e-9))
    def test_consistent_with_wall(self, p, rho, frac):
        rep = wall_bound(p, 0, 4, rho)
        assume(rep.defined)
        corr = CorrelationModel.for_scenario(SignalModelParams(receivers=p), NoiseModel.white())
        assert nonrobustness_inequality(corr, frac * rep.wall_linear, rho)
