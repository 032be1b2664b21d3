import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from rep_growth.core.cartan import WeightError, root_datum
from rep_growth.core.gaussian_asymptotics import (
    DegenerateModelError,
    FitError,
    UnsupportedError,
    approx_a_lambda,
    approx_b_n,
    compare_report,
    dominant_coset_points,
    fit_exponent,
    hermite_basis,
    local_clt_weight_estimate,
    typical_size_profile,
    weight_moments,
)
from rep_growth.core.tensor_growth import (
    GrowthRow,
    GrowthSeries,
    growth_series,
    iter_tables,
    make_rep_spec,
    synthetic_series,
)


def ballot(n, lam):
    """Multiplicity of the irreducible of highest weight lam in V^n for SL2"""
    k = (n - lam) // 2
    return math.comb(n, k) - (math.comb(n, k - 1) if k > 0 else 0)


def coset_mass(md, n, width=6.0):
    """Sum of local limit estimates over a box of +-width standard deviations"""
    center = n * md.mean_vector
    half = width * np.sqrt(n * np.diag(md.covariance_matrix))
    axes = [
        range(math.floor(c - h), math.ceil(c + h) + 1) for c, h in zip(center, half)
    ]
    return sum(local_clt_weight_estimate(md, n, chi) for chi in itertools.product(*axes))


class TestHermiteBasis:
    """Test cases for the lattice basis"""

    def test_rank_one(self):
        """Test a cyclic lattice"""
        assert hermite_basis([(4,), (6,), (0,)], 1) == [(2,)]

    def test_checkerboard(self):
        """Test the index-2 lattice of vectors with even coordinate sum"""
        assert hermite_basis([(2, 0), (0, 2), (1, 1)], 2) == [(1, 1), (0, 2)]

    def test_a2_root_lattice(self):
        """Test differences of the SL3 standard weights"""
        assert hermite_basis([(-2, 1), (-1, -1)], 2) == [(1, 1), (0, 3)]

    def test_rank_deficient(self):
        """Test a lattice of lower rank"""
        assert hermite_basis([(-2, 0), (2, 0)], 2) == [(2, 0)]

    def test_reduced_above_pivots(self):
        """Test that entries above pivots lie in [0, pivot)"""
        basis = hermite_basis([(1, 5), (0, 3)], 2)
        assert basis == [(1, 2), (0, 3)]


class TestWeightMoments:
    """Test cases for the single-step distribution"""

    def test_a1_standard(self, a1_standard):
        """Test mean, variance and covolume for SL2"""
        md = weight_moments(a1_standard)
        assert md.mean == (Fraction(0),)
        assert md.covariance == ((Fraction(1),),)
        assert md.covolume == 2
        assert md.spanning

    def test_torus_three_weights(self, t1_three_weights):
        """Test the exact variance 2/3"""
        md = weight_moments(t1_three_weights)
        assert md.covariance == ((Fraction(2, 3),),)
        assert md.covariance_matrix[0, 0] == pytest.approx(0.6667, abs=1e-4)
        assert md.covolume == 1
        assert md.Q[0, 0] == pytest.approx(1.5)

    def test_a2_standard(self, a2_standard):
        """Test the SL3 standard weights"""
        md = weight_moments(a2_standard)
        assert md.mean == (0, 0)
        assert md.covariance == (
            (Fraction(2, 3), Fraction(-1, 3)),
            (Fraction(-1, 3), Fraction(2, 3)),
        )
        assert md.covolume == 3
        assert np.allclose(md.Q @ md.covariance_matrix, np.eye(2), atol=1e-12)

    def test_torus_drift(self):
        """Test a nonzero mean when det V is not trivial"""
        spec = make_rep_spec(root_datum("A1xT1"), [((1, 1), 1)])
        md = weight_moments(spec)
        assert md.mean == (0, 1)
        assert not md.spanning

    def test_degenerate(self):
        """Test the null direction of a non-spanning model"""
        spec = make_rep_spec(root_datum("T2"), [((1, 0), 1), ((-1, 0), 1)])
        md = weight_moments(spec)
        assert not md.spanning
        assert md.covolume is None
        assert md.null_direction == (0, 1)
        with pytest.raises(DegenerateModelError) as info:
            local_clt_weight_estimate(md, 10, (0, 0))
        assert info.value.null_direction == (0, 1)


class TestLocalLimit:
    """Test cases for the Gaussian estimates"""

    def test_a1_center(self, a1_standard):
        """Test the local limit estimate at the origin against the binomial"""
        md = weight_moments(a1_standard)
        estimate = local_clt_weight_estimate(md, 400, (0,))
        exact = math.comb(400, 200) / 2**400
        assert abs(estimate / exact - 1) < 0.02
        assert estimate == pytest.approx(2 / math.sqrt(800 * math.pi))

    def test_off_coset_is_zero(self, a1_standard):
        """Test that unreachable parities get exactly zero"""
        md = weight_moments(a1_standard)
        assert local_clt_weight_estimate(md, 400, (1,)) == 0.0
        assert local_clt_weight_estimate(md, 401, (1,)) > 0.0

    def test_invalid_n(self, a1_standard):
        """Test that n must be positive"""
        with pytest.raises(ValueError):
            local_clt_weight_estimate(weight_moments(a1_standard), 0, (0,))

    @pytest.mark.parametrize("lam", [0, 20, 40])
    def test_filtered_a1(self, a1, a1_standard, lam):
        """Test approx_a_lambda against ballot numbers at n = 400"""
        md = weight_moments(a1_standard)
        exact = ballot(400, lam) / 2**400
        approx = approx_a_lambda(md, a1, 400, (lam,))
        assert abs(approx / exact - 1) < 0.1

    def test_b_n_a1(self, a1, a1_standard):
        """Test approx_b_n against the central binomial at n = 400"""
        md = weight_moments(a1_standard)
        exact = math.comb(400, 200) / 2**400
        assert abs(approx_b_n(md, a1, 400) / exact - 1) < 0.1

    @pytest.mark.parametrize(
        "group,summands,n",
        [
            ("A1", [((1,), 1)], 100),
            ("A1", [((1,), 1)], 400),
            ("A2", [((1, 0), 1)], 100),
            ("T1", [((1,), 1), ((0,), 1), ((-1,), 1)], 200),
        ],
    )
    def test_mass_normalization(self, group, summands, n):
        """Test that the estimates over the reachable coset sum to 1"""
        md = weight_moments(make_rep_spec(root_datum(group), summands))
        assert coset_mass(md, n) == pytest.approx(1.0, abs=0.01)

    @pytest.mark.parametrize("n", [1, 50, 200])
    def test_torus_needs_no_filter(self, t1_three_weights, n):
        """Test that with no positive roots the filtered estimate is the local limit"""
        md = weight_moments(t1_three_weights)
        rd = t1_three_weights.datum
        for chi in (-7, 0, 3, n):
            assert approx_a_lambda(md, rd, n, (chi,)) == local_clt_weight_estimate(md, n, (chi,))

    def test_a1_bulk_accuracy(self, a1, a1_standard):
        """Test the largest relative error over the bulk Q(lambda) <= 4n at n = 400"""
        md = weight_moments(a1_standard)
        n = 400
        bulk = [lam for lam in range(0, n + 1, 2) if md.quadratic((lam,)) / n <= 4]
        assert bulk[-1] == 40
        worst = max(
            abs(approx_a_lambda(md, a1, n, (lam,)) / (ballot(n, lam) / 2**n) - 1)
            for lam in bulk
        )
        assert worst < 0.05

    @pytest.mark.parametrize(
        "group,summands,n",
        [("A1", [((1,), 1)], 400), ("A2", [((1, 0), 1)], 60)],
    )
    def test_bulk_nonnegative(self, group, summands, n):
        """Test that filtered estimates are nonnegative on dominant bulk points"""
        spec = make_rep_spec(root_datum(group), summands)
        md = weight_moments(spec)
        points = dominant_coset_points(md, spec.datum, n, truncation=2.0)
        assert len(points) > 0
        assert all(approx_a_lambda(md, spec.datum, n, tuple(p)) >= 0.0 for p in points.tolist())

    def test_b_n_torus(self, t1_three_weights):
        """Test that the torus estimate of b_n (dim V)^-n is 1"""
        md = weight_moments(t1_three_weights)
        assert approx_b_n(md, t1_three_weights.datum, 200) == pytest.approx(1.0, rel=0.05)


    def test_non_dominant(self, a2, a2_standard):
        """Test that approx_a_lambda needs a dominant weight"""
        with pytest.raises(WeightError):
            approx_a_lambda(weight_moments(a2_standard), a2, 10, (-1, 2))

    def test_too_many_roots(self):
        """Test the cap on the subset expansion"""
        rd = root_datum("B4")
        md = weight_moments(make_rep_spec(rd, [((1, 0, 0, 0), 1)]))
        with pytest.raises(UnsupportedError):
            approx_a_lambda(md, rd, 10, (0, 0, 0, 0))

    def test_empty_truncation(self, a1, a1_standard, caplog):
        """Test that an empty truncation region gives zero with a warning"""
        md = weight_moments(a1_standard)
        assert len(dominant_coset_points(md, a1, 3, truncation=1e-6)) == 0
        assert approx_b_n(md, a1, 3, truncation=1e-6) == 0.0
        assert "No dominant coset points" in caplog.text

    def test_coset_points_are_dominant(self, a2, a2_standard):
        """Test the truncation region for SL3"""
        md = weight_moments(a2_standard)
        points = dominant_coset_points(md, a2, 12)
        assert len(points) > 0
        assert (points >= 0).all()
        # weights of V^n differ from n(1, 0) by the root lattice
        assert all((p[0] - 12 + 2 * p[1]) % 3 == 0 for p in points.tolist())


class TestFitExponent:
    """Test cases for the log-log fit"""

    def test_synthetic(self, a2_standard):
        """Test recovery of an injected power law"""
        report = fit_exponent(synthetic_series(a2_standard, 50, 0.7, -1.5), (10, 50))
        assert report.r_hat == pytest.approx(-1.5, abs=1e-9)
        assert report.C_hat == pytest.approx(0.7, rel=1e-9)
        assert report.residual_rms == pytest.approx(0.0, abs=1e-9)
        assert report.target == -1.5
        assert report.A_hat == pytest.approx(0.7)
        assert report.B_hat == pytest.approx(0.7)

    def test_a1_exact(self, a1_standard):
        """Test the SL2 exponent on [100, 400]"""
        report = fit_exponent(growth_series(a1_standard, 400, timing=False), (100, 400))
        assert abs(report.r_hat + 0.5) < 0.05
        assert report.A_hat <= report.B_hat

    def test_window_too_short(self, a2_standard):
        """Test the minimum window length"""
        with pytest.raises(FitError, match="too short"):
            fit_exponent(synthetic_series(a2_standard, 10, 1.0, -1.5), (2, 6))

    def test_window_not_covered(self, a2_standard):
        """Test that the series must cover the window"""
        with pytest.raises(FitError, match="missing n=11"):
            fit_exponent(synthetic_series(a2_standard, 10, 1.0, -1.5), (2, 20))

    def test_non_positive(self, a2_standard):
        """Test that zero values cannot be fitted"""
        series = GrowthSeries(
            spec=a2_standard,
            mode="normalized",
            rows=[GrowthRow(n, None, 0.0 if n == 4 else 1.0, 0, 0.0) for n in range(1, 11)],
        )
        with pytest.raises(FitError, match="n=4"):
            fit_exponent(series, (1, 10))


class TestCompareReport:
    """Test cases for the exact versus Gaussian comparison"""

    def test_a1_rows(self, a1_standard):
        """Test row layout and accuracy at n = 400"""
        comparison = compare_report(a1_standard, [100, 200, 400])
        b_rows = [row for row in comparison.rows if row.kind == "b_n"]
        assert [row.n for row in b_rows] == [100, 200, 400]
        assert 0.9 <= b_rows[-1].ratio <= 1.1
        samples = [row.weight for row in comparison.rows if row.kind == "a_lambda" and row.n == 400]
        assert samples == [(0,), (20,), (40,)]
        assert len(comparison.profiles) == 3

    def test_torus_exact_column(self, t1_three_weights):
        """Test that b_n (dim V)^-n is exactly 1 for a torus"""
        comparison = compare_report(t1_three_weights, [5, 20, 60])
        b_rows = [row for row in comparison.rows if row.kind == "b_n"]
        assert [row.n for row in b_rows] == [5, 20, 60]
        assert [row.exact for row in b_rows] == [1.0, 1.0, 1.0]
        assert b_rows[-1].approx == pytest.approx(1.0, rel=0.05)

    def test_empty_list(self, a1_standard):
        """Test that an empty n_list gives an empty report"""
        comparison = compare_report(a1_standard, [])
        assert comparison.rows == []
        assert comparison.profiles == []

    def test_degenerate(self):
        """Test that a degenerate model is rejected"""
        spec = make_rep_spec(root_datum("T2"), [((1, 0), 1), ((-1, 0), 1)])
        with pytest.raises(DegenerateModelError):
            compare_report(spec, [5])

    def test_typical_size_profile(self, a2, a2_standard):
        """Test that typical weights have length of order sqrt(n)"""
        md = weight_moments(a2_standard)
        *_, (n, table, *_) = iter_tables(a2_standard, 30)
        profile = typical_size_profile(md, a2, table)
        assert profile["n"] == 30.0
        assert 0.3 < profile["mean_scaled_length"] < 5.0
        assert 0.0 < profile["mean_dimension_exponent"] < 3.0
