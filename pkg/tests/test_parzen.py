import math

import numpy as np
import pytest
from scipy.integrate import trapezoid

from src.tuning.parzen import MIN_BANDWIDTH, _components, mixture_pdf, parzen_density, sample_parzen
from src.tuning.space import ParamRange

LOG_RANGE = ParamRange(lower=2.0**-10, upper=2.0**2)
LINEAR_RANGE = ParamRange(lower=0.5, upper=3.0, scale="linear")


def integral(points, dim: ParamRange) -> float:
    lo, hi = dim.bounds
    grid = np.linspace(lo, hi, 10_000)
    queries = np.clip(dim.from_scale(grid), dim.lower, dim.upper)
    density = mixture_pdf(points, dim, queries)
    return float(trapezoid(density, grid))


class TestBandwidth:
    def test_lone_point_takes_the_farther_bound(self):
        lo, hi = LINEAR_RANGE.bounds
        for point in (0.6, 1.75, 2.9):
            _, sigmas = _components([point], LINEAR_RANGE)
            assert sigmas[0] == pytest.approx(max(point - lo, hi - point))
            assert sigmas[0] >= LINEAR_RANGE.width / 2

    def test_larger_neighbour_gap(self):
        centers, sigmas = _components([1.0, 1.2, 2.0], LINEAR_RANGE)
        assert centers.tolist() == [1.0, 1.2, 2.0]
        assert sigmas.tolist() == pytest.approx([0.5, 0.8, 1.0])

    def test_order_of_points_does_not_matter(self):
        _, sigmas = _components([2.0, 1.0, 1.2], LINEAR_RANGE)
        assert sigmas.tolist() == pytest.approx([1.0, 0.5, 0.8])

    def test_repeated_points_keep_wide_outer_components(self):
        _, sigmas = _components([1.5] * 5, LINEAR_RANGE)
        floor = MIN_BANDWIDTH * LINEAR_RANGE.width
        assert sigmas[1:4].tolist() == pytest.approx([floor] * 3)
        assert sigmas[0] == pytest.approx(1.0)
        assert sigmas[4] == pytest.approx(1.5)

    def test_log_range_uses_log_distances(self):
        _, sigmas = _components([2.0**-4], LOG_RANGE)
        assert sigmas[0] == pytest.approx(6 * math.log(2))


class TestDensity:
    @pytest.mark.parametrize("query", [2.0**-10, 0.01, 1.0, 4.0])
    def test_prior_only(self, query):
        assert parzen_density([], LOG_RANGE, query) == pytest.approx(1 / (12 * math.log(2)))

    def test_outside_bounds_is_zero(self):
        assert parzen_density([0.1], LOG_RANGE, 5.0) == 0.0

    def test_peak_at_repeated_point(self):
        points = [0.05] * 6
        queries = np.geomspace(LOG_RANGE.lower, LOG_RANGE.upper, 501)
        density = mixture_pdf(points, LOG_RANGE, np.concatenate([queries, [0.05]]))
        assert density[-1] >= density[:-1].max()

    @pytest.mark.parametrize(
        "points",
        [[], [0.01], [0.001, 0.002, 3.9], [2.0**-10, 2.0**-10, 4.0], list(np.geomspace(0.001, 2, 30))],
    )
    def test_integrates_to_one_log_scale(self, points):
        assert integral(points, LOG_RANGE) == pytest.approx(1.0, abs=1e-3)

    @pytest.mark.parametrize("points", [[0.6], [1.0, 1.1, 2.9], [3.0, 3.0]])
    def test_integrates_to_one_linear_scale(self, points):
        assert integral(points, LINEAR_RANGE) == pytest.approx(1.0, abs=1e-3)


class TestSampling:
    @pytest.mark.parametrize("dim", [LOG_RANGE, LINEAR_RANGE])
    def test_draws_within_bounds(self, dim):
        rng = np.random.default_rng(0)
        for points in ([], [dim.lower, dim.upper], [float(np.sqrt(dim.lower * dim.upper))]):
            draws = sample_parzen(points, dim, 10_000, rng)
            assert draws.shape == (10_000,)
            assert np.all(draws >= dim.lower) and np.all(draws <= dim.upper)

    def test_prior_draws_are_log_uniform(self):
        draws = sample_parzen([], LOG_RANGE, 20_000, np.random.default_rng(1))
        assert np.median(np.log2(draws)) == pytest.approx(-4.0, abs=0.15)

    def test_draws_concentrate_near_points(self):
        draws = sample_parzen([0.01] * 10, LOG_RANGE, 4000, np.random.default_rng(2))
        assert np.median(draws) == pytest.approx(0.01, rel=0.2)
