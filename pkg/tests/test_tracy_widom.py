import math

import numpy as np
import pytest

from sensing.detectors import h0_spectrum
from sensing.errors import DomainError
from sensing.rng import derive_seed
from sensing.tracy_widom import (
    TABLE_KNOTS, Tw2Table, default_table, tw2_cdf, tw2_quantile, wishart_params, wishart_standardize,
)

PUBLISHED = [(-3.70, 0.01), (-2.90, 0.1), (-1.80, 0.5), (-0.60, 0.9), (-0.23, 0.95),
             (0.49, 0.99), (1.32, 0.999), (2.06, 0.9999), (2.68, 0.99999)]


class TestTable:
    @pytest.mark.parametrize("t,f", PUBLISHED)
    def test_knots_exact(self, t, f):
        assert tw2_cdf(t) == f
        assert tw2_quantile(f) == t

    def test_nine_knots(self):
        assert len(TABLE_KNOTS) >= 9
        assert default_table().describe()["tw2_knots"] == str(len(TABLE_KNOTS))

    def test_monotone_cdf(self):
        ts = np.linspace(-6.0, 5.0, 400)
        values = [tw2_cdf(t) for t in ts]
        assert np.all(np.diff(values) >= 0)
        assert all(1e-12 <= v <= 1 - 1e-12 for v in values)

    def test_quantile_inverts_cdf(self):
        for t in np.linspace(-3.6, 2.6, 50):
            assert math.isclose(tw2_quantile(tw2_cdf(t)), t, abs_tol=1e-9)

    def test_quantile_monotone_and_tails(self):
        ps = [1e-6, 1e-3, 0.05, 0.3, 0.7, 0.97, 0.9995, 1 - 1e-7]
        qs = [tw2_quantile(p) for p in ps]
        assert np.all(np.diff(qs) > 0)
        assert qs[0] < -3.70 and qs[-1] > 2.68

    @pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5])
    def test_quantile_domain(self, p):
        with pytest.raises(DomainError):
            tw2_quantile(p)

    def test_from_file(self, tmp_path):
        path = tmp_path / "tw2.txt"
        path.write_text("\n".join(f"{t} {f}" for t, f in PUBLISHED))
        table = Tw2Table.from_file(path)
        assert table.cdf(-0.23) == 0.95
        assert table.quantile(0.9999) == 2.06

    def test_rejects_unsorted(self):
        with pytest.raises(ValueError):
            Tw2Table([(0.0, 0.5), (-1.0, 0.6)])


class TestWishartParams:
    def test_unit(self):
        w = wishart_params(1, 1)
        assert w.mu == 4.0
        assert math.isclose(w.nu, 2 * 2 ** (1 / 3), rel_tol=1e-12)

    def test_sixty_four_by_two_hundred(self):
        w = wishart_params(64, 200)
        assert math.isclose(w.mu, 490.273, abs_tol=1e-3)
        assert math.isclose(w.nu, 12.856, abs_tol=1e-3)

    def test_square(self):
        M = 25
        w = wishart_params(M, M)
        assert math.isclose(w.mu, 4 * M)
        assert math.isclose(w.nu, 2 * math.sqrt(M) * (2 / math.sqrt(M)) ** (1 / 3))

    def test_domain(self):
        with pytest.raises(DomainError):
            wishart_params(0, 10)


def test_standardized_largest_eigenvalue_law():
    M, N, trials = 64, 200, 1000
    t = [wishart_standardize(N * h0_spectrum(M, N, derive_seed(11, i)).max, M, N)
         for i in range(trials)]
    # finite-size shift of the law; band wider than the asymptotic one
    assert abs(np.mean(np.array(t) <= -0.23) - 0.95) <= 0.05
