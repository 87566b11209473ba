import numpy as np
import pytest

from greenmat import core, metrics
from greenmat._verify import naive_conn_metric, naive_grad_metric, naive_sum_abs, naive_sum_sq


class TestSadMse:
    def test_identical(self):
        m = core.make_rng(0).uniform(size=(8, 8))
        assert metrics.sad(m, m) == 0.0
        assert metrics.mse(m, m) == 0.0

    def test_full_disagreement_10x10(self):
        pred = np.zeros((10, 10))
        gt = np.ones((10, 10))
        assert abs(metrics.sad(pred, gt) - 0.1) < 1e-15
        assert abs(metrics.mse(pred, gt) - 1.0) < 1e-15

    def test_half_constant_mse(self):
        assert abs(metrics.mse(np.full((4, 4), 0.5), np.zeros((4, 4))) - 0.25) < 1e-15

    def test_reference_accumulation(self):
        rng = core.make_rng(1)
        a = rng.uniform(size=(8, 8))
        b = rng.uniform(size=(8, 8))
        # summation order differs (pairwise vs sequential), so "exact" means
        # agreement to the last couple of ulps
        assert abs(metrics.sad(a, b) - naive_sum_abs(a, b) / 1000.0) < 1e-15
        assert abs(metrics.mse(a, b) - naive_sum_sq(a, b) / 64.0) < 1e-15

    def test_symmetry(self):
        rng = core.make_rng(2)
        a = rng.uniform(size=(6, 6))
        b = rng.uniform(size=(6, 6))
        assert metrics.sad(a, b) == metrics.sad(b, a)
        assert metrics.mse(a, b) == metrics.mse(b, a)

    def test_scaling(self):
        rng = core.make_rng(3)
        diff = rng.uniform(size=(8, 8)) * 0.2
        base = np.full((8, 8), 0.4)
        assert abs(metrics.sad(base + diff, base) * 2 - metrics.sad(base + 2 * diff, base)) < 1e-12
        assert abs(metrics.mse(base + 0.1, base) * 4 - metrics.mse(base + 0.2, base)) < 1e-12

    def test_shape_mismatch(self):
        with pytest.raises(ValueError, match="shape mismatch"):
            metrics.sad(np.zeros((2, 2)), np.zeros((3, 3)))


class TestGradMetric:
    def test_identical(self):
        m = core.make_rng(4).uniform(size=(16, 16))
        assert metrics.grad_metric(m, m) == 0.0

    def test_constants_have_zero_gradient_fields(self):
        assert metrics.grad_metric(np.full((12, 12), 0.2), np.full((12, 12), 0.9)) < 1e-20

    def test_step_vs_blurred_step_matches_oracle(self):
        pred = np.zeros((16, 16))
        pred[:, 8:] = 1.0
        from scipy.ndimage import gaussian_filter

        gt = gaussian_filter(pred, 1.0, mode="nearest")
        assert abs(metrics.grad_metric(pred, gt) - naive_grad_metric(pred, gt)) < 1e-6

    def test_random_pairs_match_oracle(self):
        rng = core.make_rng(5)
        for _ in range(3):
            a = rng.uniform(size=(16, 16))
            b = rng.uniform(size=(16, 16))
            assert abs(metrics.grad_metric(a, b) - naive_grad_metric(a, b)) < 1e-6

    def test_symmetry(self):
        rng = core.make_rng(6)
        a = rng.uniform(size=(12, 12))
        b = rng.uniform(size=(12, 12))
        assert abs(metrics.grad_metric(a, b) - metrics.grad_metric(b, a)) < 1e-15

    def test_bad_sigma(self):
        with pytest.raises(ValueError):
            metrics.grad_metric(np.zeros((4, 4)), np.zeros((4, 4)), sigma=0.0)


class TestConnMetric:
    def test_identical(self):
        m = core.make_rng(7).uniform(size=(16, 16))
        assert metrics.conn_metric(m, m) == 0.0

    def test_missing_interior_pixel_matches_oracle(self):
        gt = np.zeros((8, 8))
        gt[2:6, 2:6] = 1.0
        pred = gt.copy()
        pred[4, 4] = 0.0
        lib = metrics.conn_metric(pred, gt)
        assert abs(lib - naive_conn_metric(pred, gt)) < 1e-9
        assert lib > 0.0

    def test_speckle_worse_than_missing_pixel(self):
        gt = np.zeros((8, 8))
        gt[2:6, 2:6] = 1.0
        missing = gt.copy()
        missing[4, 4] = 0.0
        speckle = np.zeros((8, 8))
        speckle[::2, ::2] = 1.0
        assert metrics.conn_metric(speckle, gt) > metrics.conn_metric(missing, gt)

    def test_random_pairs_match_oracle(self):
        rng = core.make_rng(8)
        for _ in range(3):
            a = rng.uniform(size=(16, 16))
            b = rng.uniform(size=(16, 16))
            assert abs(metrics.conn_metric(a, b) - naive_conn_metric(a, b)) < 1e-6

    def test_symmetric_for_intersection_source(self):
        # with the source region taken from the intersection of both
        # binarized mattes, swapping pred and gt swaps the two penalty
        # fields inside an absolute value, so this variant is symmetric
        rng = core.make_rng(9)
        for _ in range(3):
            a = rng.uniform(size=(8, 8))
            b = rng.uniform(size=(8, 8))
            assert abs(metrics.conn_metric(a, b) - metrics.conn_metric(b, a)) < 1e-12

    def test_bad_step(self):
        with pytest.raises(ValueError):
            metrics.conn_metric(np.zeros((4, 4)), np.zeros((4, 4)), step=0.0)


class TestGradCheck:
    def test_sum_of_squares(self):
        x = core.make_rng(10).normal(size=(4, 4))
        err = metrics.grad_check(lambda v: float((v**2).sum()), x, 2.0 * x)
        assert err < 1e-6

    def test_l1_mean_away_from_kinks(self):
        rng = core.make_rng(11)
        x = rng.choice([-1.0, 1.0], size=(4, 4)) * rng.uniform(0.1, 1.0, size=(4, 4))
        g = np.sign(x) / x.size
        err = metrics.grad_check(lambda v: float(np.abs(v).mean()), x, g)
        assert err < 1e-3

    def test_constant_function(self):
        x = np.ones((3, 3))
        err = metrics.grad_check(lambda v: 1.0, x, np.zeros((3, 3)))
        assert err == 0.0

    def test_non_finite_objective(self):
        with pytest.raises(ValueError):
            metrics.grad_check(lambda v: float("nan"), np.ones((2, 2)), np.zeros((2, 2)))

    def test_wrong_gradient_detected(self):
        x = core.make_rng(12).normal(size=(3, 3))
        err = metrics.grad_check(lambda v: float((v**2).sum()), x, 3.0 * x)
        assert err > 0.1


class TestReport:
    def test_summary_is_mean_of_per_image(self):
        rng = core.make_rng(13)
        report = metrics.MetricsReport()
        for i in range(3):
            pred = rng.uniform(size=(12, 12))
            gt = rng.uniform(size=(12, 12))
            report.per_image.append(metrics.evaluate_pair(f"img{i}", pred, gt))
        s = report.summary
        for key in ("sad", "mse", "grad", "conn"):
            vals = [getattr(p, key) for p in report.per_image]
            assert abs(s[key] - np.mean(vals)) < 1e-12

    def test_json_schema(self):
        report = metrics.MetricsReport(
            per_image=[metrics.evaluate_pair("a", np.zeros((4, 4)), np.zeros((4, 4)))]
        )
        d = report.to_json_dict()
        assert set(d) == {"summary", "per_image"}
        assert set(d["summary"]) == {"sad", "mse", "grad", "conn"}
        assert d["per_image"][0]["name"] == "a"

    def test_table_has_aligned_mean_row(self):
        report = metrics.MetricsReport(
            per_image=[metrics.evaluate_pair("x", np.zeros((4, 4)), np.ones((4, 4)))]
        )
        table = report.to_table()
        assert "MEAN" in table and "sad" in table
