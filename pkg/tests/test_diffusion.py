import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from greenmat import add_noise, build_schedule, estimate_z0, make_rng, noise_loss, noise_loss_grad, total_loss
from greenmat.metrics import grad_check


class TestBuildSchedule:
    def test_single_step(self):
        s = build_schedule(T=1, beta_start=1e-4, beta_end=1e-4)
        np.testing.assert_allclose(s.alpha_bar, [0.9999])

    def test_two_halves(self):
        s = build_schedule(T=2, beta_start=0.5, beta_end=0.5)
        np.testing.assert_allclose(s.alpha_bar, [0.5, 0.25])

    def test_default_tail_value(self):
        s = build_schedule()
        # independent 64-bit product oracle
        betas = [1e-4 + (0.02 - 1e-4) * i / 999 for i in range(1000)]
        prod = 1.0
        for b in betas:
            prod *= 1.0 - b
        assert abs(s.alpha_bar[-1] - prod) / prod < 1e-12
        assert abs(s.alpha_bar[-1] - 4.04e-5) / 4.04e-5 < 5e-3

    def test_invalid_bounds(self):
        for kwargs in (
            dict(T=0),
            dict(beta_start=0.0),
            dict(beta_start=0.3, beta_end=0.2),
            dict(beta_end=1.0),
        ):
            with pytest.raises(ValueError):
                build_schedule(**{"T": 10, "beta_start": 1e-4, "beta_end": 0.02, **kwargs})

    @given(
        st.floats(1e-6, 0.1),
        st.floats(0.1, 0.5),
        st.integers(2, 200),
    )
    @settings(max_examples=50, deadline=None)
    def test_alpha_bar_strictly_decreasing(self, b0, b1, T):
        s = build_schedule(T=T, beta_start=b0, beta_end=b1)
        assert np.all(np.diff(s.alpha_bar) < 0)
        assert np.all((s.alpha_bar > 0) & (s.alpha_bar < 1))


class TestNoising:
    def test_zero_noise(self):
        s = build_schedule(T=10)
        z0 = make_rng(0).normal(size=(3, 3, 2))
        zt = add_noise(z0, np.zeros_like(z0), 5, s)
        np.testing.assert_allclose(zt, math.sqrt(s.alpha_bar[5]) * z0)

    def test_quarter_alpha_bar_scalar(self):
        s = build_schedule(T=2, beta_start=0.5, beta_end=0.5)  # alpha_bar[1] = 0.25
        zt = add_noise(np.ones((2, 2)), np.ones((2, 2)), 1, s)
        np.testing.assert_allclose(zt, 0.5 + math.sqrt(0.75), atol=1e-12)
        z0 = estimate_z0(zt, np.ones((2, 2)), 1, s)
        np.testing.assert_allclose(z0, 1.0, atol=1e-12)

    def test_zero_signal(self):
        s = build_schedule(T=10)
        eps = make_rng(1).normal(size=(4, 4))
        zt = add_noise(np.zeros_like(eps), eps, 3, s)
        np.testing.assert_allclose(zt, math.sqrt(1 - s.alpha_bar[3]) * eps)

    def test_eps_zero_estimate(self):
        s = build_schedule(T=10)
        zt = make_rng(2).normal(size=(4, 4))
        np.testing.assert_allclose(
            estimate_z0(zt, np.zeros_like(zt), 4, s), zt / math.sqrt(s.alpha_bar[4])
        )

    def test_round_trip_random(self):
        s = build_schedule()
        rng = make_rng(3)
        for _ in range(100):
            z0 = rng.normal(size=(4, 4, 2))
            eps = rng.normal(size=(4, 4, 2))
            t = int(rng.integers(s.T))
            back = estimate_z0(add_noise(z0, eps, t, s), eps, t, s)
            rel = np.abs(back - z0) / np.maximum(np.abs(z0), 1e-8)
            assert rel.max() < 1e-5

    def test_shape_mismatch(self):
        s = build_schedule(T=4)
        with pytest.raises(ValueError, match="shape mismatch"):
            add_noise(np.zeros((2, 2)), np.zeros((3, 3)), 1, s)
        with pytest.raises(ValueError, match="shape mismatch"):
            estimate_z0(np.zeros((2, 2)), np.zeros((3, 3)), 1, s)

    def test_timestep_bounds(self):
        s = build_schedule(T=4)
        with pytest.raises(ValueError):
            add_noise(np.zeros((2, 2)), np.zeros((2, 2)), 4, s)

    def test_degenerate_schedule(self):
        from greenmat.diffusion import NoiseSchedule

        s = NoiseSchedule(
            beta=np.array([0.5]), alpha=np.array([0.5]), alpha_bar=np.array([1e-14])
        )
        with pytest.raises(ValueError, match="degenerate schedule"):
            estimate_z0(np.zeros((2, 2)), np.zeros((2, 2)), 0, s)


class TestNoiseLoss:
    def test_identical(self):
        x = make_rng(4).normal(size=(5, 5))
        assert noise_loss(x, x) == 0.0

    def test_unit_offset(self):
        x = make_rng(5).normal(size=(6, 6))
        assert abs(noise_loss(x + 1.0, x) - 1.0) < 1e-12

    def test_reference_accumulation(self):
        rng = make_rng(6)
        a = rng.normal(size=(4, 4))
        b = rng.normal(size=(4, 4))
        ref = 0.0
        for x, y in zip(a.ravel().tolist(), b.ravel().tolist()):
            ref += (x - y) ** 2
        assert abs(noise_loss(a, b) - ref / 16.0) < 1e-15

    def test_nonnegative_and_zero_iff_equal(self):
        rng = make_rng(7)
        a = rng.normal(size=(3, 3))
        b = a + rng.normal(size=(3, 3)) * 1e-3
        assert noise_loss(a, b) > 0.0

    def test_gradient_matches_finite_differences(self):
        rng = make_rng(8)
        eps = rng.normal(size=(4, 4))
        pred = eps + rng.uniform(0.2, 0.8, size=(4, 4))
        err = grad_check(lambda x: noise_loss(x, eps), pred, noise_loss_grad(pred, eps))
        assert err < 1e-3


class TestTotalLoss:
    def test_zeros(self):
        assert total_loss(0.0, 0.0, 0.0, 0.0) == 0.0

    def test_sum(self):
        assert total_loss(1.0, 2.0, 3.0, 4.0) == 10.0

    def test_non_finite(self):
        with pytest.raises(ValueError):
            total_loss(float("nan"), 0.0, 0.0, 0.0)
        with pytest.raises(ValueError):
            total_loss(0.0, float("inf"), 0.0, 0.0)


def test_schedule_export(tmp_path):
    from greenmat.core import load_tensor

    s = build_schedule(T=16)
    paths = [tmp_path / n for n in ("beta.gmt", "alpha.gmt", "abar.gmt")]
    s.save(*paths)
    np.testing.assert_allclose(load_tensor(paths[2]), s.alpha_bar, rtol=1e-6)
