import numpy as np
import pytest

from pmsdr import (
    BUILTIN_FAMILIES,
    InputError,
    loss_derivative,
    loss_spec,
    loss_value,
)
from pmsdr.losses import PARAMETRIC_FAMILIES, WEIGHTED_FAMILIES

THETA = 0.3


def spec_for(family):
    theta = THETA if family in PARAMETRIC_FAMILIES else None
    return loss_spec(family, theta=theta)


class TestValues:
    def test_hinge_vanishes_at_margin_one(self):
        assert loss_value(spec_for("svm"), 1.0) == 0.0

    def test_logistic_at_zero(self):
        assert loss_value(spec_for("logit"), 0.0) == pytest.approx(np.log(2.0), abs=1e-12)

    def test_logistic_stable_for_large_negative_margin(self):
        v = loss_value(spec_for("logit"), -750.0)
        assert np.isfinite(v) and v == pytest.approx(750.0, rel=1e-12)

    def test_check_loss_median_is_half_abs(self):
        spec = loss_spec("qr", theta=0.5)
        assert loss_value(spec, -2.0) == pytest.approx(1.0)
        u = np.linspace(-3, 3, 41)
        assert np.allclose(loss_value(spec, u), 0.5 * np.abs(u))

    def test_weighted_hinge(self):
        spec = loss_spec("wsvm", theta=0.3)
        # pi(-1) = 1 - 0.3 times hinge(0) = 1
        assert loss_value(spec, 0.0, y=-1.0) == pytest.approx(0.7)
        assert loss_value(spec, 0.0, y=1.0) == pytest.approx(0.3)

    def test_l2svm_and_lssvm(self):
        assert loss_value(spec_for("l2svm"), -1.0) == pytest.approx(4.0)
        assert loss_value(spec_for("l2svm"), 2.0) == 0.0
        assert loss_value(spec_for("lssvm"), 2.0) == pytest.approx(1.0)

    def test_asls_is_nonnegative_both_sides(self):
        spec = loss_spec("asls", theta=0.3)
        assert loss_value(spec, 2.0) == pytest.approx(0.3 * 4.0)
        assert loss_value(spec, -2.0) == pytest.approx(0.7 * 4.0)

    @pytest.mark.parametrize("family", BUILTIN_FAMILIES)
    def test_values_nonnegative_and_finite(self, family):
        spec = spec_for(family)
        u = np.linspace(-20, 20, 201)
        y = np.where(np.arange(201) % 2 == 0, 1.0, -1.0)
        v = loss_value(spec, u, y)
        assert np.isfinite(v).all()
        assert (v >= 0).all()

    def test_custom(self):
        spec = loss_spec("custom", custom_fn=lambda u: u**2)
        assert loss_value(spec, 3.0) == pytest.approx(9.0)

    def test_custom_nonfinite_rejected(self):
        spec = loss_spec("custom", custom_fn=lambda u: np.log(u))
        with pytest.raises(InputError):
            loss_value(spec, -1.0)


class TestDerivatives:
    def test_hinge_kink_convention(self):
        spec = spec_for("svm")
        assert loss_derivative(spec, 0.0) == -1.0
        assert loss_derivative(spec, 2.0) == 0.0
        assert loss_derivative(spec, 1.0) == 0.0

    def test_lssvm_slope(self):
        assert loss_derivative(spec_for("lssvm"), 0.5) == pytest.approx(-1.0)

    def test_check_loss_right_derivative_at_kink(self):
        spec = loss_spec("qr", theta=THETA)
        assert loss_derivative(spec, 0.0) == pytest.approx(THETA)

    def test_custom_central_difference(self):
        spec = loss_spec("custom", custom_fn=lambda u: u**2)
        assert loss_derivative(spec, 3.0) == pytest.approx(6.0, abs=1e-5)

    @pytest.mark.parametrize("family", BUILTIN_FAMILIES)
    def test_matches_central_difference_away_from_kinks(self, family):
        spec = spec_for(family)
        rng = np.random.default_rng(hash(family) % 2**32)
        u = rng.uniform(-4, 4, 1000)
        # keep 1e-3 clear of the kink locations (1 for hinges, 0 for residual losses)
        u = u[(np.abs(u - 1.0) >= 1e-3) & (np.abs(u) >= 1e-3)]
        y = np.where(rng.standard_normal(len(u)) > 0, 1.0, -1.0)
        analytic = loss_derivative(spec, u, y)
        delta = 1e-6 * np.maximum(1.0, np.abs(u))
        numeric = (loss_value(spec, u + delta, y) - loss_value(spec, u - delta, y)) / (2 * delta)
        assert np.abs(analytic - numeric).max() <= 1e-5 * (1 + np.abs(analytic).max())


class TestProperties:
    @pytest.mark.parametrize("family", BUILTIN_FAMILIES)
    def test_convexity_spot_check(self, family):
        spec = spec_for(family)
        rng = np.random.default_rng(abs(hash(family)) % 2**32)
        for _ in range(200):
            u1, u2 = rng.uniform(-6, 6, 2)
            t = rng.uniform(0, 1)
            y = 1.0 if rng.uniform() < 0.5 else -1.0
            mid = loss_value(spec, t * u1 + (1 - t) * u2, y)
            bound = t * loss_value(spec, u1, y) + (1 - t) * loss_value(spec, u2, y)
            assert mid <= bound + 1e-12

    @pytest.mark.parametrize("family", ["wsvm", "wlogit", "wl2svm", "wlssvm"])
    def test_half_weight_is_half_unweighted(self, family):
        base = loss_spec(family[1:])
        weighted = loss_spec(family, theta=0.5)
        u = np.linspace(-5, 5, 101)
        for y in (1.0, -1.0):
            yv = np.full_like(u, y)
            assert np.allclose(loss_value(weighted, u, yv), 0.5 * loss_value(base, u))

    def test_weighted_requires_binary_y(self):
        spec = loss_spec("wsvm", theta=0.4)
        with pytest.raises(InputError):
            loss_value(spec, 0.0, y=0.5)
        with pytest.raises(InputError):
            loss_value(spec, 0.0)


class TestSpecValidation:
    def test_unknown_family_lists_catalog(self):
        with pytest.raises(InputError) as exc:
            loss_spec("nosuch")
        for name in BUILTIN_FAMILIES:
            assert name in str(exc.value)

    @pytest.mark.parametrize("family", WEIGHTED_FAMILIES + ("qr", "asls"))
    @pytest.mark.parametrize("theta", [None, 0.0, 1.0, -0.2])
    def test_theta_range(self, family, theta):
        with pytest.raises(InputError):
            loss_spec(family, theta=theta)

    def test_custom_needs_fn(self):
        with pytest.raises(InputError):
            loss_spec("custom")
