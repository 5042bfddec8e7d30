import numpy as np
import pytest
from numpy.testing import assert_allclose

from effaction import (
    CoordinateMap,
    ModelSpec,
    PathGrid,
    check_action_invariance,
    check_scalar,
    check_tensor,
    gamma1_numeric,
    pushforward_model,
    pushforward_path,
)
from effaction.errors import DomainError, NonMonotoneMapError
from effaction.reparam import relative_defect
from effaction.tracelog import FrequencyProfile, bump_path

SINH = ("sinh(y)", (-2.3, 2.3))


@pytest.fixture
def sinh_map():
    return CoordinateMap.parse(*SINH)


@pytest.fixture
def linear_map():
    return CoordinateMap.parse("2*y", (-2.0, 2.0))


class TestCoordinateMap:
    def test_direction(self):
        assert CoordinateMap.parse("sinh(y)", (-1, 1)).direction == 1
        assert CoordinateMap.parse("-y^3 - y", (-1, 1)).direction == -1

    @pytest.mark.parametrize("source", ["y^2", "y^3", "sin(y)"])
    def test_non_monotone_rejected(self, source):
        with pytest.raises(NonMonotoneMapError):
            CoordinateMap.parse(source, (-2.0, 2.0))

    def test_inverse(self, sinh_map):
        assert_allclose(sinh_map.inverse(np.sinh(1.0)), 1.0, atol=1e-12)
        ys = np.linspace(-2.3, 2.3, 17)
        assert_allclose(sinh_map.inverse(sinh_map(ys)), ys, atol=1e-12)
        decreasing = CoordinateMap.parse("-2*y", (-1, 1))
        assert_allclose(decreasing.inverse(np.array([-2.0, 0.5, 2.0])), [1.0, -0.25, -1.0], atol=1e-12)

    def test_inverse_outside_image(self, linear_map):
        with pytest.raises(DomainError):
            linear_map.inverse(4.5)


class TestPushforwardModel:
    def test_identity(self, standard):
        pushed = pushforward_model(standard, CoordinateMap.identity((-5, 5)))
        xs = np.linspace(-5, 5, 21)
        assert np.array_equal(pushed.mass(xs), standard.mass(xs))
        assert np.array_equal(pushed.potential(xs), standard.potential(xs))

    def test_linear(self, standard, linear_map):
        pushed = pushforward_model(standard, linear_map)
        ys = np.linspace(-2, 2, 9)
        assert_allclose(pushed.mass(ys), 4 * standard.mass(2 * ys), rtol=1e-15)
        assert_allclose(pushed.potential(ys), standard.potential(2 * ys), rtol=1e-15)
        assert pushed.domain == (-2.0, 2.0)

    def test_sinh_on_harmonic(self, harmonic, sinh_map):
        pushed = pushforward_model(harmonic, sinh_map)
        ys = np.linspace(-2.3, 2.3, 11)
        assert_allclose(pushed.mass(ys), np.cosh(ys) ** 2, rtol=1e-14)
        assert_allclose(pushed.potential(ys), 0.5 * np.sinh(ys) ** 2, rtol=1e-14, atol=1e-300)

    def test_image_outside_domain(self, standard):
        with pytest.raises(DomainError):
            pushforward_model(standard, CoordinateMap.parse("sinh(y)", (-3, 3)))


class TestPushforwardPath:
    def test_identity(self, standard):
        path = PathGrid(0.0, 0.1, [0.0, 0.3, -1.0])
        assert_allclose(pushforward_path(path, CoordinateMap.identity((-5, 5))).values, path.values, atol=1e-12)

    def test_linear(self, linear_map):
        out = pushforward_path(PathGrid(0.0, 0.1, [0.0, 1.0, 2.0]), linear_map)
        assert_allclose(out.values, [0.0, 0.5, 1.0], atol=1e-12)
        assert out.dtau == 0.1

    def test_outside_image(self, linear_map):
        with pytest.raises(DomainError):
            pushforward_path(PathGrid(0.0, 0.1, [0.0, 5.0, 0.0]), linear_map)


class TestChecks:
    def test_identity(self, standard):
        cmap = CoordinateMap.identity((-5, 5))
        assert check_scalar(standard, cmap).max_defect == 0.0
        assert check_tensor(standard, cmap).max_defect == 0.0
        path = bump_path(0.0, 1.0, 0.5, 40.0, 801)
        assert check_action_invariance(standard, cmap, path).max_defect <= 1e-12

    def test_linear(self, standard, linear_map):
        assert check_scalar(standard, linear_map).max_defect <= 1e-12
        tensor = check_tensor(standard, linear_map)
        assert tensor.max_defect <= 1e-12
        path = PathGrid.from_function(lambda t: 1.5 * np.tanh(t), -5, 5, 801)
        assert check_action_invariance(standard, linear_map, path).max_defect <= 1e-10

    def test_sinh(self, standard, sinh_map):
        scalar, tensor = check_scalar(standard, sinh_map), check_tensor(standard, sinh_map)
        assert scalar.passed and scalar.max_defect <= 1e-9
        assert tensor.passed and tensor.max_defect <= 1e-9
        assert set(tensor.defects) == {"mass", "mass_eff", "z1"}
        assert "PASS" in scalar.line()

    def test_action_invariance_shrinks_at_second_order(self, standard, sinh_map):
        defects = []
        for n in (401, 801, 1601):
            report = check_action_invariance(standard, sinh_map, bump_path(0.0, 1.0, 0.5, 40.0, n))
            defects.append(report.max_defect)
        assert defects[-1] <= 1e-6
        assert_allclose(defects[0] / defects[1], 4.0, rtol=0.2)
        assert_allclose(defects[1] / defects[2], 4.0, rtol=0.2)

    def test_hbar_override(self, standard, sinh_map):
        path = bump_path(0.0, 1.0, 0.5, 40.0, 3201)
        assert check_action_invariance(standard, sinh_map, path, hbar=0.3).passed

    def test_relative_defect(self):
        assert relative_defect([1.0, 2.0], [1.0, 2.0]) == 0.0
        assert relative_defect([0.0, 0.0], [0.0, 0.0]) == 0.0
        assert relative_defect([1.0], [1.1]) == pytest.approx(0.1 / 1.1)


class TestProperties:
    def test_composition(self, standard):
        outer = CoordinateMap.parse("sinh(y)", (-2.0, 2.0))
        # the inner map sends the new coordinate into y; maps are always written in y
        inner_y = CoordinateMap.parse("0.5*y + 0.1*y^3", (-1.5, 1.5))
        twice = pushforward_model(pushforward_model(standard, outer), inner_y)
        once = pushforward_model(standard, outer.compose(inner_y))
        zs = np.linspace(-1.5, 1.5, 101)
        assert_allclose(twice.mass(zs), once.mass(zs), rtol=1e-10)
        assert_allclose(twice.potential(zs), once.potential(zs), rtol=1e-10)

    def test_inverse_round_trip(self, standard):
        forward = CoordinateMap.parse("sinh(y)", (-2.0, 2.0))
        back = CoordinateMap.parse("log(y + sqrt(1 + y^2))", (-3.6, 3.6))
        there = pushforward_model(standard, forward)
        again = pushforward_model(there, back)
        xs = np.linspace(-3.6, 3.6, 73)
        assert_allclose(again.mass(xs), standard.mass(xs), rtol=1e-10)
        assert_allclose(again.potential(xs), standard.potential(xs), rtol=1e-10, atol=1e-14)

    def test_gamma1_numeric_is_chart_independent(self, standard, sinh_map):
        path = bump_path(0.0, 1.0, 0.2, 250.0, 8001)
        pushed = pushforward_model(standard, sinh_map)
        ypath = pushforward_path(path, sinh_map)
        gx = gamma1_numeric(FrequencyProfile.from_path(standard, path, 1.0))
        gy = gamma1_numeric(FrequencyProfile.from_path(pushed, ypath, 1.0))
        assert abs(gx - gy) <= 1e-10
