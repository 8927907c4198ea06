import numpy as np
import pytest

from fracteig.closedform1d import first_1d, sample, second_1d, third_1d
from fracteig.geometry import build_disk, build_interval


def test_constants_at_half():
    ex2 = second_1d(0.5)
    assert ex2.a == pytest.approx(1.0 / 3.0, abs=1e-15)
    assert ex2.lam == pytest.approx(np.sqrt(3.0), abs=1e-15)
    ex3 = third_1d(0.5)
    assert ex3.a == pytest.approx(1.0 / 5.0, abs=1e-15)
    assert ex3.lam == pytest.approx(np.sqrt(5.0), abs=1e-15)


def test_constants_at_one():
    ex2 = second_1d(1.0)
    assert ex2.a == pytest.approx(0.5, abs=1e-15)
    assert ex2.lam == pytest.approx(2.0, abs=1e-15)
    ex3 = third_1d(1.0)
    assert ex3.a == pytest.approx(1.0 / 3.0, abs=1e-15)
    assert ex3.lam == pytest.approx(3.0, abs=1e-15)


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.9])
def test_break_point_left_of_midpoint(alpha):
    assert second_1d(alpha).a < 0.5
    assert third_1d(alpha).a < 1.0 / 3.0


def test_first_values():
    ex = first_1d(0.5)
    assert ex.lam == 1.0
    assert ex(np.array([1.0]))[0] == pytest.approx(1.0)
    assert ex(np.array([0.5]))[0] == pytest.approx(0.5)
    ex1 = first_1d(1.0)
    # piecewise rational in the distances: min(x,2-x)/(min(x,2-x)+|x-1|)
    assert ex1(np.array([0.25]))[0] == pytest.approx(0.25)


def test_second_break_values():
    ex = second_1d(0.5)
    np.testing.assert_allclose(ex(np.array([ex.a, 1.0])), [1.0, 0.0], atol=1e-15)
    # the sqrt cusp at the break turns the 1 ulp rounding of 2-a into ~1e-8
    np.testing.assert_allclose(ex(np.array([2.0 - ex.a])), [-1.0], atol=1e-7)


def test_second_antisymmetry_exact_on_dyadic_points():
    ex = second_1d(0.5)
    x = np.arange(1, 256) / 128.0
    assert np.array_equal(ex(2.0 - x), -ex(x))


def test_third_break_values_and_symmetry():
    ex = third_1d(0.5)
    pts = np.array([ex.a, (1.0 + ex.a) / 2.0, 1.0])
    np.testing.assert_allclose(ex(pts), [1.0, 0.0, -1.0], atol=1e-15)
    x = np.arange(1, 256) / 128.0
    assert np.array_equal(ex(2.0 - x), ex(x))


def test_third_nodal_interval_lengths():
    ex = third_1d(0.5)
    outer = (1.0 + ex.a) / 2.0
    middle = (3.0 - ex.a) / 2.0 - outer
    assert middle == pytest.approx(0.8)
    assert outer == pytest.approx(0.6)
    assert middle > outer


def test_evaluators_vanish_outside():
    x = np.array([-0.5, 0.0, 2.0, 2.5])
    for ex in (first_1d(0.5), second_1d(0.5), third_1d(0.7)):
        np.testing.assert_array_equal(ex(x), np.zeros(4))


@pytest.mark.parametrize("alpha", [0.0, -0.2, 1.2])
def test_alpha_validation(alpha):
    for make in (first_1d, second_1d, third_1d):
        with pytest.raises(ValueError, match="alpha must lie in"):
            make(alpha)


def test_sample_zero_extension_and_values():
    ex = second_1d(0.5)
    dom = build_interval(0.0, 2.0, 1 / 16)
    u = sample(ex, dom)
    assert u.zero_extended
    assert np.all(u.flat()[~dom.inside_flat] == 0.0)
    xs = dom.inside_coords[:, 0]
    np.testing.assert_array_equal(u.inside_values(), ex(xs))


def test_sample_domain_validation():
    ex = second_1d(0.5)
    with pytest.raises(ValueError, match="canonical 1D interval grid"):
        sample(ex, build_disk((0.0, 0.0), 1.0, 0.25))
    with pytest.raises(ValueError, match="the profiles live on"):
        sample(ex, build_interval(0.0, 1.0, 0.125))


def test_sampled_max_sits_next_to_break_point():
    ex = second_1d(0.5)
    for h in (1 / 50, 1 / 100):
        dom = build_interval(0.0, 2.0, h)
        u = sample(ex, dom)
        xmax = dom.inside_coords[np.argmax(u.inside_values()), 0]
        assert abs(xmax - ex.a) <= h
