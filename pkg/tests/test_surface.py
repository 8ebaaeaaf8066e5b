import numpy as np
import pytest

from autowedge.errors import DegenerateCharacteristics, NotStronglyElliptic
from autowedge.surface import (OperatorSpec, build_chart, lift_covering, sample_v_plus,
                               validate_ellipticity)


def test_screened_laplacian_has_unit_kappa():
    assert validate_ellipticity(OperatorSpec.screened(1.0)) == pytest.approx(1.0, rel=1e-9)


def test_kappa_scales_with_mass_below_one():
    # |z|^2 + m^2 over |z|^2 + 1 is minimized at z = 0 when m^2 < 1
    assert validate_ellipticity(OperatorSpec.screened(0.25)) == pytest.approx(0.25, rel=1e-6)


def test_real_frequency_helmholtz_is_rejected():
    with pytest.raises(NotStronglyElliptic) as info:
        validate_ellipticity(OperatorSpec.helmholtz(1.0))
    assert info.value.exit_status == 2
    assert info.value.code == "NOT_STRONGLY_ELLIPTIC"


def test_complex_frequency_helmholtz_is_accepted():
    assert validate_ellipticity(OperatorSpec.helmholtz(1 + 0.5j)) > 0


def test_degenerate_principal_part_is_rejected():
    with pytest.raises(NotStronglyElliptic):
        validate_ellipticity(OperatorSpec(a20=-1.0, a02=1.0, a00=1.0))


def test_mixed_derivative_is_rejected():
    with pytest.raises(ValueError):
        OperatorSpec(a20=-1.0, a02=-1.0, a00=1.0, a11=0.5)


@pytest.mark.parametrize("op", [
    OperatorSpec.screened(1.0),
    OperatorSpec.screened(4.0),
    OperatorSpec.helmholtz(1 + 0.5j),
    OperatorSpec(a20=-1.0, a02=-2.0, a00=1.0, a10=0.3, a01=-0.2),
])
def test_chart_lies_on_the_characteristic_conic(op, rng):
    chart = build_chart(op)
    w = rng.uniform(-3, 3, 200) + 1j * rng.uniform(-2, 2, 200)
    assert np.max(chart.residual(w)) < 1e-13


def test_screened_chart_parameters():
    chart = build_chart(OperatorSpec.screened(1.0))
    assert chart.c1 == 0 and chart.c2 == 0
    assert chart.r1 == pytest.approx(1j) and chart.r2 == pytest.approx(1j)


def test_conic_without_radius_is_degenerate():
    # -d1^2 - d2^2 + 2i d1 + 1 completes to (z1 - 1)^2 + z2^2 = 0: two lines
    with pytest.raises(DegenerateCharacteristics):
        build_chart(OperatorSpec(a20=-1.0, a02=-1.0, a00=1.0, a10=2j))


def test_covering_lifts_fix_their_coordinate(rng):
    chart = build_chart(OperatorSpec.helmholtz(1 + 0.5j))
    w = rng.uniform(-3, 3, 100) + 1j * rng.uniform(-2, 2, 100)
    assert np.array_equal(chart.z1(lift_covering("h1", w)), chart.z1(w))
    assert np.max(np.abs(chart.z2(lift_covering("h2", w)) - chart.z2(w))) < 1e-14


def test_covering_lifts_are_involutions_whose_composition_is_the_shift(rng):
    w = rng.uniform(-3, 3, 100) + 1j * rng.uniform(-2, 2, 100)
    assert np.array_equal(lift_covering("h1", lift_covering("h1", w)), w)
    ulp = 4 * np.finfo(float).eps * (np.pi + np.abs(w))
    assert np.all(np.abs(lift_covering("h2", lift_covering("h2", w)) - w) <= ulp)
    assert np.all(np.abs(lift_covering("h2", lift_covering("h1", w)) - lift_covering("h", w)) <= ulp)


def test_unknown_covering_map():
    with pytest.raises(ValueError):
        lift_covering("h3", 0.0)


def test_preimage_of_z2_round_trips(rng):
    chart = build_chart(OperatorSpec.helmholtz(1 + 0.5j))
    z2 = rng.uniform(-3, 3, 100) + 1j * rng.uniform(0.1, 3, 100)
    w = chart.w_from_z2(z2)
    assert np.max(np.abs(chart.z2(w) - z2)) < 1e-12
    assert np.all(chart.in_region(w))
    a, b = chart.w_pair_from_z2(z2)
    assert np.max(np.abs(chart.z2(b) - z2)) < 1e-12


def test_preimage_of_t_round_trips(rng):
    chart = build_chart(OperatorSpec.screened(1.0))
    z2 = rng.uniform(-3, 3, 50) + 1j * rng.uniform(0.1, 3, 50)
    w = chart.w_from_z2(z2)
    w2 = chart.w_from_t(np.exp(2j * w))
    assert np.max(np.abs(np.exp(2j * w2) - np.exp(2j * w))) < 1e-12
    assert np.max(np.abs(chart.z2(w2) - z2)) < 1e-10


def test_sampled_points_lie_in_the_positive_part(rng):
    chart = build_chart(OperatorSpec.screened(1.0))
    w = sample_v_plus(chart, 50, rng)
    assert w.shape == (50,)
    assert np.all(chart.z1(w).imag > 0) and np.all(chart.z2(w).imag > 0)
