import math
import os
import sys

import numpy as np
import pytest

# Add src directory to Python path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))


def _square_well():
    from gibbsdyn.potentials import SquareWell
    return SquareWell(depth=0.3, hard_core=0.5, range=1.0)


def test_square_well_profile():
    pot = _square_well()
    assert pot.phi(0.8) == pytest.approx(-0.3)
    assert pot.phi(2.0) == 0.0
    assert math.isinf(pot.phi(0.4))
    np.testing.assert_allclose(pot.phi(np.array([0.6, 1.0, 5.0])), [-0.3, 0.0, 0.0])


def test_every_shape_vanishes_beyond_range():
    from gibbsdyn.potentials import Ideal, SmoothBump, SoftRepulsive

    for pot in (_square_well(), Ideal(), SmoothBump(amplitude=0.4, center=1.0, width=0.5),
                SoftRepulsive(amplitude=2.0, range=1.2)):
        assert pot.phi(pot.range + 1.0) == 0.0


def test_invalid_potentials_rejected():
    from gibbsdyn.potentials import SmoothBump, SoftRepulsive, SquareWell

    with pytest.raises(ValueError):
        SquareWell(depth=0.3, hard_core=0.0, range=1.0)
    with pytest.raises(ValueError):
        SmoothBump(amplitude=1.0, center=0.5, width=1.0)
    with pytest.raises(ValueError):
        SoftRepulsive(amplitude=-1.0)
    with pytest.raises(ValueError):
        SquareWell(depth=0.3, hard_core=2.0, range=1.0)


def test_smooth_bump_range_is_derived():
    from gibbsdyn.potentials import SmoothBump

    pot = SmoothBump(amplitude=0.5, center=1.0, width=0.5)
    assert pot.range == pytest.approx(1.5)
    assert pot.phi(1.0) == pytest.approx(-0.5)
    assert pot.phi_min == pytest.approx(-0.5)


@pytest.mark.parametrize("r", [0.3, 0.7, 1.1])
def test_derivatives_match_finite_differences(r):
    from gibbsdyn.potentials import SmoothBump, SoftRepulsive

    h = 1e-5
    for pot in (SoftRepulsive(amplitude=1.0, range=1.5), SmoothBump(amplitude=0.5, center=0.0, width=1.2)):
        numeric = (pot.phi(r + h) - pot.phi(r - h)) / (2 * h)
        assert pot.dphi(r) == pytest.approx(numeric, rel=1e-6, abs=1e-9)
        numeric2 = (pot.dphi(r + h) - pot.dphi(r - h)) / (2 * h)
        assert pot.d2phi(r) == pytest.approx(numeric2, rel=1e-5, abs=1e-8)


def test_gradient_points_along_displacement():
    from gibbsdyn.potentials import SoftRepulsive

    pot = SoftRepulsive(amplitude=1.0, range=1.5)
    delta = np.array([0.3, 0.4])
    grad = pot.gradient(delta)
    np.testing.assert_allclose(grad, pot.dphi(0.5) * delta / 0.5)


def test_hard_core_potentials_have_no_gradient():
    from gibbsdyn.errors import NotSmooth

    with pytest.raises(NotSmooth):
        _square_well().gradient(np.array([0.7, 0.0]))


def test_relative_energy_examples():
    from gibbsdyn.geometry import Configuration, TorusBox
    from gibbsdyn.potentials import relative_energy

    box = TorusBox(2, 10.0)
    pot = _square_well()
    assert relative_energy([1.0, 1.0], Configuration(box), pot) == 0.0
    config = Configuration(box, [[5.0, 5.0]])
    assert relative_energy([5.8, 5.0], config, pot) == pytest.approx(-0.3)
    assert math.isinf(relative_energy([5.2, 5.0], config, pot))


@pytest.mark.parametrize("attach", [False, True])
def test_relative_energy_matches_direct_sum(attach):
    from gibbsdyn.geometry import Configuration, TorusBox
    from gibbsdyn.potentials import SoftRepulsive, relative_energy, relative_energy_many

    box = TorusBox(2, 4.0)
    pot = SoftRepulsive(amplitude=1.0, range=1.5)
    rng = np.random.default_rng(10)
    config = Configuration(box, box.uniform(rng, 20))
    if attach:
        config.attach(pot.range)
    xs = box.uniform(rng, 15)
    for x in xs:
        direct = sum(pot.phi(box.dist(x, p)) for p in config.points)
        assert relative_energy(x, config, pot) == pytest.approx(direct, abs=1e-12)
    direct_many = [sum(pot.phi(box.dist(x, p)) for p in config.points) for x in xs]
    np.testing.assert_allclose(relative_energy_many(xs, config, pot), direct_many, atol=1e-12)


def test_energy_delta_swap_trivial_cases():
    from gibbsdyn.geometry import Configuration, TorusBox
    from gibbsdyn.potentials import Ideal, energy_delta_swap

    box = TorusBox(2, 10.0)
    config = Configuration(box, [[1.0, 1.0], [1.5, 1.0]])
    assert energy_delta_swap(config, 0, [1.2, 1.1], Ideal()) == 0.0
    single = Configuration(box, [[1.0, 1.0]])
    assert energy_delta_swap(single, 0, [1.3, 1.0], _square_well()) == 0.0


def test_energy_delta_swap_matches_total_energy():
    from gibbsdyn.geometry import Configuration, TorusBox
    from gibbsdyn.potentials import SoftRepulsive, energy_delta_swap, total_energy

    box = TorusBox(2, 5.0)
    pot = SoftRepulsive(amplitude=1.0, range=1.2)
    rng = np.random.default_rng(11)
    config = Configuration(box, box.uniform(rng, 30))
    for _ in range(20):
        i = int(rng.integers(len(config)))
        y = box.uniform(rng)
        moved = config.copy()
        moved.move(i, y)
        expected = total_energy(moved, pot) - total_energy(config, pot)
        assert energy_delta_swap(config, i, y, pot) == pytest.approx(expected, abs=1e-10)


def test_energy_gradient_matches_batched_gradients():
    from gibbsdyn.geometry import Configuration, TorusBox
    from gibbsdyn.potentials import SmoothBump, all_energy_gradients, energy_gradient

    box = TorusBox(2, 5.0)
    pot = SmoothBump(amplitude=0.5, center=0.0, width=1.0)
    config = Configuration(box, box.uniform(np.random.default_rng(12), 12))
    batched = all_energy_gradients(config, pot)
    for i in range(len(config)):
        np.testing.assert_allclose(energy_gradient(config.point(i), config, pot, exclude=i),
                                   batched[i], atol=1e-12)


def test_soft_repulsive_constants():
    """Nonnegative potentials have B = 0 and no activity restriction."""
    from gibbsdyn.potentials import SoftRepulsive, compute_constants

    constants = compute_constants(SoftRepulsive(amplitude=1.0, range=1.0), 2)
    assert constants.B == 0.0
    assert constants.nonnegative
    assert constants.C > 0


def test_square_well_integrability_constant_closed_form():
    from gibbsdyn.potentials import compute_constants, integrability_constant, radial_integral

    constants = compute_constants(_square_well(), 1)
    expected = 2 * (0.5 * 1 + 0.5 * (math.exp(0.3) - 1))
    assert constants.C == pytest.approx(expected)
    # quadrature of the shell agrees with the closed form
    shell = radial_integral(lambda r: math.exp(0.3) - 1.0, 1, 0.5, 1.0)
    assert 1.0 + shell == pytest.approx(integrability_constant(_square_well(), 1))
    assert constants.B == pytest.approx(0.3 / 2 * 5)
    assert not constants.nonnegative


def test_activity_threshold_closed_form():
    from gibbsdyn.potentials import activity_threshold

    assert activity_threshold(0.3, 2.0) == pytest.approx(1 / (4 * math.exp(1.6)))
    assert activity_threshold(0.3, 2.0) == pytest.approx(0.0505, abs=5e-5)
    assert activity_threshold(0.3, 2.0, factor=1.0) == pytest.approx(2 * activity_threshold(0.3, 2.0))


def test_ideal_gas_constants_are_unbounded():
    from gibbsdyn.potentials import Ideal, compute_constants

    constants = compute_constants(Ideal(), 3)
    assert constants.C == 0.0
    assert math.isinf(constants.z_threshold_1)


def test_attractive_potential_without_cap_has_no_stability_bound():
    from gibbsdyn.potentials import SmoothBump, compute_constants

    pot = SmoothBump(amplitude=0.5, center=0.0, width=1.0)
    with pytest.raises(ValueError):
        compute_constants(pot, 2)
    capped = SmoothBump(amplitude=0.5, center=0.0, width=1.0, neighbor_cap=6)
    assert compute_constants(capped, 2).B == pytest.approx(0.5 / 2 * 6)


def test_positive_exponent_with_hard_core_is_not_integrable():
    from gibbsdyn.potentials import integrability_constant

    assert math.isinf(integrability_constant(_square_well(), 2, exponent=1.0))
    assert integrability_constant(_square_well(), 2, exponent=0.0) == 0.0
