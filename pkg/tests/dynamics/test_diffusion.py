import math
import os
import sys

import numpy as np
import pytest

# Add src directory to Python path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', '..', 'src'))


def test_coefficients():
    from gibbsdyn.dynamics.diffusion import DiffusionParams, diffusion_coefficients

    assert diffusion_coefficients(0.5) == (0.0, 1.0)
    assert diffusion_coefficients(0.0) == (-1.0, 2.0)
    assert diffusion_coefficients(1.0) == (1.0, 0.0)
    assert DiffusionParams(s=0.25).coefficients == (-0.5, 1.5)
    with pytest.raises(ValueError):
        DiffusionParams(s=1.5)
    with pytest.raises(ValueError):
        DiffusionParams(dt=0.0)


def test_hard_core_potential_rejected():
    from gibbsdyn.dynamics.diffusion import DiffusionEngine, DiffusionParams
    from gibbsdyn.errors import NotSmooth
    from gibbsdyn.geometry import Configuration, TorusBox
    from gibbsdyn.potentials import SquareWell

    with pytest.raises(NotSmooth):
        DiffusionEngine(DiffusionParams(), SquareWell(depth=0.3, hard_core=0.5, range=1.0),
                        Configuration(TorusBox(1, 10.0), [[1.0]]))


def test_free_increments_have_diffusive_variance():
    from gibbsdyn.dynamics.diffusion import DiffusionParams, em_step
    from gibbsdyn.geometry import Configuration, TorusBox
    from gibbsdyn.potentials import Ideal

    box = TorusBox(1, 1000.0)
    rng = np.random.default_rng(90)
    config = Configuration(box, box.uniform(rng, 4000))
    params = DiffusionParams(s=0.2, mobility=0.7, dt=0.01)
    increments = em_step(config, params, Ideal(), rng)
    assert increments.shape == (4000, 1)
    assert np.mean(increments) == pytest.approx(0.0, abs=0.01)
    assert np.var(increments) == pytest.approx(2 * 0.7 * 0.01, rel=0.1)


def test_half_drift_is_minus_gradient():
    from gibbsdyn.dynamics.diffusion import DiffusionParams, em_coefficients
    from gibbsdyn.geometry import Configuration, TorusBox
    from gibbsdyn.potentials import SoftRepulsive, all_energy_gradients

    box = TorusBox(2, 4.0)
    pot = SoftRepulsive(amplitude=1.0, range=1.0)
    config = Configuration(box, box.uniform(np.random.default_rng(91), 15))
    drift, sigma, _ = em_coefficients(config, DiffusionParams(s=0.5, mobility=0.3), pot)
    np.testing.assert_allclose(drift, -0.3 * all_energy_gradients(config, pot))
    np.testing.assert_allclose(sigma, math.sqrt(0.6))


def test_mobility_weights_noise():
    from gibbsdyn.dynamics.diffusion import DiffusionParams, em_coefficients
    from gibbsdyn.geometry import Configuration, TorusBox
    from gibbsdyn.potentials import SoftRepulsive, all_relative_energies

    box = TorusBox(2, 4.0)
    pot = SoftRepulsive(amplitude=1.0, range=1.0)
    config = Configuration(box, box.uniform(np.random.default_rng(92), 15))
    _, sigma, energies = em_coefficients(config, DiffusionParams(s=0.0, mobility=1.0), pot)
    np.testing.assert_allclose(energies, all_relative_energies(config, pot))
    np.testing.assert_allclose(sigma, np.sqrt(2.0 * np.exp(-energies)))


def test_free_particles_spread_linearly():
    from gibbsdyn.dynamics.diffusion import DiffusionEngine, DiffusionParams
    from gibbsdyn.geometry import Configuration, TorusBox
    from gibbsdyn.observables import MeanSquaredDisplacement, ParticleCount
    from gibbsdyn.potentials import Ideal

    box = TorusBox(2, 10.0)
    config = Configuration(box, box.uniform(np.random.default_rng(93), 200))
    engine = DiffusionEngine(DiffusionParams(s=0.5, mobility=0.5, dt=0.01), Ideal(), config, seed=93)
    frame = engine.run(1.0, [ParticleCount(), MeanSquaredDisplacement()], sample_interval=0.5)
    assert frame["t"].tolist() == [0.0, 0.5, 1.0]
    assert frame["msd"].iloc[0] == 0.0
    # 2 c d t = 2 with standard error sqrt(4 / 200)
    assert abs(frame["msd"].iloc[-1] - 2.0) < 3 * math.sqrt(4.0 / 200)
    assert engine.counters["step"] == 100


def test_large_step_blows_up():
    from gibbsdyn.dynamics.diffusion import DiffusionParams, em_step
    from gibbsdyn.errors import BlowUp
    from gibbsdyn.geometry import Configuration, TorusBox
    from gibbsdyn.potentials import SoftRepulsive

    config = Configuration(TorusBox(1, 10.0), [[5.0], [5.1]])
    params = DiffusionParams(s=0.5, dt=1.0, guard=0.1)
    with pytest.raises(BlowUp):
        em_step(config, params, SoftRepulsive(amplitude=50.0, range=1.0), np.random.default_rng(94))


def test_empty_state_step():
    from gibbsdyn.dynamics.diffusion import DiffusionParams, em_step
    from gibbsdyn.geometry import Configuration, TorusBox
    from gibbsdyn.potentials import Ideal

    increments = em_step(Configuration(TorusBox(3, 5.0)), DiffusionParams(), Ideal(), np.random.default_rng(0))
    assert increments.shape == (0, 3)


def test_one_step_expectation_is_consistent_with_generator():
    """(E[F after dt] - F) / dt approaches -HF with error shrinking like dt."""
    from gibbsdyn.dynamics.diffusion import DiffusionParams, one_step_expectation
    from gibbsdyn.functionals import CylinderFunctional, Exponential, TestField
    from gibbsdyn.generators import apply_diffusion
    from gibbsdyn.geometry import Configuration, TorusBox
    from gibbsdyn.potentials import SoftRepulsive

    box = TorusBox(1, 6.0)
    pot = SoftRepulsive(amplitude=1.0, range=1.5)
    functional = CylinderFunctional((TestField.bump((2.3,), 2.5, 0.5),), Exponential())
    config = Configuration(box, [[2.0], [2.6]])
    base = functional.evaluate(config)
    errors = []
    for dt in (1e-2, 5e-3, 2.5e-3):
        params = DiffusionParams(s=0.3, mobility=1.0, dt=dt)
        expected = -apply_diffusion(functional, config, params, pot)
        errors.append(abs((one_step_expectation(functional, config, params, pot) - base) / dt - expected))
    assert errors[0] > errors[1] > errors[2]
    assert errors[0] / errors[2] > 2.0


def test_one_step_expectation_limits():
    from gibbsdyn.dynamics.diffusion import DiffusionParams, one_step_expectation
    from gibbsdyn.functionals import CylinderFunctional, Exponential, TestField
    from gibbsdyn.geometry import Configuration, TorusBox
    from gibbsdyn.potentials import Ideal

    box = TorusBox(2, 6.0)
    functional = CylinderFunctional((TestField.bump((3.0, 3.0), 2.0),), Exponential())
    assert one_step_expectation(functional, Configuration(box), DiffusionParams(), Ideal()) == 1.0
    crowd = Configuration(box, [[1.0, 1.0], [2.0, 2.0], [3.0, 3.0]])
    with pytest.raises(ValueError):
        one_step_expectation(functional, crowd, DiffusionParams(), Ideal())
