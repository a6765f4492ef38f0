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


def test_boltzmann_zero_rate_convention():
    from gibbsdyn.rates import boltzmann

    assert boltzmann((0.0, math.inf)) == 1.0
    assert boltzmann((1.0, math.inf)) == 0.0
    assert boltzmann((-1.0, 0.3)) == pytest.approx(math.exp(-0.3))
    np.testing.assert_allclose(boltzmann((0.5, np.array([0.0, math.inf, 2.0]))), [1.0, 0.0, math.e])


def test_hop_energies_reverse():
    from gibbsdyn.rates import HopEnergies

    energies = HopEnergies(-0.3, 0.2, -0.1)
    assert energies.reversed() == HopEnergies(0.2, -0.3, -0.1)


def test_kernel_scaling_and_moments():
    from gibbsdyn.rates import HopKernel

    kernel = HopKernel("ball", radius=1.0, amplitude=1.0)
    scaled = kernel.scaled(2.0)
    assert scaled.support_radius == pytest.approx(0.5)
    assert scaled.value(np.array([0.2, 0.0])) == pytest.approx(4.0)
    assert scaled.value(np.array([0.6, 0.0])) == 0.0
    assert kernel.l1_norm(2) == pytest.approx(math.pi)
    assert kernel.second_moment(1) == pytest.approx(2.0 / 3.0)
    assert scaled.scaled_second_moment(1) == pytest.approx(2.0 / 3.0 / 4.0)
    triangle = HopKernel("triangle", radius=1.0, amplitude=1.0)
    assert triangle.l1_norm(1) == pytest.approx(1.0)
    assert triangle.second_moment(1) == pytest.approx(1.0 / 6.0)


def test_kernel_l1_norm_matches_quadrature():
    from scipy import integrate
    from gibbsdyn.rates import HopKernel

    kernel = HopKernel("triangle", radius=1.5, amplitude=0.8)
    numeric, _ = integrate.dblquad(lambda y, x: kernel.value(np.array([x, y])), -1.5, 1.5, -1.5, 1.5)
    assert kernel.l1_norm(2) == pytest.approx(numeric, rel=1e-4)


def test_kernel_samples_stay_in_support():
    from gibbsdyn.rates import HopKernel

    rng = np.random.default_rng(30)
    for shape in ("ball", "triangle"):
        kernel = HopKernel(shape, radius=1.0).scaled(0.5)
        draws = np.array([kernel.sample(rng, 2) for _ in range(300)])
        assert np.all(np.linalg.norm(draws, axis=1) < kernel.support_radius)


def test_invalid_kernel_rejected():
    from gibbsdyn.rates import HopKernel

    with pytest.raises(ValueError):
        HopKernel("gaussian")
    with pytest.raises(ValueError):
        HopKernel(radius=0.0)


@pytest.mark.parametrize("s", [0.0, 0.3, 0.5, 1.0])
def test_free_rate_is_kernel(s):
    """Without interaction partners every c_s reduces to the kernel."""
    from gibbsdyn.geometry import Configuration, TorusBox
    from gibbsdyn.potentials import Ideal
    from gibbsdyn.rates import HopKernel, KawasakiS, RateSpec, kawasaki_rate

    box = TorusBox(2, 10.0)
    spec = RateSpec(KawasakiS(s), HopKernel(amplitude=0.7), 1.0)
    crowd = Configuration(box, [[5.0, 5.0], [5.5, 5.0], [4.6, 5.3]])
    assert kawasaki_rate(spec, crowd, 0, [5.4, 5.0], Ideal()) == pytest.approx(0.7)
    alone = Configuration(box, [[5.0, 5.0]])
    assert kawasaki_rate(spec, alone, 0, [5.4, 5.0], _square_well()) == pytest.approx(0.7)


def test_half_rate_with_equal_energies_is_kernel():
    from gibbsdyn.geometry import Configuration, TorusBox
    from gibbsdyn.rates import HopKernel, KawasakiS, RateSpec, kawasaki_rate

    box = TorusBox(2, 10.0)
    spec = RateSpec(KawasakiS(0.5), HopKernel(), 1.0)
    config = Configuration(box, [[5.0, 5.0], [5.7, 5.0]])
    assert kawasaki_rate(spec, config, 0, [5.3, 5.5], _square_well()) == pytest.approx(1.0)


def test_rate_into_hard_core_is_zero():
    from gibbsdyn.geometry import Configuration, TorusBox
    from gibbsdyn.rates import HopKernel, KawasakiS, KawasakiUV, RateSpec, hop_energies, kawasaki_rate

    box = TorusBox(2, 10.0)
    config = Configuration(box, [[5.0, 5.0], [5.8, 5.0]])
    for variant in (KawasakiS(0.0), KawasakiS(1.0), KawasakiUV(0.0, 1.0), KawasakiUV(0.2, 0.7)):
        spec = RateSpec(variant, HopKernel(), 1.0)
        assert kawasaki_rate(spec, config, 0, [5.6, 5.1], _square_well()) == 0.0
        energies = hop_energies(config, 0, [5.6, 5.1], _square_well())
        assert spec.symmetric_rate(config.point(0), np.array([5.6, 5.1]), energies, box) == 0.0


@pytest.mark.parametrize("s", [0.0, 0.3, 0.5, 1.0])
def test_symmetrized_s_rate_is_unchanged(s):
    from gibbsdyn.geometry import TorusBox
    from gibbsdyn.rates import HopEnergies, HopKernel, KawasakiS, RateSpec, symmetrize

    box = TorusBox(2, 10.0)
    spec = RateSpec(KawasakiS(s), HopKernel(), 1.0)
    x, y = np.array([5.0, 5.0]), np.array([5.3, 5.4])
    energies = HopEnergies(-0.6, 0.4, -0.3)
    raw = spec.rate(x, y, energies, box)
    assert symmetrize(spec.evaluator(box), x, y, energies) == pytest.approx(raw, rel=1e-12)


def test_symmetrized_uv_rate_display():
    from gibbsdyn.geometry import TorusBox
    from gibbsdyn.rates import HopEnergies, HopKernel, KawasakiUV, RateSpec

    box = TorusBox(2, 10.0)
    u, v = 0.2, 0.7
    spec = RateSpec(KawasakiUV(u, v), HopKernel(amplitude=0.9), 1.0)
    x, y = np.array([5.0, 5.0]), np.array([5.3, 5.4])
    src, tgt = -0.6, 0.4
    energies = HopEnergies(src, tgt, 0.0)
    display = 0.5 * 0.9 * (math.exp(u * src - (1 - v) * tgt) + math.exp(v * src - (1 - u) * tgt))
    assert spec.symmetric_rate(x, y, energies, box) == pytest.approx(display, rel=1e-12)


def test_symmetrize_is_idempotent_for_custom_rates():
    from gibbsdyn.geometry import TorusBox, random_configuration
    from gibbsdyn.potentials import SoftRepulsive
    from gibbsdyn.rates import CustomRate, HopKernel, hop_energies, symmetrize, symmetrized

    box = TorusBox(2, 4.0)
    kernel = HopKernel()
    pot = SoftRepulsive(amplitude=1.0, range=1.0)

    def rate(x, y, e):
        return kernel.value(box.displacement(y, x)) * math.exp(0.3 * e.source - 0.9 * e.target + 0.1 * e.pair)

    custom = CustomRate(rate)
    rng = np.random.default_rng(31)
    config = random_configuration(box, 5, rng)
    for i in range(5):
        x = config.point(i)
        y = box.wrap(x + kernel.sample(rng, 2))
        energies = hop_energies(config, i, y, pot)
        once = symmetrize(custom.fn, x, y, energies)
        twice = symmetrize(symmetrized(custom.fn), x, y, energies)
        assert twice == pytest.approx(once, rel=1e-12)


def test_custom_rate_needs_a_bound_to_simulate():
    from gibbsdyn.rates import CustomRate

    with pytest.raises(NotImplementedError):
        CustomRate(lambda x, y, e: 1.0).envelope(0.0, 0.0)
    assert CustomRate(lambda x, y, e: 1.0, bound=lambda s, n: 2.0).envelope(0.0, 0.0) == 2.0


def test_free_majorant_has_no_thinning():
    from gibbsdyn.geometry import Configuration, TorusBox
    from gibbsdyn.potentials import Ideal
    from gibbsdyn.rates import HopKernel, KawasakiS, RateSpec, hop_energies, hop_majorant

    box = TorusBox(2, 10.0)
    kernel = HopKernel()
    spec = RateSpec(KawasakiS(0.3), kernel, 0.5)
    config = Configuration(box, [[5.0, 5.0], [5.5, 5.0]])
    majorant = hop_majorant(spec, config, 0, Ideal())
    assert majorant.lambda_bar == pytest.approx(0.5 * kernel.l1_norm(2))
    y = np.array([5.2, 5.3])
    energies = hop_energies(config, 0, y, Ideal())
    a = kernel.value(y - config.point(0))
    assert majorant.acceptance(spec.symmetric_rate(config.point(0), y, energies, box), a) == pytest.approx(1.0)


def test_repulsive_majorant_acceptance_is_boltzmann_factor():
    from gibbsdyn.geometry import TorusBox, random_configuration
    from gibbsdyn.potentials import SoftRepulsive
    from gibbsdyn.rates import HopKernel, KawasakiS, RateSpec, hop_energies, hop_majorant

    box = TorusBox(2, 4.0)
    kernel = HopKernel()
    pot = SoftRepulsive(amplitude=1.5, range=1.0)
    spec = RateSpec(KawasakiS(0.0), kernel, 0.8)
    rng = np.random.default_rng(32)
    config = random_configuration(box, 10, rng)
    majorant = hop_majorant(spec, config, 0, pot)
    assert majorant.lambda_bar == pytest.approx(0.8 * kernel.l1_norm(2))
    x = config.point(0)
    for _ in range(20):
        h = kernel.sample(rng, 2)
        y = box.wrap(x + h)
        energies = hop_energies(config, 0, y, pot)
        p = majorant.acceptance(spec.symmetric_rate(x, y, energies, box), kernel.value(h))
        assert p == pytest.approx(math.exp(-energies.target), rel=1e-12)
        assert p <= 1.0


@pytest.mark.parametrize("variant_args", [("s", 0.0), ("s", 0.5), ("s", 1.0), ("uv", 0.0, 1.0), ("uv", 0.2, 0.7)])
def test_square_well_thinning_never_exceeds_one(variant_args):
    from gibbsdyn.geometry import TorusBox, random_configuration
    from gibbsdyn.rates import HopKernel, KawasakiS, KawasakiUV, RateSpec, hop_energies, hop_majorant

    variant = KawasakiS(variant_args[1]) if variant_args[0] == "s" else KawasakiUV(*variant_args[1:])
    box = TorusBox(2, 4.0)
    kernel = HopKernel()
    pot = _square_well()
    spec = RateSpec(variant, kernel, 1.0)
    rng = np.random.default_rng(33)
    for _ in range(20):
        config = random_configuration(box, 15, rng, hard_core=pot.hard_core)
        i = int(rng.integers(len(config)))
        x = config.point(i)
        majorant = hop_majorant(spec, config, i, pot)
        for _ in range(20):
            h = kernel.sample(rng, 2)
            y = box.wrap(x + h)
            energies = hop_energies(config, i, y, pot)
            p = majorant.acceptance(spec.symmetric_rate(x, y, energies, box), kernel.value(h))
            assert 0.0 <= p <= 1.0


def test_majorant_violation_raised():
    from gibbsdyn.errors import MajorantViolation
    from gibbsdyn.rates import HopMajorant

    with pytest.raises(MajorantViolation):
        HopMajorant(lambda_bar=1.0, source=0.0, activity=1.0, l1_norm=1.0).acceptance(2.0, 1.0)


def test_hop_bound_rejects_particle_inside_hard_core():
    from gibbsdyn.errors import MajorantViolation
    from gibbsdyn.rates import HopKernel, KawasakiS, RateSpec, hop_bound

    with pytest.raises(MajorantViolation):
        hop_bound(RateSpec(KawasakiS(0.5), HopKernel(), 1.0), math.inf, _square_well(), 2)


def test_free_glauber_rates():
    from gibbsdyn.geometry import Configuration, TorusBox
    from gibbsdyn.potentials import Ideal
    from gibbsdyn.rates import GlauberSpec, glauber_rates

    box = TorusBox(2, 4.0)
    spec = GlauberSpec(s=0.3, activity=0.5, alpha=2.0)
    rates = glauber_rates(spec, Configuration(box, [[1.0, 1.0], [1.2, 1.0], [3.0, 3.0]]), Ideal())
    np.testing.assert_allclose(rates.death, [2.0, 2.0, 2.0])
    assert rates.birth_majorant == pytest.approx(0.5 * 16.0 * 2.0)


def test_glauber_birth_rate_single_neighbor():
    from gibbsdyn.geometry import Configuration, TorusBox
    from gibbsdyn.rates import GlauberSpec, glauber_birth_rate, glauber_death_rate

    box = TorusBox(2, 10.0)
    spec = GlauberSpec(s=0.0, activity=1.0, alpha=1.0)
    config = Configuration(box, [[5.0, 5.0]])
    assert glauber_birth_rate(spec, [5.8, 5.0], config, _square_well()) == pytest.approx(math.exp(0.3))
    assert glauber_birth_rate(spec, [5.2, 5.0], config, _square_well()) == 0.0
    pair = Configuration(box, [[5.0, 5.0], [5.8, 5.0]])
    assert glauber_death_rate(spec, pair, 0, _square_well()) == pytest.approx(1.0)
    assert glauber_death_rate(GlauberSpec(s=1.0), pair, 0, _square_well()) == pytest.approx(math.exp(-0.3))


def test_glauber_birth_acceptance_bounded():
    from gibbsdyn.rates import GlauberSpec

    spec = GlauberSpec(s=0.0, alpha=1.0)
    bound = spec.birth_bound_density(0.3 * 25)
    assert spec.birth_rate(-0.3 * 25) == pytest.approx(bound)


def test_constants_summary_reports_integrability():
    from gibbsdyn.rates import HopKernel, KawasakiS, KawasakiUV, constants_summary

    summary = constants_summary(_square_well(), HopKernel(), 1, {
        "half": KawasakiS(0.5),
        "one": KawasakiS(1.0),
        "uv": KawasakiUV(0.2, 0.7),
    })
    assert summary["C"] == pytest.approx(1.0 + math.exp(0.3) - 1.0)
    assert summary["kernel_l1_norm"] == pytest.approx(2.0)
    assert summary["integrability"]["half"] == {"exponent": 0.0, "value": 0.0, "satisfied": True}
    assert not summary["integrability"]["one"]["satisfied"]
    assert summary["integrability"]["uv"]["exponent"] == pytest.approx(0.4)
    assert summary["integrability"]["uv"]["satisfied"] is False


def test_soft_potential_summary_flags_every_activity():
    from gibbsdyn.potentials import SoftRepulsive
    from gibbsdyn.rates import HopKernel, KawasakiS, constants_summary

    summary = constants_summary(SoftRepulsive(amplitude=1.0, range=1.0), HopKernel(), 2, {"k": KawasakiS(1.0)})
    assert summary["nonnegative"] is True
    assert summary["B"] == 0.0
    assert summary["integrability"]["k"]["satisfied"] is True
