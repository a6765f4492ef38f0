import os
import sys

import numpy as np
import pytest

# Add src directory to Python path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', '..', 'src'))


def _poisson_snapshots(activity, box, count, seed):
    from gibbsdyn.models import Snapshot

    rng = np.random.default_rng(seed)
    return [Snapshot(box.uniform(rng, int(rng.poisson(activity * box.volume))), sweep=k)
            for k in range(count)]


def _observables(box):
    from gibbsdyn.functionals import TestField
    from gibbsdyn.observables import LinearStatistic, PairCount

    center = tuple([box.side / 2.0] * box.dim)
    return [LinearStatistic(TestField.bump(center, box.side / 4.0)), PairCount(0.9)]


def test_kawasaki_keeps_poisson_invariant():
    from gibbsdyn.geometry import TorusBox
    from gibbsdyn.potentials import Ideal
    from gibbsdyn.rates import HopKernel, KawasakiS, RateSpec
    from gibbsdyn.verify.invariance import invariance_test

    box = TorusBox(1, 10.0)
    spec = RateSpec(KawasakiS(0.5), HopKernel(), 1.0)
    report = invariance_test("kawasaki", spec, _poisson_snapshots(1.0, box, 40, 20), box, Ideal(),
                             horizon=2.0, observables=_observables(box), seed=20)
    assert report.name == "kawasaki_invariance"
    assert report.passed
    assert report.details["N"]["mean_difference"] == 0.0
    assert report.details["replicas_with_varying_N"] == 0
    assert report.details["counters"]["hop"] > 0
    assert report.sample_sizes == {"replicas": 40, "samples_per_run": 10}


def test_kawasaki_keeps_square_well_gibbs_invariant():
    from gibbsdyn.geometry import TorusBox
    from gibbsdyn.gibbs import GibbsParams, sample_equilibrium
    from gibbsdyn.potentials import SquareWell
    from gibbsdyn.rates import HopKernel, KawasakiS, RateSpec
    from gibbsdyn.verify.invariance import invariance_test

    box = TorusBox(1, 10.0)
    pot = SquareWell(depth=0.3, hard_core=0.5, range=1.0)
    params = GibbsParams(activity=0.5, potential=pot, box=box, sweeps=600, burn_in=50, thinning=10, seed=25)
    snapshots = sample_equilibrium(params)
    spec = RateSpec(KawasakiS(0.5), HopKernel(), 0.5)
    report = invariance_test("kawasaki", spec, snapshots, box, pot, horizon=1.0,
                             observables=_observables(box), seed=25)
    assert report.passed
    assert report.threshold == 3.0
    assert report.details["replicas_with_varying_N"] == 0
    # pairs inside the well but outside the core do move
    assert report.details["pairs"]["stderr"] > 0
    assert report.details["counters"]["hop"] > 0


def test_glauber_keeps_square_well_gibbs_invariant():
    from gibbsdyn.geometry import TorusBox
    from gibbsdyn.gibbs import GibbsParams, sample_equilibrium
    from gibbsdyn.potentials import SquareWell
    from gibbsdyn.rates import GlauberSpec
    from gibbsdyn.verify.invariance import invariance_test

    box = TorusBox(1, 10.0)
    pot = SquareWell(depth=0.3, hard_core=0.5, range=1.0)
    params = GibbsParams(activity=0.5, potential=pot, box=box, sweeps=600, burn_in=50, thinning=10, seed=21)
    snapshots = sample_equilibrium(params)
    report = invariance_test("glauber", GlauberSpec(s=0.0, activity=0.5, alpha=1.0), snapshots, box, pot,
                             horizon=1.0, observables=_observables(box), seed=21)
    assert report.passed
    assert report.details["replicas_with_varying_N"] > 0
    assert report.details["counters"]["birth"] > 0


def test_clustered_start_is_not_invariant():
    """A start far from equilibrium relaxes, so the paired differences are not centered."""
    from gibbsdyn.geometry import TorusBox
    from gibbsdyn.models import Snapshot
    from gibbsdyn.potentials import Ideal
    from gibbsdyn.rates import HopKernel, KawasakiS, RateSpec
    from gibbsdyn.verify.invariance import invariance_test

    box = TorusBox(1, 10.0)
    rng = np.random.default_rng(22)
    snapshots = [Snapshot(rng.uniform(4.5, 5.5, size=(10, 1)), sweep=k) for k in range(20)]
    spec = RateSpec(KawasakiS(0.5), HopKernel(), 1.0)
    report = invariance_test("kawasaki", spec, snapshots, box, Ideal(), horizon=2.0,
                             observables=_observables(box), seed=22)
    assert not report.passed
    assert report.details["psi"]["mean_difference"] < 0
    assert not report.details["pairs"]["passed"]


def test_diffusion_keeps_poisson_invariant():
    from gibbsdyn.dynamics.diffusion import DiffusionParams
    from gibbsdyn.geometry import TorusBox
    from gibbsdyn.potentials import Ideal
    from gibbsdyn.verify.invariance import invariance_test

    box = TorusBox(1, 10.0)
    report = invariance_test("diffusion", DiffusionParams(s=0.5, dt=0.01), _poisson_snapshots(1.0, box, 30, 23),
                             box, Ideal(), horizon=0.5, observables=_observables(box), seed=23)
    assert report.name == "diffusion_invariance"
    assert report.passed
    assert report.details["psi"]["bias_bound"] >= 0.0
    assert report.details["counters"]["step"] == 30 * 50


def test_invariance_argument_errors():
    from gibbsdyn.errors import InsufficientSamples
    from gibbsdyn.geometry import TorusBox
    from gibbsdyn.potentials import Ideal
    from gibbsdyn.rates import HopKernel, KawasakiS, RateSpec
    from gibbsdyn.verify.invariance import invariance_test

    box = TorusBox(1, 10.0)
    spec = RateSpec(KawasakiS(0.5), HopKernel(), 1.0)
    with pytest.raises(ValueError):
        invariance_test("metropolis", spec, _poisson_snapshots(1.0, box, 20, 24), box, Ideal(), 1.0, [])
    with pytest.raises(InsufficientSamples):
        invariance_test("kawasaki", spec, _poisson_snapshots(1.0, box, 19, 24), box, Ideal(), 1.0, [])
