import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from polyboltz import (CrossSectionModel, DomainError, MixtureSpec, ParameterError, PerturbedCrossSection,
                       SpeciesSpec, collide, collision_weight, microreversibility_residual, pair_case, sigma)
from polyboltz.collision_geometry import sample_events
from polyboltz.cross_section import bound_check_est1, energy_factors, literal_collision_weight

PP2 = MixtureSpec((SpeciesSpec(2.0, "polyatomic", 2.0), SpeciesSpec(2.0, "polyatomic", 2.0)))
MIX = MixtureSpec((SpeciesSpec(1.0), SpeciesSpec(3.0), SpeciesSpec(1.0, "polyatomic", 4.0),
                   SpeciesSpec(2.0, "polyatomic", 7.0)))
CASES = [(0, 0), (0, 1), (0, 2), (2, 0), (2, 3), (3, 2), (3, 3)]


def test_monatomic_energy_factors():
    mix = MixtureSpec.single(1.0)
    ev = collide(pair_case(mix, 0, 0), [1, 0, 0], [0, 0, 0])
    f = energy_factors(ev)
    assert f.calE[0] == f.calE_star[0] == f.upsilon[0] == 1.0


def test_upsilon_hand_value():
    case = pair_case(PP2, 0, 1)
    ev = collide(case, [1, 0, 0], [-1, 0, 0], 1.0, 0.5, (0, 1, 0), 0.4, 0.3)
    f = energy_factors(ev)
    assert f.upsilon[0] == pytest.approx(1 / 3.5**2, rel=1e-14)
    assert energy_factors(ev, primed=True).calE[0] == pytest.approx(f.calE[0], rel=1e-14)


def test_sigma_examples():
    mm = MixtureSpec.single(1.0)
    hs = CrossSectionModel.uniform(mm, 1.3, 0.0)
    for speed in (0.1, 1.0, 7.0):
        ev = collide(pair_case(mm, 0, 0), [speed, 0, 0], [0, 0, 0], omega=(0, 0, 1))
        assert sigma(hs, ev)[0] == pytest.approx(1.3, rel=1e-15)
    m22 = MixtureSpec.single(2.0)
    ev = collide(pair_case(m22, 0, 0), [1, 0, 0], [-1, 0, 0], omega=(0, 0, 1))
    assert sigma(CrossSectionModel.uniform(m22, 1.0, 0.5), ev)[0] == pytest.approx(2 ** -0.25, rel=1e-14)
    assert sigma(CrossSectionModel.uniform(m22, 1.0, 0.5), ev)[0] == pytest.approx(0.8408964152537145)


def test_sigma_without_energy_transfer():
    case = pair_case(PP2, 0, 1)
    # E = 1 + 2 = 3 kinetic part mu|g|^2/2 = 2 ; R = 2/3 keeps the internal total, r = 0.5 keeps each
    ev = collide(case, [1, 0, 0], [-1, 0, 0], 0.5, 0.5, (0, 1, 0), 2 / 3, 0.5)
    model = CrossSectionModel.uniform(PP2, 1.7, 0.4)
    assert abs(ev.delta_I[0]) < 1e-14
    E = ev.E[0]
    assert sigma(model, ev)[0] == pytest.approx(1.7 * E ** -0.2 / E**2, rel=1e-12)


def test_collision_weight_examples():
    mm = MixtureSpec.single(1.0)
    ev = collide(pair_case(mm, 0, 0), [2, 0, 0], [0, 0, 0], omega=(0, 0, 1))
    assert collision_weight(CrossSectionModel.uniform(mm, 1.0), ev)[0] == pytest.approx(2.0)
    ev = collide(pair_case(PP2, 0, 1), [1, 0, 0], [0, 0, 0], 1.0, 1.0, (0, 0, 1), 1.0, 0.5)
    assert collision_weight(CrossSectionModel.uniform(PP2, 1.0), ev)[0] == 0.0


@pytest.mark.parametrize("ab", CASES)
def test_literal_weight_matches(ab, rng):
    case = pair_case(MIX, *ab)
    ev = sample_events(case, 500, rng)
    model = CrossSectionModel.uniform(MIX, 1.0, 0.3)
    a, b = collision_weight(model, ev), literal_collision_weight(model, ev)
    np.testing.assert_allclose(a, b, rtol=1e-13, atol=1e-300)


@pytest.mark.parametrize("ab", CASES)
@pytest.mark.parametrize("eta", [0.0, 0.5, 0.9])
def test_microreversibility(ab, eta, rng):
    ev = sample_events(pair_case(MIX, *ab), 2000, rng)
    model = CrossSectionModel.uniform(MIX, 1.0, eta)
    assert np.max(microreversibility_residual(model, ev, relative=True)) <= 1e-12


def test_perturbed_model_breaks_microreversibility(rng):
    ev = sample_events(pair_case(MIX, 2, 3), 500, rng)
    bad = PerturbedCrossSection(CrossSectionModel.uniform(MIX), lambda e: 1.0 + e.I_p)
    assert np.median(microreversibility_residual(bad, ev, relative=True)) > 1e-3
    assert not bad.is_reference_family


def test_mono_residual_is_zero(rng):
    ev = sample_events(pair_case(MIX, 0, 1), 200, rng)
    assert np.max(microreversibility_residual(CrossSectionModel.uniform(MIX), ev)) <= 1e-13


def test_bound_est1(rng):
    model = CrossSectionModel(np.array([[1.0, 2.0, 1.0, 1.0], [2.0, 1.0, 1.0, 1.0],
                                        [1.0, 1.0, 1.0, 1.0], [1.0, 1.0, 1.0, 1.0]]), 0.0)
    evs = [sample_events(pair_case(MIX, *ab), 1000, rng) for ab in CASES]
    rep = bound_check_est1(model, evs)
    assert rep.finite and rep.max_ratio <= 2.0 * (1 + 1e-12)
    grown = PerturbedCrossSection(model, lambda e: e.E**2)
    small = bound_check_est1(grown, sample_events(pair_case(MIX, 0, 0), 500, rng, xi_max=1.0))
    large = bound_check_est1(grown, sample_events(pair_case(MIX, 0, 0), 500, rng, xi_max=20.0))
    assert large.max_ratio > 100 * small.max_ratio


def test_domain_error():
    case = pair_case(PP2, 0, 1)
    ev = collide(case, [1, 0, 0], [-1, 0, 0], 0.5, 0.5, (0, 1, 0), 0.5, 0.5)
    object.__setattr__(ev, "delta_I", ev.delta_I + 10.0)
    with pytest.raises(DomainError):
        sigma(CrossSectionModel.uniform(PP2), ev)


def test_model_validation():
    with pytest.raises(ParameterError):
        CrossSectionModel(np.array([[1.0, 2.0], [0.5, 1.0]]))
    with pytest.raises(ParameterError):
        CrossSectionModel(np.eye(2), eta=1.0)
    with pytest.raises(ParameterError):
        CrossSectionModel(-np.eye(2))


@given(st.floats(0.01, 10), st.floats(0, 0.99))
@settings(max_examples=50, deadline=None)
def test_sigma_linear_in_C(c, eta):
    mm = MixtureSpec.single(1.0)
    ev = collide(pair_case(mm, 0, 0), [1.5, 0.2, 0], [0, 0, -0.3], omega=(0, 0.6, 0.8))
    base = sigma(CrossSectionModel.uniform(mm, 1.0, eta), ev)[0]
    assert sigma(CrossSectionModel.uniform(mm, c, eta), ev)[0] == pytest.approx(c * base, rel=1e-13)
