import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from polyboltz import (CollisionPair, CollisionParams, MixtureSpec, ParameterError, PhasePoint, SpeciesSpec,
                       collide, collision_invariants, pair_case, primed_state, reduced_mass, reverse_event)
from polyboltz.collision_geometry import measure_weight, sample_events, total_energy

MIX = MixtureSpec((SpeciesSpec(1.0), SpeciesSpec(3.0), SpeciesSpec(1.0, "polyatomic", 4.0),
                   SpeciesSpec(2.0, "polyatomic", 6.0)))
CASES = [(0, 1), (0, 2), (2, 0), (2, 3), (3, 3), (0, 0)]


@pytest.mark.parametrize("m,expected", [((1, 1), 0.5), ((2, 2), 1.0), ((1, 3), 0.75)])
def test_reduced_mass(m, expected):
    assert reduced_mass(*m) == expected


def test_total_energy_examples():
    pp = MixtureSpec((SpeciesSpec(2.0, "polyatomic", 4.0), SpeciesSpec(2.0, "polyatomic", 4.0)))
    case = pair_case(pp, 0, 1)
    assert total_energy(case, [1, 0, 0], [-1, 0, 0], 1.0, 0.5)[0] == pytest.approx(3.5)
    mm = pair_case(MIX, 0, 0)
    assert total_energy(mm, [1, 2, 3], [1, 2, 3])[0] == 0.0
    # mono/poly: E counts I_* only
    mp = pair_case(MIX, 0, 2)
    assert total_energy(mp, [1, 0, 0], [0, 0, 0], None, 2.0)[0] == pytest.approx(0.25 + 2.0)


def test_identity_direction_mono():
    case = pair_case(MIX, 0, 0)
    xi, xs = np.array([1.0, 0.5, 0.0]), np.array([-0.5, 0.0, 1.0])
    g = xi - xs
    ev = collide(case, xi, xs, omega=g / np.linalg.norm(g))
    np.testing.assert_allclose(ev.xi_p[0], xi, atol=1e-15)
    np.testing.assert_allclose(ev.xi_star_p[0], xs, atol=1e-15)


def test_poly_poly_R_one():
    case = pair_case(MIX, 2, 3)
    ev = collide(case, [1, 0, 0], [0, 1, 0], 1.0, 2.0, (0, 0, 1), 1.0, 0.3)
    assert ev.I_p[0] == 0.0 and ev.I_star_p[0] == 0.0
    assert 0.5 * case.mu * ev.g_prime_norm[0] ** 2 == pytest.approx(ev.E[0], rel=1e-14)


def test_hand_evaluated_poly_poly_event():
    mix = MixtureSpec((SpeciesSpec(1.0, "polyatomic", 4.0), SpeciesSpec(1.0, "polyatomic", 4.0)))
    pair = CollisionPair(PhasePoint(0, (1, 0, 0), 1.0), PhasePoint(1, (-1, 0, 0), 1.0))
    ev = primed_state(mix, pair, CollisionParams((0, 1, 0), 0.5, 0.5))
    h = np.sqrt(6) / 2
    assert ev.E[0] == pytest.approx(3.0)
    assert ev.g_prime_norm[0] == pytest.approx(np.sqrt(6))
    np.testing.assert_allclose(ev.xi_p[0], [0, h, 0], atol=1e-14)
    np.testing.assert_allclose(ev.xi_star_p[0], [0, -h, 0], atol=1e-14)
    assert ev.I_p[0] == pytest.approx(0.75) and ev.I_star_p[0] == pytest.approx(0.75)


def test_measure_weight_examples():
    pp = MixtureSpec((SpeciesSpec(2.0, "polyatomic", 4.0), SpeciesSpec(2.0, "polyatomic", 4.0)))
    case = pair_case(pp, 0, 1)
    # mu = 1, E = 1 with |g| = 0 and I + I_* = 1
    ev = collide(case, [0, 0, 0], [0, 0, 0], 0.5, 0.5, (0, 0, 1), 0.25, 0.5)
    assert measure_weight(ev)[0] == pytest.approx(3 * np.sqrt(2) / 8, rel=1e-14)
    ev1 = collide(case, [0, 0, 0], [0, 0, 0], 0.5, 0.5, (0, 0, 1), 1.0, 0.5)
    assert measure_weight(ev1)[0] == 0.0
    mm = pair_case(MIX, 0, 0)
    assert measure_weight(collide(mm, [2, 0, 0], [0, 0, 0]))[0] == pytest.approx(4.0)


def test_parameter_validation():
    with pytest.raises(ParameterError):
        CollisionParams((1, 1, 0))
    with pytest.raises(ParameterError):
        CollisionParams((0, 0, 1), R=1.5)
    pair = CollisionPair(PhasePoint(0, (1, 0, 0)), PhasePoint(1, (0, 0, 0)))
    with pytest.raises(ParameterError):
        primed_state(MIX, pair, CollisionParams((0, 0, 1), R=0.5))


@pytest.mark.parametrize("ab", CASES)
def test_conservation_and_invariants(ab, rng):
    case = pair_case(MIX, *ab)
    ev = sample_events(case, 2000, rng)
    ma, mb = MIX[ab[0]].mass, MIX[ab[1]].mass
    mom = ma * ev.xi + mb * ev.xi_star
    mom_p = ma * ev.xi_p + mb * ev.xi_star_p
    np.testing.assert_allclose(mom_p, mom, rtol=0, atol=1e-12 * np.max(np.abs(mom)))
    en = total_energy(case, ev.xi, ev.xi_star, ev.I, ev.I_star)
    en_p = total_energy(case, ev.xi_p, ev.xi_star_p, ev.I_p, ev.I_star_p)
    np.testing.assert_allclose(en_p, en, rtol=1e-12)
    for psi in collision_invariants(MIX):
        d = (psi(ab[0], ev.xi, ev.I) + psi(ab[1], ev.xi_star, ev.I_star)
             - psi(ab[0], ev.xi_p, ev.I_p) - psi(ab[1], ev.xi_star_p, ev.I_star_p))
        assert np.max(np.abs(d)) <= 1e-11 * max(1.0, np.max(np.abs(en)))


vec = st.tuples(*[st.floats(-6, 6)] * 3)


@given(vec, vec, st.floats(0, 20), st.floats(0, 20), st.floats(0, 1), st.floats(0, 1),
       st.sampled_from(CASES))
@settings(max_examples=200, deadline=None)
def test_reverse_event_round_trip(xi, xs, I, Is, R, r, ab):
    case = pair_case(MIX, *ab)
    if np.linalg.norm(np.subtract(xi, xs)) < 1e-6 and not case.needs_R:
        return
    ev = collide(case, xi, xs, I if case.poly_a else None, Is if case.poly_b else None,
                 (0.6, 0.0, 0.8), R if case.needs_R else None, r if case.needs_r else None)
    back = reverse_event(ev, exact=False)
    scale = 1.0 + np.abs(ev.E[0]) + np.max(np.abs(np.r_[xi, xs]))
    np.testing.assert_allclose(back.xi_p[0], xi, atol=1e-9 * scale)
    np.testing.assert_allclose(back.xi_star_p[0], xs, atol=1e-9 * scale)
    if case.poly_a:
        assert back.I_p[0] == pytest.approx(I, abs=1e-9 * scale)
