import numpy as np
import pytest
from scipy.special import beta

from polyboltz import (CrossSectionModel, DistributionFunction, MixtureSpec, PhasePoint, PreconditionError,
                       QuadratureSpec, collision_invariants, entropy_production, maxwellian, q_point,
                       q_point_bilinear, weak_form, weak_form_symmetrized)
from polyboltz.collision_operator import WeakFormEngine, parameter_rule
from polyboltz.collision_geometry import pair_case
from polyboltz.oracles import bimodal_monatomic, q_monte_carlo_monatomic
from polyboltz.verification import random_positive_state, random_test_function

QUAD = QuadratureSpec()
POINTS = [PhasePoint(0, (0.3, -0.7, 1.1), 0.0), PhasePoint(0, (2.0, 0.0, -0.5), 0.0)]


def _points(mix):
    out = []
    for a, sp in enumerate(mix.species):
        out.append(PhasePoint(a, (0.4, -0.9, 0.6), 1.7 if sp.polyatomic else 0.0))
        out.append(PhasePoint(a, (-1.5, 0.2, 0.1), 0.3 if sp.polyatomic else 0.0))
    return out


@pytest.mark.parametrize("which", ["mono", "poly4", "mono_poly"])
def test_maxwellian_annihilated(which, request):
    mix = request.getfixturevalue(which)
    model = CrossSectionModel.uniform(mix, 1.0, 0.5)
    M = maxwellian(mix, u=(0.2, -0.1, 0.3), T=1.2)
    for at in _points(mix):
        q = q_point(M, at, model, QUAD)
        assert abs(q.value) <= 1e-6 * q.loss_magnitude
        q2 = q_point(M.scaled(2.0), at, model, QUAD)
        assert q2.loss_magnitude == pytest.approx(4 * q.loss_magnitude, rel=1e-13)
        assert abs(q2.value) <= 1e-6 * q2.loss_magnitude


def test_bimodal_against_monte_carlo(mono):
    model = CrossSectionModel.uniform(mono, 1.0, 0.0)
    f = bimodal_monatomic(mono)
    at = PhasePoint(0, (0.5, 0.3, -0.2))
    q = q_point(f, at, model, QUAD, estimate_error=True)
    mc = q_monte_carlo_monatomic(f, model, at, 400_000, seed=11)
    assert abs(q.value) > 10 * mc.error  # genuinely out of equilibrium
    assert abs(q.value - mc.value) <= 3 * np.hypot(mc.error, q.error)


def test_negative_f_rejected(mono):
    model = CrossSectionModel.uniform(mono)
    neg = maxwellian(mono).scaled(-1.0)
    with pytest.raises(PreconditionError):
        q_point(neg, POINTS[0], model, QUAD)


def test_bilinear_gain_plus_loss(mono_poly, mono_poly_model):
    M = maxwellian(mono_poly)
    f = random_positive_state(mono_poly, np.random.default_rng(1))
    at = PhasePoint(1, (0.2, 0.1, -0.4), 0.9)
    gain = q_point_bilinear(M, f, at, mono_poly_model, QUAD, part="gain").value
    loss = q_point_bilinear(M, f, at, mono_poly_model, QUAD, part="loss").value
    full = q_point_bilinear(M, f, at, mono_poly_model, QUAD).value
    assert gain + loss == pytest.approx(full, rel=1e-12)


@pytest.mark.parametrize("ab,expected", [
    ((0, 0), 4 * np.pi),
    ((0, 1), 4 * np.pi * beta(1.5, 2.0)),
    ((1, 1), 4 * np.pi * beta(1.5, 4.0) * beta(2.0, 2.0)),
])
def test_parameter_rule_exact_for_split_weights(mono_poly, ab, expected):
    # dof 4 gives exponent 1: the weight is R^(1/2) (1-R)^p [r (1-r)] up to the sphere
    case = pair_case(mono_poly, *ab)
    rule = parameter_rule(case, 4, 8, 1, 1)
    w = rule.weights
    if case.needs_r:
        w = w * np.sqrt(rule.R) * (1 - rule.R) ** 3 * rule.r * (1 - rule.r)
    elif case.needs_R:
        w = w * np.sqrt(rule.R) * (1 - rule.R)
    assert np.sum(w) == pytest.approx(expected, rel=1e-13)


def test_weak_form_invariants_and_equilibrium(mono_poly, mono_poly_model):
    rng = np.random.default_rng(3)
    f = random_positive_state(mono_poly, rng)
    for psi in collision_invariants(mono_poly):
        assert abs(weak_form(f, psi, mono_poly_model, QUAD).value) <= 1e-6
        assert abs(weak_form_symmetrized(f, psi, mono_poly_model, QUAD).value) <= 1e-6
    M = maxwellian(mono_poly, u=(0.1, 0.0, -0.2), T=0.9)
    g = random_test_function(mono_poly, rng)
    assert abs(weak_form(M, g, mono_poly_model, QUAD).value) <= 1e-10
    assert abs(weak_form_symmetrized(M, g, mono_poly_model, QUAD).value) <= 1e-10


def test_weak_form_paths_agree(mono_poly, mono_poly_model):
    rng = np.random.default_rng(5)
    for _ in range(3):
        f = random_positive_state(mono_poly, rng)
        g = random_test_function(mono_poly, rng)
        a = weak_form(f, g, mono_poly_model, QUAD, estimate_error=True)
        b = weak_form_symmetrized(f, g, mono_poly_model, QUAD, estimate_error=True)
        assert abs(a.value - b.value) <= 3 * (a.error + b.error) + 1e-12 * abs(a.value)


def test_factorized_and_pair_paths_agree(mono_poly, mono_poly_model):
    rng = np.random.default_rng(9)
    f = random_positive_state(mono_poly, rng)
    g = random_test_function(mono_poly, rng)
    fast = WeakFormEngine(mono_poly, mono_poly_model, QUAD, False, factorized=True)
    slow = WeakFormEngine(mono_poly, mono_poly_model, QUAD, False, factorized=False)
    assert fast.weak_form(f, g) == pytest.approx(slow.weak_form(f, g), rel=1e-10)
    assert fast.entropy_production(f) == pytest.approx(slow.entropy_production(f), rel=1e-10)


def test_entropy_production(mono_poly, mono_poly_model):
    rng = np.random.default_rng(7)
    for _ in range(3):
        f = random_positive_state(mono_poly, rng)
        w = entropy_production(f, mono_poly_model, QUAD, estimate_error=True)
        assert w.value < -3 * w.error
    M = maxwellian(mono_poly)
    assert abs(entropy_production(M, mono_poly_model, QUAD).value) <= 1e-8


def test_entropy_quadratic_in_perturbation(mono):
    model = CrossSectionModel.uniform(mono)
    M = maxwellian(mono)

    def perturbed(eps):
        return DistributionFunction(mono, (lambda xi, I: M(0, xi) * (1 + eps * np.cos(xi[:, 0])),))

    w1 = entropy_production(perturbed(1e-3), model, QUAD).value
    w2 = entropy_production(perturbed(2e-3), model, QUAD).value
    assert w1 < 0 and w2 / w1 == pytest.approx(4.0, rel=1e-2)
    assert abs(entropy_production(perturbed(1e-6), model, QUAD).value) < 1e-11
