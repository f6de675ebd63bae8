import numpy as np
import pytest

from polyboltz import (DistributionFunction, MixtureSpec, ParameterError, QuadratureSpec, SpeciesSpec,
                       collision_invariants, maxwellian, moments)
from polyboltz.mixture_model import inner_product

QUAD = QuadratureSpec()


def test_zero_inner_product(mono):
    z = DistributionFunction.zero(mono)
    assert inner_product(z, z, QUAD) == 0.0


def test_maxwellian_square_integral(mono):
    M = maxwellian(mono)
    # closed form (m / (4 pi))^(3/2) for m = 1; M^2 is a Maxwellian at T = 1/2
    exact = inner_product(M, M, QUAD, temperature=0.5)
    assert exact == pytest.approx((1 / (4 * np.pi)) ** 1.5, rel=1e-12)
    assert exact == pytest.approx(0.0224483902656458, rel=1e-12)
    assert inner_product(M, M, QUAD) == pytest.approx(exact, rel=1e-6)


def test_maxwellian_peak(mono):
    M = maxwellian(mono)
    assert M(0, np.zeros(3)) == pytest.approx((2 * np.pi) ** -1.5, rel=1e-14)
    assert M(0, np.zeros(3)) == pytest.approx(0.06349363593424, rel=1e-12)


def test_disjoint_species_supports(mono_poly):
    M = maxwellian(mono_poly)
    e = collision_invariants(mono_poly)
    f, g = M.times(e[0]), M.times(e[1])
    assert inner_product(f, g, QUAD) == 0.0


def test_polyatomic_value_at_zero_energy():
    M4 = maxwellian(MixtureSpec.single(1.0, "polyatomic", 4.0))
    M2 = maxwellian(MixtureSpec.single(1.0, "polyatomic", 2.0))
    assert M4(0, np.zeros(3), 0.0) == 0.0
    assert 0 < M2(0, np.zeros(3), 0.0) < np.inf


@pytest.mark.parametrize("u,T", [((0, 0, 0), 1.0), ((0.3, -0.2, 0.1), 1.4), ((-0.5, 0.0, 0.4), 0.7)])
def test_moments_recover_parameters(mono_poly, u, T):
    n = (1.3, 0.6)
    M = maxwellian(mono_poly, n, u, T)
    mom = moments(M, QUAD, temperature_hint=T)
    np.testing.assert_allclose(mom.number_densities, n, rtol=1e-12)
    np.testing.assert_allclose(mom.velocity, u, atol=1e-12)
    assert mom.temperature == pytest.approx(T, rel=1e-12)


def test_invariant_counts(mono, mono_poly):
    assert len(collision_invariants(mono)) == 5
    inv = collision_invariants(mono_poly)
    assert len(inv) == 6
    energy = inv[-1]
    xi = np.array([[1.0, 2.0, 0.5]])
    assert energy(0, xi)[0] == pytest.approx(1.0 * 5.25)
    assert energy(1, xi, np.array([0.7]))[0] == pytest.approx(2.0 * 5.25 + 1.4)


def test_validation():
    with pytest.raises(ParameterError):
        SpeciesSpec(-1.0)
    with pytest.raises(ParameterError):
        SpeciesSpec(1.0, "polyatomic", 1.5)
    with pytest.raises(ParameterError):
        MixtureSpec((SpeciesSpec(1.0, "polyatomic", 4.0), SpeciesSpec(1.0)))
    with pytest.raises(ParameterError):
        maxwellian(MixtureSpec.single(), T=0.0)
