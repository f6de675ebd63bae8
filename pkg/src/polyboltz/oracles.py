"""Seeded Monte Carlo oracles, written independently of the tensor-rule code paths.

Neither oracle calls the collision map or the collision weight used by
the library: the collision frequency is sampled in the post-collisional
energies (I', I'_*) directly, and the monatomic collision operator uses
the explicit elastic map.
"""

from __future__ import annotations

import math

import numpy as np

from .cross_section import CrossSectionModel
from .errors import ParameterError
from .mixture_model import DistributionFunction, MixtureSpec, PhasePoint
from .quadrature import IntegralResult

__all__ = ["nu_monte_carlo", "q_monte_carlo_monatomic", "bimodal_monatomic"]


def _combine(parts: list[IntegralResult]) -> IntegralResult:
    return IntegralResult(sum(p.value for p in parts),
                          math.sqrt(sum(p.error**2 for p in parts)),
                          sum(p.nodes for p in parts))


def _mean(vals: np.ndarray) -> IntegralResult:
    n = vals.size
    return IntegralResult(float(np.mean(vals)), float(np.std(vals, ddof=1) / math.sqrt(n)), n)


def nu_monte_carlo(mixture: MixtureSpec, model: CrossSectionModel, at: PhasePoint,
                   n_samples: int = 1_000_000, seed: int = 0) -> IntegralResult:
    """Collision frequency at ``at`` against the unit-temperature Maxwellian.

    Per partner species beta the estimator is n_beta times the mean of

        4 pi C |g'| E^(-eta/2) (I')^a (I'_*)^b / (calE^(a+1) calE_*^(b+1)) * vol * 1{I' + I'_* <= E}

    with the partner state drawn from the normalized Maxwellian, the
    post-collisional energies drawn uniformly on [0, E] and vol the
    volume of that box.
    """
    if n_samples < 2:
        raise ParameterError("Monte Carlo needs at least two samples")
    rng = np.random.default_rng(seed)
    alpha = mixture.check_index(at.species_index)
    sa = mixture[alpha]
    xi = np.asarray(at.xi, dtype=float)
    I = at.internal_energy if sa.polyatomic else 0.0
    parts = []
    for beta, sb in enumerate(mixture.species):
        mu = sa.mass * sb.mass / (sa.mass + sb.mass)
        C = model.coefficient(alpha, beta)
        xs = rng.standard_normal((n_samples, 3)) / math.sqrt(sb.mass)
        Is = rng.gamma(sb.exponent + 1.0, 1.0, n_samples) if sb.polyatomic else np.zeros(n_samples)
        g2 = np.sum((xi - xs) ** 2, axis=1)
        E = 0.5 * mu * g2 + I + Is
        val = 4.0 * math.pi * C * E ** (-0.5 * model.eta)
        if not sa.polyatomic and not sb.polyatomic:
            val = val * np.sqrt(g2)
        else:
            Ip = rng.random(n_samples) * E if sa.polyatomic else np.zeros(n_samples)
            Isp = rng.random(n_samples) * E if sb.polyatomic else np.zeros(n_samples)
            rest = E - Ip - Isp
            inside = rest >= 0
            gp = np.sqrt(2.0 * np.clip(rest, 0.0, None) / mu)
            val = val * gp * inside
            if sa.polyatomic:
                val = val * Ip**sa.exponent / E ** (sa.exponent + 1.0) * E
            if sb.polyatomic:
                val = val * Isp**sb.exponent / E ** (sb.exponent + 1.0) * E
        r = _mean(val)
        parts.append(IntegralResult(sb.number_density * r.value, sb.number_density * r.error, r.nodes))
    return _combine(parts)


def q_monte_carlo_monatomic(f: DistributionFunction, model: CrossSectionModel, at: PhasePoint,
                            n_samples: int = 1_000_000, seed: int = 0,
                            proposal_scale: float = 1.5) -> IntegralResult:
    """Q_alpha(f, f) at ``at`` for a purely monatomic mixture.

    Uses |g| sigma = C |g| for the reference model, the elastic map
    xi' = G + (m_b/M)|g| omega, a Gaussian proposal for the partner
    velocity and uniform scattering directions.
    """
    mixture = f.mixture
    if mixture.s1:
        raise ParameterError("the monatomic oracle needs a mixture without polyatomic species")
    if n_samples < 2:
        raise ParameterError("Monte Carlo needs at least two samples")
    rng = np.random.default_rng(seed)
    alpha = mixture.check_index(at.species_index)
    xi = np.asarray(at.xi, dtype=float)[None, :]
    f0 = f(alpha, xi)[0]
    ma = mixture[alpha].mass
    parts = []
    for beta, sb in enumerate(mixture.species):
        mb = sb.mass
        M = ma + mb
        C = model.coefficient(alpha, beta)
        s = proposal_scale
        xs = rng.standard_normal((n_samples, 3)) * s
        pdf = np.exp(-0.5 * np.sum(xs * xs, axis=1) / s**2) / (2.0 * math.pi * s * s) ** 1.5
        om = rng.standard_normal((n_samples, 3))
        om /= np.linalg.norm(om, axis=1, keepdims=True)
        G = (ma * xi + mb * xs) / M
        gn = np.linalg.norm(xi - xs, axis=1)
        xp = G + (mb / M) * gn[:, None] * om
        xsp = G - (ma / M) * gn[:, None] * om
        # sigma = C on this family (|g'| = |g|, no energy factor when eta = 0)
        E = 0.5 * ma * mb / M * gn**2
        sig = C * np.where(E > 0, E, 1.0) ** (-0.5 * model.eta)
        integrand = sig * gn * (f(alpha, xp) * f(beta, xsp) - f0 * f(beta, xs)) * 4.0 * math.pi
        parts.append(_mean(integrand / pdf))
    return _combine(parts)


def bimodal_monatomic(mixture: MixtureSpec, shift: float = 1.0, weights=(0.6, 0.4),
                      temperatures=(0.8, 1.3)) -> DistributionFunction:
    """Sum of two Maxwellians drifting in opposite x directions (a non-equilibrium test state)."""
    comps = []
    for sp in mixture.species:
        if sp.polyatomic:
            raise ParameterError("bimodal_monatomic is defined for monatomic species only")
        m, n = sp.mass, sp.number_density

        def comp(xi, I, _m=m, _n=n):
            out = 0.0
            for w, T, u in zip(weights, temperatures, (shift, -shift)):
                d2 = (xi[:, 0] - u) ** 2 + xi[:, 1] ** 2 + xi[:, 2] ** 2
                out = out + _n * w * (_m / (2.0 * math.pi * T)) ** 1.5 * np.exp(-_m * d2 / (2.0 * T))
            return out
        comps.append(comp)
    return DistributionFunction(mixture, tuple(comps), "bimodal")
