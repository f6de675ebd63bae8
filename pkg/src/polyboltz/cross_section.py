"""Scattering cross sections of hard-potential type with cutoff.

The model is

    sigma = C_ab * (|g'| / |g|) * E^(-eta/2) * Upsilon,
    Upsilon = (I')^(dof_a/2-1) (I'_*)^(dof_b/2-1) / (calE^(dof_a/2) calE_*^(dof_b/2)),

where calE equals the total energy E when the first partner is
polyatomic and 1 otherwise (likewise calE_* for the second partner), and
monatomic factors are absent.  ``collision_weight`` multiplies sigma by
the kinematic factors of the reduced collision integrals so that no
removable singularity in R or r survives.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .collision_geometry import CollisionEvent, reverse_event
from .errors import DomainError, ParameterError
from .mixture_model import MixtureSpec

__all__ = [
    "CrossSectionModel",
    "PerturbedCrossSection",
    "EnergyFactors",
    "SigmaValues",
    "BoundReport",
    "energy_factors",
    "sigma",
    "evaluate_sigma",
    "collision_weight",
    "literal_collision_weight",
    "microreversibility_residual",
    "bound_check_est1",
]

_DOMAIN_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class CrossSectionModel:
    """Hard potential with cutoff: symmetric coefficients ``C``, exponent ``eta`` in [0, 1).

    ``gamma_check`` is only used by :func:`bound_check_est1`.  Zero
    coefficients are accepted and switch the corresponding interaction
    off.
    """

    C: np.ndarray
    eta: float = 0.0
    gamma_check: float = 0.5
    kind: str = "hard_potential_cutoff"

    def __post_init__(self) -> None:
        C = np.array(self.C, dtype=float)
        if C.ndim == 0:
            C = C.reshape(1, 1)
        if C.ndim != 2 or C.shape[0] != C.shape[1]:
            raise ParameterError(f"C must be a square matrix, got shape {C.shape}")
        if not np.all(np.isfinite(C)) or np.any(C < 0):
            raise ParameterError("C entries must be finite and nonnegative")
        scale = max(float(np.max(np.abs(C))), 1.0)
        if np.max(np.abs(C - C.T)) > 1e-12 * scale:
            raise ParameterError("C must be symmetric (C_ab = C_ba)")
        if not (np.isfinite(self.eta) and 0.0 <= self.eta < 1.0):
            raise ParameterError(f"eta must satisfy 0 <= eta < 1, got {self.eta!r}")
        if not (0.0 < self.gamma_check < 1.0):
            raise ParameterError(f"gamma_check must lie in (0, 1), got {self.gamma_check!r}")
        if self.kind != "hard_potential_cutoff":
            raise ParameterError(f"unsupported cross-section kind {self.kind!r}")
        C.setflags(write=False)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "eta", float(self.eta))
        object.__setattr__(self, "gamma_check", float(self.gamma_check))

    @classmethod
    def uniform(cls, mixture: MixtureSpec, C: float = 1.0, eta: float = 0.0,
                gamma_check: float = 0.5) -> "CrossSectionModel":
        return cls(np.full((mixture.s, mixture.s), float(C)), eta, gamma_check)

    @property
    def is_reference_family(self) -> bool:
        """True when sigma has exactly the closed form above (no perturbation)."""
        return True

    def coefficient(self, alpha: int, beta: int) -> float:
        return float(self.C[alpha, beta])

    def scaled(self, factor: float) -> "CrossSectionModel":
        return CrossSectionModel(self.C * factor, self.eta, self.gamma_check, self.kind)

    def sigma(self, event: CollisionEvent) -> np.ndarray:
        return evaluate_sigma(self, event).values


class PerturbedCrossSection(CrossSectionModel):
    """A base model multiplied by an arbitrary factor of the event (negative controls)."""

    def __init__(self, base: CrossSectionModel, factor: Callable[[CollisionEvent], np.ndarray],
                 label: str = "perturbed"):
        super().__init__(base.C, base.eta, base.gamma_check, base.kind)
        object.__setattr__(self, "factor", factor)
        object.__setattr__(self, "label", label)

    @property
    def is_reference_family(self) -> bool:
        return False

    def sigma(self, event: CollisionEvent) -> np.ndarray:
        return evaluate_sigma(self, event).values * self.factor(event)


@dataclass(frozen=True, eq=False)
class EnergyFactors:
    E: np.ndarray
    calE: np.ndarray
    calE_star: np.ndarray
    upsilon: np.ndarray


@dataclass(frozen=True, eq=False)
class SigmaValues:
    values: np.ndarray
    degenerate: np.ndarray


def energy_factors(event: CollisionEvent, primed: bool = False) -> EnergyFactors:
    """calE, calE_* and Upsilon of an event.

    With ``primed=True`` calE and calE_* are recomputed from the
    post-collisional variables; they agree with the pre-collisional
    values because both equal the conserved total energy.
    """
    case = event.case
    if primed:
        E = 0.5 * case.mu * event.g_prime_norm**2
        E = E + (event.I_p if case.poly_a else 0.0) + (event.I_star_p if case.poly_b else 0.0)
    else:
        E = event.E
    ones = np.ones_like(E)
    calE = E if case.poly_a else ones
    calE_star = E if case.poly_b else ones
    ups = np.ones_like(E)
    if case.poly_a:
        ups = ups * _power(event.I_p, case.exp_a) / calE ** (case.exp_a + 1.0)
    if case.poly_b:
        ups = ups * _power(event.I_star_p, case.exp_b) / calE_star ** (case.exp_b + 1.0)
    return EnergyFactors(E, calE, calE_star, ups)


def _power(x: np.ndarray, p: float) -> np.ndarray:
    return np.ones_like(x) if p == 0.0 else x**p


def evaluate_sigma(model: CrossSectionModel, event: CollisionEvent) -> SigmaValues:
    """Reference-family sigma with the degenerate-|g| mask.

    Raises DomainError if mu|g|^2 < 2 dI beyond rounding; pairs with
    |g| = 0 get sigma = 0 and are flagged as degenerate.
    """
    case = event.case
    g2 = event.g_norm**2
    arg = g2 - 2.0 * event.delta_I / case.mu
    tol = _DOMAIN_TOL * np.maximum(g2 + event.E / case.mu, 1e-300)
    if np.any(arg < -tol):
        k = int(np.flatnonzero(arg < -tol)[0])
        raise DomainError(f"event {k} violates mu|g|^2 > 2 dI (|g|^2 - 2dI/mu = {arg[k]:.3e})")
    # the stored |g'| equals sqrt(|g|^2 - 2 dI/mu) but avoids the cancellation
    # that formula suffers when |g| << |g'|
    gp = event.g_prime_norm
    degenerate = event.g_norm == 0.0
    safe_g = np.where(degenerate, 1.0, event.g_norm)
    f = energy_factors(event)
    C = model.coefficient(case.alpha, case.beta)
    E_pow = np.ones_like(event.E) if model.eta == 0.0 else np.where(
        event.E > 0, event.E, 1.0) ** (-0.5 * model.eta)
    values = np.where(degenerate, 0.0, C * gp / safe_g * E_pow * f.upsilon)
    return SigmaValues(values, degenerate)


def sigma(model: CrossSectionModel, event: CollisionEvent) -> np.ndarray:
    return model.sigma(event)


def collision_weight(model: CrossSectionModel, event: CollisionEvent) -> np.ndarray:
    """sigma|g| (mono/mono), sigma|g|E (mixed) or sigma|g|E^2(1-R) (poly/poly)."""
    case = event.case
    w = model.sigma(event) * event.g_norm
    if case.needs_r:
        return w * event.E**2 * (1.0 - event.R)
    if case.needs_R:
        return w * event.E
    return w


def literal_collision_weight(model: CrossSectionModel, event: CollisionEvent) -> np.ndarray:
    """The reduced kernels written with explicit R, r and I' powers (test oracle only).

    Singular at R or r in {0, 1} when the exponents are negative; the
    production weight avoids this by cancelling those factors.
    """
    case = event.case
    s = model.sigma(event)
    g = event.g_norm
    E = event.E
    R, r = event.R, event.r
    if not case.needs_R:
        return s * g
    if case.needs_r:
        a, b = case.exp_a, case.exp_b
        B2 = s * g * E**2 / (_power(r, a) * _power(1.0 - r, b) * (1.0 - R) ** (a + b) * np.sqrt(R))
        return B2 * _power(r, a) * _power(1.0 - r, b) * (1.0 - R) ** (a + b + 1.0) * np.sqrt(R)
    p = case.exp_b if case.poly_b else case.exp_a
    B1 = s * g * E / (np.sqrt(R) * _power(1.0 - R, p))
    return B1 * _power(1.0 - R, p) * np.sqrt(R)


def _phi(x: np.ndarray, p: float, present: bool) -> np.ndarray:
    return _power(x, p) if present else np.ones_like(x)


def microreversibility_residual(model: CrossSectionModel, event: CollisionEvent,
                                relative: bool = False) -> np.ndarray:
    """|LHS - RHS| of the detailed-balance relation for each event.

    LHS = I^a I_*^b |g|^2 sigma(pre -> post) and
    RHS = I'^a I'_*^b |g'|^2 sigma(post -> pre), where the reverse
    collision is reconstructed from the post-collisional pair.
    """
    case = event.case
    back = reverse_event(event)
    lhs = (_phi(event.I, case.exp_a, case.poly_a) * _phi(event.I_star, case.exp_b, case.poly_b)
           * event.g_norm**2 * model.sigma(event))
    rhs = (_phi(back.I, case.exp_a, case.poly_a) * _phi(back.I_star, case.exp_b, case.poly_b)
           * back.g_norm**2 * model.sigma(back))
    res = np.abs(lhs - rhs)
    if relative:
        return res / np.maximum(np.abs(lhs), 1e-300)
    return res


@dataclass(frozen=True)
class BoundReport:
    max_ratio: float
    mean_ratio: float
    count: int
    gamma: float
    bound_constant: float

    @property
    def finite(self) -> bool:
        return bool(np.isfinite(self.max_ratio))


def bound_check_est1(model: CrossSectionModel, events: CollisionEvent | list[CollisionEvent]
                     ) -> BoundReport:
    """Max of sigma|g|^2 / (Upsilon (Psi + Psi^(gamma/2))) with Psi = |g| |g'|."""
    batch = events if isinstance(events, list) else [events]
    ratios = []
    for ev in batch:
        if len(ev) == 0:
            continue
        gp = np.sqrt(np.clip(ev.g_norm**2 - 2.0 * ev.delta_I / ev.case.mu, 0.0, None))
        psi = ev.g_norm * gp
        ups = energy_factors(ev).upsilon
        s = model.sigma(ev)
        ok = psi > 0
        ratios.append(s[ok] * ev.g_norm[ok] ** 2
                      / (ups[ok] * (psi[ok] + psi[ok] ** (0.5 * model.gamma_check))))
    if not ratios or sum(r.size for r in ratios) == 0:
        raise ParameterError("bound check needs a nonempty batch of events")
    allr = np.concatenate(ratios)
    return BoundReport(float(np.max(allr)), float(np.mean(allr)), int(allr.size),
                       model.gamma_check, float(np.max(model.C)))
