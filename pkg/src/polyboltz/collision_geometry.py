"""The binary collision map, case by case.

A collision between species alpha and beta is described by the
pre-collisional pair and three parameters: the scattering direction
omega, the share R of the total collision energy left as relative
kinetic energy, and the split r of the remaining internal energy between
two polyatomic partners.  All functions are vectorized: an event holds
arrays with a leading batch axis.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .mixture_model import MixtureSpec, PhasePoint

__all__ = [
    "PairCase",
    "pair_case",
    "CollisionPair",
    "CollisionParams",
    "CollisionEvent",
    "reduced_mass",
    "total_energy",
    "collide",
    "primed_state",
    "measure_weight",
    "energy_jacobian",
    "parameter_jacobian",
    "reverse_event",
    "state_from_collision_coordinates",
    "sample_events",
]

_UNIT_TOL = 1e-12


def reduced_mass(m_a: float, m_b: float) -> float:
    """m_a m_b / (m_a + m_b)."""
    if not (np.isfinite(m_a) and np.isfinite(m_b) and m_a > 0 and m_b > 0):
        raise ParameterError(f"masses must be positive, got ({m_a!r}, {m_b!r})")
    return m_a * m_b / (m_a + m_b)


@dataclass(frozen=True)
class PairCase:
    """Static data of an ordered species pair (alpha, beta)."""

    alpha: int
    beta: int
    m_a: float
    m_b: float
    poly_a: bool
    poly_b: bool
    exp_a: float
    exp_b: float

    @property
    def mu(self) -> float:
        return reduced_mass(self.m_a, self.m_b)

    @property
    def total_mass(self) -> float:
        return self.m_a + self.m_b

    @property
    def name(self) -> str:
        return f"{'poly' if self.poly_a else 'mono'}/{'poly' if self.poly_b else 'mono'}"

    @property
    def needs_R(self) -> bool:
        return self.poly_a or self.poly_b

    @property
    def needs_r(self) -> bool:
        return self.poly_a and self.poly_b

    def swapped(self) -> "PairCase":
        return PairCase(self.beta, self.alpha, self.m_b, self.m_a, self.poly_b, self.poly_a,
                        self.exp_b, self.exp_a)


def pair_case(mixture: MixtureSpec, alpha: int, beta: int) -> PairCase:
    a = mixture[mixture.check_index(alpha)]
    b = mixture[mixture.check_index(beta)]
    return PairCase(int(alpha), int(beta), a.mass, b.mass, a.polyatomic, b.polyatomic,
                    a.exponent, b.exponent)


@dataclass(frozen=True)
class CollisionPair:
    a: PhasePoint
    b: PhasePoint


@dataclass(frozen=True)
class CollisionParams:
    omega: tuple[float, float, float]
    R: float | None = None
    r: float | None = None

    def __post_init__(self) -> None:
        w = np.asarray(self.omega, dtype=float).reshape(3)
        if abs(np.linalg.norm(w) - 1.0) > _UNIT_TOL:
            raise ParameterError(f"omega must be a unit vector, |omega| = {np.linalg.norm(w)!r}")
        object.__setattr__(self, "omega", tuple(w.tolist()))
        for name in ("R", "r"):
            v = getattr(self, name)
            if v is not None and not 0.0 <= v <= 1.0:
                raise ParameterError(f"{name} must lie in [0, 1], got {v!r}")


@dataclass(frozen=True, eq=False)
class CollisionEvent:
    """A batch of collisions with their post-collisional states.

    Internal energies of monatomic participants are stored as zeros and
    never enter any formula.  ``delta_I`` is the internal-energy gain
    (post minus pre) of the participants that have internal energy.
    """

    case: PairCase
    xi: np.ndarray
    xi_star: np.ndarray
    I: np.ndarray
    I_star: np.ndarray
    omega: np.ndarray
    R: np.ndarray
    r: np.ndarray
    xi_p: np.ndarray
    xi_star_p: np.ndarray
    I_p: np.ndarray
    I_star_p: np.ndarray
    g: np.ndarray
    g_norm: np.ndarray
    g_prime_norm: np.ndarray
    G: np.ndarray
    E: np.ndarray
    delta_I: np.ndarray

    @property
    def mu(self) -> float:
        return self.case.mu

    @property
    def delta_I_scaled(self) -> np.ndarray:
        """Internal-energy gap divided by the reduced mass."""
        return self.delta_I / self.case.mu

    def __len__(self) -> int:
        return self.E.shape[0]

    def primed_a(self, k: int = 0) -> PhasePoint:
        return PhasePoint(self.case.alpha, self.xi_p[k], float(self.I_p[k]))

    def primed_b(self, k: int = 0) -> PhasePoint:
        return PhasePoint(self.case.beta, self.xi_star_p[k], float(self.I_star_p[k]))

    @property
    def primed_pair(self) -> CollisionPair:
        return CollisionPair(self.primed_a(), self.primed_b())


def _as_batch(v, width: int | None, n: int | None = None) -> np.ndarray:
    arr = np.asarray(v, dtype=float)
    if width is None:
        arr = np.atleast_1d(arr)
        return arr if n is None else np.broadcast_to(arr, (n,))
    arr = np.atleast_2d(arr)
    return arr if n is None else np.broadcast_to(arr, (n, width))


def total_energy(case: PairCase, xi, xi_star, I=None, I_star=None) -> np.ndarray:
    """mu |g|^2 / 2 plus the internal energies of polyatomic participants."""
    g = np.atleast_2d(np.asarray(xi, dtype=float) - np.asarray(xi_star, dtype=float))
    E = 0.5 * case.mu * np.einsum("ij,ij->i", g, g)
    if case.poly_a:
        E = E + _as_batch(I, None)
    if case.poly_b:
        E = E + _as_batch(I_star, None)
    return E


def collide(case: PairCase, xi, xi_star, I=None, I_star=None, omega=(0.0, 0.0, 1.0),
            R=None, r=None, check: bool = True) -> CollisionEvent:
    """Post-collisional states for a batch of pairs and parameters.

    Arguments broadcast against the batch axis.  ``R`` is required when
    at least one partner is polyatomic and ``r`` when both are.
    """
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    xi_star = np.atleast_2d(np.asarray(xi_star, dtype=float))
    omega = np.atleast_2d(np.asarray(omega, dtype=float))
    n = max(xi.shape[0], xi_star.shape[0], omega.shape[0],
            np.size(I) if I is not None else 1, np.size(I_star) if I_star is not None else 1,
            np.size(R) if R is not None else 1, np.size(r) if r is not None else 1)
    xi = np.broadcast_to(xi, (n, 3))
    xi_star = np.broadcast_to(xi_star, (n, 3))
    omega = np.broadcast_to(omega, (n, 3))
    zeros = np.zeros(n)

    if case.poly_a:
        if I is None:
            raise ParameterError("internal energy I is required for a polyatomic first partner")
        I = _as_batch(I, None, n)
    else:
        I = zeros
    if case.poly_b:
        if I_star is None:
            raise ParameterError("internal energy I_* is required for a polyatomic second partner")
        I_star = _as_batch(I_star, None, n)
    else:
        I_star = zeros
    if case.needs_R:
        if R is None:
            raise ParameterError(f"parameter R is required for a {case.name} collision")
        R = _as_batch(R, None, n)
    elif R is not None:
        raise ParameterError("parameter R is only defined when a partner is polyatomic")
    else:
        R = np.ones(n)
    if case.needs_r:
        if r is None:
            raise ParameterError("parameter r is required for a poly/poly collision")
        r = _as_batch(r, None, n)
    elif r is not None:
        raise ParameterError("parameter r is only defined for poly/poly collisions")
    else:
        r = zeros

    if check:
        norms = np.sqrt(np.einsum("ij,ij->i", omega, omega))
        if np.any(np.abs(norms - 1.0) > _UNIT_TOL):
            raise ParameterError("omega must be a unit vector")
        if np.any((R < 0) | (R > 1)) or np.any((r < 0) | (r > 1)):
            raise ParameterError("R and r must lie in [0, 1]")
        if np.any(I < 0) or np.any(I_star < 0):
            raise ParameterError("internal energies must be nonnegative")

    ma, mb, M = case.m_a, case.m_b, case.total_mass
    mu = case.mu
    G = (ma * xi + mb * xi_star) / M
    g = xi - xi_star
    g2 = np.einsum("ij,ij->i", g, g)
    g_norm = np.sqrt(g2)
    E = 0.5 * mu * g2 + I + I_star

    if not case.needs_R:
        gp = g_norm
        Ip, Isp = zeros, zeros
        dI = zeros
    else:
        gp = np.sqrt(2.0 * R * E / mu)
        rest = (1.0 - R) * E
        if case.poly_a and case.poly_b:
            Ip, Isp = r * rest, (1.0 - r) * rest
            dI = Ip + Isp - I - I_star
        elif case.poly_a:
            Ip, Isp = rest, zeros
            dI = Ip - I
        else:
            Ip, Isp = zeros, rest
            dI = Isp - I_star

    xi_p = G + omega * (mb / M * gp)[:, None]
    xi_star_p = G - omega * (ma / M * gp)[:, None]
    if not case.needs_R:
        still = g_norm == 0.0
        if np.any(still):
            xi_p = np.where(still[:, None], xi, xi_p)
            xi_star_p = np.where(still[:, None], xi_star, xi_star_p)

    return CollisionEvent(case, np.array(xi), np.array(xi_star), I, I_star, np.array(omega), R, r,
                          xi_p, xi_star_p, Ip, Isp, g, g_norm, gp, G, E, dI)


def primed_state(mixture: MixtureSpec, pair: CollisionPair, params: CollisionParams) -> CollisionEvent:
    """Single-event form of :func:`collide` built from typed inputs."""
    case = pair_case(mixture, pair.a.species_index, pair.b.species_index)
    return collide(case, pair.a.xi, pair.b.xi, pair.a.internal_energy, pair.b.internal_energy,
                   params.omega,
                   params.R if case.needs_R else _reject(params.R, "R"),
                   params.r if case.needs_r else _reject(params.r, "r"))


def _reject(v, name):
    if v is not None:
        raise ParameterError(f"parameter {name} is not defined for this collision case")
    return None


def measure_weight(event: CollisionEvent) -> np.ndarray:
    """Jacobian of the post-collisional phase volume in the (E, omega, R, r) parametrization.

    poly/poly: sqrt(2) E^(5/2) (1-R) R^(1/2) / mu^(3/2);
    mixed: sqrt(2) (E/mu)^(3/2) R^(1/2);
    mono/mono: |g'|^2 (the speed itself is the free variable there).
    """
    case = event.case
    mu = case.mu
    if not case.needs_R:
        return event.g_prime_norm**2
    if case.needs_r:
        return np.sqrt(2.0) / mu**1.5 * event.E**2.5 * (1.0 - event.R) * np.sqrt(event.R)
    return np.sqrt(2.0) * (event.E / mu) ** 1.5 * np.sqrt(event.R)


def parameter_jacobian(case: PairCase, E, R=None) -> np.ndarray:
    """Phase volume of a pair per unit (G, E, direction, R, r) at total energy E.

    Matches :func:`measure_weight` for pairs with internal energy.  For
    mono/mono pairs the speed is traded for E via d|g| = dE / (mu |g|),
    giving |g| / mu.
    """
    E = np.asarray(E, dtype=float)
    mu = case.mu
    if not case.needs_R:
        return np.sqrt(2.0 * E / mu) / mu
    R = np.asarray(R, dtype=float)
    if case.needs_r:
        return np.sqrt(2.0) / mu**1.5 * E**2.5 * (1.0 - R) * np.sqrt(R)
    return np.sqrt(2.0) * (E / mu) ** 1.5 * np.sqrt(R)


def energy_jacobian(event: CollisionEvent) -> np.ndarray:
    """:func:`parameter_jacobian` of the post-collisional state of ``event``."""
    return parameter_jacobian(event.case, event.E, event.R)


def reverse_event(event: CollisionEvent, exact: bool = True) -> CollisionEvent:
    """The collision that maps the post-collisional pair back to the original pair.

    With ``exact`` the returned event carries the original pair as its
    post-collisional state; otherwise the recomputed (rounded) state.
    """
    case = event.case
    n = len(event)
    g = event.g
    gn = event.g_norm
    omega = np.where(gn[:, None] > 0, g / np.where(gn > 0, gn, 1.0)[:, None],
                     np.array([0.0, 0.0, 1.0]))
    R = r = None
    if case.needs_R:
        E = event.E
        safe_E = np.where(E > 0, E, 1.0)
        R = np.where(E > 0, 0.5 * case.mu * gn**2 / safe_E, 1.0)
        R = np.clip(R, 0.0, 1.0)
        if case.needs_r:
            rest = (1.0 - R) * E
            r = np.where(rest > 0, event.I / np.where(rest > 0, rest, 1.0), 0.5)
            r = np.clip(r, 0.0, 1.0)
    if not n:
        return event
    back = collide(case, event.xi_p, event.xi_star_p,
                   event.I_p if case.poly_a else None,
                   event.I_star_p if case.poly_b else None,
                   omega, R, r, check=False)
    if not exact:
        return back
    # the reverse map lands on the original pair; store it exactly instead of
    # its rounded reconstruction
    return dataclasses.replace(back, xi_p=event.xi, xi_star_p=event.xi_star, I_p=event.I,
                               I_star_p=event.I_star, g_prime_norm=event.g_norm,
                               delta_I=-event.delta_I)


def state_from_collision_coordinates(case: PairCase, G, E, direction, R=None, r=None):
    """Pair state with centre-of-mass velocity G, total energy E and parameters.

    Uses the same map as the post-collisional construction, so a state
    and the collision it results from share every coordinate except the
    parameters.  Returns (xi, xi_star, I, I_star).
    """
    G = np.atleast_2d(np.asarray(G, dtype=float))
    E = np.atleast_1d(np.asarray(E, dtype=float))
    direction = np.atleast_2d(np.asarray(direction, dtype=float))
    mu, M = case.mu, case.total_mass
    if not case.needs_R:
        gn = np.sqrt(2.0 * E / mu)
        I = I_star = np.zeros_like(gn)
    else:
        R = np.asarray(R, dtype=float)
        gn = np.sqrt(2.0 * R * E / mu)
        rest = (1.0 - R) * E
        if case.needs_r:
            r = np.asarray(r, dtype=float)
            I, I_star = r * rest, (1.0 - r) * rest
        elif case.poly_a:
            I, I_star = rest, np.zeros_like(rest)
        else:
            I, I_star = np.zeros_like(rest), rest
    xi = G + direction * (case.m_b / M * gn)[..., None]
    xi_star = G - direction * (case.m_a / M * gn)[..., None]
    return xi, xi_star, I, I_star


def _random_unit(rng: np.random.Generator, n: int) -> np.ndarray:
    v = rng.standard_normal((n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def sample_events(case: PairCase, n: int, rng: np.random.Generator, xi_max: float = 5.0,
                  I_max: float = 10.0) -> CollisionEvent:
    """Random events: velocities uniform in the ball |xi| <= xi_max, energies uniform on [0, I_max]."""
    def ball(k):
        return _random_unit(rng, k) * (xi_max * rng.random(k) ** (1.0 / 3.0))[:, None]

    xi, xis = ball(n), ball(n)
    I = rng.random(n) * I_max if case.poly_a else None
    Is = rng.random(n) * I_max if case.poly_b else None
    R = rng.random(n) if case.needs_R else None
    r = rng.random(n) if case.needs_r else None
    return collide(case, xi, xis, I, Is, _random_unit(rng, n), R, r)
