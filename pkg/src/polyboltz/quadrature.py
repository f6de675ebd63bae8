"""Deterministic tensor quadrature and a seeded Monte Carlo engine.

Every rule returned here carries *plain* weights: ``sum(w * F(x))``
approximates the integral of ``F`` against Lebesgue measure (or the
uniform measure on the sphere).  The analytic weight function that makes
a Gauss rule exact (Gaussian, Gamma or Jacobi density) has already been
divided out, so callers never need to know which family produced a node.
The 1-D building blocks (``hermite``, ``laguerre``, ``jacobi01``) keep
their classical weights for tests of exactness.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy import linalg, special

from .errors import ParameterError, QuadratureError

__all__ = [
    "QuadratureSpec",
    "NodeSet",
    "IntegralResult",
    "PhaseRule",
    "hermite",
    "laguerre",
    "legendre",
    "half_range",
    "jacobi01",
    "sphere",
    "tensor",
    "build_rule",
    "integrate",
    "integrate_nested",
    "monte_carlo",
    "phase_rule",
    "radial_rule",
]

_MAX_ORDER = 400
_MAX_HALF_RANGE = 160


@dataclass(frozen=True)
class QuadratureSpec:
    """Orders, scalings and Monte Carlo settings for every rule family.

    ``hermite_order`` and ``laguerre_order`` drive phase-space rules for
    one species.  ``sphere_theta`` x ``sphere_phi`` is the product sphere
    rule used for the scattering direction.  ``legendre_order_R`` and
    ``legendre_order_r`` size the rules on the energy-split parameters.
    ``radial_order``, ``polar_order`` and ``azimuth_order`` size the
    spherical partner-velocity rule used by pointwise operator
    evaluation.  ``collision_*`` fields size the rule in collision
    coordinates (centre-of-mass velocity and total energy) used for weak
    forms and Galerkin assembly.
    """

    hermite_order: int = 16
    laguerre_order: int = 12
    sphere_theta: int = 4
    sphere_phi: int = 8
    legendre_order_R: int = 3
    legendre_order_r: int = 3
    radial_order: int = 20
    polar_order: int = 24
    azimuth_order: int = 4
    collision_G_order: int = 4
    collision_E_order: int = 6
    velocity_scale: float = 1.0
    energy_scale: float = 1.0
    mc_seed: int = 20240611
    mc_samples: int = 1_000_000

    _ORDER_FIELDS = (
        "hermite_order",
        "laguerre_order",
        "sphere_theta",
        "sphere_phi",
        "legendre_order_R",
        "legendre_order_r",
        "radial_order",
        "polar_order",
        "azimuth_order",
        "collision_G_order",
        "collision_E_order",
    )

    def __post_init__(self) -> None:
        for name in self._ORDER_FIELDS:
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or isinstance(value, bool):
                raise ParameterError(f"{name} must be an integer, got {value!r}")
            if not 1 <= value <= _MAX_ORDER:
                raise ParameterError(f"{name} must lie in [1, {_MAX_ORDER}], got {value}")
        for name in ("velocity_scale", "energy_scale"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise ParameterError(f"{name} must be positive and finite, got {value!r}")
        if self.mc_samples < 2:
            raise ParameterError("mc_samples must be at least 2")

    def replace(self, **changes) -> "QuadratureSpec":
        return dataclasses.replace(self, **changes)

    def refined(self, factor: int = 2) -> "QuadratureSpec":
        """All orders multiplied by ``factor`` (capped at the supported maximum)."""
        changes = {
            name: min(_MAX_ORDER, getattr(self, name) * factor) for name in self._ORDER_FIELDS
        }
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True, eq=False)
class NodeSet:
    """Nodes (rows of ``points``) with matching weights.

    ``labels`` names the columns of ``points`` so composite rules can be
    unpacked without positional bookkeeping.
    """

    points: np.ndarray
    weights: np.ndarray
    labels: tuple[str, ...]

    def __post_init__(self) -> None:
        points = np.array(self.points, dtype=float)
        if points.ndim == 1:
            points = points[:, None]
        weights = np.array(self.weights, dtype=float).reshape(-1)
        if points.shape[0] != weights.shape[0]:
            raise ParameterError("points and weights disagree in length")
        if points.shape[1] != len(self.labels):
            raise ParameterError("one label per coordinate column is required")
        if not np.all(np.isfinite(weights)):
            raise ParameterError("quadrature weights must be finite")
        points.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "labels", tuple(self.labels))

    def __len__(self) -> int:
        return self.weights.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def column(self, label: str) -> np.ndarray:
        return self.points[:, self.labels.index(label)]

    def columns(self, prefix: str) -> np.ndarray:
        idx = [i for i, name in enumerate(self.labels) if name.startswith(prefix)]
        return self.points[:, idx]


@dataclass(frozen=True)
class IntegralResult:
    value: float
    error: float
    nodes: int


@dataclass(frozen=True, eq=False)
class PhaseRule:
    """Plain-weight rule over one species' phase space (velocity and, if present, energy)."""

    xi: np.ndarray
    I: np.ndarray | None
    weights: np.ndarray

    def __len__(self) -> int:
        return self.weights.shape[0]


def _check_order(n: int) -> int:
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
        raise ParameterError(f"quadrature order must be an integer, got {n!r}")
    if not 1 <= n <= _MAX_ORDER:
        raise ParameterError(f"unsupported quadrature order {n}")
    return int(n)


@lru_cache(maxsize=None)
def _hermite(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = special.roots_hermite(n)
    # symmetrize to remove round-off asymmetry between mirrored nodes
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    return x, w


def hermite(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Hermite nodes and weights for the weight exp(-x^2) on the real line."""
    x, w = _hermite(_check_order(n))
    return x.copy(), w.copy()


@lru_cache(maxsize=None)
def _laguerre(n: int, alpha: float) -> tuple[np.ndarray, np.ndarray]:
    if alpha == 0.0:
        return special.roots_laguerre(n)
    return special.roots_genlaguerre(n, alpha)


def laguerre(n: int, alpha: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """Generalized Gauss-Laguerre rule for the weight x^alpha exp(-x) on [0, inf)."""
    if not alpha > -1:
        raise ParameterError(f"Laguerre parameter must exceed -1, got {alpha}")
    x, w = _laguerre(_check_order(n), float(alpha))
    return x.copy(), w.copy()


def legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre rule on [-1, 1]."""
    x, w = _legendre_cached(_check_order(n))
    return x.copy(), w.copy()


@lru_cache(maxsize=None)
def _legendre_cached(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = special.roots_legendre(n)
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    return x, w


@lru_cache(maxsize=None)
def _jacobi01(n: int, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
    if a > b:
        x, w = _jacobi01(n, b, a)
        return (1.0 - x)[::-1].copy(), w[::-1].copy()
    if a == 0.0 and b == 0.0:
        t, w = _legendre_cached(n)
    else:
        # scipy's weight is (1-t)^alpha (1+t)^beta on [-1, 1]
        t, w = special.roots_jacobi(n, b, a)
    x = 0.5 * (1.0 + t)
    return x, w / 2.0 ** (a + b + 1.0)


def jacobi01(n: int, a: float = 0.0, b: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Jacobi rule for the weight x^a (1-x)^b on [0, 1].

    The rule for (b, a) is the exact mirror image x -> 1 - x of the rule
    for (a, b), which keeps species-exchange symmetries exact in floating
    point.
    """
    if not (a > -1 and b > -1):
        raise ParameterError(f"Jacobi exponents must exceed -1, got ({a}, {b})")
    x, w = _jacobi01(_check_order(n), float(a), float(b))
    return x.copy(), w.copy()


@lru_cache(maxsize=None)
def _half_range(n: int, power: float) -> tuple[np.ndarray, np.ndarray]:
    # discretize the measure with composite Gauss-Legendre (geometric panels
    # near 0 for the x^power singularity), then run the Stieltjes procedure
    # on normalized vectors and diagonalize the Jacobi matrix
    t, tw = special.roots_legendre(24)
    edges = np.concatenate([[0.0], 0.25 * 2.0 ** np.arange(-30.0, 0.0), np.arange(0.25, 14.0, 0.125)])
    lo, hi = edges[:-1], edges[1:]
    x = (lo[:, None] + (hi - lo)[:, None] * (t[None, :] + 1.0) / 2.0).ravel()
    w = ((hi - lo)[:, None] / 2.0 * tw[None, :]).ravel() * x**power * np.exp(-x * x)
    mu0 = w.sum()
    a = np.zeros(n)
    b = np.zeros(n)
    p_prev = np.zeros_like(x)
    p = np.full_like(x, 1.0 / np.sqrt(mu0))
    for k in range(n):
        a[k] = np.sum(w * x * p * p)
        q = (x - a[k]) * p - (b[k - 1] if k else 0.0) * p_prev
        if k + 1 < n:
            b[k] = np.sqrt(np.sum(w * q * q))
            p_prev, p = p, q / b[k]
    nodes, vecs = linalg.eigh_tridiagonal(a, b[:n - 1])
    return nodes, mu0 * vecs[0] ** 2


def half_range(n: int, power: float = 2.0) -> tuple[np.ndarray, np.ndarray]:
    """Gauss rule for the weight x^power exp(-x^2) on [0, inf).

    Exact for polynomials in x of degree below 2n (odd powers included,
    unlike a Laguerre rule in x^2).
    """
    if not power > -1:
        raise ParameterError(f"half-range power must exceed -1, got {power}")
    n = _check_order(n)
    if n > _MAX_HALF_RANGE:
        raise ParameterError(f"half-range rules support at most {_MAX_HALF_RANGE} nodes, got {n}")
    x, w = _half_range(n, float(power))
    return x.copy(), w.copy()


def sphere(n_theta: int, n_phi: int) -> NodeSet:
    """Product rule on the unit sphere: Gauss-Legendre in cos(theta) times uniform phi.

    Weights sum to 4*pi.  With an even ``n_phi`` the node set is closed
    under the antipodal map.
    """
    c, wc = legendre(n_theta)
    n_phi = _check_order(n_phi)
    phi = 2.0 * np.pi * (np.arange(n_phi) + 0.5) / n_phi
    s = np.sqrt(np.clip(1.0 - c * c, 0.0, None))
    cc, pp = np.meshgrid(c, phi, indexing="ij")
    ss, _ = np.meshgrid(s, phi, indexing="ij")
    pts = np.stack([ss * np.cos(pp), ss * np.sin(pp), cc], axis=-1).reshape(-1, 3)
    w = np.repeat(wc, n_phi) * (2.0 * np.pi / n_phi)
    return NodeSet(pts, w, ("wx", "wy", "wz"))


def tensor(*sets: NodeSet) -> NodeSet:
    """Tensor product of node sets; the last factor varies fastest."""
    if not sets:
        raise ParameterError("tensor() needs at least one factor")
    points = sets[0].points
    weights = sets[0].weights
    labels = list(sets[0].labels)
    for ns in sets[1:]:
        n0, n1 = len(weights), len(ns)
        points = np.concatenate(
            [np.repeat(points, n1, axis=0), np.tile(ns.points, (n0, 1))], axis=1
        )
        weights = np.repeat(weights, n1) * np.tile(ns.weights, n0)
        labels.extend(ns.labels)
    return NodeSet(points, weights, tuple(labels))


def build_rule(spec: QuadratureSpec, domain: str, **params) -> NodeSet:
    """Build a rule with *classical* weights for one of the named domains.

    ``velocity3``: 3-D Gauss-Hermite, weight exp(-|x|^2).
    ``energy``: Gauss-Laguerre, weight x^alpha exp(-x) (``alpha`` default 0).
    ``sphere``: product sphere rule, uniform weight.
    ``unit_interval``: Gauss-Jacobi on [0, 1] with exponents ``a``, ``b``
    (default 0, i.e. Gauss-Legendre); ``which`` picks the R or r order.
    ``composite``: tensor product of ``parts``, a sequence of
    ``(domain, params)`` pairs.
    """
    if domain == "velocity3":
        x, w = hermite(spec.hermite_order)
        return tensor(NodeSet(x, w, ("x",)), NodeSet(x, w, ("y",)), NodeSet(x, w, ("z",)))
    if domain == "energy":
        x, w = laguerre(spec.laguerre_order, params.get("alpha", 0.0))
        return NodeSet(x, w, ("I",))
    if domain == "sphere":
        return sphere(spec.sphere_theta, spec.sphere_phi)
    if domain == "unit_interval":
        which = params.get("which", "R")
        n = spec.legendre_order_R if which == "R" else spec.legendre_order_r
        x, w = jacobi01(n, params.get("a", 0.0), params.get("b", 0.0))
        return NodeSet(x, w, (which,))
    if domain == "composite":
        parts: Sequence[tuple[str, dict]] = params.get("parts", ())
        return tensor(*(build_rule(spec, d, **p) for d, p in parts))
    raise ParameterError(f"unknown quadrature domain {domain!r}")


def _checked_values(values: np.ndarray, points: np.ndarray, labels: Sequence[str]) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    bad = ~np.isfinite(values)
    if np.any(bad):
        k = int(np.flatnonzero(bad.reshape(-1))[0])
        row = points[k] if points.ndim == 2 else points
        coords = ", ".join(f"{lab}={val:.6g}" for lab, val in zip(labels, np.atleast_1d(row)))
        raise QuadratureError(f"integrand is not finite at node {k} ({coords})")
    return values


def integrate(
    rule: NodeSet,
    integrand: Callable[[np.ndarray], np.ndarray],
    reference: NodeSet | None = None,
) -> IntegralResult:
    """Weighted sum of ``integrand(rule.points)``.

    When ``reference`` (a finer rule for the same integral) is supplied,
    the returned value is the reference sum and the error estimate is the
    difference between the two sums.  Without it the error is NaN.
    """
    values = _checked_values(integrand(rule.points), rule.points, rule.labels)
    coarse = float(np.sum(rule.weights * values))
    if reference is None:
        return IntegralResult(coarse, float("nan"), len(rule))
    ref_values = _checked_values(integrand(reference.points), reference.points, reference.labels)
    fine = float(np.sum(reference.weights * ref_values))
    return IntegralResult(fine, abs(fine - coarse), len(rule) + len(reference))


def integrate_nested(
    spec: QuadratureSpec,
    build: Callable[[QuadratureSpec], NodeSet],
    integrand: Callable[[np.ndarray], np.ndarray],
) -> IntegralResult:
    """Integrate with ``build(spec)`` and ``build(spec.refined())``; see :func:`integrate`."""
    return integrate(build(spec), integrand, reference=build(spec.refined()))


def monte_carlo(
    integrand: Callable[[np.ndarray], np.ndarray],
    sampler: Callable[[np.random.Generator, int], tuple[np.ndarray, np.ndarray]],
    n_samples: int,
    seed: int,
    batch: int = 200_000,
) -> IntegralResult:
    """Importance-sampled Monte Carlo estimate with its standard error.

    ``sampler(rng, k)`` returns ``k`` sample points and their proposal
    densities.  Batches are processed in a fixed order so the estimate is
    reproducible for a given seed.
    """
    if n_samples < 2:
        raise ParameterError("Monte Carlo needs at least two samples")
    rng = np.random.default_rng(seed)
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < n_samples:
        k = min(batch, n_samples - done)
        x, pdf = sampler(rng, k)
        vals = np.asarray(integrand(x), dtype=float) / np.asarray(pdf, dtype=float)
        vals = _checked_values(vals, np.asarray(x), [f"x{i}" for i in range(np.asarray(x).shape[-1])])
        total += float(np.sum(vals))
        total_sq += float(np.sum(vals * vals))
        done += k
    mean = total / n_samples
    var = max(total_sq / n_samples - mean * mean, 0.0) * n_samples / (n_samples - 1)
    return IntegralResult(mean, float(np.sqrt(var / n_samples)), n_samples)


def phase_rule(
    mass: float,
    dof: float,
    polyatomic: bool,
    spec: QuadratureSpec,
    temperature: float = 1.0,
) -> PhaseRule:
    """Plain-weight rule on one species' phase space.

    Exact (up to the Gauss degree) for polynomials times the species'
    Maxwellian at the given temperature: the velocity axes use Hermite
    nodes scaled by sqrt(2T/m), the energy axis generalized Laguerre with
    parameter dof/2 - 1.
    """
    x, w = hermite(spec.hermite_order)
    h = np.sqrt(2.0 * temperature / mass) * spec.velocity_scale
    w_plain = w * np.exp(x * x) * h
    v = x * h
    vx, vy, vz = np.meshgrid(v, v, v, indexing="ij")
    xi = np.stack([vx.ravel(), vy.ravel(), vz.ravel()], axis=1)
    wv = (w_plain[:, None, None] * w_plain[None, :, None] * w_plain[None, None, :]).ravel()
    if not polyatomic:
        return PhaseRule(xi, None, wv)
    alpha = dof / 2.0 - 1.0
    y, wy = laguerre(spec.laguerre_order, alpha)
    scale = temperature * spec.energy_scale
    wi = wy * np.exp(y) * y ** (-alpha) * scale
    n_v, n_i = len(wv), len(wi)
    return PhaseRule(
        np.repeat(xi, n_i, axis=0),
        np.tile(y * scale, n_v),
        np.repeat(wv, n_i) * np.tile(wi, n_v),
    )


def radial_rule(n: int, mass: float, scale: float = 1.0, alpha: float = 0.5) -> tuple[np.ndarray, np.ndarray]:
    """Plain weights for the integral of s^2 F(s) ds over [0, inf).

    Nodes are Gauss nodes in x = s sqrt(m/2)/scale for the weight
    x^(2 alpha + 1) exp(-x^2) (alpha = 1/2 makes s^2 exp(-m s^2/2) the
    exact weight, including odd powers of s).  Orders above the
    half-range limit fall back to a generalized Laguerre rule in x^2.
    The returned weights include the s^2 Jacobian, so ``sum(w * F(s))``
    approximates the full radial integral.
    """
    c = 2.0 * scale * scale / mass
    if n <= _MAX_HALF_RANGE:
        power = 2.0 * alpha + 1.0
        x, wx = half_range(n, power)
        return np.sqrt(c) * x, wx * np.exp(x * x) * x ** (2.0 - power) * c**1.5
    t, wt = laguerre(n, alpha)
    s = np.sqrt(c * t)
    # s^2 ds = (c^{3/2}/2) t^{1/2} dt
    return s, wt * np.exp(t) * t ** (0.5 - alpha) * 0.5 * c**1.5
