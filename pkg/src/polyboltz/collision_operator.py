"""The nonlinear collision operator: pointwise values, weak forms and entropy production.

Two quadratures are used.

*Pointwise* values Q_alpha(f, f)(xi, I) integrate over the partner
velocity (spherical coordinates centred at the origin with the polar
axis along xi), the partner internal energy and the collision
parameters (omega, R, r).  Writing F = f / I^(dof/2-1) for the reduced
density, the integrand of the (alpha, beta) contribution is

    collision_weight * I^a I_*^b * (F' F'_* - F F_*).

*Integrated* quantities (weak forms, entropy production, the Galerkin
matrix) use collision coordinates: centre-of-mass velocity G, total
energy E and two parameter triples, one describing the pre-collisional
pair and one the post-collisional pair.  Both triples run over the same
node set, so exchanging them (the pre/post symmetry of the collision
measure) and reflecting them (the species exchange) map the rule onto
itself.  The density of the measure in these coordinates is computed
from ``collision_weight`` and the phase-volume Jacobian of the
pre-collisional state, so the symmetry of the discrete sums holds only
if the cross section obeys detailed balance.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .collision_geometry import (
    PairCase,
    collide,
    pair_case,
    parameter_jacobian,
    state_from_collision_coordinates,
)
from .cross_section import CrossSectionModel, collision_weight
from .errors import DomainError, ParameterError, PreconditionError, QuadratureError
from .mixture_model import DistributionFunction, MixtureSpec, PhasePoint, internal_weight
from .quadrature import QuadratureSpec, hermite, jacobi01, laguerre, legendre, radial_rule, sphere

__all__ = [
    "ParameterRule",
    "parameter_rule",
    "QEvaluation",
    "q_point",
    "q_point_bilinear",
    "CollisionCoordinateRule",
    "collision_rule",
    "WeakFormEngine",
    "weak_form",
    "weak_form_symmetrized",
    "entropy_production",
]

_CHUNK = 400_000
_PAIR_CHUNK = 200_000


# ---------------------------------------------------------------------------
# rules on the collision parameters and on the partner phase space
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ParameterRule:
    """Plain-weight rule over (omega, R, r) for one pair case.

    ``R`` is 1 and ``r`` is 0 where the case has no such parameter.
    """

    omega: np.ndarray
    R: np.ndarray
    r: np.ndarray
    weights: np.ndarray

    def __len__(self) -> int:
        return self.weights.shape[0]


def _split_exponents(case: PairCase) -> tuple[tuple[float, float] | None, tuple[float, float] | None]:
    """Jacobi exponents that make the reference collision weight exact in R and r."""
    if not case.needs_R:
        return None, None
    if case.needs_r:
        a, b = case.exp_a, case.exp_b
        return (0.5, 1.0 + a + b), (a, b)
    p = case.exp_b if case.poly_b else case.exp_a
    return (0.5, p), None


def _plain_jacobi(n: int, ex: tuple[float, float]) -> tuple[np.ndarray, np.ndarray]:
    x, w = jacobi01(n, *ex)
    return x, w / (x ** ex[0] * (1.0 - x) ** ex[1])


def parameter_rule(case: PairCase, n_theta: int, n_phi: int, n_R: int = 1, n_r: int = 1
                   ) -> ParameterRule:
    """Sphere rule times Gauss-Jacobi rules in R and r (as needed by the case)."""
    sph = sphere(n_theta, n_phi)
    om, wo = sph.points, sph.weights
    R_ex, r_ex = _split_exponents(case)
    if R_ex is None:
        return ParameterRule(om, np.ones(len(wo)), np.zeros(len(wo)), wo)
    R, wR = _plain_jacobi(n_R, R_ex)
    if r_ex is None:
        r, wr = np.zeros(1), np.ones(1)
    else:
        r, wr = _plain_jacobi(n_r, r_ex)
    n_o, n_R_, n_r_ = len(wo), len(R), len(r)
    omega = np.repeat(om, n_R_ * n_r_, axis=0)
    RR = np.tile(np.repeat(R, n_r_), n_o)
    rr = np.tile(r, n_o * n_R_)
    w = np.repeat(wo, n_R_ * n_r_) * np.tile(np.repeat(wR, n_r_) * np.tile(wr, n_R_), n_o)
    return ParameterRule(omega, RR, rr, w)


def _frame(axis: np.ndarray) -> np.ndarray:
    """Orthonormal frame whose third row is ``axis`` (or e_z for a zero axis)."""
    n = np.linalg.norm(axis)
    if n == 0.0:
        return np.eye(3)
    e3 = axis / n
    helper = np.array([1.0, 0.0, 0.0]) if abs(e3[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = helper - e3 * (helper @ e3)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(e3, e1)
    return np.stack([e1, e2, e3])


def partner_velocity_rule(mass: float, axis: np.ndarray, n_rad: int, n_pol: int, n_az: int,
                          scale: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Plain-weight rule for partner velocities, spherical about the origin.

    Radial nodes follow the partner Maxwellian; the polar axis is
    ``axis``, so integrands depending on the angle to ``axis`` are
    resolved by the Legendre rule alone.
    """
    s, ws = radial_rule(n_rad, mass, scale)
    c, wc = legendre(n_pol)
    psi = 2.0 * np.pi * (np.arange(n_az) + 0.5) / n_az
    wpsi = np.full(n_az, 2.0 * np.pi / n_az)
    sin = np.sqrt(np.clip(1.0 - c * c, 0.0, None))
    dirs = np.stack([
        (sin[:, None] * np.cos(psi)[None, :]).ravel(),
        (sin[:, None] * np.sin(psi)[None, :]).ravel(),
        np.repeat(c, n_az),
    ], axis=1)
    wd = (wc[:, None] * wpsi[None, :]).ravel()
    dirs = dirs @ _frame(np.asarray(axis, dtype=float))
    v = (s[:, None, None] * dirs[None, :, :]).reshape(-1, 3)
    w = (ws[:, None] * wd[None, :]).ravel()
    return v, w


def partner_energy_rule(exponent: float, n: int, scale: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Plain-weight generalized Laguerre rule for a partner internal energy."""
    y, w = laguerre(n, exponent)
    return y * scale, w * np.exp(y) * y ** (-exponent) * scale


@dataclass(frozen=True, eq=False)
class _PartnerNodes:
    case: PairCase
    v: np.ndarray          # partner velocities (nv, 3)
    wv: np.ndarray
    I_star: np.ndarray     # partner energies (nI,) (zeros for monatomic partners)
    wI: np.ndarray
    params: ParameterRule


def _partner_nodes(mixture: MixtureSpec, at: PhasePoint, beta: int, quad: QuadratureSpec,
                   isotropic: bool = False) -> _PartnerNodes:
    case = pair_case(mixture, at.species_index, beta)
    n_az = 1 if isotropic else quad.azimuth_order
    v, wv = partner_velocity_rule(case.m_b, at.velocity, quad.radial_order, quad.polar_order,
                                  n_az, quad.velocity_scale)
    if case.poly_b:
        Is, wI = partner_energy_rule(case.exp_b, quad.laguerre_order, quad.energy_scale)
    else:
        Is, wI = np.zeros(1), np.ones(1)
    if isotropic:
        params = parameter_rule(case, 1, 1, quad.legendre_order_R, quad.legendre_order_r)
    else:
        params = parameter_rule(case, quad.sphere_theta, quad.sphere_phi,
                                quad.legendre_order_R, quad.legendre_order_r)
    return _PartnerNodes(case, v, wv, Is, wI, params)


def _iter_point_events(nodes: _PartnerNodes, at: PhasePoint):
    """Yield (event, weights) chunks covering the full partner x parameter rule."""
    case = nodes.case
    p = nodes.params
    n_inner = len(nodes.wI) * len(p)
    inner_I = np.repeat(nodes.I_star, len(p))
    inner_om = np.tile(p.omega, (len(nodes.wI), 1))
    inner_R = np.tile(p.R, len(nodes.wI))
    inner_r = np.tile(p.r, len(nodes.wI))
    inner_w = np.repeat(nodes.wI, len(p)) * np.tile(p.weights, len(nodes.wI))
    step = max(1, _CHUNK // max(n_inner, 1))
    xi = np.asarray(at.xi, dtype=float)
    I0 = at.internal_energy
    for start in range(0, len(nodes.wv), step):
        v = nodes.v[start:start + step]
        k = v.shape[0]
        xs = np.repeat(v, n_inner, axis=0)
        ev = collide(
            case, xi[None, :], xs,
            I0 if case.poly_a else None,
            np.tile(inner_I, k) if case.poly_b else None,
            np.tile(inner_om, (k, 1)),
            np.tile(inner_R, k) if case.needs_R else None,
            np.tile(inner_r, k) if case.needs_r else None,
            check=False,
        )
        w = np.repeat(nodes.wv[start:start + step], n_inner) * np.tile(inner_w, k)
        yield ev, w


def _phi(mixture: MixtureSpec, alpha: int, I: np.ndarray) -> np.ndarray:
    return internal_weight(mixture[alpha], I)


def _eval(f: DistributionFunction, alpha: int, xi: np.ndarray, I: np.ndarray) -> np.ndarray:
    return f(alpha, xi, I if f.mixture[alpha].polyatomic else None)


# ---------------------------------------------------------------------------
# pointwise evaluation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QEvaluation:
    """Collision operator at one phase point.

    ``breakdown[beta]`` is the contribution of partner species beta;
    ``loss_magnitude`` is the size of the loss term alone (a natural
    scale for relative residuals).
    """

    species_index: int
    value: float
    breakdown: tuple[float, ...]
    loss_magnitude: float
    error: float = float("nan")
    nodes: int = 0


def _check_nonnegative(vals: np.ndarray, what: str) -> None:
    if np.any(~np.isfinite(vals)):
        raise QuadratureError(f"{what} is not finite at a quadrature node")
    if np.any(vals < 0):
        raise PreconditionError(f"{what} is negative at a quadrature node")


def _q_point_sum(f: DistributionFunction, h: DistributionFunction | None, at: PhasePoint,
                 model: CrossSectionModel, quad: QuadratureSpec, part: str = "full") -> QEvaluation:
    if part not in ("full", "gain", "loss"):
        raise ParameterError(f"part must be 'full', 'gain' or 'loss', got {part!r}")
    mixture = f.mixture
    alpha = mixture.check_index(at.species_index)
    xi0 = np.asarray(at.xi, dtype=float)[None, :]
    I0 = np.array([at.internal_energy])
    f0 = _eval(f, alpha, xi0, I0)[0]
    h0 = _eval(h, alpha, xi0, I0)[0] if h is not None else None
    phi0 = float(_phi(mixture, alpha, I0)[0]) if mixture[alpha].polyatomic else 1.0
    parts, loss_total, count = [], 0.0, 0
    for beta in range(mixture.s):
        nodes = _partner_nodes(mixture, at, beta, quad)
        total, loss = 0.0, 0.0
        for ev, w in _iter_point_events(nodes, at):
            cw = collision_weight(model, ev)
            phi_s = _phi(mixture, beta, ev.I_star)
            ratio = phi0 * phi_s / (_phi(mixture, alpha, ev.I_p) * _phi(mixture, beta, ev.I_star_p))
            fs = _eval(f, beta, ev.xi_star, ev.I_star)
            fp = _eval(f, alpha, ev.xi_p, ev.I_p)
            fsp = _eval(f, beta, ev.xi_star_p, ev.I_star_p)
            if h is None:
                for vals, what in ((fs, "f"), (fp, "f"), (fsp, "f")):
                    _check_nonnegative(vals, what)
                gain = fp * fsp * ratio
                lossv = f0 * fs
            else:
                hs = _eval(h, beta, ev.xi_star, ev.I_star)
                hp = _eval(h, alpha, ev.xi_p, ev.I_p)
                hsp = _eval(h, beta, ev.xi_star_p, ev.I_star_p)
                gain = (fp * hsp + hp * fsp) * ratio
                lossv = f0 * hs + h0 * fs
            wc = w * cw
            g_sum = float(np.sum(wc * gain))
            l_sum = float(np.sum(wc * lossv))
            if not (np.isfinite(g_sum) and np.isfinite(l_sum)):
                raise QuadratureError(f"non-finite collision integrand for pair ({alpha}, {beta})")
            total += (g_sum if part != "loss" else 0.0) - (l_sum if part != "gain" else 0.0)
            loss += l_sum
            count += len(w)
        parts.append(total)
        loss_total += abs(loss)
    return QEvaluation(alpha, float(sum(parts)), tuple(parts), loss_total, nodes=count)


def q_point(f: DistributionFunction, at: PhasePoint, model: CrossSectionModel,
            quad: QuadratureSpec, estimate_error: bool = False) -> QEvaluation:
    """Q_alpha(f, f) at one phase point, with the per-partner breakdown.

    With ``estimate_error`` the value is recomputed on a rule with
    doubled partner-velocity orders and the difference is reported.
    """
    if f(at.species_index, np.asarray(at.xi)[None, :], np.array([at.internal_energy]))[0] < 0:
        raise PreconditionError("f is negative at the evaluation point")
    res = _q_point_sum(f, None, at, model, quad)
    if not estimate_error:
        return res
    fine = _q_point_sum(f, None, at, model, _refined_point_spec(quad))
    return QEvaluation(res.species_index, fine.value, fine.breakdown, fine.loss_magnitude,
                       abs(fine.value - res.value), res.nodes + fine.nodes)


def q_point_bilinear(f: DistributionFunction, h: DistributionFunction, at: PhasePoint,
                     model: CrossSectionModel, quad: QuadratureSpec, part: str = "full") -> QEvaluation:
    """Q_alpha(f, h) + Q_alpha(h, f) at one phase point (no sign condition on h).

    ``part`` selects the gain term, the loss term (returned with its
    negative sign) or both.
    """
    if f.mixture != h.mixture:
        raise ParameterError("both arguments must live on the same mixture")
    return _q_point_sum(f, h, at, model, quad, part)


def _refined_point_spec(quad: QuadratureSpec) -> QuadratureSpec:
    return quad.replace(
        radial_order=min(400, 2 * quad.radial_order),
        polar_order=min(400, 2 * quad.polar_order),
        azimuth_order=min(400, 2 * quad.azimuth_order),
        laguerre_order=min(400, quad.laguerre_order + 4),
        sphere_theta=quad.sphere_theta + 2,
        sphere_phi=quad.sphere_phi + 4,
    )


# ---------------------------------------------------------------------------
# collision coordinates
# ---------------------------------------------------------------------------

def collision_energy_exponent(case: PairCase, eta: float) -> float:
    """Power of E carried by the collision measure of the reference cross section."""
    lam = 1.0 - 0.5 * eta
    if case.poly_a:
        lam += case.exp_a + 1.0
    if case.poly_b:
        lam += case.exp_b + 1.0
    return lam


@dataclass(frozen=True, eq=False)
class CollisionCoordinateRule:
    """Plain-weight rule over (G, E) times a shared parameter rule for both states.

    ``xi``, ``xi_star``, ``I``, ``I_star`` have shape (nGE, ns[, 3]) and
    give the pair state for every (G, E) node and parameter node.
    """

    case: PairCase
    G: np.ndarray
    E: np.ndarray
    w_GE: np.ndarray
    params: ParameterRule
    xi: np.ndarray = field(repr=False)
    xi_star: np.ndarray = field(repr=False)
    I: np.ndarray = field(repr=False)
    I_star: np.ndarray = field(repr=False)

    @property
    def n_GE(self) -> int:
        return self.w_GE.shape[0]

    @property
    def n_s(self) -> int:
        return len(self.params)

    def density_pairs(self, model: CrossSectionModel, sl: slice = slice(None)) -> np.ndarray:
        """Measure density D(s0, s) for (G, E) nodes in ``sl``; shape (k, ns, ns).

        s0 indexes the pre-collisional state, s the collision parameters
        (equivalently the post-collisional state).
        """
        case = self.case
        p = self.params
        xi, xs, I, Is = self.xi[sl], self.xi_star[sl], self.I[sl], self.I_star[sl]
        k, ns = xi.shape[0], xi.shape[1]
        E = np.repeat(self.E[sl], ns)
        pre_R = np.tile(p.R, k)
        phi0 = np.ones(k * ns)
        if case.poly_a:
            phi0 = phi0 * _power(I.reshape(-1), case.exp_a)
        if case.poly_b:
            phi0 = phi0 * _power(Is.reshape(-1), case.exp_b)
        jac = parameter_jacobian(case, E, pre_R if case.needs_R else None)
        rep = lambda a: np.repeat(a.reshape(k * ns, *a.shape[2:]), ns, axis=0)
        ev = collide(
            case, rep(xi), rep(xs),
            rep(I) if case.poly_a else None,
            rep(Is) if case.poly_b else None,
            np.tile(p.omega, (k * ns, 1)),
            np.tile(p.R, k * ns) if case.needs_R else None,
            np.tile(p.r, k * ns) if case.needs_r else None,
            check=False,
        )
        cw = collision_weight(model, ev).reshape(k, ns, ns)
        return cw * (phi0 * jac).reshape(k, ns, 1)

    def density_diagonal(self, model: CrossSectionModel) -> np.ndarray:
        """D(s, s) for every (G, E) node; shape (nGE, ns)."""
        case = self.case
        p = self.params
        n, ns = self.n_GE, self.n_s
        flat = lambda a: a.reshape(n * ns, *a.shape[2:])
        ev = collide(
            case, flat(self.xi), flat(self.xi_star),
            flat(self.I) if case.poly_a else None,
            flat(self.I_star) if case.poly_b else None,
            np.tile(p.omega, (n, 1)),
            np.tile(p.R, n) if case.needs_R else None,
            np.tile(p.r, n) if case.needs_r else None,
            check=False,
        )
        phi0 = np.ones(n * ns)
        if case.poly_a:
            phi0 = phi0 * _power(flat(self.I), case.exp_a)
        if case.poly_b:
            phi0 = phi0 * _power(flat(self.I_star), case.exp_b)
        jac = parameter_jacobian(case, np.repeat(self.E, ns), np.tile(p.R, n) if case.needs_R else None)
        return (collision_weight(model, ev) * phi0 * jac).reshape(n, ns)


def _power(x: np.ndarray, p: float) -> np.ndarray:
    return np.ones_like(x) if p == 0.0 else x**p


def collision_rule(case: PairCase, eta: float, n_G: int, n_E: int, n_theta: int, n_phi: int,
                   n_R: int, n_r: int) -> CollisionCoordinateRule:
    """Rule in collision coordinates for an ordered pair.

    G uses Gauss-Hermite for exp(-M|G|^2/2), E generalized Laguerre with
    the energy exponent of the reference measure, and the parameter rule
    is closed under the antipodal map (``n_phi`` is rounded up to even).
    """
    M = case.total_mass
    x, w = hermite(n_G)
    h = np.sqrt(2.0 / M)
    wp = w * np.exp(x * x) * h
    gx, gy, gz = np.meshgrid(x * h, x * h, x * h, indexing="ij")
    G = np.stack([gx.ravel(), gy.ravel(), gz.ravel()], axis=1)
    wG = (wp[:, None, None] * wp[None, :, None] * wp[None, None, :]).ravel()
    lam = collision_energy_exponent(case, eta)
    y, wy = laguerre(n_E, lam)
    wE = wy * np.exp(y) * y ** (-lam)
    params = parameter_rule(case, n_theta, n_phi + (n_phi % 2), n_R, n_r)
    nG, nE, ns = len(wG), len(wE), len(params)
    GG = np.repeat(G, nE, axis=0)
    EE = np.tile(y, nG)
    w_GE = np.repeat(wG, nE) * np.tile(wE, nG)
    xi, xs, I, Is = state_from_collision_coordinates(
        case, GG[:, None, :], EE[:, None], params.omega[None, :, :],
        params.R[None, :] if case.needs_R else None,
        params.r[None, :] if case.needs_r else None,
    )
    I = np.broadcast_to(I, (nG * nE, ns))
    Is = np.broadcast_to(Is, (nG * nE, ns))
    return CollisionCoordinateRule(case, GG, EE, w_GE, params, xi, xs, np.array(I), np.array(Is))


def rule_for(mixture: MixtureSpec, alpha: int, beta: int, eta: float, quad: QuadratureSpec,
             refine: bool = False) -> CollisionCoordinateRule:
    case = pair_case(mixture, alpha, beta)
    if refine:
        return collision_rule(case, eta, quad.collision_G_order + 1, quad.collision_E_order + 2,
                              quad.sphere_theta + 2, quad.sphere_phi + 2,
                              quad.legendre_order_R + 1, quad.legendre_order_r + 1)
    return collision_rule(case, eta, quad.collision_G_order, quad.collision_E_order,
                          quad.sphere_theta, quad.sphere_phi,
                          quad.legendre_order_R, quad.legendre_order_r)


# ---------------------------------------------------------------------------
# weak forms and entropy production
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WeakFormResult:
    value: float
    error: float = float("nan")


class WeakFormEngine:
    """Weak-form sums for one (mixture, model, rule) triple.

    For the reference cross-section family the measure density on
    (pre, post) node pairs factorizes as sqrt(D(s0, s0) D(s, s)), so
    every sum reduces to products of single sums over the parameter
    nodes.  Other models (``factorized=False``) use the full pair
    densities, computed once per ordered species pair.
    """

    def __init__(self, mixture: MixtureSpec, model: CrossSectionModel, quad: QuadratureSpec,
                 refine: bool = False, factorized: bool | None = None):
        if model.C.shape[0] != mixture.s:
            raise ParameterError("cross-section matrix size does not match the mixture")
        self.mixture = mixture
        self.model = model
        self.quad = quad
        self.factorized = model.is_reference_family if factorized is None else bool(factorized)
        if self.factorized and not model.is_reference_family:
            raise ParameterError("the factorized density only holds for the reference cross section")
        self.rules = {(a, b): rule_for(mixture, a, b, model.eta, quad, refine)
                      for a in range(mixture.s) for b in range(mixture.s)}
        self._dens: dict[tuple[int, int], np.ndarray] = {}

    def kernel(self, alpha: int, beta: int) -> np.ndarray:
        """K[ge, s0, s] = w_GE w_s0 w_s D(s0, s)."""
        rule = self.rules[(alpha, beta)]
        if self.factorized:
            u = self.root_weights(alpha, beta)
            return u[:, :, None] * u[:, None, :] / rule.w_GE[:, None, None]
        key = (alpha, beta)
        if key not in self._dens:
            ns = rule.n_s
            step = max(1, _PAIR_CHUNK // (ns * ns))
            D = np.concatenate([rule.density_pairs(self.model, slice(i, i + step))
                                for i in range(0, rule.n_GE, step)])
            ws = rule.params.weights
            self._dens[key] = D * rule.w_GE[:, None, None] * ws[None, :, None] * ws[None, None, :]
        return self._dens[key]

    def root_weights(self, alpha: int, beta: int) -> np.ndarray:
        """u[ge, s] = sqrt(w_GE) w_s sqrt(D(s, s)), so that K = u u^T per (G, E) node."""
        key = (alpha, beta, "diag")
        if key not in self._dens:
            rule = self.rules[(alpha, beta)]
            d = rule.density_diagonal(self.model)
            self._dens[key] = np.sqrt(rule.w_GE)[:, None] * rule.params.weights[None, :] * np.sqrt(d)
        return self._dens[key]

    def _reduced(self, f: DistributionFunction, rule: CollisionCoordinateRule, positive: bool):
        """F_alpha F_beta* on every state node (F = f / I^(dof/2-1))."""
        a, b = rule.case.alpha, rule.case.beta
        shp = rule.I.shape
        xi = rule.xi.reshape(-1, 3)
        xs = rule.xi_star.reshape(-1, 3)
        I = rule.I.reshape(-1)
        Is = rule.I_star.reshape(-1)
        fa = _eval(f, a, xi, I)
        fb = _eval(f, b, xs, Is)
        if positive:
            if np.any(fa <= 0) or np.any(fb <= 0) or not (np.all(np.isfinite(fa)) and np.all(np.isfinite(fb))):
                raise DomainError("f must be strictly positive and finite on all nodes")
        else:
            _check_nonnegative(fa, "f")
            _check_nonnegative(fb, "f")
        Fa = fa / _phi(self.mixture, a, I)
        Fb = fb / _phi(self.mixture, b, Is)
        return (Fa * Fb).reshape(shp)

    def _test(self, g: DistributionFunction, rule: CollisionCoordinateRule, which: str):
        a, b = rule.case.alpha, rule.case.beta
        shp = rule.I.shape
        ga = _eval(g, a, rule.xi.reshape(-1, 3), rule.I.reshape(-1)).reshape(shp)
        if which == "alpha":
            return ga
        gb = _eval(g, b, rule.xi_star.reshape(-1, 3), rule.I_star.reshape(-1)).reshape(shp)
        return ga + gb

    # sums over (s0, s) of K[s0, s] x(s0) y(s), summed over (G, E) nodes
    def _cross(self, key, x, y) -> float:
        if self.factorized:
            u = self.root_weights(*key)
            return float(np.sum(np.sum(u * x, axis=1) * np.sum(u * y, axis=1)))
        return float(np.einsum("kij,ki,kj->", self.kernel(*key), x, y))

    def _diag(self, key, x) -> float:
        """Sum over (s0, s) of K[s0, s] x(s0)."""
        if self.factorized:
            u = self.root_weights(*key)
            return float(np.sum(np.sum(u * x, axis=1) * np.sum(u, axis=1)))
        return float(np.einsum("kij,ki->", self.kernel(*key), x))

    def weak_form(self, f: DistributionFunction, g: DistributionFunction) -> float:
        """Sum over pairs of the integral of (F'F'_* - F F_*) g_alpha against the collision measure."""
        total = 0.0
        for key, rule in self.rules.items():
            P = self._reduced(f, rule, positive=False)
            ga = self._test(g, rule, "alpha")
            total += self._cross(key, ga, P) - self._diag(key, P * ga)
        return total

    def weak_form_symmetrized(self, f: DistributionFunction, g: DistributionFunction) -> float:
        """One quarter of the integral of (F'F'_* - F F_*) times the collision difference of g."""
        total = 0.0
        for key, rule in self.rules.items():
            P = self._reduced(f, rule, positive=False)
            S = self._test(g, rule, "sum")
            # (P[s] - P[s0]) (S[s0] - S[s]) expanded; the measure is symmetric in (s0, s)
            t = (self._cross(key, S, P) - self._diag(key, P * S)
                 - self._diag(key, P * S) + self._cross(key, P, S))
            total += 0.25 * t
        return total

    def entropy_production(self, f: DistributionFunction) -> float:
        """-1/4 sum of (x - 1) log x * F F_* over the measure, with x = F'F'_* / (F F_*)."""
        total = 0.0
        for key, rule in self.rules.items():
            P = self._reduced(f, rule, positive=True)
            L = np.log(P)
            if self.factorized:
                u = self.root_weights(*key)
                s1, sP, sL, sPL = (np.sum(u * x, axis=1) for x in (np.ones_like(P), P, L, P * L))
                # sum_{i,j} u_i u_j (P_j - P_i)(L_j - L_i) = 2 (s1 sPL - sP sL)
                total -= 0.5 * float(np.sum(s1 * sPL - sP * sL))
                continue
            K = self.kernel(*key)
            step = max(1, _PAIR_CHUNK // (rule.n_s**2))
            for i in range(0, rule.n_GE, step):
                p, l = P[i:i + step], L[i:i + step]
                dP = p[:, None, :] - p[:, :, None]      # P[s] - P[s0]
                dL = l[:, None, :] - l[:, :, None]
                total -= 0.25 * float(np.einsum("kij,kij,kij->", K[i:i + step], dP, dL))
        return total


@lru_cache(maxsize=4)
def _engine(mixture: MixtureSpec, model: CrossSectionModel, quad: QuadratureSpec,
            refine: bool) -> WeakFormEngine:
    return WeakFormEngine(mixture, model, quad, refine)


def _with_error(fn, f, model, quad, estimate_error, *args) -> WeakFormResult:
    value = fn(_engine(f.mixture, model, quad, False), *args)
    if not estimate_error:
        return WeakFormResult(value)
    fine = fn(_engine(f.mixture, model, quad, True), *args)
    return WeakFormResult(fine, abs(fine - value))


def weak_form(f: DistributionFunction, g: DistributionFunction, model: CrossSectionModel,
              quad: QuadratureSpec, estimate_error: bool = False) -> WeakFormResult:
    """(Q(f, f), g) through the collision-coordinate rule."""
    return _with_error(lambda e, f_, g_: e.weak_form(f_, g_), f, model, quad, estimate_error, f, g)


def weak_form_symmetrized(f: DistributionFunction, g: DistributionFunction,
                          model: CrossSectionModel, quad: QuadratureSpec,
                          estimate_error: bool = False) -> WeakFormResult:
    """(Q(f, f), g) through the symmetrized integrand."""
    return _with_error(lambda e, f_, g_: e.weak_form_symmetrized(f_, g_), f, model, quad,
                       estimate_error, f, g)


def entropy_production(f: DistributionFunction, model: CrossSectionModel, quad: QuadratureSpec,
                       estimate_error: bool = False) -> WeakFormResult:
    """(Q(f, f), log(f / I^(dof/2-1))) in its symmetrized form, which is never positive."""
    return _with_error(lambda e, f_: e.entropy_production(f_), f, model, quad, estimate_error, f)
