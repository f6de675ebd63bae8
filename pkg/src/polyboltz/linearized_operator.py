"""The linearized collision operator L = nu - K around the normalized Maxwellian.

With f = M + M^(1/2) h the operator acts as

    L_alpha h = -M_alpha^(-1/2) (Q_alpha(M, M^(1/2) h) + Q_alpha(M^(1/2) h, M))
              = nu_alpha h_alpha + K1 h - K2 h,

where nu is the collision frequency (loss term against M), K1 the loss
part with the closed kernel ``k1_kernel`` and K2 the gain part.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product

import numpy as np
from scipy import special

from .collision_geometry import PairCase, collide, pair_case
from .collision_operator import (
    CollisionCoordinateRule,
    collision_rule,
    parameter_rule,
    partner_energy_rule,
    partner_velocity_rule,
    q_point_bilinear,
)
from .cross_section import CrossSectionModel, collision_weight
from .errors import BasisError, ParameterError, PreconditionError
from .mixture_model import (
    DistributionFunction,
    MixtureSpec,
    PhasePoint,
    collision_invariants,
    maxwellian,
)
from .quadrature import QuadratureSpec, laguerre, legendre, phase_rule, radial_rule, sphere

__all__ = [
    "LinearizationContext",
    "nu",
    "nu_values",
    "l_apply",
    "k_apply",
    "k_loss_apply",
    "k_gain_apply",
    "k1_kernel",
    "hs_norm_k1",
    "HSScan",
    "hs_convergence",
    "GalerkinBasis",
    "GalerkinSystem",
    "galerkin_basis",
    "galerkin_assemble",
    "NuBoundReport",
    "nu_bound_scan",
    "default_grid",
    "MIN_BASIS_ORDER",
]

MIN_BASIS_ORDER = 2


@dataclass(frozen=True, eq=False)
class LinearizationContext:
    """Mixture, cross section and rules; M is the Maxwellian with u = 0, T = 1."""

    mixture: MixtureSpec
    model: CrossSectionModel
    quad: QuadratureSpec = field(default_factory=QuadratureSpec)
    M: DistributionFunction = field(init=False, repr=False)
    sqrt_M: DistributionFunction = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.model.C.shape[0] != self.mixture.s:
            raise ParameterError("cross-section matrix size does not match the mixture")
        M = maxwellian(self.mixture)
        object.__setattr__(self, "M", M)
        comps = tuple((lambda xi, I, _c=c: np.sqrt(_c(xi, I))) for c in M.components)
        object.__setattr__(self, "sqrt_M", DistributionFunction(self.mixture, comps, "M^1/2"))

    def weighted(self, h: DistributionFunction) -> DistributionFunction:
        """M^(1/2) h."""
        return self.sqrt_M.times(h)

    def sqrt_M_at(self, at: PhasePoint) -> float:
        return float(self.sqrt_M(at.species_index, np.asarray(at.xi)[None, :],
                                 np.array([at.internal_energy]))[0])


def _require_reference(model: CrossSectionModel, what: str) -> None:
    if not model.is_reference_family:
        raise PreconditionError(f"{what} requires the reference hard-potential cross section")


def _loss_parameters(case: PairCase):
    # for the reference cross section the collision weight, integrated over
    # omega, is R^(1/2)(1-R)^p [r^a (1-r)^b] times a function of E alone, which is
    # exactly the Jacobi weight of the parameter rule: one node is exact
    return parameter_rule(case, 1, 1, 1, 1)


def _param_sum(ctx: LinearizationContext, case: PairCase, xi, xs, I, Is) -> np.ndarray:
    """Integral of the collision weight over (omega, R, r) for each pair in the batch."""
    p = _loss_parameters(case)
    n = xs.shape[0]
    total = np.zeros(n)
    for k in range(len(p)):
        ev = collide(case, xi, xs,
                     I if case.poly_a else None,
                     Is if case.poly_b else None,
                     p.omega[k], p.R[k] if case.needs_R else None,
                     p.r[k] if case.needs_r else None, check=False)
        total += p.weights[k] * collision_weight(ctx.model, ev)
    return total


# ---------------------------------------------------------------------------
# collision frequency
# ---------------------------------------------------------------------------

def _nu_species(ctx: LinearizationContext, alpha: int, speed: float, I: float) -> float:
    mixture, quad = ctx.mixture, ctx.quad
    axis = np.array([0.0, 0.0, 1.0])
    xi = axis * speed
    total = 0.0
    for beta in range(mixture.s):
        case = pair_case(mixture, alpha, beta)
        # the integrand depends on the partner velocity only through its
        # length and its angle with xi: one azimuthal node is exact
        v, wv = partner_velocity_rule(case.m_b, axis, quad.radial_order, quad.polar_order, 1,
                                      quad.velocity_scale)
        if case.poly_b:
            Is, wI = partner_energy_rule(case.exp_b, quad.laguerre_order, quad.energy_scale)
        else:
            Is, wI = np.zeros(1), np.ones(1)
        xs = np.repeat(v, len(Is), axis=0)
        Iss = np.tile(Is, len(wv))
        w = np.repeat(wv, len(Is)) * np.tile(wI, len(wv))
        cw = _param_sum(ctx, case, xi[None, :], xs, np.full(len(w), I), Iss)
        Mb = ctx.M(beta, xs, Iss if case.poly_b else None)
        total += float(np.sum(w * cw * Mb))
    return total


def nu(ctx: LinearizationContext, at: PhasePoint) -> float:
    """Collision frequency nu_alpha(xi, I): loss-term integral against the Maxwellian.

    The value depends only on |xi| and I.
    """
    _require_reference(ctx.model, "nu")
    alpha = ctx.mixture.check_index(at.species_index)
    I = at.internal_energy if ctx.mixture[alpha].polyatomic else 0.0
    val = _nu_species(ctx, alpha, float(np.linalg.norm(at.velocity)), I)
    if not val > 0:
        raise PreconditionError(f"collision frequency is not positive at {at}")
    return val


def nu_values(ctx: LinearizationContext, alpha: int, speeds, energies=None) -> np.ndarray:
    """nu_alpha on the tensor grid speeds x energies; shape (len(speeds), len(energies)).

    Monatomic species ignore ``energies`` and return one column.
    """
    _require_reference(ctx.model, "nu")
    alpha = ctx.mixture.check_index(alpha)
    speeds = np.atleast_1d(np.asarray(speeds, dtype=float))
    if ctx.mixture[alpha].polyatomic:
        energies = np.atleast_1d(np.asarray(0.0 if energies is None else energies, dtype=float))
    else:
        energies = np.zeros(1)
    out = np.empty((len(speeds), len(energies)))
    for i, sp in enumerate(speeds):
        for j, en in enumerate(energies):
            out[i, j] = _nu_species(ctx, alpha, float(sp), float(en))
    return out


# ---------------------------------------------------------------------------
# operator action
# ---------------------------------------------------------------------------

def _h_at(h: DistributionFunction, at: PhasePoint) -> float:
    return float(h(at.species_index, np.asarray(at.xi)[None, :], np.array([at.internal_energy]))[0])


def l_apply(ctx: LinearizationContext, h: DistributionFunction, at: PhasePoint,
            quad: QuadratureSpec | None = None) -> float:
    """(L h)_alpha at one phase point through the bilinear collision operator."""
    q = q_point_bilinear(ctx.M, ctx.weighted(h), at, ctx.model, quad or ctx.quad)
    return -q.value / ctx.sqrt_M_at(at)


def k_apply(ctx: LinearizationContext, h: DistributionFunction, at: PhasePoint,
            quad: QuadratureSpec | None = None) -> float:
    """(K h)_alpha = nu_alpha h_alpha - (L h)_alpha."""
    return nu(ctx, at) * _h_at(h, at) - l_apply(ctx, h, at, quad)


def k_gain_apply(ctx: LinearizationContext, h: DistributionFunction, at: PhasePoint,
                 quad: QuadratureSpec | None = None) -> float:
    """Gain part K2 h: M^(-1/2) times the gain terms of the bilinear operator."""
    q = q_point_bilinear(ctx.M, ctx.weighted(h), at, ctx.model, quad or ctx.quad, part="gain")
    return q.value / ctx.sqrt_M_at(at)


def k1_kernel(ctx: LinearizationContext, zeta: PhasePoint, zeta_star: PhasePoint) -> float:
    """Loss-part kernel (M_alpha M_beta*)^(1/2) |g| times the integral of sigma over (omega, I', I'_*)."""
    a, b = zeta.species_index, zeta_star.species_index
    val = _k1_batch(ctx, a, b, np.asarray(zeta.xi, dtype=float)[None, :],
                    np.array([zeta.internal_energy]), np.asarray(zeta_star.xi, dtype=float)[None, :],
                    np.array([zeta_star.internal_energy]))
    return float(val[0])


def _k1_batch(ctx, alpha, beta, xi, I, xs, Is) -> np.ndarray:
    _require_reference(ctx.model, "k1_kernel")
    mixture = ctx.mixture
    case = pair_case(mixture, alpha, beta)
    n = max(xi.shape[0], xs.shape[0])
    xi = np.broadcast_to(xi, (n, 3))
    xs = np.broadcast_to(xs, (n, 3))
    I = np.broadcast_to(I, (n,))
    Is = np.broadcast_to(Is, (n,))
    cw = _param_sum(ctx, case, xi, xs, I, Is)
    Ma = ctx.M(alpha, xi, I if case.poly_a else None)
    Mb = ctx.M(beta, xs, Is if case.poly_b else None)
    return np.sqrt(Ma * Mb) * cw


def k_loss_apply(ctx: LinearizationContext, h: DistributionFunction, at: PhasePoint,
                 quad: QuadratureSpec | None = None) -> float:
    """Loss part K1 h: the integral of k1_kernel against h over the partner phase space."""
    quad = quad or ctx.quad
    mixture = ctx.mixture
    alpha = mixture.check_index(at.species_index)
    xi = np.asarray(at.xi, dtype=float)[None, :]
    I = np.array([at.internal_energy])
    total = 0.0
    for beta in range(mixture.s):
        case = pair_case(mixture, alpha, beta)
        # k1 carries M_beta^(1/2): rules matched to exp(-m s^2/4) and exp(-I/2)
        v, wv = partner_velocity_rule(case.m_b, at.velocity, quad.radial_order, quad.polar_order,
                                      quad.azimuth_order, quad.velocity_scale * math.sqrt(2.0))
        if case.poly_b:
            Is, wI = partner_energy_rule(case.exp_b / 2.0, quad.laguerre_order, 2.0 * quad.energy_scale)
        else:
            Is, wI = np.zeros(1), np.ones(1)
        xs = np.repeat(v, len(Is), axis=0)
        Iss = np.tile(Is, len(wv))
        w = np.repeat(wv, len(Is)) * np.tile(wI, len(wv))
        k = _k1_batch(ctx, alpha, beta, xi, I, xs, Iss)
        total += float(np.sum(w * k * h(beta, xs, Iss if case.poly_b else None)))
    return total


# ---------------------------------------------------------------------------
# Hilbert-Schmidt norm of the loss kernel
# ---------------------------------------------------------------------------

def _panels(upper: float, nodes: int = 8) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre on [0, upper] with panels [0,1], [1,2], [2,4], ..."""
    if not upper > 0:
        raise ParameterError("truncation must be positive")
    edges = [0.0]
    e = 1.0
    while e < upper:
        edges.append(e)
        e *= 2.0
    edges.append(upper)
    x, w = legendre(nodes)
    pts, wts = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        pts.append(lo + (hi - lo) * (x + 1.0) / 2.0)
        wts.append(w * (hi - lo) / 2.0)
    return np.concatenate(pts), np.concatenate(wts)


def hs_norm_k1(ctx: LinearizationContext, truncation: float,
               pairs: list[tuple[int, int]] | None = None, nodes: int = 8) -> float:
    """Integral of k1^2 over |G| <= T, |g| <= T, I, I_* <= T^2 (summed over ``pairs``).

    In centre-of-mass coordinates the squared kernel depends on |G|
    only through exp(-M|G|^2/2) and is otherwise a function of (|g|, I,
    I_*), so the G integral is done on its own and k1 is evaluated with
    G = 0.
    """
    mixture = ctx.mixture
    if pairs is None:
        pairs = [(a, b) for a in range(mixture.s) for b in range(mixture.s)]
    total = 0.0
    for a, b in pairs:
        total += _hs_pair(ctx, mixture.check_index(a), mixture.check_index(b), float(truncation), nodes)
    return total


def _hs_pair(ctx: LinearizationContext, alpha: int, beta: int, T: float, nodes: int) -> float:
    case = pair_case(ctx.mixture, alpha, beta)
    M = case.total_mass
    Gs, wG = _panels(T, nodes)
    g_int = float(np.sum(wG * 4.0 * np.pi * Gs**2 * np.exp(-0.5 * M * Gs**2)))
    gs, wg = _panels(T, nodes)
    Ie, wIe = _panels(T * T, nodes)
    I = Ie if case.poly_a else np.zeros(1)
    wI = wIe if case.poly_a else np.ones(1)
    Is = Ie if case.poly_b else np.zeros(1)
    wIs = wIe if case.poly_b else np.ones(1)
    G, GI, GIs = np.meshgrid(gs, I, Is, indexing="ij")
    W = (wg[:, None, None] * wI[None, :, None] * wIs[None, None, :]) * 4.0 * np.pi * G**2
    gvec = np.zeros((G.size, 3))
    gvec[:, 0] = G.ravel()
    xi = case.m_b / M * gvec
    xs = -case.m_a / M * gvec
    k = _k1_batch(ctx, alpha, beta, xi, GI.ravel(), xs, GIs.ravel())
    return g_int * float(np.sum(W.ravel() * k**2))


@dataclass(frozen=True)
class HSScan:
    truncations: tuple[float, ...]
    values: tuple[float, ...]
    pair: tuple[int, int] | None

    @property
    def increments(self) -> tuple[float, ...]:
        return tuple(abs(b - a) for a, b in zip(self.values[:-1], self.values[1:]))

    @property
    def final_relative_increment(self) -> float:
        if len(self.values) < 2:
            return float("nan")
        last = self.values[-1]
        return self.increments[-1] / last if last != 0 else 0.0

    @property
    def monotone(self) -> bool:
        inc = self.increments
        return all(b <= a for a, b in zip(inc[:-1], inc[1:]))


def hs_convergence(ctx: LinearizationContext, truncations=(4.0, 8.0, 16.0),
                   pair: tuple[int, int] | None = None, nodes: int = 8) -> HSScan:
    """hs_norm_k1 on successive truncations (one pair or all pairs)."""
    pairs = None if pair is None else [pair]
    vals = tuple(hs_norm_k1(ctx, t, pairs, nodes) for t in truncations)
    return HSScan(tuple(float(t) for t in truncations), vals, pair)


# ---------------------------------------------------------------------------
# Galerkin discretization
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GalerkinBasis:
    """Per-species polynomial indices (k_x, k_y, k_z, l); basis function = M^(1/2) * p."""

    mixture: MixtureSpec
    order: int
    indices: tuple[tuple[int, tuple[int, int, int, int]], ...]

    def __len__(self) -> int:
        return len(self.indices)

    def species_slice(self, alpha: int) -> np.ndarray:
        return np.array([i for i, (a, _) in enumerate(self.indices) if a == alpha], dtype=int)

    def labels(self) -> list[str]:
        return [f"s{a}:H{k[0]}{k[1]}{k[2]}L{k[3]}" for a, k in self.indices]

    def polynomials(self, alpha: int, xi: np.ndarray, I: np.ndarray | None) -> np.ndarray:
        """p_i(xi, I) for the basis functions of species alpha; shape (n, n_alpha)."""
        sp = self.mixture[alpha]
        m, n_a = sp.mass, sp.number_density
        rows = [k for a, k in self.indices if a == alpha]
        x = np.sqrt(m) * np.asarray(xi, dtype=float)
        kmax = self.order
        H = np.stack([[special.eval_hermitenorm(k, x[:, d]) / math.sqrt(math.factorial(k))
                       for k in range(kmax + 1)] for d in range(3)])  # (3, kmax+1, n)
        if sp.polyatomic:
            a = sp.exponent
            Lg = np.stack([special.eval_genlaguerre(l, a, I) * math.sqrt(
                math.exp(math.lgamma(l + 1) + math.lgamma(a + 1) - math.lgamma(l + a + 1)))
                for l in range(kmax // 2 + 1)])
        out = np.empty((x.shape[0], len(rows)))
        for j, (kx, ky, kz, l) in enumerate(rows):
            v = H[0, kx] * H[1, ky] * H[2, kz]
            if sp.polyatomic:
                v = v * Lg[l]
            out[:, j] = v / math.sqrt(n_a)
        return out


def galerkin_basis(mixture: MixtureSpec, order: int) -> GalerkinBasis:
    """Hermite x Laguerre basis of total degree <= order (internal energy counts twice)."""
    if int(order) != order or order < MIN_BASIS_ORDER:
        raise BasisError(f"basis order must be an integer >= {MIN_BASIS_ORDER} so that the "
                         f"collision invariants are representable, got {order!r}")
    order = int(order)
    idx = []
    for a, sp in enumerate(mixture.species):
        for l in range(order // 2 + 1 if sp.polyatomic else 1):
            for k in product(range(order + 1), repeat=3):
                if sum(k) + 2 * l <= order:
                    idx.append((a, (*k, l)))
    return GalerkinBasis(mixture, order, tuple(idx))


@dataclass(frozen=True, eq=False)
class GalerkinSystem:
    basis: GalerkinBasis
    gram_error: float
    L_matrix: np.ndarray
    nu_matrix: np.ndarray
    K_matrix: np.ndarray
    eigenvalues: np.ndarray
    symmetry_error: float
    norm: float
    kernel_vectors: np.ndarray
    kernel_residuals: np.ndarray
    nu_min: float
    threshold_factor: float = 1e-6

    @property
    def kernel_dimension_expected(self) -> int:
        return self.basis.mixture.s + 4

    @property
    def threshold(self) -> float:
        return self.threshold_factor * self.norm

    @property
    def null_count(self) -> int:
        return int(np.sum(self.eigenvalues < self.threshold))

    @property
    def first_nonkernel(self) -> float:
        k = self.kernel_dimension_expected
        return float(self.eigenvalues[k]) if len(self.eigenvalues) > k else float("nan")

    @property
    def gap_ratio(self) -> float:
        """Smallest eigenvalue outside the expected kernel over the kernel threshold."""
        return self.first_nonkernel / self.threshold if self.threshold > 0 else float("inf")

    @property
    def min_eigenvalue_ratio(self) -> float:
        return float(self.eigenvalues[0]) / self.norm if self.norm > 0 else 0.0

    @property
    def coercivity_ratio(self) -> float:
        """Smallest eigenvalue outside the kernel divided by the smallest nu on the rule."""
        return self.first_nonkernel / self.nu_min


def _galerkin_rule(case: PairCase, eta: float, order: int) -> CollisionCoordinateRule:
    nR = order // 2 + 1
    return collision_rule(case, eta, order + 1, order, order + 1, 2 * order + 2, nR, nR)


def _pair_contribution(ctx: LinearizationContext, basis: GalerkinBasis, alpha: int, beta: int
                       ) -> np.ndarray:
    """Quarter of the sum of M M_* (Delta p_i)(Delta p_j) against the collision measure."""
    mixture = ctx.mixture
    case = pair_case(mixture, alpha, beta)
    rule = _galerkin_rule(case, ctx.model.eta, basis.order)
    nGE, ns = rule.n_GE, rule.n_s
    xi = rule.xi.reshape(-1, 3)
    xs = rule.xi_star.reshape(-1, 3)
    I = rule.I.reshape(-1)
    Is = rule.I_star.reshape(-1)
    n = len(basis)
    A = np.zeros((nGE * ns, n))
    ia, ib = basis.species_slice(alpha), basis.species_slice(beta)
    A[:, ia] += basis.polynomials(alpha, xi, I if case.poly_a else None)
    A[:, ib] += basis.polynomials(beta, xs, Is if case.poly_b else None)
    phi_a = I**case.exp_a if case.poly_a and case.exp_a else 1.0
    phi_b = Is**case.exp_b if case.poly_b and case.exp_b else 1.0
    P = (ctx.M(alpha, xi, I if case.poly_a else None) / phi_a
         * ctx.M(beta, xs, Is if case.poly_b else None) / phi_b)
    ws = rule.params.weights
    if ctx.model.is_reference_family:
        d = rule.density_diagonal(ctx.model).reshape(-1)
        v = (np.sqrt(rule.w_GE)[:, None] * ws[None, :]).reshape(-1) * np.sqrt(d * P)
        # per (G, E) node: sum_{s0,s} v v' (A - A')(A - A')^T = 2 (S0 S2 - S1 S1^T)
        S0 = v.reshape(nGE, ns).sum(axis=1)
        W = np.repeat(S0, ns) * v
        S1 = np.einsum("ks,ksi->ki", v.reshape(nGE, ns), A.reshape(nGE, ns, n))
        return 0.5 * ((A * W[:, None]).T @ A - S1.T @ S1)
    L = np.zeros((n, n))
    for k in range(nGE):
        D = rule.density_pairs(ctx.model, slice(k, k + 1))[0]
        Kk = D * rule.w_GE[k] * ws[:, None] * ws[None, :] * np.sqrt(
            P[k * ns:(k + 1) * ns][:, None] * P[k * ns:(k + 1) * ns][None, :])
        Ak = A[k * ns:(k + 1) * ns]
        c = Kk.sum(axis=0) + Kk.sum(axis=1)
        L += (Ak * c[:, None]).T @ Ak - Ak.T @ Kk @ Ak - Ak.T @ Kk.T @ Ak
    return 0.25 * L


def _species_rule(ctx: LinearizationContext, alpha: int, order: int):
    """Rule on one species' phase space: radial x sphere x internal energy (plain weights)."""
    sp = ctx.mixture[alpha]
    n_rad = max(12, order + 8)
    s, ws = radial_rule(n_rad, sp.mass)
    sph = sphere(order + 1, 2 * order + 2)
    if sp.polyatomic:
        y, wy = laguerre(order + 6, sp.exponent)
        Ie, wI = y, wy * np.exp(y) * y ** (-sp.exponent)
    else:
        Ie, wI = np.zeros(1), np.ones(1)
    return s, ws, sph, Ie, wI


def galerkin_assemble(ctx: LinearizationContext, basis_order: int = 4,
                      threshold_factor: float = 1e-6) -> GalerkinSystem:
    """Assemble L, nu and K = nu - L on the Hermite x Laguerre basis."""
    _require_reference(ctx.model, "galerkin_assemble")
    mixture = ctx.mixture
    basis = galerkin_basis(mixture, basis_order)
    n = len(basis)

    # Gram matrix and invariant coefficients with a Gauss rule exact for the basis
    gq = QuadratureSpec(hermite_order=basis.order + 4, laguerre_order=basis.order + 4)
    gram = np.zeros((n, n))
    invariants = collision_invariants(mixture)
    coeff = np.zeros((len(invariants), n))
    for a, sp in enumerate(mixture.species):
        rule = phase_rule(sp.mass, sp.dof, sp.polyatomic, gq)
        idx = basis.species_slice(a)
        p = basis.polynomials(a, rule.xi, rule.I)
        Mv = ctx.M(a, rule.xi, rule.I)
        wM = rule.weights * Mv
        gram[np.ix_(idx, idx)] = (p * wM[:, None]).T @ p
        for k, psi in enumerate(invariants):
            coeff[k, idx] = (psi(a, rule.xi, rule.I) * wM) @ p
    gram_error = float(np.max(np.abs(gram - np.eye(n))))
    if gram_error > 1e-8:
        raise BasisError(f"basis is not orthonormal (Gram deviation {gram_error:.3e})")

    L = np.zeros((n, n))
    for a in range(mixture.s):
        for b in range(mixture.s):
            L += _pair_contribution(ctx, basis, a, b)

    nu_mat = np.zeros((n, n))
    nu_min = math.inf
    for a, sp in enumerate(mixture.species):
        s, ws, sph, Ie, wI = _species_rule(ctx, a, basis.order)
        nu_tab = nu_values(ctx, a, s, Ie if sp.polyatomic else None)  # (n_s, n_I)
        nu_min = min(nu_min, float(np.min(nu_tab)))
        xi = (s[:, None, None] * sph.points[None, :, :]).reshape(-1, 3)
        n_dir = len(sph.weights)
        xi_full = np.repeat(xi, len(Ie), axis=0)
        I_full = np.tile(Ie, len(xi))
        w_full = (np.repeat(ws, n_dir)[:, None] * np.tile(sph.weights, len(s))[:, None]
                  * wI[None, :]).reshape(-1)
        nu_full = np.repeat(nu_tab, n_dir, axis=0).reshape(-1)
        idx = basis.species_slice(a)
        p = basis.polynomials(a, xi_full, I_full if sp.polyatomic else None)
        Mv = ctx.M(a, xi_full, I_full if sp.polyatomic else None)
        nu_mat[np.ix_(idx, idx)] = (p * (w_full * Mv * nu_full)[:, None]).T @ p

    scale = float(np.max(np.abs(L)))
    sym = float(np.max(np.abs(L - L.T))) / scale if scale > 0 else 0.0
    eig = np.linalg.eigvalsh(L)
    norm = float(np.max(np.abs(eig)))
    res = np.array([np.linalg.norm(L @ c) / (np.linalg.norm(c) * norm) if norm > 0 else 0.0
                    for c in coeff])
    return GalerkinSystem(basis, gram_error, L, nu_mat, nu_mat - L, eig, sym, norm, coeff, res,
                          nu_min, threshold_factor)


# ---------------------------------------------------------------------------
# bound scan
# ---------------------------------------------------------------------------

def default_grid(xi_max: float = 8.0, xi_step: float = 0.25, I_max: float = 16.0,
                 I_step: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """|xi| in 0..xi_max and I in 0..I_max, both inclusive."""
    if not (xi_max > 0 and xi_step > 0 and I_max >= 0 and I_step > 0):
        raise ParameterError("grid bounds and steps must be positive")
    xs = np.arange(int(round(xi_max / xi_step)) + 1) * xi_step
    Is = np.arange(int(round(I_max / I_step)) + 1) * I_step
    return xs, Is


@dataclass(frozen=True, eq=False)
class NuBoundReport:
    """nu / (1 + |xi| + sqrt(I))^exponent on a grid; ``nu`` has shape (s, n_xi, n_I)."""

    speeds: np.ndarray
    energies: np.ndarray
    nu: np.ndarray
    ratio: np.ndarray
    exponent: float
    flatness: np.ndarray
    flat_window: int
    flat_tolerance: float = 0.05
    spread_limit: float = 10.0

    @property
    def c_min(self) -> float:
        return float(np.min(self.ratio))

    @property
    def c_max(self) -> float:
        return float(np.max(self.ratio))

    @property
    def spread(self) -> float:
        return self.c_max / self.c_min

    @property
    def positive(self) -> bool:
        return bool(np.all(self.nu > 0))

    @property
    def max_flatness(self) -> float:
        return float(np.max(self.flatness))

    @property
    def passed(self) -> bool:
        return (self.positive and np.isfinite(self.spread) and self.spread <= self.spread_limit
                and self.max_flatness <= self.flat_tolerance)

    def growth_violations(self, start: float = 2.0) -> int:
        """Grid steps with |xi| >= start where nu decreases in |xi|."""
        sel = self.speeds >= start
        d = np.diff(self.nu[:, sel, :], axis=1)
        return int(np.sum(d < 0))


def nu_bound_scan(ctx: LinearizationContext, grid=None, exponent: float | None = None,
                  flat_window: int = 10) -> NuBoundReport:
    """Collision frequency on the grid and its ratio to (1 + |xi| + sqrt(I))^(1 - eta).

    ``flatness`` is, per species and energy row, the relative change of
    the ratio over the last ``flat_window`` speed steps.  Monatomic rows
    repeat one value across energies and use the weight (1 + |xi|).
    """
    _require_reference(ctx.model, "nu_bound_scan")
    speeds, energies = default_grid() if grid is None else (np.asarray(g, dtype=float) for g in grid)
    speeds = np.atleast_1d(speeds)
    energies = np.atleast_1d(energies)
    if speeds.size == 0 or energies.size == 0:
        raise ParameterError("the scan grid must be nonempty")
    if np.any(speeds < 0) or np.any(energies < 0):
        raise ParameterError("grid values must be nonnegative")
    if speeds.size < 2:
        raise ParameterError("the scan grid needs at least two speeds")
    ex = 1.0 - ctx.model.eta if exponent is None else float(exponent)
    s = ctx.mixture.s
    nu_arr = np.empty((s, speeds.size, energies.size))
    ratio = np.empty_like(nu_arr)
    for a, sp in enumerate(ctx.mixture.species):
        if sp.polyatomic:
            vals = nu_values(ctx, a, speeds, energies)
            weight = (1.0 + speeds[:, None] + np.sqrt(energies)[None, :]) ** ex
        else:
            vals = np.repeat(nu_values(ctx, a, speeds), energies.size, axis=1)
            weight = np.repeat(((1.0 + speeds) ** ex)[:, None], energies.size, axis=1)
        nu_arr[a] = vals
        ratio[a] = vals / weight
    w = min(flat_window, speeds.size - 1)
    flat = np.abs(ratio[:, -1, :] - ratio[:, -1 - w, :]) / np.abs(ratio[:, -1, :])
    return NuBoundReport(speeds, energies, nu_arr, ratio, ex, flat, w)
