"""Species, mixtures, distribution functions, Maxwellians and moments.

Species indices are zero-based.  Monatomic species come first and carry
no internal-energy coordinate; every I-dependent factor is simply absent
for them.  Temperatures are measured in energy units (Boltzmann constant
equal to one).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ParameterError, QuadratureError
from .quadrature import PhaseRule, QuadratureSpec, phase_rule

__all__ = [
    "Kind",
    "SpeciesSpec",
    "MixtureSpec",
    "PhasePoint",
    "DistributionFunction",
    "inner_product",
    "maxwellian",
    "collision_invariants",
    "moments",
    "internal_weight",
]


class Kind(str, enum.Enum):
    MONATOMIC = "monatomic"
    POLYATOMIC = "polyatomic"


@dataclass(frozen=True)
class SpeciesSpec:
    """One species: mass, kind, internal degrees of freedom and number density."""

    mass: float
    kind: Kind = Kind.MONATOMIC
    dof: float = 2.0
    number_density: float = 1.0
    name: str = ""

    def __post_init__(self) -> None:
        kind = Kind(self.kind)
        object.__setattr__(self, "kind", kind)
        if not (np.isfinite(self.mass) and self.mass > 0):
            raise ParameterError(f"species mass must be positive, got {self.mass!r}")
        if not (np.isfinite(self.number_density) and self.number_density > 0):
            raise ParameterError(f"number density must be positive, got {self.number_density!r}")
        if kind is Kind.MONATOMIC:
            object.__setattr__(self, "dof", 2.0)
        elif not (np.isfinite(self.dof) and self.dof >= 2):
            raise ParameterError(f"internal degrees of freedom must be >= 2, got {self.dof!r}")
        object.__setattr__(self, "mass", float(self.mass))
        object.__setattr__(self, "dof", float(self.dof))
        object.__setattr__(self, "number_density", float(self.number_density))

    @property
    def polyatomic(self) -> bool:
        return self.kind is Kind.POLYATOMIC

    @property
    def exponent(self) -> float:
        """Exponent dof/2 - 1 of the internal-energy weight (0 for monatomic species)."""
        return self.dof / 2.0 - 1.0 if self.polyatomic else 0.0


@dataclass(frozen=True)
class MixtureSpec:
    """Ordered species list, monatomic species first."""

    species: tuple[SpeciesSpec, ...]

    def __post_init__(self) -> None:
        species = tuple(self.species)
        if not species:
            raise ParameterError("a mixture needs at least one species")
        seen_poly = False
        for k, sp in enumerate(species):
            if not isinstance(sp, SpeciesSpec):
                raise ParameterError(f"species {k} is not a SpeciesSpec")
            if sp.polyatomic:
                seen_poly = True
            elif seen_poly:
                raise ParameterError("monatomic species must precede polyatomic species")
        object.__setattr__(self, "species", species)

    @classmethod
    def single(cls, mass: float = 1.0, kind: Kind | str = Kind.MONATOMIC, dof: float = 2.0,
               number_density: float = 1.0) -> "MixtureSpec":
        return cls((SpeciesSpec(mass, Kind(kind), dof, number_density),))

    @property
    def s(self) -> int:
        return len(self.species)

    @property
    def s0(self) -> int:
        return sum(1 for sp in self.species if not sp.polyatomic)

    @property
    def s1(self) -> int:
        return self.s - self.s0

    @property
    def masses(self) -> np.ndarray:
        return np.array([sp.mass for sp in self.species])

    @property
    def densities(self) -> np.ndarray:
        return np.array([sp.number_density for sp in self.species])

    def __getitem__(self, alpha: int) -> SpeciesSpec:
        return self.species[alpha]

    def check_index(self, alpha: int) -> int:
        if not (isinstance(alpha, (int, np.integer)) and 0 <= alpha < self.s):
            raise ParameterError(f"species index {alpha!r} out of range 0..{self.s - 1}")
        return int(alpha)


@dataclass(frozen=True)
class PhasePoint:
    """A single particle state.  ``internal_energy`` is ignored for monatomic species."""

    species_index: int
    xi: tuple[float, float, float]
    internal_energy: float = 0.0

    def __post_init__(self) -> None:
        xi = tuple(float(v) for v in np.asarray(self.xi, dtype=float).reshape(3))
        object.__setattr__(self, "xi", xi)
        if not (np.isfinite(self.internal_energy) and self.internal_energy >= 0):
            raise ParameterError(f"internal energy must be >= 0, got {self.internal_energy!r}")
        object.__setattr__(self, "internal_energy", float(self.internal_energy))

    @property
    def velocity(self) -> np.ndarray:
        return np.array(self.xi)


Component = Callable[[np.ndarray, np.ndarray | None], np.ndarray]


@dataclass(frozen=True, eq=False)
class DistributionFunction:
    """Per-species evaluator ``f_alpha(xi, I)``.

    ``components[alpha]`` receives velocities of shape (n, 3) and
    internal energies of shape (n,) (``None`` for monatomic species) and
    returns n values.
    """

    mixture: MixtureSpec
    components: tuple[Component, ...]
    label: str = ""

    def __post_init__(self) -> None:
        comps = tuple(self.components)
        if len(comps) != self.mixture.s:
            raise ParameterError("one component per species is required")
        object.__setattr__(self, "components", comps)

    def __call__(self, alpha: int, xi: np.ndarray, I: np.ndarray | None = None) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        squeeze = xi.ndim == 1
        xi = np.atleast_2d(xi)
        if self.mixture[alpha].polyatomic:
            I = np.broadcast_to(np.asarray(0.0 if I is None else I, dtype=float), xi.shape[:1])
        else:
            I = None
        out = np.broadcast_to(np.asarray(self.components[alpha](xi, I), dtype=float), xi.shape[:1])
        return out[0] if squeeze else out

    def scaled(self, a: float) -> "DistributionFunction":
        comps = tuple(_scaled(c, a) for c in self.components)
        return DistributionFunction(self.mixture, comps, f"{a}*{self.label}")

    def __add__(self, other: "DistributionFunction") -> "DistributionFunction":
        if other.mixture != self.mixture:
            raise ParameterError("cannot add distributions over different mixtures")
        comps = tuple(_summed(a, b) for a, b in zip(self.components, other.components))
        return DistributionFunction(self.mixture, comps, f"{self.label}+{other.label}")

    def times(self, other: "DistributionFunction") -> "DistributionFunction":
        comps = tuple(_product(a, b) for a, b in zip(self.components, other.components))
        return DistributionFunction(self.mixture, comps, f"{self.label}*{other.label}")

    @classmethod
    def zero(cls, mixture: MixtureSpec) -> "DistributionFunction":
        return cls(mixture, tuple(_zero for _ in range(mixture.s)), "0")


def _zero(xi, I):
    return np.zeros(xi.shape[0])


def _scaled(c, a):
    return lambda xi, I: a * c(xi, I)


def _summed(c1, c2):
    return lambda xi, I: c1(xi, I) + c2(xi, I)


def _product(c1, c2):
    return lambda xi, I: c1(xi, I) * c2(xi, I)


def internal_weight(species: SpeciesSpec, I: np.ndarray | None) -> np.ndarray | float:
    """The factor I^(dof/2 - 1); identically 1 for monatomic species."""
    if not species.polyatomic or species.exponent == 0.0:
        return 1.0 if I is None else np.ones_like(np.asarray(I, dtype=float))
    return np.asarray(I, dtype=float) ** species.exponent


def _species_rules(mixture: MixtureSpec, quad: QuadratureSpec, temperature: float = 1.0
                   ) -> list[PhaseRule]:
    return [phase_rule(sp.mass, sp.dof, sp.polyatomic, quad, temperature) for sp in mixture.species]


def _evaluate_checked(f: DistributionFunction, alpha: int, rule: PhaseRule) -> np.ndarray:
    vals = f(alpha, rule.xi, rule.I)
    bad = ~np.isfinite(vals)
    if np.any(bad):
        k = int(np.flatnonzero(bad)[0])
        where = f"xi={rule.xi[k].tolist()}"
        if rule.I is not None:
            where += f", I={rule.I[k]:.6g}"
        raise QuadratureError(f"non-finite value of {f.label or 'distribution'} for species {alpha} "
                              f"at node {k} ({where})")
    return vals


def inner_product(f: DistributionFunction, g: DistributionFunction, quad: QuadratureSpec,
                  temperature: float = 1.0) -> float:
    """Weighted L2 inner product summed over species.

    The rule is Gaussian in velocity and Gamma-weighted in internal
    energy, sized for integrands that decay like one Maxwellian at
    ``temperature``.
    """
    if f.mixture != g.mixture:
        raise ParameterError("inner product of distributions over different mixtures")
    total = 0.0
    for alpha, rule in enumerate(_species_rules(f.mixture, quad, temperature)):
        fv = _evaluate_checked(f, alpha, rule)
        gv = _evaluate_checked(g, alpha, rule)
        total += float(np.sum(rule.weights * fv * gv))
    return total


def _maxwellian_component(sp: SpeciesSpec, n: float, u: np.ndarray, T: float) -> Component:
    m = sp.mass
    vel_norm = n * (m / (2.0 * math.pi * T)) ** 1.5
    if not sp.polyatomic:
        def comp(xi, I, _c=vel_norm, _u=u, _m=m, _T=T):
            d = xi - _u
            return _c * np.exp(-_m * np.einsum("ij,ij->i", d, d) / (2.0 * _T))
        return comp
    a = sp.exponent
    int_norm = vel_norm / (T ** (a + 1.0) * math.gamma(a + 1.0))

    def comp(xi, I, _c=int_norm, _u=u, _m=m, _T=T, _a=a):
        d = xi - _u
        return _c * I**_a * np.exp(-(_m * np.einsum("ij,ij->i", d, d) + 2.0 * I) / (2.0 * _T))
    return comp


def maxwellian(mixture: MixtureSpec, n: Sequence[float] | None = None,
               u: Sequence[float] = (0.0, 0.0, 0.0), T: float = 1.0) -> DistributionFunction:
    """Maxwellian with densities ``n`` (default: the mixture's densities), drift ``u`` and temperature ``T``.

    For a polyatomic species the internal-energy factor is
    I^(dof/2-1) exp(-I/T) / (T^(dof/2) Gamma(dof/2)), so each component
    integrates to its number density.
    """
    n_arr = mixture.densities if n is None else np.asarray(n, dtype=float).reshape(-1)
    if n_arr.shape[0] != mixture.s:
        raise ParameterError("one number density per species is required")
    if not np.all(np.isfinite(n_arr)) or np.any(n_arr <= 0):
        raise ParameterError(f"number densities must be positive, got {n_arr.tolist()}")
    if not (np.isfinite(T) and T > 0):
        raise ParameterError(f"temperature must be positive, got {T!r}")
    u_arr = np.asarray(u, dtype=float).reshape(3)
    comps = tuple(_maxwellian_component(sp, float(nv), u_arr, float(T))
                  for sp, nv in zip(mixture.species, n_arr))
    return DistributionFunction(mixture, comps, "M")


def collision_invariants(mixture: MixtureSpec) -> list[DistributionFunction]:
    """The s+4 generators: species indicators, three momenta and total energy."""
    s = mixture.s
    out: list[DistributionFunction] = []
    for alpha in range(s):
        comps = tuple(_indicator if beta == alpha else _zero for beta in range(s))
        out.append(DistributionFunction(mixture, comps, f"e{alpha}"))
    for axis, name in enumerate("xyz"):
        comps = tuple(_momentum(sp.mass, axis) for sp in mixture.species)
        out.append(DistributionFunction(mixture, comps, f"m*xi_{name}"))
    comps = tuple(_energy(sp.mass, sp.polyatomic) for sp in mixture.species)
    out.append(DistributionFunction(mixture, comps, "m|xi|^2+2I"))
    return out


def _indicator(xi, I):
    return np.ones(xi.shape[0])


def _momentum(m, axis):
    return lambda xi, I: m * xi[:, axis]


def _energy(m, poly):
    if poly:
        return lambda xi, I: m * np.einsum("ij,ij->i", xi, xi) + 2.0 * I
    return lambda xi, I: m * np.einsum("ij,ij->i", xi, xi)


@dataclass(frozen=True)
class Moments:
    number_densities: np.ndarray
    mass_density: float
    velocity: np.ndarray
    temperature: float
    extra: dict = field(default_factory=dict)


def moments(f: DistributionFunction, quad: QuadratureSpec, temperature_hint: float = 1.0) -> Moments:
    """Number densities, bulk velocity and translational temperature of ``f``."""
    mix = f.mixture
    rules = _species_rules(mix, quad, temperature_hint)
    n = np.zeros(mix.s)
    mom = np.zeros(3)
    vals = []
    for alpha, rule in enumerate(rules):
        fv = _evaluate_checked(f, alpha, rule)
        vals.append(fv)
        n[alpha] = np.sum(rule.weights * fv)
        mom += mix[alpha].mass * np.sum(rule.weights[:, None] * fv[:, None] * rule.xi, axis=0)
    rho = float(np.sum(mix.masses * n))
    u = mom / rho
    thermal = 0.0
    for alpha, rule in enumerate(rules):
        d = rule.xi - u
        thermal += mix[alpha].mass * np.sum(rule.weights * vals[alpha] * np.einsum("ij,ij->i", d, d))
    T = thermal / (3.0 * float(np.sum(n)))
    return Moments(n, rho, u, float(T))
