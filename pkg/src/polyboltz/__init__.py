"""Collision operators for gas mixtures with monatomic and polyatomic species.

The package evaluates the nonlinear and linearized collision operators
of a mixture whose polyatomic species carry a continuous internal energy
(energy exchange parametrized by the split fractions R and r), for a
hard-potential cross section with cutoff, and verifies their structural
properties numerically.
"""

from .collision_geometry import (
    CollisionEvent,
    CollisionPair,
    CollisionParams,
    PairCase,
    collide,
    pair_case,
    primed_state,
    reduced_mass,
    reverse_event,
)
from .collision_operator import (
    entropy_production,
    q_point,
    q_point_bilinear,
    weak_form,
    weak_form_symmetrized,
)
from .cross_section import (
    CrossSectionModel,
    PerturbedCrossSection,
    collision_weight,
    microreversibility_residual,
    sigma,
)
from .errors import (
    BasisError,
    ConfigError,
    DomainError,
    ParameterError,
    PolyBoltzError,
    PreconditionError,
    QuadratureError,
)
from .linearized_operator import (
    GalerkinSystem,
    LinearizationContext,
    NuBoundReport,
    galerkin_assemble,
    hs_norm_k1,
    k1_kernel,
    k_apply,
    l_apply,
    nu,
    nu_bound_scan,
)
from .mixture_model import (
    DistributionFunction,
    Kind,
    MixtureSpec,
    PhasePoint,
    SpeciesSpec,
    collision_invariants,
    maxwellian,
    moments,
)
from .quadrature import QuadratureSpec, integrate, monte_carlo

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
