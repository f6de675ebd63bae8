"""Run configuration: an INI-style file with [mixture], [model], [quadrature] and [run].

Example::

    [mixture]
    names = argon, nitrogen
    mass = 1.0, 1.75
    kind = monatomic, polyatomic
    dof = 2, 5
    density = 1.0, 1.0

    [model]
    C = 1.0, 0.8; 0.8, 1.2     # rows separated by ';' (a single number means uniform)
    eta = 0.5
    gamma = 0.5

    [quadrature]
    radial_order = 20          # any QuadratureSpec field, plus seed and mc_samples

    [run]
    suites = all
    basis_order = 4

Keys are case-insensitive.  Unknown sections or keys are rejected.
"""

from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .cross_section import CrossSectionModel
from .errors import ConfigError, PolyBoltzError
from .mixture_model import Kind, MixtureSpec, SpeciesSpec
from .quadrature import QuadratureSpec

__all__ = ["SUITES", "RunConfig", "load_config", "parse_config", "bundled_config", "BUNDLED"]

SUITES = (
    "conservation",
    "microreversibility",
    "equilibrium",
    "weak_form",
    "entropy",
    "galerkin",
    "nu_bounds",
    "hs_convergence",
    "oracles",
)

BUNDLED = ("mono_hard_sphere", "poly_delta4", "mono_poly", "mono_poly_eta0")

_MIXTURE_KEYS = {"names", "mass", "kind", "dof", "density"}
_MODEL_KEYS = {"c", "eta", "gamma"}
_QUAD_INT = {f.name for f in dataclasses.fields(QuadratureSpec)
             if f.type in ("int", int) and f.name not in ("mc_seed", "mc_samples")}
_QUAD_FLOAT = {"velocity_scale", "energy_scale"}
_QUAD_KEYS = _QUAD_INT | _QUAD_FLOAT | {"seed", "mc_samples"}
_RUN_KEYS = {"suites", "out", "grid_xi_max", "grid_xi_step", "grid_i_max", "grid_i_step",
             "basis_order", "hs_truncations", "n_events", "n_reversibility", "n_points",
             "n_pairs", "oracle_points"}


@dataclass(frozen=True, eq=False)
class RunConfig:
    mixture: MixtureSpec
    model: CrossSectionModel
    quad: QuadratureSpec = field(default_factory=QuadratureSpec)
    suites: tuple[str, ...] = SUITES
    out: str = "results"
    grid_xi_max: float = 8.0
    grid_xi_step: float = 0.25
    grid_I_max: float = 16.0
    grid_I_step: float = 1.0
    basis_order: int = 4
    hs_truncations: tuple[float, ...] = (4.0, 8.0, 16.0)
    n_events: int = 100_000
    n_reversibility: int = 10_000
    n_points: int = 20
    n_pairs: int = 20
    oracle_points: int = 3
    source: str = ""

    def with_overrides(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)


def _floats(raw: str, key: str) -> list[float]:
    try:
        return [float(x) for x in raw.split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"{key}: expected comma-separated numbers, got {raw!r}") from exc


def _int(raw: str, key: str) -> int:
    try:
        return int(raw.strip())
    except ValueError as exc:
        raise ConfigError(f"{key}: expected an integer, got {raw!r}") from exc


def _float(raw: str, key: str) -> float:
    try:
        return float(raw.strip())
    except ValueError as exc:
        raise ConfigError(f"{key}: expected a number, got {raw!r}") from exc


def _check_keys(section: str, items: dict, allowed: set[str]) -> None:
    unknown = sorted(set(items) - allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) in [{section}]: {', '.join(unknown)}")


def _mixture(sec: dict) -> MixtureSpec:
    _check_keys("mixture", sec, _MIXTURE_KEYS)
    if "mass" not in sec:
        raise ConfigError("[mixture] needs at least 'mass'")
    masses = _floats(sec["mass"], "mass")
    s = len(masses)
    if s == 0:
        raise ConfigError("[mixture] mass list is empty")
    kinds = [k.strip().lower() for k in sec.get("kind", ",".join(["monatomic"] * s)).split(",")]
    dofs = _floats(sec["dof"], "dof") if "dof" in sec else [2.0] * s
    dens = _floats(sec["density"], "density") if "density" in sec else [1.0] * s
    names = [n.strip() for n in sec["names"].split(",")] if "names" in sec else [f"s{i}" for i in range(s)]
    for key, vals in (("kind", kinds), ("dof", dofs), ("density", dens), ("names", names)):
        if len(vals) != s:
            raise ConfigError(f"[mixture] {key} has {len(vals)} entries, mass has {s}")
    try:
        species = tuple(SpeciesSpec(m, Kind(k), d, n, name)
                        for m, k, d, n, name in zip(masses, kinds, dofs, dens, names))
        return MixtureSpec(species)
    except ValueError as exc:
        raise ConfigError(f"[mixture] {exc}") from exc


def _model(sec: dict, s: int) -> CrossSectionModel:
    _check_keys("model", sec, _MODEL_KEYS)
    raw = sec.get("c", "1.0")
    rows = [r for r in raw.split(";") if r.strip()]
    if len(rows) == 1 and len(_floats(rows[0], "C")) == 1:
        C = np.full((s, s), _floats(rows[0], "C")[0])
    else:
        C = np.array([_floats(r, "C") for r in rows], dtype=float) if all(
            len(_floats(r, "C")) == len(rows) for r in rows) else None
        if C is None:
            raise ConfigError("[model] C must be square (rows separated by ';')")
        if C.shape != (s, s):
            raise ConfigError(f"[model] C is {C.shape[0]}x{C.shape[1]}, the mixture has {s} species")
    eta = _float(sec.get("eta", "0"), "eta")
    gamma = _float(sec.get("gamma", "0.5"), "gamma")
    try:
        return CrossSectionModel(C, eta, gamma)
    except ValueError as exc:
        raise ConfigError(f"[model] {exc}") from exc


def _quadrature(sec: dict) -> QuadratureSpec:
    _check_keys("quadrature", sec, _QUAD_KEYS)
    kw = {}
    for key, raw in sec.items():
        if key in _QUAD_INT:
            kw[key] = _int(raw, key)
        elif key in _QUAD_FLOAT:
            kw[key] = _float(raw, key)
        elif key == "seed":
            kw["mc_seed"] = _int(raw, key)
        elif key == "mc_samples":
            kw["mc_samples"] = _int(raw, key)
    try:
        return QuadratureSpec(**kw)
    except ValueError as exc:
        raise ConfigError(f"[quadrature] {exc}") from exc


def _run(sec: dict) -> dict:
    _check_keys("run", sec, _RUN_KEYS)
    kw: dict = {}
    if "suites" in sec:
        names = [x.strip().lower() for x in sec["suites"].split(",") if x.strip()]
        kw["suites"] = resolve_suites(names)
    if "out" in sec:
        kw["out"] = sec["out"].strip()
    for key, attr in (("grid_xi_max", "grid_xi_max"), ("grid_xi_step", "grid_xi_step"),
                      ("grid_i_max", "grid_I_max"), ("grid_i_step", "grid_I_step")):
        if key in sec:
            kw[attr] = _float(sec[key], key)
    for key in ("basis_order", "n_events", "n_reversibility", "n_points", "n_pairs", "oracle_points"):
        if key in sec:
            kw[key] = _int(sec[key], key)
    if "hs_truncations" in sec:
        kw["hs_truncations"] = tuple(_floats(sec["hs_truncations"], "hs_truncations"))
    return kw


def resolve_suites(names) -> tuple[str, ...]:
    names = list(names)
    if not names or names == ["all"]:
        return SUITES
    bad = [n for n in names if n not in SUITES]
    if bad:
        raise ConfigError(f"unknown suite(s): {', '.join(bad)}; known: {', '.join(SUITES)}")
    return tuple(n for n in SUITES if n in names)


def validate(cfg: RunConfig) -> RunConfig:
    """Range checks shared by file parsing and command-line overrides."""
    if not (cfg.grid_xi_max > 0 and cfg.grid_xi_step > 0 and cfg.grid_I_max >= 0 and cfg.grid_I_step > 0):
        raise ConfigError("grid bounds must be positive (grid_I_max may be 0)")
    if cfg.grid_xi_step > cfg.grid_xi_max:
        raise ConfigError("grid needs at least two speeds (grid_xi_step <= grid_xi_max)")
    for key in ("n_events", "n_reversibility", "n_points", "n_pairs", "oracle_points"):
        if getattr(cfg, key) < 1:
            raise ConfigError(f"{key} must be positive")
    if not cfg.hs_truncations or any(t <= 0 for t in cfg.hs_truncations) or len(cfg.hs_truncations) < 2:
        raise ConfigError("hs_truncations needs at least two positive radii")
    if list(cfg.hs_truncations) != sorted(cfg.hs_truncations):
        raise ConfigError("hs_truncations must be increasing")
    return cfg


def parse_config(text: str, source: str = "<string>") -> RunConfig:
    """Parse configuration text; raises ConfigError on any problem."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None,
                                       strict=True, empty_lines_in_values=False)
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    sections = {name.lower(): dict(parser[name]) for name in parser.sections()}
    unknown = sorted(set(sections) - {"mixture", "model", "quadrature", "run"})
    if unknown:
        raise ConfigError(f"unknown section(s): {', '.join(unknown)}")
    if "mixture" not in sections:
        raise ConfigError("missing [mixture] section")
    try:
        mixture = _mixture(sections["mixture"])
        model = _model(sections.get("model", {}), mixture.s)
        quad = _quadrature(sections.get("quadrature", {}))
        run = _run(sections.get("run", {}))
        return validate(RunConfig(mixture, model, quad, source=source, **run))
    except ConfigError:
        raise
    except PolyBoltzError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str | Path) -> RunConfig:
    p = Path(path)
    if not p.is_file():
        bundled = _bundled_path(str(path))
        if bundled is None:
            raise ConfigError(f"config file not found: {path}")
        p = bundled
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {p}: {exc}") from exc
    return parse_config(text, str(p))


def _bundled_path(name: str) -> Path | None:
    stem = name[:-4] if name.endswith(".ini") else name
    if stem in BUNDLED:
        return Path(__file__).with_name("configs") / f"{stem}.ini"
    return None


def bundled_config(name: str) -> RunConfig:
    """One of the configurations shipped with the package (see ``BUNDLED``)."""
    p = _bundled_path(name)
    if p is None:
        raise ConfigError(f"no bundled config named {name!r}; choose from {', '.join(BUNDLED)}")
    return load_config(p)
