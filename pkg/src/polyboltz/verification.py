"""Verification suites: each returns named assertions plus a table for CSV output."""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .collision_geometry import pair_case, sample_events
from .collision_operator import entropy_production, q_point, weak_form, weak_form_symmetrized
from .config import SUITES, RunConfig
from .cross_section import PerturbedCrossSection, microreversibility_residual
from .errors import ParameterError
from .linearized_operator import (
    LinearizationContext,
    default_grid,
    galerkin_assemble,
    hs_convergence,
    nu,
    nu_bound_scan,
)
from .mixture_model import DistributionFunction, MixtureSpec, PhasePoint, collision_invariants, maxwellian
from .oracles import bimodal_monatomic, nu_monte_carlo, q_monte_carlo_monatomic

__all__ = [
    "Assertion",
    "SuiteResult",
    "run_suite",
    "run_suites",
    "write_report",
    "write_csv",
    "format_number",
    "random_positive_state",
    "random_test_function",
    "phase_points",
    "CONTROL_EXPONENT_SHIFT",
]

CONTROL_EXPONENT_SHIFT = 0.5


@dataclass(frozen=True)
class Assertion:
    name: str
    passed: bool
    value: float
    limit: float
    detail: str = ""

    def line(self, suite: str) -> str:
        tag = "PASS" if self.passed else "FAIL"
        extra = f"  ({self.detail})" if self.detail else ""
        return f"{tag}  {suite}.{self.name}: value={self.value:.6e} limit={self.limit:.6e}{extra}"


@dataclass
class SuiteResult:
    name: str
    assertions: list[Assertion] = field(default_factory=list)
    header: list[str] = field(default_factory=list)
    rows: list[list] = field(default_factory=list)
    elapsed: float = 0.0

    @property
    def passed(self) -> bool:
        return all(a.passed for a in self.assertions)

    def check(self, name: str, value: float, limit: float, passed: bool | None = None,
              detail: str = "") -> Assertion:
        ok = bool(value <= limit) if passed is None else bool(passed)
        a = Assertion(name, ok and bool(np.isfinite(value) or passed is not None), float(value),
                      float(limit), detail)
        self.assertions.append(a)
        return a


def format_number(x) -> str:
    """17 significant digits in scientific notation; integers and strings verbatim."""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.16e}"
    return str(x)


# ---------------------------------------------------------------------------
# random test states
# ---------------------------------------------------------------------------

def phase_points(mixture: MixtureSpec, n: int, rng: np.random.Generator,
                 spread: float = 1.5) -> list[PhasePoint]:
    """n points cycling through the species, thermal velocities and energies."""
    pts = []
    for k in range(n):
        a = k % mixture.s
        sp = mixture[a]
        xi = rng.standard_normal(3) * spread / math.sqrt(sp.mass)
        I = float(rng.gamma(sp.exponent + 1.0) * spread) if sp.polyatomic else 0.0
        pts.append(PhasePoint(a, tuple(float(v) for v in xi), I))
    return pts


def random_positive_state(mixture: MixtureSpec, rng: np.random.Generator,
                          amplitude: float = 0.4) -> DistributionFunction:
    """A drifting Maxwellian times 1 + amplitude * sin(k.xi + l I + c): positive, not in equilibrium."""
    n = rng.uniform(0.6, 1.4, mixture.s)
    u = rng.normal(0.0, 0.3, 3)
    T = float(rng.uniform(0.8, 1.25))
    M = maxwellian(mixture, n, u, T)
    comps = []
    for a in range(mixture.s):
        k = rng.normal(0.0, 1.0, 3)
        l = float(rng.normal(0.0, 0.5))
        c = float(rng.uniform(0.0, 2.0 * math.pi))

        def comp(xi, I, _a=a, _k=k, _l=l, _c=c):
            arg = xi @ _k + _c + (_l * I if I is not None else 0.0)
            return M(_a, xi, I) * (1.0 + amplitude * np.sin(arg))
        comps.append(comp)
    return DistributionFunction(mixture, tuple(comps), "perturbed Maxwellian")


def random_test_function(mixture: MixtureSpec, rng: np.random.Generator) -> DistributionFunction:
    """A random quadratic polynomial plus a bounded oscillation, per species."""
    comps = []
    for a in range(mixture.s):
        c0 = float(rng.normal())
        c1 = rng.normal(size=3)
        c2 = rng.normal(size=(3, 3)) * 0.3
        cI = float(rng.normal()) * 0.3
        k = rng.normal(size=3)

        def comp(xi, I, _c0=c0, _c1=c1, _c2=c2, _cI=cI, _k=k):
            v = _c0 + xi @ _c1 + np.einsum("ni,ij,nj->n", xi, _c2, xi) + np.cos(xi @ _k)
            if I is not None:
                v = v + _cI * I + np.sin(I)
            return v
        comps.append(comp)
    return DistributionFunction(mixture, tuple(comps), "test function")


def _pairs(mixture: MixtureSpec):
    return [(a, b) for a in range(mixture.s) for b in range(mixture.s)]


# ---------------------------------------------------------------------------
# suites
# ---------------------------------------------------------------------------

def suite_conservation(cfg: RunConfig) -> SuiteResult:
    res = SuiteResult("conservation", header=["pair", "case", "events", "max_momentum_rel",
                                              "max_energy_rel"])
    rng = np.random.default_rng(cfg.quad.mc_seed)
    worst_p = worst_e = 0.0
    for a, b in _pairs(cfg.mixture):
        case = pair_case(cfg.mixture, a, b)
        ev = sample_events(case, cfg.n_events, rng)
        ma, mb = case.m_a, case.m_b
        p0 = ma * ev.xi + mb * ev.xi_star
        p1 = ma * ev.xi_p + mb * ev.xi_star_p
        scale = ma * np.linalg.norm(ev.xi, axis=1) + mb * np.linalg.norm(ev.xi_star, axis=1)
        dp = np.max(np.linalg.norm(p0 - p1, axis=1) / np.maximum(scale, 1e-300))
        e0 = 0.5 * (ma * np.sum(ev.xi**2, 1) + mb * np.sum(ev.xi_star**2, 1)) + ev.I + ev.I_star
        e1 = 0.5 * (ma * np.sum(ev.xi_p**2, 1) + mb * np.sum(ev.xi_star_p**2, 1)) + ev.I_p + ev.I_star_p
        de = np.max(np.abs(e0 - e1) / np.maximum(e0, 1e-300))
        worst_p, worst_e = max(worst_p, dp), max(worst_e, de)
        res.rows.append([f"{a}-{b}", case.name, len(ev), float(dp), float(de)])
    res.check("momentum_relative", worst_p, 1e-12)
    res.check("energy_relative", worst_e, 1e-12)
    return res


def perturbed_control(model) -> PerturbedCrossSection:
    """sigma times (1 + |xi'|^2 / 2): breaks detailed balance for every pair type."""
    return PerturbedCrossSection(model, lambda ev: 1.0 + 0.5 * np.sum(ev.xi_p**2, axis=1),
                                 "sigma*(1+|xi'|^2/2)")


def suite_microreversibility(cfg: RunConfig) -> SuiteResult:
    res = SuiteResult("microreversibility", header=["pair", "case", "events", "max_rel_residual",
                                                    "control_max_rel_residual"])
    rng = np.random.default_rng(cfg.quad.mc_seed + 1)
    control = perturbed_control(cfg.model)
    worst = 0.0
    worst_control = math.inf
    for a, b in _pairs(cfg.mixture):
        case = pair_case(cfg.mixture, a, b)
        ev = sample_events(case, cfg.n_reversibility, rng)
        r = float(np.max(microreversibility_residual(cfg.model, ev, relative=True)))
        rc = float(np.max(microreversibility_residual(control, ev, relative=True)))
        worst = max(worst, r)
        worst_control = min(worst_control, rc)
        res.rows.append([f"{a}-{b}", case.name, len(ev), r, rc])
    res.check("reference_relative_residual", worst, 1e-12)
    res.check("control_fails", worst_control, 1e-6, passed=worst_control > 1e-6,
              detail="smallest per-pair residual of the perturbed model must exceed the limit")
    return res


def suite_equilibrium(cfg: RunConfig) -> SuiteResult:
    res = SuiteResult("equilibrium", header=["point", "species", "xi_x", "xi_y", "xi_z", "I",
                                             "Q", "loss", "relative"])
    rng = np.random.default_rng(cfg.quad.mc_seed + 2)
    M = maxwellian(cfg.mixture, u=(0.2, -0.1, 0.3), T=1.2)
    worst = 0.0
    for k, at in enumerate(phase_points(cfg.mixture, cfg.n_points, rng)):
        q = q_point(M, at, cfg.model, cfg.quad)
        rel = abs(q.value) / q.loss_magnitude
        worst = max(worst, rel)
        res.rows.append([k, at.species_index, *at.xi, at.internal_energy, q.value, q.loss_magnitude, rel])
    res.check("relative_Q_of_M", worst, 1e-6)
    return res


def suite_weak_form(cfg: RunConfig) -> SuiteResult:
    res = SuiteResult("weak_form", header=["pair", "weak_form", "error", "symmetrized", "error_sym",
                                           "difference", "max_invariant"])
    rng = np.random.default_rng(cfg.quad.mc_seed + 3)
    inv = collision_invariants(cfg.mixture)
    worst_ratio, worst_inv = 0.0, 0.0
    for k in range(cfg.n_pairs):
        f = random_positive_state(cfg.mixture, rng)
        g = random_test_function(cfg.mixture, rng)
        w1 = weak_form(f, g, cfg.model, cfg.quad, estimate_error=True)
        w2 = weak_form_symmetrized(f, g, cfg.model, cfg.quad, estimate_error=True)
        diff = abs(w1.value - w2.value)
        allowed = 3.0 * (w1.error + w2.error) + 1e-12 * max(1.0, abs(w1.value))
        worst_ratio = max(worst_ratio, diff / allowed)
        winv = max(abs(weak_form(f, psi, cfg.model, cfg.quad).value) for psi in inv)
        worst_inv = max(worst_inv, winv)
        res.rows.append([k, w1.value, w1.error, w2.value, w2.error, diff, winv])
    res.check("difference_over_error_budget", worst_ratio, 1.0,
              detail="|direct - symmetrized| / (3 x combined estimate)")
    res.check("invariants_absolute", worst_inv, 1e-6)
    return res


def suite_entropy(cfg: RunConfig) -> SuiteResult:
    res = SuiteResult("entropy", header=["state", "production", "error"])
    rng = np.random.default_rng(cfg.quad.mc_seed + 4)
    worst = -math.inf
    for k in range(cfg.n_pairs):
        f = random_positive_state(cfg.mixture, rng)
        w = entropy_production(f, cfg.model, cfg.quad, estimate_error=True)
        worst = max(worst, w.value)
        res.rows.append([k, w.value, w.error])
    M = maxwellian(cfg.mixture, u=(0.2, -0.1, 0.3), T=1.2)
    wm = entropy_production(M, cfg.model, cfg.quad).value
    res.rows.append(["maxwellian", wm, float("nan")])
    res.check("max_production", worst, 1e-8)
    res.check("maxwellian_abs", abs(wm), 1e-8)
    return res


def suite_galerkin(cfg: RunConfig) -> SuiteResult:
    res = SuiteResult("galerkin", header=["index", "eigenvalue", "relative"])
    ctx = LinearizationContext(cfg.mixture, cfg.model, cfg.quad)
    gs = galerkin_assemble(ctx, cfg.basis_order)
    for i, e in enumerate(gs.eigenvalues):
        res.rows.append([i, float(e), float(e) / gs.norm])
    s = cfg.mixture.s
    K = gs.K_matrix
    kscale = float(np.max(np.abs(K)))
    res.check("gram_deviation", gs.gram_error, 1e-8)
    res.check("symmetry_relative", gs.symmetry_error, 1e-8)
    res.check("K_symmetry_relative", float(np.max(np.abs(K - K.T))) / kscale, 1e-8)
    res.check("min_eigenvalue_over_norm", -gs.min_eigenvalue_ratio, 1e-8,
              detail=f"lambda_min/||L|| = {gs.min_eigenvalue_ratio:.3e}")
    res.check("kernel_dimension", gs.null_count, s + 4, passed=gs.null_count == s + 4,
              detail=f"expected {s + 4} eigenvalues below {gs.threshold_factor:g}*||L||")
    res.check("spectral_gap_over_threshold", gs.gap_ratio, 10.0, passed=gs.gap_ratio >= 10.0,
              detail="first eigenvalue outside the kernel / threshold, must be >= limit")
    res.check("kernel_residual", float(np.max(gs.kernel_residuals)), 1e-6)
    res.check("coercivity_ratio", gs.coercivity_ratio, 0.0, passed=gs.coercivity_ratio > 0,
              detail="first nonkernel eigenvalue / min nu, must be positive")
    res.check("basis_size_per_species", min(len(gs.basis.species_slice(a)) for a in range(s)),
              35, passed=all(len(gs.basis.species_slice(a)) >= 35 for a in range(s)),
              detail="functions per species, must be >= limit")
    return res


def nu_scan(cfg: RunConfig, exponent: float | None = None):
    ctx = LinearizationContext(cfg.mixture, cfg.model, cfg.quad)
    grid = default_grid(cfg.grid_xi_max, cfg.grid_xi_step, cfg.grid_I_max, cfg.grid_I_step)
    return nu_bound_scan(ctx, grid, exponent)


def nu_rows(report) -> list[list]:
    rows = []
    for a in range(report.nu.shape[0]):
        for i, x in enumerate(report.speeds):
            for j, e in enumerate(report.energies):
                rows.append([a, float(x), float(e), float(report.nu[a, i, j]), float(report.ratio[a, i, j])])
    return rows


def suite_nu_bounds(cfg: RunConfig) -> SuiteResult:
    res = SuiteResult("nu_bounds", header=["species", "xi", "I", "nu", "ratio"])
    rep = nu_scan(cfg)
    ctrl_exp = 1.0 - cfg.model.eta + CONTROL_EXPONENT_SHIFT
    # the control only changes the weight, so reuse the computed frequencies
    ctrl = _reweighted(rep, cfg, ctrl_exp)
    res.rows = nu_rows(rep)
    res.check("min_nu", float(np.min(rep.nu)), 0.0, passed=rep.positive,
              detail="must be positive")
    res.check("ratio_spread", rep.spread, rep.spread_limit,
              detail=f"c_min={rep.c_min:.6e} c_max={rep.c_max:.6e}")
    res.check("boundary_flatness", rep.max_flatness, rep.flat_tolerance,
              detail=f"exponent {rep.exponent:g}, last {rep.flat_window} steps")
    res.check("growth_violations", rep.growth_violations(), 0.0)
    res.check("control_flatness_fails", ctrl.max_flatness, ctrl.flat_tolerance,
              passed=ctrl.max_flatness > ctrl.flat_tolerance,
              detail=f"exponent {ctrl_exp:g} must exceed the flatness limit")
    return res


def _reweighted(rep, cfg: RunConfig, exponent: float):
    from .linearized_operator import NuBoundReport
    ratio = np.empty_like(rep.nu)
    for a, sp in enumerate(cfg.mixture.species):
        if sp.polyatomic:
            w = (1.0 + rep.speeds[:, None] + np.sqrt(rep.energies)[None, :]) ** exponent
        else:
            w = np.repeat(((1.0 + rep.speeds) ** exponent)[:, None], rep.energies.size, axis=1)
        ratio[a] = rep.nu[a] / w
    k = rep.flat_window
    flat = np.abs(ratio[:, -1, :] - ratio[:, -1 - k, :]) / np.abs(ratio[:, -1, :])
    return NuBoundReport(rep.speeds, rep.energies, rep.nu, ratio, exponent, flat, k)


def suite_hs_convergence(cfg: RunConfig) -> SuiteResult:
    res = SuiteResult("hs_convergence", header=["pair", "truncation", "value", "increment"])
    ctx = LinearizationContext(cfg.mixture, cfg.model, cfg.quad)
    worst = 0.0
    mono = True
    for a, b in _pairs(cfg.mixture):
        scan = hs_convergence(ctx, cfg.hs_truncations, (a, b))
        prev = None
        for t, v in zip(scan.truncations, scan.values):
            res.rows.append([f"{a}-{b}", t, v, float("nan") if prev is None else abs(v - prev)])
            prev = v
        worst = max(worst, scan.final_relative_increment)
        mono = mono and scan.monotone
    res.check("final_relative_increment", worst, 1e-3)
    res.check("increments_shrink", 0.0 if mono else 1.0, 0.0, passed=mono)
    return res


def suite_oracles(cfg: RunConfig) -> SuiteResult:
    res = SuiteResult("oracles", header=["check", "species", "xi_x", "xi_y", "xi_z", "I", "rule",
                                         "rule_error", "mc", "mc_error", "z"])
    rng = np.random.default_rng(cfg.quad.mc_seed + 5)
    ctx = LinearizationContext(cfg.mixture, cfg.model, cfg.quad)
    fine = LinearizationContext(cfg.mixture, cfg.model, cfg.quad.replace(
        radial_order=2 * cfg.quad.radial_order, polar_order=2 * cfg.quad.polar_order,
        laguerre_order=2 * cfg.quad.laguerre_order))
    worst = 0.0
    n = cfg.oracle_points * cfg.mixture.s
    for k, at in enumerate(phase_points(cfg.mixture, n, rng)):
        v = nu(ctx, at)
        err = abs(nu(fine, at) - v)
        mc = nu_monte_carlo(cfg.mixture, cfg.model, at, cfg.quad.mc_samples, cfg.quad.mc_seed + 100 + k)
        z = abs(v - mc.value) / math.hypot(mc.error, err)
        worst = max(worst, z)
        res.rows.append(["nu", at.species_index, *at.xi, at.internal_energy, v, err, mc.value, mc.error, z])
    if cfg.mixture.s1 == 0:
        f = bimodal_monatomic(cfg.mixture)
        for k, at in enumerate(phase_points(cfg.mixture, cfg.oracle_points, rng, spread=1.0)):
            q = q_point(f, at, cfg.model, cfg.quad, estimate_error=True)
            mc = q_monte_carlo_monatomic(f, cfg.model, at, cfg.quad.mc_samples,
                                         cfg.quad.mc_seed + 200 + k)
            z = abs(q.value - mc.value) / math.hypot(mc.error, q.error)
            worst = max(worst, z)
            res.rows.append(["Q", at.species_index, *at.xi, at.internal_energy, q.value, q.error,
                             mc.value, mc.error, z])
    res.check("max_standardized_difference", worst, 3.0,
              detail="|rule - MC| / sqrt(se^2 + rule_error^2)")
    return res


_SUITES: dict[str, Callable[[RunConfig], SuiteResult]] = {
    "conservation": suite_conservation,
    "microreversibility": suite_microreversibility,
    "equilibrium": suite_equilibrium,
    "weak_form": suite_weak_form,
    "entropy": suite_entropy,
    "galerkin": suite_galerkin,
    "nu_bounds": suite_nu_bounds,
    "hs_convergence": suite_hs_convergence,
    "oracles": suite_oracles,
}
assert tuple(_SUITES) == SUITES


def run_suite(name: str, cfg: RunConfig) -> SuiteResult:
    if name not in _SUITES:
        raise ParameterError(f"unknown suite {name!r}")
    t0 = time.perf_counter()
    res = _SUITES[name](cfg)
    res.elapsed = time.perf_counter() - t0
    return res


def run_suites(cfg: RunConfig, names=None) -> list[SuiteResult]:
    return [run_suite(n, cfg) for n in (names or cfg.suites)]


def write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([format_number(x) for x in row])


def write_report(out_dir: Path, results: list[SuiteResult], title: str = "") -> Path:
    """report.txt plus one CSV per suite; returns the report path."""
    out_dir.mkdir(parents=True, exist_ok=True)
    lines = [title] if title else []
    for r in results:
        lines.append(f"[{r.name}] {'PASS' if r.passed else 'FAIL'} ({r.elapsed:.2f} s)")
        lines.extend("  " + a.line(r.name) for a in r.assertions)
        write_csv(out_dir / f"{r.name}.csv", r.header, r.rows)
    total = sum(len(r.assertions) for r in results)
    failed = [f"{r.name}.{a.name}" for r in results for a in r.assertions if not a.passed]
    lines.append(f"summary: {total - len(failed)}/{total} assertions passed")
    if failed:
        lines.append("failing: " + ", ".join(failed))
    path = out_dir / "report.txt"
    path.write_text("\n".join(lines) + "\n")
    return path
