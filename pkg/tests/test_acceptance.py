"""Acceptance criteria 1-9.

Each test runs the verification suites on the configurations the
criterion names and prints one line: criterion number, PASS or FAIL,
wall time against the budget, and the key figures.  Run alone with
``pytest tests/test_acceptance.py -s`` or ``python tests/test_acceptance.py``.
"""

from __future__ import annotations

import time

import pytest

from polyboltz.config import bundled_config
from polyboltz.verification import run_suite

MONO = "mono_hard_sphere"
POLY = "poly_delta4"
MIXED = "mono_poly"

_LINES: dict[int, str] = {}


def _run(suite: str, *configs: str):
    t0 = time.perf_counter()
    results = [(name, run_suite(suite, bundled_config(name))) for name in configs]
    return results, time.perf_counter() - t0


def _figures(results) -> str:
    parts = []
    for name, res in results:
        for a in res.assertions:
            parts.append(f"{name}:{a.name}={a.value:.3g}{'' if a.passed else '(FAIL)'}")
    return "; ".join(parts)


def _report(number: int, title: str, results, elapsed: float, budget: float, capsys) -> None:
    ok = all(r.passed for _, r in results) and elapsed <= budget
    line = (f"criterion {number} {'PASS' if ok else 'FAIL'}  {title}  "
            f"{elapsed:.1f} s (budget {budget:.0f} s)  {_figures(results)}")
    _LINES[number] = line
    with capsys.disabled():
        print("\n" + line)
    failing = [f"{n}:{a.name}" for n, r in results for a in r.assertions if not a.passed]
    assert not failing, f"failing assertions: {failing}"
    assert elapsed <= budget, f"runtime {elapsed:.1f} s exceeds {budget} s"


def test_criterion_1_conservation(capsys):
    results, dt = _run("conservation", MIXED)
    _report(1, "conservation, 1e5 events per case type", results, dt, 10, capsys)


def test_criterion_2_microreversibility(capsys):
    results, dt = _run("microreversibility", MIXED)
    _report(2, "microreversibility and perturbed control", results, dt, 5, capsys)


def test_criterion_3_equilibrium(capsys):
    results, dt = _run("equilibrium", MONO, POLY, MIXED)
    _report(3, "Q(M,M) at 20 points, three mixtures", results, dt, 120, capsys)


def test_criterion_4_weak_form(capsys):
    results, dt = _run("weak_form", MIXED)
    _report(4, "weak form vs symmetrized form, invariants", results, dt, 120, capsys)


def test_criterion_5_entropy(capsys):
    results, dt = _run("entropy", MIXED)
    _report(5, "entropy production sign", results, dt, 120, capsys)


def test_criterion_6_galerkin(capsys):
    results, dt = _run("galerkin", MONO, MIXED)
    _report(6, "Galerkin symmetry, PSD, kernel s+4 and gap", results, dt, 600, capsys)


def test_criterion_7_nu_sandwich(capsys):
    # eta = 0 single monatomic species and eta = 0.5 mono + poly mixture
    results, dt = _run("nu_bounds", MONO, MIXED)
    _report(7, "nu sandwich ratio, flatness and wrong-exponent control", results, dt, 300, capsys)


def test_criterion_8_hilbert_schmidt(capsys):
    results, dt = _run("hs_convergence", MIXED)
    _report(8, "HS norm of k1 under domain doubling, all pairs", results, dt, 300, capsys)


def test_criterion_9_oracles(capsys):
    results, dt = _run("oracles", MONO, MIXED)
    _report(9, "tensor rule vs seeded Monte Carlo", results, dt, 600, capsys)


def teardown_module(module):
    if _LINES:
        print("\nacceptance summary")
        for k in sorted(_LINES):
            print("  " + _LINES[k])


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-s", "-q"]))
