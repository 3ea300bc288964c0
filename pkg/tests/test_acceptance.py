"""Acceptance gate: one test per shipped claim, tolerances pinned.

Each test prints a single pass/fail line for its criterion and asserts
it.  Numbers compared against come from independent closed forms or from
oracle values computed outside the library before these tests were
written down.
"""

import time

import numpy as np
import pytest

from axistokes.cli import main
from axistokes.fem import (
    FemSpace,
    assemble,
    assemble_divergence_rhs,
    boundary_flux,
)
from axistokes.fields import Poly2, VectorModeFn
from axistokes.meshing import DomainSpec, generate_structured, mesh_from_spec
from axistokes.norms import vector_mode_norm
from axistokes.solver import SolverConfig, estimate_inf_sup, solve_mode
from axistokes.verification import (
    DecayFamily,
    builtin_cases,
    convergence_study,
    isometry_suite,
    stability_study,
    truncation_study,
)

L_SHAPE = ((0.0, 0.5), (1.0, 0.5), (1.0, 0.0), (3.0, 0.0), (3.0, 1.0), (0.0, 1.0))


def _line(num: int, passed: bool, detail: str) -> None:
    word = "PASS" if passed else "FAIL"
    print(f"criterion {num:2d}: {word} ({detail})")
    assert passed, f"criterion {num}: {detail}"


@pytest.fixture(scope="module")
def domains():
    return [
        ("unit square", generate_structured((1.0, 1.0), 0.25)),
        ("L-shaped", mesh_from_spec(DomainSpec(polygon=L_SHAPE, target_h=0.5))),
    ]


@pytest.fixture(scope="module")
def suites(domains):
    return {label: isometry_suite(mesh) for label, mesh in domains}


@pytest.fixture(scope="module")
def square8():
    return FemSpace(generate_structured((1.0, 1.0), 1.0 / 8.0))


@pytest.fixture(scope="module")
def cases():
    return builtin_cases()


def test_criterion_01_norm_isometries(suites):
    # Mode-norm sums against honest 3D tensor-quadrature integrals:
    # 10 random trig-polynomial fields, modes |k| <= 5, on both domains.
    names = ("l2_isometry", "h1_semi_isometry", "h1_full_isometry")
    worst = 0.0
    for label, checks in suites.items():
        for check in checks:
            if check.name in names:
                worst = max(worst, check.value)
    _line(1, worst <= 1e-8, f"worst relative isometry defect {worst:.3e} <= 1e-8")


def test_criterion_02_polarization_identity(suites):
    worst = max(
        check.value
        for checks in suites.values()
        for check in checks
        if check.name == "polarization"
    )
    _line(2, worst <= 1e-12, f"worst polarization defect {worst:.3e} <= 1e-12")


def test_criterion_03_norm_equivalence_sandwich(domains):
    mesh = domains[0][1]
    rng = np.random.default_rng(42)
    lo, hi = np.inf, 0.0
    for k in (2, 3, 5, 10):
        for _ in range(100):
            comps = []
            for _ in range(3):
                coeffs = {}
                for a in range(3):
                    for b in range(3 - a):
                        coeffs[(a + 1, b)] = (
                            rng.standard_normal() + 1j * rng.standard_normal()
                        )
                comps.append(Poly2(coeffs))
            rep = vector_mode_norm(mesh, VectorModeFn(k, tuple(comps)))
            ratio = rep.h1k / rep.h1k_star
            lo, hi = min(lo, ratio), max(hi, ratio)
    within = 0.5 <= lo and hi <= 1.5

    # The family (r, -i r, 0) loads one coupling branch only, so its norm
    # ratio drops toward the lower end as the wavenumber grows.
    r_mono = Poly2.monomial(1, 0)
    trend = []
    for k in (2, 3, 5, 10, 20):
        v = VectorModeFn(k, (r_mono, Poly2({(0, 0): -1j}) * r_mono, Poly2.zero()))
        rep = vector_mode_norm(mesh, v)
        trend.append(rep.h1k / rep.h1k_star)
    decreasing = all(b < a for a, b in zip(trend, trend[1:]))
    toward_one = trend[-1] <= 1.1 and all(t >= 1.0 - 1e-12 for t in trend)
    ok = within and decreasing and toward_one
    _line(
        3,
        ok,
        f"400 ratios in [{lo:.4f}, {hi:.4f}] within [0.5, 1.5]; "
        f"trend {trend[0]:.3f} -> {trend[-1]:.3f} decreasing toward 1",
    )


def test_criterion_04_manufactured_convergence(cases):
    started = time.perf_counter()
    rates = {}
    for name in ("k0_convergence", "k1_convergence", "k3_convergence"):
        study = convergence_study(cases[name], hs=(1 / 8, 1 / 16, 1 / 32))
        rates[study.k] = (study.rate_u, study.rate_p)
    elapsed = time.perf_counter() - started
    ok = all(ru >= 1.8 and rp >= 1.8 for ru, rp in rates.values()) and elapsed < 120.0
    detail = ", ".join(
        f"k={k}: u {ru:.2f} / p {rp:.2f}" for k, (ru, rp) in sorted(rates.items())
    )
    _line(4, ok, f"{detail}; all >= 1.8 in {elapsed:.1f}s < 120s")


def test_criterion_05_conjugation_of_solves(square8, cases):
    worst = 0.0
    for name in ("k2_divfree", "k3_convergence"):
        case = cases[name]
        pos = solve_mode(
            assemble(square8, case.k, g=case.u), f=case.f, g_div=case.g_div
        )
        g_neg = case.g_div.conj() if case.g_div is not None else None
        neg = solve_mode(
            assemble(square8, -case.k, g=case.u.conj()),
            f=case.f.conj(),
            g_div=g_neg,
        )
        scale = max(float(np.abs(pos.u).max()), 1.0)
        worst = max(
            worst,
            float(np.abs(neg.u - np.conj(pos.u)).max()) / scale,
            float(np.abs(neg.p - np.conj(pos.p)).max()) / scale,
        )
    _line(5, worst <= 1e-10, f"mirrored-solve conjugation defect {worst:.3e} <= 1e-10")


def test_criterion_06_inf_sup_uniformity():
    betas = {}
    for h in (1 / 8, 1 / 16, 1 / 32):
        space = FemSpace(generate_structured((1.0, 1.0), h))
        for k in (0, 1, 2, 5):
            betas[(h, k)] = estimate_inf_sup(assemble(space, k)).beta
    vals = list(betas.values())
    spread = (max(vals) - min(vals)) / min(vals)
    _line(
        6,
        spread < 0.20,
        f"beta in [{min(vals):.4f}, {max(vals):.4f}] over h in (1/8, 1/16, 1/32) "
        f"and k in (0, 1, 2, 5); spread {spread:.1%} < 20%",
    )


def test_criterion_07_uniform_stability_in_wavenumber():
    study = stability_study(ks=range(0, 21), h=1 / 8)
    ratio = study.max_ratio / study.reference
    _line(
        7,
        study.uniform(2.0),
        f"max solution/data ratio up to k=20 is {ratio:.3f}x the axisymmetric one, <= 2x",
    )


def test_criterion_08_truncation_decay():
    # Known red: the two pinned demands fight each other.  A tail at the
    # ideal rate N^-(s+1/2) makes tail*N^s fall like N^-1/2, a factor 4
    # across N = 2..32, so the 1.5 window only closes preasymptotically,
    # where the slope band is missed instead.  Asserted as pinned anyway.
    rows = []
    ok = True
    for s in (0.5, 1.0, 2.0):
        study = truncation_study(DecayFamily(s), ns=(2, 4, 8, 16, 32))
        target = -(s + 0.5)
        slope_ok = abs(study.slope - target) <= 0.15
        window_ok = study.bound_window <= 1.5
        ok = ok and slope_ok and window_ok
        slope_note = "ok" if slope_ok else f"misses +-0.15 by {abs(study.slope - target) - 0.15:.4f}"
        window_note = "ok" if window_ok else "> 1.5"
        rows.append(
            f"s={s:g}: slope {study.slope:.4f} vs {target:.2f} ({slope_note}), "
            f"window {study.bound_window:.4f} ({window_note})"
        )
    for row in rows:
        print(row)
    _line(8, ok, "; ".join(rows))


def test_criterion_09_axisymmetric_decoupled_fast_path(square8, cases):
    case = cases["k0_convergence"]
    worst = 0.0
    for method in ("direct", "uzawa"):
        fast = solve_mode(
            assemble(square8, 0, g=case.u),
            f=case.f,
            config=SolverConfig(method=method, tol=1e-13),
        )
        coupled = solve_mode(
            assemble(square8, 0, g=case.u),
            f=case.f,
            config=SolverConfig(method=method, tol=1e-13, k0_real_fast_path=False),
        )
        assert fast.report.fast_path and not coupled.report.fast_path
        scale = max(float(np.abs(fast.u).max()), 1.0)
        worst = max(
            worst,
            float(np.abs(fast.u - coupled.u).max()) / scale,
            float(np.abs(fast.p - coupled.p).max()) / scale,
        )
    _line(
        9,
        worst <= 1e-10,
        f"two-real-systems path vs coupled complex solve: {worst:.3e} <= 1e-10",
    )


def test_criterion_10_compatibility_flux(square8, cases, tmp_path, capsys):
    worst = 0.0
    for name in ("k0_exact", "k0_convergence"):
        case = cases[name]
        system = assemble(square8, 0, g=case.u)
        sol = solve_mode(system, f=case.f)
        worst = max(worst, abs(boundary_flux(square8, sol.u)))
        G = assemble_divergence_rhs(square8, case.g_div, system.rule)
        worst = max(
            worst, abs(complex(np.sum(G - system.B_full @ system.constraints.fix)))
        )

    # The solver front end reports the flux value for the axisymmetric mode.
    out = tmp_path / "out"
    cfg = tmp_path / "run.ini"
    cfg.write_text(
        "[domain]\nrectangle = 1 1\nh = 0.125\n\n"
        "[data]\nmanufactured = k0_exact\n\n"
        f"[output]\ndirectory = {out}\n"
    )
    assert main(["solve", "--config", str(cfg)]) == 0
    captured = capsys.readouterr().out
    flux_lines = [ln for ln in captured.splitlines() if "flux defect" in ln]
    assert len(flux_lines) == 1
    reported = float(flux_lines[0].split()[-1])
    worst = max(worst, reported)
    _line(
        10,
        worst <= 1e-10,
        f"divergence-free cases: worst reported/integrated flux {worst:.3e} <= 1e-10",
    )
