"""Manufactured cases, convergence and truncation studies, isometry checks."""

import numpy as np
import pytest

from axistokes.fields import Poly2
from axistokes.meshing import generate_structured
from axistokes.verification import (
    CheckResult,
    ConvergenceStudy,
    DecayFamily,
    ManufacturedCase,
    builtin_cases,
    convergence_study,
    isometry_suite,
    stability_study,
    strong_residual,
    truncation_study,
)
from axistokes.verification import strong_divergence, strong_force

R = Poly2.monomial(1, 0)
Z = Poly2.monomial(0, 1)
ZERO = Poly2.zero()


@pytest.fixture(scope="module")
def cases():
    return builtin_cases()


def test_strong_residual_zero_for_consistent_fields(cases):
    for case in cases.values():
        assert strong_residual(case.k, case.u, case.p, case.f) == 0.0


def test_strong_residual_detects_perturbations(cases):
    case = cases["k1_convergence"]
    fr, ft, fz = case.f.components
    bumped = (fr + 1e-6 * R, ft, fz)
    res = strong_residual(case.k, case.u, case.p, bumped)
    assert res == pytest.approx(1e-6, rel=1e-9)
    res = strong_residual(case.k, case.u, case.p + 1e-6 * Z, case.f.components)
    assert res > 1e-7


def test_builtin_cases_divergence_and_axis_traces(cases):
    for name, case in cases.items():
        assert case.name == name
        declared = case.g_div if case.g_div is not None else ZERO
        assert (strong_divergence(case.k, case.u) - declared).max_abs_coeff() <= 1e-12
        ur, ut, uz = case.u.components
        z = np.linspace(0.1, 0.9, 5)
        if case.k == 0:
            assert np.abs(ur.value(0.0 * z, z)).max() == 0.0
            assert np.abs(ut.value(0.0 * z, z)).max() == 0.0
        elif abs(case.k) == 1:
            tie = ur.value(0.0 * z, z) + 1j * case.k * ut.value(0.0 * z, z)
            assert np.abs(tie).max() <= 1e-14
            assert np.abs(uz.value(0.0 * z, z)).max() == 0.0
        else:
            for comp in (ur, ut, uz):
                assert np.abs(comp.value(0.0 * z, z)).max() == 0.0


def test_from_fields_rejects_wrong_divergence():
    with pytest.raises(ValueError, match="divergence"):
        ManufacturedCase.from_fields("bad", 0, (R, ZERO, ZERO), Z)


def test_pressure_offset(cases):
    mesh = generate_structured((1.0, 1.0), 0.25)
    case0 = cases["k0_exact"]
    # p = z - 1/2 has zero r-weighted mean on the unit square.
    assert case0.pressure_offset(mesh) == pytest.approx(0.0, abs=1e-14)
    shifted = ManufacturedCase.from_fields(
        "shifted", 0, case0.u, case0.p + 2.0 * Poly2.monomial(0, 0)
    )
    assert shifted.pressure_offset(mesh) == pytest.approx(2.0, rel=1e-12)
    assert cases["k2_exact"].pressure_offset(mesh) == 0.0


def test_convergence_table_rates_and_csv():
    study = ConvergenceStudy(
        case="synthetic",
        k=1,
        hs=[0.25, 0.125, 0.0625],
        err_u=[4e-2, 1e-2, 2.5e-3],
        err_p=[8e-2, 2e-2, 5e-3],
    )
    assert study.rate_u == pytest.approx(2.0)
    assert study.rate_p == pytest.approx(2.0)
    lines = study.csv().strip().splitlines()
    assert lines[0] == "h, err_u, rate_u, err_p, rate_p"
    assert len(lines) == 4
    first = [tok.strip() for tok in lines[1].split(",")]
    assert first[2] == "" and first[4] == ""


def test_convergence_study_quick_run(cases):
    study = convergence_study(cases["k0_convergence"], hs=(0.25, 0.125))
    assert study.err_u[1] < study.err_u[0]
    assert study.err_p[1] < study.err_p[0]
    assert study.rate_u > 1.5
    assert len(study.csv().strip().splitlines()) == 3


def test_decay_family_amplitude():
    fam = DecayFamily(1.0)
    assert fam.amplitude(0) == 1.0
    assert fam.amplitude(3) == pytest.approx(1.0 / 16.0)
    assert fam.amplitude(-3) == fam.amplitude(3)


def test_truncation_study_analytic_unit_decay():
    study = truncation_study(DecayFamily(1.0))
    assert study.ns == [2, 4, 8, 16, 32]
    assert not study.solved
    assert study.k_max >= 128
    assert all(b > a for a, b in zip(study.tails[1:], study.tails[:-1]))
    # Halving slope heads toward -(s + 1/2) from below resolution.
    assert -1.6 < study.slope < -1.3
    assert study.slope == pytest.approx(-1.4045, abs=5e-4)
    assert study.bound_window == pytest.approx(1.8645, abs=5e-4)
    assert study.bound_growth == pytest.approx(1.0269, abs=5e-4)
    lines = study.csv().strip().splitlines()
    assert lines[0] == "N, tail, bound_ratio"
    assert len(lines) == 6


def test_truncation_study_with_solves():
    study = truncation_study(DecayFamily(2.0), ns=(2, 4), with_solves=True, h=0.25)
    assert study.solved
    assert study.k_max == 16
    assert study.tails[1] < study.tails[0]
    assert study.tails[0] > 0.0


def test_check_result_line():
    check = CheckResult("sample", True, 1.25e-12, 1e-8)
    assert check.line() == "CHECK sample PASS 1.250000e-12 1.000000e-08"
    check = CheckResult("sample", False, 2.0, 1e-8)
    assert check.line().split()[2] == "FAIL"


def test_isometry_suite_smoke():
    mesh = generate_structured((1.0, 1.0), 0.5)
    checks = isometry_suite(mesh, k_max=2, n_fields=2, seed=1)
    names = {c.name for c in checks}
    assert names == {
        "l2_isometry",
        "h1_semi_isometry",
        "h1_full_isometry",
        "energy_form_consistency",
        "divergence_form_consistency",
        "polarization",
        "equivalence_bounds",
        "equivalence_trend",
        "conjugation",
    }
    failed = [c.name for c in checks if not c.passed]
    assert failed == []


def test_stability_study_small_wavenumbers():
    study = stability_study(ks=range(0, 6), h=0.25)
    assert len(study.ratios) == 6
    assert all(r > 0.0 for r in study.ratios)
    assert study.max_ratio <= 2.0 * study.reference
    assert study.uniform(2.0)
