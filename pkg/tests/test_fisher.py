"""Fisher quantities: pure/SLD cross-checks and the decomposition identity."""

import dataclasses

import numpy as np
import pytest

from nhsense import errors, fisher, models


def normalized_family(a, b, theta):
    """Smooth family v/(|v|) with v = a + theta b, plus its exact derivative."""
    v = a + theta * b
    n = np.linalg.norm(v)
    psi = v / n
    dpsi = b / n - v * np.vdot(v, b).real / n**3
    return psi, dpsi


def random_family(rng):
    a = rng.normal(size=2) + 1j * rng.normal(size=2)
    b = rng.normal(size=2) + 1j * rng.normal(size=2)
    return a, b


def test_qfi_pure_matches_closed_form():
    lam, t = 0.5, 2.0
    m = models.pseudo_hermitian_model(lam)
    for theta in (0.2, 0.785, 1.3):
        c = np.sqrt(np.cos(theta * t) ** 2 + lam**2 * np.sin(theta * t) ** 2)
        v = m.analytic_state(theta, t)
        dv = t * np.array(
            [-np.sin(theta * t), -1j * lam * np.cos(theta * t)], dtype=complex
        )
        psi = v / c
        dpsi = dv / c - v * np.vdot(v, dv).real / c**3
        got = fisher.qfi_pure(psi, dpsi)
        assert abs(got - m.analytic_qfi(theta, t)) < 1e-10 * m.analytic_qfi(theta, t)


def test_qfi_pure_gauge_invariance():
    rng = np.random.default_rng(0)
    for _ in range(20):
        a, b = random_family(rng)
        psi, dpsi = normalized_family(a, b, 0.4)
        base = fisher.qfi_pure(psi, dpsi)
        shifted = fisher.qfi_pure(psi, dpsi + 0.73j * psi)  # gauge term
        assert abs(base - shifted) < 1e-10 * max(1.0, base)


def test_qfi_pure_agrees_with_sld_route():
    # adjudicates the sign convention: only the minus-sign pure formula
    # matches the SLD eigen-decomposition on rank-one states
    rng = np.random.default_rng(42)
    for _ in range(50):
        a, b = random_family(rng)
        psi, dpsi = normalized_family(a, b, 0.9)
        rho = np.outer(psi, psi.conj())
        drho = np.outer(dpsi, psi.conj()) + np.outer(psi, dpsi.conj())
        pure = fisher.qfi_pure(psi, dpsi)
        mixed = fisher.qfi_mixed(rho, drho)
        assert abs(pure - mixed) < 1e-7 * max(1.0, pure)


def test_qfi_mixed_classical_diagonal():
    p, c = 0.3, 0.2
    rho = np.diag([p, 1.0 - p]).astype(complex)
    drho = np.diag([c, -c]).astype(complex)
    want = c**2 / p + c**2 / (1.0 - p)
    assert abs(fisher.qfi_mixed(rho, drho) - want) < 1e-12


def test_qfi_mixed_input_validation():
    good = np.diag([0.5, 0.5]).astype(complex)
    tr0 = np.diag([0.1, -0.1]).astype(complex)
    with pytest.raises(errors.InvalidState):
        fisher.qfi_mixed(np.array([[0.5, 0.1], [0.0, 0.5]]), tr0)
    with pytest.raises(errors.InvalidState):
        fisher.qfi_mixed(np.diag([0.7, 0.7]).astype(complex), tr0)
    with pytest.raises(errors.InvalidState):
        fisher.qfi_mixed(good, np.diag([0.1, 0.1]).astype(complex))
    with pytest.raises(errors.InvalidState):
        fisher.qfi_mixed(np.diag([1.4, -0.4]).astype(complex), tr0)


def test_qfi_negative_raises_large_clamps_small():
    unit = np.array([1.0, 0.0], dtype=complex)
    with pytest.raises(errors.NumericalInconsistency):
        fisher.qfi_pure(1.1 * unit, unit)
    assert fisher.qfi_pure(unit, 0.5 * unit) == 0.0


def test_fisher_post_two_outcome_oracle():
    # p(theta) = cos^2 theta gives the textbook constant FI of 4
    for theta in (0.3, 0.7, 1.1):
        p = np.cos(theta) ** 2
        dp = -np.sin(2.0 * theta)
        assert abs(fisher.fisher_post(p, dp) - 4.0) < 1e-12
    assert fisher.fisher_post(0.25, 0.0) == 0.0


def test_fisher_post_edges():
    assert fisher.fisher_post(1.0, 0.0) == 0.0
    assert fisher.fisher_post(1e-14, 5e-11) == 0.0
    with pytest.raises(errors.PostSelectionSingular):
        fisher.fisher_post(1.0 - 1e-14, 0.01)


def test_global_abs_tol_env_override(monkeypatch):
    monkeypatch.delenv("NHSENSE_TOL", raising=False)
    assert fisher.global_abs_tol() == 1e-8
    monkeypatch.setenv("NHSENSE_TOL", "1e-5")
    assert fisher.global_abs_tol() == 1e-5


def test_breakdown_efficiency_point():
    # lam = 0.5, theta = pi/4, t = 2: post-selection is essentially free
    b = fisher.fisher_breakdown(models.pseudo_hermitian_model(0.5), np.pi / 4.0, 2.0)
    assert b.q_r <= 1e-8
    assert abs(b.p_d * b.q_d - b.f_q_joint) <= 1e-3 * b.f_q_joint
    assert b.f_post <= 1e-3 * b.f_q_joint
    assert abs(b.eff_qfi - b.p_d * b.f_q_nh) == 0.0


def test_breakdown_hermitian_limit():
    t = 2.0
    b = fisher.fisher_breakdown(models.pseudo_hermitian_model(1.0), 0.7, t)
    assert abs(b.p_d - 1.0) < 1e-12
    assert b.f_post == 0.0
    for val in (b.f_tot, b.f_q_joint, b.f_q_nh):
        assert abs(val - 4.0 * t**2) < 1e-6 * 4.0 * t**2
    assert fisher.check_hierarchy(b).passed


def test_breakdown_ep_gyro_strict_gaps():
    b = fisher.fisher_breakdown(
        models.ep_gyro_model(), 1.5, 8.0, steps_per_unit_time=500
    )
    rep = fisher.check_hierarchy(b)
    assert rep.passed
    assert b.eff_qfi < b.f_tot < b.f_q_joint
    assert rep.margin_eff_le_tot > 0 and rep.margin_tot_le_joint > 0


def test_hierarchy_negative_controls():
    b = fisher.fisher_breakdown(models.pt_symmetric_model(), 1.5, 2.0,
                                steps_per_unit_time=500)
    assert fisher.check_hierarchy(b).passed
    # doubling q_d silently breaks the additivity identity
    corrupt = dataclasses.replace(b, q_d=2.0 * b.q_d)
    assert "additivity" in fisher.check_hierarchy(corrupt).failures
    # inflating f_tot past the joint QFI breaks the upper bound
    corrupt = dataclasses.replace(
        b, f_tot=2.0 * b.f_q_joint,
        q_d=(2.0 * b.f_q_joint - (1 - b.p_d) * b.q_r - b.f_post) / b.p_d,
    )
    assert "f_tot_le_f_q_joint" in fisher.check_hierarchy(corrupt).failures


def test_breakdown_rejected_degenerate_flag():
    b = fisher.fisher_breakdown(models.pseudo_hermitian_model(1.0), 0.5, 1.0)
    assert b.rejected_degenerate
    assert b.q_r == 0.0
