"""Quantum Fisher information and the post-selection decomposition.

The pure-state QFI is implemented with the standard minus sign,
F = 4(<dpsi|dpsi> - |<psi|dpsi>|^2); the SLD (mixed-state) formula is the
cross-check that fixes this convention.  All theta derivatives are
central differences on deterministic state families.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from . import dilation
from .dynamics import DEFAULT_FD_STEP, DEFAULT_STEPS_PER_UNIT_TIME, evolve, normalize
from .errors import (
    InvalidState,
    NumericalInconsistency,
    PostSelectionSingular,
)

QFI_NEG_CLAMP = 1e-12
EDGE_P = 1e-12
EDGE_DP = 1e-10
DEFAULT_ABS_TOL = 1e-8
DEFAULT_REL_TOL = 1e-4


def global_abs_tol() -> float:
    """Absolute tolerance floor; overridable through NHSENSE_TOL."""
    raw = os.environ.get("NHSENSE_TOL")
    return float(raw) if raw else DEFAULT_ABS_TOL


def _clamp_qfi(value: float) -> float:
    if value < -QFI_NEG_CLAMP:
        raise NumericalInconsistency(f"QFI evaluated to {value:.3e}")
    return max(value, 0.0)


def qfi_pure(psi: np.ndarray, dpsi: np.ndarray) -> float:
    """4(<dpsi|dpsi> - |<psi|dpsi>|^2) for a normalized pure-state family."""
    psi = np.asarray(psi, dtype=complex)
    dpsi = np.asarray(dpsi, dtype=complex)
    value = 4.0 * (np.vdot(dpsi, dpsi).real - abs(np.vdot(psi, dpsi)) ** 2)
    return _clamp_qfi(float(value))


def qfi_mixed(rho: np.ndarray, drho: np.ndarray, eps: float = 1e-12) -> float:
    """SLD QFI in the eigenbasis of rho: sum 2|<i|drho|j>|^2/(p_i+p_j)."""
    rho = np.asarray(rho, dtype=complex)
    drho = np.asarray(drho, dtype=complex)
    if np.max(np.abs(rho - rho.conj().T)) > 1e-9:
        raise InvalidState("rho is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > 1e-9:
        raise InvalidState("rho is not trace-one")
    if np.max(np.abs(drho - drho.conj().T)) > 1e-9:
        raise InvalidState("drho is not Hermitian")
    if abs(np.trace(drho)) > 1e-9:
        raise InvalidState("drho is not traceless")
    p, v = np.linalg.eigh(rho)
    if p.min() < -1e-9:
        raise InvalidState(f"rho has negative eigenvalue {p.min():.3e}")
    d = v.conj().T @ drho @ v
    psum = p[:, None] + p[None, :]
    mask = psum > eps
    value = 2.0 * float(np.sum(np.abs(d[mask]) ** 2 / psum[mask]))
    return _clamp_qfi(value)


def fisher_post(p_d: float, dp_d: float) -> float:
    """(dp_d)^2 / (p_d p_r), the classical FI of the keep/reject coin."""
    p_r = 1.0 - p_d
    if p_d < EDGE_P or p_r < EDGE_P:
        if abs(dp_d) < EDGE_DP:
            return 0.0
        raise PostSelectionSingular(
            f"p_d = {p_d:.3e} at the boundary with dp_d = {dp_d:.3e}"
        )
    return dp_d**2 / (p_d * p_r)


@dataclass(frozen=True)
class FisherBreakdown:
    theta: float
    t: float
    f_q_joint: float
    p_d: float
    q_d: float
    q_r: float
    f_post: float
    f_tot: float
    f_q_nh: float
    rejected_degenerate: bool = False

    @property
    def eff_qfi(self) -> float:
        return self.p_d * self.f_q_nh


@dataclass(frozen=True)
class HierarchyReport:
    tol: float
    margin_additivity: float
    margin_eff_le_tot: float
    margin_tot_le_joint: float
    failures: tuple

    @property
    def passed(self) -> bool:
        return not self.failures


def _shared_eta0(model, thetas, t: float) -> np.ndarray:
    """One eta(0) valid for every theta in a finite-difference stencil."""
    nu = min(
        dilation.rescale_eta0(np.eye(2, dtype=complex), model.hamiltonian(th), t)[1]
        for th in thetas
    )
    return np.eye(2, dtype=complex) * (dilation.RESCALE_SAFETY / nu)


def fisher_breakdown(
    model,
    theta: float,
    t: float,
    fd_step: float | None = None,
    steps_per_unit_time: int = DEFAULT_STEPS_PER_UNIT_TIME,
    eta0: np.ndarray | None = None,
) -> FisherBreakdown:
    """Full decomposition at one (model, theta, t) point.

    Builds the dilation (with a theta-independent eta(0) so the joint
    state family carries no spurious theta dependence), evolves at
    theta and theta +- h, and assembles every Fisher quantity.
    """
    h = fd_step if fd_step is not None else DEFAULT_FD_STEP * max(1.0, abs(theta))
    thetas = (theta - h, theta, theta + h)
    psi0 = np.array([1.0, 0.0], dtype=complex)

    if model.zeta is not None:
        outcomes = [
            dilation.dilated_evolve_postselect(
                dilation.pseudo_hermitian_shortcut(model.hamiltonian(th), model.zeta),
                psi0,
                t=t,
            )
            for th in thetas
        ]
    else:
        if eta0 is None:
            eta0 = _shared_eta0(model, thetas, t)
        outcomes = [
            dilation.dilated_evolve_postselect(
                dilation.dilate_time_ordered(
                    model.hamiltonian(th),
                    t,
                    eta0=eta0,
                    steps_per_unit_time=steps_per_unit_time,
                ),
                psi0,
            )
            for th in thetas
        ]
    o_minus, o_mid, o_plus = outcomes

    d_joint = (o_plus.psi_joint - o_minus.psi_joint) / (2.0 * h)
    f_q_joint = qfi_pure(o_mid.psi_joint, d_joint)

    q_d = qfi_pure(o_mid.psi_d, (o_plus.psi_d - o_minus.psi_d) / (2.0 * h))

    degenerate = any(o.psi_r is None for o in outcomes)
    if degenerate:
        q_r = 0.0
    else:
        q_r = qfi_pure(o_mid.psi_r, (o_plus.psi_r - o_minus.psi_r) / (2.0 * h))

    p_d = o_mid.p_d
    dp_d = (o_plus.p_d - o_minus.p_d) / (2.0 * h)
    f_post = fisher_post(p_d, dp_d)

    def direct(th: float) -> np.ndarray:
        return normalize(evolve(model, th, psi0, t))[0]

    f_q_nh = qfi_pure(direct(theta), (direct(theta + h) - direct(theta - h)) / (2.0 * h))

    f_tot = p_d * q_d + (1.0 - p_d) * q_r + f_post
    return FisherBreakdown(
        theta=theta,
        t=t,
        f_q_joint=f_q_joint,
        p_d=p_d,
        q_d=q_d,
        q_r=q_r,
        f_post=f_post,
        f_tot=f_tot,
        f_q_nh=f_q_nh,
        rejected_degenerate=degenerate,
    )


def check_hierarchy(b: FisherBreakdown, tol: float | None = None) -> HierarchyReport:
    """Assert the inequality chain eff_qfi <= f_tot <= f_q_joint plus the
    additivity identity, reporting signed margins."""
    if tol is None:
        tol = DEFAULT_REL_TOL * b.f_q_joint + global_abs_tol()
    additivity = abs(
        b.f_tot - (b.p_d * b.q_d + (1.0 - b.p_d) * b.q_r + b.f_post)
    )
    additivity_tol = 1e-8 * max(1.0, abs(b.f_tot))
    m_eff = b.f_tot + tol - b.eff_qfi
    m_tot = b.f_q_joint + tol - b.f_tot
    failures = []
    if additivity > additivity_tol:
        failures.append("additivity")
    if m_eff < 0.0:
        failures.append("eff_qfi_le_f_tot")
    if m_tot < 0.0:
        failures.append("f_tot_le_f_q_joint")
    return HierarchyReport(
        tol=tol,
        margin_additivity=additivity,
        margin_eff_le_tot=m_eff,
        margin_tot_le_joint=m_tot,
        failures=tuple(failures),
    )
