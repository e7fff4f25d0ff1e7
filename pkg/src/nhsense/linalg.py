"""Dense complex linear algebra for 2x2 and 4x4 matrices.

Exponentials of non-normal matrices, Hermitian eigendecompositions,
positive-semidefinite square roots and positivity tests.  Every 2x2
exponential goes through an exact closed form (Cayley-Hamilton), so the
propagators of all built-in sensor Hamiltonians carry no approximation
error.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    InvalidInput,
    NotHermitian,
    NotPositive,
    OverflowRiskWarning,
    SymmetrizedInputWarning,
)

HERM_TOL = 1e-10
PSD_CLAMP = 1e-10
EXP_GUARANTEED_NORM = 50.0


@dataclass(frozen=True)
class EigenDecomposition:
    """Ascending real eigenvalues and orthonormal eigenvector columns."""

    values: np.ndarray
    vectors: np.ndarray


def herm_residual(a: np.ndarray) -> float:
    """Max element-wise deviation from Hermiticity."""
    return float(np.max(np.abs(a - a.conj().T)))


def is_hermitian(a: np.ndarray, tol: float = HERM_TOL) -> bool:
    return herm_residual(a) <= tol


def _sinhc(z: np.ndarray) -> np.ndarray:
    """sinh(z)/z with a series fallback near z = 0."""
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < 1e-6
    zs = np.where(small, 1.0, z)
    out = np.sinh(zs) / zs
    return np.where(small, 1.0 + z * z / 6.0, out)


def expm2_scaled(a: np.ndarray, s: np.ndarray | complex) -> np.ndarray:
    """exp(s*A) for a single 2x2 A and scalar or array s, exact closed form.

    Splits A = alpha*I + B with B traceless; B*B = b*I by Cayley-Hamilton,
    so exp(s*B) = cosh(z) I + sinh(z)/z * sB with z = s*sqrt(b).
    Broadcasts over s, returning shape s.shape + (2, 2).
    """
    a = np.asarray(a, dtype=complex)
    s = np.asarray(s, dtype=complex)
    alpha = np.trace(a) / 2.0
    b_mat = a - alpha * np.eye(2)
    b = (b_mat @ b_mat)[0, 0]
    w = np.sqrt(b)
    z = s[..., None, None] * w
    sb = s[..., None, None] * b_mat
    eye = np.eye(2, dtype=complex)
    out = np.cosh(z) * eye + _sinhc(z) * sb
    return np.exp(s * alpha)[..., None, None] * out


def mat_exp(a: np.ndarray, s: complex = 1.0) -> np.ndarray:
    """exp(s*A) for dense complex A of dimension 2 or 4.

    2x2 inputs use the exact Cayley-Hamilton closed form; larger ones use
    scipy's scaling-and-squaring Pade approximant.  A warning is attached
    when ||s*A|| exceeds the range where 1e-10 relative accuracy is
    guaranteed.
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidInput(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidInput("matrix entries must be finite")
    if not np.isfinite(s):
        raise InvalidInput("scalar factor must be finite")
    norm = np.abs(s) * np.linalg.norm(a, 2)
    if norm > EXP_GUARANTEED_NORM:
        warnings.warn(
            f"||s*A|| = {norm:.3g} exceeds the guaranteed range "
            f"{EXP_GUARANTEED_NORM}; result may lose accuracy",
            OverflowRiskWarning,
            stacklevel=2,
        )
    if a.shape[0] == 2:
        return expm2_scaled(a, complex(s))
    return scipy.linalg.expm(complex(s) * a)


def eig_herm(h: np.ndarray, tol: float = HERM_TOL) -> EigenDecomposition:
    """Eigendecomposition of a Hermitian matrix, ascending eigenvalues."""
    h = np.asarray(h, dtype=complex)
    res = herm_residual(h)
    if res > tol:
        raise NotHermitian(f"hermiticity residual {res:.3e} exceeds {tol:.3e}")
    values, vectors = np.linalg.eigh(h)
    return EigenDecomposition(values=values, vectors=vectors)


def min_eigenvalue(h: np.ndarray, tol: float = HERM_TOL) -> float:
    """Smallest eigenvalue of a Hermitian matrix."""
    return float(eig_herm(h, tol=tol).values[0])


def herm_sqrt(p: np.ndarray, clamp: float = PSD_CLAMP) -> np.ndarray:
    """Hermitian PSD square root of a Hermitian PSD matrix.

    Eigenvalues in [-clamp, 0) are treated as rounding noise and clamped
    to zero; anything more negative raises NotPositive.
    """
    dec = eig_herm(p)
    w = dec.values.copy()
    if w[0] < -clamp:
        raise NotPositive(f"eigenvalue {w[0]:.3e} below -{clamp:.0e}")
    w[w < 0.0] = 0.0
    v = dec.vectors
    s = (v * np.sqrt(w)) @ v.conj().T
    return 0.5 * (s + s.conj().T)


def is_psd(p: np.ndarray, tol: float = HERM_TOL) -> bool:
    """True iff the (symmetrized) matrix has no eigenvalue below -tol."""
    p = np.asarray(p, dtype=complex)
    if herm_residual(p) > tol:
        warnings.warn(
            "input symmetrized before positivity test",
            SymmetrizedInputWarning,
            stacklevel=2,
        )
        p = 0.5 * (p + p.conj().T)
    return min_eigenvalue(0.5 * (p + p.conj().T)) >= -tol


def batched_eigh_sqrt(ps: np.ndarray, clamp: float = PSD_CLAMP) -> np.ndarray:
    """Hermitian square roots of a stack (..., n, n) of Hermitian PSD matrices."""
    w, v = np.linalg.eigh(ps)
    if float(w.min()) < -clamp:
        raise NotPositive(f"eigenvalue {w.min():.3e} below -{clamp:.0e}")
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)[..., None, :]) @ v.conj().swapaxes(-1, -2)


def batched_unitary_steps(h_stack: np.ndarray, dt: float) -> np.ndarray:
    """exp(-i*H*dt) for a stack (..., n, n) of Hermitian matrices."""
    w, v = np.linalg.eigh(h_stack)
    phase = np.exp(-1j * w * dt)
    return (v * phase[..., None, :]) @ v.conj().swapaxes(-1, -2)
