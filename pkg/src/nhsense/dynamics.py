"""Schroedinger-picture time evolution and numerical parameter derivatives.

Unnormalized evolution is the primitive; normalization is always an
explicit separate step because post-selection bookkeeping needs the raw
norms.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DegenerateState, InvalidInput
from .linalg import mat_exp

FORWARD = "forward"
REVERSE = "reverse"

DEFAULT_STEPS_PER_UNIT_TIME = 2000
DEFAULT_FD_STEP = 1e-5


@dataclass(frozen=True)
class Propagator:
    matrix: np.ndarray
    ordering: str
    t_start: float
    t_end: float
    steps: int


def _hamiltonian_matrix(h, theta: float) -> np.ndarray:
    """Accept either a bare matrix or a model-like object with .hamiltonian()."""
    if hasattr(h, "hamiltonian"):
        return np.asarray(h.hamiltonian(theta), dtype=complex)
    return np.asarray(h, dtype=complex)


def evolve(h, theta: float, psi0: np.ndarray, t: float) -> np.ndarray:
    """e^{-i H(theta) t} psi0 for a time-independent generator.

    The result is unnormalized: a non-Hermitian H shrinks or grows the
    norm, and that norm is physical (it feeds the success probability).
    """
    if t < 0:
        raise InvalidInput("evolution time must be non-negative")
    mat = _hamiltonian_matrix(h, theta)
    psi0 = np.asarray(psi0, dtype=complex)
    return mat_exp(mat, -1j * t) @ psi0


def time_ordered_propagator(
    h_fn: Callable[[float], np.ndarray],
    t: float,
    steps: int,
    ordering: str = FORWARD,
) -> Propagator:
    """Midpoint-rule product propagator for a time-dependent generator.

    forward: T exp(-i int_0^t H dtau), later times leftmost.
    reverse: Tbar exp(+i int_0^t H dtau), later times rightmost; this is
    the adjoint of the forward propagator of H^dagger.
    Second-order accurate in the step size.
    """
    if steps < 1:
        raise InvalidInput("steps must be >= 1")
    if ordering not in (FORWARD, REVERSE):
        raise InvalidInput(f"unknown ordering {ordering!r}")
    dt = t / steps
    sign = -1j if ordering == FORWARD else 1j
    dim = np.asarray(h_fn(0.0)).shape[0]
    u = np.eye(dim, dtype=complex)
    for k in range(steps):
        tau = (k + 0.5) * dt
        step = mat_exp(np.asarray(h_fn(tau), dtype=complex), sign * dt)
        u = step @ u if ordering == FORWARD else u @ step
    return Propagator(matrix=u, ordering=ordering, t_start=0.0, t_end=t, steps=steps)


def normalize(psi: np.ndarray) -> tuple[np.ndarray, float]:
    """Return (unit-norm state, original norm)."""
    psi = np.asarray(psi, dtype=complex)
    norm = float(np.linalg.norm(psi))
    if norm <= 1e-300:
        raise DegenerateState("cannot normalize a (numerically) zero vector")
    return psi / norm, norm


def param_derivative(
    state_fn: Callable[[float], np.ndarray],
    theta: float,
    h: float | None = None,
) -> np.ndarray:
    """Central-difference d/dtheta of a deterministic state family.

    state_fn must be a plain matrix action (no eigensolver phase
    ambiguity), otherwise the difference quotient is meaningless.
    """
    if h is None:
        h = DEFAULT_FD_STEP * max(1.0, abs(theta))
    plus = np.asarray(state_fn(theta + h), dtype=complex)
    minus = np.asarray(state_fn(theta - h), dtype=complex)
    return (plus - minus) / (2.0 * h)
