"""The four sensor Hamiltonians with their analytic reference formulas.

Each model maps an estimand theta to a 2x2 generator.  Analytic evolved
states are stored with numerically computed normalization; the published
closed-form normalization constants are dimensionally inconsistent and
kept as documentation strings only.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParam

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


@dataclass(frozen=True)
class HamiltonianModel:
    """Named, parameterized generator mapping theta to a 2x2 matrix."""

    name: str
    params: dict = field(default_factory=dict)

    def hamiltonian(self, theta: float) -> np.ndarray:
        raise NotImplementedError

    @property
    def zeta(self) -> np.ndarray | None:
        """Hermitian positive metric with zeta H^dag = H zeta, if one is attached."""
        return None

    def delta_e(self, theta: float) -> complex:
        """Eigenvalue gap; complex past an exceptional point."""
        evals = np.linalg.eigvals(self.hamiltonian(theta))
        return complex(evals.max() - evals.min())

    def analytic_state(self, theta: float, t: float) -> np.ndarray | None:
        """Unnormalized closed-form evolved state from |0>, when known."""
        return None

    def analytic_qfi(self, theta: float, t: float) -> float | None:
        return None


@dataclass(frozen=True)
class PseudoHermitianModel(HamiltonianModel):
    lam: float = 0.5

    def hamiltonian(self, theta: float) -> np.ndarray:
        return theta * np.array(
            [[0.0, 1.0 / self.lam], [self.lam, 0.0]], dtype=complex
        )

    @property
    def zeta(self) -> np.ndarray:
        return np.diag([1.0, self.lam**-2]).astype(complex)

    def delta_e(self, theta: float) -> complex:
        return complex(2.0 * abs(theta))

    def analytic_state(self, theta: float, t: float) -> np.ndarray:
        return np.array(
            [np.cos(theta * t), -1j * self.lam * np.sin(theta * t)], dtype=complex
        )

    def analytic_qfi(self, theta: float, t: float) -> float:
        c2 = np.cos(theta * t) ** 2 + self.lam**2 * np.sin(theta * t) ** 2
        return 4.0 * self.lam**2 * t**2 / c2**2

    def analytic_p_d(self, theta: float, t: float) -> float:
        """Exact post-selection probability from the unitary dilation oracle."""
        return float(
            np.cos(theta * t) ** 2 + self.lam**2 * np.sin(theta * t) ** 2
        )

    def printed_p_d(self, theta: float, t: float) -> float:
        """The published closed form; disagrees with the exact oracle at
        second order in (1 - lam^2) sin^2 and is recorded for comparison only."""
        return float(1.0 / ((1.0 - self.lam**2) * np.sin(theta * t) ** 2 + 1.0))


@dataclass(frozen=True)
class EpGyroModel(HamiltonianModel):
    """Ring-laser gyroscope; theta is the cw/ccw frequency difference."""

    omega_ep: float = 1.0
    omega_ccw: float = 1.0

    def hamiltonian(self, theta: float) -> np.ndarray:
        omega_cw = self.omega_ccw + theta
        return np.array(
            [
                [omega_cw, 0.5j * self.omega_ep],
                [0.5j * self.omega_ep, self.omega_ccw],
            ],
            dtype=complex,
        )

    def delta_e(self, theta: float) -> complex:
        return complex(np.sqrt(complex(theta**2 - self.omega_ep**2)))


@dataclass(frozen=True)
class PtSymmetricModel(HamiltonianModel):
    """Two-level PT-symmetric sensor; exceptional points at theta = +-r sin(phi)."""

    r: float = float(np.sqrt(2.0))
    phi: float = float(np.pi / 4.0)

    def hamiltonian(self, theta: float) -> np.ndarray:
        d = self.r * np.exp(1j * self.phi)
        return np.array([[d, theta], [theta, np.conj(d)]], dtype=complex)

    def delta_e(self, theta: float) -> complex:
        gap2 = complex(theta**2 - (self.r * np.sin(self.phi)) ** 2)
        return complex(2.0 * np.sqrt(gap2))

    @property
    def theta_ep(self) -> float:
        return abs(self.r * np.sin(self.phi))


@dataclass(frozen=True)
class LossLossModel(HamiltonianModel):
    """Loss-loss sensor; gauge-equivalent to a gain-loss system up to a
    theta-independent global decay exp(-k t) with k the mean loss."""

    v: float = 1.0
    g: float = 1.0
    k_h: float = 0.2
    k_v: float = 1.0

    def __post_init__(self):
        if self.k_h < 0 or self.k_v < 0:
            raise InvalidParam("loss rates must be non-negative")

    @property
    def delta_k(self) -> float:
        return 0.5 * (self.k_v - self.k_h)

    @property
    def mean_k(self) -> float:
        # The published decomposition prints k identical to delta_k; only
        # the mean loss makes H_LL = H_GL - i k I an identity.
        return 0.5 * (self.k_v + self.k_h)

    def hamiltonian(self, theta: float) -> np.ndarray:
        return np.array(
            [
                [self.v - 1j * self.k_h, 1j * self.g * theta],
                [-1j * self.g * theta, self.v - 1j * self.k_v],
            ],
            dtype=complex,
        )

    def gain_loss_hamiltonian(self, theta: float) -> np.ndarray:
        """H_GL = H_LL + i k I; traceless loss part, EPs at g theta = +-delta_k."""
        return self.hamiltonian(theta) + 1j * self.mean_k * np.eye(2)

    def delta_e(self, theta: float) -> complex:
        return complex(
            2.0 * np.sqrt(complex((self.g * theta) ** 2 - self.delta_k**2))
        )

    @property
    def theta_ep(self) -> float:
        return abs(self.delta_k / self.g)


def pseudo_hermitian_model(lam: float = 0.5) -> PseudoHermitianModel:
    if not 0.0 < lam <= 1.0:
        raise InvalidParam(f"lambda must lie in (0, 1], got {lam}")
    return PseudoHermitianModel(name="pseudo_hermitian", params={"lambda": lam}, lam=lam)


def ep_gyro_model(omega_ep: float = 1.0, omega_ccw: float = 1.0) -> EpGyroModel:
    if omega_ep <= 0:
        raise InvalidParam("omega_ep must be positive")
    return EpGyroModel(
        name="ep_gyro",
        params={"omega_ep": omega_ep, "omega_ccw": omega_ccw},
        omega_ep=omega_ep,
        omega_ccw=omega_ccw,
    )


def pt_symmetric_model(
    r: float = float(np.sqrt(2.0)), phi: float = float(np.pi / 4.0)
) -> PtSymmetricModel:
    if r <= 0:
        raise InvalidParam("r must be positive")
    return PtSymmetricModel(
        name="pt_symmetric", params={"r": r, "phi": phi}, r=r, phi=phi
    )


def loss_loss_model(
    v: float = 1.0, g: float = 1.0, k_h: float = 0.2, k_v: float = 1.0
) -> LossLossModel:
    return LossLossModel(
        name="loss_loss",
        params={"v": v, "g": g, "k_h": k_h, "k_v": k_v},
        v=v,
        g=g,
        k_h=k_h,
        k_v=k_v,
    )


MODEL_FACTORIES = {
    "pseudo_hermitian": pseudo_hermitian_model,
    "ep_gyro": ep_gyro_model,
    "pt_symmetric": pt_symmetric_model,
    "loss_loss": loss_loss_model,
}


def make_model(name: str, **params) -> HamiltonianModel:
    """Build a registered model by name; unknown keys raise InvalidParam."""
    try:
        factory = MODEL_FACTORIES[name]
    except KeyError:
        raise InvalidParam(
            f"unknown model {name!r}; choices: {sorted(MODEL_FACTORIES)}"
        ) from None
    try:
        return factory(**params)
    except TypeError as exc:
        raise InvalidParam(str(exc)) from None
