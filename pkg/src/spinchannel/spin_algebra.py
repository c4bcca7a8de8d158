"""Dense one- and two-qubit operator algebra.

Operators are plain complex ndarrays (2x2 for a single site, 4x4 for the
pair); states are length-4 complex vectors over the computational basis
{|00>, |01>, |10>, |11>} with site 1 as the left tensor factor and the
convention sigma_z |0> = +|0>.  hbar = 1 throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "pauli",
    "sz_nv",
    "embed",
    "expectation",
    "expm_hermitian",
    "commutator",
    "SpinParams",
    "basis_state",
    "bell_phi_minus",
    "BASIS_LABELS",
]

BASIS_LABELS = ("00", "01", "10", "11")

_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
    "plus": np.array([[0, 1], [0, 0]], dtype=complex),
    "minus": np.array([[0, 0], [1, 0]], dtype=complex),
}

_I2 = np.eye(2, dtype=complex)


def pauli(axis: str) -> np.ndarray:
    """Single-qubit Pauli matrix.

    ``axis`` is one of ``x``, ``y``, ``z``, ``plus``, ``minus`` with
    sigma^+- = (sigma_x +- i sigma_y)/2, i.e. sigma^+|1> = |0>.
    """
    try:
        return _PAULI[axis].copy()
    except KeyError:
        raise ValueError(f"unknown Pauli axis {axis!r}; expected one of {sorted(_PAULI)}") from None


def sz_nv(alpha: float) -> np.ndarray:
    """Spin operator of a driven NV center in its dressed eigenbasis.

    Returns (cos(alpha) sigma_z + sin(alpha) sigma_x) / 2, where alpha is the
    mixing angle set by the Rabi frequency and detuning (tan(alpha) =
    -omega_R/delta).  Hermitian with eigenvalues +-1/2 for every alpha.
    """
    return 0.5 * (math.cos(alpha) * _PAULI["z"] + math.sin(alpha) * _PAULI["x"])


def embed(op: np.ndarray, site: int) -> np.ndarray:
    """Embed a 2x2 operator on one site of the two-qubit space.

    Site 1 is the left tensor factor (op x I), site 2 the right (I x op).
    """
    op = np.asarray(op, dtype=complex)
    if op.shape != (2, 2):
        raise ValueError(f"expected a 2x2 operator, got shape {op.shape}")
    if site == 1:
        return np.kron(op, _I2)
    if site == 2:
        return np.kron(_I2, op)
    raise ValueError(f"site must be 1 or 2, got {site!r}")


def expectation(state: np.ndarray, op: np.ndarray) -> complex:
    """<psi|op|psi> for a length-4 state vector."""
    state = np.asarray(state, dtype=complex)
    return complex(np.vdot(state, op @ state))


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def expm_hermitian(h: np.ndarray, t: float, hermiticity_tol: float = 1e-10) -> np.ndarray:
    """exp(-i h t) for Hermitian h via spectral decomposition.

    Exact (to rounding) at any t, unlike truncated series.  Rejects input
    whose anti-Hermitian part exceeds ``hermiticity_tol``.
    """
    h = np.asarray(h, dtype=complex)
    defect = np.abs(h - h.conj().T).max()
    if defect > hermiticity_tol:
        raise ValueError(f"matrix is not Hermitian (defect {defect:.3e} > {hermiticity_tol:.1e})")
    energies, vectors = np.linalg.eigh(h)
    phases = np.exp(-1j * energies * t)
    return (vectors * phases) @ vectors.conj().T


@dataclass(frozen=True)
class SpinParams:
    """Parameters of the two identical NV spins.

    omega0 -- level splitting (hbar = 1), omega0 = sqrt(omega_R^2 + delta^2)
    when built from a Rabi frequency and detuning.
    g      -- spin-oscillator coupling strength.
    alpha  -- mixing angle of the dressed basis, tan(alpha) = -omega_R/delta.
    """

    omega0: float
    g: float
    alpha: float
    omega_R: float | None = field(default=None)
    delta: float | None = field(default=None)

    def __post_init__(self):
        if self.omega0 < 0:
            raise ValueError(f"omega0 must be non-negative, got {self.omega0}")

    @classmethod
    def from_rabi(cls, omega_R: float, delta: float, g: float) -> "SpinParams":
        """Derive omega0 and alpha from the Rabi frequency and detuning."""
        omega0 = math.hypot(omega_R, delta)
        alpha = math.atan2(-omega_R, delta)
        return cls(omega0=omega0, g=g, alpha=alpha, omega_R=omega_R, delta=delta)

    def site_operator(self) -> np.ndarray:
        """The 2x2 dressed spin operator entering the coupling, sz_nv(alpha)."""
        return sz_nv(self.alpha)


def basis_state(label: str) -> np.ndarray:
    """Computational basis state |ab> as a length-4 vector."""
    try:
        idx = BASIS_LABELS.index(label)
    except ValueError:
        raise ValueError(f"unknown basis label {label!r}; expected one of {BASIS_LABELS}") from None
    state = np.zeros(4, dtype=complex)
    state[idx] = 1.0
    return state


def bell_phi_minus() -> np.ndarray:
    """The singlet-like Bell state (|01> - |10>)/sqrt(2)."""
    return np.array([0, 1, -1, 0], dtype=complex) / math.sqrt(2.0)
