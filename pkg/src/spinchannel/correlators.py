"""Out-of-time-ordered and time-ordered correlators of two-qubit operators.

All routines take an accumulated propagator U (the full evolution operator
from the initial time), the initial state, and a pair of unitary probe
operators W, V.  Heisenberg picture: W(t) = U^dag W U.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["CorrelatorRecord", "otoc_product", "otoc_commutator", "two_point"]

UNITARITY_TOL = 1e-8


@dataclass(frozen=True)
class CorrelatorRecord:
    """One correlator sample: out-of-time-order product F, OTOC C = 1 - Re F,
    and the two-point time-ordered correlator G2."""

    t: float
    F: complex
    C: float
    G2: complex


def _check_unitary(m: np.ndarray, name: str, tol: float = UNITARITY_TOL) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    defect = np.abs(m.conj().T @ m - np.eye(m.shape[0])).max()
    if defect > tol:
        raise ValueError(f"{name} is not unitary (defect {defect:.3e} > {tol:.1e})")
    return m


def _check_state(psi: np.ndarray, tol: float = UNITARITY_TOL) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    drift = abs(np.linalg.norm(psi) - 1.0)
    if drift > tol:
        raise ValueError(f"state is not normalized (|norm-1| = {drift:.3e})")
    return psi


def otoc_product(U: np.ndarray, psi0: np.ndarray, W: np.ndarray, V: np.ndarray,
                 t: float = 0.0) -> CorrelatorRecord:
    """OTOC from the out-of-time-order product form.

    F = <psi0| U^dag W^dag U V^dag U^dag W U V |psi0>,  C = 1 - Re F.
    For unitary W, V this equals the commutator form (see otoc_commutator).
    Also evaluates the two-point correlator G2 = <psi0| U^dag W U V |psi0>.
    """
    U = _check_unitary(U, "U")
    psi0 = _check_state(psi0)
    W = _check_unitary(W, "W")
    V = _check_unitary(V, "V")
    Wt = U.conj().T @ W @ U
    v_psi = V @ psi0
    F = complex(np.vdot(psi0, Wt.conj().T @ (V.conj().T @ (Wt @ v_psi))))
    G2 = complex(np.vdot(psi0, Wt @ v_psi))
    return CorrelatorRecord(t=t, F=F, C=1.0 - F.real, G2=G2)


def otoc_commutator(U: np.ndarray, psi0: np.ndarray, W: np.ndarray, V: np.ndarray) -> float:
    """OTOC from the commutator form, (1/2) <psi0| [W(t),V]^dag [W(t),V] |psi0>."""
    U = _check_unitary(U, "U")
    psi0 = _check_state(psi0)
    W = _check_unitary(W, "W")
    V = _check_unitary(V, "V")
    Wt = U.conj().T @ W @ U
    comm_psi = (Wt @ (V @ psi0)) - (V @ (Wt @ psi0))
    return 0.5 * float(np.vdot(comm_psi, comm_psi).real)


def two_point(U: np.ndarray, psi0: np.ndarray, W: np.ndarray, V: np.ndarray) -> complex:
    """Time-ordered two-point correlator <psi0| W(t) V |psi0>."""
    U = _check_unitary(U, "U")
    psi0 = _check_state(psi0)
    Wt = U.conj().T @ np.asarray(W, dtype=complex) @ U
    return complex(np.vdot(psi0, Wt @ (np.asarray(V, dtype=complex) @ psi0)))
