"""Composite Hilbert space for two qubits and one truncated bosonic mode.

The basis is the product |ij n> with qubit letters i, j in {e, g} (A first,
then B) and Fock index n. Qubit code: e -> 0, g -> 1, so sigma_z =
diag(+1, -1) assigns +1 to |e>. The flat index of |ij n> is
``(2*i + j)*d + n``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import dag, kron

__all__ = [
    "SIGMA_X",
    "SIGMA_Y",
    "SIGMA_Z",
    "SIGMA_PLUS",
    "SIGMA_MINUS",
    "SpaceLayout",
    "annihilation",
    "embed",
    "partial_trace",
    "partial_transpose_A",
    "realign",
    "product_state",
    "subradiant_state",
    "number_operator",
    "excitation_operator",
]

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
SIGMA_PLUS = np.array([[0, 1], [0, 0]], dtype=complex)   # |e><g|
SIGMA_MINUS = np.array([[0, 0], [1, 0]], dtype=complex)  # |g><e|

_QUBIT_CODE = {"e": 0, "g": 1}
_SLOTS = ("A", "B", "F")


@dataclass(frozen=True)
class SpaceLayout:
    """Dimensions and index bookkeeping of the 2 x 2 x d product space."""

    fock_dim: int

    def __post_init__(self):
        if self.fock_dim < 2:
            raise ValueError(f"fock_dim must be >= 2, got {self.fock_dim}")

    @property
    def total_dim(self) -> int:
        return 4 * self.fock_dim

    @property
    def dims(self) -> tuple[int, int, int]:
        return (2, 2, self.fock_dim)

    def index(self, a: str, b: str, n: int) -> int:
        """Flat index of the basis state |ab n>."""
        if a not in _QUBIT_CODE or b not in _QUBIT_CODE:
            raise ValueError(f"qubit letters must be 'e' or 'g', got {a!r}, {b!r}")
        if not 0 <= n < self.fock_dim:
            raise ValueError(f"Fock index {n} outside 0..{self.fock_dim - 1}")
        return (2 * _QUBIT_CODE[a] + _QUBIT_CODE[b]) * self.fock_dim + n


def annihilation(d: int) -> np.ndarray:
    """Bosonic annihilation operator on a d-level Fock space."""
    if d < 2:
        raise ValueError(f"Fock dimension must be >= 2, got {d}")
    return np.diag(np.sqrt(np.arange(1, d, dtype=float)), k=1).astype(complex)


def embed(op, slot: str, layout: SpaceLayout) -> np.ndarray:
    """Lift a single-subsystem operator to the full space (identity elsewhere)."""
    op = np.asarray(op, dtype=complex)
    if slot not in _SLOTS:
        raise ValueError(f"slot must be one of {_SLOTS}, got {slot!r}")
    d = layout.fock_dim
    want = d if slot == "F" else 2
    if op.shape != (want, want):
        raise ValueError(f"operator for slot {slot} must be {want}x{want}, got {op.shape}")
    eye2 = np.eye(2, dtype=complex)
    eyef = np.eye(d, dtype=complex)
    if slot == "A":
        return kron(kron(op, eye2), eyef)
    if slot == "B":
        return kron(kron(eye2, op), eyef)
    return kron(kron(eye2, eye2), op)


def _factor_axes(keep) -> tuple[int, ...]:
    axes = tuple(sorted(_SLOTS.index(s) for s in keep))
    if not axes:
        raise ValueError("keep set must name at least one of A, B, F")
    if len(set(keep)) != len(tuple(keep)):
        raise ValueError(f"duplicate slots in keep set: {tuple(keep)}")
    return axes


def partial_trace(rho, keep, layout: SpaceLayout) -> np.ndarray:
    """Reduced density matrix on the kept factors, in A-before-B-before-F order.

    ``keep`` is any nonempty subset of {"A", "B", "F"}.
    """
    rho = np.asarray(rho, dtype=complex)
    n = layout.total_dim
    if rho.shape != (n, n):
        raise ValueError(f"state must be {n}x{n} for this layout, got {rho.shape}")
    axes = _factor_axes(keep)
    dims = layout.dims
    r = rho.reshape(*dims, *dims)
    letters = "abc"
    uppers = "ijk"
    row = "".join(letters[i] for i in range(3))
    col = "".join(uppers[i] if i in axes else letters[i] for i in range(3))
    out = "".join(letters[i] for i in axes) + "".join(uppers[i] for i in axes)
    reduced = np.einsum(f"{row}{col}->{out}", r)
    dk = int(np.prod([dims[i] for i in axes]))
    return reduced.reshape(dk, dk)


def _check_qubit_qudit(rho, d: int) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2 * d, 2 * d):
        raise ValueError(f"expected a {2 * d}x{2 * d} qubit-qudit state, got {rho.shape}")
    return rho


def partial_transpose_A(rho_af, d: int) -> np.ndarray:
    """Partial transpose on the qubit factor of a 2 x d state."""
    rho_af = _check_qubit_qudit(rho_af, d)
    r = rho_af.reshape(2, d, 2, d)
    return r.transpose(2, 1, 0, 3).reshape(2 * d, 2 * d)


def realign(rho_af, d: int) -> np.ndarray:
    """Realignment map: R[(i,j),(m,n)] = rho[(i,m),(j,n)], shape 4 x d^2."""
    rho_af = _check_qubit_qudit(rho_af, d)
    r = rho_af.reshape(2, d, 2, d)
    return r.transpose(0, 2, 1, 3).reshape(4, d * d)


def product_state(layout: SpaceLayout, qubits: str, n: int = 0) -> np.ndarray:
    """State vector |ab n> for a two-letter qubit word like "ge"."""
    if len(qubits) != 2:
        raise ValueError(f"need two qubit letters, got {qubits!r}")
    psi = np.zeros(layout.total_dim, dtype=complex)
    psi[layout.index(qubits[0], qubits[1], n)] = 1.0
    return psi


def subradiant_state(layout: SpaceLayout, n: int = 0) -> np.ndarray:
    """|Phi-, n> = (|eg n> - |ge n>)/sqrt(2), dark under exchange-symmetric coupling."""
    psi = (product_state(layout, "eg", n) - product_state(layout, "ge", n)) / np.sqrt(2)
    return psi


def number_operator(layout: SpaceLayout) -> np.ndarray:
    """Photon number a^dag a on the full space."""
    a = annihilation(layout.fock_dim)
    return embed(dag(a) @ a, "F", layout)


def excitation_operator(layout: SpaceLayout) -> np.ndarray:
    """Total excitation a^dag a + |e><e|_A + |e><e|_B."""
    ee = np.diag([1.0, 0.0]).astype(complex)
    return number_operator(layout) + embed(ee, "A", layout) + embed(ee, "B", layout)
