"""Dense complex-matrix kernel: products, spectra, norms and entropies.

Everything in here operates on plain ``numpy`` arrays of ``complex128`` and
is pure; the heavy lifting (Hermitian eigenproblems) is delegated to LAPACK
through ``numpy.linalg``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "NumericPolicy",
    "DEFAULT_POLICY",
    "EigenDecomposition",
    "NonHermitianError",
    "PositivityError",
    "kron",
    "dag",
    "hermitian_eig",
    "trace_norm",
    "trace_distance",
    "von_neumann_entropy",
    "expectation",
    "purity",
    "assert_density_matrix",
]


@dataclass(frozen=True)
class NumericPolicy:
    """Central record of the numerical tolerances used across the package.

    Tests construct tightened instances and pass them explicitly; library
    defaults live in ``DEFAULT_POLICY``.
    """

    hermiticity_atol: float = 1e-10       # accepted asymmetry per entry in eigensolver input
    density_herm_atol: float = 1e-8       # accepted asymmetry for density matrices
    density_trace_atol: float = 1e-6      # accepted |tr(rho) - 1|
    density_eig_floor: float = -1e-6      # most negative tolerated density eigenvalue
    entropy_eig_floor: float = -1e-8      # most negative tolerated eigenvalue in entropies
    positivity_abort: float = -1e-4       # integrator aborts below this eigenvalue
    rate_floor_scale: float = 1e-12       # dressed channels below kappa*this are dropped
    freq_merge_scale: float = 1e-4        # transition gaps within omega_f*this merge
    steady_tol: float = 1e-7              # relative Liouvillian residual for steady states
    fock_tol: float = 1e-4                # Fock-truncation convergence threshold
    fock_cap: int = 40                    # hard ceiling on the Fock dimension
    discord_grid: int = 64                # measurement-angle grid per axis
    discord_ftol: float = 1e-8            # simplex refinement tolerance on the objective


DEFAULT_POLICY = NumericPolicy()


class NonHermitianError(ValueError):
    """Raised when an operation requires a Hermitian matrix and gets none."""

    def __init__(self, max_asymmetry: float):
        self.max_asymmetry = float(max_asymmetry)
        super().__init__(
            f"matrix is not Hermitian (max |M - M^dag| entry = {self.max_asymmetry:.3e})"
        )


class PositivityError(ValueError):
    """Raised when a supposedly positive-semidefinite matrix is not."""


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenpairs of a Hermitian matrix, eigenvalues ascending.

    ``vectors[:, j]`` is the normalized eigenvector of ``values[j]``; the
    column matrix is unitary.
    """

    values: np.ndarray
    vectors: np.ndarray


def _as_matrix(m) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {m.shape}")
    return m


def dag(m: np.ndarray) -> np.ndarray:
    """Adjoint (conjugate transpose)."""
    return np.asarray(m).conj().T


def kron(a, b) -> np.ndarray:
    """Kronecker product with complex dtype."""
    return np.kron(_as_matrix(a), _as_matrix(b))


def _fix_phases(vectors: np.ndarray) -> np.ndarray:
    """Rotate each column so its largest-magnitude entry is real positive.

    Makes eigenbases reproducible; physical results never depend on the
    choice.
    """
    idx = np.argmax(np.abs(vectors), axis=0)
    lead = vectors[idx, np.arange(vectors.shape[1])]
    phase = np.where(np.abs(lead) > 0, lead / np.where(np.abs(lead) > 0, np.abs(lead), 1.0), 1.0)
    return vectors / phase[None, :]


def hermitian_eig(m, atol: float | None = None) -> EigenDecomposition:
    """Full eigendecomposition of a Hermitian matrix, eigenvalues ascending.

    Raises :class:`NonHermitianError` when the input asymmetry exceeds
    ``atol`` (default ``DEFAULT_POLICY.hermiticity_atol``) per entry.
    """
    m = _as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if atol is None:
        atol = DEFAULT_POLICY.hermiticity_atol
    asym = np.abs(m - dag(m)).max() if m.size else 0.0
    if asym > atol:
        raise NonHermitianError(asym)
    values, vectors = np.linalg.eigh((m + dag(m)) / 2)
    return EigenDecomposition(values=values, vectors=_fix_phases(vectors))


def trace_norm(m) -> float:
    """Sum of singular values, computed through the Gram matrix.

    Accepts rectangular input (the realigned matrix of a qubit-qudit state
    is 4 x d^2); the singular values are the square roots of the eigenvalues
    of G G^dag.
    """
    m = _as_matrix(m)
    gram = m @ dag(m) if m.shape[0] <= m.shape[1] else dag(m) @ m
    vals = np.clip(np.linalg.eigvalsh(gram), 0.0, None)
    if vals.size:
        # eigenvalues below solver resolution would contribute sqrt(noise)
        vals[vals < 1e-14 * vals.max()] = 0.0
    return float(np.sqrt(vals).sum())


def trace_distance(a, b) -> float:
    """Trace distance ||a - b||_1 / 2 between two density matrices."""
    return 0.5 * trace_norm(_as_matrix(a) - _as_matrix(b))


def assert_density_matrix(rho, policy: NumericPolicy = DEFAULT_POLICY) -> np.ndarray:
    """Validate Hermiticity, unit trace and positivity of a state."""
    rho = _as_matrix(rho)
    if rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density matrix must be square, got shape {rho.shape}")
    asym = np.abs(rho - dag(rho)).max()
    if asym > policy.density_herm_atol:
        raise NonHermitianError(asym)
    tr = np.trace(rho).real
    if abs(tr - 1.0) > policy.density_trace_atol:
        raise ValueError(f"density matrix trace is {tr:.9f}, expected 1")
    wmin = float(np.linalg.eigvalsh((rho + dag(rho)) / 2).min())
    if wmin < policy.density_eig_floor:
        raise PositivityError(f"density matrix has eigenvalue {wmin:.3e}")
    return rho


def von_neumann_entropy(rho, policy: NumericPolicy = DEFAULT_POLICY) -> float:
    """S(rho) = -sum(p log2 p) over the spectrum, with 0 log 0 := 0."""
    rho = assert_density_matrix(rho, policy)
    vals = np.linalg.eigvalsh((rho + dag(rho)) / 2)
    if vals.min() < policy.entropy_eig_floor:
        raise PositivityError(f"eigenvalue {vals.min():.3e} below entropy floor")
    vals = np.clip(vals, 0.0, None)
    vals = vals[vals > 0.0]
    return float(-(vals * np.log2(vals)).sum())


def expectation(rho, op) -> float:
    """Re tr(rho op) for a Hermitian observable."""
    return float(np.trace(_as_matrix(rho) @ _as_matrix(op)).real)


def purity(rho) -> float:
    """tr(rho^2)."""
    rho = _as_matrix(rho)
    return float(np.trace(rho @ rho).real)
