"""Matrix kernel: products, eigenproblems, norms, entropies."""

import numpy as np
import pytest

from uscqed.linalg import (
    NonHermitianError,
    PositivityError,
    hermitian_eig,
    kron,
    trace_distance,
    trace_norm,
    von_neumann_entropy,
)
from uscqed.hilbert import SIGMA_X, SIGMA_Z

from conftest import random_hermitian, random_unitary, random_density


class TestKron:
    def test_identity(self):
        assert np.array_equal(kron(np.eye(2), np.eye(2)), np.eye(4))

    def test_sigma_z_identity(self):
        assert np.array_equal(kron(SIGMA_Z, np.eye(2)), np.diag([1.0, 1.0, -1.0, -1.0]))

    def test_double_bit_flip(self):
        v = np.array([1, 0, 0, 0], dtype=complex)
        assert np.array_equal(kron(SIGMA_X, SIGMA_X) @ v, np.array([0, 0, 0, 1]))

    def test_associativity_exact(self, rng):
        # Gaussian-integer entries keep every product exact in float64,
        # so both groupings must agree bitwise
        def gauss_int(shape):
            return rng.integers(-8, 9, size=shape) + 1j * rng.integers(-8, 9, size=shape)

        for _ in range(10):
            a, b, c = gauss_int((2, 3)), gauss_int((3, 2)), gauss_int((2, 2))
            assert np.array_equal(kron(kron(a, b), c), kron(a, kron(b, c)))


class TestHermitianEig:
    def test_pauli_x(self):
        eig = hermitian_eig(SIGMA_X)
        assert np.allclose(eig.values, [-1.0, 1.0])

    def test_identity(self):
        eig = hermitian_eig(np.eye(5))
        assert np.allclose(eig.values, np.ones(5))

    def test_two_by_two(self):
        # characteristic polynomial: x^2 - 5x + 4 = 0 -> eigenvalues 1 and 4
        m = np.array([[2, 1 + 1j], [1 - 1j, 3]])
        eig = hermitian_eig(m)
        assert np.allclose(eig.values, [1.0, 4.0], atol=1e-12)

    def test_rejects_non_hermitian(self):
        with pytest.raises(NonHermitianError) as err:
            hermitian_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))
        assert err.value.max_asymmetry == pytest.approx(1.0)

    @pytest.mark.parametrize("n", [2, 5, 9, 16])
    def test_reconstruction_and_order(self, rng, n):
        for _ in range(5):
            m = random_hermitian(rng, n)
            eig = hermitian_eig(m)
            assert np.all(np.diff(eig.values) >= 0)
            rebuilt = (eig.vectors * eig.values) @ eig.vectors.conj().T
            assert np.linalg.norm(rebuilt - m) <= 1e-9 * np.linalg.norm(m)
            gram = eig.vectors.conj().T @ eig.vectors
            assert np.abs(gram - np.eye(n)).max() <= 1e-10

    def test_eigenpair_residual(self, rng):
        m = random_hermitian(rng, 12)
        eig = hermitian_eig(m)
        scale = np.linalg.norm(m)
        for j in range(12):
            res = np.linalg.norm(m @ eig.vectors[:, j] - eig.values[j] * eig.vectors[:, j])
            assert res <= 1e-10 * scale


class TestTraceNorm:
    def test_identity(self):
        assert trace_norm(np.eye(2)) == pytest.approx(2.0)

    def test_hermitian_diagonal(self):
        assert trace_norm(np.diag([3.0, -4.0])) == pytest.approx(7.0)

    def test_nilpotent(self):
        # G G^dag = diag(4, 0), so the only singular value is 2
        assert trace_norm(np.array([[0.0, 2.0], [0.0, 0.0]])) == pytest.approx(2.0)

    def test_rectangular(self, rng):
        m = rng.normal(size=(3, 7)) + 1j * rng.normal(size=(3, 7))
        assert trace_norm(m) == pytest.approx(np.linalg.svd(m, compute_uv=False).sum())

    def test_unitary_invariance(self, rng):
        for n in (3, 6):
            m = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
            u, w = random_unitary(rng, n), random_unitary(rng, n)
            assert abs(trace_norm(u @ m @ w) - trace_norm(m)) <= 1e-8


class TestEntropy:
    def test_pure_state(self, rng):
        psi = rng.normal(size=4) + 1j * rng.normal(size=4)
        psi /= np.linalg.norm(psi)
        assert von_neumann_entropy(np.outer(psi, psi.conj())) == pytest.approx(0.0, abs=1e-10)

    def test_maximally_mixed_qubit(self):
        assert von_neumann_entropy(np.eye(2) / 2) == pytest.approx(1.0)

    def test_unequal_mixture(self):
        expected = -(0.75 * np.log2(0.75) + 0.25 * np.log2(0.25))
        assert von_neumann_entropy(np.diag([0.75, 0.25])) == pytest.approx(expected)
        assert expected == pytest.approx(0.811278, abs=1e-6)

    def test_basis_independence(self, rng):
        rho = random_density(rng, 6)
        u = random_unitary(rng, 6)
        s1 = von_neumann_entropy(rho)
        s2 = von_neumann_entropy(u @ rho @ u.conj().T)
        assert abs(s1 - s2) <= 1e-9

    def test_positivity_violation(self):
        bad = np.diag([1.0 + 1e-7, -1e-7])
        with pytest.raises(PositivityError):
            von_neumann_entropy(bad)

    def test_tiny_negative_clamped(self):
        rho = np.diag([1.0 + 1e-9, -1e-9])
        assert von_neumann_entropy(rho) == pytest.approx(0.0, abs=1e-6)


def test_trace_distance_pure_orthogonal():
    a = np.diag([1.0, 0.0]).astype(complex)
    b = np.diag([0.0, 1.0]).astype(complex)
    assert trace_distance(a, b) == pytest.approx(1.0)
