"""Composite-space construction: embeddings, reductions, rearrangements."""

import numpy as np
import pytest

from uscqed.hilbert import (
    SIGMA_X,
    SIGMA_Z,
    SpaceLayout,
    annihilation,
    embed,
    partial_trace,
    partial_transpose_A,
    product_state,
    realign,
    subradiant_state,
)
from uscqed.linalg import dag, kron, trace_norm

from conftest import bell_state, random_density


def rwa_asymptote(layout, b):
    """[(1-b)|gg><gg| + b|Phi-><Phi-|] (x) |0><0| on the given layout."""
    gg = product_state(layout, "gg", 0)
    dark = subradiant_state(layout)
    return (1 - b) * np.outer(gg, gg.conj()) + b * np.outer(dark, dark.conj())


class TestLayout:
    def test_index_is_bijection(self):
        layout = SpaceLayout(5)
        seen = {
            layout.index(a, b, n)
            for a in "eg"
            for b in "eg"
            for n in range(5)
        }
        assert seen == set(range(20))

    def test_qubit_code(self):
        # e -> 0, g -> 1: |ge 0> sits at (2*1 + 0)*d
        layout = SpaceLayout(5)
        assert layout.index("g", "e", 0) == 10
        assert layout.index("e", "e", 0) == 0
        assert layout.index("g", "g", 3) == 18

    def test_rejects_small_d(self):
        with pytest.raises(ValueError):
            SpaceLayout(1)


class TestAnnihilation:
    def test_two_levels(self):
        assert np.array_equal(annihilation(2), np.array([[0, 1], [0, 0]]))

    def test_matrix_element(self):
        assert annihilation(3)[1, 2] == pytest.approx(np.sqrt(2))

    def test_number_operator(self):
        a = annihilation(3)
        assert np.allclose(dag(a) @ a, np.diag([0.0, 1.0, 2.0]))

    def test_rejects_small_d(self):
        with pytest.raises(ValueError):
            annihilation(1)


class TestEmbed:
    def test_sigma_z_on_ground(self):
        layout = SpaceLayout(3)
        op = embed(SIGMA_Z, "A", layout)
        i = layout.index("g", "g", 0)
        assert op[i, i] == pytest.approx(-1.0)

    def test_disjoint_factors_commute(self):
        layout = SpaceLayout(3)
        za, zb = embed(SIGMA_Z, "A", layout), embed(SIGMA_Z, "B", layout)
        assert np.array_equal(za @ zb, zb @ za)

    def test_flip_and_create(self):
        layout = SpaceLayout(3)
        a = annihilation(3)
        op = embed(SIGMA_X, "A", layout) @ embed(a + dag(a), "F", layout)
        bra = product_state(layout, "gg", 1)
        ket = product_state(layout, "eg", 0)
        assert (bra.conj() @ op @ ket).real == pytest.approx(1.0)

    def test_dimension_mismatch(self):
        layout = SpaceLayout(3)
        with pytest.raises(ValueError):
            embed(np.eye(3), "A", layout)
        with pytest.raises(ValueError):
            embed(np.eye(2), "F", layout)


class TestPartialTrace:
    def test_bell_marginal(self):
        layout = SpaceLayout(2)
        bell = bell_state()
        vac = np.zeros((2, 2), dtype=complex)
        vac[0, 0] = 1.0
        rho = kron(np.outer(bell, bell.conj()), vac)
        reduced = partial_trace(rho, ("A", "F"), layout)
        assert np.allclose(reduced, kron(np.eye(2) / 2, vac), atol=1e-12)

    def test_product_state_factors(self, rng):
        layout = SpaceLayout(3)
        ra, rb, rf = random_density(rng, 2), random_density(rng, 2), random_density(rng, 3)
        rho = kron(kron(ra, rb), rf)
        assert np.allclose(partial_trace(rho, ("B",), layout), rb, atol=1e-12)
        assert np.allclose(partial_trace(rho, ("A", "F"), layout), kron(ra, rf), atol=1e-12)

    def test_asymptote_marginal(self):
        # tracing the atoms-field asymptote with b=1/2 over B:
        # (3/4)|g0><g0| + (1/4)|e0><e0|
        layout = SpaceLayout(3)
        rho = rwa_asymptote(layout, 0.5)
        reduced = partial_trace(rho, ("A", "F"), layout)
        expected = np.zeros((6, 6), dtype=complex)
        expected[3, 3] = 0.75  # |g 0>
        expected[0, 0] = 0.25  # |e 0>
        assert np.allclose(reduced, expected, atol=1e-12)

    def test_preserves_trace_and_hermiticity(self, rng):
        layout = SpaceLayout(4)
        for keep in (("A",), ("A", "B"), ("B", "F"), ("A", "B", "F")):
            rho = random_density(rng, layout.total_dim)
            red = partial_trace(rho, keep, layout)
            assert np.trace(red).real == pytest.approx(1.0, abs=1e-12)
            assert np.abs(red - dag(red)).max() <= 1e-12

    def test_composition(self, rng):
        layout = SpaceLayout(3)
        rho = random_density(rng, layout.total_dim)
        via_ab = partial_trace(rho, ("A", "B"), layout)
        # trace the remaining B factor by hand
        r = via_ab.reshape(2, 2, 2, 2)
        two_step = np.einsum("abcb->ac", r)
        direct = partial_trace(rho, ("A",), layout)
        assert np.abs(two_step - direct).max() <= 1e-12

    def test_empty_keep_rejected(self, rng):
        layout = SpaceLayout(2)
        with pytest.raises(ValueError):
            partial_trace(random_density(rng, 8), (), layout)


class TestPartialTranspose:
    def test_product_state(self, rng):
        ra, rf = random_density(rng, 2), random_density(rng, 4)
        assert np.allclose(
            partial_transpose_A(kron(ra, rf), 4), kron(ra.T, rf), atol=1e-14
        )

    def test_bell_negativity(self):
        rho = np.outer(bell_state(), bell_state().conj())
        vals = np.linalg.eigvalsh(partial_transpose_A(rho, 2))
        assert vals.min() == pytest.approx(-0.5, abs=1e-12)

    def test_involution(self, rng):
        rho = random_density(rng, 6)
        assert np.array_equal(partial_transpose_A(partial_transpose_A(rho, 3), 3), rho)

    def test_hermitian_real_spectrum(self, rng):
        rho = random_density(rng, 8)
        pt = partial_transpose_A(rho, 4)
        assert np.abs(pt - dag(pt)).max() <= 1e-12
        assert np.trace(pt).real == pytest.approx(1.0, abs=1e-12)

    def test_dimension_checked(self, rng):
        with pytest.raises(ValueError):
            partial_transpose_A(random_density(rng, 6), 4)


class TestRealign:
    def test_pure_product_norm_one(self, rng):
        for d in (2, 3):
            psi_a = rng.normal(size=2) + 1j * rng.normal(size=2)
            psi_a /= np.linalg.norm(psi_a)
            psi_f = rng.normal(size=d) + 1j * rng.normal(size=d)
            psi_f /= np.linalg.norm(psi_f)
            rho = kron(np.outer(psi_a, psi_a.conj()), np.outer(psi_f, psi_f.conj()))
            assert trace_norm(realign(rho, d)) == pytest.approx(1.0, abs=1e-10)

    def test_bell_norm_two(self):
        rho = np.outer(bell_state(), bell_state().conj())
        assert trace_norm(realign(rho, 2)) == pytest.approx(2.0, abs=1e-12)

    def test_separable_bounded(self, rng):
        # mixtures of products satisfy the realignment criterion
        for d in (2, 4):
            rho = np.zeros((2 * d, 2 * d), dtype=complex)
            weights = rng.dirichlet(np.ones(5))
            for w in weights:
                rho += w * kron(random_density(rng, 2), random_density(rng, d))
            assert trace_norm(realign(rho, d)) <= 1.0 + 1e-9

    def test_adjoint_consistency(self, rng):
        d = 3
        m = rng.normal(size=(2 * d, 2 * d)) + 1j * rng.normal(size=(2 * d, 2 * d))
        lhs = realign(dag(m), d).reshape(2, 2, d, d)
        rhs = realign(m, d).reshape(2, 2, d, d).transpose(1, 0, 3, 2).conj()
        assert np.abs(lhs - rhs).max() <= 1e-12

    def test_shape(self, rng):
        assert realign(random_density(rng, 8), 4).shape == (4, 16)
