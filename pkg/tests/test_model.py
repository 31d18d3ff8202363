"""Hamiltonians, dressed spectra, and the two dissipator constructions."""

import numpy as np
import pytest

from uscqed.hilbert import SpaceLayout, annihilation, embed, excitation_operator, product_state
from uscqed.linalg import dag, expectation
from uscqed.model import (
    DressedSpectrum,
    JumpChannel,
    RabiParams,
    dressed_spectrum,
    improved_channels,
    jc_hamiltonian,
    rabi_hamiltonian,
    standard_channel,
)
from uscqed.dynamics import liouvillian_apply
from uscqed.hilbert import number_operator

from conftest import random_density


def resonant(g, d, kappa=0.2):
    return RabiParams(1.0, 1.0, g, kappa, d)


class TestRabiParams:
    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(omega_a=0.0),
            dict(omega_f=-1.0),
            dict(g=-0.1),
            dict(kappa=-0.2),
            dict(d=1),
        ],
    )
    def test_invariants(self, kwargs):
        base = dict(omega_a=1.0, omega_f=1.0, g=0.5, kappa=0.2, d=4)
        with pytest.raises(ValueError):
            RabiParams(**{**base, **kwargs})


class TestHamiltonians:
    def test_bare_ground_energy(self):
        p = resonant(0.5, 3)
        h = rabi_hamiltonian(p)
        layout = p.layout
        i = layout.index("g", "g", 0)
        assert h[i, i].real == pytest.approx(-p.omega_a)

    def test_counter_rotating_element(self):
        p = resonant(0.37, 3)
        h = rabi_hamiltonian(p)
        layout = p.layout
        bra = product_state(layout, "gg", 1)
        ket = product_state(layout, "eg", 0)
        assert (bra.conj() @ h @ ket).real == pytest.approx(p.g)

    def test_decoupled_spectrum(self):
        p = resonant(0.0, 3)
        vals = np.linalg.eigvalsh(rabi_hamiltonian(p))
        expected = sorted(
            0.5 * p.omega_a * (sa + sb) + n * p.omega_f
            for sa in (-1, 1)
            for sb in (-1, 1)
            for n in range(3)
        )
        assert np.allclose(vals, expected, atol=1e-12)

    def test_jc_rotating_element(self):
        p = resonant(0.37, 3)
        h = jc_hamiltonian(p)
        layout = p.layout
        bra = product_state(layout, "eg", 0)
        ket = product_state(layout, "gg", 1)
        assert (bra.conj() @ h @ ket).real == pytest.approx(p.g)

    def test_jc_drops_counter_rotating(self):
        p = resonant(0.37, 3)
        layout = p.layout
        bra = product_state(layout, "gg", 0)
        ket = product_state(layout, "eg", 1)
        assert abs(bra.conj() @ jc_hamiltonian(p) @ ket) == 0.0
        assert (bra.conj() @ rabi_hamiltonian(p) @ ket).real == pytest.approx(p.g)

    def test_jc_conserves_excitation(self):
        p = resonant(0.41, 4)
        h = jc_hamiltonian(p)
        n_exc = excitation_operator(p.layout)
        assert np.abs(h @ n_exc - n_exc @ h).max() == 0.0

    def test_single_excitation_splitting(self):
        # the bright single-excitation state couples to |gg 1> with sqrt(2) g,
        # so the resonant block eigenvalues are 0 and +-sqrt(2) g
        p = resonant(0.23, 3)
        vals = np.linalg.eigvalsh(jc_hamiltonian(p))
        for target in (-np.sqrt(2) * p.g, np.sqrt(2) * p.g):
            assert np.abs(vals - target).min() <= 1e-12

    def test_difference_changes_excitation_by_two(self):
        p = resonant(0.5, 3)
        delta = rabi_hamiltonian(p) - jc_hamiltonian(p)
        n_exc = np.diag(excitation_operator(p.layout)).real
        nz = np.argwhere(np.abs(delta) > 1e-14)
        assert len(nz) > 0
        for u, v in nz:
            assert abs(n_exc[u] - n_exc[v]) == pytest.approx(2.0)


class TestDressedSpectrum:
    def test_bare_ground(self):
        spec = dressed_spectrum(rabi_hamiltonian(resonant(0.0, 3)))
        assert spec.ground_energy == pytest.approx(-1.0)
        assert abs(spec.ground_state[SpaceLayout(3).index("g", "g", 0)]) == pytest.approx(1.0)

    def test_ground_state_admixture(self):
        # counter-rotating terms mix doubly-excited components into the ground state
        p = resonant(0.5, 8)
        spec = dressed_spectrum(rabi_hamiltonian(p))
        ee_weight = np.sum(np.abs(spec.ground_state[: p.d]) ** 2)
        assert ee_weight > 1e-3

    def test_ground_state_virtual_photons(self):
        p = resonant(0.5, 8)
        spec = dressed_spectrum(rabi_hamiltonian(p))
        rho = np.outer(spec.ground_state, spec.ground_state.conj())
        assert expectation(rho, number_operator(p.layout)) > 0.05

    def test_orthonormal(self):
        spec = dressed_spectrum(rabi_hamiltonian(resonant(0.7, 5)))
        gram = dag(spec.states) @ spec.states
        assert np.abs(gram - np.eye(spec.dim)).max() <= 1e-10


class TestImprovedChannels:
    def test_bare_limit_pairwise(self):
        # at g = 0 the only transitions are photon-lowering ones: rate kappa*n,
        # two per qubit configuration at d = 3, eight in total
        p = resonant(0.0, 3)
        spec = dressed_spectrum(rabi_hamiltonian(p))
        chans = improved_channels(spec, p, merge_degenerate=False)
        assert len(chans) == 8
        rates = sorted(c.rate for c in chans)
        assert np.allclose(rates, [p.kappa] * 4 + [2 * p.kappa] * 4, atol=1e-12)

    def test_bare_limit_merged(self):
        # every transition sits at exactly omega_f, so they merge into a
        # single collective channel whose operator is the annihilation operator
        p = resonant(0.0, 3)
        layout = p.layout
        spec = dressed_spectrum(rabi_hamiltonian(p))
        chans = improved_channels(spec, p)
        assert len(chans) == 1
        assert chans[0].rate == pytest.approx(p.kappa)
        a_full = embed(annihilation(3), "F", layout)
        # collective operator equals a up to per-transition phases fixed by
        # the eigenvector convention; compare the dissipators via L^dag L and
        # the action on a state
        assert np.allclose(
            dag(chans[0].operator) @ chans[0].operator, dag(a_full) @ a_full, atol=1e-9
        )
        rho = np.zeros((12, 12), dtype=complex)
        rho[layout.index("g", "g", 2), layout.index("g", "g", 2)] = 1.0
        got = liouvillian_apply(rho, rabi_hamiltonian(p), chans)
        want = liouvillian_apply(rho, rabi_hamiltonian(p), [standard_channel(p)])
        assert np.abs(got - want).max() <= 1e-9

    def test_no_zero_gap_transitions(self):
        p = resonant(0.3, 4)
        spec = dressed_spectrum(rabi_hamiltonian(p))
        for c in improved_channels(spec, p):
            for j, k, _ in c.transitions:
                assert spec.energies[k] - spec.energies[j] > 0

    def test_rates_nonnegative_and_phase_free(self):
        p = resonant(0.45, 5)
        spec = dressed_spectrum(rabi_hamiltonian(p))
        chans = improved_channels(spec, p, merge_degenerate=False)
        assert all(c.rate >= 0 for c in chans)
        rng = np.random.default_rng(5)
        phases = np.exp(1j * rng.uniform(0, 2 * np.pi, size=spec.dim))
        scrambled = DressedSpectrum(energies=spec.energies, states=spec.states * phases)
        chans2 = improved_channels(scrambled, p, merge_degenerate=False)
        r1 = sorted(c.rate for c in chans)
        r2 = sorted(c.rate for c in chans2)
        assert np.allclose(r1, r2, atol=1e-12)

    def test_weak_coupling_recovers_standard_dissipator(self, rng):
        # the merged dressed dissipator must reduce to plain photon loss
        p = resonant(1e-6, 4)
        h_r = rabi_hamiltonian(p)
        spec = dressed_spectrum(h_r)
        chans = improved_channels(spec, p)
        h_jc = jc_hamiltonian(p)
        std = [standard_channel(p)]
        for _ in range(5):
            rho = random_density(rng, 16)
            improved = liouvillian_apply(rho, h_r, chans)
            standard = liouvillian_apply(rho, h_jc, std)
            rel = np.linalg.norm(improved - standard) / np.linalg.norm(standard)
            assert rel <= 1e-4

    def test_dimension_mismatch(self):
        p = resonant(0.3, 4)
        spec = dressed_spectrum(rabi_hamiltonian(p))
        with pytest.raises(ValueError):
            improved_channels(spec, p.with_d(5))


class TestStandardChannel:
    def test_annihilates_vacuum(self):
        p = resonant(0.5, 4)
        chan = standard_channel(p)
        psi = product_state(p.layout, "gg", 0)
        assert np.abs(chan.operator @ psi).max() == 0.0

    def test_rate(self):
        assert standard_channel(resonant(0.5, 4)).rate == pytest.approx(0.2)

    def test_single_photon_flow(self):
        # D[a] on |gg 1><gg 1| moves population straight to |gg 0>
        p = resonant(0.0, 3)
        layout = p.layout
        one = product_state(layout, "gg", 1)
        rho = np.outer(one, one.conj())
        rdot = liouvillian_apply(rho, np.zeros((12, 12)), [standard_channel(p)])
        zero = product_state(layout, "gg", 0)
        expected = p.kappa * (np.outer(zero, zero.conj()) - rho)
        assert np.abs(rdot - expected).max() <= 1e-12


class TestJumpChannel:
    def test_rate_validation(self):
        with pytest.raises(ValueError):
            JumpChannel(-0.1, operator=np.eye(2))

    def test_needs_exactly_one_description(self):
        with pytest.raises(ValueError):
            JumpChannel(0.1)

    def test_dressed_ordering(self):
        spec = dressed_spectrum(np.diag([0.0, 1.0]))
        with pytest.raises(ValueError):
            JumpChannel(0.1, transitions=[(1, 0, 1.0)], spectrum=spec)

    def test_lazy_operator(self):
        spec = dressed_spectrum(np.diag([0.0, 1.0, 2.0]))
        chan = JumpChannel(0.5, transitions=[(0, 2, 2.0)], spectrum=spec)
        op = chan.operator
        assert np.allclose(op, 2.0 * np.outer(spec.states[:, 0], spec.states[:, 2].conj()))
