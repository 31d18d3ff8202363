"""Two qubits coupled to one cavity mode: Hamiltonians and loss channels.

Provides the full (counter-rotating) Hamiltonian and its excitation-number
conserving approximation, the energy-ordered dressed spectrum, and the two
cavity-loss dissipator constructions:

* a single photon-annihilation channel at rate kappa (valid for weak
  coupling), and
* dressed-state channels |j><k| between Hamiltonian eigenstates with rates
  kappa * (w_k - w_j)/omega_f * |<j|(a + a^dag)|k>|^2, which remain physical
  when the coupling is a sizable fraction of the mode frequency.

Dressed transitions whose frequencies coincide (within a small tolerance)
are grouped into a single collective jump operator. Keeping such degenerate
transitions as separate channels would discard the interference terms
between them and, for g -> 0 where every photon transition sits at exactly
omega_f, would fail to reduce to the plain annihilation dissipator.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import DEFAULT_POLICY, NumericPolicy, dag, hermitian_eig
from .hilbert import (
    SIGMA_MINUS,
    SIGMA_PLUS,
    SIGMA_X,
    SIGMA_Z,
    SpaceLayout,
    annihilation,
    embed,
)

__all__ = [
    "RabiParams",
    "DressedSpectrum",
    "JumpChannel",
    "rabi_hamiltonian",
    "jc_hamiltonian",
    "dressed_spectrum",
    "standard_channel",
    "improved_channels",
]


@dataclass(frozen=True)
class RabiParams:
    """Physical parameters: frequencies, coupling, loss rate, Fock cutoff."""

    omega_a: float
    omega_f: float
    g: float
    kappa: float
    d: int

    def __post_init__(self):
        if self.omega_a <= 0:
            raise ValueError(f"omega_a must be > 0, got {self.omega_a}")
        if self.omega_f <= 0:
            raise ValueError(f"omega_f must be > 0, got {self.omega_f}")
        if self.g < 0:
            raise ValueError(f"g must be >= 0, got {self.g}")
        if self.kappa < 0:
            raise ValueError(f"kappa must be >= 0, got {self.kappa}")
        if self.d < 2:
            raise ValueError(f"d must be >= 2, got {self.d}")

    @property
    def layout(self) -> SpaceLayout:
        return SpaceLayout(self.d)

    def with_d(self, d: int) -> "RabiParams":
        return RabiParams(self.omega_a, self.omega_f, self.g, self.kappa, d)


@dataclass(frozen=True, eq=False)
class DressedSpectrum:
    """Energy-ordered eigenpairs of a Hamiltonian; columns of ``states`` are |j>."""

    energies: np.ndarray
    states: np.ndarray

    @property
    def dim(self) -> int:
        return self.energies.shape[0]

    @property
    def ground_state(self) -> np.ndarray:
        return self.states[:, 0]

    @property
    def ground_energy(self) -> float:
        return float(self.energies[0])

    def to_lab(self, rho_dressed: np.ndarray) -> np.ndarray:
        return self.states @ rho_dressed @ dag(self.states)

    def to_dressed(self, rho_lab: np.ndarray) -> np.ndarray:
        return dag(self.states) @ rho_lab @ self.states


class JumpChannel:
    """One dissipation channel: a jump operator applied at a fixed rate.

    Channels are either explicit (the operator matrix is stored) or dressed:
    a set of transitions (j, k, amplitude) between eigenstates of a
    :class:`DressedSpectrum`, in which case the lab-frame matrix
    sum_p amp_p |j_p><k_p| is only materialized on demand.
    """

    def __init__(self, rate: float, operator=None, *, transitions=None, spectrum=None):
        if rate < 0:
            raise ValueError(f"channel rate must be >= 0, got {rate}")
        if (operator is None) == (transitions is None):
            raise ValueError("provide exactly one of operator / transitions")
        if transitions is not None:
            if spectrum is None:
                raise ValueError("dressed transitions need the spectrum they refer to")
            for j, k, _ in transitions:
                if not k > j:
                    raise ValueError(f"dressed transition must lower energy, got {k} -> {j}")
        self.rate = float(rate)
        self.transitions = tuple(transitions) if transitions is not None else None
        self.spectrum = spectrum
        self._operator = None if operator is None else np.asarray(operator, dtype=complex)

    @property
    def is_dressed(self) -> bool:
        return self.transitions is not None

    @property
    def operator(self) -> np.ndarray:
        if self._operator is None:
            v = self.spectrum.states
            op = np.zeros((v.shape[0], v.shape[0]), dtype=complex)
            for j, k, amp in self.transitions:
                op += amp * np.outer(v[:, j], v[:, k].conj())
            self._operator = op
        return self._operator

    def __repr__(self):
        kind = f"{len(self.transitions)} transitions" if self.is_dressed else "explicit"
        return f"JumpChannel(rate={self.rate:.6g}, {kind})"


def rabi_hamiltonian(p: RabiParams, layout: SpaceLayout | None = None) -> np.ndarray:
    """Full light-matter Hamiltonian including counter-rotating terms.

    H = omega_a/2 (sz_A + sz_B) + omega_f a^dag a
        + g (sx_A + sx_B)(a + a^dag)
    """
    layout = layout or p.layout
    a = embed(annihilation(layout.fock_dim), "F", layout)
    sz = embed(SIGMA_Z, "A", layout) + embed(SIGMA_Z, "B", layout)
    sx = embed(SIGMA_X, "A", layout) + embed(SIGMA_X, "B", layout)
    return 0.5 * p.omega_a * sz + p.omega_f * (dag(a) @ a) + p.g * (sx @ (a + dag(a)))


def jc_hamiltonian(p: RabiParams, layout: SpaceLayout | None = None) -> np.ndarray:
    """Excitation-conserving Hamiltonian (counter-rotating terms dropped).

    H = omega_a/2 (sz_A + sz_B) + omega_f a^dag a
        + g sum_j (sigma+_j a + sigma-_j a^dag)
    """
    layout = layout or p.layout
    a = embed(annihilation(layout.fock_dim), "F", layout)
    sz = embed(SIGMA_Z, "A", layout) + embed(SIGMA_Z, "B", layout)
    sp = embed(SIGMA_PLUS, "A", layout) + embed(SIGMA_PLUS, "B", layout)
    sm = embed(SIGMA_MINUS, "A", layout) + embed(SIGMA_MINUS, "B", layout)
    return 0.5 * p.omega_a * sz + p.omega_f * (dag(a) @ a) + p.g * (sp @ a + sm @ dag(a))


def dressed_spectrum(h: np.ndarray) -> DressedSpectrum:
    """Diagonalize a Hamiltonian into energy-ascending eigenpairs."""
    eig = hermitian_eig(h)
    return DressedSpectrum(energies=eig.values, states=eig.vectors)


def standard_channel(p: RabiParams, layout: SpaceLayout | None = None) -> JumpChannel:
    """Photon annihilation at rate kappa."""
    layout = layout or p.layout
    return JumpChannel(p.kappa, operator=embed(annihilation(layout.fock_dim), "F", layout))


def improved_channels(
    spectrum: DressedSpectrum,
    p: RabiParams,
    layout: SpaceLayout | None = None,
    *,
    merge_degenerate: bool = True,
    policy: NumericPolicy = DEFAULT_POLICY,
) -> list[JumpChannel]:
    """Cavity-loss channels between dressed eigenstates.

    For each eigenstate pair k > j the transition carries rate
    kappa * (w_k - w_j)/omega_f * |<j|(a + a^dag)|k>|^2; transitions with a
    rate below ``kappa * policy.rate_floor_scale`` are dropped.

    With ``merge_degenerate`` (the default), transitions whose frequencies
    agree within ``omega_f * policy.freq_merge_scale`` are combined into one
    collective channel with operator sum_p <j_p|(a+a^dag)|k_p> |j_p><k_p|
    and rate kappa * gap/omega_f. Single-transition groups reduce to the
    per-pair form exactly. ``merge_degenerate=False`` keeps every transition
    as its own channel |j><k| with the per-pair rate; this is only adequate
    when no two transition frequencies coincide.
    """
    layout = layout or p.layout
    if spectrum.dim != layout.total_dim:
        raise ValueError(
            f"spectrum dimension {spectrum.dim} does not match layout {layout.total_dim}"
        )
    x_lab = embed(annihilation(layout.fock_dim), "F", layout)
    x_lab = x_lab + dag(x_lab)
    xd = spectrum.to_dressed(x_lab)
    w = spectrum.energies
    n = spectrum.dim

    floor = p.kappa * policy.rate_floor_scale
    jj, kk = np.triu_indices(n, k=1)
    gaps = w[kk] - w[jj]
    amps = xd[jj, kk]
    rates = p.kappa * gaps / p.omega_f * np.abs(amps) ** 2
    if rates.size and rates.min() < -1e-30:
        raise RuntimeError("negative dressed rate despite energy ordering")
    keep = rates > floor
    jj, kk, gaps, amps, rates = jj[keep], kk[keep], gaps[keep], amps[keep], rates[keep]

    if not merge_degenerate:
        return [
            JumpChannel(r, transitions=[(int(j), int(k), 1.0 + 0.0j)], spectrum=spectrum)
            for j, k, r in zip(jj, kk, rates)
        ]

    order = np.argsort(gaps, kind="stable")
    tol = p.omega_f * policy.freq_merge_scale
    channels: list[JumpChannel] = []
    group: list[int] = []

    def flush(group):
        if not group:
            return
        if len(group) == 1:
            i = group[0]
            channels.append(
                JumpChannel(
                    float(rates[i]),
                    transitions=[(int(jj[i]), int(kk[i]), 1.0 + 0.0j)],
                    spectrum=spectrum,
                )
            )
            return
        gap = float(np.mean(gaps[group]))
        trans = [(int(jj[i]), int(kk[i]), complex(amps[i])) for i in group]
        channels.append(
            JumpChannel(p.kappa * gap / p.omega_f, transitions=trans, spectrum=spectrum)
        )

    anchor = None
    for i in order:
        if anchor is None or gaps[i] - anchor > tol:
            flush(group)
            group = [int(i)]
            anchor = gaps[i]
        else:
            group.append(int(i))
    flush(group)
    return channels
