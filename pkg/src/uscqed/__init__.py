"""Dissipative dynamics and entanglement of two qubits in a leaky cavity.

Simulates two identical qubits coupled to one lossy bosonic mode, with the
coupling anywhere from weak to a sizable fraction of the mode frequency.
Provides both the textbook annihilation-operator master equation and the
dressed-state master equation whose jump channels connect Hamiltonian
eigenstates, plus a toolbox of bipartite entanglement quantifiers for the
qubit-qubit and qubit-mode marginals.
"""

from .linalg import (
    DEFAULT_POLICY,
    EigenDecomposition,
    NonHermitianError,
    NumericPolicy,
    PositivityError,
    expectation,
    hermitian_eig,
    kron,
    purity,
    trace_distance,
    trace_norm,
    von_neumann_entropy,
)
from .hilbert import (
    SpaceLayout,
    annihilation,
    embed,
    excitation_operator,
    number_operator,
    partial_trace,
    partial_transpose_A,
    product_state,
    realign,
    subradiant_state,
)
from .model import (
    DressedSpectrum,
    JumpChannel,
    RabiParams,
    dressed_spectrum,
    improved_channels,
    jc_hamiltonian,
    rabi_hamiltonian,
    standard_channel,
)
from .dynamics import (
    FockConvergenceError,
    PhysicsViolationError,
    SteadyStateAnsatz,
    SteadyStateResult,
    Trajectory,
    build_ansatz,
    converge_fock,
    evolve,
    liouvillian_apply,
    steady_state,
)
from .entanglement import (
    EntanglementReport,
    binary_entropy,
    concurrence,
    conditional_entropy,
    eof_lower_bound,
    eof_two_qubit,
    eof_via_monogamy,
    ground_state_report,
    quantum_discord,
)
from .backend import BACKEND, HAVE_EXTENSION

__version__ = "0.1.0"
