"""Master-equation integration, steady states, and truncation convergence.

Time evolution is fixed-step RK4 on
``drho/dt = -i[H, rho] + sum_c r_c D[L_c] rho`` with re-Hermitization and
trace renormalization after every step. When every channel is a dressed
channel on the same spectrum, the state is propagated in the eigenbasis of
H, where the coherent part and the dissipative loss are elementwise and the
gain is a sparse coupling; that path runs through the selected backend
kernel. Anything else (notably the plain annihilation channel) uses the
dense matrix-product stepper.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from . import backend
from .linalg import (
    DEFAULT_POLICY,
    NumericPolicy,
    assert_density_matrix,
    dag,
    expectation,
)
from .hilbert import SpaceLayout, partial_trace, product_state, subradiant_state
from .model import DressedSpectrum, JumpChannel, RabiParams, dressed_spectrum, rabi_hamiltonian

__all__ = [
    "PhysicsViolationError",
    "FockConvergenceError",
    "Trajectory",
    "SteadyStateResult",
    "SteadyStateAnsatz",
    "liouvillian_apply",
    "evolve",
    "steady_state",
    "build_ansatz",
    "converge_fock",
    "FOCK_OBSERVABLES",
]


class PhysicsViolationError(RuntimeError):
    """A trajectory left the set of physical states beyond tolerance."""


class FockConvergenceError(RuntimeError):
    """The Fock-truncation sweep hit its cap before converging."""


@dataclass
class Trajectory:
    """Recorded time evolution: states and named observable series."""

    times: np.ndarray
    states: list[np.ndarray]
    observables: dict[str, np.ndarray]
    final_state: np.ndarray
    max_trace_correction: float


@dataclass
class SteadyStateResult:
    """Outcome of long-time integration; ``converged`` is never implicit."""

    state: np.ndarray
    converged: bool
    t_reached: float
    residual: float


@dataclass(frozen=True)
class SteadyStateAnsatz:
    """Predicted asymptotic state: ground-state projector mixed with the dark state."""

    b: float
    form: str
    state: np.ndarray


def liouvillian_apply(rho, h, channels: Sequence[JumpChannel]) -> np.ndarray:
    """-i[H, rho] + sum_c r_c (L rho L^dag - {L^dag L, rho}/2)."""
    rho = np.asarray(rho, dtype=complex)
    h = np.asarray(h, dtype=complex)
    if rho.shape != h.shape or rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"dimension mismatch: rho {rho.shape}, H {h.shape}")
    out = -1j * (h @ rho - rho @ h)
    for c in channels:
        op = c.operator
        if op.shape != rho.shape:
            raise ValueError(f"channel operator shape {op.shape} does not match {rho.shape}")
        opd = dag(op)
        anti = opd @ op
        out += c.rate * (op @ rho @ opd - 0.5 * (anti @ rho + rho @ anti))
    return out


# ---------------------------------------------------------------------------
# generator assembly


def _common_spectrum(channels: Sequence[JumpChannel]) -> DressedSpectrum | None:
    if not channels or not all(c.is_dressed for c in channels):
        return None
    spec = channels[0].spectrum
    if any(c.spectrum is not spec for c in channels):
        return None
    return spec


def _dressed_stepper(h, channels, spec: DressedSpectrum):
    """Backend stepper in the eigenbasis, or None when the layout does not apply."""
    w = spec.energies
    n = spec.dim
    hd = spec.to_dressed(np.asarray(h, dtype=complex))
    scale = max(1.0, float(np.abs(w).max()))
    if np.abs(hd - np.diag(w)).max() > 1e-8 * scale:
        return None

    loss = np.zeros(n)
    gj1, gj2, gk1, gk2, gw = [], [], [], [], []
    for c in channels:
        trans = c.transitions
        for (j, k, amp) in trans:
            loss[k] += c.rate * abs(amp) ** 2
        for (j1, k1, a1) in trans:
            for (j2, k2, a2) in trans:
                if j1 == j2 and k1 != k2:
                    # off-diagonal L^dag L: the elementwise loss no longer
                    # applies, fall back to the dense stepper
                    return None
                gj1.append(j1)
                gj2.append(j2)
                gk1.append(k1)
                gk2.append(k2)
                gw.append(c.rate * a1 * np.conj(a2))

    m = -1j * (w[:, None] - w[None, :]) - 0.5 * (loss[:, None] + loss[None, :])
    stepper = backend.DressedStepper(
        np.ascontiguousarray(m, dtype=complex),
        np.asarray(gj1, dtype=np.intc),
        np.asarray(gj2, dtype=np.intc),
        np.asarray(gk1, dtype=np.intc),
        np.asarray(gk2, dtype=np.intc),
        np.asarray(gw, dtype=complex),
    )
    return stepper


class _Propagator:
    """Wraps a backend stepper together with the frame it operates in."""

    def __init__(self, h, channels):
        self.spec = _common_spectrum(channels)
        self.stepper = None
        if self.spec is not None:
            self.stepper = _dressed_stepper(h, channels, self.spec)
        if self.stepper is None:
            self.spec = None
            self.stepper = backend.DenseStepper(
                h, [c.operator for c in channels], [c.rate for c in channels]
            )

    def to_frame(self, rho_lab):
        return self.spec.to_dressed(rho_lab) if self.spec is not None else rho_lab.copy()

    def to_lab(self, rho):
        return self.spec.to_lab(rho) if self.spec is not None else rho

    def run(self, rho, dt, n_steps):
        return self.stepper.run(rho, dt, n_steps)

    def rhs_norm(self, rho) -> float:
        """||L(rho)||_F evaluated in the propagation frame (frame-invariant)."""
        return float(np.linalg.norm(self.stepper.rhs(rho)))


def _spectral_width(h) -> float:
    vals = np.linalg.eigvalsh(np.asarray(h, dtype=complex))
    return float(vals[-1] - vals[0])


def _check_state(rho_lab, t, policy: NumericPolicy):
    wmin = float(np.linalg.eigvalsh(rho_lab).min())
    if wmin < policy.positivity_abort:
        raise PhysicsViolationError(
            f"state eigenvalue {wmin:.3e} at t={t:.6g} below {policy.positivity_abort:.0e}; "
            "reduce dt or enlarge the Fock dimension"
        )
    return wmin


def evolve(
    rho0,
    h,
    channels: Sequence[JumpChannel],
    t_end: float,
    dt: float,
    *,
    record_every: float | None = None,
    observables: Mapping[str, Callable[[np.ndarray], float]] | None = None,
    keep_states: bool = True,
    policy: NumericPolicy = DEFAULT_POLICY,
) -> Trajectory:
    """Integrate the master equation and record at a fixed stride.

    ``observables`` maps names to functions of the lab-frame state; each is
    evaluated at every recording time. Raises
    :class:`PhysicsViolationError` when positivity degrades beyond the
    policy's abort threshold.
    """
    rho0 = assert_density_matrix(rho0, policy)
    if t_end <= 0:
        raise ValueError(f"t_end must be > 0, got {t_end}")
    if dt <= 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    width = _spectral_width(h)
    if dt * width > 2.0:
        raise ValueError(
            f"dt={dt:.3g} is unstable for spectral width {width:.3g} (need dt*width <= 2)"
        )
    if record_every is None:
        record_every = t_end / 200.0
    stride = max(1, int(round(record_every / dt)))
    n_steps = int(round(t_end / dt))
    observables = dict(observables or {})

    prop = _Propagator(h, channels)
    rho = prop.to_frame(rho0)

    times = [0.0]
    states = [rho0.copy()] if keep_states else []
    series: dict[str, list[float]] = {name: [f(rho0)] for name, f in observables.items()}
    _check_state(rho0, 0.0, policy)

    max_corr = 0.0
    done = 0
    while done < n_steps:
        chunk = min(stride, n_steps - done)
        rho, err = prop.run(rho, dt, chunk)
        max_corr = max(max_corr, err)
        done += chunk
        t = done * dt
        rho_lab = prop.to_lab(rho)
        _check_state(rho_lab, t, policy)
        times.append(t)
        if keep_states:
            states.append(rho_lab)
        for name, f in observables.items():
            series[name].append(f(rho_lab))

    return Trajectory(
        times=np.asarray(times),
        states=states,
        observables={k: np.asarray(v) for k, v in series.items()},
        final_state=prop.to_lab(rho),
        max_trace_correction=max_corr,
    )


def steady_state(
    rho0,
    h,
    channels: Sequence[JumpChannel],
    tol: float | None = None,
    *,
    dt: float | None = None,
    t_max: float | None = None,
    check_every: int = 400,
    policy: NumericPolicy = DEFAULT_POLICY,
) -> SteadyStateResult:
    """Integrate until ||drho/dt||_F < tol * ||rho||_F or t_max is reached.

    The residual is evaluated from the exact Liouvillian action on the
    current state every ``check_every`` steps. A run that exhausts ``t_max``
    returns ``converged=False`` rather than a silent partial answer.
    """
    rho0 = assert_density_matrix(rho0, policy)
    if tol is None:
        tol = policy.steady_tol
    width = _spectral_width(h)
    if dt is None:
        dt = 0.05 / max(width, 1e-12)
    if t_max is None:
        top_rate = max((c.rate for c in channels), default=0.0)
        if top_rate <= 0:
            raise ValueError("t_max must be given when no channel dissipates")
        t_max = 500.0 / top_rate

    prop = _Propagator(h, channels)
    rho = prop.to_frame(rho0)

    t = 0.0
    residual = np.inf
    while t < t_max:
        chunk = min(check_every, max(1, int(round((t_max - t) / dt))))
        rho, _ = prop.run(rho, dt, chunk)
        t += chunk * dt
        residual = prop.rhs_norm(rho) / float(np.linalg.norm(rho))
        if residual < tol:
            rho_lab = prop.to_lab(rho)
            _check_state(rho_lab, t, policy)
            return SteadyStateResult(rho_lab, True, t, residual)
    rho_lab = prop.to_lab(rho)
    _check_state(rho_lab, t, policy)
    return SteadyStateResult(rho_lab, False, t, residual)


# ---------------------------------------------------------------------------
# asymptotic-state ansatz


def build_ansatz(
    rho_ab_initial,
    form: str,
    spectrum: DressedSpectrum | None = None,
    *,
    layout: SpaceLayout | None = None,
    policy: NumericPolicy = DEFAULT_POLICY,
) -> SteadyStateAnsatz:
    """Asymptotic state (1-b) P_ground + b |Phi-,0><Phi-,0| from the initial atoms.

    ``b`` is the overlap of the initial two-qubit state with the dark state
    |Phi-> = (|eg> - |ge>)/sqrt(2). With ``form="rwa"`` the ground projector
    is the bare |gg 0>; with ``form="nonrwa"`` it is the dressed ground
    state of the supplied spectrum. The initial atoms must carry no
    coherence between |gg> and |Phi->; otherwise the asymptotic state is not
    of this two-component form and the call is rejected.
    """
    rho_ab = assert_density_matrix(rho_ab_initial, policy)
    if rho_ab.shape != (4, 4):
        raise ValueError(f"initial atomic state must be 4x4, got {rho_ab.shape}")
    if form not in ("rwa", "nonrwa"):
        raise ValueError(f"form must be 'rwa' or 'nonrwa', got {form!r}")
    if form == "nonrwa":
        if spectrum is None:
            raise ValueError("the nonrwa form needs a dressed spectrum")
        layout = SpaceLayout(spectrum.dim // 4)
    elif layout is None:
        raise ValueError("the rwa form needs a layout")

    phi = np.zeros(4, dtype=complex)
    phi[1] = 1 / np.sqrt(2)   # |eg>
    phi[2] = -1 / np.sqrt(2)  # |ge>
    gg = np.zeros(4, dtype=complex)
    gg[3] = 1.0
    coherence = abs(gg.conj() @ rho_ab @ phi)
    if coherence > 1e-10:
        raise ValueError(
            f"initial state has |<gg|rho|Phi->| = {coherence:.3e}; "
            "the two-component asymptotic form does not apply"
        )
    b = float(np.clip((phi.conj() @ rho_ab @ phi).real, 0.0, 1.0))

    dark = subradiant_state(layout)
    if form == "rwa":
        ground = product_state(layout, "gg", 0)
    else:
        ground = spectrum.ground_state
    state = (1.0 - b) * np.outer(ground, ground.conj()) + b * np.outer(dark, dark.conj())
    return SteadyStateAnsatz(b=b, form=form, state=state)


# ---------------------------------------------------------------------------
# Fock truncation convergence


def _ground_rho(p: RabiParams) -> tuple[np.ndarray, SpaceLayout]:
    layout = p.layout
    spec = dressed_spectrum(rabi_hamiltonian(p, layout))
    psi = spec.ground_state
    return np.outer(psi, psi.conj()), layout


def _ground_mean_photons(p: RabiParams) -> float:
    from .hilbert import number_operator

    rho, layout = _ground_rho(p)
    return expectation(rho, number_operator(layout))


def _ground_eof_lower_bound(p: RabiParams) -> float:
    from .entanglement import eof_lower_bound

    rho, layout = _ground_rho(p)
    rho_af = partial_trace(rho, ("A", "F"), layout)
    return eof_lower_bound(rho_af, layout.fock_dim)[1]


def _ground_eof_monogamy(p: RabiParams) -> float:
    from .entanglement import eof_via_monogamy

    layout = p.layout
    spec = dressed_spectrum(rabi_hamiltonian(p, layout))
    return eof_via_monogamy(spec.ground_state, layout)


FOCK_OBSERVABLES: dict[str, Callable[[RabiParams], float]] = {
    "ground_mean_photons": _ground_mean_photons,
    "ground_eof_lower_bound": _ground_eof_lower_bound,
    "ground_eof_monogamy": _ground_eof_monogamy,
}


def converge_fock(
    p: RabiParams,
    observable: str | Callable[[RabiParams], float],
    tol: float | None = None,
    *,
    d_start: int = 2,
    d_cap: int | None = None,
    policy: NumericPolicy = DEFAULT_POLICY,
) -> tuple[int, float]:
    """Smallest Fock dimension at which ``observable`` has stopped moving.

    Evaluates the quantity at d, d+2, ... and returns the first d whose
    value differs from the d+2 value by less than ``tol``, together with
    that value. Raises :class:`FockConvergenceError` past ``d_cap``.
    """
    if isinstance(observable, str):
        try:
            fn = FOCK_OBSERVABLES[observable]
        except KeyError:
            raise KeyError(
                f"unknown observable {observable!r}; known: {sorted(FOCK_OBSERVABLES)}"
            ) from None
    else:
        fn = observable
    if tol is None:
        tol = policy.fock_tol
    if d_cap is None:
        d_cap = policy.fock_cap

    d = max(2, d_start)
    value = fn(p.with_d(d))
    while d + 2 <= d_cap:
        nxt = fn(p.with_d(d + 2))
        if abs(nxt - value) < tol:
            return d, value
        d += 2
        value = nxt
    raise FockConvergenceError(
        f"observable still moving at d={d} (cap {d_cap}); last delta vs d-2 exceeded {tol:g}"
    )
