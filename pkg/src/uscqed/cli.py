"""Batch front-end: run named experiments from a flat key=value config.

Usage::

    uscqed run CONFIG [--out PATH] [--threads N]
    uscqed check

The config format is one ``key = value`` per line with ``#`` comments;
unknown keys are rejected with the offending line number. Every experiment
writes a single CSV whose ``#`` header records all resolved parameters.
Times and rates in the config are dimensionless multiples of the mode
frequency (t means omega_f * t, kappa means kappa / omega_f, and so on).

Exit codes: 0 success, 2 config error, 3 convergence failure, 4 physics
invariant violation.
"""

from __future__ import annotations

import argparse
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields, replace

import numpy as np

from . import backend
from .linalg import DEFAULT_POLICY, NumericPolicy, expectation, trace_distance
from .hilbert import (
    SpaceLayout,
    excitation_operator,
    number_operator,
    partial_trace,
    product_state,
    subradiant_state,
)
from .model import (
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
    build_ansatz,
    converge_fock,
    evolve,
    steady_state,
)
from .entanglement import (
    concurrence,
    conditional_entropy,
    eof_lower_bound,
    eof_two_qubit,
    ground_state_report,
    quantum_discord,
)

__all__ = [
    "ConfigError",
    "ConvergenceFailure",
    "RunConfig",
    "parse_config",
    "run_experiment",
    "run_spectrum",
    "run_evolve",
    "run_steady",
    "run_ground_eof_sweep",
    "run_fig1a",
    "run_fig1b",
    "main",
]

EXPERIMENTS = ("spectrum", "evolve", "steady", "ground_eof_sweep", "fig1a", "fig1b")
_STATE_TOKEN = re.compile(r"^([eg])([eg])(\d+)$")


class ConfigError(ValueError):
    """Malformed or invalid run configuration."""


class ConvergenceFailure(RuntimeError):
    """A steady state or truncation sweep failed to converge."""


@dataclass
class RunConfig:
    """Fully resolved configuration of one batch run.

    Frequencies ``omega_a`` and ``omega_f`` are absolute; ``g``, ``kappa``,
    and every time-like value are multiples of ``omega_f``.
    """

    experiment: str = ""
    omega_a: float = 1.0
    omega_f: float = 1.0
    g: float = 0.5
    kappa: float = 0.2
    d: int = 0                      # 0 = choose automatically
    dissipator: str = "improved"
    hamiltonian: str = "rabi"       # spectrum experiment only
    initial_state: str = "ge0"
    t_end: float = 200.0
    dt: float = 0.005
    stride: float = 0.5
    t_max: float = 0.0              # 0 = 500/kappa
    sweep_start: float = 0.0
    sweep_stop: float = 1.0
    sweep_step: float = 0.025
    g_list: tuple[float, ...] = (0.25, 0.4, 0.5)
    steady_tol: float = 1e-7
    fock_tol: float = 1e-4
    out: str = ""
    swept: bool = False             # set by the parser when sweep_* keys appear

    def resolved_out(self) -> str:
        return self.out or f"{self.experiment}.csv"

    def policy(self) -> NumericPolicy:
        return replace(DEFAULT_POLICY, steady_tol=self.steady_tol, fock_tol=self.fock_tol)


_PARSERS = {
    "experiment": str,
    "dissipator": str,
    "hamiltonian": str,
    "initial_state": str,
    "out": str,
    "d": int,
    "g_list": lambda s: tuple(float(x) for x in s.split(",") if x.strip()),
}


def _parse_value(key: str, raw: str):
    caster = _PARSERS.get(key, float)
    try:
        return caster(raw)
    except ValueError:
        raise ConfigError(f"malformed value {raw!r} for key {key!r}") from None


def parse_config(text: str) -> RunConfig:
    """Parse and validate a flat key=value document into a RunConfig."""
    known = {f.name for f in fields(RunConfig)} - {"swept"}
    seen: dict[str, int] = {}
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {body!r}")
        key, raw = (part.strip() for part in body.split("=", 1))
        if key not in known:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in seen:
            raise ConfigError(f"line {lineno}: duplicate key {key!r} (first on line {seen[key]})")
        seen[key] = lineno
        try:
            values[key] = _parse_value(key, raw)
        except ConfigError as exc:
            raise ConfigError(f"line {lineno}: {exc}") from None

    cfg = RunConfig(**values)
    cfg.swept = any(key.startswith("sweep_") for key in values)
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig):
    if cfg.experiment not in EXPERIMENTS:
        raise ConfigError(
            f"experiment must be one of {', '.join(EXPERIMENTS)}, got {cfg.experiment!r}"
        )
    try:
        RabiParams(cfg.omega_a, cfg.omega_f, cfg.g, cfg.kappa, max(cfg.d, 2))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if cfg.d != 0 and cfg.d < 2:
        raise ConfigError(f"d must be >= 2 (or 0 for automatic), got {cfg.d}")
    if cfg.dissipator not in ("standard", "improved"):
        raise ConfigError(f"dissipator must be 'standard' or 'improved', got {cfg.dissipator!r}")
    if cfg.hamiltonian not in ("rabi", "jc"):
        raise ConfigError(f"hamiltonian must be 'rabi' or 'jc', got {cfg.hamiltonian!r}")
    if cfg.initial_state != "phi_minus" and not _STATE_TOKEN.match(cfg.initial_state):
        raise ConfigError(
            f"initial_state must be 'phi_minus' or two letters from {{e,g}} plus a "
            f"Fock index, got {cfg.initial_state!r}"
        )
    for name in ("t_end", "dt", "stride"):
        if getattr(cfg, name) <= 0:
            raise ConfigError(f"{name} must be > 0, got {getattr(cfg, name)}")
    if cfg.t_max < 0:
        raise ConfigError(f"t_max must be >= 0, got {cfg.t_max}")
    if cfg.sweep_step <= 0:
        raise ConfigError(f"sweep_step must be > 0, got {cfg.sweep_step}")
    if cfg.sweep_start >= cfg.sweep_stop:
        raise ConfigError(
            f"sweep_start must be < sweep_stop, got {cfg.sweep_start} >= {cfg.sweep_stop}"
        )
    if any(g < 0 for g in cfg.g_list):
        raise ConfigError(f"g_list entries must be >= 0, got {cfg.g_list}")
    for name in ("steady_tol", "fock_tol"):
        if getattr(cfg, name) <= 0:
            raise ConfigError(f"{name} must be > 0, got {getattr(cfg, name)}")


# ---------------------------------------------------------------------------
# state and parameter resolution


def _token_fock_index(token: str) -> int:
    m = _STATE_TOKEN.match(token)
    return int(m.group(3)) if m else 0


def _initial_state(token: str, layout: SpaceLayout) -> np.ndarray:
    if token == "phi_minus":
        return subradiant_state(layout)
    m = _STATE_TOKEN.match(token)
    n = int(m.group(3))
    if n >= layout.fock_dim:
        raise ConfigError(
            f"initial_state {token!r} needs Fock index {n} < d = {layout.fock_dim}"
        )
    return product_state(layout, m.group(1) + m.group(2), n)


def _initial_atoms(token: str) -> np.ndarray:
    """Two-qubit marginal of the initial state; independent of d."""
    if token == "phi_minus":
        phi = np.zeros(4, dtype=complex)
        phi[1], phi[2] = 1 / np.sqrt(2), -1 / np.sqrt(2)
        return np.outer(phi, phi.conj())
    m = _STATE_TOKEN.match(token)
    code = {"e": 0, "g": 1}
    idx = 2 * code[m.group(1)] + code[m.group(2)]
    rho = np.zeros((4, 4), dtype=complex)
    rho[idx, idx] = 1.0
    return rho


def _params(cfg: RunConfig, g: float, d: int) -> RabiParams:
    # g and kappa arrive as multiples of the mode frequency
    w = cfg.omega_f
    return RabiParams(cfg.omega_a, w, g * w, cfg.kappa * w, d)


def _ansatz_bound(p: RabiParams, rho_ab0: np.ndarray) -> float:
    spec = dressed_spectrum(rabi_hamiltonian(p))
    ans = build_ansatz(rho_ab0, "nonrwa", spec)
    rho_af = partial_trace(ans.state, ("A", "F"), p.layout)
    return eof_lower_bound(rho_af, p.d)[1]


def _resolve_dynamics_d(cfg: RunConfig, g: float, policy: NumericPolicy) -> int:
    """Fock dimension for a time-evolution run at coupling g (in omega_f units)."""
    n0 = _token_fock_index(cfg.initial_state)
    if cfg.d:
        if cfg.d <= n0:
            raise ConfigError(f"d = {cfg.d} cannot represent initial state {cfg.initial_state!r}")
        return cfg.d
    if cfg.dissipator == "standard":
        # excitation never grows under the excitation-conserving dynamics
        return max(4, n0 + 3)
    rho_ab0 = _initial_atoms(cfg.initial_state)
    probe = _params(cfg, g, 2)
    d_star, _ = converge_fock(
        probe, lambda pp: _ansatz_bound(pp, rho_ab0), policy.fock_tol,
        d_start=max(4, n0 + 3), policy=policy,
    )
    return max(d_star + 2, n0 + 3)


def _hamiltonian_and_channels(cfg: RunConfig, p: RabiParams, policy: NumericPolicy):
    if cfg.dissipator == "standard":
        return jc_hamiltonian(p), [standard_channel(p)]
    h = rabi_hamiltonian(p)
    spec = dressed_spectrum(h)
    return h, improved_channels(spec, p, policy=policy)


# ---------------------------------------------------------------------------
# experiments


@dataclass
class ExperimentResult:
    columns: list[str]
    rows: list[tuple]
    params: dict = field(default_factory=dict)


def _base_params(cfg: RunConfig) -> dict:
    return {
        "experiment": cfg.experiment,
        "omega_a": cfg.omega_a,
        "omega_f": cfg.omega_f,
        "kappa": cfg.kappa,
        "dissipator": cfg.dissipator,
        "initial_state": cfg.initial_state,
        "steady_tol": cfg.steady_tol,
        "fock_tol": cfg.fock_tol,
        "backend": backend.BACKEND,
    }


def _sweep_grid(cfg: RunConfig) -> list[float]:
    n = int(np.floor((cfg.sweep_stop - cfg.sweep_start) / cfg.sweep_step + 1e-9)) + 1
    return [cfg.sweep_start + k * cfg.sweep_step for k in range(n)]


def run_spectrum(cfg: RunConfig, threads: int = 1) -> ExperimentResult:
    """Eigenvalues of the chosen Hamiltonian; sweeps over g when asked to."""
    policy = cfg.policy()
    build = rabi_hamiltonian if cfg.hamiltonian == "rabi" else jc_hamiltonian

    def levels(g):
        d = cfg.d or converge_fock(
            _params(cfg, g, 2), "ground_mean_photons", policy.fock_tol, policy=policy
        )[0] + 2
        p = _params(cfg, g, d)
        spec = dressed_spectrum(build(p))
        return d, spec.energies / p.omega_f

    params = _base_params(cfg) | {"hamiltonian": cfg.hamiltonian}
    if not cfg.swept:
        d, energies = levels(cfg.g)
        params |= {"g": cfg.g, "d": d}
        rows = [(i, e) for i, e in enumerate(energies)]
        return ExperimentResult(["index", "energy_over_omega"], rows, params)
    rows = []
    for g in _sweep_grid(cfg):
        d, energies = levels(g)
        params[f"d_at_g_{g:.9g}"] = d
        rows.extend((g, i, e) for i, e in enumerate(energies))
    return ExperimentResult(["g_over_omega", "index", "energy_over_omega"], rows, params)


def _dynamics_observables(layout: SpaceLayout):
    n_op = number_operator(layout)
    exc_op = excitation_operator(layout)
    dark = subradiant_state(layout)
    dark_proj = np.outer(dark, dark.conj())
    d = layout.fock_dim

    def lb_af(rho):
        return eof_lower_bound(partial_trace(rho, ("A", "F"), layout), d)[1]

    return {
        "mean_photons": lambda rho: expectation(rho, n_op),
        "mean_excitation": lambda rho: expectation(rho, exc_op),
        "subradiant_pop": lambda rho: expectation(rho, dark_proj),
        "eof_lower_bound_af": lb_af,
        "concurrence_ab": lambda rho: concurrence(partial_trace(rho, ("A", "B"), layout)),
    }


def run_evolve(cfg: RunConfig, threads: int = 1) -> ExperimentResult:
    """Single trajectory with the configured dissipator; one row per stride."""
    policy = cfg.policy()
    d = _resolve_dynamics_d(cfg, cfg.g, policy)
    p = _params(cfg, cfg.g, d)
    layout = p.layout
    h, channels = _hamiltonian_and_channels(cfg, p, policy)
    psi = _initial_state(cfg.initial_state, layout)
    rho0 = np.outer(psi, psi.conj())
    obs = _dynamics_observables(layout)
    traj = evolve(
        rho0, h, channels,
        t_end=cfg.t_end / p.omega_f, dt=cfg.dt / p.omega_f,
        record_every=cfg.stride / p.omega_f,
        observables=obs, keep_states=False, policy=policy,
    )
    columns = ["omega_t"] + list(obs)
    rows = [
        (p.omega_f * t,) + tuple(traj.observables[name][i] for name in obs)
        for i, t in enumerate(traj.times)
    ]
    params = _base_params(cfg) | {
        "g": cfg.g, "d": d, "dt": cfg.dt, "stride": cfg.stride, "t_end": cfg.t_end,
        "max_trace_correction": traj.max_trace_correction,
    }
    return ExperimentResult(columns, rows, params)


def run_steady(cfg: RunConfig, threads: int = 1) -> ExperimentResult:
    """Steady-state entanglement report for the AB, AF and BF marginals."""
    policy = cfg.policy()
    d = _resolve_dynamics_d(cfg, cfg.g, policy)
    p = _params(cfg, cfg.g, d)
    layout = p.layout
    h, channels = _hamiltonian_and_channels(cfg, p, policy)
    psi = _initial_state(cfg.initial_state, layout)
    rho0 = np.outer(psi, psi.conj())
    t_max = (cfg.t_max / p.omega_f) if cfg.t_max else 500.0 / p.kappa
    result = steady_state(
        rho0, h, channels, cfg.steady_tol,
        dt=cfg.dt / p.omega_f, t_max=t_max, policy=policy,
    )
    if not result.converged:
        raise ConvergenceFailure(
            f"steady state not reached by omega_f*t = {p.omega_f * result.t_reached:.6g} "
            f"(residual {result.residual:.3e} > {cfg.steady_tol:g})"
        )

    rho = result.state
    rho_ab = partial_trace(rho, ("A", "B"), layout)
    rho_af = partial_trace(rho, ("A", "F"), layout)
    rho_bf = partial_trace(rho, ("B", "F"), layout)
    lam_af, lb_af = eof_lower_bound(rho_af, d)
    lam_bf, lb_bf = eof_lower_bound(rho_bf, d)

    form = "rwa" if cfg.dissipator == "standard" else "nonrwa"
    spec = dressed_spectrum(rabi_hamiltonian(p)) if form == "nonrwa" else None
    ansatz = build_ansatz(
        partial_trace(rho0, ("A", "B"), layout), form, spec, layout=layout
    )

    columns = [
        "b", "converged", "omega_t_reached", "residual",
        "concurrence_ab", "eof_ab", "discord_ab", "cond_entropy_ab",
        "lambda_af", "eof_lower_bound_af", "lambda_bf", "eof_lower_bound_bf",
        "trace_dist_ansatz", "d",
    ]
    rows = [(
        ansatz.b, 1, p.omega_f * result.t_reached, result.residual,
        concurrence(rho_ab), eof_two_qubit(rho_ab),
        quantum_discord(rho_ab, policy), conditional_entropy(rho_ab, policy=policy),
        lam_af, lb_af, lam_bf, lb_bf,
        trace_distance(rho, ansatz.state), d,
    )]
    params = _base_params(cfg) | {
        "g": cfg.g, "d": d, "dt": cfg.dt, "ansatz_form": form,
        "t_max": p.omega_f * t_max,
    }
    return ExperimentResult(columns, rows, params)


def _ground_sweep_rows(cfg: RunConfig, threads: int, full_columns: bool):
    policy = cfg.policy()
    gs = _sweep_grid(cfg)

    def row(g):
        if cfg.d:
            d_star = cfg.d
        else:
            d_star, _ = converge_fock(
                _params(cfg, g, 2), "ground_eof_monogamy", policy.fock_tol, policy=policy
            )
        p = _params(cfg, g, d_star)
        layout = p.layout
        spec = dressed_spectrum(rabi_hamiltonian(p))
        report = ground_state_report(spec.ground_state, layout, policy)
        if full_columns:
            photons = expectation(
                np.outer(spec.ground_state, spec.ground_state.conj()), number_operator(layout)
            )
            return (
                g, report.eof_monogamy, report.eof_lower_bound, report.lam,
                report.discord, report.conditional_entropy, report.concurrence,
                report.eof_two_qubit, photons, d_star,
            )
        return (
            g, report.eof_monogamy, report.eof_lower_bound, report.discord,
            report.conditional_entropy, d_star,
        )

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(row, gs))
    else:
        rows = [row(g) for g in gs]
    return rows


def run_ground_eof_sweep(cfg: RunConfig, threads: int = 1) -> ExperimentResult:
    """Ground-state correlation quantifiers on a sweep over g/omega."""
    rows = _ground_sweep_rows(cfg, threads, full_columns=True)
    columns = [
        "g_over_omega", "eof_monogamy", "eof_lower_bound", "lambda", "discord_ab",
        "cond_entropy", "concurrence_ab", "eof_two_qubit_ab", "mean_photons",
        "fock_d_used",
    ]
    params = _base_params(cfg) | {
        "sweep_start": cfg.sweep_start, "sweep_stop": cfg.sweep_stop,
        "sweep_step": cfg.sweep_step,
    }
    return ExperimentResult(columns, rows, params)


def run_fig1b(cfg: RunConfig, threads: int = 1) -> ExperimentResult:
    """Ground-state EOF (exact and lower bound) against the coupling strength."""
    rows = _ground_sweep_rows(cfg, threads, full_columns=False)
    columns = [
        "g_over_omega", "eof_monogamy", "eof_lower_bound", "discord_ab",
        "cond_entropy", "fock_d_used",
    ]
    params = _base_params(cfg) | {
        "sweep_start": cfg.sweep_start, "sweep_stop": cfg.sweep_stop,
        "sweep_step": cfg.sweep_step,
        "fock_d_used": ",".join(str(r[-1]) for r in rows),
    }
    return ExperimentResult(columns, rows, params)


def run_fig1a(cfg: RunConfig, threads: int = 1) -> ExperimentResult:
    """Qubit-mode EOF lower bound along trajectories, one coupling per curve."""
    policy = cfg.policy()
    if cfg.dissipator != "improved":
        raise ConfigError("fig1a is defined for the improved dissipator")
    params = _base_params(cfg) | {
        "g_list": ",".join(f"{g:.9g}" for g in cfg.g_list),
        "dt": cfg.dt, "stride": cfg.stride, "t_end": cfg.t_end,
    }

    def curve(g):
        d = _resolve_dynamics_d(cfg, g, policy)
        p = _params(cfg, g, d)
        layout = p.layout
        h, channels = _hamiltonian_and_channels(cfg, p, policy)
        psi = _initial_state(cfg.initial_state, layout)
        rho0 = np.outer(psi, psi.conj())

        def lb_af(rho):
            return eof_lower_bound(partial_trace(rho, ("A", "F"), layout), d)[1]

        traj = evolve(
            rho0, h, channels,
            t_end=cfg.t_end / p.omega_f, dt=cfg.dt / p.omega_f,
            record_every=cfg.stride / p.omega_f,
            observables={"lb": lb_af}, keep_states=False, policy=policy,
        )
        rho_ab0 = partial_trace(rho0, ("A", "B"), layout)
        spec = dressed_spectrum(h)
        ansatz = build_ansatz(rho_ab0, "nonrwa", spec)
        ans_lb = eof_lower_bound(partial_trace(ansatz.state, ("A", "F"), layout), d)[1]
        series = traj.observables["lb"]
        rows = [
            (p.omega_f * t, g, series[i]) for i, t in enumerate(traj.times)
        ]
        extras = {
            f"d_at_g_{g:.9g}": d,
            f"ansatz_bound_g_{g:.9g}": ans_lb,
            f"late_minus_ansatz_g_{g:.9g}": float(series[-1] - ans_lb),
        }
        return rows, extras

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(curve, cfg.g_list))
    else:
        results = [curve(g) for g in cfg.g_list]

    rows = []
    for curve_rows, extras in results:
        rows.extend(curve_rows)
        params |= extras
    return ExperimentResult(["omega_t", "g_over_omega", "eof_lower_bound_af"], rows, params)


_RUNNERS = {
    "spectrum": run_spectrum,
    "evolve": run_evolve,
    "steady": run_steady,
    "ground_eof_sweep": run_ground_eof_sweep,
    "fig1a": run_fig1a,
    "fig1b": run_fig1b,
}


def run_experiment(cfg: RunConfig, threads: int = 1) -> ExperimentResult:
    return _RUNNERS[cfg.experiment](cfg, threads)


# ---------------------------------------------------------------------------
# output


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.9g}"
    return str(value)


def write_csv(path: str, result: ExperimentResult):
    lines = [f"# {key} = {_fmt(val)}" for key, val in result.params.items()]
    lines.append("# columns: " + ",".join(result.columns))
    lines.append(",".join(result.columns))
    for row in result.rows:
        lines.append(",".join(_fmt(v) for v in row))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# built-in invariant battery


def _check_suite() -> list[tuple[str, str | None]]:
    """Quick self-checks; returns (name, failure message or None) pairs."""
    import numpy.linalg as npl

    from .linalg import hermitian_eig, kron, trace_norm, von_neumann_entropy
    from .hilbert import annihilation, embed, partial_transpose_A
    from .dynamics import liouvillian_apply

    results = []

    def check(name, fn):
        try:
            fn()
            results.append((name, None))
        except Exception as exc:  # noqa: BLE001 - report, do not crash the battery
            results.append((name, f"{type(exc).__name__}: {exc}"))

    def kron_identity():
        eye = np.eye(2)
        assert np.array_equal(kron(eye, eye), np.eye(4))

    def eig_reconstruction():
        rng = np.random.default_rng(7)
        m = rng.normal(size=(12, 12)) + 1j * rng.normal(size=(12, 12))
        m = m + m.conj().T
        eig = hermitian_eig(m)
        rebuilt = (eig.vectors * eig.values) @ eig.vectors.conj().T
        assert npl.norm(rebuilt - m) <= 1e-9 * npl.norm(m)

    def bell_partial_transpose():
        bell = np.zeros(4, dtype=complex)
        bell[0] = bell[3] = 1 / np.sqrt(2)
        rho = np.outer(bell, bell.conj())
        assert abs(npl.eigvalsh(partial_transpose_A(rho, 2)).min() + 0.5) < 1e-12

    def entropy_mixed_qubit():
        assert abs(von_neumann_entropy(np.eye(2) / 2) - 1.0) < 1e-12

    def traceless_liouvillian():
        p = RabiParams(1.0, 1.0, 0.3, 0.2, 4)
        h = rabi_hamiltonian(p)
        spec = dressed_spectrum(h)
        chans = improved_channels(spec, p)
        rng = np.random.default_rng(11)
        gmat = rng.normal(size=(16, 16)) + 1j * rng.normal(size=(16, 16))
        rho = gmat @ gmat.conj().T
        rho /= np.trace(rho).real
        rdot = liouvillian_apply(rho, h, chans)
        assert abs(np.trace(rdot)) <= 1e-12 * npl.norm(rdot)

    def dressed_ground_stationary():
        p = RabiParams(1.0, 1.0, 0.3, 0.2, 6)
        h = rabi_hamiltonian(p)
        spec = dressed_spectrum(h)
        chans = improved_channels(spec, p)
        rho = np.outer(spec.ground_state, spec.ground_state.conj())
        assert npl.norm(liouvillian_apply(rho, h, chans)) <= 1e-10

    def photon_decay():
        p = RabiParams(1.0, 1.0, 0.0, 0.2, 4)
        layout = p.layout
        psi = product_state(layout, "gg", 1)
        traj = evolve(
            np.outer(psi, psi.conj()), jc_hamiltonian(p), [standard_channel(p)],
            t_end=1.0 / p.kappa, dt=0.005,
            observables={"n": lambda r: expectation(r, number_operator(layout))},
        )
        assert abs(traj.observables["n"][-1] - np.exp(-1.0)) <= 1e-5 * np.exp(-1.0)

    def trace_norm_invariance():
        rng = np.random.default_rng(3)
        m = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
        q, _ = npl.qr(rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6)))
        assert abs(trace_norm(q @ m) - trace_norm(m)) < 1e-8

    def embedding_consistency():
        layout = SpaceLayout(3)
        a = embed(annihilation(3), "F", layout)
        n_exp = a.conj().T @ a
        assert npl.norm(n_exp - number_operator(layout)) < 1e-12

    check("kron identity", kron_identity)
    check("eigendecomposition reconstruction", eig_reconstruction)
    check("partial transpose of a Bell state", bell_partial_transpose)
    check("entropy of the maximally mixed qubit", entropy_mixed_qubit)
    check("Liouvillian output traceless", traceless_liouvillian)
    check("dressed ground state stationary", dressed_ground_stationary)
    check("analytic photon decay", photon_decay)
    check("trace norm unitary invariance", trace_norm_invariance)
    check("field operator embedding", embedding_consistency)
    return results


# ---------------------------------------------------------------------------
# entry point


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="uscqed",
        description="Two qubits in a leaky cavity: dissipative dynamics and entanglement.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    runp = sub.add_parser("run", help="execute the experiment described by a config file")
    runp.add_argument("config", help="path to a key = value config file")
    runp.add_argument("--out", default=None, help="output CSV path (overrides the config)")
    runp.add_argument("--threads", type=int, default=1, help="parallel sweep workers")
    sub.add_parser("check", help="run the built-in invariant suite")

    args = parser.parse_args(argv)

    if args.command == "check":
        failures = 0
        for name, problem in _check_suite():
            if problem is None:
                print(f"PASS {name}")
            else:
                failures += 1
                print(f"FAIL {name}: {problem}")
        return 4 if failures else 0

    try:
        with open(args.config, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 2

    try:
        cfg = parse_config(text)
        result = run_experiment(cfg, threads=max(1, args.threads))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ConvergenceFailure, FockConvergenceError) as exc:
        print(f"convergence failure: {exc}", file=sys.stderr)
        return 3
    except PhysicsViolationError as exc:
        print(f"physics invariant violated: {exc}", file=sys.stderr)
        return 4

    out = args.out or cfg.resolved_out()
    write_csv(out, result)
    print(f"{cfg.experiment}: wrote {len(result.rows)} rows to {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
