"""Bipartite correlation quantifiers for qubit-qubit and qubit-qudit states.

Covers the closed-form two-qubit measures (concurrence and the entanglement
of formation it determines), the qubit-qudit EOF lower bound built from the
partial-transpose and realignment trace norms, projective-measurement
quantum discord, conditional entropy, and the exact EOF of a qubit-qudit
marginal of a pure three-party state obtained from the monogamy identity
E(A:F) = D(A:B) + S(A|B).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .linalg import (
    DEFAULT_POLICY,
    NumericPolicy,
    assert_density_matrix,
    purity,
    trace_norm,
    von_neumann_entropy,
)
from .hilbert import (
    SIGMA_Y,
    SpaceLayout,
    partial_trace,
    partial_transpose_A,
    realign,
)

__all__ = [
    "EntanglementReport",
    "binary_entropy",
    "concurrence",
    "eof_two_qubit",
    "eof_lower_bound",
    "quantum_discord",
    "conditional_entropy",
    "eof_via_monogamy",
    "ground_state_report",
]


def binary_entropy(x: float) -> float:
    """H2(x) = -x log2 x - (1-x) log2 (1-x) on [0, 1]."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"binary entropy argument must be in [0, 1], got {x}")
    if x in (0.0, 1.0):
        return 0.0
    return float(-x * np.log2(x) - (1.0 - x) * np.log2(1.0 - x))


def _check_two_qubit(rho, policy: NumericPolicy) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ValueError(f"expected a 4x4 two-qubit state, got shape {rho.shape}")
    return assert_density_matrix(rho, policy)


def concurrence(rho_ab, policy: NumericPolicy = DEFAULT_POLICY) -> float:
    """Two-qubit concurrence from the spin-flipped spectrum."""
    rho = _check_two_qubit(rho_ab, policy)
    yy = np.kron(SIGMA_Y, SIGMA_Y)
    flipped = rho @ yy @ rho.conj() @ yy
    vals = np.linalg.eigvals(flipped)
    # the spectrum is non-negative up to roundoff
    roots = np.sort(np.sqrt(np.clip(vals.real, 0.0, None)))[::-1]
    return float(max(0.0, roots[0] - roots[1] - roots[2] - roots[3]))


def eof_two_qubit(rho_ab, policy: NumericPolicy = DEFAULT_POLICY) -> float:
    """Entanglement of formation of a two-qubit state via its concurrence."""
    c = concurrence(rho_ab, policy)
    return binary_entropy(0.5 * (1.0 + np.sqrt(max(0.0, 1.0 - c * c))))


def eof_lower_bound(
    rho_af, d: int, policy: NumericPolicy = DEFAULT_POLICY
) -> tuple[float, float]:
    """(Lambda, bound) for a 2 x d state.

    Lambda is the larger of the partial-transpose and realignment trace
    norms; the bound is 0 for Lambda <= 1 and
    H2((1 + sqrt(1 - (Lambda-1)^2))/2) otherwise. Lambda cannot exceed 2
    for a qubit-qudit state; values past that by more than numerical noise
    raise, tiny overshoots are clamped with a warning.
    """
    rho = assert_density_matrix(rho_af, policy)
    if rho.shape != (2 * d, 2 * d):
        raise ValueError(f"expected a {2 * d}x{2 * d} qubit-qudit state, got {rho.shape}")
    lam = max(trace_norm(partial_transpose_A(rho, d)), trace_norm(realign(rho, d)))
    if lam > 2.0 + 1e-6:
        raise RuntimeError(f"Lambda = {lam:.9f} exceeds the qubit-qudit ceiling of 2")
    if lam > 2.0:
        warnings.warn(f"clamping Lambda = {lam:.12f} to 2", RuntimeWarning, stacklevel=2)
        lam = 2.0
    if lam <= 1.0:
        return float(lam), 0.0
    return float(lam), binary_entropy(0.5 * (1.0 + np.sqrt(max(0.0, 1.0 - (lam - 1.0) ** 2))))


# ---------------------------------------------------------------------------
# quantum discord (projective measurement on qubit B)


def _entropy2_batch(t):
    """Entropies of a batch of unnormalized Hermitian 2x2 blocks, weighted.

    Returns (p_k, p_k * S(T_k / p_k)) with zero contribution for p_k ~ 0.
    """
    p = (t[:, 0, 0] + t[:, 1, 1]).real
    half = 0.5 * p
    det = (t[:, 0, 0] * t[:, 1, 1] - t[:, 0, 1] * t[:, 1, 0]).real
    gap = np.sqrt(np.clip(half * half - det, 0.0, None))
    lo = np.clip(half - gap, 0.0, None)
    hi = np.clip(half + gap, 0.0, None)
    out = np.zeros_like(p)
    ok = p > 1e-14
    for lam in (lo, hi):
        q = np.zeros_like(p)
        q[ok] = lam[ok] / p[ok]
        pos = q > 0.0
        out[pos] -= p[pos] * q[pos] * np.log2(q[pos])
    return p, out


def _conditional_entropy_after_measurement(r4, theta, phi):
    """sum_k p_k S(rho_A|k) for measurement bases given by angle arrays."""
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    phi = np.atleast_1d(np.asarray(phi, dtype=float))
    c, s = np.cos(theta / 2.0), np.sin(theta / 2.0)
    e = np.exp(1j * phi)
    v_plus = np.stack([c, e * s], axis=1)
    v_minus = np.stack([s, -e * c], axis=1)
    total = np.zeros(theta.shape[0])
    for v in (v_plus, v_minus):
        t = np.einsum("gb,abcd,gd->gac", v.conj(), r4, v)
        _, weighted = _entropy2_batch(t)
        total += weighted
    return total


def quantum_discord(rho_ab, policy: NumericPolicy = DEFAULT_POLICY) -> float:
    """Quantum discord of a two-qubit state, measuring qubit B.

    D = S(rho_B) - S(rho_AB) + min over rank-1 projective measurements of
    the measured conditional entropy. The minimization scans a
    ``policy.discord_grid``-squared angle grid and polishes the best basins
    with a Nelder-Mead simplex.
    """
    rho = _check_two_qubit(rho_ab, policy)
    r4 = rho.reshape(2, 2, 2, 2)
    rho_b = np.einsum("abad->bd", r4)
    s_b = von_neumann_entropy(rho_b, policy)
    s_ab = von_neumann_entropy(rho, policy)

    n = policy.discord_grid
    theta = np.pi * (np.arange(n) + 0.5) / n
    phi = 2.0 * np.pi * np.arange(n) / n
    tt, pp = np.meshgrid(theta, phi, indexing="ij")
    values = _conditional_entropy_after_measurement(r4, tt.ravel(), pp.ravel())

    def objective(x):
        return float(_conditional_entropy_after_measurement(r4, x[0], x[1])[0])

    order = np.argsort(values)
    starts = [order[0]]
    for idx in order[1:]:
        di = abs(idx // n - starts[0] // n)
        dj = abs(idx % n - starts[0] % n)
        dj = min(dj, n - dj)
        if max(di, dj) >= n // 8:
            starts.append(idx)
            break

    best = float(values.min())
    for idx in starts:
        x0 = np.array([tt.ravel()[idx], pp.ravel()[idx]])
        res = minimize(
            objective,
            x0,
            method="Nelder-Mead",
            options={"xatol": 1e-8, "fatol": policy.discord_ftol, "maxiter": 600},
        )
        best = min(best, float(res.fun))

    d = s_b - s_ab + best
    if d < -1e-6:
        raise RuntimeError(f"discord evaluated to {d:.3e}; measurement search inconsistent")
    return max(d, 0.0)


def conditional_entropy(
    rho_ab, dims: tuple[int, int] = (2, 2), policy: NumericPolicy = DEFAULT_POLICY
) -> float:
    """S(A|B) = S(rho_AB) - S(rho_B); negative for entangled pure-ish states."""
    rho = assert_density_matrix(rho_ab, policy)
    da, db = dims
    if rho.shape != (da * db, da * db):
        raise ValueError(f"state shape {rho.shape} does not match dims {dims}")
    rho_b = np.einsum("abad->bd", rho.reshape(da, db, da, db))
    return von_neumann_entropy(rho, policy) - von_neumann_entropy(rho_b, policy)


def eof_via_monogamy(
    psi_abf, layout: SpaceLayout, policy: NumericPolicy = DEFAULT_POLICY
) -> float:
    """Exact EOF between qubit A and the mode for a pure 2 x 2 x d state.

    Accepts a state vector or a (pure) density matrix on the full space and
    evaluates D(rho_AB) + S(A|B) on the two-qubit marginal.
    """
    psi_abf = np.asarray(psi_abf, dtype=complex)
    n = layout.total_dim
    if psi_abf.ndim == 1:
        if psi_abf.shape != (n,):
            raise ValueError(f"state vector length {psi_abf.shape[0]}, expected {n}")
        norm = np.linalg.norm(psi_abf)
        if abs(norm - 1.0) > 1e-8:
            raise ValueError(f"state vector norm {norm:.9f}, expected 1")
        rho = np.outer(psi_abf, psi_abf.conj())
    else:
        rho = assert_density_matrix(psi_abf, policy)
        if rho.shape != (n, n):
            raise ValueError(f"state shape {rho.shape}, expected ({n}, {n})")
        pur = purity(rho)
        if pur < 1.0 - 1e-8:
            raise ValueError(
                f"monogamy identity needs a pure three-party state; purity = {pur:.9f}"
            )
    rho_ab = partial_trace(rho, ("A", "B"), layout)
    value = quantum_discord(rho_ab, policy) + conditional_entropy(rho_ab, policy=policy)
    if value < -1e-6:
        raise RuntimeError(f"monogamy EOF evaluated to {value:.3e}")
    return max(value, 0.0)


@dataclass(frozen=True)
class EntanglementReport:
    """Correlation quantifiers of one state; None marks a non-applicable field."""

    lam: float | None = None
    eof_lower_bound: float | None = None
    concurrence: float | None = None
    eof_two_qubit: float | None = None
    discord: float | None = None
    conditional_entropy: float | None = None
    eof_monogamy: float | None = None


def ground_state_report(
    psi, layout: SpaceLayout, policy: NumericPolicy = DEFAULT_POLICY
) -> EntanglementReport:
    """All quantifiers of a pure full-space state: AB marginal and AF marginal."""
    psi = np.asarray(psi, dtype=complex)
    rho = np.outer(psi, psi.conj())
    rho_ab = partial_trace(rho, ("A", "B"), layout)
    rho_af = partial_trace(rho, ("A", "F"), layout)
    lam, bound = eof_lower_bound(rho_af, layout.fock_dim, policy)
    disc = quantum_discord(rho_ab, policy)
    cond = conditional_entropy(rho_ab, policy=policy)
    mono = disc + cond
    if mono < -1e-6:
        raise RuntimeError(f"monogamy EOF evaluated to {mono:.3e}")
    return EntanglementReport(
        lam=lam,
        eof_lower_bound=bound,
        concurrence=concurrence(rho_ab, policy),
        eof_two_qubit=eof_two_qubit(rho_ab, policy),
        discord=disc,
        conditional_entropy=cond,
        eof_monogamy=max(mono, 0.0),
    )
