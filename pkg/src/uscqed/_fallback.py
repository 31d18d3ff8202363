"""Pure-NumPy stepping kernels: the fallback when the extension is absent.

Both backends expose the same two classes:

* ``DressedStepper`` propagates a state expressed in the eigenbasis of the
  Hamiltonian, where the coherent part is elementwise and the dissipative
  part is a sparse set of gain couplings plus a diagonal loss, folded into
  the elementwise factor.
* ``DenseStepper`` propagates with explicit jump-operator matrices and is
  matrix-multiplication bound (BLAS does the work here, so there is no
  compiled variant of it).

One step of either stepper is classical 4th-order Runge-Kutta followed by
re-Hermitization and trace renormalization; ``run`` returns the largest
pre-renormalization trace defect it saw.
"""

from __future__ import annotations

import numpy as np
from scipy.sparse import csr_matrix


class DressedStepper:
    """RK4 stepping of drho = M*rho (elementwise) + sparse gain terms."""

    def __init__(self, m, gj1, gj2, gk1, gk2, gw):
        self.m = np.ascontiguousarray(m, dtype=complex)
        n = self.m.shape[0]
        self.n = n
        rows = np.asarray(gj1, dtype=np.int64) * n + np.asarray(gj2, dtype=np.int64)
        cols = np.asarray(gk1, dtype=np.int64) * n + np.asarray(gk2, dtype=np.int64)
        self.gain = csr_matrix(
            (np.asarray(gw, dtype=complex), (rows, cols)), shape=(n * n, n * n)
        )

    def _rhs(self, rho):
        return self.m * rho + (self.gain @ rho.ravel()).reshape(self.n, self.n)

    def rhs(self, rho):
        """Generator action on a state given in the same frame."""
        return self._rhs(np.asarray(rho, dtype=complex))

    def run(self, rho, dt, n_steps):
        rho = np.array(rho, dtype=complex)
        max_err = 0.0
        for _ in range(n_steps):
            k1 = self._rhs(rho)
            k2 = self._rhs(rho + (0.5 * dt) * k1)
            k3 = self._rhs(rho + (0.5 * dt) * k2)
            k4 = self._rhs(rho + dt * k3)
            rho = rho + (dt / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
            rho = 0.5 * (rho + rho.conj().T)
            tr = np.trace(rho).real
            err = abs(tr - 1.0)
            if err > max_err:
                max_err = err
            rho *= 1.0 / tr
        return rho, max_err


class DenseStepper:
    """RK4 stepping of drho = A rho + rho A^dag + sum_c r_c L_c rho L_c^dag.

    ``A = -iH - (1/2) sum_c r_c L_c^dag L_c`` is precomputed.
    """

    def __init__(self, h, operators, rates):
        h = np.asarray(h, dtype=complex)
        self.ops = [np.asarray(op, dtype=complex) for op in operators]
        self.rates = [float(r) for r in rates]
        acc = -1j * h
        for op, r in zip(self.ops, self.rates):
            acc -= 0.5 * r * (op.conj().T @ op)
        self.a_eff = acc

    def _rhs(self, rho):
        # A rho + (A rho)^dag == A rho + rho A^dag only for Hermitian rho;
        # every RK4 stage preserves Hermiticity, so this holds throughout.
        out = self.a_eff @ rho
        out += out.conj().T
        for op, r in zip(self.ops, self.rates):
            out += r * (op @ rho @ op.conj().T)
        return out

    def rhs(self, rho):
        """Generator action on a Hermitian state."""
        return self._rhs(np.asarray(rho, dtype=complex))

    def run(self, rho, dt, n_steps):
        rho = np.array(rho, dtype=complex)
        max_err = 0.0
        for _ in range(n_steps):
            k1 = self._rhs(rho)
            k2 = self._rhs(rho + (0.5 * dt) * k1)
            k3 = self._rhs(rho + (0.5 * dt) * k2)
            k4 = self._rhs(rho + dt * k3)
            rho = rho + (dt / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
            rho = 0.5 * (rho + rho.conj().T)
            tr = np.trace(rho).real
            err = abs(tr - 1.0)
            if err > max_err:
                max_err = err
            rho *= 1.0 / tr
        return rho, max_err
