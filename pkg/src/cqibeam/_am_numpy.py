"""Pure-NumPy inner loop for the alternating-minimization estimator.

Semantically identical to the compiled kernel in _am_kernel.pyx; the
dispatcher in am.py picks whichever is available.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .errors import NumericalError

DEGENERATE_PHASE_TOL = 1e-14


def _objective(a, phases, targets, lam, w):
    data = np.sum(np.abs(a) ** 2 - 2.0 * targets * np.real(a * phases))
    return float(data + lam * np.vdot(w, w).real)


def am_loop(rows, targets, a_matrix, w0, phases0, lam, tol, max_iter):
    """Run the alternating updates; see am.run_am for the contract.

    Returns (w, phases, objectives, iterations, converged). The normal
    matrix is factored once (Cholesky); each iteration costs one phase
    update, one triangular solve pair, and two matrix-vector products.
    """
    try:
        chol = scipy.linalg.cho_factor(a_matrix, lower=True)
    except scipy.linalg.LinAlgError as exc:
        raise NumericalError(f"normal matrix factorization failed: {exc}") from exc

    w = w0.copy()
    phases = phases0.copy()
    a = rows @ w
    objs = np.empty(max_iter + 1)
    objs[0] = _objective(a, phases, targets, lam, w)
    iters = 0
    converged = False
    for k in range(1, max_iter + 1):
        mag = np.abs(a)
        safe = np.where(mag < DEGENERATE_PHASE_TOL, 1.0, mag)
        phases = np.where(mag < DEGENERATE_PHASE_TOL, 1.0 + 0j, a.conj() / safe)
        b = rows.conj().T @ (targets * phases.conj())
        w = scipy.linalg.cho_solve(chol, b)
        a = rows @ w
        objs[k] = _objective(a, phases, targets, lam, w)
        iters = k
        if abs(objs[k] - objs[k - 1]) <= tol * max(1.0, abs(objs[k - 1])):
            converged = True
            break
    return w, phases, objs[:iters + 1].copy(), iters, converged
