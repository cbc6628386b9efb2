# cython: boundscheck=False, wraparound=False, cdivision=True
# cython: language_level=3
"""Compiled inner loop for the alternating-minimization estimator.

Mirrors _am_numpy.am_loop exactly. The normal matrix is factored once
with LAPACK zpotrf; each iteration does the phase update, the rhs
assembly, one zpotrs solve, and the objective evaluation in plain C
loops (problem sizes are small, so cache behavior beats BLAS dispatch
overhead here).

LAPACK is column-major. A C-contiguous Hermitian buffer A read
column-major is conj(A), so the factor solves conj(A) x = rhs; we feed
rhs = conj(b) and read back w = conj(x), which solves A w = b.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt
from scipy.linalg.cython_lapack cimport zpotrf, zpotrs

from .errors import NumericalError

cnp.import_array()

DEF DEG_TOL = 1e-14


cdef inline double complex cconj(double complex z):
    cdef double complex out
    out.real = z.real
    out.imag = -z.imag
    return out


cdef inline double cmag(double complex z):
    return sqrt(z.real * z.real + z.imag * z.imag)


cdef double _objective(double complex[::1] a, double complex[::1] phases,
                       double[::1] targets, double lam,
                       double complex[::1] w):
    cdef Py_ssize_t t, n
    cdef double obj = 0.0
    cdef double complex ap
    for t in range(a.shape[0]):
        ap = a[t] * phases[t]
        obj += a[t].real * a[t].real + a[t].imag * a[t].imag
        obj -= 2.0 * targets[t] * ap.real
    for n in range(w.shape[0]):
        obj += lam * (w[n].real * w[n].real + w[n].imag * w[n].imag)
    return obj


cdef void _matvec(double complex[:, ::1] rows, double complex[::1] w,
                  double complex[::1] out):
    cdef Py_ssize_t t, n
    cdef double complex acc
    for t in range(rows.shape[0]):
        acc = 0
        for n in range(rows.shape[1]):
            acc = acc + rows[t, n] * w[n]
        out[t] = acc


def am_loop(double complex[:, ::1] rows, double[::1] targets,
            object a_matrix, double complex[::1] w0,
            double complex[::1] phases0, double lam, double tol,
            int max_iter):
    """Run the alternating updates; see am.run_am for the contract."""
    cdef Py_ssize_t n_rounds = rows.shape[0]
    cdef Py_ssize_t dim = rows.shape[1]
    cdef int n = <int> dim
    cdef int nrhs = 1
    cdef int info = 0
    cdef char uplo = b'L'

    fact_arr = np.array(a_matrix, dtype=complex, order="C", copy=True)
    cdef double complex[:, ::1] fact = fact_arr
    zpotrf(&uplo, &n, &fact[0, 0], &n, &info)
    if info != 0:
        raise NumericalError(
            f"normal matrix factorization failed: zpotrf info={info}")

    w_arr = np.array(w0, dtype=complex, copy=True)
    p_arr = np.array(phases0, dtype=complex, copy=True)
    a_arr = np.empty(n_rounds, dtype=complex)
    x_arr = np.empty(dim, dtype=complex)
    objs_arr = np.empty(max_iter + 1, dtype=float)
    cdef double complex[::1] w = w_arr
    cdef double complex[::1] phases = p_arr
    cdef double complex[::1] a = a_arr
    cdef double complex[::1] x = x_arr
    cdef double[::1] objs = objs_arr

    cdef Py_ssize_t t, i, k
    cdef double mag, prev
    cdef double complex coef
    cdef int iters = 0
    cdef bint converged = False

    _matvec(rows, w, a)
    objs[0] = _objective(a, phases, targets, lam, w)
    for k in range(1, max_iter + 1):
        for t in range(n_rounds):
            mag = cmag(a[t])
            if mag < DEG_TOL:
                phases[t].real = 1.0
                phases[t].imag = 0.0
            else:
                phases[t] = cconj(a[t]) / mag
        # rhs of conj(A) x = conj(b): conj(b)[i] = sum_t rows[t,i] g_t p_t
        for i in range(dim):
            x[i] = 0
        for t in range(n_rounds):
            coef = targets[t] * phases[t]
            for i in range(dim):
                x[i] = x[i] + rows[t, i] * coef
        zpotrs(&uplo, &n, &nrhs, &fact[0, 0], &n, &x[0], &n, &info)
        if info != 0:
            raise NumericalError(f"triangular solve failed: zpotrs info={info}")
        for i in range(dim):
            w[i] = cconj(x[i])
        _matvec(rows, w, a)
        objs[k] = _objective(a, phases, targets, lam, w)
        iters = <int> k
        prev = objs[k - 1] if objs[k - 1] >= 0 else -objs[k - 1]
        if prev < 1.0:
            prev = 1.0
        if objs[k] - objs[k - 1] <= tol * prev and objs[k - 1] - objs[k] <= tol * prev:
            converged = True
            break
    return w_arr, p_arr, objs_arr[:iters + 1].copy(), iters, converged
