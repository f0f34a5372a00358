# cython: language_level=3
# cython: boundscheck=False
# cython: wraparound=False
# cython: initializedcheck=False
# cython: cdivision=True
"""Compiled hot kernel: weighted complex-exponential sums on delay-Doppler grids.

Semantics are identical to ``ddsense._kernels._ref.phase_surface``.  The
complex arithmetic is carried out on separate real/imaginary planes with
unrolled accumulators so the C compiler can pipeline and vectorize the inner
reduction, and the phase tables use multiplicative recurrences (renormalized
periodically) instead of per-entry exponentials when a grid is uniform.
"""

from libc.math cimport cos, fabs, sin

import numpy as np

cdef extern from *:
    """
    #include <stddef.h>

    /* A block of delay rows of the surface: four independent real reductions
       per (row, Doppler column) pair.  Blocking keeps each Doppler phase row
       in L1 across the whole delay block; restrict + -ffast-math let the
       compiler vectorize the reductions.  noinline keeps the restrict
       qualifiers effective (they are dropped when the body is inlined into
       the generated caller). */
    __attribute__((noinline))
    static void dd_surface_block(const double* restrict wf_re, const double* restrict wf_im,
                                 const double* restrict pt_re, const double* restrict pt_im,
                                 ptrdiff_t n_rows, ptrdiff_t n_alpha, ptrdiff_t n_u,
                                 ptrdiff_t out_stride,
                                 double* restrict out_re, double* restrict out_im)
    {
        ptrdiff_t b, j, u;
        for (j = 0; j < n_alpha; ++j) {
            const double* restrict cr = pt_re + j * n_u;
            const double* restrict ci = pt_im + j * n_u;
            for (b = 0; b < n_rows; ++b) {
                const double* restrict wr = wf_re + b * n_u;
                const double* restrict wi = wf_im + b * n_u;
                double acc_rr = 0.0, acc_ii = 0.0, acc_ri = 0.0, acc_ir = 0.0;
                for (u = 0; u < n_u; ++u) {
                    acc_rr += wr[u] * cr[u];
                    acc_ii += wi[u] * ci[u];
                    acc_ri += wr[u] * ci[u];
                    acc_ir += wi[u] * cr[u];
                }
                out_re[b * out_stride + j] = acc_rr - acc_ii;
                out_im[b * out_stride + j] = acc_ri + acc_ir;
            }
        }
    }
    """
    void dd_surface_block(const double* wf_re, const double* wf_im,
                          const double* pt_re, const double* pt_im,
                          Py_ssize_t n_rows, Py_ssize_t n_alpha, Py_ssize_t n_u,
                          Py_ssize_t out_stride,
                          double* out_re, double* out_im) nogil

cdef double TWO_PI = 6.283185307179586476925287
cdef int RENORM_EVERY = 64
DEF _ROW_BLOCK = 8


cdef bint _is_uniform(double[::1] grid) noexcept nogil:
    cdef Py_ssize_t n = grid.shape[0]
    if n < 3:
        return True
    cdef double step = grid[1] - grid[0]
    cdef double tol = 1e-12 * (1.0 + fabs(grid[n - 1] - grid[0]))
    cdef Py_ssize_t i
    for i in range(2, n):
        if fabs(grid[i] - grid[i - 1] - step) > tol:
            return False
    return True


cdef void _phase_table(double[::1] samples, double[::1] grid, double sign,
                       double[:, ::1] table_re, double[:, ::1] table_im) noexcept nogil:
    """table[g, u] = exp(1j * sign * 2*pi * samples[u] * grid[g]).

    Uniform grids advance by one complex rotation per row, recomputing the
    exact exponential every RENORM_EVERY rows to stop drift.
    """
    cdef Py_ssize_t n_u = samples.shape[0]
    cdef Py_ssize_t n_g = grid.shape[0]
    cdef Py_ssize_t g, u
    cdef double ang, step_r, step_i, cur_r, cur_i, tmp
    cdef bint uniform = _is_uniform(grid)
    cdef double step = grid[1] - grid[0] if n_g > 1 else 0.0
    if not uniform:
        for g in range(n_g):
            for u in range(n_u):
                ang = sign * TWO_PI * samples[u] * grid[g]
                table_re[g, u] = cos(ang)
                table_im[g, u] = sin(ang)
        return
    for u in range(n_u):
        ang = sign * TWO_PI * samples[u] * step
        step_r = cos(ang)
        step_i = sin(ang)
        cur_r = 0.0
        cur_i = 0.0
        for g in range(n_g):
            if g % RENORM_EVERY == 0:
                ang = sign * TWO_PI * samples[u] * grid[g]
                cur_r = cos(ang)
                cur_i = sin(ang)
            else:
                tmp = cur_r * step_r - cur_i * step_i
                cur_i = cur_r * step_i + cur_i * step_r
                cur_r = tmp
            table_re[g, u] = cur_r
            table_im[g, u] = cur_i


def phase_surface(weights, f, t, taus, alphas):
    """S[i, j] = sum_u weights[u] * exp(2j*pi*(f[u]*taus[i] - t[u]*alphas[j]))."""
    w_arr = np.ascontiguousarray(weights, dtype=np.complex128)
    f_arr = np.ascontiguousarray(f, dtype=np.float64)
    t_arr = np.ascontiguousarray(t, dtype=np.float64)
    tau_arr = np.ascontiguousarray(taus, dtype=np.float64)
    alpha_arr = np.ascontiguousarray(alphas, dtype=np.float64)
    if f_arr.shape[0] != w_arr.shape[0] or t_arr.shape[0] != w_arr.shape[0]:
        raise ValueError("weights, f and t must have identical lengths")

    cdef double[::1] w_re = np.ascontiguousarray(w_arr.real)
    cdef double[::1] w_im = np.ascontiguousarray(w_arr.imag)
    cdef double[::1] fv = f_arr
    cdef double[::1] tv = t_arr
    cdef double[::1] tau = tau_arr
    cdef double[::1] alpha = alpha_arr
    cdef Py_ssize_t n_u = w_arr.shape[0]
    cdef Py_ssize_t n_tau = tau_arr.shape[0]
    cdef Py_ssize_t n_alpha = alpha_arr.shape[0]

    out = np.empty((n_tau, n_alpha), dtype=np.complex128)
    if n_tau == 0 or n_alpha == 0:
        return out
    if n_u == 0:
        out[:] = 0
        return out
    out_re_arr = np.empty((n_tau, n_alpha), dtype=np.float64)
    out_im_arr = np.empty((n_tau, n_alpha), dtype=np.float64)
    cdef double[:, ::1] out_re = out_re_arr
    cdef double[:, ::1] out_im = out_im_arr

    # delay phases (tau-major) and Doppler phases (alpha-major), planar layout
    pf_re_arr = np.empty((n_tau, n_u), dtype=np.float64)
    pf_im_arr = np.empty((n_tau, n_u), dtype=np.float64)
    pt_re_arr = np.empty((n_alpha, n_u), dtype=np.float64)
    pt_im_arr = np.empty((n_alpha, n_u), dtype=np.float64)
    cdef double[:, ::1] pf_re = pf_re_arr
    cdef double[:, ::1] pf_im = pf_im_arr
    cdef double[:, ::1] pt_re = pt_re_arr
    cdef double[:, ::1] pt_im = pt_im_arr

    cdef Py_ssize_t i0, i, u, rows
    cdef double br, bi

    with nogil:
        _phase_table(fv, tau, 1.0, pf_re, pf_im)
        _phase_table(tv, alpha, -1.0, pt_re, pt_im)
        # fold the weights into the delay phase planes in place
        for i in range(n_tau):
            for u in range(n_u):
                br = pf_re[i, u]
                bi = pf_im[i, u]
                pf_re[i, u] = w_re[u] * br - w_im[u] * bi
                pf_im[i, u] = w_re[u] * bi + w_im[u] * br
        for i0 in range(0, n_tau, _ROW_BLOCK):
            rows = min(_ROW_BLOCK, n_tau - i0)
            dd_surface_block(&pf_re[i0, 0], &pf_im[i0, 0], &pt_re[0, 0], &pt_im[0, 0],
                             rows, n_alpha, n_u, n_alpha,
                             &out_re[i0, 0], &out_im[i0, 0])

    out.real = out_re_arr
    out.imag = out_im_arr
    return out
