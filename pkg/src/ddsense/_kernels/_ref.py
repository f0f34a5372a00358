"""Pure-NumPy reference implementation of the hot kernel.

Kept in lockstep with the compiled version in ``_core.pyx``; the test suite
asserts both produce the same surfaces.
"""

import numpy as np


def phase_surface(weights, f, t, taus, alphas):
    """Weighted complex-exponential sum over a delay-Doppler grid.

    Computes ``S[i, j] = sum_u weights[u] * exp(2j*pi*(f[u]*taus[i] - t[u]*alphas[j]))``
    for every pair of the requested delay and Doppler values.  This single
    primitive backs both the coarse peak search (weights = conj(x) * y) and
    the transmit-grid ambiguity surface (weights = |x|**2).

    The evaluation is separable: two phase tables and one matrix product
    instead of a triple loop.
    """
    weights = np.ascontiguousarray(weights, dtype=np.complex128)
    f = np.ascontiguousarray(f, dtype=np.float64)
    t = np.ascontiguousarray(t, dtype=np.float64)
    taus = np.ascontiguousarray(taus, dtype=np.float64)
    alphas = np.ascontiguousarray(alphas, dtype=np.float64)
    if f.shape != weights.shape or t.shape != weights.shape:
        raise ValueError("weights, f and t must have identical lengths")
    delay_phases = np.exp(2j * np.pi * np.outer(taus, f))
    doppler_phases = np.exp(-2j * np.pi * np.outer(t, alphas))
    return (delay_phases * weights) @ doppler_phases
