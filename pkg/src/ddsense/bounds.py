"""Cramer-Rao lower bounds for the weighted sparse-grid signal model.

The bound is conditional on the realized transmit estimate: for circular
white Gaussian noise the Fisher information is (2 / noise_var) * Re(J^H J)
with J the analytic model Jacobian, in the parameter order
(tau_1..tau_P, alpha_1..alpha_P, Re gamma_1..P, Im gamma_1..P).
"""

import numpy as np

from .errors import SingularModelError
from .model import jacobian

_MAX_CONDITION = 1e12


def fisher_information(paths, x_hat, mask, axes, noise_var: float) -> np.ndarray:
    """Fisher information matrix (4P x 4P, symmetric positive semidefinite)."""
    jac = jacobian(paths, x_hat, mask, axes)
    fim = (2.0 / noise_var) * (jac.conj().T @ jac).real
    return 0.5 * (fim + fim.T)


def crb(paths, x_hat, mask, axes, noise_var: float) -> np.ndarray:
    """Per-parameter variance bounds: the diagonal of the inverse information.

    Inverted through an eigendecomposition so the conditioning can be
    checked; coinciding paths or a degenerate mask (fewer than two distinct
    frequencies or times) make the information singular.
    """
    fim = fisher_information(paths, x_hat, mask, axes, noise_var)
    eigvals, eigvecs = np.linalg.eigh(fim)
    if eigvals[-1] <= 0.0 or eigvals[0] <= 0.0 or eigvals[-1] / eigvals[0] > _MAX_CONDITION:
        raise SingularModelError(
            "Fisher information is singular or too ill-conditioned to invert "
            f"(eigenvalue range [{eigvals[0]:.3g}, {eigvals[-1]:.3g}])"
        )
    inv_diag = (eigvecs ** 2 / eigvals).sum(axis=1)
    return inv_diag
