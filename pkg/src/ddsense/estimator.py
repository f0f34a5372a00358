"""Model-based joint delay-Doppler estimator.

Pipeline per path: coarse peak search of the weighted delay-Doppler
correlation surface on the current residual, single-path damped Gauss-Newton
(Levenberg-Marquardt) refinement, joint least-squares re-estimation of all
path weights, then subtraction of the modeled contribution (successive
interference cancellation).  Optionally finishes with a joint refinement of
all nonlinear parameters.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .channel import Observation, PathSet, wrap_delay, wrap_doppler
from .errors import ConfigurationError, OptimizationError, SingularModelError
from .model import (SamplingAxes, jacobian, signal_model, steering,
                    steering_matrix, used_axis_samples)

_LAMBDA_CAP = 1e12
_DUPLICATE_TOL = 1e-9


@dataclass
class EstimatorConfig:
    """Knobs of the iterative estimator.

    ``n_paths`` is the known model order.  ``residual_threshold``, when set,
    stops the path loop early once the residual energy falls below the given
    fraction of the observation energy.  ``final_joint_refine`` enables a
    joint Levenberg-Marquardt pass over all paths after the cancellation
    loop.
    """

    n_paths: int = 3
    coarse_oversampling: int = 4
    lm_max_iters: int = 50
    lm_tol: float = 1e-10
    lm_lambda0: float = 1e-2
    lm_lambda_up: float = 10.0
    lm_lambda_down: float = 0.3
    residual_threshold: float | None = None
    final_joint_refine: bool = False

    def __post_init__(self):
        if self.n_paths < 1:
            raise ConfigurationError("n_paths must be >= 1")
        if self.coarse_oversampling < 1:
            raise ConfigurationError("coarse_oversampling must be >= 1")
        if self.lm_max_iters < 1 or self.lm_tol <= 0 or self.lm_lambda0 <= 0:
            raise ConfigurationError("LM iteration limits and tolerances must be positive")
        if self.lm_lambda_up <= 1.0 or not 0.0 < self.lm_lambda_down < 1.0:
            raise ConfigurationError("damping factors must satisfy up > 1 and 0 < down < 1")
        if self.residual_threshold is not None and self.residual_threshold <= 0:
            raise ConfigurationError("residual_threshold must be positive when set")


@dataclass
class EstimationReport:
    """Result of a full estimation run.

    ``paths`` is sorted by descending weight magnitude; ``sic_order[i]`` gives
    the cancellation iteration (0-based) that produced reported path i.
    ``residual_energy`` holds the residual energy after each iteration's joint
    weight re-fit (plus one final entry when the joint refinement ran) and is
    non-increasing.  ``cost_trace`` and ``converged`` are indexed by
    cancellation iteration, not by the sorted path order.
    """

    paths: PathSet
    residual_energy: np.ndarray
    cost_trace: list
    converged: list
    sic_order: np.ndarray
    joint_cost_trace: np.ndarray | None = None
    joint_converged: bool | None = None


def spreading_function(obs: Observation, tau: float, alpha: float) -> complex:
    """Delay-Doppler correlation of the weighted model with the observation.

    Inner product of ``x_hat * steering(tau, alpha)`` (conjugated) with the
    received samples.
    """
    axes = SamplingAxes.for_mask(obs.mask)
    a = steering(tau, alpha, obs.mask, axes)
    return complex(np.vdot(obs.x_hat * a, obs.y))


def coarse_grids(n_subcarriers: int, n_symbols: int, oversampling: int):
    """Regular search grids covering tau in (0, 1] and alpha in (-0.5, 0.5]."""
    n_tau = oversampling * n_subcarriers
    n_alpha = oversampling * n_symbols
    taus = (np.arange(n_tau) + 1.0) / n_tau
    alphas = (np.arange(n_alpha) + 1.0) / n_alpha - 0.5
    return taus, alphas


def spreading_surface(obs: Observation, residual: np.ndarray, taus, alphas) -> np.ndarray:
    """Correlation surface of the residual over explicit delay/Doppler grids."""
    axes = SamplingAxes.for_mask(obs.mask)
    f_u, t_u = used_axis_samples(obs.mask, axes)
    weights = np.conj(obs.x_hat) * residual
    return _kernels.phase_surface(weights, f_u, t_u, taus, alphas)


def coarse_search(obs: Observation, residual: np.ndarray, cfg: EstimatorConfig):
    """Argmax of the correlation magnitude on a regular oversampled grid.

    Ties resolve to the smallest delay, then the smallest Doppler (the
    surface is laid out delay-major, so the first flat argmax wins).
    """
    residual = np.asarray(residual, dtype=np.complex128)
    if residual.shape != (obs.mask.n_used,):
        raise ConfigurationError("residual length must match the mask")
    taus, alphas = coarse_grids(obs.mask.n_subcarriers, obs.mask.n_symbols,
                                cfg.coarse_oversampling)
    surface = np.abs(spreading_surface(obs, residual, taus, alphas))
    i, j = np.unravel_index(int(np.argmax(surface)), surface.shape)
    return float(taus[i]), float(alphas[j])


def blue_weights(obs: Observation, taus, alphas) -> np.ndarray:
    """Best linear unbiased estimate of the path weights at fixed (tau, alpha).

    With white noise the covariance cancels, so this is a plain least-squares
    solve of ``diag(x_hat) A gamma = y`` via an SVD factorization.
    """
    taus = np.atleast_1d(np.asarray(taus, dtype=np.float64))
    alphas = np.atleast_1d(np.asarray(alphas, dtype=np.float64))
    if taus.size < 1 or taus.size != alphas.size:
        raise ConfigurationError("need matching, non-empty tau/alpha vectors")
    axes = SamplingAxes.for_mask(obs.mask)
    z = obs.x_hat[:, None] * steering_matrix(taus, alphas, obs.mask, axes)
    solution, _, rank, _ = np.linalg.lstsq(z, obs.y, rcond=None)
    if rank < taus.size:
        for i in range(taus.size):
            for j in range(i + 1, taus.size):
                d_tau = abs(wrap_doppler(taus[i] - taus[j]))
                d_alpha = abs(wrap_doppler(alphas[i] - alphas[j]))
                if d_tau < _DUPLICATE_TOL and d_alpha < _DUPLICATE_TOL:
                    raise SingularModelError(
                        f"steering columns for paths {i} and {j} coincide "
                        f"(tau={taus[i]:.6g}, alpha={alphas[i]:.6g})"
                    )
        raise SingularModelError("weight design matrix is rank deficient")
    return solution


def _pack(paths: PathSet) -> np.ndarray:
    return np.concatenate([paths.taus, paths.alphas, paths.gammas.real, paths.gammas.imag])


def _unpack(theta: np.ndarray, p: int) -> PathSet:
    return PathSet(
        taus=wrap_delay(theta[0:p]),
        alphas=wrap_doppler(theta[p:2 * p]),
        gammas=theta[2 * p:3 * p] + 1j * theta[3 * p:4 * p],
    )


def _lm_minimize(target, x_hat, mask, axes, paths0: PathSet, noise_var, cfg: EstimatorConfig):
    """Damped Gauss-Newton descent of ||target - s(paths)||^2 / noise_var.

    Fisher-scoring normal equations with Marquardt diagonal damping; the
    damping factor grows on rejected steps and shrinks on accepted ones, so
    the accepted-cost sequence is non-increasing.  Parameters wrap back into
    their windows after every step.  Returns (paths, accepted costs,
    converged flag).
    """
    p = paths0.n_paths
    theta = _pack(paths0)
    paths = _unpack(theta, p)

    def cost_of(pp):
        r = target - signal_model(pp, x_hat, mask, axes)
        return float(np.vdot(r, r).real) / noise_var, r

    cost, resid = cost_of(paths)
    costs = [cost]
    if not np.isfinite(cost):
        raise OptimizationError("non-finite cost at the initial point", trace=np.array(costs))
    lam = cfg.lm_lambda0
    converged = False
    for _ in range(cfg.lm_max_iters):
        jac = jacobian(paths, x_hat, mask, axes)
        grad = (jac.conj().T @ resid).real
        hess = (jac.conj().T @ jac).real
        damp = np.diag(hess).copy()
        floor = max(damp.max(), 1.0) * 1e-15
        np.maximum(damp, floor, out=damp)
        try:
            step = np.linalg.solve(hess + lam * np.diag(damp), grad)
        except np.linalg.LinAlgError as exc:
            raise OptimizationError(f"normal equations are singular: {exc}",
                                    trace=np.array(costs)) from exc
        trial_theta = theta + step
        trial = _unpack(trial_theta, p)
        trial_cost, trial_resid = cost_of(trial)
        if not np.isfinite(trial_cost):
            raise OptimizationError("non-finite cost during refinement", trace=np.array(costs))
        if trial_cost <= cost:
            theta, paths, cost, resid = trial_theta, trial, trial_cost, trial_resid
            costs.append(cost)
            lam = max(lam * cfg.lm_lambda_down, 1e-30)
            if np.linalg.norm(step) < cfg.lm_tol * (1.0 + np.linalg.norm(theta)):
                converged = True
                break
        else:
            lam *= cfg.lm_lambda_up
            if lam > _LAMBDA_CAP:
                break
    return paths, np.asarray(costs), converged


def lm_refine(obs: Observation, residual_base: np.ndarray, path_init, cfg: EstimatorConfig):
    """Refine a single path against ``residual_base``.

    ``path_init`` is a (tau, alpha, gamma) triple; returns the refined triple,
    the accepted-cost trace and a convergence flag.
    """
    tau0, alpha0, gamma0 = path_init
    axes = SamplingAxes.for_mask(obs.mask)
    start = PathSet(taus=[wrap_delay(tau0)], alphas=[wrap_doppler(alpha0)], gammas=[gamma0])
    paths, costs, converged = _lm_minimize(
        np.asarray(residual_base, dtype=np.complex128), obs.x_hat, obs.mask, axes,
        start, obs.noise_var, cfg,
    )
    refined = (float(paths.taus[0]), float(paths.alphas[0]), complex(paths.gammas[0]))
    return refined, costs, converged


def estimate(obs: Observation, cfg: EstimatorConfig) -> EstimationReport:
    """Full successive-cancellation estimation of ``cfg.n_paths`` paths."""
    axes = SamplingAxes.for_mask(obs.mask)
    y = obs.y
    y_energy = float(np.vdot(y, y).real)
    residual = y.copy()
    taus: list = []
    alphas: list = []
    gammas = np.empty(0, dtype=np.complex128)
    energies = []
    traces = []
    converged_flags = []

    for p in range(cfg.n_paths):
        tau0, alpha0 = coarse_search(obs, residual, cfg)
        a0 = obs.x_hat * steering(tau0, alpha0, obs.mask, axes)
        denom = float(np.vdot(a0, a0).real)
        gamma0 = complex(np.vdot(a0, residual)) / denom if denom > 0 else 0j
        try:
            (tau, alpha, _gamma), costs, ok = lm_refine(obs, residual, (tau0, alpha0, gamma0), cfg)
            taus.append(tau)
            alphas.append(alpha)
            gammas = blue_weights(obs, taus, alphas)
        except (SingularModelError, OptimizationError) as exc:
            exc.args = (f"while estimating path {p + 1}: {exc.args[0]}",) + exc.args[1:]
            raise
        traces.append(costs)
        converged_flags.append(ok)
        current = PathSet(taus=taus, alphas=alphas, gammas=gammas)
        residual = y - signal_model(current, obs.x_hat, obs.mask, axes)
        energies.append(float(np.vdot(residual, residual).real))
        if cfg.residual_threshold is not None and energies[-1] <= cfg.residual_threshold * y_energy:
            break

    paths = PathSet(taus=taus, alphas=alphas, gammas=gammas)
    joint_trace = None
    joint_converged = None
    if cfg.final_joint_refine:
        try:
            paths, joint_trace, joint_converged = _lm_minimize(
                y, obs.x_hat, obs.mask, axes, paths, obs.noise_var, cfg)
            gammas = blue_weights(obs, paths.taus, paths.alphas)
        except (SingularModelError, OptimizationError) as exc:
            exc.args = (f"during joint refinement: {exc.args[0]}",) + exc.args[1:]
            raise
        paths = PathSet(taus=paths.taus, alphas=paths.alphas, gammas=gammas)
        residual = y - signal_model(paths, obs.x_hat, obs.mask, axes)
        energies.append(float(np.vdot(residual, residual).real))

    order = np.argsort(-np.abs(paths.gammas), kind="stable")
    report = EstimationReport(
        paths=PathSet(paths.taus[order], paths.alphas[order], paths.gammas[order]),
        residual_energy=np.asarray(energies),
        cost_trace=traces,
        converged=converged_flags,
        sic_order=order,
        joint_cost_trace=joint_trace,
        joint_converged=joint_converged,
    )
    return report
