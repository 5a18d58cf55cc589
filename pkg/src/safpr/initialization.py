"""Weighted maximal-correlation initialisation.

The initial estimate is ``eta * v`` where ``eta = sqrt(mean(b**2))`` estimates
``||x||`` and ``v`` is the leading eigenvector of

    M = sum_{i in I} sqrt(b_i) a_i a_i' / ||a_i||^2

over the ``I`` measurements with the largest normalised amplitude
``b_i / ||a_i||``. ``M`` is only ever applied, never formed.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .measurement import MeasurementModel, Observation
from .numerics import ContractError, DomainError, dist_up_to_phase, sample_gaussian


class DegenerateSpectrumError(ArithmeticError):
    """The operator annihilated the power-iteration vector."""


@dataclass(frozen=True)
class InitConfig:
    """Initialisation parameters.

    ``truncation=None`` selects ``max(1, floor(3m/13))`` measurements.
    """

    truncation: int | None = None
    power_iters_max: int = 200
    power_tol: float = 1e-6

    def truncation_for(self, m: int) -> int:
        count = max(1, (3 * m) // 13) if self.truncation is None else int(self.truncation)
        if not 1 <= count <= m:
            raise DomainError(f"truncation count must lie in [1, {m}], got {count}")
        return count


def estimate_norm(obs) -> float:
    b = obs.b if isinstance(obs, Observation) else np.asarray(obs, dtype=np.float64)
    if b.size < 1:
        raise DomainError("empty observation")
    return float(np.sqrt(np.mean(b ** 2)))


def select_top_indices(obs, model: MeasurementModel, count: int) -> np.ndarray:
    """Indices of the ``count`` largest ``b_i / ||a_i||`` in ascending index order.

    Ties go to the lower index; rows with zero norm are never selected.
    """
    b = obs.b if isinstance(obs, Observation) else np.asarray(obs, dtype=np.float64)
    if b.shape != (model.m,):
        raise ContractError(f"observation has {b.size} entries, model has m={model.m}")
    if not 1 <= count <= model.m:
        raise DomainError(f"count must lie in [1, {model.m}], got {count}")
    norms = model.row_norms()
    valid = norms > 0
    ratio = np.full(model.m, -np.inf)
    ratio[valid] = b[valid] / norms[valid]
    order = np.argsort(-ratio, kind="stable")
    top = order[:min(count, int(valid.sum()))]
    return np.sort(top)


def canonical_phase(v):
    """Rotate ``v`` so that its largest-magnitude entry is real and positive."""
    i = int(np.argmax(np.abs(v)))
    p = v[i]
    if p == 0:
        return v
    return v * (np.conj(p) / abs(p))


def power_iteration(apply, v0, max_iter: int = 200, tol: float = 1e-6):
    """Power iteration for a Hermitian PSD operator.

    Stops once successive unit iterates are within ``tol`` of each other up
    to a global phase.

    Returns
    -------
    v : ndarray
        Unit-norm eigenvector estimate (phase canonicalised).
    eigval : float
        Rayleigh quotient ``<v, M v>``.
    iters : int
    converged : bool
    """
    v = np.asarray(v0)
    v = v / np.linalg.norm(v)
    converged = False
    iters = 0
    for iters in range(1, max_iter + 1):
        w = apply(v)
        nw = np.linalg.norm(w)
        if not np.isfinite(nw) or nw == 0:
            raise DegenerateSpectrumError("operator maps the iterate to zero; degenerate spectrum")
        w = w / nw
        step = dist_up_to_phase(w, v)
        v = w
        if step < tol:
            converged = True
            break
    v = canonical_phase(v)
    eigval = float(np.vdot(v, apply(v)).real)
    return v, eigval, iters, converged


def leading_eigenvector(apply, n: int, field: str, rng: np.random.Generator,
                        cfg: InitConfig = InitConfig(), start=None):
    """Unit leading eigenvector of a Hermitian PSD operator, from a random start."""
    v0 = sample_gaussian(n, field, rng) if start is None else np.asarray(start)
    v, _, _, _ = power_iteration(apply, v0, cfg.power_iters_max, cfg.power_tol)
    return v


def init_operator(model: MeasurementModel, obs, count: int):
    """Matrix-free ``v -> M v`` for the weighted correlation matrix."""
    b = obs.b if isinstance(obs, Observation) else np.asarray(obs, dtype=np.float64)
    idx = select_top_indices(b, model, count)
    norms = model.row_norms()
    w = np.zeros(model.m)
    w[idx] = np.sqrt(b[idx]) / norms[idx] ** 2

    def apply(v):
        return model.adjoint(w * model.forward(v))

    return apply


def initialize(model: MeasurementModel, obs, rng: np.random.Generator,
               cfg: InitConfig = InitConfig()):
    """Initial estimate ``z0 = eta * leading_eigenvector(M)``.

    ``eta`` is :func:`estimate_norm` times ``model.norm_scale`` (1 for dense
    Gaussian models, ``sqrt(n)`` for the unit-row CDP operator).
    """
    eta = estimate_norm(obs) * model.norm_scale
    if eta == 0:
        raise DegenerateSpectrumError("all observations are zero")
    apply = init_operator(model, obs, cfg.truncation_for(model.m))
    v = leading_eigenvector(apply, model.n, model.field, rng, cfg)
    return eta * v
