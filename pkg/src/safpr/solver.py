"""Gradient descent with Armijo backtracking (or a fixed step) on an amplitude objective."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .measurement import MeasurementModel, Observation
from .numerics import ContractError, DomainError, as_signal, nmse
from .objective import SAF, grad_from_u, loss_from_u

BACKTRACKING = "backtracking"
FIXED_STEP = "fixed_step"

MAX_ITERS = "max_iters"
GRAD_CONVERGED = "grad_converged"
NMSE_CONVERGED = "nmse_converged"
FAILED = "failed"

DEFAULT_MU = {"real": 4.0, "complex": 7.0}


@dataclass(frozen=True)
class SolverConfig:
    """Parameters of the descent loop.

    ``mu=None`` picks 4 for real and 7 for complex signals. A step from
    ``z`` uses ``mu * beta**s`` for the smallest ``s <= s_max`` meeting the
    Armijo condition with slope ``alpha``; when none does the ``s_max``
    step is taken anyway.
    """

    objective: object = SAF()
    mu: float | None = None
    alpha: float = 0.4
    beta: float = 0.2
    s_max: int = 2
    T: int = 5000
    mode: str = BACKTRACKING
    stop_grad_tol: float = 1e-12
    stop_nmse_tol: float | None = None

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise DomainError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not 0 < self.beta < 1:
            raise DomainError(f"beta must lie in (0, 1), got {self.beta}")
        if self.mu is not None and not self.mu > 0:
            raise DomainError(f"mu must be positive, got {self.mu}")
        if self.T < 1 or self.s_max < 0:
            raise DomainError("T must be >= 1 and s_max >= 0")
        if self.mode not in (BACKTRACKING, FIXED_STEP):
            raise DomainError(f"unknown mode {self.mode!r}")

    def step_for(self, field: str) -> float:
        return DEFAULT_MU[field] if self.mu is None else float(self.mu)


@dataclass
class SolverTrace:
    """Per-iterate record; entry ``t`` describes ``z_t``.

    ``step[t]``/``backtracks[t]``/``armijo[t]`` describe the update that
    produced ``z_t`` (zeros for ``t = 0``).
    """

    loss: list = field(default_factory=list)
    step: list = field(default_factory=list)
    backtracks: list = field(default_factory=list)
    armijo: list = field(default_factory=list)
    grad_norm: list = field(default_factory=list)
    nmse: list = field(default_factory=list)
    status: str = MAX_ITERS

    def record(self, loss, step, s, ok, gnorm, err):
        self.loss.append(loss)
        self.step.append(step)
        self.backtracks.append(s)
        self.armijo.append(ok)
        self.grad_norm.append(gnorm)
        self.nmse.append(err)

    @property
    def iterations(self) -> int:
        return len(self.loss) - 1

    def rows(self):
        for t in range(len(self.loss)):
            yield {"t": t, "loss": self.loss[t], "step": self.step[t],
                   "backtracks": self.backtracks[t], "armijo": self.armijo[t],
                   "grad_norm": self.grad_norm[t], "nmse": self.nmse[t]}


def backtrack_step(loss_at: Callable, z, g, mu: float, alpha: float = 0.4,
                   beta: float = 0.2, s_max: int = 2, loss_z: float | None = None):
    """Armijo backtracking along ``-g``.

    ``loss_at(z)`` may return a float or a ``(float, extra)`` pair; ``extra``
    of the accepted candidate is passed through so callers can reuse work.

    Returns ``(mu_t, z_next, loss_next, s, satisfied, extra)``.
    """
    def ev(p):
        out = loss_at(p)
        return out if isinstance(out, tuple) else (out, None)

    if loss_z is None:
        loss_z = ev(z)[0]
    g2 = float(np.vdot(g, g).real)
    s = 0
    while True:
        mu_t = mu * beta ** s
        cand = z - mu_t * g
        val, extra = ev(cand)
        ok = bool(np.isfinite(val) and val <= loss_z - alpha * mu_t * g2)
        if ok or s >= s_max:
            return mu_t, cand, val, s, ok, extra
        s += 1


def run(model: MeasurementModel, obs, cfg: SolverConfig, init, truth=None):
    """Descend from ``init``; return ``(z, trace)``.

    Stops after ``cfg.T`` updates, when ``||g|| <= stop_grad_tol * max(1, ||z||)``,
    or, with ``truth`` given, when ``nmse(z, truth) <= stop_nmse_tol``.
    A non-finite loss or iterate ends the run with status ``"failed"`` and
    returns the last finite iterate.
    """
    b = obs.b if isinstance(obs, Observation) else np.asarray(obs, dtype=np.float64)
    if b.shape != (model.m,):
        raise ContractError(f"observation has {b.size} entries, model has m={model.m}")
    z = as_signal(init, model.field)
    if z.shape != (model.n,):
        raise ContractError(f"initial point has {z.size} entries, model has n={model.n}")
    if truth is not None:
        truth = as_signal(truth, model.field)
    objective = cfg.objective
    # mu is quoted for rows with E||a_i||^2 = n; unit-row operators need n times more
    mu = cfg.step_for(model.field) * model.norm_scale ** 2

    def evaluate(p):
        u = model.forward(p)
        return loss_from_u(objective, u, b), u

    trace = SolverTrace()
    loss_z, u = evaluate(z)
    g = grad_from_u(objective, model, u, b)
    step, s, ok = 0.0, 0, True
    t = 0
    while True:
        gnorm = float(np.linalg.norm(g))
        err = nmse(z, truth) if truth is not None else None
        trace.record(loss_z, step, s, ok, gnorm, err)
        if not (np.isfinite(loss_z) and np.isfinite(gnorm)):
            trace.status = FAILED
            break
        if err is not None and cfg.stop_nmse_tol is not None and err <= cfg.stop_nmse_tol:
            trace.status = NMSE_CONVERGED
            break
        if gnorm <= cfg.stop_grad_tol * max(1.0, float(np.linalg.norm(z))):
            trace.status = GRAD_CONVERGED
            break
        if t >= cfg.T:
            trace.status = MAX_ITERS
            break
        if cfg.mode == FIXED_STEP:
            z_next = z - mu * g
            loss_next, u = evaluate(z_next)
            step, s = mu, 0
            ok = bool(loss_next <= loss_z - cfg.alpha * mu * gnorm ** 2)
        else:
            step, z_next, loss_next, s, ok, u = backtrack_step(
                evaluate, z, g, mu, cfg.alpha, cfg.beta, cfg.s_max, loss_z)
        if not np.all(np.isfinite(z_next)) or not np.isfinite(loss_next):
            trace.record(loss_next, step, s, ok, float("nan"), None)
            trace.status = FAILED
            break
        z, loss_z = z_next, loss_next
        g = grad_from_u(objective, model, u, b)
        t += 1
    return z, trace


def solve(model: MeasurementModel, obs, cfg: SolverConfig = SolverConfig(),
          rng: np.random.Generator | None = None, init_cfg=None, truth=None):
    """Initialise with the weighted maximal-correlation method, then :func:`run`."""
    from .initialization import InitConfig, initialize

    if rng is None:
        rng = np.random.default_rng(0)
    z0 = initialize(model, obs, rng, init_cfg or InitConfig())
    return run(model, obs, cfg, z0, truth=truth)
