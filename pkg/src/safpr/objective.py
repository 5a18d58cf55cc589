"""Amplitude-flow objectives: the smooth SAF loss and the AF/WF baselines.

Every objective is written as a function of the amplitudes ``|u|`` with
``u = forward(z)``. Its gradient is ``adjoint(c * u) / m`` for a real
per-measurement weight ``c``, which covers real and complex signals and
dense and matrix-free models alike. For complex signals this is the
gradient with respect to ``(Re z, Im z)`` packed as a complex vector, i.e.
twice the Wirtinger derivative with respect to ``conj(z)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .measurement import MeasurementModel, Observation
from .numerics import ContractError, DomainError


def smooth_abs(x, eps, k: float = 4.0):
    """``(|x|^k + eps^k)^(1/k)``, evaluated without overflow."""
    x = np.abs(np.asarray(x, dtype=np.float64))
    eps = np.abs(np.asarray(eps, dtype=np.float64))
    s = np.maximum(x, eps)
    with np.errstate(invalid="ignore", divide="ignore"):
        r = s * ((x / s) ** k + (eps / s) ** k) ** (1.0 / k)
    r = np.where(s > 0, r, 0.0)
    return r[()] if r.ndim == 0 else r


def saf_weight(u_abs, b, k: float = 4.0, gamma: float = 1.0):
    """Real weight ``c`` such that the per-measurement SAF gradient is ``c * u * a_i``.

    ``c = (g(|u|) - g(b)) (|u|^k + (gamma b)^k)^(1/k - 1) |u|^(k-2)``, rewritten
    as ``(1 - g(b)/r) (|u|/r)^(k-2)`` with ``r = g(|u|)`` so that every factor
    stays bounded. Returns 0 where ``r == 0``.
    """
    u_abs = np.asarray(u_abs, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    eps = gamma * b
    r = smooth_abs(u_abs, eps, k)
    gb = smooth_abs(b, eps, k)
    pos = r > 0
    rs = np.where(pos, r, 1.0)
    c = (1.0 - gb / rs) * (u_abs / rs) ** (k - 2.0)
    c = np.where(pos, c, 0.0)
    return c[()] if c.ndim == 0 else c


def kernel(x, b):
    """Scalar SAF gradient kernel for real data with ``k=4, gamma=1``.

    ``f(x, b) = ((x^4 + b^4)^(1/4) - 2^(1/4) b) (x^4 + b^4)^(-3/4) x^3``
    """
    x = np.asarray(x, dtype=np.float64)
    return saf_weight(np.abs(x), b, 4.0, 1.0) * x


@dataclass(frozen=True)
class SAF:
    """Smooth amplitude loss with exponent ``k`` and smoothing scale ``gamma``."""

    k: float = 4.0
    gamma: float = 1.0
    name = "saf"

    def __post_init__(self):
        if self.k < 2:
            raise DomainError(f"SAF exponent k must be >= 2, got {self.k}")
        if self.gamma < 0:
            raise DomainError(f"SAF gamma must be >= 0, got {self.gamma}")

    def loss_terms(self, u_abs, b):
        eps = self.gamma * b
        return (smooth_abs(u_abs, eps, self.k) - smooth_abs(b, eps, self.k)) ** 2

    def weights(self, u_abs, b):
        return saf_weight(u_abs, b, self.k, self.gamma)


@dataclass(frozen=True)
class AF:
    """Amplitude loss ``(|u| - b)^2``; weight 0 is used where ``u = 0``."""

    name = "af"

    def loss_terms(self, u_abs, b):
        return (u_abs - b) ** 2

    def weights(self, u_abs, b):
        pos = u_abs > 0
        return np.where(pos, 1.0 - b / np.where(pos, u_abs, 1.0), 0.0)


@dataclass(frozen=True)
class WF:
    """Intensity loss ``(|u|^2 - b^2)^2``."""

    name = "wf"

    def loss_terms(self, u_abs, b):
        return (u_abs ** 2 - b ** 2) ** 2

    def weights(self, u_abs, b):
        return 2.0 * (u_abs ** 2 - b ** 2)


OBJECTIVES = {"saf": SAF, "af": AF, "wf": WF}


def make_objective(name: str, k: float = 4.0, gamma: float = 1.0):
    name = name.lower()
    if name == "saf":
        return SAF(k=k, gamma=gamma)
    if name in OBJECTIVES:
        return OBJECTIVES[name]()
    raise ValueError(f"unknown objective {name!r}; expected one of {sorted(OBJECTIVES)}")


def _b(model: MeasurementModel, obs):
    b = obs.b if isinstance(obs, Observation) else np.asarray(obs, dtype=np.float64)
    if b.shape != (model.m,):
        raise ContractError(f"observation has {b.shape[0] if b.ndim else 0} entries, model has m={model.m}")
    return b


def loss_from_u(objective, u, b) -> float:
    # overflow shows up as an inf loss, which the solver reports as a failure
    with np.errstate(over="ignore", invalid="ignore"):
        return float(np.sum(objective.loss_terms(np.abs(u), b)) / (2 * b.size))


def grad_from_u(objective, model: MeasurementModel, u, b):
    c = objective.weights(np.abs(u), b)
    return model.adjoint(c * u) / b.size


def loss(objective, model: MeasurementModel, obs, z) -> float:
    return loss_from_u(objective, model.forward(z), _b(model, obs))


def grad(objective, model: MeasurementModel, obs, z):
    return grad_from_u(objective, model, model.forward(z), _b(model, obs))


def loss_and_grad(objective, model: MeasurementModel, obs, z):
    b = _b(model, obs)
    u = model.forward(z)
    return loss_from_u(objective, u, b), grad_from_u(objective, model, u, b)


def saf_loss(model, obs, z, params: SAF = SAF()):
    return loss(params, model, obs, z)


def saf_grad(model, obs, z, params: SAF = SAF()):
    return grad(params, model, obs, z)


def af_loss(model, obs, z):
    return loss(AF(), model, obs, z)


def af_grad(model, obs, z):
    return grad(AF(), model, obs, z)


def wf_loss(model, obs, z):
    return loss(WF(), model, obs, z)


def wf_grad(model, obs, z):
    return grad(WF(), model, obs, z)


def verify_kernel_properties(samples: int = 100_000, grid: int = 10_000,
                             rng: np.random.Generator | None = None, tol: float = 1e-12):
    """Numerically check the four structural properties of :func:`kernel`.

    1. oddness ``f(-x, b) = -f(x, b)``
    2. ``f(+-b + x, b) x >= 0`` for ``x`` in ``[-b, b]``
    3. ``f(1 + x, 1) x >= 0.18 x^2`` on a grid over ``[-0.2, 0.2]``
       (both the ``+b`` and ``-b`` branches)
    4. ``|f(+-b + x, b) / x| <= 1``

    Returns a dict mapping property number to ``{"passed", "margin"}`` where
    ``margin`` is the worst-case slack (negative means violated).
    """
    if samples < 1:
        raise DomainError("samples must be >= 1")
    if rng is None:
        rng = np.random.default_rng(0)
    report = {}

    b = np.exp(rng.uniform(-5, 5, samples))
    x = rng.standard_normal(samples) * b * np.exp(rng.uniform(-3, 3, samples))
    odd = np.max(np.abs(kernel(x, b) + kernel(-x, b)))
    report[1] = {"passed": bool(odd < tol), "margin": float(tol - odd)}

    t = rng.uniform(-1, 1, samples) * b
    p2 = np.minimum(kernel(b + t, b) * t, kernel(-b + t, b) * t)
    report[2] = {"passed": bool(p2.min() >= -tol), "margin": float(p2.min())}

    xs = np.linspace(-0.2, 0.2, grid)
    p3 = np.minimum(kernel(1 + xs, 1.0) * xs, kernel(-1 + xs, 1.0) * xs) - 0.18 * xs ** 2
    report[3] = {"passed": bool(p3.min() >= -tol), "margin": float(p3.min())}

    d = rng.standard_normal(samples) * b * np.exp(rng.uniform(-6, 2, samples))
    d = np.where(d == 0, b, d)
    ratio = np.maximum(np.abs(kernel(b + d, b) / d), np.abs(kernel(-b + d, b) / d))
    report[4] = {"passed": bool(ratio.max() <= 1 + tol), "margin": float(1 + tol - ratio.max())}
    return report
