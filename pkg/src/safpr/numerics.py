"""Field handling, phase-invariant metrics and reproducible random streams."""
from __future__ import annotations

import numpy as np

REAL = "real"
COMPLEX = "complex"
FIELDS = (REAL, COMPLEX)


class ContractError(ValueError):
    """Raised on dimension or field mismatch between arguments."""


class DomainError(ValueError):
    """Raised when an argument lies outside the domain of an operation."""


def check_field(field: str) -> str:
    if field not in FIELDS:
        raise ContractError(f"unknown field {field!r}; expected one of {FIELDS}")
    return field


def field_of(x) -> str:
    return COMPLEX if np.iscomplexobj(x) else REAL


def dtype_of(field: str):
    return np.complex128 if check_field(field) == COMPLEX else np.float64


def as_signal(x, field: str | None = None) -> np.ndarray:
    """Validate and return ``x`` as a finite 1-D float64/complex128 array.

    If ``field`` is given, a complex input for a real field is rejected;
    real input for a complex field is promoted.
    """
    x = np.asarray(x)
    if x.ndim != 1 or x.size < 1:
        raise ContractError(f"signal must be a non-empty 1-D vector, got shape {x.shape}")
    if field is None:
        field = field_of(x)
    elif check_field(field) == REAL and np.iscomplexobj(x):
        raise ContractError("complex vector supplied for a real-field problem")
    x = x.astype(dtype_of(field), copy=False)
    if not np.all(np.isfinite(x)):
        raise DomainError("signal contains NaN or Inf")
    return x


def _check_pair(u, v):
    u = np.asarray(u)
    v = np.asarray(v)
    if u.shape != v.shape or u.ndim != 1:
        raise ContractError(f"dimension mismatch: {u.shape} vs {v.shape}")
    if np.iscomplexobj(u) != np.iscomplexobj(v):
        raise ContractError("field mismatch: one vector is real, the other complex")
    return u, v


def dist_up_to_phase(u, v) -> float:
    """Distance between ``u`` and ``v`` modulo a global phase (sign for real data)."""
    u, v = _check_pair(u, v)
    if np.iscomplexobj(u):
        # rotate v onto u and take the norm directly; the expanded form
        # sqrt(|u|^2 + |v|^2 - 2|<u,v>|) cancels badly near zero
        c = np.vdot(v, u)
        rot = c / abs(c) if abs(c) > 0 else 1.0
        return float(np.linalg.norm(u - rot * v))
    return float(min(np.linalg.norm(u - v), np.linalg.norm(u + v)))


def align_phase(z, x) -> np.ndarray:
    """Return ``e^{j theta} z`` with theta chosen to minimise the distance to ``x``."""
    z, x = _check_pair(z, x)
    c = np.vdot(z, x)
    if np.iscomplexobj(z):
        return z * (c / abs(c)) if abs(c) > 0 else z.copy()
    return -z if c < 0 else z.copy()


def nmse(z, x) -> float:
    """Normalised squared error ``dist(z, x)**2 / ||x||**2``."""
    nx2 = float(np.vdot(x, x).real)
    if nx2 == 0.0:
        raise DomainError("nmse is undefined for a zero reference signal")
    return dist_up_to_phase(z, x) ** 2 / nx2


def make_rng(seed: int, stream_id: int = 0) -> np.random.Generator:
    """Independent generator keyed by ``(seed, stream_id)``.

    The stream is derived from a ``SeedSequence`` spawn key, so trials keyed
    by their own stream id draw the same numbers regardless of how or where
    they are scheduled.
    """
    ss = np.random.SeedSequence(int(seed) & 0xFFFFFFFFFFFFFFFF,
                                spawn_key=(int(stream_id) & 0xFFFFFFFFFFFFFFFF,))
    return np.random.Generator(np.random.PCG64(ss))


def sample_gaussian(shape, field: str, rng: np.random.Generator) -> np.ndarray:
    """I.i.d. standard Gaussian entries; complex entries have unit total variance."""
    if check_field(field) == REAL:
        return rng.standard_normal(shape)
    s = np.sqrt(0.5)
    return s * rng.standard_normal(shape) + 1j * s * rng.standard_normal(shape)


def sample_gaussian_vector(n: int, field: str, rng: np.random.Generator) -> np.ndarray:
    if n < 1:
        raise DomainError("n must be >= 1")
    return sample_gaussian(int(n), field, rng)
