"""Measurement ensembles: dense Gaussian matrices and coded diffraction patterns.

Both models expose the same ``forward``/``adjoint`` pair. ``forward(z)[i]``
is the inner product ``<a_i, z> = a_i' z`` and ``adjoint`` is the exact
adjoint of ``forward`` with respect to the (real part of the) inner product
of the signal field.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .numerics import (COMPLEX, REAL, ContractError, DomainError, as_signal,
                       check_field, sample_gaussian)

MASK_SYMBOLS = np.array([1.0, -1.0, 1j, -1j])


class MeasurementModel:
    """Common interface for sensing operators ``C^n -> C^m`` (or ``R^n -> .``)."""

    m: int
    n: int
    field: str

    def forward(self, z):
        raise NotImplementedError

    def adjoint(self, w):
        raise NotImplementedError

    def row_norms(self) -> np.ndarray:
        raise NotImplementedError

    @property
    def norm_scale(self) -> float:
        """Factor turning ``sqrt(mean(b**2))`` into an estimate of ``||x||``."""
        return 1.0

    def _check_signal(self, z):
        z = np.asarray(z)
        if z.shape != (self.n,):
            raise ContractError(f"signal has shape {z.shape}, model expects ({self.n},)")
        return as_signal(z, self.field)

    def _check_meas(self, w):
        w = np.asarray(w)
        if w.shape != (self.m,):
            raise ContractError(f"measurement vector has shape {w.shape}, model expects ({self.m},)")
        return w


class DenseModel(MeasurementModel):
    """Explicit ``m x n`` matrix whose ``i``-th row is ``a_i'``."""

    def __init__(self, A, field: str | None = None):
        A = np.asarray(A)
        if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1:
            raise ContractError(f"sensing matrix must be 2-D and non-empty, got {A.shape}")
        if field is None:
            field = COMPLEX if np.iscomplexobj(A) else REAL
        check_field(field)
        if field == REAL and np.iscomplexobj(A):
            raise ContractError("complex matrix supplied for a real-field model")
        A = A.astype(np.complex128 if field == COMPLEX else np.float64)
        if not np.all(np.isfinite(A)):
            raise DomainError("sensing matrix contains NaN or Inf")
        A.setflags(write=False)
        self.A = A
        self.m, self.n = A.shape
        self.field = field

    def forward(self, z):
        return self.A @ self._check_signal(z)

    def adjoint(self, w):
        w = self._check_meas(w)
        if self.field == REAL:
            if np.iscomplexobj(w):
                raise ContractError("complex measurement vector for a real-field model")
            return self.A.T @ w
        return self.A.conj().T @ w

    def row_norms(self):
        return np.linalg.norm(self.A, axis=1)

    def __repr__(self):
        return f"DenseModel(m={self.m}, n={self.n}, field={self.field!r})"


class CDPModel(MeasurementModel):
    """Coded diffraction patterns ``|F D_k x|`` with a unitary DFT.

    Parameters
    ----------
    masks : array of shape (K, n)
        Unit-modulus modulation patterns.
    shape : tuple, optional
        Signal shape. ``(n,)`` uses a 1-D DFT over the vector; ``(h, w)``
        applies a 2-D DFT to the row-major reshaped image.
    field : {'complex', 'real'}
        Field of the unknown signal. Measurements are always complex. For a
        real signal the adjoint returns the real part, which is the adjoint
        under the real inner product ``Re <u, v>``.
    """

    def __init__(self, masks, shape=None, field: str = COMPLEX):
        masks = np.asarray(masks, dtype=np.complex128)
        if masks.ndim != 2 or masks.shape[0] < 1 or masks.shape[1] < 1:
            raise ContractError(f"masks must have shape (K, n), got {masks.shape}")
        K, n = masks.shape
        if shape is None:
            shape = (n,)
        shape = tuple(int(s) for s in shape)
        if int(np.prod(shape)) != n or len(shape) not in (1, 2):
            raise ContractError(f"signal shape {shape} incompatible with mask length {n}")
        if not np.allclose(np.abs(masks), 1.0, rtol=0, atol=1e-12):
            raise DomainError("mask entries must have unit modulus")
        masks.setflags(write=False)
        self.masks = masks
        self.K = K
        self.n = n
        self.m = K * n
        self.shape = shape
        self.field = check_field(field)
        self._axes = tuple(range(1, 1 + len(shape)))
        self._mshape = masks.reshape((K,) + shape)

    def forward(self, z):
        z = self._check_signal(z).reshape(self.shape)
        y = np.fft.fftn(self._mshape * z, axes=self._axes, norm="ortho")
        return y.reshape(-1)

    def adjoint(self, w):
        w = self._check_meas(w).reshape((self.K,) + self.shape)
        v = np.fft.ifftn(w, axes=self._axes, norm="ortho")
        out = np.sum(self._mshape.conj() * v, axis=0).reshape(-1)
        return out.real.copy() if self.field == REAL else out

    def row_norms(self):
        return np.ones(self.m)

    @property
    def norm_scale(self):
        # unit-norm rows: sum(b**2) = K ||x||**2 exactly
        return float(np.sqrt(self.n))

    def __repr__(self):
        return f"CDPModel(K={self.K}, shape={self.shape}, field={self.field!r})"


@dataclass(frozen=True)
class Observation:
    """Nonnegative amplitudes ``b`` plus the noise that produced them.

    ``snr_db`` and ``sigma2`` are ``None`` for noiseless data.
    """

    b: np.ndarray
    snr_db: float | None = None
    sigma2: float | None = None
    m: int = dc_field(init=False)

    def __post_init__(self):
        b = np.asarray(self.b, dtype=np.float64)
        if b.ndim != 1 or b.size < 1:
            raise ContractError(f"observation must be a non-empty 1-D vector, got {b.shape}")
        if not np.all(np.isfinite(b)) or np.any(b < 0):
            raise DomainError("observations must be finite and nonnegative")
        b.setflags(write=False)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "m", b.size)

    @property
    def noisy(self) -> bool:
        return self.snr_db is not None


def build_gaussian_model(m: int, n: int, field: str, rng: np.random.Generator) -> DenseModel:
    """Dense model with i.i.d. (real or circular complex) standard Gaussian rows."""
    if m < 1 or n < 1:
        raise DomainError("m and n must be >= 1")
    return DenseModel(sample_gaussian((int(m), int(n)), field, rng), field=field)


def build_cdp_model(n: int, K: int, rng: np.random.Generator, shape=None,
                    field: str = COMPLEX) -> CDPModel:
    """``K`` masks with entries drawn uniformly from ``{1, -1, j, -j}``.

    ``shape=(h, w)`` selects the 2-D DFT used for images.
    """
    if n < 1 or K < 1:
        raise DomainError("n and K must be >= 1")
    idx = rng.integers(0, 4, size=(int(K), int(n)))
    return CDPModel(MASK_SYMBOLS[idx], shape=shape, field=field)


def forward(model: MeasurementModel, z):
    return model.forward(z)


def adjoint(model: MeasurementModel, w):
    return model.adjoint(w)


def observe(model: MeasurementModel, x, snr_db: float | None = None,
            rng: np.random.Generator | None = None) -> Observation:
    """Amplitude observations of ``x``.

    With ``snr_db`` set, Gaussian noise of variance
    ``sigma2 = ||Ax||^2 / (m 10^(snr/10))`` is added to the intensities,
    which are clamped at zero before taking the square root.
    ``snr_db=None`` or ``inf`` gives the noiseless data.
    """
    u = model.forward(x)
    intensity = np.abs(u) ** 2
    if snr_db is None or np.isposinf(snr_db):
        return Observation(np.sqrt(intensity))
    energy = float(np.sum(intensity))
    if energy <= 0:
        raise DomainError("noisy observation of a signal with zero measurement energy")
    if rng is None:
        raise ContractError("a random generator is required for noisy observations")
    sigma2 = energy / (model.m * 10.0 ** (snr_db / 10.0))
    eta = np.sqrt(sigma2) * rng.standard_normal(model.m)
    b = np.sqrt(np.maximum(0.0, intensity + eta))
    return Observation(b, snr_db=float(snr_db), sigma2=sigma2)
