import numpy as np
import pytest

from safpr.measurement import (CDPModel, DenseModel, Observation, build_cdp_model, build_gaussian_model,
                               observe)
from safpr.numerics import COMPLEX, REAL, ContractError, DomainError, make_rng


def models(rng):
    yield build_gaussian_model(30, 10, REAL, rng)
    yield build_gaussian_model(30, 10, COMPLEX, rng)
    yield build_cdp_model(16, 3, rng)
    yield build_cdp_model(12, 2, rng, shape=(3, 4))
    yield build_cdp_model(16, 3, rng, field=REAL)


def rand_vec(n, field, rng):
    z = rng.standard_normal(n)
    return z + 1j * rng.standard_normal(n) if field == COMPLEX else z


@pytest.mark.parametrize("i", range(5))
def test_adjoint_identity(i, rng):
    model = list(models(make_rng(1, i)))[i]
    z = rand_vec(model.n, model.field, rng)
    w = rng.standard_normal(model.m) + 1j * rng.standard_normal(model.m)
    if model.field == REAL and isinstance(model, DenseModel):
        w = w.real
    lhs = np.vdot(model.forward(z), w)
    rhs = np.vdot(z, model.adjoint(w))
    if model.field == REAL:
        lhs, rhs = lhs.real, rhs.real
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)
    # adjoint(forward) is PSD
    assert np.vdot(z, model.adjoint(model.forward(z))).real >= 0


def test_cdp_energy_per_mask_and_unit_rows(rng):
    model = build_cdp_model(20, 4, rng)
    z = rand_vec(20, COMPLEX, rng)
    blocks = model.forward(z).reshape(4, 20)
    assert np.allclose(np.linalg.norm(blocks, axis=1), np.linalg.norm(z), rtol=0, atol=1e-12)
    assert np.allclose(model.row_norms(), 1)
    assert set(np.round(model.masks.ravel(), 12)) <= {1, -1, 1j, -1j}
    assert model.m == 80 and model.norm_scale == pytest.approx(np.sqrt(20))


def test_cdp_2d_matches_fft2(rng):
    model = build_cdp_model(12, 2, rng, shape=(3, 4))
    z = rng.standard_normal(12)
    expect = np.fft.fft2(model.masks[1].reshape(3, 4) * z.reshape(3, 4), norm="ortho").ravel()
    assert np.allclose(model.forward(z)[12:], expect, atol=1e-12)


def test_phase_invisible(rng):
    for model in (build_gaussian_model(20, 5, COMPLEX, rng), build_cdp_model(8, 2, rng)):
        x = rand_vec(model.n, COMPLEX, rng)
        assert np.allclose(np.abs(model.forward(np.exp(1.3j) * x)), np.abs(model.forward(x)), atol=1e-12)


def test_gaussian_row_norms_and_reproducibility():
    A1 = build_gaussian_model(4000, 50, REAL, make_rng(3, 0)).A
    A2 = build_gaussian_model(4000, 50, REAL, make_rng(3, 0)).A
    assert np.array_equal(A1, A2)
    assert np.mean(np.sum(A1 ** 2, axis=1)) == pytest.approx(50, rel=0.02)
    C = build_gaussian_model(4000, 50, COMPLEX, make_rng(3, 1)).A
    assert np.mean(np.abs(C) ** 2) == pytest.approx(1, abs=0.02)


def test_dense_model_is_read_only(rng):
    model = build_gaussian_model(5, 3, REAL, rng)
    with pytest.raises(ValueError):
        model.A[0, 0] = 1.0


def test_observe_noiseless_and_inf(rng):
    model = build_gaussian_model(40, 8, REAL, rng)
    x = rng.standard_normal(8)
    b = observe(model, x).b
    assert np.array_equal(b, np.abs(model.A @ x))
    assert np.array_equal(observe(model, x, np.inf, rng).b, b)
    assert not observe(model, x).noisy


def test_observe_snr_calibration():
    rng = make_rng(5, 0)
    model = build_gaussian_model(200_000, 4, REAL, rng)
    x = rng.standard_normal(4)
    obs = observe(model, x, 20.0, rng)
    energy = np.sum((model.A @ x) ** 2)
    assert 10 * np.log10(energy / (model.m * obs.sigma2)) == pytest.approx(20, abs=1e-9)
    # the realised noise matches sigma2 (before clamping, intensities are |u|^2 + eta)
    assert np.all(obs.b >= 0)
    assert obs.noisy and obs.snr_db == 20.0


def test_observation_validation():
    with pytest.raises(DomainError):
        Observation(np.array([1.0, -0.1]))
    with pytest.raises(DomainError):
        Observation(np.array([1.0, np.inf]))
    with pytest.raises(ContractError):
        Observation(np.array([]))


def test_model_errors(rng):
    with pytest.raises(DomainError):
        CDPModel(np.full((2, 4), 0.5))
    with pytest.raises(ContractError):
        CDPModel(np.ones((2, 4)), shape=(3, 3))
    model = build_gaussian_model(5, 3, REAL, rng)
    with pytest.raises(ContractError):
        model.forward(np.ones(4))
    with pytest.raises(ContractError):
        model.adjoint(np.ones(4))
    with pytest.raises(ContractError):
        model.forward(np.ones(3, dtype=complex))
    with pytest.raises(ContractError):
        observe(model, np.ones(3), 10.0)
