import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from toabox.errors import (
    GammaOutOfRange,
    IndexOutOfBasis,
    MixedRepresentation,
    NonPositiveScale,
    PositionOutOfBox,
    UnnormalizedState,
)
from toabox.model import (
    BasisSpec,
    GridSamples,
    GridSpec,
    PhysicalConfig,
    WaveState,
    energy_eigenvalue,
    eval_eigenfunction,
    inner_product,
    momentum_eigenvalue,
    simpson_weights,
    validate_config,
)


def test_validate_ok_and_kind():
    assert validate_config(PhysicalConfig(0.5)) == "twisted"
    assert validate_config(PhysicalConfig(0.0)) == "periodic"


@pytest.mark.parametrize("gamma", [1.0, -0.1, float("nan"), 1.5])
def test_gamma_out_of_range(gamma):
    with pytest.raises(GammaOutOfRange):
        PhysicalConfig(gamma)


@pytest.mark.parametrize("field", ["l", "mu", "hbar"])
@pytest.mark.parametrize("value", [-1.0, 0.0, float("inf")])
def test_non_positive_scale(field, value):
    with pytest.raises(NonPositiveScale):
        PhysicalConfig(0.5, **{field: value})


def test_momentum_eigenvalues():
    cfg = PhysicalConfig(0.5)
    assert momentum_eigenvalue(cfg, 0) == 0.5
    assert momentum_eigenvalue(PhysicalConfig(0.0), 0) == 0.0
    assert float(momentum_eigenvalue(cfg, 1)) == pytest.approx(3.641593, abs=5e-7)


def test_momentum_eigenvalue_matches_spectral_derivative():
    # -i hbar d/dq of the sampled phi_1 via FFT of its periodic part
    cfg = PhysicalConfig(0.5)
    m = 256
    q = -1.0 + 2.0 * np.arange(m) / m
    phi = eval_eigenfunction(cfg, 1, q)
    carrier = np.exp(1j * cfg.gamma * q)
    k = 2 * np.pi * np.fft.fftfreq(m, d=2.0 / m)
    periodic_part = phi / carrier
    d_periodic = np.fft.ifft(1j * k * np.fft.fft(periodic_part))
    dphi = carrier * (d_periodic + 1j * cfg.gamma * periodic_part)
    p = -1j * dphi / phi
    assert np.max(np.abs(p.imag)) < 1e-10
    assert np.max(np.abs(p.real - 3.641593)) < 5e-7


def test_energy_degeneracy_at_zero_gamma():
    cfg = PhysicalConfig(0.0)
    assert energy_eigenvalue(cfg, 1) == energy_eigenvalue(cfg, -1) == pytest.approx(math.pi**2 / 2)


def test_eigenfunction_values():
    cfg = PhysicalConfig(0.5)
    assert eval_eigenfunction(cfg, 7, 0.0) == pytest.approx(1 / math.sqrt(2))
    v = eval_eigenfunction(cfg, 1, 0.5)
    assert v.real == pytest.approx(-0.17494, abs=1e-5)
    assert v.imag == pytest.approx(0.68513, abs=1e-5)
    assert v == pytest.approx(cmath.exp(1j * (0.5 + math.pi) * 0.5) / math.sqrt(2), abs=1e-15)


@settings(max_examples=50, deadline=None)
@given(gamma=st.floats(0.0, 0.999), n=st.integers(-50, 50), l=st.floats(0.1, 10.0))
def test_boundary_twist(gamma, n, l):
    cfg = PhysicalConfig(gamma, l=l)
    ratio = eval_eigenfunction(cfg, n, -l) / eval_eigenfunction(cfg, n, l)
    assert abs(ratio - cmath.exp(-2j * gamma)) < 1e-11


def test_position_out_of_box():
    with pytest.raises(PositionOutOfBox):
        eval_eigenfunction(PhysicalConfig(0.5), 1, 1.01)


def test_grid_orthonormality():
    cfg = PhysicalConfig(0.5)
    grid = GridSpec(512)
    basis = BasisSpec.for_config(cfg, 3)
    s = {n: WaveState.eigenstate(cfg, basis, n).synthesize(grid) for n in (1, 2)}
    assert abs(inner_product(s[1], s[2])) < 1e-10
    assert inner_product(s[1], s[1]) == pytest.approx(1.0, abs=1e-10)
    a, b = WaveState.eigenstate(cfg, basis, 1), WaveState.eigenstate(cfg, basis, 2)
    assert inner_product(a, a) == 1
    assert inner_product(a, b) == 0


def test_mixed_representation():
    cfg = PhysicalConfig(0.5)
    basis = BasisSpec.for_config(cfg, 2)
    w = WaveState.eigenstate(cfg, basis, 1)
    with pytest.raises(MixedRepresentation):
        inner_product(w, w.synthesize(GridSpec(33)))
    with pytest.raises(MixedRepresentation):
        inner_product(w, WaveState.eigenstate(cfg, BasisSpec.for_config(cfg, 3), 1))
    s = GridSamples(np.ones(33), GridSpec(33))
    with pytest.raises(MixedRepresentation):
        inner_product(s, GridSamples(np.ones(35), GridSpec(35)))


@pytest.mark.parametrize("m", [16, 17, 512, 513])
def test_simpson_weights(m):
    w = simpson_weights(m, 2.0 / (m - 1))
    assert w.sum() == pytest.approx(2.0, abs=1e-13)
    assert np.all(w > 0)
    x = np.linspace(-1, 1, m)
    assert np.sum(w * x**2) == pytest.approx(2.0 / 3.0, abs=1e-12)


def test_grid_is_symmetric():
    for m in (16, 513):
        g = GridSpec(m)
        assert np.array_equal(g.nodes, -g.nodes[::-1])
        assert g.nodes[0] == -1.0 and g.nodes[-1] == 1.0
    with pytest.raises(ValueError):
        GridSpec(8)


def test_basis_indices():
    b = BasisSpec(0.5, 3)
    assert list(b.indices) == [-3, -2, -1, 0, 1, 2, 3]
    b0 = BasisSpec(0.0, 3)
    assert list(b0.indices) == [-3, -2, -1, 1, 2, 3]
    assert not b0.has_zero_mode
    assert b0.position(1) == 3
    with pytest.raises(IndexOutOfBasis):
        b0.position(0)
    with pytest.raises(IndexOutOfBasis):
        b.position(4)
    with pytest.raises(ValueError):
        BasisSpec(0.5, 0)


def test_wave_state_normalization():
    cfg = PhysicalConfig(0.5)
    basis = BasisSpec.for_config(cfg, 1)
    with pytest.raises(UnnormalizedState):
        WaveState(np.ones(3), basis, cfg, normalized=True)
    w = WaveState(np.ones(3), basis, cfg).normalize()
    assert w.norm2 == pytest.approx(1.0)
    with pytest.raises(UnnormalizedState):
        WaveState(np.zeros(3), basis, cfg).normalize()
