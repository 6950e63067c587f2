import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from toabox.errors import ConditioningError, QuadratureBudgetExceeded, ZeroModePresent
from toabox.model import BasisSpec, GridSpec, PhysicalConfig, eval_eigenfunction
from toabox.operators import (
    ccr_position_momentum_residual,
    commutator,
    hamiltonian_matrix,
    hermitian_defect,
    momentum_inverse_matrix,
    momentum_matrix,
    parity_conjugation_defect,
    position_matrix,
    toa_matrix_analytic,
    toa_matrix_quadrature,
    write_matrix_csv,
)

CFG = PhysicalConfig(0.5)


def entry(op, m, n):
    b = op.basis
    return op.entries[b.position(m), b.position(n)]


def test_position_matrix_against_grid_quadrature():
    grid = GridSpec(4001)
    q = grid.nodes
    basis = BasisSpec.for_config(CFG, 3)
    pos = position_matrix(CFG, basis)
    for m, n in [(0, 1), (1, 0), (-2, 3), (2, 2)]:
        oracle = np.sum(grid.weights * q * np.conj(eval_eigenfunction(CFG, m, q)) * eval_eigenfunction(CFG, n, q))
        assert entry(pos, m, n) == pytest.approx(oracle, abs=1e-10)
    assert entry(pos, 0, 1) == pytest.approx(1j / math.pi, abs=1e-16)
    assert entry(pos, 1, 0) == pytest.approx(-1j / math.pi, abs=1e-16)
    assert np.all(np.diag(pos.entries) == 0)


def test_momentum_and_inverse():
    basis = BasisSpec.for_config(CFG, 5)
    p, pinv = momentum_matrix(CFG, basis), momentum_inverse_matrix(CFG, basis)
    assert entry(pinv, 0, 0) == 2.0
    assert np.max(np.abs(p @ pinv - np.eye(basis.dim))) < 1e-15
    cfg0 = PhysicalConfig(0.0)
    b0 = BasisSpec.for_config(cfg0, 4)
    inv0 = np.diag(momentum_inverse_matrix(cfg0, b0).entries).real
    assert np.allclose(inv0, 1.0 / (b0.indices * math.pi), rtol=1e-15, atol=0)
    with pytest.raises(ZeroModePresent):
        momentum_inverse_matrix(cfg0, BasisSpec(0.0, 4, include_zero=True))
    with pytest.raises(ConditioningError):
        momentum_inverse_matrix(PhysicalConfig(5e-324), BasisSpec(5e-324, 2))


def test_hamiltonian():
    h = hamiltonian_matrix(CFG, BasisSpec.for_config(CFG, 2))
    assert entry(h, 0, 0) == 0.125
    cfg0 = PhysicalConfig(0.0)
    h0 = hamiltonian_matrix(cfg0, BasisSpec.for_config(cfg0, 2))
    assert entry(h0, 1, 1) == entry(h0, -1, -1) == pytest.approx(math.pi**2 / 2)
    p = momentum_matrix(CFG, h.basis)
    assert np.max(np.abs(commutator(h, p))) == 0


def test_toa_matrix_entries():
    t = toa_matrix_analytic(CFG, BasisSpec.for_config(CFG, 4))
    expected = -0.5 * (1j / math.pi) * (1 / 0.5 + 1 / (0.5 + math.pi))
    assert entry(t, 0, 1) == pytest.approx(expected, abs=1e-16)
    assert entry(t, 0, 1).imag == pytest.approx(-0.36202, abs=1e-5)
    assert np.all(np.diag(t.entries) == 0)
    assert np.trace(t.entries) == 0
    assert t.label == "T_gamma"
    assert toa_matrix_analytic(PhysicalConfig(0.0), BasisSpec(0.0, 3)).label == "T_0"


@pytest.mark.parametrize("gamma,selector", [(0.5, "closed"), (0.0, "periodic")])
def test_quadrature_matches_analytic(gamma, selector):
    cfg = PhysicalConfig(gamma)
    basis = BasisSpec.for_config(cfg, 4)
    quad = toa_matrix_quadrature(cfg, basis, selector, panel_order=64)
    assert np.max(np.abs(quad.entries - toa_matrix_analytic(cfg, basis).entries)) < 1e-8
    assert quad.hermitization_defect < 1e-9
    assert quad.path == "quadrature"


def test_quadrature_guards():
    with pytest.raises(ZeroModePresent):
        toa_matrix_quadrature(PhysicalConfig(0.0), BasisSpec(0.0, 2, include_zero=True), "periodic")
    with pytest.raises(QuadratureBudgetExceeded):
        toa_matrix_quadrature(CFG, BasisSpec.for_config(CFG, 400), "closed", panel_order=64, panels=8)


@settings(max_examples=25, deadline=None)
@given(gamma=st.one_of(st.just(0.0), st.floats(1e-6, 0.99)), n_max=st.integers(1, 20), l=st.floats(0.2, 5.0))
def test_matrices_hermitian(gamma, n_max, l):
    cfg = PhysicalConfig(gamma, l=l)
    basis = BasisSpec.for_config(cfg, n_max)
    for op in (position_matrix(cfg, basis), toa_matrix_analytic(cfg, basis)):
        assert hermitian_defect(op.entries) < 1e-12
        assert parity_conjugation_defect(cfg, op) == 0.0 or op.label == "q"


def test_parity_conjugation():
    for g in (0.0, 0.3):
        cfg = PhysicalConfig(g)
        t = toa_matrix_analytic(cfg, BasisSpec.for_config(cfg, 6))
        assert parity_conjugation_defect(cfg, t) == 0.0


def test_entries_read_only():
    t = toa_matrix_analytic(CFG, BasisSpec.for_config(CFG, 2))
    with pytest.raises(ValueError):
        t.entries[0, 0] = 1.0


def test_ccr_smooth_function():
    grid = GridSpec(512)
    q = grid.nodes
    phi = (1 - q**2) * np.exp(1j * q)
    dphi = (-2 * q + 1j * (1 - q**2)) * np.exp(1j * q)
    check = ccr_position_momentum_residual(CFG, grid, phi, dphi)
    assert check.residual < 1e-6
    assert not check.domain_violation


def test_ccr_flags_eigenfunction():
    grid = GridSpec(512)
    q = grid.nodes
    phi = eval_eigenfunction(CFG, 1, q)
    check = ccr_position_momentum_residual(CFG, grid, phi, 1j * (0.5 + math.pi) * phi)
    assert check.domain_violation
    assert check.residual < 1e-6


def test_ccr_zero_function_warns():
    grid = GridSpec(64)
    with pytest.warns(UserWarning):
        check = ccr_position_momentum_residual(CFG, grid, np.zeros(64), np.zeros(64))
    assert check.residual == 0.0


def test_ccr_rejects_inconsistent_derivative():
    from toabox.errors import NonSmoothInput

    grid = GridSpec(128)
    q = grid.nodes
    with pytest.raises(NonSmoothInput):
        ccr_position_momentum_residual(CFG, grid, np.abs(q), np.zeros(128))


def test_matrix_csv(tmp_path):
    cfg0 = PhysicalConfig(0.0)
    t = toa_matrix_analytic(cfg0, BasisSpec(0.0, 1))
    path = tmp_path / "t.csv"
    write_matrix_csv(path, t, cfg0, "h")
    body = [x for x in path.read_text().splitlines() if not x.startswith("#")]
    assert body[0] == "row_index,col_index,re,im"
    assert len(body) == 5
    assert body[1].startswith("-1,-1,0,0")
