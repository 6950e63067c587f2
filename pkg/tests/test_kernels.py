import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from toabox import _backend, kernels
from toabox.errors import ConditioningError, PeriodicGammaNotAllowed, PositionOutOfBox
from toabox.kernels import (
    kernel_closed,
    kernel_finite_part,
    kernel_periodic,
    kernel_series,
    kernel_series_partial_sums,
    zero_mode_term,
)
from toabox.model import PhysicalConfig

CFG = PhysicalConfig(0.5)
coords = st.floats(-1.0, 1.0)


def direct_series(cfg, q, qp, n_terms):
    n = np.arange(-n_terms, n_terms + 1)
    k = cfg.gamma + n * np.pi
    terms = np.exp(1j * k * (q - qp) / cfg.l) / k
    return -cfg.mu / (4 * cfg.hbar) * (q + qp) * terms.sum()


def test_closed_examples():
    v = kernel_closed(CFG, 0.3, 0.1)
    assert v.real == pytest.approx(-0.18305, abs=5e-6)
    assert v.imag == pytest.approx(-0.1, abs=1e-15)
    assert kernel_closed(CFG, 0.3, -0.3) == 0
    d = kernel_closed(CFG, 0.3, 0.3)
    assert d.imag == 0
    assert d.real == pytest.approx(-0.15 / math.tan(0.5), rel=1e-14)
    assert d.real == pytest.approx(-0.27457, abs=5e-6)


def test_series_matches_direct_sum():
    for q, qp in [(0.3, 0.1), (-0.7, 0.2), (0.5, 0.5)]:
        assert kernel_series(CFG, q, qp, 50) == pytest.approx(direct_series(CFG, q, qp, 50), abs=1e-13)


def test_series_examples():
    assert kernel_series(CFG, 0.3, -0.3, 17) == 0
    err = abs(kernel_series(CFG, 0.3, 0.1, 5000) - kernel_closed(CFG, 0.3, 0.1))
    assert err < 1e-2
    # recorded golden
    assert err == pytest.approx(1.9593137846488907e-05, rel=1e-6)


def test_partial_sums_are_nested():
    sums = kernel_series_partial_sums(CFG, [0.3, -0.2], [0.1, 0.6], [1, 10, 100])
    assert sums.shape == (2, 3)
    assert sums[0, 1] == pytest.approx(kernel_series(CFG, 0.3, 0.1, 10), abs=1e-15)
    with pytest.raises(ValueError):
        kernel_series_partial_sums(CFG, 0.3, 0.1, [10, 5])


def test_zero_mode_value():
    # -mu (q + q') e^{i g (q - q')/l} / (4 hbar g): the n = 0 series term
    v = zero_mode_term(CFG, 0.3, 0.1)
    assert v == pytest.approx(-0.2 * np.exp(0.1j), abs=1e-15)
    assert v == pytest.approx(direct_series(CFG, 0.3, 0.1, 0), abs=1e-15)
    assert zero_mode_term(CFG, 0.4, -0.4) == 0


def test_zero_mode_scales_as_inverse_gamma():
    a = zero_mode_term(PhysicalConfig(1e-3), 0.3, 0.1)
    b = zero_mode_term(PhysicalConfig(1e-4), 0.3, 0.1)
    assert abs(b) / abs(a) == pytest.approx(10.0, rel=1e-6)


def test_periodic_examples():
    assert kernel_periodic(CFG, 0.3, 0.1) == pytest.approx(-0.08j, abs=1e-16)
    assert kernel_periodic(CFG, 0.1, 0.3) == pytest.approx(0.08j, abs=1e-16)
    assert kernel_periodic(CFG, 0.4, 0.4) == 0
    assert kernel_periodic(PhysicalConfig(0.0), 0.3, 0.1) == kernel_periodic(CFG, 0.3, 0.1)


def test_finite_part_tends_to_periodic():
    g = 1e-3
    v = kernel_finite_part(PhysicalConfig(g), 0.3, 0.1)
    assert abs(v - (-0.08j)) < g
    assert kernel_finite_part(CFG, 0.3, -0.3) == 0


@settings(max_examples=60, deadline=None)
@given(q=coords, qp=coords, g=st.floats(1e-3, 0.99))
def test_hermitian_pairing(q, qp, g):
    cfg = PhysicalConfig(g)
    for sel in ("closed", "zero_mode", "finite_part", "periodic"):
        a = kernels.evaluate(sel, cfg, q, qp)
        b = kernels.evaluate(sel, cfg, qp, q)
        assert abs(a - np.conj(b)) <= 1e-14 * max(1.0, abs(a))


@settings(max_examples=60, deadline=None)
@given(q=coords, qp=coords, s=st.floats(0.1, 10.0))
def test_periodic_scaling(q, qp, s):
    scaled = kernel_periodic(PhysicalConfig(0.0, l=s), s * q, s * qp)
    assert abs(scaled - s * kernel_periodic(PhysicalConfig(0.0), q, qp)) <= 1e-14 * s


def test_guards():
    with pytest.raises(PeriodicGammaNotAllowed):
        kernel_closed(PhysicalConfig(0.0), 0.3, 0.1)
    with pytest.raises(ConditioningError):
        kernel_closed(PhysicalConfig(1e-8), 0.3, 0.1)
    with pytest.raises(PositionOutOfBox):
        kernel_closed(CFG, 1.5, 0.1)
    with pytest.raises(ValueError):
        kernels.evaluate("nope", CFG, 0.1, 0.2)


def test_array_broadcasting():
    q = np.linspace(-1, 1, 5)
    v = kernel_closed(CFG, q[:, None], q[None, :])
    assert v.shape == (5, 5)
    assert v[1, 3] == kernel_closed(CFG, q[1], q[3])


@pytest.mark.skipif(_backend.compiled is None, reason="compiled extension not built")
def test_backend_parity():
    rng = np.random.default_rng(0)
    q, qp = rng.uniform(-1, 1, (2, 400))
    q[:20] = qp[:20]
    args = (0.37, 1.3, 0.8, 1.1)
    py, cy = _backend.python, _backend.compiled
    for name in ("closed", "zero_mode"):
        a = getattr(py, name)(q * 1.3, qp * 1.3, *args)
        b = getattr(cy, name)(q * 1.3, qp * 1.3, *args)
        assert np.max(np.abs(a - b)) < 1e-14
    a = py.periodic(q, qp, 1.3, 0.8, 1.1)
    assert np.max(np.abs(a - cy.periodic(q, qp, 1.3, 0.8, 1.1))) < 1e-14
    cp = np.array([1, 7, 50], dtype=np.int64)
    a = py.series_sums(q, qp, *args, cp)
    assert np.max(np.abs(a - cy.series_sums(q, qp, *args, cp))) < 1e-12


def test_kernel_csv(tmp_path):
    q, qp, v = kernels.kernel_grid("periodic", CFG, 3)
    path = tmp_path / "k.csv"
    kernels.write_kernel_csv(path, "periodic", CFG, q, qp, v, config_hash="abc")
    lines = path.read_text().splitlines()
    assert "# config_hash: abc" in lines
    body = [x for x in lines if not x.startswith("#")]
    assert body[0] == "q,q_prime,re,im"
    assert len(body) == 10
    assert body[1] == "-1,-1,0,0"


def test_backend_override():
    import os
    import subprocess
    import sys

    env = {**os.environ, "TOABOX_BACKEND": "python"}
    out = subprocess.run(
        [sys.executable, "-c", "from toabox import _backend; print(_backend.BACKEND)"],
        capture_output=True, text=True, env=env, check=True,
    )
    assert out.stdout.strip() == "python"
