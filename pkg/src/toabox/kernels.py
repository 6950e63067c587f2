"""Pointwise evaluation of the time-of-arrival integral kernels.

Conventions: Heaviside H(0) = 1/2 and sgn(0) = 0, which keep both kernels
Hermitian on the diagonal. The overall sign follows T = -mu (q p^-1 + p^-1 q)/2,
so that [H, T] = +i hbar; the periodic kernel is therefore

    T_0(q, q') = -i mu/(4 hbar) (q + q') sgn(q - q') + i mu/(4 hbar l) (q^2 - q'^2).
"""
from __future__ import annotations

import numpy as np

from . import _backend
from ._io import format_float, header_lines
from .errors import ConditioningError, PeriodicGammaNotAllowed, PositionOutOfBox
from .model import PhysicalConfig

#: below this boundary phase the 1/sin(gamma) prefactor is refused
GAMMA_GUARD = 1e-6

KERNELS = ("closed", "series", "zero_mode", "finite_part", "periodic")

CONVENTIONS = "H(0)=1/2;sgn(0)=0;T=-mu(qp^-1+p^-1q)/2"


def _prepare(cfg, q, q_prime):
    q, qp = np.broadcast_arrays(np.asarray(q, dtype=float), np.asarray(q_prime, dtype=float))
    if np.any(np.abs(q) > cfg.l * (1 + 1e-14)) or np.any(np.abs(qp) > cfg.l * (1 + 1e-14)):
        raise PositionOutOfBox(f"kernel arguments must satisfy |q| <= l = {cfg.l}")
    return q.shape, np.ascontiguousarray(q.ravel()), np.ascontiguousarray(qp.ravel())


def _finish(shape, values):
    values = values.reshape(shape)
    return complex(values) if values.ndim == 0 else values


def _require_twisted(cfg: PhysicalConfig, guard: bool = True):
    if cfg.gamma == 0.0:
        raise PeriodicGammaNotAllowed("gamma = 0 has no inverse momentum; use kernel_periodic")
    if guard and cfg.gamma < GAMMA_GUARD:
        raise ConditioningError(
            f"gamma = {cfg.gamma!r} below {GAMMA_GUARD}; closed form is ill-conditioned"
        )


def kernel_closed(cfg: PhysicalConfig, q, q_prime):
    """Closed form -mu/(4 hbar sin g) (q+q') (e^{ig} H(q-q') + e^{-ig} H(q'-q))."""
    _require_twisted(cfg)
    shape, q, qp = _prepare(cfg, q, q_prime)
    return _finish(shape, _backend.active.closed(q, qp, cfg.gamma, cfg.l, cfg.mu, cfg.hbar))


def kernel_series_partial_sums(cfg: PhysicalConfig, q, q_prime, n_terms):
    """Partial sums of the eigenfunction series for every entry of ``n_terms``.

    Returns an array of shape ``broadcast(q, q_prime).shape + (len(n_terms),)``.
    """
    _require_twisted(cfg, guard=False)
    checkpoints = np.atleast_1d(np.asarray(n_terms, dtype=np.int64))
    if np.any(checkpoints < 1) or np.any(np.diff(checkpoints) < 0):
        raise ValueError("n_terms must be positive and non-decreasing")
    shape, q, qp = _prepare(cfg, q, q_prime)
    sums = _backend.active.series_sums(q, qp, cfg.gamma, cfg.l, cfg.mu, cfg.hbar, checkpoints)
    return sums.reshape(shape + (checkpoints.size,))


def kernel_series(cfg: PhysicalConfig, q, q_prime, n_terms: int):
    """Symmetric partial sum over |n| <= n_terms of

        -(mu l / 2 hbar) (q + q') sum_n phi_n(q) conj(phi_n(q')) / (gamma + n pi).
    """
    if int(n_terms) < 1:
        raise ValueError("n_terms must be >= 1")
    out = kernel_series_partial_sums(cfg, q, q_prime, [int(n_terms)])[..., 0]
    return complex(out) if out.ndim == 0 else out


def zero_mode_term(cfg: PhysicalConfig, q, q_prime):
    """The n = 0 term of the series, which carries the 1/gamma divergence."""
    _require_twisted(cfg, guard=False)
    shape, q, qp = _prepare(cfg, q, q_prime)
    return _finish(shape, _backend.active.zero_mode(q, qp, cfg.gamma, cfg.l, cfg.mu, cfg.hbar))


def kernel_finite_part(cfg: PhysicalConfig, q, q_prime):
    """Closed kernel with the zero-mode term removed; tends to the periodic kernel."""
    _require_twisted(cfg)
    shape, q, qp = _prepare(cfg, q, q_prime)
    be = _backend.active
    args = (cfg.gamma, cfg.l, cfg.mu, cfg.hbar)
    return _finish(shape, be.closed(q, qp, *args) - be.zero_mode(q, qp, *args))


def kernel_periodic(cfg: PhysicalConfig, q, q_prime):
    """Kernel of the periodic (gamma = 0) operator on the nonzero-momentum sector.

    Does not depend on ``cfg.gamma``.
    """
    shape, q, qp = _prepare(cfg, q, q_prime)
    return _finish(shape, _backend.active.periodic(q, qp, cfg.l, cfg.mu, cfg.hbar))


def evaluate(selector: str, cfg: PhysicalConfig, q, q_prime, n_terms: int | None = None):
    """Dispatch on a kernel name from :data:`KERNELS`."""
    if selector == "closed":
        return kernel_closed(cfg, q, q_prime)
    if selector == "series":
        return kernel_series(cfg, q, q_prime, n_terms or 1000)
    if selector == "zero_mode":
        return zero_mode_term(cfg, q, q_prime)
    if selector == "finite_part":
        return kernel_finite_part(cfg, q, q_prime)
    if selector == "periodic":
        return kernel_periodic(cfg, q, q_prime)
    raise ValueError(f"unknown kernel {selector!r}; choose from {KERNELS}")


def kernel_grid(selector: str, cfg: PhysicalConfig, points: int, n_terms: int | None = None):
    """Kernel on the ``points x points`` uniform tensor grid over [-l, l]^2.

    Returns ``(q, q_prime, values)`` as flat row-major arrays.
    """
    x = np.linspace(-cfg.l, cfg.l, points)
    x = 0.5 * (x - x[::-1])
    qq, pp = np.meshgrid(x, x, indexing="ij")
    vals = np.asarray(evaluate(selector, cfg, qq, pp, n_terms))
    return qq.ravel(), pp.ravel(), vals.ravel()


def write_kernel_csv(path, selector, cfg, q, q_prime, values, config_hash=""):
    """Rows ``q,q_prime,re,im`` behind ``#`` header lines."""
    meta = {
        "kernel": selector,
        "gamma": cfg.gamma,
        "l": cfg.l,
        "mu": cfg.mu,
        "hbar": cfg.hbar,
        "conventions": CONVENTIONS,
        "config_hash": config_hash,
    }
    with open(path, "w", newline="\n") as fh:
        fh.writelines(header_lines(meta))
        fh.write("q,q_prime,re,im\n")
        for a, b, v in zip(q, q_prime, values):
            fh.write(f"{format_float(a)},{format_float(b)},{format_float(v.real)},{format_float(v.imag)}\n")
