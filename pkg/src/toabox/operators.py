"""Dense matrices of q, p, p^-1, H and the time-of-arrival operator in the
truncated momentum eigenbasis.

The TOA matrix is built two independent ways: from the closed-form matrix
elements of q and p^-1 (``toa_matrix_analytic``), and by Nystrom quadrature
of the integral kernel (``toa_matrix_quadrature``). Agreement of the two is
the main consistency check of the package.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from ._io import format_float, header_lines
from .errors import (
    ConditioningError,
    NonSmoothInput,
    PeriodicGammaNotAllowed,
    QuadratureBudgetExceeded,
    ZeroModePresent,
)
from .model import BasisSpec, GridSpec, PhysicalConfig, eval_eigenfunction, momentum_eigenvalue
from .quadrature import derivative, split_square_rule

HERMITIAN_TOL = 1e-12

#: max (quadrature nodes) x dim^2 products a single assembly may spend
QUADRATURE_BUDGET = 4e10


@dataclass(frozen=True)
class OperatorMatrix:
    entries: np.ndarray
    basis: BasisSpec
    hermitian: bool
    label: str
    path: str = "analytic"
    hermitization_defect: float = field(default=0.0, compare=False)

    def __post_init__(self):
        a = np.asarray(self.entries)
        if a.shape != (self.basis.dim, self.basis.dim):
            raise ValueError(f"{self.label}: shape {a.shape} does not match basis dim {self.basis.dim}")
        a = a.copy()
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)
        if self.hermitian:
            defect = hermitian_defect(a)
            if defect >= HERMITIAN_TOL:
                raise ValueError(f"{self.label}: flagged Hermitian but max|A - A^H| = {defect:.3e}")

    @property
    def dim(self) -> int:
        return self.basis.dim

    def __matmul__(self, other):
        if isinstance(other, OperatorMatrix):
            return self.entries @ other.entries
        return self.entries @ other


def hermitian_defect(a: np.ndarray) -> float:
    a = np.asarray(a)
    return float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0


def commutator(a: OperatorMatrix, b: OperatorMatrix) -> np.ndarray:
    return a.entries @ b.entries - b.entries @ a.entries


def position_matrix(cfg: PhysicalConfig, basis: BasisSpec) -> OperatorMatrix:
    """(phi_m, q phi_n) = -i l (-1)^(n-m) / ((n-m) pi) off the diagonal, 0 on it."""
    n = basis.indices
    d = n[None, :] - n[:, None]
    sign = np.where(d % 2 == 0, 1.0, -1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        q = np.where(d == 0, 0.0, -1j * cfg.l * sign / (d * np.pi))
    return OperatorMatrix(q, basis, True, "q")


def momentum_matrix(cfg: PhysicalConfig, basis: BasisSpec) -> OperatorMatrix:
    return OperatorMatrix(np.diag(momentum_eigenvalue(cfg, basis.indices)).astype(complex), basis, True, "p")


def _inverse_momenta(cfg: PhysicalConfig, basis: BasisSpec) -> np.ndarray:
    p = momentum_eigenvalue(cfg, basis.indices)
    if np.any(p == 0.0):
        raise ZeroModePresent("the zero-momentum state is in the basis; p has no inverse there")
    with np.errstate(over="ignore"):
        inv = 1.0 / p
    if not np.all(np.isfinite(inv)):
        raise ConditioningError(f"gamma = {cfg.gamma!r} gives a momentum too small to invert")
    return inv


def momentum_inverse_matrix(cfg: PhysicalConfig, basis: BasisSpec) -> OperatorMatrix:
    return OperatorMatrix(np.diag(_inverse_momenta(cfg, basis)).astype(complex), basis, True, "p^-1")


def hamiltonian_matrix(cfg: PhysicalConfig, basis: BasisSpec) -> OperatorMatrix:
    p = momentum_eigenvalue(cfg, basis.indices)
    return OperatorMatrix(np.diag(p * p / (2.0 * cfg.mu)).astype(complex), basis, True, "H")


def toa_matrix_analytic(cfg: PhysicalConfig, basis: BasisSpec) -> OperatorMatrix:
    """T_mn = -(mu/2) q_mn (1/p_m + 1/p_n), i.e. T = -mu (q p^-1 + p^-1 q) / 2.

    At gamma = 0 on a basis without the zero mode this is the periodic
    operator T_0.
    """
    inv = _inverse_momenta(cfg, basis)
    q = position_matrix(cfg, basis).entries
    t = -0.5 * cfg.mu * q * (inv[:, None] + inv[None, :])
    label = "T_0" if cfg.gamma == 0.0 else "T_gamma"
    return OperatorMatrix(t, basis, True, label, path="analytic")


def toa_matrix_quadrature(
    cfg: PhysicalConfig,
    basis: BasisSpec,
    kernel_selector: str = "closed",
    panel_order: int = 64,
    panels: int = 1,
    chunk: int = 4096,
) -> OperatorMatrix:
    """Nystrom matrix of the TOA kernel, A_mn = int int conj(phi_m) K phi_n.

    The square is split along q = q' (the kernel jumps there). The output is
    Hermitized as (A + A^H)/2 and the pre-Hermitization defect max|A - A^H|
    is kept on the result.
    """
    if panel_order < 8:
        raise ValueError("panel_order must be >= 8")
    if kernel_selector == "closed":
        if cfg.gamma == 0.0:
            raise PeriodicGammaNotAllowed("closed kernel needs gamma > 0; select 'periodic'")
        if cfg.gamma < kernels.GAMMA_GUARD:
            raise ConditioningError(f"gamma = {cfg.gamma!r} below {kernels.GAMMA_GUARD}")
        label = "T_gamma"
    elif kernel_selector == "periodic":
        if basis.has_zero_mode and cfg.gamma == 0.0:
            raise ZeroModePresent("periodic kernel acts on the nonzero-momentum sector only")
        label = "T_0"
    else:
        raise ValueError(f"kernel_selector must be 'closed' or 'periodic', got {kernel_selector!r}")

    n_nodes = 2 * (panel_order * panels) ** 2
    if n_nodes * basis.dim**2 > QUADRATURE_BUDGET:
        raise QuadratureBudgetExceeded(
            f"{n_nodes} nodes x dim^2 = {n_nodes * basis.dim**2:.3g} exceeds {QUADRATURE_BUDGET:.3g}"
        )
    q, qp, w = split_square_rule(cfg.l, panel_order, panels)
    n = basis.indices
    a = np.zeros((basis.dim, basis.dim), dtype=complex)
    # fixed chunk order: the summation sequence never depends on workers
    for start in range(0, q.size, chunk):
        sl = slice(start, start + chunk)
        k = np.asarray(kernels.evaluate(kernel_selector, cfg, q[sl], qp[sl]))
        left = np.conj(eval_eigenfunction(cfg, n[:, None], q[None, sl]))
        right = eval_eigenfunction(cfg, n[None, :], qp[sl, None]) * (w[sl] * k)[:, None]
        a += left @ right
    defect = hermitian_defect(a)
    return OperatorMatrix(
        0.5 * (a + a.conj().T), basis, True, label, path="quadrature", hermitization_defect=defect
    )


def parity_conjugation_defect(cfg: PhysicalConfig, t: OperatorMatrix) -> float:
    """max |Pi conj(T) Pi + T|, the matrix form of T(-q,-q') = -conj T(q,q').

    Complex conjugation composed with q -> -q maps phi_n to itself for every
    gamma, so Pi is the identity; at gamma = 0 the index reversal n -> -n is
    an additional exact symmetry and is used instead.
    """
    a = t.entries
    image = np.conj(a)
    if cfg.gamma == 0.0:
        image = image[::-1, ::-1]
    return float(np.max(np.abs(image + a)))


@dataclass(frozen=True)
class CCRCheck:
    residual: float
    domain_violation: bool


def ccr_position_momentum_residual(
    cfg: PhysicalConfig,
    grid: GridSpec,
    values,
    derivative_values,
    boundary_tol: float = 1e-10,
    smooth_tol: float = 1e-6,
) -> CCRCheck:
    """Grid max of |q (-i hbar phi') - (-i hbar (q phi)') - i hbar phi|.

    ``derivative_values`` are the sampled derivative of ``values``; (q phi)'
    is differentiated numerically. A nonzero boundary value is reported as a
    domain violation: q phi then leaves the momentum domain.
    """
    phi = np.asarray(values, dtype=complex)
    dphi = np.asarray(derivative_values, dtype=complex)
    if phi.shape != grid.nodes.shape or dphi.shape != grid.nodes.shape:
        raise ValueError("samples must match the grid")
    if not (np.all(np.isfinite(phi)) and np.all(np.isfinite(dphi))):
        raise NonSmoothInput("non-finite samples")
    scale = float(np.max(np.abs(phi)))
    if scale == 0.0:
        warnings.warn("zero test function: residual is 0 and no normalization is defined", stacklevel=2)
        return CCRCheck(0.0, False)
    h = grid.spacing
    dscale = 1.0 + float(np.max(np.abs(dphi)))
    if np.max(np.abs(derivative(phi, h) - dphi)) > smooth_tol * dscale:
        raise NonSmoothInput("sampled derivative inconsistent with samples; function not resolved or not smooth")
    q = grid.nodes
    hbar = cfg.hbar
    lhs = q * (-1j * hbar * dphi) - (-1j * hbar * derivative(q * phi, h))
    residual = float(np.max(np.abs(lhs - 1j * hbar * phi)))
    violation = bool(max(abs(phi[0]), abs(phi[-1])) > boundary_tol * scale)
    return CCRCheck(residual, violation)


def write_matrix_csv(path, op: OperatorMatrix, cfg: PhysicalConfig, config_hash: str = "") -> None:
    """Rows ``row_index,col_index,re,im`` indexed by momentum quantum numbers."""
    meta = {
        "label": op.label,
        "gamma": cfg.gamma,
        "n_max": op.basis.n_max,
        "path": op.path,
        "index": "momentum quantum number n",
        "conventions": kernels.CONVENTIONS,
        "hermitization_defect": op.hermitization_defect,
        "config_hash": config_hash,
    }
    n = op.basis.indices
    with open(path, "w", newline="\n") as fh:
        fh.writelines(header_lines(meta))
        fh.write("row_index,col_index,re,im\n")
        for i, ni in enumerate(n):
            row = op.entries[i]
            for j, nj in enumerate(n):
                v = row[j]
                fh.write(f"{ni},{nj},{format_float(v.real)},{format_float(v.imag)}\n")
