"""Spectral decomposition of the TOA matrices and the property checks built on it."""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from ._io import FORMAT_VERSION, write_csv
from .domain import (
    CanonicalState,
    commutator_residual,
    complement_function,
    constraint_weights,
    decompose,
    span_function,
)
from .errors import DivergentMoment, NonHermitianInput, UnnormalizedState
from .model import BasisSpec, PhysicalConfig, WaveState
from .operators import HERMITIAN_TOL, OperatorMatrix, hermitian_defect, toa_matrix_analytic
from .quadrature import log_log_slope, split_square_rule


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("TOABOX_WORKERS", "1")))
    except ValueError:
        return 1


def parallel_map(fn, items):
    """Ordered map over ``items``; TOABOX_WORKERS threads, same result for any count."""
    items = list(items)
    n = _workers()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def _check_hermitian(op: OperatorMatrix):
    if not op.hermitian or hermitian_defect(op.entries) >= HERMITIAN_TOL:
        raise NonHermitianInput(f"{op.label} is not Hermitian")


# --- spectra -----------------------------------------------------------------


@dataclass(frozen=True)
class SpectrumReport:
    label: str
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray = field(repr=False)
    pairing_defect: float
    trace: float

    @property
    def eigenvalue_sum(self) -> float:
        return float(np.sum(self.eigenvalues))

    def to_json(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "label": self.label,
            "dim": int(self.eigenvalues.size),
            "pairing_defect": self.pairing_defect,
            "trace": self.trace,
            "eigenvalue_sum": self.eigenvalue_sum,
            "eigenvalues": [float(x) for x in self.eigenvalues],
        }

    def write_csv(self, path, meta=None):
        rows = [(k, float(t)) for k, t in enumerate(self.eigenvalues)]
        write_csv(path, ["k", "eigenvalue"], rows, meta)


def _fix_phases(vecs: np.ndarray) -> np.ndarray:
    out = vecs.copy()
    for j in range(out.shape[1]):
        col = out[:, j]
        mags = np.abs(col)
        first = int(np.argmax(mags > 1e-8 * mags.max()))
        out[:, j] = col * (abs(col[first]) / col[first])
    return out


def _lex_key(v: np.ndarray) -> tuple:
    return tuple(np.round(np.column_stack([v.real, v.imag]).ravel(), 12))


def spectral_decomposition(t: OperatorMatrix, cluster_tol: float = 1e-10) -> SpectrumReport:
    """Hermitian eigendecomposition with reproducible eigenvector phases.

    Each eigenvector has its first non-negligible component made real and
    positive; within clusters of (numerically) equal eigenvalues the vectors
    are ordered lexicographically by their components.
    """
    _check_hermitian(t)
    vals, vecs = np.linalg.eigh(t.entries)
    vecs = _fix_phases(vecs)
    order = list(range(vals.size))
    i = 0
    while i < vals.size:
        j = i + 1
        while j < vals.size and vals[j] - vals[i] <= cluster_tol * max(1.0, abs(vals[i])):
            j += 1
        if j - i > 1:
            order[i:j] = sorted(range(i, j), key=lambda col: _lex_key(vecs[:, col]))
        i = j
    vecs = vecs[:, order]
    vals = vals[order]
    pairing = float(np.max(np.abs(vals + vals[::-1])))
    return SpectrumReport(t.label, vals, vecs, pairing, float(np.trace(t.entries).real))


# --- expectation values -----------------------------------------------------------


def _coeffs(state, basis: BasisSpec | None = None) -> np.ndarray:
    if isinstance(state, WaveState):
        c = state.coeffs
    else:
        c = np.asarray(state, dtype=complex)
    if abs(np.vdot(c, c).real - 1.0) > 1e-12:
        raise UnnormalizedState(f"state norm^2 = {np.vdot(c, c).real!r}")
    return c


def toa_expectation(t: OperatorMatrix, state) -> float:
    """<state|T|state> for a normalized state (real by Hermiticity)."""
    c = _coeffs(state)
    return float(np.vdot(c, t.entries @ c).real)


@dataclass(frozen=True)
class ZeroExpectationReport:
    gamma: float
    n_max: int
    rows: tuple  # (kind, n, expectation)

    @property
    def max_abs(self) -> float:
        return max(abs(r[2]) for r in self.rows)

    def to_json(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "gamma": self.gamma,
            "n_max": self.n_max,
            "max_abs": self.max_abs,
            "rows": [{"kind": k, "n": n, "expectation": v} for k, n, v in self.rows],
        }


def zero_expectation_suite(cfg: PhysicalConfig, n_max: int = 10) -> ZeroExpectationReport:
    """<T> on every spanning and complement function with index <= n_max."""
    basis = BasisSpec.for_config(cfg, n_max)
    t = toa_matrix_analytic(cfg, basis)
    rows = []
    for n in range(1, n_max + 1):
        rows.append(("span", n, toa_expectation(t, span_function(cfg, n).vector(basis))))
    for n in range(0 if basis.has_zero_mode else 1, n_max + 1):
        rows.append(("complement", n, toa_expectation(t, complement_function(cfg, n).vector(basis))))
    return ZeroExpectationReport(cfg.gamma, n_max, tuple(rows))


# --- uncertainty ------------------------------------------------------------------


@dataclass(frozen=True)
class UncertaintyReport:
    state_id: str
    delta_T: float
    delta_E: float
    in_domain: bool
    moment_converged: bool = True

    @property
    def product(self) -> float:
        return self.delta_T * self.delta_E


def _spread(diag_or_matrix, c):
    a = diag_or_matrix
    ac = a * c if a.ndim == 1 else a @ c
    mean = float(np.vdot(c, ac).real)
    # ||(A - <A>) c||, the variance without the <A^2> - <A>^2 cancellation
    return mean, float(np.linalg.norm(ac - mean * c))


def uncertainty_product(
    cfg: PhysicalConfig,
    h: OperatorMatrix,
    t: OperatorMatrix,
    state,
    state_id: str = "",
    strict: bool = True,
    domain_tol: float = 1e-4,
    tail_fraction: float = 1e-2,
) -> UncertaintyReport:
    """Delta T and Delta E of a normalized state, plus domain membership.

    Membership at truncation: negligible complement weight and a relative
    constraint residual below ``domain_tol``. If more than ``tail_fraction``
    of sum E_n^2 |c_n|^2 comes from the top quarter of the basis, the energy
    variance is not resolved: DivergentMoment is raised when ``strict``,
    otherwise the report is flagged.
    """
    c = _coeffs(state)
    basis = h.basis
    e = np.real(np.diag(h.entries))
    weight = e * e * np.abs(c) ** 2
    top = np.abs(basis.indices) > 0.75 * basis.n_max
    total = float(weight.sum())
    converged = total == 0.0 or float(weight[top].sum()) <= tail_fraction * total
    if strict and not converged:
        raise DivergentMoment(f"energy second moment not resolved at n_max={basis.n_max} ({state_id})")
    _, d_e = _spread(e, c)
    _, d_t = _spread(t.entries, c)
    span, comp = decompose(cfg, basis, c)
    w = constraint_weights(cfg, span.size)
    in_domain = bool(
        np.linalg.norm(comp) <= domain_tol and abs(w.apply(span)) <= domain_tol * max(np.linalg.norm(span), 1e-300)
    )
    return UncertaintyReport(state_id, d_t, d_e, in_domain, converged)


def write_uncertainty_csv(path, reports, meta=None):
    rows = [
        (r.state_id, r.delta_T, r.delta_E, r.product, int(r.in_domain), int(r.moment_converged))
        for r in reports
    ]
    write_csv(path, ["state_id", "delta_T", "delta_E", "product", "in_domain", "moment_converged"], rows, meta)


# --- Hilbert-Schmidt norm ---------------------------------------------------------


def hs_norm(kernel_selector: str, cfg: PhysicalConfig, panel_order: int = 32, panels: int = 1) -> float:
    """sqrt of int int |K(q, q')|^2 over [-l, l]^2 with the diagonal-split rule."""
    if kernel_selector not in ("closed", "periodic", "finite_part"):
        raise ValueError(f"unsupported kernel {kernel_selector!r}")
    q, qp, w = split_square_rule(cfg.l, panel_order, panels)
    k = np.asarray(kernels.evaluate(kernel_selector, cfg, q, qp))
    return math.sqrt(float(np.sum(w * (k.real**2 + k.imag**2))))


# --- covariance -------------------------------------------------------------------


@dataclass(frozen=True)
class CovarianceReport:
    alpha: float
    spectrum_preservation_defect: float
    weyl_shift_defect: float

    def to_json(self) -> dict:
        return {
            "alpha": self.alpha,
            "spectrum_preservation_defect": self.spectrum_preservation_defect,
            "weyl_shift_defect": self.weyl_shift_defect,
        }


def covariance_violation(cfg: PhysicalConfig, h: OperatorMatrix, t: OperatorMatrix, alpha: float) -> CovarianceReport:
    """Compare the spectrum of U^H T U, U = exp(i alpha H / hbar), with that of T and of T + alpha.

    Unitary similarity keeps the spectrum; covariance of the Weyl type
    would require it to be the old spectrum shifted by alpha. For sorted
    real sequences, pairing in sorted order minimises the max distance.
    """
    _check_hermitian(h)
    _check_hermitian(t)
    e = np.real(np.diag(h.entries))
    if np.max(np.abs(h.entries - np.diag(np.diag(h.entries)))) > 0:
        raise NonHermitianInput("H must be diagonal in the momentum basis")
    u = np.exp(1j * alpha * e / cfg.hbar)
    moved = np.conj(u)[:, None] * t.entries * u[None, :]
    moved = 0.5 * (moved + moved.conj().T)
    base = np.linalg.eigvalsh(t.entries)
    new = np.linalg.eigvalsh(moved)
    return CovarianceReport(
        float(alpha),
        float(np.max(np.abs(new - base))),
        float(np.max(np.abs(new - (base + alpha)))),
    )


# --- studies ----------------------------------------------------------------------


@dataclass(frozen=True)
class LimitTable:
    gammas: tuple
    sup_errors: tuple
    slope: float | None

    def to_json(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "rows": [{"gamma": g, "sup_error": e} for g, e in zip(self.gammas, self.sup_errors)],
            "slope": self.slope,
        }

    def write_csv(self, path, meta=None):
        write_csv(path, ["gamma", "sup_error"], list(zip(self.gammas, self.sup_errors)), meta)


def limit_study(cfg: PhysicalConfig, gammas, points: int = 21) -> LimitTable:
    """Sup over a ``points x points`` grid of |finite part - periodic kernel| for each gamma."""
    gammas = [float(g) for g in gammas]
    x = np.linspace(-cfg.l, cfg.l, points)
    x = 0.5 * (x - x[::-1])
    qq, pp = np.meshgrid(x, x, indexing="ij")
    periodic = kernels.kernel_periodic(cfg, qq, pp)

    def one(g):
        fp = kernels.kernel_finite_part(cfg.replace(gamma=g), qq, pp)
        return float(np.max(np.abs(fp - periodic)))

    errors = parallel_map(one, gammas)
    return LimitTable(tuple(gammas), tuple(errors), log_log_slope(gammas, errors))


@dataclass(frozen=True)
class ConvergenceTable:
    gamma: float
    n_max: tuple
    residuals: np.ndarray  # (n_states, len(n_max))
    seeds: tuple

    @property
    def rms(self) -> np.ndarray:
        return np.sqrt(np.mean(self.residuals**2, axis=0))

    @property
    def ratios(self) -> np.ndarray:
        r = self.rms
        return r[:-1] / r[1:]

    @property
    def slope(self) -> float | None:
        return log_log_slope(self.n_max, self.rms)

    def to_json(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "gamma": self.gamma,
            "n_max": list(self.n_max),
            "seeds": list(self.seeds),
            "rms_residual": [float(x) for x in self.rms],
            "ratios": [float(x) for x in self.ratios],
            "slope": self.slope,
            "residuals": [[float(x) for x in row] for row in self.residuals],
        }

    def write_csv(self, path, meta=None):
        cols = ["n_max", "rms_residual"] + [f"seed_{s}" for s in self.seeds]
        rows = [
            (n, float(self.rms[j]), *[float(x) for x in self.residuals[:, j]])
            for j, n in enumerate(self.n_max)
        ]
        write_csv(path, cols, rows, meta)


def convergence_study(cfg: PhysicalConfig, states, n_max_sequence) -> ConvergenceTable:
    """Commutator residual of each state at each truncation."""
    if isinstance(states, CanonicalState):
        states = [states]
    n_seq = tuple(int(n) for n in n_max_sequence)

    def one(state):
        return [commutator_residual(cfg, BasisSpec.for_config(cfg, n), state) for n in n_seq]

    res = np.array(parallel_map(one, states), dtype=float).reshape(len(states), len(n_seq))
    return ConvergenceTable(cfg.gamma, n_seq, res, tuple(s.seed for s in states))
