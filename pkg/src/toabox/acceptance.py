"""Acceptance criteria as executable checks.

Each ``criterion_*`` returns a :class:`CriterionResult` with the measured
quantities and a pass flag computed against the pinned tolerances below.
``run_all`` is what ``toa-box report`` executes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from ._io import dumps
from .analysis import (
    convergence_study,
    covariance_violation,
    hs_norm,
    limit_study,
    spectral_decomposition,
    uncertainty_product,
    zero_expectation_suite,
)
from .domain import seeded_domain_state, truncated_vector
from .model import BasisSpec, PhysicalConfig
from .operators import (
    hermitian_defect,
    hamiltonian_matrix,
    momentum_inverse_matrix,
    momentum_matrix,
    position_matrix,
    toa_matrix_analytic,
    toa_matrix_quadrature,
)
from .quadrature import log_log_slope

TWISTED_GAMMAS = (0.1, 0.5, 0.9)
ALL_GAMMAS = TWISTED_GAMMAS + (0.0,)

ORACLE_TOL = 1e-8
SLOPE_RANGE = (-1.3, -0.7)
KERNEL_HERMITIAN_TOL = 1e-14
MATRIX_HERMITIAN_TOL = 1e-12
HS_PERIODIC_GOLDEN = math.sqrt(7.0 / 90.0)
HS_TOL = 1e-6
HS_SCALING_TOL = 1e-9
COMMUTATOR_RATIO_MIN = 2.0
COMMUTATOR_NMAX = (32, 64, 128, 256)
COMMUTATOR_STATES = 16
ZERO_EXPECTATION_TOL = 1e-12
UNCERTAINTY_NMAX = 256
UNCERTAINTY_STATES = 100
UNCERTAINTY_FLOOR = 0.5 * (1.0 - 1e-3)
WITNESS_CEILING = 0.25
LIMIT_GAMMAS = (1e-2, 1e-3, 1e-4)
LIMIT_SLOPE_RANGE = (0.8, 1.2)
COVARIANCE_ALPHAS = (0.5, 1.0, 2.0)
SPECTRUM_PRESERVATION_TOL = 1e-10
WEYL_SLACK = 1e-6
SPECTRAL_TOL = 1e-10


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    metrics: dict = field(default_factory=dict)

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] criterion {self.number}: {self.name}"

    def to_json(self) -> dict:
        return {"criterion": self.number, "name": self.name, "passed": self.passed, "metrics": self.metrics}


def criterion_1_oracle_equivalence(n_max: int = 8, panel_order: int = 64) -> CriterionResult:
    metrics = {}
    for g in ALL_GAMMAS:
        cfg = PhysicalConfig(g)
        basis = BasisSpec.for_config(cfg, n_max)
        exact = toa_matrix_analytic(cfg, basis)
        quad = toa_matrix_quadrature(cfg, basis, "periodic" if g == 0.0 else "closed", panel_order)
        metrics[f"gamma={g}"] = {
            "max_entry_difference": float(np.max(np.abs(exact.entries - quad.entries))),
            "hermitization_defect": quad.hermitization_defect,
        }
    passed = all(m["max_entry_difference"] < ORACLE_TOL for m in metrics.values())
    return CriterionResult(1, "analytic vs Nystrom TOA matrices", passed, metrics)


def series_slopes(cfg: PhysicalConfig, seed: int, n_pairs: int = 100):
    """Log-log slope of |closed - series(N)| for pseudo-random off-diagonal pairs."""
    rng = np.random.default_rng(seed)
    pairs = []
    while len(pairs) < n_pairs:
        a, b = rng.uniform(-cfg.l, cfg.l, 2)
        if abs(a - b) > 0.05 * cfg.l:
            pairs.append((a, b))
    q, qp = np.array(pairs).T
    checkpoints = np.unique(np.round(np.geomspace(16, 16384, 31)).astype(np.int64))
    partial = kernels.kernel_series_partial_sums(cfg, q, qp, checkpoints)
    closed = kernels.kernel_closed(cfg, q, qp)
    err = np.abs(partial - closed[:, None])
    return np.array([log_log_slope(checkpoints, e) for e in err]), err[:, -1]


def _kernel_hermitian_defect(cfg: PhysicalConfig, points: int = 41) -> dict:
    x = np.linspace(-cfg.l, cfg.l, points)
    qq, pp = np.meshgrid(x, x, indexing="ij")
    out = {}
    names = ["periodic"] if cfg.gamma == 0.0 else ["closed", "series", "zero_mode", "finite_part", "periodic"]
    for name in names:
        k = np.asarray(kernels.evaluate(name, cfg, qq, pp, n_terms=200))
        out[name] = float(np.max(np.abs(k - np.conj(k.T))))
    return out


def criterion_2_kernel_consistency(seed: int = 42) -> CriterionResult:
    metrics = {}
    ok = True
    for g in TWISTED_GAMMAS:
        cfg = PhysicalConfig(g)
        slopes, final = series_slopes(cfg, seed)
        herm = _kernel_hermitian_defect(cfg)
        metrics[f"gamma={g}"] = {
            "slope_min": float(slopes.min()),
            "slope_max": float(slopes.max()),
            "slope_median": float(np.median(slopes)),
            "max_error_at_16384_terms": float(final.max()),
            "hermitian_defect": herm,
        }
        ok &= SLOPE_RANGE[0] <= slopes.min() and slopes.max() <= SLOPE_RANGE[1]
        ok &= max(herm.values()) < KERNEL_HERMITIAN_TOL
    herm0 = _kernel_hermitian_defect(PhysicalConfig(0.0))
    metrics["gamma=0.0"] = {"hermitian_defect": herm0}
    ok &= max(herm0.values()) < KERNEL_HERMITIAN_TOL
    return CriterionResult(2, "closed vs series kernel; kernel Hermiticity", bool(ok), metrics)


def criterion_3_self_adjointness(n_max: int = 16) -> CriterionResult:
    defects = {}
    for g in ALL_GAMMAS:
        cfg = PhysicalConfig(g)
        basis = BasisSpec.for_config(cfg, n_max)
        mats = [position_matrix(cfg, basis), momentum_matrix(cfg, basis), momentum_inverse_matrix(cfg, basis),
                hamiltonian_matrix(cfg, basis), toa_matrix_analytic(cfg, basis)]
        for m in mats:
            defects[f"{m.label}@gamma={g}"] = hermitian_defect(m.entries)
        quad = toa_matrix_quadrature(cfg, BasisSpec.for_config(cfg, 8), "periodic" if g == 0.0 else "closed", 64)
        defects[f"{quad.label}_quadrature_pre_hermitization@gamma={g}"] = quad.hermitization_defect
    base = PhysicalConfig(0.0)
    hs = hs_norm("periodic", base)
    scaling = {}
    for s in (0.5, 2.0, 3.0):
        ratio = hs_norm("periodic", base.replace(l=s)) ** 2 / hs**2
        scaling[f"l={s}"] = abs(ratio / s**4 - 1.0)
    hs_closed = hs_norm("closed", PhysicalConfig(0.5))
    passed = (
        max(defects.values()) < MATRIX_HERMITIAN_TOL
        and abs(hs - HS_PERIODIC_GOLDEN) < HS_TOL
        and max(scaling.values()) < HS_SCALING_TOL
    )
    metrics = {
        "max_hermitian_defect": max(defects.values()),
        "hermitian_defects": defects,
        "hs_norm_periodic": hs,
        "hs_norm_periodic_golden": HS_PERIODIC_GOLDEN,
        "hs_l4_scaling_relative_error": scaling,
        "hs_norm_closed_gamma_0.5": hs_closed,
    }
    return CriterionResult(3, "Hermiticity and Hilbert-Schmidt boundedness", passed, metrics)


def commutator_tables(seed: int = 42):
    seeds = [seed + k for k in range(COMMUTATOR_STATES)]
    out = {}
    for g in ALL_GAMMAS:
        cfg = PhysicalConfig(g)
        states = [seeded_domain_state(cfg, s) for s in seeds]
        out[g] = convergence_study(cfg, states, COMMUTATOR_NMAX)
    return out


def criterion_4_canonical_commutation(seed: int = 42) -> CriterionResult:
    metrics = {}
    ok = True
    for g, table in commutator_tables(seed).items():
        metrics[f"gamma={g}"] = {
            "n_max": list(table.n_max),
            "rms_residual": [float(x) for x in table.rms],
            "ratios": [float(x) for x in table.ratios],
            "slope": table.slope,
        }
        ok &= bool(np.all(table.ratios >= COMMUTATOR_RATIO_MIN))
    return CriterionResult(4, "[H,T] = i hbar on the canonical domain (truncation trend)", bool(ok), metrics)


def criterion_5_zero_expectation(n_max: int = 10) -> CriterionResult:
    metrics = {f"gamma={g}": zero_expectation_suite(PhysicalConfig(g), n_max).max_abs for g in TWISTED_GAMMAS}
    return CriterionResult(5, "zero TOA expectation on span/complement functions",
                           max(metrics.values()) < ZERO_EXPECTATION_TOL, metrics)


def uncertainty_batch(seed: int = 42, gamma: float = 0.5):
    cfg = PhysicalConfig(gamma)
    basis = BasisSpec.for_config(cfg, UNCERTAINTY_NMAX)
    h = hamiltonian_matrix(cfg, basis)
    t = toa_matrix_analytic(cfg, basis)
    reports = []
    for k in range(UNCERTAINTY_STATES):
        v = truncated_vector(cfg, basis, seeded_domain_state(cfg, seed + k))
        reports.append(uncertainty_product(cfg, h, t, v / np.linalg.norm(v), state_id=f"seed_{seed + k}"))
    decomp = spectral_decomposition(t)
    # eigenvector nearest the middle of the spectrum: ~flat momentum profile, far from the domain
    mid = decomp.eigenvectors[:, basis.dim // 2 + 1]
    witness = uncertainty_product(cfg, h, t, mid, state_id="T_eigenvector", strict=False)
    return reports, witness


def criterion_6_uncertainty(seed: int = 42) -> CriterionResult:
    reports, witness = uncertainty_batch(seed)
    products = np.array([r.product for r in reports])
    in_domain = all(r.in_domain for r in reports)
    passed = bool(products.min() >= UNCERTAINTY_FLOOR and in_domain
                  and witness.product < WITNESS_CEILING and not witness.in_domain)
    metrics = {
        "n_states": len(reports),
        "min_product": float(products.min()),
        "all_in_domain": in_domain,
        "witness_delta_T": witness.delta_T,
        "witness_product": witness.product,
        "witness_in_domain": witness.in_domain,
    }
    return CriterionResult(6, "TOA-energy uncertainty on the domain; violation outside", passed, metrics)


def criterion_7_finite_part_limit() -> CriterionResult:
    table = limit_study(PhysicalConfig(0.5), LIMIT_GAMMAS)
    passed = table.slope is not None and LIMIT_SLOPE_RANGE[0] <= table.slope <= LIMIT_SLOPE_RANGE[1]
    return CriterionResult(7, "finite part tends to the periodic kernel linearly in gamma", passed,
                           {"gammas": list(table.gammas), "sup_errors": list(table.sup_errors), "slope": table.slope})


def criterion_8_covariance_violation(n_max: int = 64, gamma: float = 0.5) -> CriterionResult:
    cfg = PhysicalConfig(gamma)
    basis = BasisSpec.for_config(cfg, n_max)
    h = hamiltonian_matrix(cfg, basis)
    t = toa_matrix_analytic(cfg, basis)
    reports = [covariance_violation(cfg, h, t, a) for a in COVARIANCE_ALPHAS]
    passed = all(
        r.spectrum_preservation_defect < SPECTRUM_PRESERVATION_TOL and r.weyl_shift_defect >= abs(r.alpha) - WEYL_SLACK
        for r in reports
    )
    return CriterionResult(8, "no Weyl-shift covariance of the (H, T) pair", passed,
                           {f"alpha={r.alpha}": r.to_json() for r in reports})


def criterion_9_spectral_structure(n_max: int = 128) -> CriterionResult:
    metrics = {}
    ok = True
    for g in ALL_GAMMAS:
        cfg = PhysicalConfig(g)
        t = toa_matrix_analytic(cfg, BasisSpec.for_config(cfg, n_max))
        rep = spectral_decomposition(t)
        # independent of eigh: a general eigensolver must find no imaginary parts
        imag = float(np.max(np.abs(np.linalg.eigvals(t.entries).imag)))
        metrics[f"gamma={g}"] = {
            "max_imag_general_solver": imag,
            "pairing_defect": rep.pairing_defect,
            "eigenvalue_sum": rep.eigenvalue_sum,
        }
        ok &= imag < SPECTRAL_TOL and rep.pairing_defect < SPECTRAL_TOL and abs(rep.eigenvalue_sum) < SPECTRAL_TOL
    return CriterionResult(9, "real, +- paired, zero-sum TOA spectrum", bool(ok), metrics)


CRITERIA = (
    lambda seed: criterion_1_oracle_equivalence(),
    criterion_2_kernel_consistency,
    lambda seed: criterion_3_self_adjointness(),
    criterion_4_canonical_commutation,
    lambda seed: criterion_5_zero_expectation(),
    criterion_6_uncertainty,
    lambda seed: criterion_7_finite_part_limit(),
    lambda seed: criterion_8_covariance_violation(),
    lambda seed: criterion_9_spectral_structure(),
)


def run_core(seed: int = 42) -> list[CriterionResult]:
    return [c(seed) for c in CRITERIA]


def criterion_10_determinism(first: list[CriterionResult], seed: int = 42) -> CriterionResult:
    """Recompute criteria 1-9 and compare the serialized results byte for byte."""
    a = dumps([r.to_json() for r in first]).encode()
    b = dumps([r.to_json() for r in run_core(seed)]).encode()
    return CriterionResult(10, "identical inputs give byte-identical output", a == b,
                           {"bytes_compared": len(a)})


def run_all(seed: int = 42) -> list[CriterionResult]:
    results = run_core(seed)
    results.append(criterion_10_determinism(results, seed))
    return results
