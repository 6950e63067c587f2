"""The canonical domain on which H and T satisfy [H, T] = i hbar.

Its spanning functions (n >= 1)

    chi_n(q) = (l g^2 + l pi^2 n^2)^(-1/2) (i g sin(n pi q/l) + n pi cos(n pi q/l)) e^{i g q/l}

live in span{phi_n, phi_-n}; membership additionally requires the single
linear condition sum_n (-1)^n n c_n / sqrt(g^2 + pi^2 n^2) = 0 on the
expansion coefficients c_n, which is the statement phi(+-l) = phi'(+-l) = 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import IndexOutOfBasis, UnprojectedState, ZeroStateAfterProjection
from .model import BasisSpec, PhysicalConfig, energy_eigenvalue
from .operators import toa_matrix_analytic

SPAN = "span"
COMPLEMENT = "complement"

#: relative constraint residual below which a state counts as projected
PROJECTED_TOL = 1e-12


@dataclass(frozen=True)
class DomainBasisFunction:
    """A spanning or complement function as ``coeff_plus phi_n + coeff_minus phi_-n``.

    For the complement function with n = 0 the whole weight sits in
    ``coeff_plus`` on phi_0.
    """

    n: int
    kind: str
    gamma: float
    coeff_plus: complex
    coeff_minus: complex

    def vector(self, basis: BasisSpec) -> np.ndarray:
        v = np.zeros(basis.dim, dtype=complex)
        v[basis.position(self.n)] += self.coeff_plus
        if self.n != 0:
            v[basis.position(-self.n)] += self.coeff_minus
        return v

    def evaluate(self, cfg: PhysicalConfig, q):
        """Explicit sin/cos form in position space."""
        q = np.asarray(q, dtype=float)
        g, n, l = cfg.gamma, self.n, cfg.l
        carrier = np.exp(1j * g * q / l)
        if self.kind == COMPLEMENT and n == 0:
            return carrier / math.sqrt(2 * l)
        s, c = np.sin(n * np.pi * q / l), np.cos(n * np.pi * q / l)
        norm = math.sqrt(l * g * g + l * np.pi**2 * n * n)
        if self.kind == SPAN:
            return (1j * g * s + n * np.pi * c) * carrier / norm
        return (1j * g * c + n * np.pi * s) * carrier / norm


def span_function(cfg: PhysicalConfig, n: int) -> DomainBasisFunction:
    if n < 1:
        raise IndexOutOfBasis(f"span functions start at n = 1, got {n}")
    g = cfg.gamma
    d = math.sqrt(2.0 * (g * g + np.pi**2 * n * n))
    return DomainBasisFunction(n, SPAN, g, (g + n * np.pi) / d + 0j, (n * np.pi - g) / d + 0j)


def complement_function(cfg: PhysicalConfig, n: int) -> DomainBasisFunction:
    if n < 0:
        raise IndexOutOfBasis(f"complement functions start at n = 0, got {n}")
    g = cfg.gamma
    if n == 0:
        return DomainBasisFunction(0, COMPLEMENT, g, 1.0 + 0j, 0j)
    d = math.sqrt(2.0 * (g * g + np.pi**2 * n * n))
    return DomainBasisFunction(n, COMPLEMENT, g, 1j * (g - n * np.pi) / d, 1j * (g + n * np.pi) / d)


@dataclass(frozen=True)
class ConstraintFunctional:
    gamma: float
    weights: np.ndarray

    def apply(self, coeffs) -> complex:
        c = np.asarray(coeffs)
        return complex(self.weights[: c.size] @ c)


def constraint_weights(cfg: PhysicalConfig, n_max: int) -> ConstraintFunctional:
    """w_n = (-1)^n n / sqrt(gamma^2 + pi^2 n^2), n = 1..n_max (dimensionless)."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    n = np.arange(1, n_max + 1, dtype=float)
    sign = np.where(np.arange(1, n_max + 1) % 2 == 0, 1.0, -1.0)
    w = sign * n / np.sqrt(cfg.gamma**2 + np.pi**2 * n * n)
    w.setflags(write=False)
    return ConstraintFunctional(cfg.gamma, w)


@dataclass(frozen=True)
class CanonicalState:
    """Coefficients on the spanning functions chi_1 .. chi_N."""

    gamma: float
    span_coeffs: np.ndarray
    constraint_residual: float
    seed: int | None = None
    s: float | None = None

    @classmethod
    def from_coeffs(cls, cfg: PhysicalConfig, coeffs, **meta) -> "CanonicalState":
        c = np.asarray(coeffs, dtype=complex)
        w = constraint_weights(cfg, c.size)
        return cls(cfg.gamma, c, abs(w.apply(c)), **meta)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.span_coeffs))

    @property
    def projected(self) -> bool:
        return self.constraint_residual <= PROJECTED_TOL * self.norm

    def to_json(self) -> dict:
        return {
            "gamma": self.gamma,
            "n_max": int(self.span_coeffs.size),
            "seed": self.seed,
            "s": self.s,
            "coeffs": [[float(z.real), float(z.imag)] for z in self.span_coeffs],
            "constraint_residual": self.constraint_residual,
        }


def project_onto_domain(coeffs, functional: ConstraintFunctional, active: int | None = None, **meta) -> CanonicalState:
    """Orthogonal projection of ``coeffs`` onto {c : sum_n w_n c_n = 0}.

    With ``active`` set, only the leading ``active`` coefficients are moved
    (orthogonal projection within that coordinate block); the tail is kept
    as is, which preserves its decay.
    """
    c = np.array(coeffs, dtype=complex)
    if c.size > functional.weights.size:
        raise ValueError("functional is shorter than the coefficient vector")
    w = np.asarray(functional.weights[: c.size])
    nrm = float(np.linalg.norm(c))
    if nrm == 0.0:
        raise ZeroStateAfterProjection("zero input state")
    s = complex(w @ c)
    if abs(s) > 0.1 * PROJECTED_TOL * nrm:
        k = c.size if active is None else min(int(active), c.size)
        wk = w[:k]
        c[:k] = c[:k] - wk * (s / float(wk @ wk))
    out_norm = float(np.linalg.norm(c))
    if out_norm <= 1e-12 * nrm:
        raise ZeroStateAfterProjection("input is parallel to the constraint weights")
    return CanonicalState(functional.gamma, c, abs(complex(w @ c)), **meta)


def seeded_domain_state(
    cfg: PhysicalConfig, seed: int, s: float = 3.0, n_ref: int = 1 << 15, anchor: int = 8
) -> CanonicalState:
    """Test state c_n = n^-s e^{i theta_n} (seeded phases), made to satisfy
    the constraint by projecting within the first ``anchor`` coefficients.

    ``n_ref`` is long enough that the state stands in for its infinite
    version at every truncation used downstream.
    """
    if s < 2.5:
        raise ValueError("decay exponent s must be >= 2.5 for a finite energy variance")
    rng = np.random.default_rng(seed)
    n = np.arange(1, n_ref + 1, dtype=float)
    c = n**-s * np.exp(2j * np.pi * rng.random(n_ref))
    return project_onto_domain(c, constraint_weights(cfg, n_ref), active=anchor, seed=seed, s=s)


def span_expansion(cfg: PhysicalConfig, basis: BasisSpec, span_coeffs) -> np.ndarray:
    """Momentum-basis vector of sum_n c_n chi_n (all n must fit in the basis)."""
    c = np.asarray(span_coeffs, dtype=complex)
    k = np.arange(1, c.size + 1)
    if c.size > basis.n_max:
        raise IndexOutOfBasis(f"span index {c.size} exceeds basis n_max {basis.n_max}")
    g = cfg.gamma
    d = np.sqrt(2.0 * (g * g + np.pi**2 * k * k))
    v = np.zeros(basis.dim, dtype=complex)
    v[basis.position(k)] += c * (g + k * np.pi) / d
    v[basis.position(-k)] += c * (k * np.pi - g) / d
    return v


def truncation_window(basis: BasisSpec) -> int:
    """Largest span index a state may populate in ``basis`` (half of n_max)."""
    return basis.n_max // 2


def truncated_vector(cfg: PhysicalConfig, basis: BasisSpec, state: CanonicalState) -> np.ndarray:
    k = min(truncation_window(basis), state.span_coeffs.size)
    return span_expansion(cfg, basis, state.span_coeffs[:k])


@lru_cache(maxsize=32)
def _toa_and_energies(cfg: PhysicalConfig, n_max: int):
    basis = BasisSpec.for_config(cfg, n_max)
    return basis, toa_matrix_analytic(cfg, basis).entries, energy_eigenvalue(cfg, basis.indices)


def commutator_residual(
    cfg: PhysicalConfig, basis: BasisSpec, state: CanonicalState, require_projected: bool = True
) -> float:
    """||([H, T] - i hbar) psi|| / (hbar ||psi||) with psi the state truncated to the basis.

    The state keeps span indices up to n_max // 2; what is cut away is the
    only source of a nonzero residual for a projected state.
    """
    if state.norm == 0.0:
        raise UnprojectedState("zero state: the commutator identity is vacuous")
    if require_projected and not state.projected:
        raise UnprojectedState(
            f"constraint residual {state.constraint_residual:.3e} exceeds {PROJECTED_TOL} x norm"
        )
    if basis.gamma != cfg.gamma:
        raise ValueError("basis and configuration disagree on gamma")
    b, t, e = _toa_and_energies(cfg, basis.n_max)
    v = truncated_vector(cfg, b, state)
    r = e * (t @ v) - t @ (e * v) - 1j * cfg.hbar * v
    return float(np.linalg.norm(r) / (cfg.hbar * np.linalg.norm(v)))


def decompose(cfg: PhysicalConfig, basis: BasisSpec, vector) -> tuple[np.ndarray, np.ndarray]:
    """Split a momentum vector into span and complement coefficients.

    Returns ``(span, complement)`` where ``span[k-1]`` pairs with chi_k and
    ``complement[k]`` with chi_k^perp (index 0 is phi_0 when present).
    Pairs (n, -n) missing from the basis are ignored.
    """
    v = np.asarray(vector, dtype=complex)
    kmax = basis.n_max
    span = np.zeros(kmax, dtype=complex)
    comp = np.zeros(kmax + 1, dtype=complex)
    if basis.has_zero_mode:
        comp[0] = v[basis.position(0)]
    for k in range(1, kmax + 1):
        pair = v[basis.position([k, -k])]
        sf = span_function(cfg, k)
        cf = complement_function(cfg, k)
        span[k - 1] = np.conj(sf.coeff_plus) * pair[0] + np.conj(sf.coeff_minus) * pair[1]
        comp[k] = np.conj(cf.coeff_plus) * pair[0] + np.conj(cf.coeff_minus) * pair[1]
    return span, comp
