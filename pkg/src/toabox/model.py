"""Physical configuration, the truncated momentum eigenbasis, grids and states.

Everything downstream is expressed in the momentum eigenbasis

    phi_n(q) = exp(i (gamma + n pi) q / l) / sqrt(2 l),   n in Z,

which diagonalises both the twisted momentum operator and the kinetic
Hamiltonian on L^2[-l, l] with phi(-l) = exp(-2 i gamma) phi(l).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import (
    GammaOutOfRange,
    IndexOutOfBasis,
    MixedRepresentation,
    NonPositiveScale,
    PositionOutOfBox,
    UnnormalizedState,
)

PERIODIC = "periodic"
TWISTED = "twisted"


def validate_config(cfg) -> str:
    """Check the scale and boundary-phase invariants of ``cfg``.

    Returns ``"periodic"`` for gamma == 0 (zero mode must be excluded
    downstream) and ``"twisted"`` otherwise.
    """
    for name in ("l", "mu", "hbar"):
        value = getattr(cfg, name)
        if not (math.isfinite(value) and value > 0):
            raise NonPositiveScale(f"{name} must be positive and finite, got {value!r}")
    gamma = cfg.gamma
    if not (math.isfinite(gamma) and 0.0 <= gamma < 1.0):
        raise GammaOutOfRange(f"gamma must lie in [0, 1), got {gamma!r}")
    return PERIODIC if gamma == 0.0 else TWISTED


@dataclass(frozen=True)
class PhysicalConfig:
    """Box half-length ``l``, mass ``mu``, action ``hbar`` and boundary phase ``gamma``."""

    gamma: float
    l: float = 1.0
    mu: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        for name in ("gamma", "l", "mu", "hbar"):
            object.__setattr__(self, name, float(getattr(self, name)))
        validate_config(self)

    @property
    def periodic(self) -> bool:
        return self.gamma == 0.0

    def replace(self, **changes) -> "PhysicalConfig":
        data = {"gamma": self.gamma, "l": self.l, "mu": self.mu, "hbar": self.hbar}
        data.update(changes)
        return PhysicalConfig(**data)


@dataclass(frozen=True)
class MomentumEigenstate:
    n: int
    p_n: float
    E_n: float


def momentum_eigenvalue(cfg: PhysicalConfig, n):
    """hbar (gamma + n pi) / l, elementwise for array ``n``."""
    return cfg.hbar * (cfg.gamma + np.asarray(n) * np.pi) / cfg.l


def energy_eigenvalue(cfg: PhysicalConfig, n):
    p = momentum_eigenvalue(cfg, n)
    return p * p / (2.0 * cfg.mu)


def eigenstate(cfg: PhysicalConfig, n: int) -> MomentumEigenstate:
    p = float(momentum_eigenvalue(cfg, n))
    return MomentumEigenstate(int(n), p, p * p / (2.0 * cfg.mu))


def eval_eigenfunction(cfg: PhysicalConfig, n, q):
    """Evaluate phi_n at ``q`` (scalars or broadcastable arrays)."""
    q = np.asarray(q, dtype=float)
    if np.any(np.abs(q) > cfg.l * (1.0 + 1e-14)):
        raise PositionOutOfBox(f"positions must satisfy |q| <= l = {cfg.l}")
    k = (cfg.gamma + np.asarray(n) * np.pi) / cfg.l
    out = np.exp(1j * k * q) / math.sqrt(2.0 * cfg.l)
    return complex(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class BasisSpec:
    """Symmetric truncation n = -n_max .. n_max of the momentum eigenbasis.

    At gamma == 0 the zero mode is dropped unless ``include_zero`` is set
    explicitly (only useful to exercise the ZeroModePresent guard).
    """

    gamma: float
    n_max: int
    include_zero: bool | None = None

    def __post_init__(self):
        if int(self.n_max) != self.n_max or self.n_max < 1:
            raise ValueError(f"n_max must be a positive integer, got {self.n_max!r}")
        object.__setattr__(self, "n_max", int(self.n_max))
        if self.include_zero is None:
            object.__setattr__(self, "include_zero", self.gamma != 0.0)

    @classmethod
    def for_config(cls, cfg: PhysicalConfig, n_max: int) -> "BasisSpec":
        return cls(cfg.gamma, n_max)

    @cached_property
    def indices(self) -> np.ndarray:
        n = np.arange(-self.n_max, self.n_max + 1)
        if not self.include_zero:
            n = n[n != 0]
        n.setflags(write=False)
        return n

    @property
    def dim(self) -> int:
        return len(self.indices)

    @property
    def has_zero_mode(self) -> bool:
        return bool(self.include_zero)

    def position(self, n):
        """Row/column position of quantum number(s) ``n``."""
        n = np.asarray(n)
        pos = np.searchsorted(self.indices, n)
        pos_c = np.clip(pos, 0, self.dim - 1)
        if np.any(self.indices[pos_c] != n):
            raise IndexOutOfBasis(f"index {n!r} not in basis with n_max={self.n_max}")
        return int(pos_c) if pos_c.ndim == 0 else pos_c

    def eigenstates(self, cfg: PhysicalConfig) -> list[MomentumEigenstate]:
        return [eigenstate(cfg, int(n)) for n in self.indices]


def simpson_weights(m_points: int, h: float) -> np.ndarray:
    """Composite Simpson weights on ``m_points`` uniform nodes.

    Odd counts use the 1/3 rule throughout; even counts close the last three
    intervals with the 3/8 rule so that all weights stay positive.
    """
    if m_points < 4:
        raise ValueError("need at least 4 nodes")
    w = np.zeros(m_points)
    n13 = m_points if m_points % 2 == 1 else m_points - 3
    w[:n13:2] += 2.0
    w[1:n13:2] += 4.0
    w[0] = 1.0
    w[n13 - 1] = 1.0
    w[:n13] *= h / 3.0
    if m_points % 2 == 0:
        w[n13 - 1 :] += np.array([1.0, 3.0, 3.0, 1.0]) * (3.0 * h / 8.0)
    return w


@dataclass(frozen=True)
class GridSpec:
    """Uniform samples of [-l, l], endpoints included, with Simpson weights."""

    m_points: int
    l: float = 1.0
    nodes: np.ndarray = field(init=False, repr=False, compare=False)
    weights: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.m_points < 16:
            raise ValueError(f"m_points must be >= 16, got {self.m_points}")
        # symmetric by construction, not by linspace rounding
        half = np.linspace(0.0, self.l, (self.m_points + 1) // 2) if self.m_points % 2 else None
        if half is not None:
            nodes = np.concatenate([-half[:0:-1], half])
        else:
            nodes = np.linspace(-self.l, self.l, self.m_points)
            nodes = 0.5 * (nodes - nodes[::-1])
        h = 2.0 * self.l / (self.m_points - 1)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", simpson_weights(self.m_points, h))

    @classmethod
    def for_config(cls, cfg: PhysicalConfig, m_points: int) -> "GridSpec":
        return cls(m_points, cfg.l)

    @property
    def spacing(self) -> float:
        return 2.0 * self.l / (self.m_points - 1)


@dataclass(frozen=True)
class GridSamples:
    """A function sampled on a :class:`GridSpec`."""

    values: np.ndarray
    grid: GridSpec


@dataclass(frozen=True)
class WaveState:
    """Expansion coefficients in the momentum eigenbasis of ``basis``."""

    coeffs: np.ndarray
    basis: BasisSpec
    cfg: PhysicalConfig
    normalized: bool = False

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.shape != (self.basis.dim,):
            raise ValueError(f"expected {self.basis.dim} coefficients, got shape {c.shape}")
        object.__setattr__(self, "coeffs", c)
        if self.normalized and abs(self.norm2 - 1.0) > 1e-12:
            raise UnnormalizedState(f"norm^2 = {self.norm2!r} but state flagged normalized")

    @classmethod
    def eigenstate(cls, cfg, basis, n) -> "WaveState":
        c = np.zeros(basis.dim, dtype=complex)
        c[basis.position(n)] = 1.0
        return cls(c, basis, cfg, normalized=True)

    @property
    def norm2(self) -> float:
        return float(np.vdot(self.coeffs, self.coeffs).real)

    def normalize(self) -> "WaveState":
        nrm = math.sqrt(self.norm2)
        if nrm == 0.0:
            raise UnnormalizedState("cannot normalize the zero vector")
        return WaveState(self.coeffs / nrm, self.basis, self.cfg, normalized=True)

    def synthesize(self, grid: GridSpec) -> GridSamples:
        n = self.basis.indices
        phi = eval_eigenfunction(self.cfg, n[None, :], grid.nodes[:, None])
        return GridSamples(phi @ self.coeffs, grid)


def inner_product(a, b) -> complex:
    """L^2[-l, l] inner product, conjugate-linear in ``a``."""
    if isinstance(a, WaveState) and isinstance(b, WaveState):
        if a.basis != b.basis or a.cfg != b.cfg:
            raise MixedRepresentation("states live in different bases/configurations")
        return complex(np.vdot(a.coeffs, b.coeffs))
    if isinstance(a, GridSamples) and isinstance(b, GridSamples):
        if a.grid != b.grid:
            raise MixedRepresentation("samples live on different grids")
        return complex(np.sum(a.grid.weights * np.conj(a.values) * b.values))
    raise MixedRepresentation(
        f"cannot pair {type(a).__name__} with {type(b).__name__}"
    )
