"""``toa-box <subcommand> --config <path> [--out <dir>]``

Exit codes: 0 success, 1 acceptance failure (``report``), 2 configuration or
computation error (one ``error: <Code>: <message>`` line on stderr).
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import acceptance, kernels
from ._io import FORMAT_VERSION, config_hash, dumps, write_csv, write_json
from .analysis import (
    convergence_study,
    covariance_violation,
    hs_norm,
    limit_study,
    spectral_decomposition,
    uncertainty_product,
    write_uncertainty_csv,
)
from .domain import seeded_domain_state, truncated_vector
from .errors import ParseError, ToaBoxError, UnknownKey, ValidationError
from .model import BasisSpec, PhysicalConfig
from .operators import (
    hamiltonian_matrix,
    toa_matrix_analytic,
    toa_matrix_quadrature,
    write_matrix_csv,
)

SUBCOMMANDS = ("kernel", "matrix", "spectrum", "commutator", "uncertainty", "limit", "covariance", "hsnorm", "report")

DEFAULTS: dict[str, Any] = {
    "l": 1.0,
    "mu": 1.0,
    "hbar": 1.0,
    "n_max": 64,
    "panel_order": 64,
    "panels": "auto",
    "m_points": 513,
    "seed": 42,
    "output_dir": "toa-out",
    "kernel_selector": "auto",
    "kernel_points": 21,
    "n_terms": 1000,
    "alphas": [0.5, 1.0, 2.0],
    "limit_gammas": [1e-2, 1e-3, 1e-4],
    "limit_points": 21,
    "n_max_sequence": [32, 64, 128, 256],
    "n_states": 16,
    "decay": 3.0,
}

@dataclass(frozen=True)
class RunConfig:
    physical: PhysicalConfig
    n_max: int
    panel_order: int
    m_points: int
    seed: int
    output_dir: str
    params: dict = field(default_factory=dict)

    def effective(self) -> dict:
        """The full config with defaults filled, minus output location."""
        out = {
            "gamma": self.physical.gamma,
            "l": self.physical.l,
            "mu": self.physical.mu,
            "hbar": self.physical.hbar,
            "n_max": self.n_max,
            "panel_order": self.panel_order,
            "m_points": self.m_points,
            "seed": self.seed,
        }
        out.update(self.params)
        return out

    @property
    def hash(self) -> str:
        return config_hash(self.effective())

    @property
    def panels(self) -> int:
        p = self.params["panels"]
        return max(1, math.ceil(self.n_max / 8)) if p == "auto" else int(p)

    def selector(self) -> str:
        s = self.params["kernel_selector"]
        if s == "auto":
            return "periodic" if self.physical.periodic else "closed"
        return s


def _number(key, value, positive=False, integer=False, minimum=None):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"{key}: expected a number, got {value!r}")
    if integer and (not float(value).is_integer()):
        raise ValidationError(f"{key}: expected an integer, got {value!r}")
    if not math.isfinite(value):
        raise ValidationError(f"{key}: must be finite")
    if positive and value <= 0:
        raise ValidationError(f"{key}: must be positive, got {value!r}")
    if minimum is not None and value < minimum:
        raise ValidationError(f"{key}: must be >= {minimum}, got {value!r}")
    return int(value) if integer else float(value)


def _number_list(key, value, **kw):
    if not isinstance(value, list) or not value:
        raise ValidationError(f"{key}: expected a non-empty list")
    return [_number(f"{key}[{i}]", v, **kw) for i, v in enumerate(value)]


def parse_config(text: str) -> RunConfig:
    """Parse and fully validate a JSON run configuration."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ParseError("top level must be a JSON object")
    unknown = sorted(set(raw) - set(DEFAULTS) - {"gamma"})
    if unknown:
        raise UnknownKey(f"unknown key(s): {', '.join(unknown)}")
    if "gamma" not in raw:
        raise ValidationError("gamma required")
    merged = {**DEFAULTS, **raw}
    gamma = _number("gamma", merged["gamma"])
    try:
        phys = PhysicalConfig(
            gamma,
            _number("l", merged["l"]),
            _number("mu", merged["mu"]),
            _number("hbar", merged["hbar"]),
        )
    except ToaBoxError as exc:
        key = "gamma" if exc.code == "GammaOutOfRange" else "l/mu/hbar"
        raise ValidationError(f"{key}: {exc}") from None
    n_max = _number("n_max", merged["n_max"], positive=True, integer=True)
    panel_order = _number("panel_order", merged["panel_order"], integer=True, minimum=8)
    m_points = _number("m_points", merged["m_points"], integer=True, minimum=16)
    seed = _number("seed", merged["seed"], integer=True, minimum=0)
    out_dir = merged["output_dir"]
    if not isinstance(out_dir, str) or not out_dir:
        raise ValidationError("output_dir: expected a non-empty string")

    params: dict[str, Any] = {}
    panels = merged["panels"]
    params["panels"] = panels if panels == "auto" else _number("panels", panels, positive=True, integer=True)
    sel = merged["kernel_selector"]
    if sel != "auto" and sel not in kernels.KERNELS:
        raise ValidationError(f"kernel_selector: expected 'auto' or one of {kernels.KERNELS}, got {sel!r}")
    params["kernel_selector"] = sel
    params["kernel_points"] = _number("kernel_points", merged["kernel_points"], integer=True, minimum=2)
    params["n_terms"] = _number("n_terms", merged["n_terms"], positive=True, integer=True)
    params["alphas"] = _number_list("alphas", merged["alphas"])
    params["limit_gammas"] = _number_list("limit_gammas", merged["limit_gammas"], positive=True)
    if any(g >= 1.0 for g in params["limit_gammas"]):
        raise ValidationError("limit_gammas: entries must lie in (0, 1)")
    params["limit_points"] = _number("limit_points", merged["limit_points"], integer=True, minimum=2)
    params["n_max_sequence"] = _number_list("n_max_sequence", merged["n_max_sequence"], positive=True, integer=True)
    params["n_states"] = _number("n_states", merged["n_states"], positive=True, integer=True)
    params["decay"] = _number("decay", merged["decay"], minimum=2.5)
    return RunConfig(phys, n_max, panel_order, m_points, seed, out_dir, params)


# --- subcommands --------------------------------------------------------------------


def _meta(rc: RunConfig, what: str) -> dict:
    return {"output": what, "format_version": FORMAT_VERSION, "config_hash": rc.hash}


def _json(rc: RunConfig, what: str, payload: dict) -> dict:
    return {**_meta(rc, what), **payload}


def cmd_kernel(rc: RunConfig, out: Path) -> int:
    sel = rc.selector()
    q, qp, vals = kernels.kernel_grid(sel, rc.physical, rc.params["kernel_points"], rc.params["n_terms"])
    kernels.write_kernel_csv(out / f"kernel_{sel}.csv", sel, rc.physical, q, qp, vals, rc.hash)
    return 0


def cmd_matrix(rc: RunConfig, out: Path) -> int:
    cfg = rc.physical
    basis = BasisSpec.for_config(cfg, rc.n_max)
    exact = toa_matrix_analytic(cfg, basis)
    quad = toa_matrix_quadrature(cfg, basis, "periodic" if cfg.periodic else "closed", rc.panel_order, rc.panels)
    write_matrix_csv(out / "toa_analytic.csv", exact, cfg, rc.hash)
    write_matrix_csv(out / "toa_quadrature.csv", quad, cfg, rc.hash)
    diff = np.abs(exact.entries - quad.entries)
    summary = {
        "label": exact.label,
        "n_max": rc.n_max,
        "panel_order": rc.panel_order,
        "panels": rc.panels,
        "max_entry_difference": float(diff.max()),
        "mean_entry_difference": float(diff.mean()),
        "hermitization_defect": quad.hermitization_defect,
    }
    write_json(out / "matrix_summary.json", _json(rc, "matrix", summary))
    return 0


def cmd_spectrum(rc: RunConfig, out: Path) -> int:
    cfg = rc.physical
    rep = spectral_decomposition(toa_matrix_analytic(cfg, BasisSpec.for_config(cfg, rc.n_max)))
    rep.write_csv(out / "spectrum.csv", _meta(rc, "spectrum"))
    write_json(out / "spectrum.json", _json(rc, "spectrum", rep.to_json()))
    return 0


def _states(rc: RunConfig, count: int):
    return [seeded_domain_state(rc.physical, rc.seed + k, rc.params["decay"]) for k in range(count)]


def cmd_commutator(rc: RunConfig, out: Path) -> int:
    cfg = rc.physical
    table = convergence_study(cfg, _states(rc, rc.params["n_states"]), rc.params["n_max_sequence"])
    table.write_csv(out / "commutator.csv", _meta(rc, "commutator"))
    write_json(out / "commutator.json", _json(rc, "commutator", table.to_json()))
    return 0


def cmd_uncertainty(rc: RunConfig, out: Path) -> int:
    cfg = rc.physical
    basis = BasisSpec.for_config(cfg, rc.n_max)
    h = hamiltonian_matrix(cfg, basis)
    t = toa_matrix_analytic(cfg, basis)
    reports = []
    for st in _states(rc, rc.params["n_states"]):
        v = truncated_vector(cfg, basis, st)
        reports.append(uncertainty_product(cfg, h, t, v / np.linalg.norm(v), state_id=f"seed_{st.seed}"))
    decomp = spectral_decomposition(t)
    for k in (0, basis.dim // 2 + 1, basis.dim - 1):
        reports.append(uncertainty_product(cfg, h, t, decomp.eigenvectors[:, k], state_id=f"T_eigenvector_{k}", strict=False))
    write_uncertainty_csv(out / "uncertainty.csv", reports, _meta(rc, "uncertainty"))
    return 0


def cmd_limit(rc: RunConfig, out: Path) -> int:
    base = rc.physical if not rc.physical.periodic else rc.physical.replace(gamma=0.5)
    table = limit_study(base, rc.params["limit_gammas"], rc.params["limit_points"])
    table.write_csv(out / "limit.csv", _meta(rc, "limit"))
    write_json(out / "limit.json", _json(rc, "limit", table.to_json()))
    return 0


def cmd_covariance(rc: RunConfig, out: Path) -> int:
    cfg = rc.physical
    basis = BasisSpec.for_config(cfg, rc.n_max)
    h = hamiltonian_matrix(cfg, basis)
    t = toa_matrix_analytic(cfg, basis)
    reps = [covariance_violation(cfg, h, t, a) for a in rc.params["alphas"]]
    rows = [(r.alpha, r.spectrum_preservation_defect, r.weyl_shift_defect) for r in reps]
    write_csv(out / "covariance.csv", ["alpha", "spectrum_preservation_defect", "weyl_shift_defect"], rows,
              _meta(rc, "covariance"))
    return 0


def cmd_hsnorm(rc: RunConfig, out: Path) -> int:
    sel = rc.selector()
    value = hs_norm(sel, rc.physical, rc.panel_order, 1)
    write_json(out / "hsnorm.json", _json(rc, "hsnorm", {"kernel": sel, "hs_norm": value}))
    return 0


def cmd_report(rc: RunConfig, out: Path) -> int:
    results = acceptance.run_all(rc.seed)
    for r in results:
        print(r.line())
    payload = {
        "all_passed": all(r.passed for r in results),
        "criteria": [r.to_json() for r in results],
    }
    write_json(out / "report.json", _json(rc, "report", payload))
    rows = [(r.number, r.name.replace(",", ";"), "pass" if r.passed else "fail") for r in results]
    write_csv(out / "report.csv", ["criterion", "name", "status"], rows, _meta(rc, "report"))
    return 0 if payload["all_passed"] else 1


COMMANDS = {
    "kernel": cmd_kernel,
    "matrix": cmd_matrix,
    "spectrum": cmd_spectrum,
    "commutator": cmd_commutator,
    "uncertainty": cmd_uncertainty,
    "limit": cmd_limit,
    "covariance": cmd_covariance,
    "hsnorm": cmd_hsnorm,
    "report": cmd_report,
}


def run(subcommand: str, rc: RunConfig, out_dir: str | Path | None = None) -> int:
    out = Path(out_dir if out_dir is not None else rc.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "effective_config.json").write_text(dumps({**rc.effective(), "config_hash": rc.hash}))
    return COMMANDS[subcommand](rc, out)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="toa-box", description=__doc__.splitlines()[0])
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("--config", required=True, help="JSON run configuration")
    parser.add_argument("--out", default=None, help="output directory (overrides output_dir)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise ParseError(f"cannot read config: {exc.strerror}") from None
        rc = parse_config(text)
        return run(args.subcommand, rc, args.out)
    except (ToaBoxError, ValueError) as exc:
        code = exc.code if isinstance(exc, ToaBoxError) else type(exc).__name__
        print(f"error: {code}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
