"""Acceptance criteria at their pinned tolerances.

Each test prints one ``[PASS]``/``[FAIL]`` line. Also runnable directly:
``python3 tests/test_acceptance.py``.
"""
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from toabox import acceptance as A

# final RMS commutator residuals at n_max = 32, 64, 128, 256 (16 states, seeds 42..57)
COMMUTATOR_GOLDEN = {
    0.1: [0.002579450824791943, 0.0006010186865391787, 0.00015293836279498812, 3.8902819064870684e-05],
    0.5: [0.002574449748756138, 0.0006000712892704562, 0.00015270431419588899, 3.884810283463023e-05],
    0.9: [0.0025636327467136624, 0.0005980231080331182, 0.00015219775045494365, 3.8729705924048554e-05],
    0.0: [0.002502641619261499, 0.000591882078317247, 0.00015176726084594478, 3.8754065437850006e-05],
}
GOLDEN_RTOL = 1e-9


def _report(capsys, result):
    with capsys.disabled():
        print("\n" + result.line())
    return result


@pytest.mark.parametrize("number", range(1, 10))
def test_criterion(number, capsys):
    result = _report(capsys, A.CRITERIA[number - 1](42))
    assert result.number == number
    assert result.passed, result.metrics


def test_criterion_4_goldens(capsys):
    tables = A.commutator_tables(42)
    ok = all(
        np.allclose(tables[g].rms, golden, rtol=GOLDEN_RTOL, atol=0) for g, golden in COMMUTATOR_GOLDEN.items()
    )
    _report(capsys, A.CriterionResult(4, "pinned residual goldens", ok))
    assert ok, {g: list(t.rms) for g, t in tables.items()}


def test_criterion_10_cli_determinism(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text('{"gamma": 0.5}')
    outs = []
    for name in ("a", "b"):
        proc = subprocess.run(
            [sys.executable, "-m", "toabox.cli", "report", "--config", str(cfg), "--out", str(tmp_path / name)],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0, proc.stderr
        outs.append(tmp_path / name)
    files = sorted(p.name for p in outs[0].iterdir())
    same = files == sorted(p.name for p in outs[1].iterdir()) and all(
        (outs[0] / f).read_bytes() == (outs[1] / f).read_bytes() for f in files
    )
    _report(capsys, A.CriterionResult(10, "identical inputs give byte-identical output", same))
    assert same


def test_criterion_10_in_process(capsys):
    first = A.run_core(42)
    result = _report(capsys, A.criterion_10_determinism(first, 42))
    assert result.passed


if __name__ == "__main__":
    results = A.run_all(42)
    for r in results:
        print(r.line())
    sys.exit(0 if all(r.passed for r in results) else 1)
