from __future__ import annotations

from pathlib import Path

import pytest

from effaction import ModelSpec

ROOT = Path(__file__).resolve().parent.parent
CONFIGS = ROOT / "configs"
GOLDEN = Path(__file__).resolve().parent / "golden"

# criterion id -> (passed, detail); filled by tests/test_acceptance.py
ACCEPTANCE_RESULTS: dict[str, tuple[bool, str]] = {}


@pytest.fixture
def standard():
    """m = 1 + x^2, V = x^2/2, hbar = 1."""
    return ModelSpec.from_strings("1 + x^2", "0.5*x^2", hbar=1.0, domain=(-5.0, 5.0))


@pytest.fixture
def harmonic():
    return ModelSpec.from_strings("1", "0.5*x^2", hbar=1.0, domain=(-10.0, 10.0))


@pytest.fixture
def stiff_harmonic():
    """Constant mass with omega = 2."""
    return ModelSpec.from_strings("1", "2*x^2", hbar=1.0, domain=(-10.0, 10.0))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_RESULTS, key=lambda k: int(k[2:])):
        passed, detail = ACCEPTANCE_RESULTS[key]
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {key} {detail}")


# (config stem, command) pairs with a checked-in golden output
GOLDEN_CASES = [
    ("standard", "eval"),
    ("standard", "tracelog"),
    ("standard", "reparam"),
    ("standard", "evolve"),
    ("standard", "validate"),
    ("harmonic", "eval"),
    ("harmonic", "tracelog"),
    ("harmonic", "reparam"),
    ("harmonic", "evolve"),
    ("harmonic", "validate"),
    ("exponential_mass", "eval"),
    ("exponential_mass", "validate"),
]


def golden_path(stem: str, command: str) -> Path:
    return GOLDEN / f"{stem}.{command}.{'csv' if command in ('eval', 'tracelog', 'evolve') else 'txt'}"
