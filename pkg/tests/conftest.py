from __future__ import annotations

from pathlib import Path

import pytest

from rvplan.io import load_bundle
from rvplan.model import Registry, Tenant

FIXTURES = Path(__file__).parent / "fixtures"

ACCEPTANCE: dict[int, tuple[str, bool, str]] = {}


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def six_bundle():
    return load_bundle(FIXTURES / "six")


@pytest.fixture
def pair_bundle():
    return load_bundle(FIXTURES / "pair")


@pytest.fixture
def crown_bundle():
    return load_bundle(FIXTURES / "crown")


@pytest.fixture
def reg4() -> Registry:
    """T1..T4 with T1.partners={T2}, T1.competitors={T3}."""
    return Registry(
        (
            Tenant("T1", frozenset({"T2"}), frozenset({"T3"})),
            Tenant("T2"),
            Tenant("T3"),
            Tenant("T4"),
        )
    )


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        name, ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {n}. {name}: {detail}")
