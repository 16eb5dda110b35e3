from pathlib import Path

import pytest

from ctxbudget.registry import load_registry
from ctxbudget.tokenizer import TokenCounter, load_bpe_table

FIXTURES = Path(__file__).parent / "fixtures"

_acceptance_results = []


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        _acceptance_results.append((report.nodeid.split("::")[-1], report.passed))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One PASS/FAIL line per acceptance criterion."""
    if not _acceptance_results:
        return
    from test_acceptance import CRITERIA

    terminalreporter.section("acceptance criteria")
    for name, passed in _acceptance_results:
        label = CRITERIA.get(name, name)
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {label}")


@pytest.fixture(scope="session")
def registry():
    return load_registry()


@pytest.fixture(scope="session")
def bpe_table():
    return load_bpe_table(
        "minicode",
        FIXTURES / "bpe" / "minicode.merges.txt",
        FIXTURES / "bpe" / "minicode.vocab.json",
    )


@pytest.fixture()
def counter_with_table(bpe_table):
    counter = TokenCounter()
    counter.register(bpe_table)
    return counter


@pytest.fixture()
def billing_csv():
    return FIXTURES / "copilot_billing_30d.csv"
