import os

import pytest
from hypothesis import HealthCheck, settings

from focalpolicy.domains import load_space
from focalpolicy.policy import build_opt_table, synthesize_policy

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture])
settings.register_profile("ci", max_examples=200, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def tile8():
    return load_space("tile8")


@pytest.fixture(scope="session")
def pancake9():
    return load_space("pancake9")


@pytest.fixture(scope="session")
def blocks8():
    return load_space("blocks8")


@pytest.fixture(scope="session")
def tile8_opt(tile8):
    return build_opt_table(tile8.domain, tile8.table, seed=0)


@pytest.fixture(scope="session")
def pancake9_opt(pancake9):
    return build_opt_table(pancake9.domain, pancake9.table, seed=0)


@pytest.fixture(scope="session")
def tile8_policies(tile8, tile8_opt):
    cache = {}

    def get(acc, seed=0):
        if (acc, seed) not in cache:
            cache[acc, seed] = synthesize_policy(tile8_opt, tile8.domain, acc, seed)
        return cache[acc, seed]
    return get


CRITERIA = {}


def record_criterion(number: int, ok: bool, detail: str):
    CRITERIA[number] = (ok, detail)


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        ok, detail = CRITERIA[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
