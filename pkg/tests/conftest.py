import json
from functools import lru_cache

import pytest
from hypothesis import HealthCheck, settings

from multlab.bipoly import distinguished_point
from multlab.cli import default_config_path
from multlab.systems import load_system, solve_system

settings.register_profile("repro", derandomize=True, deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repro")

SEED = 20240601


@lru_cache(maxsize=None)
def bundled():
    return json.loads(default_config_path().read_text(encoding="utf-8"))


def system(name):
    return load_system(bundled()["systems"][name])


@lru_cache(maxsize=None)
def solution(name, prec):
    return solve_system(system(name), prec)


def point(name, prec):
    return distinguished_point(solution(name, prec))


@pytest.fixture
def config():
    return bundled()


ACCEPTANCE = {}


@pytest.fixture
def criterion():
    """record(key, ok, detail): one PASS/FAIL line per acceptance criterion."""
    def record(key, ok, detail=""):
        line = f"criterion {key}: {'PASS' if ok else 'FAIL'}" + (f" ({detail})" if detail else "")
        ACCEPTANCE[key] = line
        print(line)
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE, key=lambda k: (int(str(k).split(".")[0]), str(k))):
            terminalreporter.write_line(ACCEPTANCE[key])
