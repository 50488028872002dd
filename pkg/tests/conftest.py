import pytest


def pytest_runtest_logreport(report):
    # One visible pass/fail line per acceptance criterion.
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    outcome = "PASS" if report.passed else "FAIL"
    print(f"\n[acceptance] {name}: {outcome}")


@pytest.fixture
def cardio_world():
    from semsim.models import build_cardio

    return build_cardio()


@pytest.fixture
def cardio_kernel(cardio_world):
    from semsim.cli import standard_rules
    from semsim.engine import Kernel

    kernel = Kernel(cardio_world)
    standard_rules(kernel)
    return kernel
