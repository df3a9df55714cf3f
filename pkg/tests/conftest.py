import numpy as np
import pytest

from seiaqr import ModelParams, fixture_params, fixture_state, rc_long, rc_short


@pytest.fixture(scope="session")
def india():
    return fixture_params("india")


@pytest.fixture(scope="session")
def india_x0():
    return fixture_state("india")


@pytest.fixture(scope="session")
def nanjing():
    return fixture_params("nanjing")


@pytest.fixture(scope="session")
def nanjing_x0():
    return fixture_state("nanjing")


def random_long_params(rng, rc_target=None):
    """Positive long-term parameters; ``beta`` rescaled to hit ``rc_target``."""
    p = ModelParams(
        lam=10 ** rng.uniform(2, 5),
        d=10 ** rng.uniform(-5, -3),
        beta=rng.uniform(0.05, 1.0),
        a=rng.uniform(0, 1),
        b=rng.uniform(0, 2),
        c=rng.uniform(0.1, 1.0),
        p=rng.uniform(0.05, 0.95),
        q1=rng.uniform(0.01, 1.0),
        q2=rng.uniform(0.01, 1.0),
        r1=rng.uniform(0.01, 0.5),
        r2=rng.uniform(0.01, 0.5),
        r3=rng.uniform(0.01, 1.0),
    )
    if rc_target is not None:
        p = p.with_values(beta=p.beta * rc_target / rc_long(p))
    return p


def random_short_params(rng, rc_target=None):
    p = random_long_params(rng).with_values(lam=0.0, d=0.0)
    if rc_target is not None:
        p = p.with_values(beta=p.beta * rc_target / rc_short(p))
    return p


@pytest.fixture
def rng():
    return np.random.default_rng(20240521)


# one line per acceptance criterion, echoed after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
