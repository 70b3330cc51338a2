from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from hardy_forge.poly import Polynomial

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

fractions = st.builds(Fraction, st.integers(-6, 6), st.integers(1, 4))


@st.composite
def polynomials(draw, nvars=None, max_terms=4, max_exp=3):
    n = draw(st.integers(1, 3)) if nvars is None else nvars
    terms = draw(st.dictionaries(
        st.tuples(*[st.integers(0, max_exp) for _ in range(n)]), fractions, max_size=max_terms))
    return Polynomial(n, terms)


@st.composite
def polynomial_pairs(draw, count=2):
    n = draw(st.integers(1, 3))
    return tuple(draw(polynomials(nvars=n)) for _ in range(count))


@pytest.fixture(scope="session")
def corpus():
    from hardy_forge import fixtures

    return fixtures.FIXTURES


def pytest_configure(config):
    config.acceptance_lines = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
