import pytest

from torus_lp import GridSpec, build_psi, compute_bounds, gradient_norm_bound, paper_lipschitz

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def psi():
    return build_psi()


@pytest.fixture(scope="session")
def paper_lip(psi):
    return gradient_norm_bound(psi, override=paper_lipschitz())


@pytest.fixture(scope="session")
def table_cache(psi, paper_lip):
    """Bounds tables for the built-in eigenfunction, keyed by (N, exponents), shared by all tests."""
    cache = {}

    def get(n, exponents=(0, 1, 2, 3, 4)):
        key = (n, tuple(exponents))
        if key not in cache:
            cache[key] = compute_bounds(psi, GridSpec(n), paper_lip, exponents)
        return cache[key]

    return get


@pytest.fixture(scope="session")
def table_1500(table_cache):
    return table_cache(1500)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.hookimpl(wrapper=True, tryfirst=True)
def pytest_runtest_makereport(item, call):
    """Expose each phase's report on the item so fixtures can see the outcome at teardown."""
    rep = yield
    setattr(item, f"rep_{rep.when}", rep)
    return rep
