import numpy as np
import pytest

from svpenum.lattice import generate_basis

_ACCEPTANCE_LINES = []


def instance_corpus(count=50, dims=(2, 3, 4, 5, 6, 7, 8), bits=7, base_seed=1000):
    """Deterministic mixed-dimension basis corpus used across tests."""
    out = []
    for i in range(count):
        n = dims[i % len(dims)]
        out.append((n, generate_basis("uniform", n, bits=bits, seed=base_seed + i)))
    return out


@pytest.fixture(scope="session")
def small_corpus():
    return instance_corpus(count=14, dims=(2, 3, 4, 5, 6), base_seed=500)


@pytest.fixture(scope="session")
def corpus50():
    """The 50-instance acceptance corpus with exact reference norms."""
    from svpenum.oracles import brute_force_svp

    return [(n, basis, brute_force_svp(basis).norm_sq)
            for n, basis in instance_corpus(count=50)]


@pytest.fixture(scope="session")
def criterion():
    """Record and assert one acceptance criterion; lines echo in the summary."""

    def _check(name, passed, detail=""):
        line = f"{name} {'PASS' if passed else 'FAIL'}: {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)
        assert passed, line

    return _check


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
