import math

import numpy as np
import pytest


def full_space_ops(N):
    """Ladder operators a1, a2 on the truncated two-mode space (0..N each)."""
    a = np.diag(np.sqrt(np.arange(1, N + 1, dtype=float)), 1)
    eye = np.eye(N + 1)
    return np.kron(a, eye), np.kron(eye, a)


def sector_isometry(N):
    """Columns are |k, N-k> embedded in the full two-mode space, k = 0..N."""
    V = np.zeros(((N + 1) ** 2, N + 1))
    for k in range(N + 1):
        V[k * (N + 1) + (N - k), k] = 1.0
    return V


def restrict(op, N):
    V = sector_isometry(N)
    return V.T @ op @ V


def condensate_by_creation(psi1, psi2, N):
    """(psi1 a1+ + psi2 a2+)^N |vac> / sqrt(N!) in the full space, restricted."""
    a1, a2 = full_space_ops(N)
    create = psi1 * a1.T + psi2 * a2.T
    vac = np.zeros((N + 1) ** 2, dtype=complex)
    vac[0] = 1.0
    state = vac
    for _ in range(N):
        state = create @ state
    state /= math.sqrt(math.factorial(N))
    return sector_isometry(N).T @ state


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def acceptance(request):
    """Record one pass/fail line per acceptance criterion."""
    log = request.config.stash.setdefault(ACCEPTANCE_KEY, [])

    def report(number, title, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title} -- {detail}"
        log.append((number, line))
        print(line)
        return ok

    return report


def pytest_terminal_summary(terminalreporter, config):
    log = config.stash.get(ACCEPTANCE_KEY, [])
    if log:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(log):
            terminalreporter.write_line(line)
