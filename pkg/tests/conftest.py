import numpy as np
import pytest

from qpagerank.netio import Network

ACCEPTANCE_LINES: list[str] = []


def random_network(rng, n: int, p: float = 0.4) -> Network:
    mask = rng.random((n, n)) < p
    np.fill_diagonal(mask, False)
    src, dst = np.nonzero(mask)
    return Network.from_edges(n, zip(src.tolist(), dst.tolist()))


def random_density(rng, n: int, rank: int | None = None) -> np.ndarray:
    rank = n if rank is None else rank
    X = rng.normal(size=(n, rank)) + 1j * rng.normal(size=(n, rank))
    rho = X @ X.conj().T
    return rho / np.trace(rho)


def random_hermitian(rng, n: int) -> np.ndarray:
    X = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (X + X.conj().T) / 2


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
