"""Walk generators, Google mixing, Hamiltonian and Lindblad channel construction.

Google mixing with the uniform hopping matrix makes every off-diagonal
rate positive, so the mixed matrices are dense. They are nevertheless
stored in a structured form

    M = S + u * (J - I)

with ``S`` a sparse matrix (``J`` the all-ones matrix, ``u`` a scalar),
which keeps construction and matrix products at O(nnz + n) per vector.
``dense()`` materializes the plain n x n array when needed.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import sparse

from .netio import out_degrees

STOCHASTIC_TOL = 1e-12


class NetworkTooSmall(ValueError):
    pass


@dataclass(frozen=True)
class WalkParameters:
    """Quantum stochastic walk parameters.

    omega interpolates between the coherent walk (0) and the classical
    walk (1); q is the Google damping factor and c the hub constant.
    """

    omega: float = 0.9
    q: float = 0.9
    c: float = 10.0

    def __post_init__(self):
        if not 0.0 <= self.omega <= 1.0:
            raise ValueError(f"omega must lie in [0, 1], got {self.omega}")
        if not 0.0 <= self.q <= 1.0:
            raise ValueError(f"q must lie in [0, 1], got {self.q}")
        if not self.c > 1.0:
            raise ValueError(f"hub constant c must exceed 1, got {self.c}")


def _offdiag_uniform(n: int, u: float) -> np.ndarray:
    out = np.full((n, n), u, dtype=float)
    np.fill_diagonal(out, 0.0)
    return out


@dataclass(frozen=True, eq=False)
class RateMatrix:
    """Column-stochastic transition rates, ``W[i, j]`` = rate from j to i.

    Stored as ``sparse + uniform * (J - I)``; ``sparse`` has a zero
    diagonal and nonnegative entries.
    """

    sparse: sparse.csr_array
    uniform: float = 0.0

    @property
    def n(self) -> int:
        return self.sparse.shape[0]

    @classmethod
    def from_dense(cls, W, check: bool = True) -> "RateMatrix":
        W = np.asarray(W, dtype=float)
        if W.ndim != 2 or W.shape[0] != W.shape[1]:
            raise ValueError(f"rate matrix must be square, got shape {W.shape}")
        out = cls(sparse.csr_array(W))
        if check:
            out.validate()
        return out

    def dense(self) -> np.ndarray:
        return self.sparse.toarray() + _offdiag_uniform(self.n, self.uniform)

    def column_sums(self) -> np.ndarray:
        return np.asarray(self.sparse.sum(axis=0)).ravel() + self.uniform * (self.n - 1)

    def matvec(self, p: np.ndarray) -> np.ndarray:
        """Compute ``W @ p`` without materializing the dense matrix."""
        out = self.sparse @ p
        if self.uniform:
            out = out + self.uniform * (p.sum() - p)
        return out

    def validate(self, tol: float = STOCHASTIC_TOL) -> None:
        if np.any(self.sparse.diagonal() != 0):
            raise ValueError("rate matrix must have a zero diagonal")
        if (self.sparse.nnz and self.sparse.data.min() < 0) or self.uniform < 0:
            raise ValueError("rates must be nonnegative")
        dev = np.abs(self.column_sums() - 1.0).max()
        if dev > tol:
            raise ValueError(f"rate matrix is not column-stochastic (max deviation {dev:.3e})")


@dataclass(frozen=True, eq=False)
class HoppingMatrix:
    """Uniform long-distance hopping: ``1/(n-1)`` off the diagonal."""

    n: int

    def __post_init__(self):
        if self.n < 2:
            raise NetworkTooSmall("network too small: hopping matrix needs n >= 2")

    @property
    def value(self) -> float:
        return 1.0 / (self.n - 1)

    def dense(self) -> np.ndarray:
        return _offdiag_uniform(self.n, self.value)

    def as_rates(self) -> RateMatrix:
        return RateMatrix(sparse.csr_array((self.n, self.n), dtype=float), self.value)


@dataclass(frozen=True, eq=False)
class Hamiltonian:
    """Real symmetric Hamiltonian stored as ``sparse + uniform * (J - I)``.

    ``sparse`` carries the diagonal.
    """

    sparse: sparse.csr_array
    uniform: float = 0.0

    @property
    def n(self) -> int:
        return self.sparse.shape[0]

    @classmethod
    def from_dense(cls, H) -> "Hamiltonian":
        H = np.asarray(H, dtype=float)
        if not np.array_equal(H, H.T):
            raise ValueError("Hamiltonian must be symmetric")
        return cls(sparse.csr_array(H))

    def dense(self) -> np.ndarray:
        return self.sparse.toarray() + _offdiag_uniform(self.n, self.uniform)


@dataclass(frozen=True, eq=False)
class LindbladChannels:
    """Rank-one scattering channels ``sqrt(w) |i><j|``, one per positive rate.

    The channel list is enumerated lazily from ``rates``; ``column_sums``
    holds ``s[j]``, the total outgoing rate of node j, which is also the
    diagonal of the sum of ``L^dagger L`` over channels.
    """

    rates: RateMatrix
    column_sums: np.ndarray

    @property
    def n(self) -> int:
        return self.rates.n

    @cached_property
    def _coo(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        W = self.rates.dense()
        targets, sources = np.nonzero(W > 0)
        return targets, sources, W[targets, sources]

    @property
    def targets(self) -> np.ndarray:
        return self._coo[0]

    @property
    def sources(self) -> np.ndarray:
        return self._coo[1]

    @property
    def weights(self) -> np.ndarray:
        return self._coo[2]

    def __len__(self) -> int:
        return len(self.targets)

    def __iter__(self):
        return zip(self.targets.tolist(), self.sources.tolist(), self.weights.tolist())

    def gain(self, p: np.ndarray) -> np.ndarray:
        """Diagonal of ``sum_k L_k diag(p) L_k^dagger``, i.e. ``W @ p``."""
        return self.rates.matvec(p)

    def to_dense(self) -> np.ndarray:
        """Reassemble the channel rates into an n x n matrix."""
        out = np.zeros((self.n, self.n))
        out[self.targets, self.sources] = self.weights
        return out


def normalized_transition(A) -> RateMatrix:
    """Column-normalize the adjacency; dangling columns become uniform.

    ``W[i, j] = A[i, j] / outDeg(j)``; a column with zero out-degree is
    replaced by ``1/(n-1)`` off the diagonal.
    """
    A = sparse.csr_array(A, dtype=float)
    n = A.shape[0]
    if n < 2:
        raise NetworkTooSmall("network too small: need at least 2 nodes")
    A.setdiag(0)
    A.eliminate_zeros()
    deg = out_degrees(A).astype(float)
    dangling = np.flatnonzero(deg == 0)
    scale = np.divide(1.0, deg, out=np.zeros(n), where=deg > 0)
    W = (A @ sparse.diags_array(scale)).tocsr()
    if len(dangling):
        rows = np.tile(np.arange(n), len(dangling))
        cols = np.repeat(dangling, n)
        keep = rows != cols
        patch = sparse.csr_array(
            (np.full(keep.sum(), 1.0 / (n - 1)), (rows[keep], cols[keep])), shape=(n, n))
        W = (W + patch).tocsr()
    W.sort_indices()
    return RateMatrix(W)


def hopping_matrix(n: int) -> HoppingMatrix:
    return HoppingMatrix(n)


def google_weights(W: RateMatrix, F: HoppingMatrix, q: float) -> RateMatrix:
    """Convex mix ``q * W + (1 - q) * F``."""
    if W.n != F.n:
        raise ValueError(f"dimension mismatch: W is {W.n}x{W.n}, F is {F.n}x{F.n}")
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"q must lie in [0, 1], got {q}")
    S = (q * W.sparse).tocsr()
    if q == 0.0:
        S = sparse.csr_array(W.sparse.shape, dtype=float)
    return RateMatrix(S, q * W.uniform + (1.0 - q) * F.value)


def hamiltonian(WG: RateMatrix) -> Hamiltonian:
    """Symmetrized coherent-hopping operator.

    Off-diagonal ``H[i, j] = -max(W[i, j], W[j, i])``; diagonal
    ``H[j, j] = -sum_i W[i, j]``.  Because both sides of the max share
    the same uniform part, the max is taken over the sparse parts only.
    """
    S = WG.sparse
    Smax = S.maximum(S.T.tocsr())
    H = (-Smax + sparse.diags_array(-WG.column_sums())).tocsr()
    H.sort_indices()
    return Hamiltonian(H, -WG.uniform)


def lindblad_channels(WG: RateMatrix) -> LindbladChannels:
    return LindbladChannels(WG, WG.column_sums())


@dataclass(frozen=True, eq=False)
class WalkOperators:
    rates: RateMatrix
    hamiltonian: Hamiltonian
    channels: LindbladChannels


def build_operators(A, q: float) -> WalkOperators:
    """Adjacency to (Google-mixed rates, Hamiltonian, channels)."""
    W = normalized_transition(A)
    WG = google_weights(W, hopping_matrix(W.n), q)
    return WalkOperators(WG, hamiltonian(WG), lindblad_channels(WG))
