"""Lindblad right-hand side for the quantum stochastic walk.

The master equation

    drho/dt = -(1 - w) i [H, rho]
              + w sum_k (L_k rho L_k^+ - 1/2 {L_k^+ L_k, rho})

is evaluated matrix-free. Every channel is rank one,
``L_k = sqrt(w_ij) |i><j|``, so the gain term collapses to
``diag(W @ diag(rho))`` and ``sum_k L_k^+ L_k`` to ``diag(s)`` with
``s`` the column sums of the rate matrix. Together with the structured
Hamiltonian this needs O(nnz(H) * n + n^2) work and a handful of n x n
buffers per call; no n^2 x n^2 object is ever formed.

``dense_superoperator`` builds the full vectorized generator from
explicit Kronecker products for small n and serves as the test oracle.
Vectorization is row-major, under which ``vec(A X B) = (A kron B^T) vec(X)``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from scipy import sparse

from .operators import Hamiltonian, LindbladChannels

DENSE_GUARD = 40


class SuperoperatorTooLarge(MemoryError):
    pass


def _check_omega(omega: float) -> float:
    omega = float(omega)
    if not 0.0 <= omega <= 1.0:
        raise ValueError(f"omega must lie in [0, 1], got {omega}")
    return omega


def _row_blocks(n: int, parts: int) -> list[slice]:
    parts = max(1, min(parts, n))
    bounds = np.linspace(0, n, parts + 1).astype(int)
    return [slice(a, b) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


class LindbladRHS:
    """Callable ``f(t, rho)`` evaluating the master equation matrix-free.

    ``threads`` splits the output rows into contiguous blocks, each
    written by one worker. Every entry is produced by the same
    arithmetic in the same order whatever the split, so results are
    bitwise independent of the thread count.

    ``rho`` must be Hermitian: the kernel forms ``X = H rho`` once and
    uses ``rho H = X^+``.
    """

    def __init__(self, H: Hamiltonian, channels: LindbladChannels, omega: float,
                 threads: int = 1):
        if H.n != channels.n:
            raise ValueError(f"dimension mismatch: H is {H.n}, channels are {channels.n}")
        self.n = H.n
        self.omega = _check_omega(omega)
        self.H = H
        self.channels = channels
        self._Hs = H.sparse.astype(complex).tocsr()
        self._u = H.uniform
        self._coh = -(1.0 - self.omega) * 1j
        s = np.asarray(channels.column_sums, dtype=float)
        self._damp = self.omega * 0.5 * (s[:, None] + s[None, :])
        self._blocks = _row_blocks(self.n, threads)
        self._Hrows = {blk.start: self._Hs[blk] for blk in self._blocks}
        self.threads = len(self._blocks)
        self._pool = ThreadPoolExecutor(self.threads) if self.threads > 1 else None

    def close(self):
        if self._pool is not None:
            self._pool.shutdown()
            self._pool = None

    def __del__(self):
        pool = getattr(self, "_pool", None)
        if pool is not None:
            pool.shutdown(wait=False)

    def _map(self, fn):
        if self._pool is None:
            for blk in self._blocks:
                fn(blk)
        else:
            for fut in [self._pool.submit(fn, blk) for blk in self._blocks]:
                fut.result()

    def __call__(self, t, rho: np.ndarray) -> np.ndarray:
        return self.rhs(rho)

    def rhs(self, rho: np.ndarray) -> np.ndarray:
        rho = np.asarray(rho)
        if rho.shape != (self.n, self.n):
            raise ValueError(f"rho has shape {rho.shape}, expected {(self.n, self.n)}")
        if rho.dtype != np.complex128:
            rho = rho.astype(np.complex128)

        u = self._u
        colsum = rho.sum(axis=0) if u else None
        X = np.empty_like(rho)
        out = np.empty_like(rho)

        def commutator_rows(blk):
            xb = self._Hrows[blk.start] @ rho
            if u:
                xb -= u * rho[blk]
                xb += u * colsum
            X[blk] = xb

        def assemble_rows(blk):
            ob = X[blk] - X[:, blk].conj().T
            ob *= self._coh
            ob -= self._damp[blk] * rho[blk]
            out[blk] = ob

        self._map(commutator_rows)
        self._map(assemble_rows)
        if self.omega:
            idx = np.arange(self.n)
            out[idx, idx] += self.omega * self.channels.gain(rho.diagonal())
        return out


def lindblad_rhs(H: Hamiltonian, channels: LindbladChannels, omega: float,
                 rho: np.ndarray, threads: int = 1) -> np.ndarray:
    """One-shot evaluation of the master-equation derivative at ``rho``."""
    f = LindbladRHS(H, channels, omega, threads=threads)
    try:
        return f.rhs(rho)
    finally:
        f.close()


def kron_element(A, B, i: int, j: int):
    """Entry ``(i, j)`` of ``kron(A, B)`` from the factors alone.

    Indices are 0-based: ``A[i // m, j // r] * B[i % m, j % r]`` for
    ``B`` of shape ``(m, r)``.
    """
    A = np.asarray(A)
    B = np.asarray(B)
    m, r = B.shape
    rows, cols = A.shape[0] * m, A.shape[1] * r
    if not (0 <= i < rows and 0 <= j < cols):
        raise IndexError(f"index ({i}, {j}) out of range for {rows}x{cols} product")
    return A[i // m, j // r] * B[i % m, j % r]


def vectorize(rho) -> np.ndarray:
    """Row-major flattening of a square matrix."""
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {rho.shape}")
    return rho.reshape(-1).copy()


def devectorize(v) -> np.ndarray:
    v = np.asarray(v)
    n = math.isqrt(v.size)
    if v.ndim != 1 or n * n != v.size:
        raise ValueError(f"vector length {v.size} is not a perfect square")
    return v.reshape(n, n).copy()


def dense_superoperator(H: Hamiltonian, channels: LindbladChannels, omega: float,
                        guard: int = DENSE_GUARD) -> np.ndarray:
    """Full n^2 x n^2 generator acting on row-major ``vec(rho)``.

    Built term by term from Kronecker products of the explicit channel
    operators; meant only as a small-n reference.
    """
    omega = _check_omega(omega)
    n = H.n
    if n > guard:
        need = 2 * n**4 * 16
        raise SuperoperatorTooLarge(
            f"dense superoperator for n={n} needs O(n^4) memory "
            f"(about {need / 2**30:.1f} GiB); limit is n <= {guard}")
    if channels.n != n:
        raise ValueError(f"dimension mismatch: H is {n}, channels are {channels.n}")

    Hd = H.dense().astype(complex)
    eye = np.eye(n)
    L = -(1.0 - omega) * 1j * (np.kron(Hd, eye) - np.kron(eye, Hd.T))
    if omega == 0.0:
        return L

    # Jump terms via sparse kron so each channel costs O(1) entries.
    gain = sparse.csr_array((n * n, n * n), dtype=complex)
    LdL = np.zeros((n, n), dtype=complex)
    for i, j, w in channels:
        Lk = sparse.csr_array(([math.sqrt(w)], ([i], [j])), shape=(n, n), dtype=complex)
        gain = gain + sparse.kron(Lk, Lk.conj(), format="csr")
        LdL += (Lk.conj().T @ Lk).toarray()
    dissipator = gain.toarray() - 0.5 * (np.kron(LdL, eye) + np.kron(eye, LdL.T))
    L += omega * dissipator
    return L
