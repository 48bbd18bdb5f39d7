"""Seeded synthetic networks for tests and benchmarks."""

from __future__ import annotations

import numpy as np

from .netio import Network


def _labels(n: int) -> tuple[str, ...]:
    width = len(str(n - 1))
    return tuple(f"n{i:0{width}d}" for i in range(n))


def _net(n: int, edges) -> Network:
    return Network(n=n, edges=tuple(sorted(set(edges))), labels=_labels(n))


def random_directed(n: int, mean_degree: float, seed: int | None = None) -> Network:
    """Directed Erdos-Renyi graph with expected out-degree ``mean_degree``."""
    if n < 2:
        raise ValueError("need n >= 2")
    rng = np.random.default_rng(seed)
    p = min(1.0, mean_degree / (n - 1))
    mask = rng.random((n, n)) < p
    np.fill_diagonal(mask, False)
    src, dst = np.nonzero(mask)
    return _net(n, zip(src.tolist(), dst.tolist()))


def scale_free(n: int, m: int = 2, reciprocity: float = 1.0,
               seed: int | None = None) -> Network:
    """Preferential-attachment network.

    Each new node links to ``m`` distinct existing nodes chosen with
    probability proportional to degree + 1; each link also gets its
    reverse edge with probability ``reciprocity``.
    """
    if n < m + 1:
        raise ValueError(f"need n > m, got n={n}, m={m}")
    rng = np.random.default_rng(seed)
    edges = set()
    degree = np.zeros(n)
    for a in range(m + 1):
        for b in range(m + 1):
            if a != b:
                edges.add((a, b))
        degree[a] = 2 * m
    for v in range(m + 1, n):
        w = degree[:v] + 1.0
        targets = rng.choice(v, size=m, replace=False, p=w / w.sum())
        for t in targets.tolist():
            edges.add((v, t))
            degree[v] += 1
            degree[t] += 1
            if rng.random() < reciprocity:
                edges.add((t, v))
                degree[v] += 1
                degree[t] += 1
    return _net(n, edges)


def complete(n: int) -> Network:
    return _net(n, ((i, j) for i in range(n) for j in range(n) if i != j))


def cycle(n: int) -> Network:
    return _net(n, ((i, (i + 1) % n) for i in range(n)))


def chain(n: int) -> Network:
    return _net(n, ((i, i + 1) for i in range(n - 1)))


def star(n: int) -> Network:
    """Hub 0 linked in both directions to ``n - 1`` leaves."""
    return _net(n, [e for k in range(1, n) for e in ((0, k), (k, 0))])


FAMILIES = {
    "random": random_directed,
    "complete": lambda n, mean_degree=None, seed=None: complete(n),
    "scale-free": lambda n, mean_degree=None, seed=None: scale_free(n, seed=seed),
}
