"""Classical and quantum PageRank, node rankings and hub classes."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .dynamics import LindbladRHS
from .integrator import EvolutionResult, RKF45Config, evolve
from .netio import Network, adjacency
from .operators import RateMatrix, WalkParameters, build_operators

logger = logging.getLogger(__name__)

CLIP_TOL = 1e-10


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


class HubClass(str, Enum):
    MAIN = "main"
    SECONDARY = "secondary"
    REST = "rest"


@dataclass(frozen=True)
class RankedNode:
    rank: int
    index: int
    label: str
    probability: float
    hub_class: HubClass
    coords: tuple[float, float] | None = None

    def as_dict(self) -> dict:
        out = {
            "rank": self.rank,
            "label": self.label,
            "probability": self.probability,
            "hub_class": self.hub_class.value,
        }
        if self.coords is not None:
            out["lon"], out["lat"] = self.coords
        return out


def classical_pagerank(WG: RateMatrix, eps: float = 1e-12,
                       max_iter: int = 100_000) -> np.ndarray:
    """Stationary distribution of ``WG`` by power iteration from uniform.

    Stops once ``||WG p - p||_1 <= eps``.
    """
    n = WG.n
    p = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        nxt = WG.matvec(p)
        nxt /= nxt.sum()
        residual = float(np.abs(nxt - p).sum())
        p = nxt
        if residual <= eps:
            return p
    raise ConvergenceError(
        f"power iteration did not converge in {max_iter} sweeps (residual {residual:.3e})",
        residual)


def initial_state(n: int, kind: str = "mixed") -> np.ndarray:
    """``I/n`` ("mixed") or the uniform superposition ``|s><s|`` ("coherent")."""
    if kind == "mixed":
        return np.eye(n, dtype=complex) / n
    if kind == "coherent":
        return np.full((n, n), 1.0 / n, dtype=complex)
    raise ValueError(f"unknown initial state {kind!r}")


def quantum_pagerank(net: Network, params: WalkParameters = WalkParameters(),
                     config: RKF45Config = RKF45Config(), *, threads: int = 1,
                     initial: str = "mixed") -> tuple[np.ndarray, EvolutionResult]:
    """Long-time node occupation of the quantum stochastic walk on ``net``."""
    if net.n < 2:
        raise ValueError("network too small: need at least 2 nodes")
    ops = build_operators(adjacency(net), params.q)
    f = LindbladRHS(ops.hamiltonian, ops.channels, params.omega, threads=threads)
    try:
        result = evolve(f, initial_state(net.n, initial), config)
    finally:
        f.close()
    p = np.real(np.diagonal(result.rho_final)).copy()
    return p, result


def rank_nodes(p, labels=None, c: float = 10.0, coords=None) -> list[RankedNode]:
    """Sort nodes by descending probability; ties keep ascending index."""
    p = np.asarray(p, dtype=float)
    labels = [str(i) for i in range(len(p))] if labels is None else list(labels)
    classes, _ = classify_hubs(p, c)
    order = np.argsort(-p, kind="stable")
    shown = np.where(p < 0, 0.0, p)
    return [
        RankedNode(rank=r + 1, index=int(i), label=labels[i], probability=float(shown[i]),
                   hub_class=classes[i], coords=None if coords is None else coords[i])
        for r, i in enumerate(order)
    ]


def classify_hubs(p, c: float = 10.0) -> tuple[list[HubClass], dict[str, int]]:
    """Main hub if ``p > c/n``, secondary if ``1/n < p <= c/n``, else rest."""
    if not c > 1:
        raise ValueError(f"hub constant c must exceed 1, got {c}")
    p = np.asarray(p, dtype=float)
    n = len(p)
    classes = [
        HubClass.MAIN if x > c / n else HubClass.SECONDARY if x > 1 / n else HubClass.REST
        for x in p
    ]
    counts = {h.value: sum(1 for k in classes if k is h) for h in HubClass}
    return classes, counts
