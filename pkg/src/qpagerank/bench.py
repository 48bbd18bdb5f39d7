"""Time and memory instrumentation for the solve path.

Memory is measured with :mod:`tracemalloc`, which sees numpy and scipy
array buffers; it reports the peak of Python-heap allocations made while
the measured call runs, excluding whatever was live before it started.
BLAS scratch space and interpreter overhead are not counted.
"""

from __future__ import annotations

import logging
import math
import time
import tracemalloc
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.linalg import expm

from . import generators
from .dynamics import DENSE_GUARD, dense_superoperator, devectorize, vectorize
from .integrator import RKF45Config
from .netio import adjacency
from .operators import WalkParameters, build_operators
from .rank import initial_state, quantum_pagerank
from .schemas import BENCH_COLUMNS

logger = logging.getLogger(__name__)

SLOT_BYTES = 16  # one complex128 scalar
ESTIMATED_SLOTS = 40  # per n^2, used only for the pre-run memory cap check


@dataclass
class Measurement:
    value: object
    seconds: float
    peak_bytes: int


def measure(fn, *args, **kwargs) -> Measurement:
    """Run ``fn`` and record wall time and peak traced allocation above baseline."""
    was_tracing = tracemalloc.is_tracing()
    if not was_tracing:
        tracemalloc.start()
    try:
        tracemalloc.reset_peak()
        base, _ = tracemalloc.get_traced_memory()
        t0 = time.perf_counter()
        value = fn(*args, **kwargs)
        seconds = time.perf_counter() - t0
        _, peak = tracemalloc.get_traced_memory()
    finally:
        if not was_tracing:
            tracemalloc.stop()
    return Measurement(value, seconds, max(0, peak - base))


def slots_per_n2(peak_bytes: int, n: int) -> float:
    return peak_bytes / (SLOT_BYTES * n * n)


def oracle_error(net, params: WalkParameters, rho_final, t: float) -> float:
    """Max entrywise gap between ``rho_final`` and ``expm(L t) vec(rho0)``."""
    ops = build_operators(adjacency(net), params.q)
    L = dense_superoperator(ops.hamiltonian, ops.channels, params.omega)
    ref = devectorize(expm(L * t) @ vectorize(initial_state(net.n)))
    return float(np.abs(ref - rho_final).max())


@dataclass
class BenchRow:
    n: int
    seconds: float = float("nan")
    peak_bytes: int = 0
    slots_per_n2: float = float("nan")
    steps: int = 0
    rhs_evaluations: int = 0
    t_reached: float = 0.0
    status: str = "ok"
    n4_free: str = "n/a"
    oracle_error: float = float("nan")

    FIELDS = BENCH_COLUMNS

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.FIELDS}


@dataclass
class BenchConfig:
    sizes: list[int]
    family: str = "random"
    mean_degree: float = 15.0
    seed: int = 7
    params: WalkParameters = field(default_factory=WalkParameters)
    config: RKF45Config = field(default_factory=lambda: RKF45Config(t_max=10.0, ss_eps=0.0))
    threads: int = 1
    oracle: bool = False
    mem_limit_bytes: int | None = None

    def as_dict(self) -> dict:
        return asdict(self)


def bench_row(n: int, bc: BenchConfig) -> BenchRow:
    row = BenchRow(n=n)
    if bc.mem_limit_bytes is not None:
        need = ESTIMATED_SLOTS * SLOT_BYTES * n * n
        if need > bc.mem_limit_bytes:
            row.status = f"skipped: estimated {need} bytes exceeds cap {bc.mem_limit_bytes}"
            logger.warning("bench n=%d %s", n, row.status)
            return row
    try:
        net = generators.FAMILIES[bc.family](n, mean_degree=bc.mean_degree, seed=bc.seed)
        m = measure(quantum_pagerank, net, bc.params, bc.config, threads=bc.threads)
    except MemoryError as exc:
        row.status = f"oom: {exc}"
        logger.warning("bench n=%d %s", n, row.status)
        return row

    _, result = m.value
    row.seconds = m.seconds
    row.peak_bytes = m.peak_bytes
    row.slots_per_n2 = slots_per_n2(m.peak_bytes, n)
    row.steps = result.steps_accepted + result.steps_rejected
    row.rhs_evaluations = result.rhs_evaluations
    row.t_reached = result.t_reached
    # A single complex n^2 x n^2 matrix would take 16 n^4 bytes; below n=15
    # that is smaller than the O(n^2) working set, so the check is moot.
    if n >= 15:
        row.n4_free = "yes" if m.peak_bytes < SLOT_BYTES * n**4 else "no"
    if bc.mem_limit_bytes is not None and m.peak_bytes > bc.mem_limit_bytes:
        row.status = f"over cap: peak {m.peak_bytes} bytes"
    if bc.oracle:
        if n <= DENSE_GUARD:
            row.oracle_error = oracle_error(net, bc.params, result.rho_final, result.t_reached)
        else:
            logger.warning("bench n=%d: oracle skipped above guard n=%d", n, DENSE_GUARD)
    logger.info("bench %s", " ".join(f"{k}={v}" for k, v in row.as_dict().items()))
    return row


def run_bench(bc: BenchConfig) -> list[BenchRow]:
    return [bench_row(n, bc) for n in bc.sizes]


def fit_exponent(sizes, seconds) -> float:
    """Slope of log(seconds) against log(n) by least squares."""
    x = np.log(np.asarray(sizes, dtype=float))
    y = np.log(np.asarray(seconds, dtype=float))
    ok = np.isfinite(y)
    if ok.sum() < 2:
        return math.nan
    slope, _ = np.polyfit(x[ok], y[ok], 1)
    return float(slope)
