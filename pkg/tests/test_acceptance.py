"""Acceptance criteria, one test per criterion.

Each test appends a PASS/FAIL line to the terminal summary and then
asserts, so a failing criterion both reports and fails.
"""

import itertools
import time

import numpy as np
import pytest
from scipy.linalg import expm

from conftest import ACCEPTANCE_LINES, random_density, random_network
from qpagerank import generators
from qpagerank.bench import SLOT_BYTES, fit_exponent, measure
from qpagerank.dynamics import (LindbladRHS, dense_superoperator, devectorize, kron_element,
                                lindblad_rhs, vectorize)
from qpagerank.integrator import RKF45Config, evolve
from qpagerank.netio import adjacency
from qpagerank.operators import WalkParameters, build_operators
from qpagerank.rank import classical_pagerank, classify_hubs, quantum_pagerank

pytestmark = pytest.mark.acceptance


def record(number: int, name: str, ok: bool, detail: str, seconds: float):
    status = "PASS" if ok else "FAIL"
    ACCEPTANCE_LINES.append(f"[{status}] {number}. {name}: {detail} ({seconds:.1f} s)")
    return ok


def dense_power_pagerank(net, q: float, eps: float = 1e-14) -> np.ndarray:
    """Google-matrix stationary vector built from the edge list alone."""
    n = net.n
    A = np.zeros((n, n))
    for s, d in net.edges:
        A[d, s] = 1.0
    off = (np.ones((n, n)) - np.eye(n)) / (n - 1)
    deg = A.sum(axis=0)
    W = np.where(deg > 0, A / np.where(deg > 0, deg, 1), off)
    G = q * W + (1 - q) * off
    p = np.full(n, 1.0 / n)
    for _ in range(1_000_000):
        nxt = G @ p
        nxt /= nxt.sum()
        if np.abs(nxt - p).sum() <= eps:
            return nxt
        p = nxt
    raise AssertionError("oracle power iteration did not converge")


def test_oracle_equivalence():
    rng = np.random.default_rng(1)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(50):
        n = int(rng.integers(2, 7))
        ops = build_operators(adjacency(random_network(rng, n)), 0.9)
        rho = random_density(rng, n)
        for omega in (0.0, 0.3, 0.7, 1.0):
            L = dense_superoperator(ops.hamiltonian, ops.channels, omega)
            ref = devectorize(L @ vectorize(rho))
            got = lindblad_rhs(ops.hamiltonian, ops.channels, omega, rho)
            worst = max(worst, float(np.abs(got - ref).max()))

    kron_worst = 0.0
    dims = range(1, 5)
    for p1, p2, m1, m2 in itertools.product(dims, dims, dims, dims):
        A = rng.normal(size=(p1, p2)) + 1j * rng.normal(size=(p1, p2))
        B = rng.normal(size=(m1, m2)) + 1j * rng.normal(size=(m1, m2))
        K = np.kron(A, B)
        for i, j in np.ndindex(*K.shape):
            kron_worst = max(kron_worst, abs(kron_element(A, B, i, j) - K[i, j]))
    seconds = time.perf_counter() - t0

    ok = worst <= 1e-12 and kron_worst <= 1e-12 and seconds < 30
    assert record(1, "oracle equivalence", ok,
                  f"max |rhs - dense| = {worst:.2e} (tol 1e-12), "
                  f"kron_element max diff = {kron_worst:.1e} (tol 1e-12)", seconds)


def test_conservation_laws():
    rng = np.random.default_rng(2)
    t0 = time.perf_counter()
    drift_rate = herm = 0.0
    min_eig = np.inf
    for n in (3, 6, 9, 12):
        for omega in (0.1, 0.5, 0.9):
            ops = build_operators(adjacency(random_network(rng, n, 0.3)), 0.9)
            f = LindbladRHS(ops.hamiltonian, ops.channels, omega)

            def watched(t, rho):
                nonlocal herm
                herm = max(herm, float(np.abs(rho - rho.conj().T).max()))
                return f(t, rho)

            rho0 = random_density(rng, n, rank=1)  # pure start: positivity is tight
            result = evolve(watched, rho0, RKF45Config())
            rho = result.rho_final
            drift_rate = max(drift_rate, result.max_trace_drift_rate)
            herm = max(herm, float(np.abs(rho - rho.conj().T).max()))
            min_eig = min(min_eig, float(np.linalg.eigvalsh(rho).min()))
    seconds = time.perf_counter() - t0

    ok = drift_rate <= 1e-8 and herm <= 1e-10 and min_eig >= -1e-8 and seconds < 60
    assert record(2, "conservation laws", ok,
                  f"trace drift rate {drift_rate:.2e} (<= 1e-8), hermiticity defect "
                  f"{herm:.2e} (<= 1e-10), min eigenvalue {min_eig:.2e} (>= -1e-8)", seconds)


def test_classical_limit():
    rng = np.random.default_rng(3)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(20):
        net = random_network(rng, int(rng.integers(2, 13)), 0.3)
        p, _ = quantum_pagerank(net, WalkParameters(omega=1.0, q=0.9))
        worst = max(worst, float(np.abs(p - dense_power_pagerank(net, 0.9)).max()))
    seconds = time.perf_counter() - t0

    ok = worst <= 1e-6 and seconds < 60
    assert record(3, "classical limit", ok,
                  f"max |p_quantum(omega=1) - p_power| = {worst:.2e} (tol 1e-6)", seconds)


def test_unitary_limit():
    rng = np.random.default_rng(4)
    t0 = time.perf_counter()
    worst = 0.0
    config = RKF45Config(tol=1e-8, t_max=1.0, ss_eps=0.0)
    for n in range(2, 9):
        ops = build_operators(adjacency(random_network(rng, n)), 0.9)
        rho0 = random_density(rng, n)
        result = evolve(LindbladRHS(ops.hamiltonian, ops.channels, 0.0), rho0, config)
        evals, V = np.linalg.eigh(ops.hamiltonian.dense())
        U = V @ np.diag(np.exp(-1j * evals)) @ V.conj().T
        ref = U @ rho0 @ U.conj().T
        worst = max(worst, float(np.abs(result.rho_final - ref).max()))
    seconds = time.perf_counter() - t0

    ok = worst <= 1e-6 and seconds < 30
    assert record(4, "unitary limit", ok,
                  f"max |rho(1) - U rho0 U^+| = {worst:.2e} (tol 1e-6, n = 2..8)", seconds)


def test_integrator_accuracy():
    rng = np.random.default_rng(5)
    t0 = time.perf_counter()
    ops = build_operators(adjacency(random_network(rng, 4, 0.5)), 0.9)
    omega, t_end = 0.5, 2.0
    rho0 = random_density(rng, 4)
    L = dense_superoperator(ops.hamiltonian, ops.channels, omega)
    ref = devectorize(expm(L * t_end) @ vectorize(rho0))
    f = LindbladRHS(ops.hamiltonian, ops.channels, omega)

    errors = {}
    for tol in (1e-4, 1e-6, 1e-8):
        result = evolve(f, rho0, RKF45Config(tol=tol, t_max=t_end, ss_eps=0.0,
                                             renormalize=False))
        errors[tol] = float(np.abs(result.rho_final - ref).max())
    scalar = evolve(lambda t, y: -y, np.array([1.0]),
                    RKF45Config(tol=1e-8, t_max=1.0, ss_eps=0.0))
    scalar_err = abs(float(scalar.rho_final[0]) - np.exp(-1.0))
    seconds = time.perf_counter() - t0

    ok = all(e <= 100 * tol for tol, e in errors.items()) and scalar_err <= 1e-6 and seconds < 10
    shown = ", ".join(f"tol {tol:.0e}: {e:.1e}" for tol, e in errors.items())
    assert record(5, "integrator accuracy", ok,
                  f"global error vs expm [{shown}] (<= 100 tol); |y(1) - e^-1| = "
                  f"{scalar_err:.1e} (tol 1e-6)", seconds)


def test_memory_claim():
    t0 = time.perf_counter()
    slots = {}
    for n in (100, 300, 500):
        net = generators.random_directed(n, mean_degree=15, seed=n)
        m = measure(quantum_pagerank, net, WalkParameters())
        slots[n] = m.peak_bytes / (SLOT_BYTES * n * n)
    big = measure(quantum_pagerank, generators.random_directed(922, mean_degree=15, seed=922),
                  WalkParameters())
    seconds = time.perf_counter() - t0

    ok = all(s <= 200 for s in slots.values()) and big.peak_bytes < 2 * 10**9 and seconds < 900
    shown = ", ".join(f"N={n}: {s:.1f}" for n, s in slots.items())
    assert record(6, "memory", ok,
                  f"peak slots per N^2 [{shown}] (<= 200); N=922 peak "
                  f"{big.peak_bytes / 2**20:.0f} MiB (< 2 GB)", seconds)


def test_time_scaling():
    t0 = time.perf_counter()
    sizes = (50, 100, 200, 400)
    config = RKF45Config(t_max=10.0, ss_eps=0.0)
    best = []
    for n in sizes:
        net = generators.random_directed(n, mean_degree=15, seed=7)
        runs = []
        for _ in range(3):
            start = time.perf_counter()
            quantum_pagerank(net, WalkParameters(), config)
            runs.append(time.perf_counter() - start)
        best.append(min(runs))
    slope = fit_exponent(sizes, best)
    seconds = time.perf_counter() - t0

    ok = slope <= 3.2 and seconds < 600
    shown = ", ".join(f"N={n}: {s:.3f}s" for n, s in zip(sizes, best))
    assert record(7, "time scaling", ok,
                  f"log-log exponent {slope:.2f} (<= 3.2) [{shown}, min of 3]", seconds)


def test_hub_classification():
    t0 = time.perf_counter()
    net = generators.scale_free(200, m=2, reciprocity=0.5, seed=7)
    params = WalkParameters(omega=0.9)
    p_quantum, _ = quantum_pagerank(net, params)
    p_classical = classical_pagerank(build_operators(adjacency(net), params.q).rates)
    _, cq = classify_hubs(p_quantum, params.c)
    _, cc = classify_hubs(p_classical, params.c)
    above_q = cq["main"] + cq["secondary"]
    above_c = cc["main"] + cc["secondary"]
    seconds = time.perf_counter() - t0

    ok = above_q < above_c and cq["main"] >= 1 and seconds < 120
    assert record(8, "hub classification", ok,
                  f"nodes above 1/N: quantum {above_q} vs classical {above_c} "
                  f"(need quantum < classical); quantum main hubs {cq['main']} (>= 1)", seconds)
