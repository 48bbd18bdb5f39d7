"""Adaptive Runge-Kutta-Fehlberg 4(5) integration with steady-state detection."""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass
from enum import Enum
from typing import Callable

import numpy as np

logger = logging.getLogger(__name__)

# Fehlberg tableau.
C = (0.0, 1 / 4, 3 / 8, 12 / 13, 1.0, 1 / 2)
A = (
    (),
    (1 / 4,),
    (3 / 32, 9 / 32),
    (1932 / 2197, -7200 / 2197, 7296 / 2197),
    (439 / 216, -8.0, 3680 / 513, -845 / 4104),
    (-8 / 27, 2.0, -3544 / 2565, 1859 / 4104, -11 / 40),
)
B4 = (25 / 216, 0.0, 1408 / 2565, 2197 / 4104, -1 / 5, 0.0)
B5 = (16 / 135, 0.0, 6656 / 12825, 28561 / 56430, -9 / 50, 2 / 55)

SAFETY = 0.84
STIFF_LIMIT = 100
TRACE_DRIFT_EPS = 1e-12

Derivative = Callable[[float, np.ndarray], np.ndarray]


class StepFailure(ArithmeticError):
    """A stage derivative was not finite; retry with a smaller step."""


class StiffnessError(RuntimeError):
    def __init__(self, message: str, diagnostics: dict):
        super().__init__(message)
        self.diagnostics = diagnostics


class Termination(str, Enum):
    STEADY_STATE = "steady_state"
    T_MAX = "t_max"
    MAX_STEPS = "max_steps"


@dataclass(frozen=True)
class RKF45Config:
    tol: float = 1e-6
    h0: float = 0.01
    h_min: float = 1e-8
    h_max: float = 1.0
    t_max: float = 1000.0
    safety: float = SAFETY
    ss_eps: float = 1e-8
    max_steps: int = 10_000_000
    renormalize: bool = True

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if not 0 < self.h_min <= self.h0 <= self.h_max:
            raise ValueError("need 0 < h_min <= h0 <= h_max")
        if self.ss_eps < 0:
            raise ValueError("ss_eps must be nonnegative")
        if self.t_max < 0:
            raise ValueError("t_max must be nonnegative")
        if self.max_steps < 0:
            raise ValueError("max_steps must be nonnegative")

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class EvolutionResult:
    rho_final: np.ndarray
    t_reached: float
    steps_accepted: int
    steps_rejected: int
    terminated_by: Termination
    residual: float
    rhs_evaluations: int = 0
    renormalizations: int = 0
    max_trace_drift: float = 0.0
    max_trace_drift_rate: float = 0.0
    last_step: float = 0.0

    def diagnostics(self) -> dict:
        return {
            "t_reached": self.t_reached,
            "steps_accepted": self.steps_accepted,
            "steps_rejected": self.steps_rejected,
            "terminated_by": self.terminated_by.value,
            "residual": self.residual,
            "rhs_evaluations": self.rhs_evaluations,
            "renormalizations": self.renormalizations,
            "max_trace_drift": self.max_trace_drift,
            "max_trace_drift_rate": self.max_trace_drift_rate,
            "last_step": self.last_step,
        }


def _norm(x) -> float:
    return float(np.linalg.norm(np.ravel(x)))


def rkf45_step(f: Derivative, y, h: float, t: float = 0.0, dy=None):
    """One Fehlberg step from ``(t, y)`` with step ``h``.

    Returns ``(y4, z5, err)`` where ``err`` is the Frobenius norm of the
    difference between the fourth- and fifth-order results. ``dy`` may
    carry ``f(t, y)`` when the caller already has it.
    """
    y = np.asarray(y)
    k = []
    for stage in range(6):
        if stage == 0:
            d = f(t, y) if dy is None else dy
        else:
            arg = y.copy() if y.ndim else np.array(y)
            for a, kk in zip(A[stage], k):
                if a:
                    arg = arg + a * kk
            d = f(t + C[stage] * h, arg)
        kk = h * np.asarray(d)
        if not np.all(np.isfinite(kk)):
            raise StepFailure(f"non-finite derivative in stage {stage + 1}")
        k.append(kk)

    y4 = y + sum(b * kk for b, kk in zip(B4, k) if b)
    z5 = y + sum(b * kk for b, kk in zip(B5, k) if b)
    return y4, z5, _norm(z5 - y4)


def adapt_step(h: float, err: float, tol: float, h_min: float, h_max: float,
               safety: float = SAFETY) -> float:
    """Next step size ``clamp(safety * (tol*h/err)**(1/4) * h)``."""
    if err == 0:
        return h_max
    s = safety * (tol * h / err) ** 0.25
    return min(max(s * h, h_min), h_max)


def evolve(f: Derivative, rho0, config: RKF45Config = RKF45Config()) -> EvolutionResult:
    """Integrate ``dy/dt = f(t, y)`` until steady state, ``t_max`` or ``max_steps``.

    Accepted steps advance the fifth-order solution. For square matrix
    states the trace is restored to its initial value after any step that
    moves it by more than 1e-12; the largest drift seen is reported.
    """
    cfg = config
    y = np.array(rho0, dtype=np.result_type(np.asarray(rho0).dtype, float))
    matrix_state = y.ndim == 2 and y.shape[0] == y.shape[1]
    trace0 = np.trace(y) if matrix_state else None

    t = 0.0
    h = cfg.h0
    dy = f(t, y)
    nfev = 1
    residual = _norm(dy)
    accepted = rejected = renorms = 0
    stuck = 0
    max_drift = max_rate = 0.0

    while True:
        if residual <= cfg.ss_eps:
            reason = Termination.STEADY_STATE
            break
        if t >= cfg.t_max:
            reason = Termination.T_MAX
            break
        if accepted >= cfg.max_steps:
            reason = Termination.MAX_STEPS
            break

        remaining = cfg.t_max - t
        step = min(h, remaining)
        try:
            _, z5, err = rkf45_step(f, y, step, t, dy)
            nfev += 5
        except StepFailure as exc:
            nfev += 5
            rejected += 1
            h = max(step / 2, cfg.h_min)
            logger.debug("step failure t=%.6g h=%.3e: %s", t, step, exc)
            if step <= cfg.h_min:
                stuck += 1
                if stuck >= STIFF_LIMIT:
                    raise StiffnessError("non-finite derivatives at minimum step",
                                         _diag(t, step, accepted, rejected, residual)) from exc
            continue

        if err <= cfg.tol * step:
            y = z5
            t = cfg.t_max if step == remaining else t + step
            accepted += 1
            stuck = 0
            if matrix_state:
                drift = abs(np.trace(y) - trace0)
                max_drift = max(max_drift, drift)
                max_rate = max(max_rate, drift / step)
                if cfg.renormalize and drift > TRACE_DRIFT_EPS:
                    y *= trace0 / np.trace(y)
                    renorms += 1
            dy = f(t, y)
            nfev += 1
            residual = _norm(dy)
            if accepted % 1000 == 0:
                logger.debug("progress t=%.6g h=%.3e accepted=%d rejected=%d residual=%.3e",
                             t, step, accepted, rejected, residual)
        else:
            rejected += 1
            stuck = stuck + 1 if step <= cfg.h_min else 0
            if stuck >= STIFF_LIMIT:
                raise StiffnessError(
                    f"error {err:.3e} exceeds tol*h at the minimum step {cfg.h_min:g}",
                    _diag(t, step, accepted, rejected, residual))
        h = adapt_step(step, err, cfg.tol, cfg.h_min, cfg.h_max, cfg.safety)

    result = EvolutionResult(
        rho_final=y,
        t_reached=t,
        steps_accepted=accepted,
        steps_rejected=rejected,
        terminated_by=reason,
        residual=residual,
        rhs_evaluations=nfev,
        renormalizations=renorms,
        max_trace_drift=max_drift,
        max_trace_drift_rate=max_rate,
        last_step=h,
    )
    logger.info("evolve %s", " ".join(f"{k}={v}" for k, v in result.diagnostics().items()))
    return result


def _diag(t, h, accepted, rejected, residual) -> dict:
    return {"t": t, "h": h, "steps_accepted": accepted,
            "steps_rejected": rejected, "residual": residual}
