"""Local QUBO solvers and the dispatch used by the clustering engine.

Every backend returns the energy recomputed from :meth:`QuboModel.energy`,
so results from different backends are directly comparable.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .qubo import QuboModel

try:
    from numba import njit
except ImportError:  # pragma: no cover
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f

__all__ = [
    "SolveRequest",
    "SolveResult",
    "SolverError",
    "solve",
    "solve_exhaustive",
    "solve_sa",
    "solve_greedy",
    "EXHAUSTIVE_MAX_VARS",
    "DISPATCH_EXHAUSTIVE_MAX_VARS",
    "REMOTE_CAPACITY",
    "TARGETS",
]

EXHAUSTIVE_MAX_VARS = 24
DISPATCH_EXHAUSTIVE_MAX_VARS = 16
REMOTE_CAPACITY = 8192
SA_SWEEPS_PER_VAR = 100
SA_FINAL_TEMPERATURE_RATIO = 1e-3

TARGETS = ("auto", "exhaustive", "sa", "greedy", "remote")


class SolverError(ValueError):
    """The request cannot be handled by the chosen backend."""


@dataclass
class SolveRequest:
    """One QUBO solve.

    ``sweeps`` only affects simulated annealing; ``None`` means
    ``SA_SWEEPS_PER_VAR * num_vars``.  ``endpoint`` is required for the
    remote target.
    """

    model: QuboModel
    timeout: float = 10.0
    seed: int = 0
    target: str = "auto"
    sweeps: int | None = None
    endpoint: str | None = None

    def __post_init__(self) -> None:
        if not self.timeout > 0:
            raise SolverError("timeout must be positive")
        if self.target not in TARGETS:
            raise SolverError(f"unknown solver target {self.target!r}")
        if self.target == "remote" and self.model.num_vars > REMOTE_CAPACITY:
            raise SolverError(f"model has {self.model.num_vars} variables, remote capacity is {REMOTE_CAPACITY}")


@dataclass
class SolveResult:
    bits: np.ndarray
    energy: float
    evaluations: int = 0
    elapsed: float = 0.0
    solver_name: str = ""
    info: dict = field(default_factory=dict)

    @property
    def bitstring(self) -> str:
        return "".join("1" if b else "0" for b in self.bits)


def _empty_result(q: QuboModel, name: str) -> SolveResult:
    return SolveResult(np.zeros(0, dtype=np.int8), float(q.offset), 1, 0.0, name)


def solve_exhaustive(req: SolveRequest, chunk: int = 1 << 15) -> SolveResult:
    """Global minimum by enumerating all ``2**num_vars`` bitstrings.

    Among (numerically) tied minima the lexicographically smallest
    bitstring wins.
    """
    q = req.model
    n = q.num_vars
    if n > EXHAUSTIVE_MAX_VARS:
        raise SolverError(f"exhaustive search limited to {EXHAUSTIVE_MAX_VARS} variables, got {n}")
    t0 = time.perf_counter()
    if n == 0:
        return _empty_result(q, "exhaustive")
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    total = 1 << n
    best_e, best_idx = math.inf, 0
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        X = ((idx[:, None] >> shifts) & 1).astype(float)
        e = q.energies(X)
        lo = float(e.min())
        tol = 1e-9 * max(1.0, abs(lo))
        if lo < best_e - tol:
            best_e, best_idx = lo, start + int(np.argmax(e <= lo + tol))
    bits = ((best_idx >> shifts) & 1).astype(np.int8)
    return SolveResult(bits, q.energy(bits), total, time.perf_counter() - t0, "exhaustive")


@njit(cache=True)
def _anneal(h, J, x, field_, temps, uniforms, best_x):
    # energies are tracked relative to the starting state
    n = x.size
    energy = 0.0
    best = 0.0
    u = 0
    for t in range(temps.size):
        beta = 1.0 / temps[t]
        for v in range(n):
            delta = (1.0 - 2.0 * x[v]) * field_[v]
            if delta <= 0.0 or uniforms[u] < math.exp(-delta * beta):
                sign = 1.0 - 2.0 * x[v]
                x[v] = 1 - x[v]
                for j in range(n):
                    field_[j] += sign * J[j, v]
                energy += delta
                if energy < best - 1e-12:
                    best = energy
                    for j in range(n):
                        best_x[j] = x[j]
            u += 1
    return best


def solve_sa(req: SolveRequest, batch: int = 64) -> SolveResult:
    """Simulated annealing with single-bit flips and a geometric schedule.

    The temperature falls from ``max |coefficient|`` to ``1e-3`` of that
    over ``sweeps`` sweeps; each sweep visits every variable once.  The best
    state seen is returned.  Identical requests give identical results as
    long as the timeout does not cut the schedule short.
    """
    q = req.model
    n = q.num_vars
    t0 = time.perf_counter()
    if n == 0:
        return _empty_result(q, "sa")
    sweeps = req.sweeps if req.sweeps is not None else SA_SWEEPS_PER_VAR * n
    sweeps = max(1, int(sweeps))
    # floor keeps the final temperature a normal, nonzero float
    t_hi = max(q.max_abs_coefficient(), np.finfo(float).tiny / SA_FINAL_TEMPERATURE_RATIO)
    t_lo = t_hi * SA_FINAL_TEMPERATURE_RATIO
    temps = t_hi * (t_lo / t_hi) ** (np.arange(sweeps) / max(1, sweeps - 1))

    rng = np.random.default_rng(req.seed)
    h = q.linear.astype(float)
    J = np.ascontiguousarray(q.coupling)
    x = rng.integers(0, 2, size=n).astype(np.float64)
    field_ = h + J @ x
    best_x = x.copy()
    best_e = math.inf
    done = 0
    deadline = t0 + req.timeout
    while done < sweeps:
        stop = min(sweeps, done + batch)
        uniforms = rng.random((stop - done) * n)
        cand_x = x.copy()
        _anneal(h, J, x, field_, temps[done:stop], uniforms, cand_x)
        e_abs = q.energy(cand_x)
        if e_abs < best_e - 1e-12:
            best_e, best_x = e_abs, cand_x.copy()
        done = stop
        if time.perf_counter() > deadline:
            break
    bits = best_x.astype(np.int8)
    return SolveResult(
        bits, q.energy(bits), done * n, time.perf_counter() - t0, "sa",
        {"sweeps": done, "timed_out": done < sweeps},
    )


def solve_greedy(req: SolveRequest) -> SolveResult:
    """Steepest descent on single-bit flips starting from all zeros."""
    q = req.model
    n = q.num_vars
    t0 = time.perf_counter()
    if n == 0:
        return _empty_result(q, "greedy")
    J = q.coupling
    x = np.zeros(n)
    field_ = q.linear.astype(float).copy()
    evals = 0
    while True:
        delta = (1.0 - 2.0 * x) * field_
        evals += n
        v = int(np.argmin(delta))
        if delta[v] >= -1e-12:
            break
        sign = 1.0 - 2.0 * x[v]
        x[v] = 1.0 - x[v]
        field_ += sign * J[:, v]
    bits = x.astype(np.int8)
    return SolveResult(bits, q.energy(bits), evals, time.perf_counter() - t0, "greedy")


def solve(req: SolveRequest) -> SolveResult:
    """Dispatch to a backend; ``auto`` is exhaustive up to 16 variables, else SA."""
    target = req.target
    if target == "auto":
        target = "exhaustive" if req.model.num_vars <= DISPATCH_EXHAUSTIVE_MAX_VARS else "sa"
    if target == "exhaustive":
        return solve_exhaustive(req)
    if target == "sa":
        return solve_sa(req)
    if target == "greedy":
        return solve_greedy(req)
    from .remote import solve_remote

    if not req.endpoint:
        raise SolverError("remote target needs an endpoint")
    return solve_remote(req, req.endpoint)
