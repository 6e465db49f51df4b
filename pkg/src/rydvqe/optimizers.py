"""Budgeted derivative-free optimizers.

Thin wrappers around :mod:`scipy.optimize` that share one contract: the
objective is only ever evaluated inside the box ``bounds`` (out-of-box
proposals are clamped and the returned value penalized), evaluation stops
after exactly ``budget`` calls, and every evaluation is recorded.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import optimize

PENALTY_WEIGHT = 1e3
_NONFINITE_SUBSTITUTE = 1e30


class OptimizationError(RuntimeError):
    pass


class _BudgetExhausted(Exception):
    pass


@dataclass
class OptimizeResult:
    best_params: np.ndarray
    best_value: float
    trace: list[tuple[np.ndarray, float]] = field(default_factory=list)

    @property
    def values(self) -> np.ndarray:
        return np.array([v for _, v in self.trace])

    def running_best(self) -> np.ndarray:
        return np.minimum.accumulate(self.values)


class _Budgeted:
    def __init__(self, fun, bounds, budget, penalty):
        self.fun = fun
        self.lo = np.array([b[0] for b in bounds], dtype=float)
        self.hi = np.array([b[1] for b in bounds], dtype=float)
        if not (np.all(np.isfinite(self.lo)) and np.all(np.isfinite(self.hi))):
            raise ValueError("bounds must be finite")
        if np.any(self.lo > self.hi):
            raise ValueError("bounds must satisfy lower <= upper")
        if budget < 1:
            raise ValueError("budget must be >= 1")
        self.budget = int(budget)
        self.penalty = penalty
        self.trace: list[tuple[np.ndarray, float]] = []
        self.n_nonfinite = 0
        self.best_x = None
        self.best_f = math.inf

    def __call__(self, x):
        if len(self.trace) >= self.budget:
            raise _BudgetExhausted
        x = np.asarray(x, dtype=float)
        xc = np.clip(x, self.lo, self.hi)
        f = float(self.fun(xc))
        self.trace.append((xc.copy(), f))
        if not math.isfinite(f):
            self.n_nonfinite += 1
            if len(self.trace) >= 10 and self.n_nonfinite > 0.5 * len(self.trace):
                raise OptimizationError(
                    f"objective returned non-finite values at {self.n_nonfinite} of "
                    f"{len(self.trace)} evaluations (last at {xc.tolist()})"
                )
            return _NONFINITE_SUBSTITUTE
        if f < self.best_f:
            self.best_f, self.best_x = f, xc.copy()
        return f + self.penalty * float(((x - xc) ** 2).sum())

    def result(self) -> OptimizeResult:
        if self.best_x is None:
            raise OptimizationError("no finite objective value was observed")
        return OptimizeResult(self.best_x, self.best_f, self.trace)


def _start_point(wrapped: _Budgeted, x0, seed):
    if x0 is not None:
        return np.clip(np.asarray(x0, dtype=float), wrapped.lo, wrapped.hi)
    rng = np.random.default_rng(seed)
    return rng.uniform(wrapped.lo, wrapped.hi)


def nelder_mead(
    objective: Callable[[np.ndarray], float],
    bounds: Sequence[tuple[float, float]],
    budget: int,
    seed: int = 0,
    x0=None,
    *,
    step: float | Sequence[float] | None = None,
    penalty: float = PENALTY_WEIGHT,
) -> OptimizeResult:
    """Nelder-Mead simplex search.

    Without ``x0`` the start is drawn uniformly in the box from ``seed``.
    ``step`` sets the initial simplex edge per coordinate; the default is
    scipy's 5% rule.
    """
    w = _Budgeted(objective, bounds, budget, penalty)
    x = _start_point(w, x0, seed)
    options = {"maxfev": w.budget, "maxiter": 10 * w.budget, "xatol": 1e-12, "fatol": 1e-14,
               "adaptive": len(x) > 4}
    if step is not None:
        steps = np.broadcast_to(np.asarray(step, dtype=float), x.shape)
        simplex = [x.copy()]
        for i, s in enumerate(steps):
            v = x.copy()
            v[i] = v[i] + s if v[i] + s <= w.hi[i] else v[i] - s
            simplex.append(v)
        options["initial_simplex"] = np.array(simplex)
    try:
        optimize.minimize(w, x, method="Nelder-Mead", options=options)
    except _BudgetExhausted:
        pass
    return w.result()


def powell(
    objective: Callable[[np.ndarray], float],
    bounds: Sequence[tuple[float, float]],
    budget: int,
    seed: int = 0,
    x0=None,
    *,
    direc=None,
    penalty: float = PENALTY_WEIGHT,
) -> OptimizeResult:
    """Powell's conjugate-direction method restricted to the box.

    ``direc`` optionally sets the initial direction set (rows).
    """
    w = _Budgeted(objective, bounds, budget, penalty)
    x = _start_point(w, x0, seed)
    rng = np.random.default_rng(seed)
    options = {"xtol": 1e-10, "ftol": 1e-12}
    if direc is not None:
        options["direc"] = np.asarray(direc, dtype=float)
    # scipy stops once converged; restart from the incumbent along a random
    # orthonormal frame until the budget is spent or a restart adds nothing
    while len(w.trace) < w.budget:
        before = len(w.trace)
        options["maxfev"] = w.budget - before
        try:
            optimize.minimize(w, x, method="Powell", bounds=list(zip(w.lo, w.hi)), options=options)
        except _BudgetExhausted:
            break
        if w.best_x is None or len(w.trace) == before:
            break
        x = w.best_x
        options["direc"] = np.linalg.qr(rng.normal(size=(len(x), len(x))))[0]
    return w.result()


def differential_evolution(
    objective: Callable[[np.ndarray], float],
    bounds: Sequence[tuple[float, float]],
    budget: int,
    seed: int = 0,
    x0=None,
    *,
    popsize: int = 5,
    penalty: float = PENALTY_WEIGHT,
) -> OptimizeResult:
    """Differential evolution (best1bin) truncated at ``budget`` evaluations.

    ``popsize`` is the population multiplier per dimension, as in scipy.
    """
    w = _Budgeted(objective, bounds, budget, penalty)
    if x0 is not None:
        x0 = np.clip(np.asarray(x0, dtype=float), w.lo, w.hi)
    try:
        optimize.differential_evolution(
            w, list(zip(w.lo, w.hi)), maxiter=10**6, popsize=popsize, tol=0.0, atol=0.0,
            polish=False, rng=np.random.default_rng(seed), x0=x0, updating="immediate",
        )
    except _BudgetExhausted:
        pass
    return w.result()


OPTIMIZERS = {
    "NelderMead": nelder_mead,
    "Powell": powell,
    "DifferentialEvolution": differential_evolution,
}


def get_optimizer(name: str):
    try:
        return OPTIMIZERS[name]
    except KeyError:
        raise ValueError(f"unknown optimizer {name!r}; choose from {sorted(OPTIMIZERS)}") from None
