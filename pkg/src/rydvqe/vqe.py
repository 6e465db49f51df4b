"""Variational loops: UCC-XY, alternating pulses, phase segments and iterative pulse splitting."""
from __future__ import annotations

import itertools
import math
import time
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from . import measurement as meas
from .dynamics import (
    MIN_SEGMENT,
    DriveSegment,
    PulseSequence,
    QuantumState,
    ResourceModel,
    evolve,
    global_pulse,
    prepare_product_state,
    ucc_xy_state,
)
from .optimizers import get_optimizer, nelder_mead
from .pauli import PauliHamiltonian, expectation, ground_energy_exact
from .register import Register

TWO_PI = 2 * math.pi
ANSATZE = ("UccXY", "AlternatingAB", "PhaseSegments", "IterativeSplit")
SCAN_QUBIT_CAP = 10


def relative_error(e_exact: float, e_est: float) -> float:
    if e_exact == 0:
        raise ValueError("relative error is undefined for a zero exact energy")
    return abs(e_exact - e_est) / abs(e_exact)


@dataclass
class VqeConfig:
    """Settings shared by every protocol. Frequencies in rad/us, times in us."""

    ansatz: str = "IterativeSplit"
    optimizer: str = "Powell"
    shot_budget_total: int = 350_000
    shots_per_energy: int = 1000
    evals_per_iteration: int = 20
    max_evals: int = 2000  # evaluation cap when sampling is bypassed
    t_tot: float = 4.0
    omega_bounds: tuple[float, float] = (0.0, 2 * TWO_PI)
    delta_bounds: tuple[float, float] = (-2 * TWO_PI, 2 * TWO_PI)
    duration_bounds: tuple[float, float] = (MIN_SEGMENT, 1.0)
    phase_bounds: tuple[float, float] = (-math.pi, math.pi)
    ucc_time_bounds: tuple[float, float] = (0.0, 4.0)
    fixed_omega: float = TWO_PI  # alternating / phase ansatze
    fixed_delta: float = TWO_PI  # alternating ansatz, H_a only
    seed: int = 0
    exact_mode: bool = False
    common_random_numbers: bool = False
    derandomize_epsilon: float = 0.9
    derandomize_bases: int = 50
    shots_per_term: int = 1000
    popsize: int = 5
    n_repeats: int = 1
    min_segment: float = MIN_SEGMENT
    initial_intervals: int = 2
    shuffle_directions: bool = True

    def __post_init__(self):
        if self.ansatz not in ANSATZE:
            raise ValueError(f"unknown ansatz {self.ansatz!r}")
        get_optimizer(self.optimizer)
        for name in ("shot_budget_total", "shots_per_energy", "max_evals", "shots_per_term",
                     "n_repeats", "initial_intervals"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.evals_per_iteration < 0:
            raise ValueError("evals_per_iteration must be non-negative")
        for name in ("omega_bounds", "delta_bounds", "duration_bounds", "phase_bounds",
                     "ucc_time_bounds"):
            lo, hi = getattr(self, name)
            if not lo <= hi:
                raise ValueError(f"{name} must be ordered")
            setattr(self, name, (float(lo), float(hi)))
        if self.omega_bounds[0] < 0:
            raise ValueError("omega bounds must be non-negative")
        if self.t_tot <= 0 or self.min_segment <= 0:
            raise ValueError("t_tot and min_segment must be positive")

    def to_dict(self) -> dict:
        d = asdict(self)
        for k, v in d.items():
            if isinstance(v, tuple):
                d[k] = list(v)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "VqeConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown VQE config keys: {sorted(unknown)}")
        d = {k: tuple(v) if isinstance(v, list) else v for k, v in d.items()}
        return cls(**d)


@dataclass
class EvalRecord:
    iteration: int
    parameters: list[float]
    energy_estimate: float
    cumulative_shots: int
    wall_time: float
    exact_energy: float  # simulator-side diagnostic, never seen by the optimizer


@dataclass
class VqeTrace:
    records: list[EvalRecord] = field(default_factory=list)
    best_energy: float = math.inf
    best_parameters: list[float] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def add(self, rec: EvalRecord):
        self.records.append(rec)
        if rec.energy_estimate < self.best_energy:
            self.best_energy = rec.energy_estimate
            self.best_parameters = list(rec.parameters)

    @property
    def total_shots(self) -> int:
        return self.records[-1].cumulative_shots if self.records else 0

    def running_best(self) -> np.ndarray:
        return np.minimum.accumulate([r.energy_estimate for r in self.records])

    def incumbent_exact_energies(self) -> np.ndarray:
        """Exact energy of the best-estimated point after each evaluation."""
        out, best, exact = [], math.inf, math.nan
        for r in self.records:
            if r.energy_estimate < best:
                best, exact = r.energy_estimate, r.exact_energy
            out.append(exact)
        return np.array(out)

    def shots_to_error(self, e_exact: float, threshold: float = 0.05) -> float:
        """Cumulative shots at which the incumbent first lies within ``threshold``.

        Returns ``inf`` when the run never gets there.
        """
        for r, e in zip(self.records, self.incumbent_exact_energies()):
            if relative_error(e_exact, e) < threshold:
                return float(r.cumulative_shots)
        return math.inf


class BudgetExhausted(Exception):
    pass


class EnergyEvaluator:
    """Turns prepared states into energy estimates and books the shots.

    ``mode`` is ``"exact"``, ``"derandomized"`` or ``"per_term"``.
    """

    def __init__(self, h: PauliHamiltonian, cfg: VqeConfig, mode: str | None = None):
        self.h = h
        self.cfg = cfg
        self.mode = mode or ("exact" if cfg.exact_mode else "derandomized")
        if self.mode not in ("exact", "derandomized", "per_term"):
            raise ValueError(f"unknown estimator mode {self.mode!r}")
        self.n_evals = 0
        self.shots = 0
        self.plan = None
        n_obs = len(h.non_identity_terms())
        if self.mode == "derandomized" and n_obs:
            obs = meas.observables_from_hamiltonian(h)
            plan = meas.derandomize(obs, h.n_qubits, cfg.derandomize_bases, cfg.derandomize_epsilon)
            self.plan = meas.allocate_shots(plan, max(cfg.shots_per_energy, plan.n_distinct), obs)
        if self.mode == "exact":
            self.cost = 0
        elif self.mode == "per_term":
            self.cost = cfg.shots_per_term * n_obs
        else:
            self.cost = self.plan.total_shots if self.plan else 0

    def max_evaluations(self) -> int:
        if self.cost == 0:
            return self.cfg.max_evals
        return self.cfg.shot_budget_total // self.cost

    def remaining(self) -> int:
        return max(0, self.max_evaluations() - self.n_evals)

    def _seed(self):
        if self.cfg.common_random_numbers:
            return self.cfg.seed
        return int(np.random.SeedSequence([self.cfg.seed, self.n_evals]).generate_state(1)[0])

    def __call__(self, state: QuantumState) -> float:
        if self.remaining() <= 0:
            raise BudgetExhausted
        seed = self._seed()
        self.n_evals += 1
        if self.mode == "exact" or self.cost == 0:
            return expectation(self.h, state)
        if self.mode == "per_term":
            e, used = meas.estimate_energy_per_term(self.h, state, self.cfg.shots_per_term, seed)
        else:
            batches = meas.measure_plan(state, self.plan, seed)
            e = meas.estimate_energy(self.h, batches).energy
            used = self.plan.total_shots
        self.shots += used
        return e


class _Loop:
    """Objective wrapper recording each evaluation into a trace."""

    def __init__(self, h, evaluator: EnergyEvaluator, prepare: Callable[[np.ndarray], QuantumState]):
        self.h = h
        self.evaluator = evaluator
        self.prepare = prepare
        self.trace = VqeTrace()
        self.iteration = 0
        self.t0 = time.perf_counter()
        self.last_state = None

    def __call__(self, x) -> float:
        state = self.prepare(np.asarray(x, dtype=float))
        self.last_state = state
        e = self.evaluator(state)
        self.trace.add(EvalRecord(
            self.iteration, [float(v) for v in x], float(e), self.evaluator.shots,
            time.perf_counter() - self.t0, expectation(self.h, state),
        ))
        return e


def _run_optimizer(name, loop: _Loop, bounds, budget, seed, x0=None, **kw):
    """Run one optimizer pass; budget exhaustion of the shot counter ends it quietly."""
    if budget <= 0:
        return None
    opt = get_optimizer(name)
    try:
        return opt(loop, bounds, budget, seed=seed, x0=x0, **kw)
    except BudgetExhausted:
        return None


# --------------------------------------------------------------------------
# UCC-XY


def run_ucc_xy(h_eff: PauliHamiltonian, r: Register, cfg: VqeConfig) -> VqeTrace:
    """Optimize ``(delta0, delta1, t)`` of the XY-mode UCC state on two qubits."""
    if h_eff.n_qubits != 2 or r.n_atoms != 2:
        raise ValueError("the UCC-XY protocol needs a two-qubit Hamiltonian and a two-atom register")
    if r.model.kind != "XY":
        raise ValueError("the UCC-XY protocol needs an XY-mode register")
    model = ResourceModel(r)
    evaluator = EnergyEvaluator(h_eff, cfg)
    loop = _Loop(h_eff, evaluator, lambda x: ucc_xy_state(x[0], x[1], x[2], model))
    bounds = [cfg.delta_bounds, cfg.delta_bounds, cfg.ucc_time_bounds]
    budget = evaluator.remaining()
    if evaluator.mode == "exact":
        # global search, then a local simplex polish of the incumbent
        de_budget = max(1, int(0.6 * budget))
        _run_optimizer(cfg.optimizer, loop, bounds, de_budget, cfg.seed,
                       **({"popsize": cfg.popsize} if cfg.optimizer == "DifferentialEvolution" else {}))
        x = np.array(loop.trace.best_parameters)
        span = np.array([b[1] - b[0] for b in bounds])
        while evaluator.remaining() > 0:
            before = loop.trace.best_energy
            _run_optimizer("NelderMead", loop, bounds, min(evaluator.remaining(), 400), cfg.seed,
                           x0=x, step=0.02 * span)
            x = np.array(loop.trace.best_parameters)
            span = span * 0.3
            if before - loop.trace.best_energy < 1e-13 and span.max() < 1e-6:
                break
    else:
        kw = {"popsize": cfg.popsize} if cfg.optimizer == "DifferentialEvolution" else {}
        _run_optimizer(cfg.optimizer, loop, bounds, budget, cfg.seed, **kw)
    loop.trace.meta.update(protocol="UccXY", evaluations=evaluator.n_evals)
    return loop.trace


def block_ground_energy(h2q: PauliHamiltonian) -> float:
    """Lowest eigenvalue of a two-qubit Hamiltonian restricted to ``{|01>, |10>}``."""
    from .pauli import to_matrix

    m = to_matrix(h2q)
    idx = [1, 2]
    return float(np.linalg.eigvalsh(m[np.ix_(idx, idx)])[0])


# --------------------------------------------------------------------------
# alternating and phase-segment baselines


def alternating_pulse(durations: Sequence[float], cfg: VqeConfig) -> PulseSequence:
    """``prod_l U_a(t_a^l) U_b(t_b^l)`` as segments, ``U_b`` acting first in each layer."""
    segs = []
    n_layers = len(durations) // 2
    for layer in range(n_layers):
        ta, tb = durations[2 * layer], durations[2 * layer + 1]
        segs.append(DriveSegment(tb, cfg.fixed_omega, 0.0, 0.0, "HalfZ", cfg.min_segment))
        segs.append(DriveSegment(ta, cfg.fixed_omega, cfg.fixed_delta, 0.0, "HalfZ", cfg.min_segment))
    return PulseSequence(tuple(segs), global_only=True)


def phase_pulse(durations: Sequence[float], phases: Sequence[float], cfg: VqeConfig) -> PulseSequence:
    return global_pulse(durations, [cfg.fixed_omega] * len(durations), [0.0] * len(durations),
                        phases, "HalfZ", cfg.min_segment)


def _baseline(h_t, r, n_params, bounds, build, cfg, protocol, init_state):
    if r.n_atoms != h_t.n_qubits:
        raise ValueError("register size differs from the Hamiltonian qubit count")
    model = ResourceModel(r)
    psi0 = prepare_product_state(init_state or "0" * h_t.n_qubits)
    mode = "exact" if cfg.exact_mode else "per_term"
    evaluator = EnergyEvaluator(h_t, cfg, mode)

    def prepare(x):
        return evolve(psi0, model, build(x))

    loop = _Loop(h_t, evaluator, prepare)
    rng = np.random.default_rng(cfg.seed)
    x0 = np.array([rng.uniform(*b) for b in bounds])
    kw = {"popsize": cfg.popsize} if cfg.optimizer == "DifferentialEvolution" else {}
    _run_optimizer(cfg.optimizer, loop, bounds, evaluator.remaining(), cfg.seed, x0=x0, **kw)
    loop.trace.meta.update(protocol=protocol, evaluations=evaluator.n_evals,
                           shots_per_energy=evaluator.cost)
    return loop.trace


def run_alternating(h_t: PauliHamiltonian, r: Register, L: int, cfg: VqeConfig,
                    init_state: str | None = None) -> VqeTrace:
    """Alternating ``H_a``/``H_b`` layers with the ``2L`` durations as parameters.

    Sampling mode measures every Pauli term with its own ``cfg.shots_per_term`` shots.
    """
    bounds = [cfg.duration_bounds] * (2 * L)
    return _baseline(h_t, r, 2 * L, bounds, lambda x: alternating_pulse(x, cfg), cfg,
                     "AlternatingAB", init_state)


def run_phase_ansatz(h_t: PauliHamiltonian, r: Register, L: int, cfg: VqeConfig,
                     init_state: str | None = None) -> VqeTrace:
    """``L`` constant-amplitude segments parameterized by duration and drive phase.

    Parameters are ordered ``(t^1, phi^1, t^2, phi^2, ...)``.
    """
    bounds = [cfg.duration_bounds, cfg.phase_bounds] * L
    return _baseline(h_t, r, 2 * L, bounds,
                     lambda x: phase_pulse(x[0::2], x[1::2], cfg), cfg, "PhaseSegments", init_state)


# --------------------------------------------------------------------------
# iterative pulse splitting


class SplitSaturated(Exception):
    """No interval is long enough to host another time label."""


@dataclass(frozen=True)
class PulseParams:
    time_labels: tuple[float, ...]
    omegas: tuple[float, ...]
    deltas: tuple[float, ...]
    min_segment: float = MIN_SEGMENT

    def __post_init__(self):
        labels = tuple(float(t) for t in self.time_labels)
        object.__setattr__(self, "time_labels", labels)
        object.__setattr__(self, "omegas", tuple(float(v) for v in self.omegas))
        object.__setattr__(self, "deltas", tuple(float(v) for v in self.deltas))
        if not (len(labels) == len(self.omegas) == len(self.deltas)) or not labels:
            raise ValueError("time labels, omegas and deltas must have equal, non-zero length")
        gaps = np.diff((0.0,) + labels)
        if np.any(gaps < self.min_segment - 1e-12):
            raise ValueError("consecutive time labels closer than min_segment")

    @property
    def t_tot(self) -> float:
        return self.time_labels[-1]

    @property
    def n_intervals(self) -> int:
        return len(self.time_labels)

    def durations(self) -> np.ndarray:
        return np.diff((0.0,) + self.time_labels)

    def vector(self) -> np.ndarray:
        return np.array(self.omegas + self.deltas)

    def with_vector(self, x) -> "PulseParams":
        k = self.n_intervals
        return replace(self, omegas=tuple(x[:k]), deltas=tuple(x[k:]))

    def pulse(self) -> PulseSequence:
        return global_pulse(self.durations(), self.omegas, self.deltas, None, "HalfZ", self.min_segment)

    @classmethod
    def uniform(cls, t_tot, omegas, deltas, min_segment=MIN_SEGMENT) -> "PulseParams":
        k = len(omegas)
        labels = tuple(t_tot * (i + 1) / k for i in range(k))
        return cls(labels, tuple(omegas), tuple(deltas), min_segment)


def split_time_label(p: PulseParams, seed, max_tries: int = 10_000) -> PulseParams:
    """Insert a uniformly drawn time label, duplicating the parent interval's drive.

    Draws landing within ``min_segment`` of an existing label are rejected.
    """
    edges = np.concatenate([[0.0], p.time_labels])
    if not np.any(np.diff(edges) > 2 * p.min_segment):
        raise SplitSaturated("every interval is shorter than twice min_segment")
    rng = np.random.default_rng(seed)
    for _ in range(max_tries):
        t = rng.uniform(0.0, p.t_tot)
        i = int(np.searchsorted(edges, t, side="right"))  # interval [edges[i-1], edges[i]]
        if i >= len(edges) or t <= 0.0:
            continue
        if t - edges[i - 1] >= p.min_segment and edges[i] - t >= p.min_segment:
            k = i - 1
            labels = p.time_labels[:k] + (float(t),) + p.time_labels[k:]
            om = p.omegas[: k + 1] + p.omegas[k:]
            de = p.deltas[: k + 1] + p.deltas[k:]
            return PulseParams(labels, om, de, p.min_segment)
    raise SplitSaturated("no feasible time label found")


def initial_pulse_params(cfg: VqeConfig, rng) -> PulseParams:
    k = cfg.initial_intervals
    om = rng.uniform(*cfg.omega_bounds, size=k)
    de = rng.uniform(*cfg.delta_bounds, size=k)
    return PulseParams.uniform(cfg.t_tot, om, de, cfg.min_segment)


def _iteration_kwargs(cfg: VqeConfig, n_params: int, rng):
    if cfg.optimizer == "Powell" and cfg.shuffle_directions:
        return {"direc": np.eye(n_params)[rng.permutation(n_params)]}
    if cfg.optimizer == "DifferentialEvolution":
        return {"popsize": cfg.popsize}
    return {}


def run_iterative_pulse(h_t: PauliHamiltonian, r: Register, cfg: VqeConfig,
                        init_state: str | None = None, *, max_iterations: int | None = None,
                        initial: PulseParams | None = None) -> VqeTrace:
    """Pulse shaping by repeated optimize-then-split on a fixed total duration.

    Every iteration runs ``cfg.optimizer`` for at most ``cfg.evals_per_iteration``
    evaluations starting from the previous parameters, then inserts one new
    time label. The loop ends when the shot budget (or, without sampling,
    ``cfg.max_evals``) is spent, when splitting saturates, or after
    ``max_iterations`` optimization passes.
    """
    if r.n_atoms != h_t.n_qubits:
        raise ValueError("register size differs from the Hamiltonian qubit count")
    model = ResourceModel(r)
    psi0 = prepare_product_state(init_state or "0" * h_t.n_qubits)
    evaluator = EnergyEvaluator(h_t, cfg)
    rng = np.random.default_rng(cfg.seed)
    params = initial or initial_pulse_params(cfg, rng)
    current = {"p": params}

    def prepare(x):
        return evolve(psi0, model, current["p"].with_vector(x).pulse())

    loop = _Loop(h_t, evaluator, prepare)
    history = []
    iteration = 0
    stop = "budget"
    while evaluator.remaining() > 0:
        if max_iterations is not None and iteration >= max_iterations:
            stop = "max_iterations"
            break
        loop.iteration = iteration
        p = current["p"]
        k = p.n_intervals
        bounds = [cfg.omega_bounds] * k + [cfg.delta_bounds] * k
        budget = min(cfg.evals_per_iteration, evaluator.remaining())
        n_before = len(loop.trace.records)
        res = _run_optimizer(cfg.optimizer, loop, bounds, budget, cfg.seed + iteration,
                             x0=p.vector(), **_iteration_kwargs(cfg, 2 * k, rng))
        new = loop.trace.records[n_before:]
        if new:
            best = min(new, key=lambda rec: rec.energy_estimate)
            current["p"] = p.with_vector(best.parameters)
        history.append(current["p"].n_intervals)
        iteration += 1
        if res is None and evaluator.remaining() <= 0:
            break
        try:
            current["p"] = split_time_label(current["p"], rng.integers(2**63))
        except SplitSaturated:
            stop = "saturated"
            break
    loop.trace.meta.update(protocol="IterativeSplit", iterations=iteration, stop=stop,
                           evaluations=evaluator.n_evals, shots_per_energy=evaluator.cost,
                           final_params=asdict(current["p"]), init_state=psi0_label(psi0),
                           distinct_bases=evaluator.plan.n_distinct if evaluator.plan else 0)
    return loop.trace


def psi0_label(psi: QuantumState) -> str:
    return format(int(np.argmax(np.abs(psi.amplitudes))), f"0{psi.n_qubits}b")


# --------------------------------------------------------------------------
# warm start


def scan_product_states(h_t: PauliHamiltonian, r: Register, cfg: VqeConfig,
                        e_exact: float | None = None) -> list[tuple[str, float]]:
    """Rank every computational-basis initial state by its error after one optimization pass.

    Each state runs the first pass of :func:`run_iterative_pulse` (``K``
    initial intervals, ``cfg.evals_per_iteration`` evaluations), repeated
    over ``cfg.n_repeats`` seeds; the mean relative error of the pass's
    incumbent (exact energy of the best-estimated parameters) is recorded. With ``evals_per_iteration == 0`` no pulse is
    applied and the product state's own energy is scored.
    """
    n = h_t.n_qubits
    if n > SCAN_QUBIT_CAP:
        raise ValueError(f"{n} qubits exceeds the product-state scan cap of {SCAN_QUBIT_CAP}")
    if e_exact is None:
        e_exact = ground_energy_exact(h_t)
    rows = []
    for bits in ("".join(b) for b in itertools.product("01", repeat=n)):
        errs = []
        for rep in range(cfg.n_repeats):
            if cfg.evals_per_iteration == 0:
                e = expectation(h_t, prepare_product_state(bits))
            else:
                sub = replace(cfg, seed=cfg.seed + 1000 * rep,
                              shot_budget_total=cfg.shot_budget_total,
                              max_evals=cfg.evals_per_iteration)
                trace = run_iterative_pulse(h_t, r, sub, bits, max_iterations=1)
                e = trace.incumbent_exact_energies()[-1]
            errs.append(relative_error(e_exact, e))
        rows.append((bits, float(np.mean(errs))))
    rows.sort(key=lambda row: row[1])
    return rows
