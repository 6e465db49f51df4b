"""Shot sampling in rotated Pauli bases and derandomized energy estimation.

Outcomes are stored as little-endian basis indices: bit ``j`` of an outcome
is the bit read on qubit ``j``, and bit 0 maps to eigenvalue +1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .pauli import PauliHamiltonian, PauliString, _parity, hits

# letter codes used by the greedy pass; the tuple order is the tie-break
_CODES = {"I": 0, "X": 1, "Y": 2, "Z": 3}
_TIE_ORDER = (3, 1, 2)  # Z < X < Y
_LETTER = {1: "X", 2: "Y", 3: "Z"}

_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
_SDG = np.diag([1, -1j])
_ROTATIONS = {"X": _H, "Y": _H @ _SDG}


def _state_amplitudes(state):
    return np.asarray(getattr(state, "amplitudes", state), dtype=complex)


def _check_basis(basis: PauliString):
    if basis.weight != basis.n_qubits:
        raise ValueError(f"measurement basis {basis} must act on every qubit")


@dataclass(frozen=True)
class ShotBatch:
    basis: PauliString
    outcomes: np.ndarray  # int basis indices, one per shot

    def __post_init__(self):
        _check_basis(self.basis)
        out = np.asarray(self.outcomes, dtype=np.int64).reshape(-1)
        if out.size and (out.min() < 0 or out.max() >= 1 << self.basis.n_qubits):
            raise ValueError("outcome outside the register's basis range")
        out.setflags(write=False)
        object.__setattr__(self, "outcomes", out)

    @property
    def n_qubits(self) -> int:
        return self.basis.n_qubits

    def __len__(self):
        return len(self.outcomes)

    def bitstrings(self) -> list[str]:
        """Outcomes as bitstrings, qubit 0 rightmost."""
        n = self.n_qubits
        return [format(int(o), f"0{n}b") for o in self.outcomes]

    @classmethod
    def from_bitstrings(cls, basis: PauliString, bitstrings: Iterable[str]) -> "ShotBatch":
        return cls(basis, np.array([int(b, 2) for b in bitstrings], dtype=np.int64))


def rotate_to_basis(amplitudes: np.ndarray, basis: PauliString) -> np.ndarray:
    """Apply the local rotations that map each basis letter onto Z."""
    n = basis.n_qubits
    psi = np.asarray(amplitudes, dtype=complex).reshape((2,) * n)
    for q, letter in basis.ops:
        if letter == "Z":
            continue
        axis = n - 1 - q
        psi = np.moveaxis(np.tensordot(_ROTATIONS[letter], psi, axes=([1], [axis])), 0, axis)
    return psi.reshape(-1)


def sample(state, basis: PauliString, n_shots: int, seed) -> ShotBatch:
    """Draw ``n_shots`` Born-rule outcomes of ``state`` measured in ``basis``."""
    _check_basis(basis)
    amps = _state_amplitudes(state)
    if amps.shape != (1 << basis.n_qubits,):
        raise ValueError("state dimension does not match the basis")
    if n_shots < 1:
        raise ValueError("n_shots must be positive")
    probs = np.abs(rotate_to_basis(amps, basis)) ** 2
    probs /= probs.sum()
    rng = np.random.default_rng(seed)
    return ShotBatch(basis, rng.choice(probs.size, size=int(n_shots), p=probs))


# --------------------------------------------------------------------------
# plans


@dataclass(frozen=True)
class DerandomizedPlan:
    bases: tuple[PauliString, ...]
    repetitions: tuple[int, ...]
    epsilon: float
    confidence_trace: tuple[float, ...] = field(default=(), compare=False, repr=False)

    def __post_init__(self):
        bases = tuple(self.bases)
        reps = tuple(int(r) for r in self.repetitions)
        if len(bases) != len(reps):
            raise ValueError("bases and repetitions differ in length")
        if any(r < 1 for r in reps):
            raise ValueError("repetitions must be positive")
        for b in bases:
            _check_basis(b)
        object.__setattr__(self, "bases", bases)
        object.__setattr__(self, "repetitions", reps)

    @property
    def total_shots(self) -> int:
        return sum(self.repetitions)

    @property
    def n_distinct(self) -> int:
        return len(set(self.bases))

    def merged(self) -> "DerandomizedPlan":
        """Canonical form: duplicates merged, first-occurrence order kept."""
        counts: dict[PauliString, int] = {}
        for b, r in zip(self.bases, self.repetitions):
            counts[b] = counts.get(b, 0) + r
        return DerandomizedPlan(tuple(counts), tuple(counts.values()), self.epsilon,
                                self.confidence_trace)

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "bases": [b.label() for b in self.bases],
            "repetitions": list(self.repetitions),
            "distinct_bases": self.n_distinct,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DerandomizedPlan":
        unknown = set(d) - {"epsilon", "bases", "repetitions", "distinct_bases"}
        if unknown:
            raise ValueError(f"unknown plan keys: {sorted(unknown)}")
        bases = tuple(PauliString.from_label(lbl) for lbl in d["bases"])
        reps = d.get("repetitions") or [1] * len(bases)
        plan = cls(bases, tuple(reps), float(d["epsilon"]))
        if "distinct_bases" in d and d["distinct_bases"] != plan.n_distinct:
            raise ValueError(f"plan lists {plan.n_distinct} distinct bases, header says {d['distinct_bases']}")
        return plan


def observables_from_hamiltonian(h: PauliHamiltonian) -> list[tuple[PauliString, float]]:
    return [(t.string, t.coefficient) for t in h.non_identity_terms()]


def _encode(observables, n_qubits):
    letters = np.zeros((len(observables), n_qubits), dtype=np.int8)
    for k, (s, _) in enumerate(observables):
        if s.n_qubits != n_qubits:
            raise ValueError("observable qubit count mismatch")
        if s.is_identity():
            raise ValueError("identity observable supplied to derandomize")
        for q, letter in s.ops:
            letters[k, q] = _CODES[letter]
    return letters


def normalized_weights(observables) -> np.ndarray:
    w = np.abs(np.array([float(c) for _, c in observables]))
    total = w.sum()
    return w / total if total > 0 else np.full(len(w), 1.0 / max(len(w), 1))


def derandomize(observables: Sequence[tuple[PauliString, float]], n_qubits: int,
                max_bases: int, epsilon: float, *, merge: bool = True) -> DerandomizedPlan:
    """Greedy letter-by-letter choice of ``max_bases`` full-support bases.

    The cost after each partial assignment is
    ``sum_s w_s prod_m (1 - nu q_{m,s})`` with ``nu = 1 - exp(-epsilon^2/2)``,
    ``w_s = |c_s| / sum |c|`` and ``q_{m,s}`` the probability that basis ``m``
    hits observable ``s`` when every still unassigned letter is uniformly
    random. Each letter minimizes that cost; ties go to Z, then X, then Y.
    Every basis starts with one repetition.
    """
    if max_bases < 1:
        raise ValueError("max_bases must be >= 1")
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    letters = _encode(observables, n_qubits)
    w = normalized_weights(observables)
    nu = 1.0 - math.exp(-epsilon**2 / 2)
    support = letters != 0
    size = support.sum(axis=1)
    fresh_q = 3.0 ** (-size)
    log_future_one = np.log1p(-nu * fresh_q)  # one untouched basis

    done = np.ones(len(w))  # product over completed bases
    bases = []
    trace = []
    for m in range(max_bases):
        future = np.exp(log_future_one * (max_bases - m - 1))
        alive = np.ones(len(w), dtype=bool)
        unassigned = size.astype(float)
        chosen = []
        pref = w * done * future
        for j in range(n_qubits):
            on = support[:, j]
            costs = []
            for code in _TIE_ORDER:
                a = alive & (~on | (letters[:, j] == code))
                u = unassigned - on
                q = np.where(a, 3.0 ** (-u), 0.0)
                costs.append(float(pref @ (1 - nu * q)))
            best = min(costs)
            pick = next(i for i, c in enumerate(costs) if c <= best + 1e-12 * abs(best))
            code = _TIE_ORDER[pick]
            alive &= ~on | (letters[:, j] == code)
            unassigned = unassigned - on
            chosen.append(code)
            trace.append(costs[pick])
        done = done * (1 - nu * alive)
        bases.append(PauliString(n_qubits, tuple((q, _LETTER[c]) for q, c in enumerate(chosen))))
    plan = DerandomizedPlan(tuple(bases), (1,) * len(bases), epsilon, tuple(trace))
    return plan.merged() if merge else plan


def random_plan(n_qubits: int, max_bases: int, epsilon: float, seed) -> DerandomizedPlan:
    """Uniformly random bases, for comparison against the greedy plan."""
    rng = np.random.default_rng(seed)
    bases = tuple(
        PauliString(n_qubits, tuple((q, "XYZ"[c]) for q, c in enumerate(rng.integers(0, 3, n_qubits))))
        for _ in range(max_bases)
    )
    return DerandomizedPlan(bases, (1,) * max_bases, epsilon).merged()


def hit_weights(plan: DerandomizedPlan, observables) -> np.ndarray:
    """Weighted hit count ``sum_s w_s [basis hits s]`` of every plan basis."""
    w = normalized_weights(observables)
    return np.array([
        sum(wi for (s, _), wi in zip(observables, w) if hits(b, s)) for b in plan.bases
    ])


def largest_remainder(weights: Sequence[float], total: int) -> np.ndarray:
    """Integer apportionment of ``total`` proportional to ``weights``."""
    weights = np.asarray(weights, dtype=float)
    if weights.sum() <= 0:
        weights = np.ones_like(weights)
    quotas = total * weights / weights.sum()
    base = np.floor(quotas).astype(int)
    short = total - base.sum()
    # stable sort keeps lower indices first among equal remainders
    order = np.argsort(-(quotas - base), kind="stable")
    base[order[:short]] += 1
    return base


def allocate_shots(plan: DerandomizedPlan, budget: int, observables) -> DerandomizedPlan:
    """Spread ``budget`` shots over the plan's distinct bases.

    Each basis first receives one shot; the remaining ``budget - K`` are
    apportioned by largest remainder in proportion to the weighted number of
    observables each basis hits.
    """
    plan = plan.merged()
    k = len(plan.bases)
    if budget < k:
        raise ValueError(f"budget {budget} is smaller than the {k} distinct bases")
    extra = largest_remainder(hit_weights(plan, observables), budget - k)
    return DerandomizedPlan(plan.bases, tuple(int(1 + e) for e in extra), plan.epsilon,
                            plan.confidence_trace)


def _basis_seed(master_seed, index):
    return np.random.SeedSequence([int(master_seed) & 0xFFFFFFFF, int(index)])


def measure_plan(state, plan: DerandomizedPlan, seed) -> list[ShotBatch]:
    """Sample every basis of ``plan``; basis ``k`` uses a seed derived from ``(seed, k)``."""
    return [
        sample(state, b, r, _basis_seed(seed, k))
        for k, (b, r) in enumerate(zip(plan.bases, plan.repetitions))
    ]


# --------------------------------------------------------------------------
# estimators


def _counts(batch: ShotBatch) -> np.ndarray:
    return np.bincount(batch.outcomes, minlength=1 << batch.n_qubits)


def _signs(n_qubits: int, observable: PauliString) -> np.ndarray:
    mask = 0
    for q in observable.support:
        mask |= 1 << q
    return 1 - 2 * _parity(np.arange(1 << n_qubits, dtype=np.int64) & mask)


def empirical_average(batches: Sequence[ShotBatch], observable: PauliString) -> tuple[float, int]:
    """Mean of ``prod_{j in support} (-1)^{bit_j}`` over every hitting shot.

    Returns ``(omega, n_hits)``; ``(0.0, 0)`` when no batch hits.
    """
    total = 0.0
    n_hits = 0
    signs = None
    for b in batches:
        if b.n_qubits != observable.n_qubits:
            raise ValueError("batch and observable differ in qubit count")
        if not hits(b.basis, observable):
            continue
        if signs is None:
            signs = _signs(observable.n_qubits, observable)
        total += float(_counts(b) @ signs)
        n_hits += len(b)
    if n_hits == 0:
        return 0.0, 0
    return total / n_hits, n_hits


@dataclass
class EnergyEstimate:
    """Shot-based energy; ``per_term`` and ``uncovered`` index the non-identity terms."""

    energy: float
    per_term: list[float]
    n_hits: list[int]
    uncovered: list[int]


def estimate_energy(h: PauliHamiltonian, batches: Sequence[ShotBatch]) -> EnergyEstimate:
    energy = h.identity_coefficient
    per_term, n_hits, uncovered = [], [], []
    counts = [(b.basis, _counts(b), len(b)) for b in batches]
    for k, t in enumerate(h.non_identity_terms()):
        signs = _signs(h.n_qubits, t.string)
        tot, nh = 0.0, 0
        for basis, c, size in counts:
            if hits(basis, t.string):
                tot += float(c @ signs)
                nh += size
        omega = tot / nh if nh else 0.0
        if nh == 0:
            uncovered.append(k)
        per_term.append(omega)
        n_hits.append(nh)
        energy += t.coefficient * omega
    return EnergyEstimate(float(energy), per_term, n_hits, uncovered)


def per_term_basis(s: PauliString) -> PauliString:
    """Full-support basis measuring ``s``, padding identity qubits with Z."""
    d = s.letters
    return PauliString(s.n_qubits, tuple((q, d.get(q, "Z")) for q in range(s.n_qubits)))


def estimate_energy_per_term(h: PauliHamiltonian, state, shots_per_term: int, seed) -> tuple[float, int]:
    """Baseline estimator: every non-identity term gets its own ``shots_per_term`` shots.

    Returns ``(energy, shots_used)``.
    """
    energy = h.identity_coefficient
    used = 0
    for k, t in enumerate(h.non_identity_terms()):
        batch = sample(state, per_term_basis(t.string), shots_per_term, _basis_seed(seed, k))
        omega, _ = empirical_average([batch], t.string)
        energy += t.coefficient * omega
        used += shots_per_term
    return float(energy), used
