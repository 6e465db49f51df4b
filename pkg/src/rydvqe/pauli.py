"""Pauli-string algebra, Hamiltonian text format and dense realizations.

Qubit ordering is little-endian throughout the package: qubit 0 is the least
significant bit of a computational-basis index, so the basis state written
``|b_{N-1} ... b_1 b_0>`` has index ``int("b_{N-1}...b_0", 2)``.
"""
from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

LETTERS = ("I", "X", "Y", "Z")

MATRIX_QUBIT_CAP = 14
JW_MODE_CAP = 16
PRUNE_TOL = 1e-12

_PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

# single-qubit products: (a, b) -> (phase, letter) with a.b = phase * letter
_PRODUCT = {}
for _a, _b in itertools.product(LETTERS, repeat=2):
    _m = _PAULI_MATRICES[_a] @ _PAULI_MATRICES[_b]
    for _c in LETTERS:
        _ref = _PAULI_MATRICES[_c]
        _ph = np.trace(_ref.conj().T @ _m) / 2
        if abs(abs(_ph) - 1) < 1e-12:
            _PRODUCT[_a, _b] = (complex(np.round(_ph.real) + 1j * np.round(_ph.imag)), _c)
            break


class HamiltonianParseError(ValueError):
    """Raised for malformed Hamiltonian text, with the offending position."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class CapExceededError(ValueError):
    """A dense construction was requested above the configured qubit cap."""


@dataclass(frozen=True)
class PauliString:
    """Tensor product of single-qubit Paulis on ``n_qubits`` qubits.

    Only non-identity letters are stored, as a sorted tuple of
    ``(qubit, letter)`` pairs; absent qubits carry the identity.
    """

    n_qubits: int
    ops: tuple[tuple[int, str], ...] = ()

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        clean = []
        seen = set()
        for q, letter in self.ops:
            q = int(q)
            if letter not in LETTERS:
                raise ValueError(f"unknown Pauli letter {letter!r}")
            if not 0 <= q < self.n_qubits:
                raise ValueError(f"qubit index {q} outside [0, {self.n_qubits})")
            if q in seen:
                raise ValueError(f"duplicate qubit index {q}")
            seen.add(q)
            if letter != "I":
                clean.append((q, letter))
        object.__setattr__(self, "ops", tuple(sorted(clean)))

    @classmethod
    def from_dict(cls, n_qubits: int, letters: Mapping[int, str]) -> "PauliString":
        return cls(n_qubits, tuple(letters.items()))

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        """Build from a dense label written qubit 0 first, e.g. ``"ZXI"``."""
        return cls(len(label), tuple(enumerate(label.upper())))

    @classmethod
    def identity(cls, n_qubits: int) -> "PauliString":
        return cls(n_qubits)

    @property
    def letters(self) -> dict[int, str]:
        return dict(self.ops)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(q for q, _ in self.ops)

    @property
    def weight(self) -> int:
        return len(self.ops)

    def is_identity(self) -> bool:
        return not self.ops

    def letter(self, qubit: int) -> str:
        return self.letters.get(qubit, "I")

    def label(self) -> str:
        """Dense label, qubit 0 first."""
        d = self.letters
        return "".join(d.get(q, "I") for q in range(self.n_qubits))

    def masks(self) -> tuple[int, int, int]:
        """Bit masks ``(x_mask, z_mask, n_y)`` of the symplectic representation."""
        x = z = ny = 0
        for q, letter in self.ops:
            if letter in "XY":
                x |= 1 << q
            if letter in "ZY":
                z |= 1 << q
            if letter == "Y":
                ny += 1
        return x, z, ny

    def __str__(self):
        if not self.ops:
            return "I"
        return " ".join(f"{letter}{q}" for q, letter in self.ops)

    def __mul__(self, other: "PauliString"):
        return multiply(self, other)


@dataclass(frozen=True)
class PauliTerm:
    coefficient: float
    string: PauliString


@dataclass(frozen=True)
class PauliHamiltonian:
    """Real-weighted sum of Pauli strings; duplicates are merged on construction."""

    n_qubits: int
    terms: tuple[PauliTerm, ...] = field(default=())

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        merged: dict[PauliString, float] = {}
        for term in self.terms:
            if term.string.n_qubits != self.n_qubits:
                raise ValueError("term qubit count differs from Hamiltonian")
            c = term.coefficient
            if isinstance(c, complex):
                if abs(c.imag) > PRUNE_TOL:
                    raise ValueError("Hamiltonian coefficients must be real")
                c = c.real
            c = float(c)
            if not math.isfinite(c):
                raise ValueError("non-finite coefficient")
            merged[term.string] = merged.get(term.string, 0.0) + c
        kept = tuple(
            PauliTerm(c, s) for s, c in merged.items() if abs(c) > PRUNE_TOL
        )
        object.__setattr__(self, "terms", kept)

    @classmethod
    def from_terms(cls, n_qubits: int, pairs: Iterable[tuple[float, PauliString]]):
        return cls(n_qubits, tuple(PauliTerm(c, s) for c, s in pairs))

    def __len__(self):
        return len(self.terms)

    @property
    def identity_coefficient(self) -> float:
        for t in self.terms:
            if t.string.is_identity():
                return t.coefficient
        return 0.0

    def non_identity_terms(self) -> list[PauliTerm]:
        return [t for t in self.terms if not t.string.is_identity()]

    def coefficient(self, string: PauliString) -> float:
        for t in self.terms:
            if t.string == string:
                return t.coefficient
        return 0.0

    def term_set(self) -> dict[PauliString, float]:
        return {t.string: t.coefficient for t in self.terms}


@dataclass(frozen=True)
class FermionHamiltonian:
    """Second-quantized Hamiltonian given by raw one- and two-body tensors.

    The two-body sum carries the conventional 1/2 prefactor, applied by
    :func:`jordan_wigner`; ``two_body[p, q, r, s]`` multiplies
    ``a_p^+ a_q^+ a_r a_s``.
    """

    n_modes: int
    one_body: np.ndarray
    two_body: np.ndarray

    def __post_init__(self):
        n = self.n_modes
        h1 = np.asarray(self.one_body, dtype=float)
        h2 = np.asarray(self.two_body, dtype=float)
        if n < 1:
            raise ValueError("n_modes must be positive")
        if h1.shape != (n, n):
            raise ValueError(f"one_body must have shape {(n, n)}, got {h1.shape}")
        if h2.shape != (n, n, n, n):
            raise ValueError(f"two_body must have shape {(n,) * 4}, got {h2.shape}")
        if not np.allclose(h1, h1.T, atol=1e-12, rtol=0):
            raise ValueError("one_body must be symmetric")
        object.__setattr__(self, "one_body", h1)
        object.__setattr__(self, "two_body", h2)

    @classmethod
    def from_dict(cls, data: Mapping) -> "FermionHamiltonian":
        n = int(data["n_modes"])
        h1 = np.asarray(data["one_body"], dtype=float).reshape(n, n)
        h2 = np.asarray(data["two_body"], dtype=float).reshape(n, n, n, n)
        return cls(n, h1, h2)


# --------------------------------------------------------------------------
# text format

_TOKEN = re.compile(r"([XYZ])(\d+)$")


def parse_hamiltonian(text: str) -> PauliHamiltonian:
    """Parse the line-oriented Hamiltonian format.

    ``#`` comment lines and blank lines are ignored. The first remaining line
    must be ``qubits: <N>``; every other line is ``<coefficient> <term>`` where
    ``<term>`` is ``I`` or tokens like ``Z0 X1``.

    Example:
        >>> h = parse_hamiltonian("qubits: 2\\n0.5 Z0\\n0.5 Z0")
        >>> [(t.coefficient, str(t.string)) for t in h.terms]
        [(1.0, 'Z0')]
    """
    n_qubits = None
    pairs = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        col0 = raw.index(stripped[0]) + 1
        if n_qubits is None:
            m = re.match(r"qubits\s*:\s*(\S+)\s*$", stripped)
            if not m:
                raise HamiltonianParseError("missing 'qubits: <N>' header", lineno, col0)
            try:
                n_qubits = int(m.group(1))
            except ValueError:
                raise HamiltonianParseError(
                    f"invalid qubit count {m.group(1)!r}", lineno, col0 + m.start(1)
                ) from None
            if n_qubits < 1:
                raise HamiltonianParseError("qubit count must be positive", lineno, col0)
            continue

        tokens = [(m.group(), m.start() + 1) for m in re.finditer(r"\S+", raw)]
        coef_text, coef_col = tokens[0]
        try:
            coef = float(coef_text)
        except ValueError:
            raise HamiltonianParseError(
                f"invalid coefficient {coef_text!r}", lineno, coef_col
            ) from None
        if not math.isfinite(coef):
            raise HamiltonianParseError("non-finite coefficient", lineno, coef_col)
        rest = tokens[1:]
        if not rest:
            raise HamiltonianParseError("missing Pauli term", lineno, coef_col + len(coef_text))
        letters: dict[int, str] = {}
        if len(rest) == 1 and rest[0][0] == "I":
            pass
        else:
            for tok, col in rest:
                m = _TOKEN.match(tok)
                if not m:
                    raise HamiltonianParseError(f"invalid Pauli token {tok!r}", lineno, col)
                q = int(m.group(2))
                if q >= n_qubits:
                    raise HamiltonianParseError(
                        f"qubit index {q} >= declared qubit count {n_qubits}", lineno, col
                    )
                if q in letters:
                    raise HamiltonianParseError(f"duplicate qubit index {q}", lineno, col)
                letters[q] = m.group(1)
        pairs.append((coef, PauliString.from_dict(n_qubits, letters)))
    if n_qubits is None:
        raise HamiltonianParseError("missing 'qubits: <N>' header", 1, 1)
    return PauliHamiltonian.from_terms(n_qubits, pairs)


def format_hamiltonian(h: PauliHamiltonian, comment: str | None = None) -> str:
    lines = []
    if comment:
        lines.extend(f"# {c}" for c in comment.splitlines())
    lines.append(f"qubits: {h.n_qubits}")
    for t in h.terms:
        lines.append(f"{t.coefficient!r} {t.string}")
    return "\n".join(lines) + "\n"


def load_hamiltonian(path) -> PauliHamiltonian:
    with open(path) as f:
        return parse_hamiltonian(f.read())


# --------------------------------------------------------------------------
# algebra


def multiply(a: PauliString, b: PauliString) -> tuple[complex, PauliString]:
    """Operator product ``a.b = phase * product`` with phase in {1, -1, 1j, -1j}."""
    if a.n_qubits != b.n_qubits:
        raise ValueError("mismatched n_qubits")
    la, lb = a.letters, b.letters
    phase = 1 + 0j
    out = {}
    for q in set(la) | set(lb):
        ph, letter = _PRODUCT[la.get(q, "I"), lb.get(q, "I")]
        phase *= ph
        out[q] = letter
    return phase, PauliString.from_dict(a.n_qubits, out)


def hits(measurement: PauliString, observable: PauliString) -> bool:
    """True when ``measurement`` agrees with ``observable`` on its whole support."""
    if measurement.n_qubits != observable.n_qubits:
        raise ValueError("mismatched n_qubits")
    if measurement.weight != measurement.n_qubits:
        raise ValueError("measurement basis must have no identity letters")
    m = measurement.letters
    return all(m[q] == letter for q, letter in observable.ops)


# --------------------------------------------------------------------------
# Jordan-Wigner


class _PauliSum(dict):
    """Mutable complex-weighted accumulator keyed by PauliString."""

    def add(self, coef, string):
        self[string] = self.get(string, 0) + coef

    def times(self, other: "_PauliSum") -> "_PauliSum":
        out = _PauliSum()
        for sa, ca in self.items():
            for sb, cb in other.items():
                ph, s = multiply(sa, sb)
                out.add(ca * cb * ph, s)
        return out


def _ladder(n: int, p: int, dagger: bool) -> _PauliSum:
    chain = {q: "Z" for q in range(p)}
    sign = -0.5j if dagger else 0.5j
    out = _PauliSum()
    out.add(0.5, PauliString.from_dict(n, {**chain, p: "X"}))
    out.add(sign, PauliString.from_dict(n, {**chain, p: "Y"}))
    return out


def jordan_wigner(f: FermionHamiltonian, *, max_modes: int = JW_MODE_CAP) -> PauliHamiltonian:
    """Map ``sum h_pq a+_p a_q + 1/2 sum h_pqrs a+_p a+_q a_r a_s`` to qubits.

    ``a+_p -> (X_p - iY_p)/2`` with a Z chain on modes below ``p``.
    """
    n = f.n_modes
    if n > max_modes:
        raise CapExceededError(f"{n} modes exceeds the Jordan-Wigner cap of {max_modes}")
    up = [_ladder(n, p, True) for p in range(n)]
    down = [_ladder(n, p, False) for p in range(n)]
    total = _PauliSum()

    for p, q in zip(*np.nonzero(f.one_body)):
        for s, c in up[p].times(down[q]).items():
            total.add(f.one_body[p, q] * c, s)

    pair_cache: dict[tuple[int, int], _PauliSum] = {}
    for p, q, r, s in zip(*np.nonzero(f.two_body)):
        key_a = (p, q)
        if key_a not in pair_cache:
            pair_cache[key_a] = up[p].times(up[q])
        key_b = (-1 - r, -1 - s)
        if key_b not in pair_cache:
            pair_cache[key_b] = down[r].times(down[s])
        for st, c in pair_cache[key_a].times(pair_cache[key_b]).items():
            total.add(0.5 * f.two_body[p, q, r, s] * c, st)

    pairs = []
    for s, c in total.items():
        if abs(c) < PRUNE_TOL:
            continue
        if abs(c.imag) > 1e-9:
            raise ValueError(
                f"non-Hermitian Jordan-Wigner result (imaginary coefficient on {s}); "
                "check the input tensors"
            )
        pairs.append((c.real, s))
    return PauliHamiltonian.from_terms(n, pairs)


# --------------------------------------------------------------------------
# dense realizations


def _check_cap(n: int, cap: int):
    if n > cap:
        raise CapExceededError(f"{n} qubits exceeds the dense-matrix cap of {cap}")


def _basis_indices(n: int) -> np.ndarray:
    return np.arange(1 << n, dtype=np.int64)


def _parity(x: np.ndarray) -> np.ndarray:
    """Parity of the popcount of each entry of a non-negative int64 array."""
    x = x.copy()
    out = np.zeros(x.shape, dtype=np.int64)
    while np.any(x):
        out ^= x & 1
        x >>= 1
    return out


def string_action(s: PauliString) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(targets, phases)`` with ``P|b> = phases[b] |targets[b]>``."""
    x, z, ny = s.masks()
    idx = _basis_indices(s.n_qubits)
    signs = 1 - 2 * _parity(idx & z)
    return idx ^ x, (1j) ** ny * signs


def to_matrix(h: PauliHamiltonian, *, max_qubits: int = MATRIX_QUBIT_CAP) -> np.ndarray:
    n = h.n_qubits
    _check_cap(n, max_qubits)
    dim = 1 << n
    m = np.zeros((dim, dim), dtype=complex)
    cols = _basis_indices(n)
    for t in h.terms:
        rows, phases = string_action(t.string)
        m[rows, cols] += t.coefficient * phases
    return m


def string_matrix(s: PauliString) -> np.ndarray:
    return to_matrix(PauliHamiltonian.from_terms(s.n_qubits, [(1.0, s)]))


def ground_energy_exact(h: PauliHamiltonian, *, max_qubits: int = MATRIX_QUBIT_CAP) -> float:
    """Lowest eigenvalue of the dense Hamiltonian."""
    _check_cap(h.n_qubits, max_qubits)
    if all(t.string.is_identity() for t in h.terms):
        return h.identity_coefficient
    if all(set(t.string.letters.values()) <= {"Z"} for t in h.terms):
        return float(np.min(diagonal(h)))
    return float(np.linalg.eigvalsh(to_matrix(h, max_qubits=max_qubits))[0])


def ground_state_exact(h: PauliHamiltonian, *, max_qubits: int = MATRIX_QUBIT_CAP):
    """``(energy, vector)`` for the lowest eigenpair."""
    _check_cap(h.n_qubits, max_qubits)
    w, v = np.linalg.eigh(to_matrix(h, max_qubits=max_qubits))
    return float(w[0]), v[:, 0]


def diagonal(h: PauliHamiltonian) -> np.ndarray:
    """Diagonal of the Hamiltonian in the computational basis."""
    n = h.n_qubits
    idx = _basis_indices(n)
    d = np.zeros(1 << n)
    for t in h.terms:
        x, z, _ = t.string.masks()
        if x == 0:
            d += t.coefficient * (1 - 2 * _parity(idx & z))
    return d


def pauli_expectation(s: PauliString, amplitudes: np.ndarray) -> complex:
    targets, phases = string_action(s)
    return np.vdot(amplitudes[targets], phases * amplitudes)


def expectation(h: PauliHamiltonian, psi, *, norm_tol: float = 1e-6) -> float:
    """``<psi|H|psi>`` accumulated term by term.

    ``psi`` may be a :class:`~rydvqe.dynamics.QuantumState` or a bare
    amplitude vector.
    """
    amps = np.asarray(getattr(psi, "amplitudes", psi), dtype=complex)
    if amps.shape != (1 << h.n_qubits,):
        raise ValueError(
            f"state dimension {amps.shape} does not match {h.n_qubits} qubits"
        )
    norm = np.linalg.norm(amps)
    if abs(norm - 1) > norm_tol:
        raise ValueError(f"state is not normalized (norm {norm:.3g})")
    total = 0j
    for t in h.terms:
        if t.string.is_identity():
            total += t.coefficient
        else:
            total += t.coefficient * pauli_expectation(t.string, amps)
    if abs(total.imag) > 1e-10:
        raise ValueError(f"imaginary energy residue {total.imag:.3g}")
    return float(total.real)
