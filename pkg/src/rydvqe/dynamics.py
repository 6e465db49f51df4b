"""Resource Hamiltonians of a Rydberg register and piecewise-constant evolution.

Units: hbar = 1, frequencies in rad/us, times in us.

Frame convention. Computational-basis Paulis follow the usual matrices
(``Z|0> = |0>``), which is also the frame of every target Hamiltonian. The
atom drive is written in the atom frame where ``|1>`` is the excited state:
``n = |1><1|``, ``Zt = 2n - 1 = -Z`` and ``Yt = -Y`` so that a drive of phase
``phi`` couples as ``Omega/2 (e^{i phi}|0><1| + h.c.)
= Omega/2 (cos(phi) X + sin(phi) Yt)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .register import Register, interaction_matrix
from .pauli import CapExceededError

DYNAMICS_QUBIT_CAP = 12
MIN_SEGMENT = 0.004  # us
NORM_DRIFT_TOL = 1e-9

Z_CONVENTIONS = ("Projector", "HalfZ")


class DynamicsError(RuntimeError):
    pass


def _check_cap(n, cap=DYNAMICS_QUBIT_CAP):
    if n > cap:
        raise CapExceededError(f"{n} qubits exceeds the dynamics cap of {cap}")


@dataclass(frozen=True)
class QuantumState:
    """Normalized amplitude vector over ``2**n_qubits`` little-endian basis states."""

    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.shape != (1 << self.n_qubits,):
            raise ValueError(f"expected {1 << self.n_qubits} amplitudes, got {amps.shape[0]}")
        if not np.all(np.isfinite(amps)):
            raise DynamicsError("non-finite amplitudes")
        norm = np.linalg.norm(amps)
        if abs(norm - 1) > NORM_DRIFT_TOL:
            raise ValueError(f"state norm {norm!r} deviates from 1")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_vector(cls, vec, normalize: bool = True) -> "QuantumState":
        vec = np.asarray(vec, dtype=complex)
        n = int(round(math.log2(vec.size)))
        if normalize:
            vec = vec / np.linalg.norm(vec)
        return cls(n, vec)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def fidelity(self, other: "QuantumState") -> float:
        return float(abs(np.vdot(self.amplitudes, other.amplitudes)) ** 2)

    def excitation_number(self) -> float:
        """Expected number of atoms in ``|1>``."""
        counts = _bit_table(self.n_qubits).sum(axis=1)
        return float(self.probabilities() @ counts)


def prepare_product_state(bits: str) -> QuantumState:
    """Basis state from a bitstring written most significant qubit first.

    The rightmost character is qubit 0, so ``"01"`` puts qubit 0 in ``|1>``.
    """
    if not bits or set(bits) - {"0", "1"}:
        raise ValueError(f"invalid bitstring {bits!r}")
    n = len(bits)
    _check_cap(n)
    amps = np.zeros(1 << n, dtype=complex)
    amps[int(bits, 2)] = 1.0
    return QuantumState(n, amps)


def _as_per_qubit(value, n, name):
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        return np.full(n, float(arr))
    if arr.shape != (n,):
        raise ValueError(f"{name} must be a scalar or have length {n}, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class DriveSegment:
    """Constant drive held for ``duration`` us.

    ``omega`` and ``delta`` are scalars (global addressing) or per-qubit
    arrays (local addressing).
    """

    duration: float
    omega: float | np.ndarray = 0.0
    delta: float | np.ndarray = 0.0
    phase: float = 0.0
    z_convention: str = "Projector"
    min_segment: float = field(default=MIN_SEGMENT, compare=False)

    def __post_init__(self):
        if not math.isfinite(self.duration) or self.duration <= 0:
            raise ValueError("segment duration must be positive and finite")
        if self.duration < self.min_segment - 1e-12:
            raise ValueError(
                f"segment duration {self.duration} us is below min_segment {self.min_segment} us"
            )
        if self.z_convention not in Z_CONVENTIONS:
            raise ValueError(f"z_convention must be one of {Z_CONVENTIONS}")
        for name in ("omega", "delta"):
            v = getattr(self, name)
            arr = np.asarray(v, dtype=float)
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} must be finite")
            if arr.ndim == 0:
                object.__setattr__(self, name, float(arr))
            else:
                arr = arr.copy()
                arr.setflags(write=False)
                object.__setattr__(self, name, arr)
        if np.any(np.asarray(self.omega) < 0):
            raise ValueError("omega must be non-negative")

    @property
    def is_global(self) -> bool:
        return np.ndim(self.omega) == 0 and np.ndim(self.delta) == 0

    def to_dict(self) -> dict:
        def enc(v):
            return v.tolist() if isinstance(v, np.ndarray) else v

        return {
            "duration_us": self.duration,
            "omega": enc(self.omega),
            "delta": enc(self.delta),
            "phase": self.phase,
            "z_convention": self.z_convention,
        }

    @classmethod
    def from_dict(cls, d: dict, min_segment: float = MIN_SEGMENT) -> "DriveSegment":
        unknown = set(d) - {"duration_us", "omega", "delta", "phase", "z_convention"}
        if unknown:
            raise ValueError(f"unknown segment keys: {sorted(unknown)}")
        return cls(
            float(d["duration_us"]),
            d.get("omega", 0.0),
            d.get("delta", 0.0),
            float(d.get("phase", 0.0)),
            d.get("z_convention", "Projector"),
            min_segment,
        )


@dataclass(frozen=True)
class PulseSequence:
    segments: tuple[DriveSegment, ...]
    global_only: bool = False

    def __post_init__(self):
        segs = tuple(self.segments)
        object.__setattr__(self, "segments", segs)
        if self.global_only:
            for k, s in enumerate(segs):
                if not s.is_global:
                    raise ValueError(f"segment {k} uses local addressing in a global-only pulse")

    @property
    def total_duration(self) -> float:
        return float(sum(s.duration for s in self.segments))

    def then(self, other: "PulseSequence") -> "PulseSequence":
        return PulseSequence(self.segments + other.segments, self.global_only and other.global_only)

    def to_dict(self) -> dict:
        return {"global_only": self.global_only, "segments": [s.to_dict() for s in self.segments]}

    @classmethod
    def from_dict(cls, d: dict, min_segment: float = MIN_SEGMENT) -> "PulseSequence":
        unknown = set(d) - {"global_only", "segments"}
        if unknown:
            raise ValueError(f"unknown pulse keys: {sorted(unknown)}")
        segs = tuple(DriveSegment.from_dict(s, min_segment) for s in d["segments"])
        return cls(segs, bool(d.get("global_only", False)))


# --------------------------------------------------------------------------
# operator building blocks

def _bit_table(n: int) -> np.ndarray:
    """``table[b, i]`` is bit ``i`` of basis index ``b``."""
    idx = np.arange(1 << n)
    return ((idx[:, None] >> np.arange(n)[None, :]) & 1).astype(float)


def _flip_operator(n: int, i: int, with_phase: bool) -> np.ndarray:
    """Dense ``X_i`` or atom-frame ``Yt_i`` (``= -Y_i``)."""
    dim = 1 << n
    idx = np.arange(dim)
    m = np.zeros((dim, dim), dtype=complex)
    bit = (idx >> i) & 1
    if with_phase:
        # Yt|0> = -i|1>, Yt|1> = i|0>
        m[idx ^ (1 << i), idx] = np.where(bit == 0, -1j, 1j)
    else:
        m[idx ^ (1 << i), idx] = 1.0
    return m


class ResourceModel:
    """Cached operator pieces of the resource Hamiltonian for one register."""

    def __init__(self, register: Register):
        n = register.n_atoms
        _check_cap(n)
        self.register = register
        self.n = n
        self.dim = 1 << n
        self.bits = _bit_table(n)  # occupation n_i on the diagonal
        self.x_ops = [_flip_operator(n, i, False) for i in range(n)]
        self.y_ops = [_flip_operator(n, i, True) for i in range(n)]
        self.sum_x = sum(self.x_ops) if n else None
        self.sum_y = sum(self.y_ops) if n else None
        self.interaction = self._interaction()

    def _interaction(self) -> np.ndarray:
        v = interaction_matrix(self.register)
        n = self.n
        if self.register.model.kind == "Ising":
            diag = np.zeros(self.dim)
            for i in range(n):
                for j in range(i):
                    diag += v[i, j] * self.bits[:, i] * self.bits[:, j]
            return np.diag(diag).astype(complex)
        h = np.zeros((self.dim, self.dim), dtype=complex)
        for i in range(n):
            for j in range(n):
                if i != j:
                    # Yt_i Yt_j = Y_i Y_j
                    h += v[i, j] * (self.x_ops[i] @ self.x_ops[j] + self.y_ops[i] @ self.y_ops[j])
        return h

    def hamiltonian(self, seg: DriveSegment) -> np.ndarray:
        n = self.n
        h = self.interaction.copy()
        cphi, sphi = math.cos(seg.phase), math.sin(seg.phase)
        if seg.is_global:
            if seg.omega != 0.0:
                h += 0.5 * seg.omega * (cphi * self.sum_x + sphi * self.sum_y)
            occ = self.bits.sum(axis=1) * seg.delta
        else:
            om = _as_per_qubit(seg.omega, n, "omega")
            de = _as_per_qubit(seg.delta, n, "delta")
            for i in range(n):
                if om[i] != 0.0:
                    h += 0.5 * om[i] * (cphi * self.x_ops[i] + sphi * self.y_ops[i])
            occ = self.bits @ de
        if seg.z_convention == "Projector":
            z_diag = -occ  # -sum_i delta_i n_i
        else:
            # -1/2 sum_i delta_i Zt_i with Zt = 2n - 1
            total = seg.delta * n if seg.is_global else float(np.sum(seg.delta))
            z_diag = -occ + 0.5 * total
        h[np.diag_indices(self.dim)] += z_diag
        return h

    def propagate(self, amps: np.ndarray, seg: DriveSegment) -> np.ndarray:
        h = self.hamiltonian(seg)
        w, v = np.linalg.eigh(h)
        out = v @ (np.exp(-1j * w * seg.duration) * (v.conj().T @ amps))
        if not np.all(np.isfinite(out)):
            raise DynamicsError("non-finite amplitudes during evolution")
        norm = np.linalg.norm(out)
        if abs(norm - 1) > NORM_DRIFT_TOL:
            raise DynamicsError(f"norm drift {abs(norm - 1):.3g} exceeds {NORM_DRIFT_TOL}")
        return out / norm


def build_hamiltonian(r: Register, seg: DriveSegment) -> np.ndarray:
    """Dense ``H_inter + H_drive`` for a register under one constant segment.

    Drive: ``1/2 sum_i Omega_i (cos(phi) X_i + sin(phi) Yt_i)`` plus either
    ``-sum_i delta_i n_i`` (``Projector``) or ``-1/2 sum_i delta_i Zt_i``
    (``HalfZ``). Interaction: ``sum_{i>j} C6/r^6 n_i n_j`` (Ising) or
    ``sum_{i!=j} C3/r^3 (X_i X_j + Y_i Y_j)`` (XY, each pair counted twice).
    """
    return ResourceModel(r).hamiltonian(seg)


def evolve(psi0: QuantumState, r: Register | ResourceModel, pulse: PulseSequence) -> QuantumState:
    """Apply ``exp(-i H_k tau_k)`` for each segment in order.

    ``r`` may be a prebuilt :class:`ResourceModel` to reuse cached operators.
    """
    model = r if isinstance(r, ResourceModel) else ResourceModel(r)
    if psi0.n_qubits != model.n:
        raise ValueError(f"state has {psi0.n_qubits} qubits but register has {model.n} atoms")
    amps = np.array(psi0.amplitudes)
    for seg in pulse.segments:
        amps = model.propagate(amps, seg)
    return QuantumState(model.n, amps)


def ucc_xy_state(delta0: float, delta1: float, t: float, r: Register | ResourceModel) -> QuantumState:
    """``exp(-i t (delta0 Zt_0 + delta1 Zt_1 + H_XY)) |01>`` on a two-atom XY register.

    Excitation number is conserved, so the result lives on ``{|01>, |10>}``.
    """
    model = r if isinstance(r, ResourceModel) else ResourceModel(r)
    if model.n != 2 or model.register.model.kind != "XY":
        raise ValueError("ucc_xy_state needs a two-atom register in XY mode")
    psi0 = prepare_product_state("01")
    if t == 0:
        return psi0
    zt = 2 * model.bits - 1
    h = model.interaction.copy()
    h[np.diag_indices(4)] += delta0 * zt[:, 0] + delta1 * zt[:, 1]
    w, v = np.linalg.eigh(h)
    amps = v @ (np.exp(-1j * w * t) * (v.conj().T @ psi0.amplitudes))
    return QuantumState(2, amps / np.linalg.norm(amps))


def global_pulse(durations: Sequence[float], omegas: Sequence[float], deltas: Sequence[float],
                 phases: Sequence[float] | None = None, z_convention: str = "HalfZ",
                 min_segment: float = MIN_SEGMENT) -> PulseSequence:
    """Global-only pulse from parallel per-segment parameter lists."""
    phases = [0.0] * len(durations) if phases is None else phases
    segs = tuple(
        DriveSegment(float(t), float(o), float(d), float(p), z_convention, min_segment)
        for t, o, d, p in zip(durations, omegas, deltas, phases)
    )
    return PulseSequence(segs, global_only=True)
