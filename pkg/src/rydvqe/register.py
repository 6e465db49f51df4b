"""Atom registers, interaction matrices and Hamiltonian-driven embedding."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .pauli import PauliHamiltonian

logger = logging.getLogger(__name__)

DEFAULT_C6 = 5420503.0  # rad/us * um^6
DEFAULT_C3 = 3700.0  # rad/us * um^3
DEFAULT_MIN_SPACING = 4.0  # um


@dataclass(frozen=True)
class InteractionModel:
    kind: str = "Ising"
    c6: float = DEFAULT_C6
    c3: float = DEFAULT_C3

    def __post_init__(self):
        if self.kind not in ("Ising", "XY"):
            raise ValueError(f"interaction kind must be 'Ising' or 'XY', got {self.kind!r}")
        coef = self.c6 if self.kind == "Ising" else self.c3
        if not (math.isfinite(coef) and coef > 0):
            raise ValueError(f"{self.kind} interaction coefficient must be positive and finite")

    @property
    def coefficient(self) -> float:
        return self.c6 if self.kind == "Ising" else self.c3

    @property
    def power(self) -> int:
        return 6 if self.kind == "Ising" else 3

    def to_dict(self) -> dict:
        key = "c6" if self.kind == "Ising" else "c3"
        return {"kind": self.kind, key: self.coefficient}

    @classmethod
    def from_dict(cls, d: dict) -> "InteractionModel":
        unknown = set(d) - {"kind", "c6", "c3"}
        if unknown:
            raise ValueError(f"unknown interaction model keys: {sorted(unknown)}")
        kw = {"kind": d.get("kind", "Ising")}
        for k in ("c6", "c3"):
            if k in d:
                kw[k] = float(d[k])
        return cls(**kw)


@dataclass(frozen=True)
class Register:
    """2D atom positions in micrometers with their interaction model."""

    positions: np.ndarray
    model: InteractionModel = field(default_factory=InteractionModel)
    min_spacing: float = DEFAULT_MIN_SPACING

    def __post_init__(self):
        pos = np.array(self.positions, dtype=float).reshape(-1, 2)
        if len(pos) < 1:
            raise ValueError("a register needs at least one atom")
        if not np.all(np.isfinite(pos)):
            raise ValueError("atom coordinates must be finite")
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        d = self.min_distance()
        if d < self.min_spacing - 1e-9:
            raise ValueError(
                f"atoms closer than min_spacing ({d:.4g} < {self.min_spacing} um)"
            )

    @property
    def n_atoms(self) -> int:
        return len(self.positions)

    def distances(self) -> np.ndarray:
        diff = self.positions[:, None, :] - self.positions[None, :, :]
        return np.sqrt((diff**2).sum(-1))

    def min_distance(self) -> float:
        if self.n_atoms < 2:
            return math.inf
        d = self.distances()
        return float(d[np.triu_indices(self.n_atoms, 1)].min())

    def with_positions(self, positions) -> "Register":
        return replace(self, positions=positions)

    def to_dict(self) -> dict:
        return {
            "positions": self.positions.tolist(),
            "model": self.model.to_dict(),
            "min_spacing": self.min_spacing,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Register":
        unknown = set(d) - {"positions", "model", "min_spacing"}
        if unknown:
            raise ValueError(f"unknown register keys: {sorted(unknown)}")
        return cls(
            np.asarray(d["positions"], dtype=float),
            InteractionModel.from_dict(d.get("model", {})),
            float(d.get("min_spacing", DEFAULT_MIN_SPACING)),
        )


def _pair_interactions(positions: np.ndarray, model: InteractionModel) -> np.ndarray:
    diff = positions[:, None, :] - positions[None, :, :]
    r2 = (diff**2).sum(-1)
    n = len(positions)
    off = ~np.eye(n, dtype=bool)
    if np.any(r2[off] == 0):
        raise ValueError("coincident atoms")
    v = np.zeros((n, n))
    v[off] = model.coefficient / r2[off] ** (model.power / 2)
    return v


def interaction_matrix(r: Register) -> np.ndarray:
    """Pairwise ``C6/r^6`` (Ising) or ``C3/r^3`` (XY) in rad/us, zero diagonal."""
    return _pair_interactions(r.positions, r.model)


def target_matrix(h: PauliHamiltonian, n_atoms: int) -> np.ndarray:
    """Positive coefficients of the pure two-Z strings, arranged as a matrix."""
    if n_atoms != h.n_qubits:
        raise ValueError(f"n_atoms ({n_atoms}) must equal the qubit count ({h.n_qubits})")
    vt = np.zeros((n_atoms, n_atoms))
    for t in h.terms:
        letters = t.string.letters
        if len(letters) == 2 and set(letters.values()) == {"Z"} and t.coefficient > 0:
            i, j = letters
            vt[i, j] = vt[j, i] = t.coefficient
    if not vt.any():
        logger.warning("no positive two-Z terms in the Hamiltonian; target matrix is zero")
    return vt


def embedding_score(vt: np.ndarray, vr: np.ndarray) -> float:
    """Sum of squared differences over all ordered pairs ``i != j``."""
    vt = np.asarray(vt, dtype=float)
    vr = np.asarray(vr, dtype=float)
    if vt.shape != vr.shape:
        raise ValueError(f"dimension mismatch {vt.shape} vs {vr.shape}")
    diff = vt - vr
    np.fill_diagonal(diff, 0.0)
    return float((diff**2).sum())


@dataclass
class EmbeddingOptions:
    max_evals: int = 4000
    n_starts: int = 10
    seed: int = 0
    target_scale: float = 1.0  # rad/us per Hartree applied to the target matrix
    box: float | None = None  # half-width of the coordinate search box, um


@dataclass
class EmbeddingResult:
    register: Register
    score: float
    trace: list[float]
    feasible: bool = True
    start_scores: list[float] = field(default_factory=list)


def _spacing_violation(pos: np.ndarray, d_min: float) -> float:
    n = len(pos)
    if n < 2:
        return 0.0
    diff = pos[:, None, :] - pos[None, :, :]
    d = np.sqrt((diff**2).sum(-1))[np.triu_indices(n, 1)]
    return float((np.maximum(0.0, d_min - d) ** 2).sum())


def _random_positions(rng, n, d_min, half_width, center):
    """Rejection-sample ``n`` points with pairwise distance >= ``d_min``."""
    for _ in range(200):
        pts = []
        tries = 0
        while len(pts) < n and tries < 5000:
            p = center + rng.uniform(-half_width, half_width, size=2)
            if all(np.hypot(*(p - q)) >= d_min for q in pts):
                pts.append(p)
            tries += 1
        if len(pts) == n:
            return np.array(pts)
        half_width *= 1.5
    raise RuntimeError("could not place atoms respecting min_spacing")


def optimize_register(vt: np.ndarray, init: Register, opts: EmbeddingOptions | None = None) -> EmbeddingResult:
    """Move atoms so the register interaction matrix approximates ``vt``.

    Each start runs Nelder-Mead on the flattened coordinates with an additive
    quadratic min-spacing penalty. Only candidates that respect the spacing
    are eligible as the result, so the returned score never exceeds the
    score of ``init``.
    """
    opts = opts or EmbeddingOptions()
    if opts.max_evals < 1:
        raise ValueError("max_evals must be >= 1")
    vt = np.asarray(vt, dtype=float) * opts.target_scale
    n = init.n_atoms
    if vt.shape != (n, n):
        raise ValueError(f"target matrix shape {vt.shape} does not match {n} atoms")
    d_min = init.min_spacing
    lam = 1e3 * (vt.max() if vt.max() > 0 else 1.0)
    model = init.model

    center = init.positions.mean(axis=0)
    extent = float(np.abs(init.positions - center).max()) if n > 1 else 0.0
    half = opts.box if opts.box is not None else max(50.0, 3 * extent + 2 * d_min * math.sqrt(n))
    bounds = [(c - half, c + half) for _ in range(n) for c in center]

    init_score = embedding_score(vt, interaction_matrix(init))
    best = {"score": init_score, "pos": init.positions.copy(), "n_feasible": 0}
    trace: list[float] = []

    def objective(x):
        pos = np.asarray(x).reshape(n, 2)
        viol = _spacing_violation(pos, d_min)
        try:
            vr = _pair_interactions(pos, model)
        except ValueError:
            return 1e300
        score = embedding_score(vt, vr)
        if viol == 0.0:
            best["n_feasible"] += 1
        if viol == 0.0 and score < best["score"]:
            best["score"] = score
            best["pos"] = pos.copy()
        trace.append(best["score"])
        return score + lam * viol

    rng = np.random.default_rng(opts.seed)
    start_scores = []
    for k in range(max(1, opts.n_starts)):
        if k == 0:
            x0 = init.positions
        else:
            span = max(extent, d_min * math.sqrt(n))
            x0 = _random_positions(rng, n, d_min, span, center)
        before = best["score"]
        _polish(objective, x0.ravel(), bounds, opts.max_evals, seed=opts.seed + k)
        start_scores.append(best["score"] if best["score"] < before else math.nan)

    feasible = best["n_feasible"] > 0
    if not feasible:
        logger.warning("embedding produced no candidate respecting min_spacing; returning init")
    result = init.with_positions(best["pos"])
    return EmbeddingResult(result, best["score"], trace, feasible, start_scores)


def _polish(objective, x0, bounds, max_evals, seed):
    """Nelder-Mead with restarts from the incumbent until the budget is spent."""
    from .optimizers import nelder_mead

    remaining = max_evals
    x = np.asarray(x0, dtype=float)
    while remaining > 0:
        res = nelder_mead(objective, bounds, remaining, seed=seed, x0=x)
        used = len(res.trace)
        remaining -= used
        if used == 0 or np.allclose(res.best_params, x, rtol=0, atol=1e-12):
            break
        x = res.best_params
