"""Command-line front end: ``rydvqe <subcommand> [options]``.

Every subcommand reads an optional JSON run configuration (``--config``),
applies command-line overrides, writes its outputs atomically under
``--out`` and leaves a ``header.json`` next to them. The header holds the
fully resolved configuration, so ``rydvqe <subcommand> --config
out/header.json`` repeats the run exactly.

Exit codes: 0 success, 2 unreadable input, 3 violated constraint,
4 insufficient budget, 5 numerical failure.
"""
from __future__ import annotations

import argparse
import copy
import json
import logging
import math
import platform
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from . import files
from .dynamics import (
    DynamicsError,
    PulseSequence,
    evolve,
    prepare_product_state,
)
from .fixtures import FixtureChecksumError, fixture_path, load_fixture, sha256_of
from .measurement import (
    allocate_shots,
    derandomize,
    estimate_energy,
    measure_plan,
    observables_from_hamiltonian,
)
from .optimizers import OptimizationError
from .pauli import (
    MATRIX_QUBIT_CAP,
    CapExceededError,
    HamiltonianParseError,
    PauliHamiltonian,
    PauliString,
    expectation,
    ground_energy_exact,
    load_hamiltonian,
    pauli_expectation,
)
from .register import EmbeddingOptions, InteractionModel, Register, optimize_register, target_matrix
from .vqe import (
    EnergyEvaluator,
    VqeConfig,
    VqeTrace,
    relative_error,
    run_alternating,
    run_iterative_pulse,
    run_phase_ansatz,
    run_ucc_xy,
    scan_product_states,
)

logger = logging.getLogger("rydvqe")

SCHEMA_VERSION = 1
EXIT_PARSE, EXIT_CONSTRAINT, EXIT_BUDGET, EXIT_NUMERIC = 2, 3, 4, 5


class ConfigError(ValueError):
    pass


class BudgetError(RuntimeError):
    pass


# --------------------------------------------------------------------------
# configuration

DEFAULTS: dict = {
    "schema_version": SCHEMA_VERSION,
    "seed": 0,  # master seed; per-run seeds are seed, seed + 1, ...
    "hamiltonian": None,  # fixture name or file path
    "register": None,  # register JSON path
    "pulse": None,  # pulse JSON path
    "plan": None,  # plan JSON path
    "init_state": None,  # bitstring, qubit 0 rightmost; default all zeros
    "physics": {"interaction": "Ising", "c6": 5420503.0, "c3": 3700.0,
                "min_spacing": 4.0, "min_segment": 0.004, "xy_distance": 20.0},
    "embed": {"max_evals": 4000, "n_starts": 10, "target_scale": 1.0, "box": None,
              "grid_spacing": 10.0},
    "derandomize": {"epsilon": 0.9, "max_bases": 50, "shots": 1000},
    "estimate": {"exact_mode": False},
    "evolve": {"observables": []},
    "vqe": {},  # VqeConfig fields
    "runs": {"n_seeds": 1, "layers": 3, "warm_start": False, "scan_evals": 20,
             "scan_repeats": 1, "scan_exact": True},
}

_SECTIONS = {k for k, v in DEFAULTS.items() if isinstance(v, dict)}


def _merge(base: dict, override: dict, where: str = "config") -> dict:
    out = copy.deepcopy(base)
    for k, v in override.items():
        if k not in base:
            raise ConfigError(f"unknown key {where}.{k}")
        if k in _SECTIONS and k != "vqe":
            if not isinstance(v, dict):
                raise ConfigError(f"{where}.{k} must be an object")
            out[k] = _merge(base[k], v, f"{where}.{k}")
        else:
            out[k] = copy.deepcopy(v)
    return out


def load_config(path: str | None) -> dict:
    if path is None:
        return copy.deepcopy(DEFAULTS)
    try:
        raw = files.read_json(path)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    if "reproducibility" in raw:
        raw = raw["reproducibility"]["config"]
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be an object")
    version = raw.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {version}")
    cfg = _merge(DEFAULTS, raw)
    validate_config(cfg)
    return cfg


def validate_config(cfg: dict) -> None:
    phys = cfg["physics"]
    for k in ("c6", "c3", "min_spacing", "min_segment", "xy_distance"):
        v = phys[k]
        if not isinstance(v, (int, float)) or not math.isfinite(v) or v <= 0:
            raise ConfigError(f"physics.{k} must be a positive number")
    if phys["interaction"] not in ("Ising", "XY"):
        raise ConfigError("physics.interaction must be 'Ising' or 'XY'")
    try:
        VqeConfig.from_dict(_vqe_fields(cfg))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"vqe: {exc}") from exc
    if cfg["runs"]["n_seeds"] < 1:
        raise ConfigError("runs.n_seeds must be positive")


def _vqe_fields(cfg: dict) -> dict:
    d = dict(cfg["vqe"])
    d.setdefault("min_segment", cfg["physics"]["min_segment"])
    return d


def vqe_config(cfg: dict, seed: int) -> VqeConfig:
    return VqeConfig.from_dict({**_vqe_fields(cfg), "seed": seed})


# --------------------------------------------------------------------------
# inputs


def _hamiltonian_source(cfg: dict) -> Path:
    src = cfg["hamiltonian"]
    if src is None:
        raise ConfigError("no Hamiltonian given (use --hamiltonian or the config key)")
    p = Path(src)
    if p.exists():
        return p
    try:
        return fixture_path(src)
    except KeyError:
        raise ConfigError(f"{src!r} is neither a file nor a bundled fixture") from None


def load_target(cfg: dict) -> tuple[PauliHamiltonian, Path]:
    path = _hamiltonian_source(cfg)
    if not Path(cfg["hamiltonian"]).exists():
        return load_fixture(cfg["hamiltonian"]), path
    return load_hamiltonian(path), path


def _model(cfg: dict) -> InteractionModel:
    p = cfg["physics"]
    return InteractionModel(p["interaction"], float(p["c6"]), float(p["c3"]))


def grid_register(n: int, cfg: dict) -> Register:
    cols = math.ceil(math.sqrt(n))
    a = cfg["embed"]["grid_spacing"]
    pos = [(a * (k % cols), a * (k // cols)) for k in range(n)]
    return Register(np.array(pos, float), _model(cfg), cfg["physics"]["min_spacing"])


def load_register(cfg: dict) -> Register | None:
    if cfg["register"] is None:
        return None
    return files.read_register(cfg["register"])


def initial_bits(cfg: dict, n: int) -> str:
    bits = cfg["init_state"] or "0" * n
    if len(bits) != n or set(bits) - {"0", "1"}:
        raise ConfigError(f"init_state {bits!r} is not a {n}-bit string")
    return bits


def _require(cfg: dict, key: str) -> str:
    if cfg[key] is None:
        raise ConfigError(f"missing {key} (use --{key.replace('_', '-')} or the config key)")
    return cfg[key]


def load_pulse(cfg: dict) -> PulseSequence:
    return files.read_pulse(_require(cfg, "pulse"), cfg["physics"]["min_segment"])


# --------------------------------------------------------------------------
# output helpers


def _checksums(cfg: dict) -> dict:
    out = {}
    if cfg["hamiltonian"] is not None:
        try:
            out["hamiltonian"] = sha256_of(_hamiltonian_source(cfg))
        except ConfigError:
            pass
    for key in ("register", "pulse", "plan"):
        if cfg[key] is not None and Path(cfg[key]).exists():
            out[key] = sha256_of(Path(cfg[key]))
    return out


def write_header(out: Path, command: str, cfg: dict, seeds: list[int], argv: list[str]) -> Path:
    import scipy

    header = {"reproducibility": {
        "tool": "rydvqe", "version": __version__, "command": command, "argv": argv,
        "seeds": seeds, "config": cfg, "checksums": _checksums(cfg),
        "python": platform.python_version(), "numpy": np.__version__, "scipy": scipy.__version__,
        "started": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
    }}
    return files.write_json(out / "header.json", header)


def _seeds(cfg: dict, base: int) -> list[int]:
    return [base + k for k in range(cfg["runs"]["n_seeds"])]


def _emit(msg: str) -> None:
    print(msg, flush=True)


# --------------------------------------------------------------------------
# subcommands


def cmd_embed(cfg: dict, seed: int, out: Path, jobs: int) -> int:
    h, _ = load_target(cfg)
    vt = target_matrix(h, h.n_qubits)
    init = load_register(cfg) or grid_register(h.n_qubits, cfg)
    e = cfg["embed"]
    opts = EmbeddingOptions(max_evals=e["max_evals"], n_starts=e["n_starts"], seed=seed,
                            target_scale=e["target_scale"], box=e["box"])
    res = optimize_register(vt, init, opts)
    if not res.feasible:
        raise CapExceededError("no register respecting min_spacing was found")
    files.write_json(out / "register.json", res.register.to_dict())
    files.write_csv(out / "embed_trace.csv", ["evaluation", "best_score"],
                    enumerate(res.trace))
    _emit(f"embed: {h.n_qubits} atoms, score {res.score:.6g}, "
          f"min distance {res.register.min_distance():.3f} um -> {out / 'register.json'}")
    return 0


def cmd_evolve(cfg: dict, seed: int, out: Path, jobs: int) -> int:
    r = load_register(cfg)
    if r is None:
        raise ConfigError("evolve needs a register file")
    pulse = load_pulse(cfg)
    bits = initial_bits(cfg, r.n_atoms)
    psi = evolve(prepare_product_state(bits), r, pulse)
    n = r.n_atoms
    probs = psi.probabilities()
    order = np.argsort(-probs)[: min(16, len(probs))]
    z = [pauli_expectation(PauliString.from_dict(n, {i: "Z"}), psi.amplitudes).real
         for i in range(n)]
    summary = {
        "n_qubits": n, "init_state": bits, "duration_us": pulse.total_duration,
        "norm": float(np.linalg.norm(psi.amplitudes)),
        "z": z, "occupation": [(1 - v) / 2 for v in z],
        "excitation_number": psi.excitation_number(),
        "top_probabilities": {format(int(k), f"0{n}b"): float(probs[k]) for k in order},
        "observables": {},
    }
    for label in cfg["evolve"]["observables"]:
        s = _parse_observable(label, n)
        summary["observables"][label] = float(pauli_expectation(s, psi.amplitudes).real)
    if cfg["hamiltonian"] is not None:
        h, _ = load_target(cfg)
        summary["energy"] = expectation(h, psi)
    files.write_json(out / "state.json", summary)
    _emit(f"evolve: {n} qubits over {pulse.total_duration:.4g} us, "
          f"<n> = {summary['excitation_number']:.6f} -> {out / 'state.json'}")
    return 0


def _parse_observable(label: str, n: int) -> PauliString:
    from .pauli import parse_hamiltonian

    h = parse_hamiltonian(f"qubits: {n}\n1.0 {label}\n")
    return h.terms[0].string


def cmd_derandomize(cfg: dict, seed: int, out: Path, jobs: int) -> int:
    h, _ = load_target(cfg)
    d = cfg["derandomize"]
    obs = observables_from_hamiltonian(h)
    if not obs:
        raise ConfigError("the Hamiltonian has no non-identity terms to measure")
    plan = derandomize(obs, h.n_qubits, d["max_bases"], d["epsilon"])
    plan = allocate_shots(plan, max(d["shots"], plan.n_distinct), obs)
    files.write_json(out / "plan.json", plan.to_dict())
    _emit(f"derandomize: {len(obs)} observables -> {plan.n_distinct} distinct bases, "
          f"{plan.total_shots} shots -> {out / 'plan.json'}")
    logger.info("distinct measurement bases: %d", plan.n_distinct)
    return 0


def cmd_estimate(cfg: dict, seed: int, out: Path, jobs: int) -> int:
    h, _ = load_target(cfg)
    r = load_register(cfg)
    if r is None:
        raise ConfigError("estimate needs a register file")
    if r.n_atoms != h.n_qubits:
        raise ConfigError("register size differs from the Hamiltonian qubit count")
    pulse = load_pulse(cfg) if cfg["pulse"] is not None else PulseSequence(())
    psi = evolve(prepare_product_state(initial_bits(cfg, h.n_qubits)), r, pulse)
    exact = expectation(h, psi)
    if cfg["estimate"]["exact_mode"]:
        result = {"mode": "exact", "energy": exact, "per_term": None, "uncovered": [],
                  "shots": 0}
    else:
        obs = observables_from_hamiltonian(h)
        if cfg["plan"] is not None:
            plan = files.read_plan(cfg["plan"])
        else:
            d = cfg["derandomize"]
            plan = allocate_shots(derandomize(obs, h.n_qubits, d["max_bases"], d["epsilon"]),
                                  d["shots"], obs)
        if plan.bases and plan.bases[0].n_qubits != h.n_qubits:
            raise ConfigError("plan and Hamiltonian qubit counts differ")
        est = estimate_energy(h, measure_plan(psi, plan, seed))
        terms = h.non_identity_terms()
        result = {
            "mode": "derandomized", "energy": est.energy, "shots": plan.total_shots,
            "per_term": [{"term": str(t.string), "coefficient": t.coefficient,
                          "omega": w, "hits": int(nh)}
                         for t, w, nh in zip(terms, est.per_term, est.n_hits)],
            "uncovered": [str(terms[i].string) for i in est.uncovered],
        }
    result["exact_expectation"] = exact
    files.write_json(out / "estimate.json", result)
    _emit(f"estimate: E = {result['energy']:.8f} Ha ({result['mode']}, "
          f"{len(result['uncovered'])} uncovered terms) -> {out / 'estimate.json'}")
    return 0


def _prepare_vqe_inputs(cfg: dict, seed: int, out: Path | None, embed: bool):
    h, _ = load_target(cfg)
    base = vqe_config(cfg, seed)
    r = load_register(cfg)
    if base.ansatz == "UccXY":
        if r is None:
            d = cfg["physics"]["xy_distance"]
            model = InteractionModel("XY", cfg["physics"]["c6"], cfg["physics"]["c3"])
            r = Register(np.array([[0.0, 0.0], [d, 0.0]]), model, cfg["physics"]["min_spacing"])
    elif r is None or embed:
        e = cfg["embed"]
        opts = EmbeddingOptions(max_evals=e["max_evals"], n_starts=e["n_starts"], seed=seed,
                                target_scale=e["target_scale"], box=e["box"])
        res = optimize_register(target_matrix(h, h.n_qubits),
                                r or grid_register(h.n_qubits, cfg), opts)
        if not res.feasible:
            raise CapExceededError("no register respecting min_spacing was found")
        r = res.register
        if out is not None:
            files.write_json(out / "register.json", r.to_dict())
    if r.n_atoms != h.n_qubits:
        raise ConfigError("register size differs from the Hamiltonian qubit count")
    return h, r, base


def _check_budget(h: PauliHamiltonian, cfg: VqeConfig) -> None:
    mode = None
    if not cfg.exact_mode and cfg.ansatz in ("AlternatingAB", "PhaseSegments"):
        mode = "per_term"
    ev = EnergyEvaluator(h, cfg, mode)
    if ev.max_evaluations() < 1:
        raise BudgetError(f"shot budget {cfg.shot_budget_total} is below the cost of one "
                          f"energy evaluation ({ev.cost} shots)")


def _run_one(args) -> dict:
    h, r, cfg, init_state, layers = args
    t0 = time.perf_counter()
    if cfg.ansatz == "UccXY":
        trace = run_ucc_xy(h, r, cfg)
    elif cfg.ansatz == "AlternatingAB":
        trace = run_alternating(h, r, layers, cfg, init_state)
    elif cfg.ansatz == "PhaseSegments":
        trace = run_phase_ansatz(h, r, layers, cfg, init_state)
    else:
        trace = run_iterative_pulse(h, r, cfg, init_state)
    return {"seed": cfg.seed, "trace": trace, "wall": time.perf_counter() - t0}


def _map(fn, items, jobs: int):
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _exact_energy(h: PauliHamiltonian) -> float | None:
    if h.n_qubits > MATRIX_QUBIT_CAP:
        return None
    return ground_energy_exact(h)


def _trace_records(trace: VqeTrace):
    for rec in trace.records:
        yield {"iteration": rec.iteration, "params": rec.parameters,
               "energy_est": rec.energy_estimate, "cumulative_shots": rec.cumulative_shots,
               "wall_time": rec.wall_time, "exact_energy": rec.exact_energy}


def cmd_vqe(cfg: dict, seed: int, out: Path, jobs: int, embed: bool = False) -> int:
    h, r, base = _prepare_vqe_inputs(cfg, seed, out, embed)
    _check_budget(h, base)
    e_exact = _exact_energy(h)
    runs = cfg["runs"]
    init_state = initial_bits(cfg, h.n_qubits) if cfg["init_state"] else None
    if runs["warm_start"] and base.ansatz == "IterativeSplit":
        scan_cfg = VqeConfig.from_dict({**base.to_dict(), "exact_mode": runs["scan_exact"],
                                        "evals_per_iteration": runs["scan_evals"],
                                        "n_repeats": runs["scan_repeats"]})
        ranked = scan_product_states(h, r, scan_cfg, e_exact)
        init_state = ranked[0][0]
        files.write_csv(out / "scan.csv", ["rank", "bitstring", "post_step_error"],
                        ((k, b, e) for k, (b, e) in enumerate(ranked)))
        _emit(f"vqe: warm start from |{init_state}> (post-step error {ranked[0][1]:.4g})")
    tasks = [(h, r, VqeConfig.from_dict({**base.to_dict(), "seed": s}), init_state,
              runs["layers"]) for s in _seeds(cfg, seed)]
    results = _map(_run_one, tasks, jobs)

    summary, plot = [], []
    for res in results:
        s, trace = res["seed"], res["trace"]
        files.write_jsonl(out / f"trace_seed{s}.jsonl", _trace_records(trace))
        incumbent = trace.incumbent_exact_energies()
        best_exact = float(incumbent[-1]) if len(incumbent) else math.nan
        err = relative_error(e_exact, trace.best_energy) if e_exact else math.nan
        err_inc = relative_error(e_exact, best_exact) if e_exact else math.nan
        shots_5 = trace.shots_to_error(e_exact) if e_exact else math.nan
        summary.append([s, base.ansatz, trace.meta.get("init_state", init_state or ""),
                        trace.best_energy, best_exact, e_exact, err, err_inc, trace.total_shots,
                        len(trace.records), shots_5, round(res["wall"], 3)])
        for rec, inc in zip(trace.records, incumbent):
            plot.append([s, rec.cumulative_shots, rec.energy_estimate,
                         relative_error(e_exact, inc) if e_exact else math.nan])
        _emit(f"vqe: seed {s} best estimate {trace.best_energy:.6f} Ha, error {err:.4g}, "
              f"{trace.total_shots} shots, {len(trace.records)} evaluations")
    files.write_csv(out / "summary.csv",
                    ["seed", "ansatz", "init_state", "best_energy_est", "incumbent_exact_energy",
                     "exact_ground_energy", "rel_error_est", "rel_error_incumbent", "shots",
                     "evaluations", "shots_to_5pct", "wall_s"], summary)
    files.write_csv(out / "plot.csv", ["seed", "cumulative_shots", "energy_est",
                                       "rel_error_incumbent"], plot)
    return 0


def cmd_scan_init(cfg: dict, seed: int, out: Path, jobs: int, embed: bool = False) -> int:
    h, r, base = _prepare_vqe_inputs(cfg, seed, out, embed)
    runs = cfg["runs"]
    scan_cfg = VqeConfig.from_dict({**base.to_dict(), "exact_mode": runs["scan_exact"],
                                    "evals_per_iteration": runs["scan_evals"],
                                    "n_repeats": runs["scan_repeats"]})
    if not scan_cfg.exact_mode:
        _check_budget(h, scan_cfg)
    ranked = scan_product_states(h, r, scan_cfg, _exact_energy(h))
    files.write_csv(out / "scan.csv", ["rank", "bitstring", "post_step_error"],
                    ((k, b, e) for k, (b, e) in enumerate(ranked)))
    zeros = dict(ranked)["0" * h.n_qubits]
    _emit(f"scan-init: best |{ranked[0][0]}> error {ranked[0][1]:.4g}; "
          f"all-zeros error {zeros:.4g} -> {out / 'scan.csv'}")
    return 0


COMMANDS = {
    "embed": cmd_embed,
    "evolve": cmd_evolve,
    "derandomize": cmd_derandomize,
    "estimate": cmd_estimate,
    "vqe": cmd_vqe,
    "scan-init": cmd_scan_init,
}


# --------------------------------------------------------------------------
# argument handling


def build_parser() -> argparse.ArgumentParser:
    def global_flags(suppress: bool) -> argparse.ArgumentParser:
        # the subcommand copy must not overwrite values given before the subcommand
        d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
        g = argparse.ArgumentParser(add_help=False)
        g.add_argument("--config", default=d(None),
                       help="JSON run configuration (or a previous header.json)")
        g.add_argument("--seed", type=int, default=d(None), help="master seed (default 0)")
        g.add_argument("--jobs", type=int, default=d(1), help="parallel worker processes")
        g.add_argument("--out", default=d("out"), help="output directory (default ./out)")
        g.add_argument("-v", "--verbose", action="store_true", default=d(False))
        return g

    common = global_flags(suppress=True)
    p = argparse.ArgumentParser(prog="rydvqe", parents=[global_flags(suppress=False)],
                                description="Digital-analog VQE simulator for Rydberg atom arrays.")
    p.add_argument("--version", action="version", version=f"rydvqe {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, help_, *opts):
        sp = sub.add_parser(name, help=help_, parents=[common])
        for o in opts:
            {
                "ham": lambda: sp.add_argument("--hamiltonian", help="fixture name or Hamiltonian file"),
                "reg": lambda: sp.add_argument("--register", help="register JSON file"),
                "pulse": lambda: sp.add_argument("--pulse", help="pulse JSON file"),
                "plan": lambda: sp.add_argument("--plan", help="measurement plan JSON file"),
                "bits": lambda: sp.add_argument("--init-state", help="initial bitstring, qubit 0 rightmost"),
                "embed": lambda: sp.add_argument("--embed", action="store_true",
                                                 help="optimize the register before running"),
            }[o]()
        return sp

    add("embed", "optimize atom positions against the Hamiltonian's two-Z terms", "ham", "reg")
    add("evolve", "evolve a product state under a pulse", "ham", "reg", "pulse", "bits")
    sp = add("derandomize", "build a derandomized measurement plan", "ham")
    sp.add_argument("--shots", type=int, help="shots per energy evaluation")
    sp = add("estimate", "estimate the energy of a pulse-prepared state",
             "ham", "reg", "pulse", "plan", "bits")
    sp.add_argument("--exact", action="store_true", help="bypass sampling")
    sp = add("vqe", "run a variational loop", "ham", "reg", "bits", "embed")
    sp.add_argument("--ansatz", choices=["UccXY", "AlternatingAB", "PhaseSegments", "IterativeSplit"])
    sp.add_argument("--budget", type=int, help="total shot budget")
    sp.add_argument("--seeds", type=int, help="number of independent seeds")
    sp.add_argument("--exact", action="store_true", help="bypass sampling")
    sp.add_argument("--warm-start", action="store_true", help="start from the best-ranked product state")
    add("scan-init", "rank product initial states by post-step error", "ham", "reg", "embed")
    return p


def _apply_overrides(cfg: dict, ns: argparse.Namespace) -> dict:
    cfg = copy.deepcopy(cfg)
    if ns.seed is not None:
        cfg["seed"] = ns.seed
    for key in ("hamiltonian", "register", "pulse", "plan"):
        if getattr(ns, key, None) is not None:
            cfg[key] = getattr(ns, key)
    if getattr(ns, "init_state", None) is not None:
        cfg["init_state"] = ns.init_state
    if getattr(ns, "shots", None) is not None:
        cfg["derandomize"]["shots"] = ns.shots
    if getattr(ns, "exact", False):
        cfg["estimate"]["exact_mode"] = True
        cfg["vqe"]["exact_mode"] = True
    if getattr(ns, "ansatz", None):
        cfg["vqe"]["ansatz"] = ns.ansatz
        if ns.ansatz == "UccXY":
            cfg["vqe"].setdefault("optimizer", "DifferentialEvolution")
    if getattr(ns, "budget", None) is not None:
        cfg["vqe"]["shot_budget_total"] = ns.budget
    if getattr(ns, "seeds", None) is not None:
        cfg["runs"]["n_seeds"] = ns.seeds
    if getattr(ns, "warm_start", False):
        cfg["runs"]["warm_start"] = True
    validate_config(cfg)
    return cfg


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    ns = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _apply_overrides(load_config(ns.config), ns)
        seed = int(cfg["seed"])
        out = Path(ns.out)
        write_header(out, ns.command, cfg, _seeds(cfg, seed) if ns.command == "vqe" else [seed], argv)
        fn = COMMANDS[ns.command]
        kwargs = {"embed": ns.embed} if ns.command in ("vqe", "scan-init") else {}
        return fn(cfg, seed, out, max(1, ns.jobs), **kwargs)
    except (HamiltonianParseError, ConfigError, FixtureChecksumError, json.JSONDecodeError,
            FileNotFoundError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except BudgetError as exc:
        print(f"budget error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (OptimizationError, DynamicsError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (CapExceededError, ValueError) as exc:
        print(f"constraint violated: {exc}", file=sys.stderr)
        return EXIT_CONSTRAINT


if __name__ == "__main__":
    sys.exit(main())
