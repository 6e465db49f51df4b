"""Bundled Hamiltonian fixtures and their checksum manifest."""
from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass
from importlib import resources
from pathlib import Path

from .pauli import PauliHamiltonian, load_hamiltonian

MANIFEST_NAME = "manifest.json"


class FixtureChecksumError(RuntimeError):
    pass


@dataclass(frozen=True)
class FixtureEntry:
    name: str
    file: str
    source: str
    qubits: int
    terms: int
    sha256: str
    distance_angstrom: float | None = None
    stated_terms: int | None = None
    note: str = ""


# source, bond length, stated term count, note
_CATALOG = {
    "lih": ("appendix listing, LiH", 1.5, 118, "Bravyi-Kitaev encoded, 6 qubits"),
    "beh2": ("appendix listing, BeH2", 1.17, 165, "Bravyi-Kitaev encoded, 6 qubits"),
    "h2_eff_2q": ("synthetic (ours)", None, None,
                  "two-qubit reduced form; ground state lies in the |01>,|10> block"),
    "h2_eff_2q_stretched": ("synthetic (ours)", None, None,
                            "two-qubit reduced form with strong exchange"),
    "h2_jw_4q": ("synthetic (ours)", 0.74, None,
                 "four-qubit Jordan-Wigner form, 14 measured strings"),
    "h2_jw_4q_flipped": ("synthetic (ours)", 0.74, None,
                         "h2_jw_4q conjugated by X2 X3, same spectrum"),
}


def data_dir() -> Path:
    return Path(str(resources.files("rydvqe") / "data"))


def sha256_of(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def build_manifest(directory: Path | None = None) -> list[FixtureEntry]:
    """Scan fixture files, count terms and hash them."""
    directory = Path(directory or data_dir())
    entries = []
    for name, (source, dist, stated, note) in _CATALOG.items():
        path = directory / f"{name}.txt"
        h = load_hamiltonian(path)
        entries.append(FixtureEntry(name, path.name, source, h.n_qubits, len(h.terms),
                                    sha256_of(path), dist, stated, note))
    return entries


def write_manifest(directory: Path | None = None) -> Path:
    directory = Path(directory or data_dir())
    entries = [asdict(e) for e in build_manifest(directory)]
    out = directory / MANIFEST_NAME
    out.write_text(json.dumps({"fixtures": entries}, indent=2) + "\n")
    return out


def manifest() -> dict[str, FixtureEntry]:
    raw = json.loads((data_dir() / MANIFEST_NAME).read_text())
    return {e["name"]: FixtureEntry(**e) for e in raw["fixtures"]}


def fixture_path(name: str) -> Path:
    entries = manifest()
    if name not in entries:
        raise KeyError(f"unknown fixture {name!r}; available: {sorted(entries)}")
    return data_dir() / entries[name].file


def load_fixture(name: str, verify: bool = True) -> PauliHamiltonian:
    """Load a bundled Hamiltonian, checking its hash against the manifest."""
    entry = manifest().get(name)
    if entry is None:
        raise KeyError(f"unknown fixture {name!r}; available: {sorted(manifest())}")
    path = data_dir() / entry.file
    if verify:
        digest = sha256_of(path)
        if digest != entry.sha256:
            raise FixtureChecksumError(f"{entry.file}: sha256 {digest} does not match manifest")
    h = load_hamiltonian(path)
    if verify and len(h.terms) != entry.terms:
        raise FixtureChecksumError(f"{entry.file}: {len(h.terms)} terms, manifest says {entry.terms}")
    return h


def fixture_checksum(name_or_path) -> str:
    p = Path(name_or_path)
    if not p.exists():
        p = fixture_path(str(name_or_path))
    return sha256_of(p)
