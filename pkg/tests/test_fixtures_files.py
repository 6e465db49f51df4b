import json
import os
import shutil

import numpy as np
import pytest

from rydvqe import files
from rydvqe import fixtures
from rydvqe.dynamics import DriveSegment, PulseSequence
from rydvqe.fixtures import (
    FixtureChecksumError,
    build_manifest,
    fixture_checksum,
    load_fixture,
    manifest,
)
from rydvqe.measurement import DerandomizedPlan
from rydvqe.pauli import PauliString, ground_energy_exact, ground_state_exact
from rydvqe.register import InteractionModel, Register


def test_manifest_matches_files():
    on_disk = {e.name: e for e in build_manifest()}
    assert manifest() == on_disk


def test_manifest_records_source_facts():
    m = manifest()
    assert (m["lih"].terms, m["lih"].stated_terms, m["lih"].distance_angstrom) == (118, 118, 1.5)
    assert (m["beh2"].terms, m["beh2"].stated_terms, m["beh2"].distance_angstrom) == (165, 165, 1.17)
    for name in ("h2_eff_2q", "h2_eff_2q_stretched", "h2_jw_4q", "h2_jw_4q_flipped"):
        assert m[name].source == "synthetic (ours)"
    assert m["h2_jw_4q"].qubits == 4 and m["h2_eff_2q"].qubits == 2


def test_unknown_fixture():
    with pytest.raises(KeyError):
        load_fixture("h2o")


def test_checksum_mismatch_is_detected(tmp_path, monkeypatch):
    data = tmp_path / "data"
    shutil.copytree(fixtures.data_dir(), data)
    monkeypatch.setattr(fixtures, "data_dir", lambda: data)
    assert load_fixture("lih").n_qubits == 6
    text = (data / "lih.txt").read_text()
    (data / "lih.txt").write_text(text.replace("-0.31773", "-0.31774"))
    with pytest.raises(FixtureChecksumError):
        load_fixture("lih")
    assert load_fixture("lih", verify=False).n_qubits == 6
    assert fixture_checksum(data / "lih.txt") != manifest()["beh2"].sha256


def test_flipped_fixture_is_a_relabeling():
    a, b = load_fixture("h2_jw_4q"), load_fixture("h2_jw_4q_flipped")
    assert ground_energy_exact(a) == pytest.approx(ground_energy_exact(b), abs=1e-12)
    _, psi = ground_state_exact(b)
    assert abs(psi[0b1111]) ** 2 > 0.95
    _, psi_a = ground_state_exact(a)
    # X2 X3 maps |q3 q2 q1 q0> to |~q3 ~q2 q1 q0>
    perm = np.array([k ^ 0b1100 for k in range(16)])
    assert abs(np.vdot(psi_a[perm], psi)) == pytest.approx(1.0, abs=1e-10)


# ---------------------------------------------------------------- files


def test_atomic_write_replaces_and_leaves_no_temp(tmp_path):
    p = tmp_path / "sub" / "x.json"
    files.write_json(p, {"a": np.float64(1.5), "b": np.arange(3)})
    files.write_json(p, {"a": 2})
    assert json.loads(p.read_text()) == {"a": 2}
    assert os.listdir(p.parent) == ["x.json"]


def test_interrupted_write_keeps_old_file(tmp_path, monkeypatch):
    p = tmp_path / "x.txt"
    files.atomic_write_text(p, "old")

    def crash(src, dst):
        raise KeyboardInterrupt

    with monkeypatch.context() as m:
        m.setattr(files.os, "replace", crash)
        with pytest.raises(KeyboardInterrupt):
            files.atomic_write_text(p, "new")
    assert p.read_text() == "old"
    assert os.listdir(tmp_path) == ["x.txt"]

    class Boom:
        def __str__(self):
            raise RuntimeError

    with pytest.raises(TypeError):
        files.write_json(p, {"bad": Boom()})
    assert p.read_text() == "old"
    assert os.listdir(tmp_path) == ["x.txt"]


def test_jsonl_and_csv(tmp_path):
    files.write_jsonl(tmp_path / "t.jsonl", [{"k": 1}, {"k": np.int64(2)}])
    lines = (tmp_path / "t.jsonl").read_text().splitlines()
    assert [json.loads(x)["k"] for x in lines] == [1, 2]
    files.write_csv(tmp_path / "t.csv", ["a", "b"], [(1, "x"), (2, "y")])
    assert (tmp_path / "t.csv").read_text() == "a,b\n1,x\n2,y\n"


def test_readers_roundtrip(tmp_path):
    r = Register(np.array([[0.0, 0.0], [7.0, 1.0]]), InteractionModel("XY"))
    files.write_json(tmp_path / "r.json", r.to_dict())
    assert np.array_equal(files.read_register(tmp_path / "r.json").positions, r.positions)
    pulse = PulseSequence((DriveSegment(0.3, 1.0, -2.0, 0.5, "HalfZ"),))
    files.write_json(tmp_path / "p.json", pulse.to_dict())
    assert files.read_pulse(tmp_path / "p.json").to_dict() == pulse.to_dict()
    plan = DerandomizedPlan((PauliString.from_label("XZ"),), (5,), 0.9)
    files.write_json(tmp_path / "plan.json", plan.to_dict())
    assert files.read_plan(tmp_path / "plan.json") == plan
