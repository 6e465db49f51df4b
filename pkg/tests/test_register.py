import logging
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rydvqe.fixtures import load_fixture
from rydvqe.pauli import parse_hamiltonian
from rydvqe.register import (
    EmbeddingOptions,
    InteractionModel,
    Register,
    embedding_score,
    interaction_matrix,
    optimize_register,
    target_matrix,
)

C6 = 5420503.0

# LiH target against the documented 2x3 grid heuristic (10 um pitch);
# recorded from the first evaluation
LIH_GRID_SCORE = 414.4530064406357


def grid(n, pitch=10.0, cols=3):
    return np.array([(pitch * (k % cols), pitch * (k // cols)) for k in range(n)])


def test_interaction_examples():
    r = Register(np.array([[0.0, 0.0], [6.0, 0.0]]))
    v = interaction_matrix(r)
    assert v[0, 1] == pytest.approx(C6 / 6**6)
    assert v[0, 1] == pytest.approx(116.18, abs=0.01)
    assert np.array_equal(interaction_matrix(Register(np.zeros((1, 2)))), np.zeros((1, 1)))
    d = 7.0
    tri = Register(np.array([[0, 0], [d, 0], [d / 2, d * math.sqrt(3) / 2]]))
    off = interaction_matrix(tri)[~np.eye(3, dtype=bool)]
    np.testing.assert_allclose(off, off[0], rtol=1e-12)


def test_xy_interaction_power():
    r = Register(np.array([[0.0, 0.0], [10.0, 0.0]]), InteractionModel("XY"))
    assert interaction_matrix(r)[1, 0] == pytest.approx(3700.0 / 1000)


@given(st.integers(2, 6), st.floats(0, 2 * math.pi), st.floats(-50, 50), st.floats(-50, 50),
       st.integers(0, 10_000))
def test_interaction_is_rigid_motion_invariant(n, theta, dx, dy, seed):
    rng = np.random.default_rng(seed)
    pos = grid(n, 8.0) + rng.uniform(-1, 1, size=(n, 2))
    rot = np.array([[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]])
    moved = pos @ rot.T + [dx, dy]
    for kind in ("Ising", "XY"):
        a = interaction_matrix(Register(pos, InteractionModel(kind)))
        b = interaction_matrix(Register(moved, InteractionModel(kind)))
        np.testing.assert_allclose(a, b, rtol=1e-9, atol=1e-12)
        assert np.array_equal(a, a.T) and not np.any(np.diag(a))


def test_register_validation_and_roundtrip():
    with pytest.raises(ValueError, match="min_spacing"):
        Register(np.array([[0, 0], [3.0, 0]]))
    with pytest.raises(ValueError):
        Register(np.array([[0, np.nan]]))
    with pytest.raises(ValueError):
        InteractionModel("Heisenberg")
    with pytest.raises(ValueError):
        InteractionModel("Ising", c6=-1.0)
    r = Register(grid(4), InteractionModel("XY", c3=1234.0), min_spacing=5.0)
    again = Register.from_dict(r.to_dict())
    assert np.array_equal(again.positions, r.positions)
    assert again.model == r.model and again.min_spacing == 5.0
    with pytest.raises(ValueError):
        Register.from_dict({**r.to_dict(), "spin": 1})


def test_target_matrix_examples(caplog):
    lih = target_matrix(load_fixture("lih"), 6)
    assert lih[0, 1] == 0.0  # -0.31773 Z0 Z1 is negative and excluded
    beh2 = target_matrix(load_fixture("beh2"), 6)
    assert beh2[0, 2] == pytest.approx(0.18326)
    for vt in (lih, beh2):
        assert np.array_equal(vt, vt.T) and np.all(vt >= 0) and not np.any(np.diag(vt))
    with caplog.at_level(logging.WARNING):
        z = target_matrix(parse_hamiltonian("qubits: 2\n1.0 X0 X1\n0.3 X0"), 2)
    assert not z.any()
    assert "zero" in caplog.text
    with pytest.raises(ValueError):
        target_matrix(load_fixture("lih"), 5)


def test_target_matrix_ignores_mixed_strings():
    h = parse_hamiltonian("qubits: 3\n0.4 Z0 Z2\n0.9 Z0 Z1 Z2\n0.7 Z1 X2\n-0.2 Z1 Z2")
    vt = target_matrix(h, 3)
    expected = np.zeros((3, 3))
    expected[0, 2] = expected[2, 0] = 0.4
    np.testing.assert_array_equal(vt, expected)


def test_embedding_score_examples():
    v = np.array([[0, 1.0], [1.0, 0]])
    assert embedding_score(v, v) == 0.0
    assert embedding_score(v, np.zeros((2, 2))) == 2.0
    a = np.random.default_rng(0).random((4, 4))
    a = a + a.T
    b = np.random.default_rng(1).random((4, 4))
    b = b + b.T
    assert embedding_score(a, b) == pytest.approx(embedding_score(b, a))
    with pytest.raises(ValueError):
        embedding_score(v, np.zeros((3, 3)))


def test_lih_grid_score_golden():
    vt = target_matrix(load_fixture("lih"), 6)
    assert embedding_score(vt, interaction_matrix(Register(grid(6)))) == pytest.approx(
        LIH_GRID_SCORE, rel=1e-12)


def test_two_atom_recovery():
    truth = Register(np.array([[0.0, 0.0], [9.0, 0.0]]))
    vt = interaction_matrix(truth)
    init = Register(np.array([[0.1, 0.0], [9.0, 0.1]]))
    res = optimize_register(vt, init, EmbeddingOptions(max_evals=800, n_starts=1))
    assert res.score < 1e-6 and res.feasible
    assert res.register.min_distance() == pytest.approx(9.0, abs=1e-3)


def test_optimize_register_contract():
    vt = target_matrix(load_fixture("beh2"), 6)
    init = Register(grid(6))
    init_score = embedding_score(vt, interaction_matrix(init))
    res = optimize_register(vt, init, EmbeddingOptions(max_evals=600, n_starts=3, seed=5))
    assert res.score <= init_score
    assert res.register.min_distance() >= init.min_spacing - 1e-9
    assert np.all(np.diff(res.trace) <= 0)
    assert res.score == pytest.approx(embedding_score(vt, interaction_matrix(res.register)))


def test_zero_target_pushes_atoms_apart():
    init = Register(grid(3, 5.0))
    res = optimize_register(np.zeros((3, 3)), init, EmbeddingOptions(max_evals=1500, n_starts=2))
    v = interaction_matrix(res.register)
    assert v.max() < 1e-3
    assert res.score < embedding_score(np.zeros((3, 3)), interaction_matrix(init))


def test_lih_multistart_beats_median_random_start():
    vt = target_matrix(load_fixture("lih"), 6)
    rng = np.random.default_rng(11)
    initial = []
    while len(initial) < 20:
        pos = rng.uniform(-15, 15, size=(6, 2))
        try:
            initial.append(embedding_score(vt, interaction_matrix(Register(pos))))
        except ValueError:
            continue
    res = optimize_register(vt, Register(grid(6)), EmbeddingOptions(max_evals=400, n_starts=20))
    assert res.score < np.median(initial)


def test_embedding_options_validation():
    with pytest.raises(ValueError):
        optimize_register(np.zeros((2, 2)), Register(grid(2)), EmbeddingOptions(max_evals=0))
    with pytest.raises(ValueError):
        optimize_register(np.zeros((3, 3)), Register(grid(2)))
