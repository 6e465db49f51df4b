import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from rydvqe.fixtures import load_fixture
from rydvqe.pauli import (
    CapExceededError,
    FermionHamiltonian,
    HamiltonianParseError,
    PauliHamiltonian,
    PauliString,
    expectation,
    format_hamiltonian,
    ground_energy_exact,
    ground_state_exact,
    hits,
    jordan_wigner,
    multiply,
    parse_hamiltonian,
    to_matrix,
)

# frozen once from dense diagonalization of the bundled fixtures
LIH_E0 = -1.0990605620178142
BEH2_E0 = -4.171260296227622


def ps(n, **kw):
    return PauliString.from_dict(n, {int(k[1:]): v for k, v in kw.items()})


def as_terms(h):
    return [(t.coefficient, t.string.letters) for t in h.terms]


# ---------------------------------------------------------------- strategies

letters = st.sampled_from("IXYZ")


@st.composite
def pauli_strings(draw, n=None):
    n = n or draw(st.integers(1, 4))
    return PauliString(n, tuple(enumerate(draw(st.lists(letters, min_size=n, max_size=n)))))


@st.composite
def hamiltonians(draw, max_qubits=4):
    n = draw(st.integers(1, max_qubits))
    k = draw(st.integers(1, 8))
    pairs = []
    for _ in range(k):
        c = draw(st.floats(-2, 2, allow_nan=False))
        pairs.append((c, draw(pauli_strings(n))))
    return PauliHamiltonian.from_terms(n, pairs)


# ---------------------------------------------------------------- parsing


def test_parse_lih_head():
    h = parse_hamiltonian("qubits: 6\n-0.19975 I\n0.05393 Z0")
    assert h.n_qubits == 6
    assert h.identity_coefficient == pytest.approx(-0.19975)
    assert h.coefficient(ps(6, q0="Z")) == pytest.approx(0.05393)


def test_parse_merges_duplicates():
    h = parse_hamiltonian("qubits: 2\n0.5 Z0\n0.5 Z0")
    assert as_terms(h) == [(1.0, {0: "Z"})]


def test_parse_drops_cancelled_terms():
    h = parse_hamiltonian("qubits: 2\n0.5 Z0\n-0.5 Z0\n1 X1")
    assert as_terms(h) == [(1.0, {1: "X"})]


def test_identity_only_ground_energy():
    h = parse_hamiltonian("qubits: 6\n-1.90305 I")
    assert ground_energy_exact(h) == pytest.approx(-1.90305)


def test_parse_comments_and_blank_lines():
    h = parse_hamiltonian("# note\n\nqubits: 3\n# more\n0.25 Z0 X2\n")
    assert as_terms(h) == [(0.25, {0: "Z", 2: "X"})]


@pytest.mark.parametrize("text,line,col", [
    ("0.1 Z0\n", 1, 1),                      # missing header
    ("qubits: 2\n0.1 Z2\n", 2, 5),           # index out of range
    ("qubits: 2\n0.1 Z0 X0\n", 2, 8),        # duplicate index
    ("qubits: 2\nabc Z0\n", 2, 1),           # bad coefficient
    ("qubits: 2\n0.1 Q0\n", 2, 5),           # bad token
    ("qubits: 2\n0.1\n", 2, 4),              # missing term
    ("qubits: x\n", 1, 9),                   # bad count
])
def test_parse_errors_report_position(text, line, col):
    with pytest.raises(HamiltonianParseError) as info:
        parse_hamiltonian(text)
    assert (info.value.line, info.value.column) == (line, col)


def test_empty_text_is_an_error():
    with pytest.raises(HamiltonianParseError):
        parse_hamiltonian("")


@given(hamiltonians())
def test_parse_roundtrip(h):
    again = parse_hamiltonian(format_hamiltonian(h, comment="roundtrip"))
    assert again.n_qubits == h.n_qubits
    assert again.term_set() == h.term_set()


def test_terms_are_canonical():
    s = PauliString(3, ((2, "X"), (0, "I"), (1, "Z")))
    assert s.ops == ((1, "Z"), (2, "X"))
    with pytest.raises(ValueError):
        PauliString(2, ((2, "X"),))
    with pytest.raises(ValueError):
        PauliHamiltonian.from_terms(2, [(1j, ps(2, q0="X"))])


# ---------------------------------------------------------------- algebra


def test_multiply_examples():
    assert multiply(ps(1, q0="X"), ps(1, q0="Y")) == (1j, ps(1, q0="Z"))
    assert multiply(ps(1, q0="Z"), ps(1, q0="Z")) == (1, PauliString.identity(1))
    assert multiply(ps(2, q0="X", q1="Z"), ps(2, q0="Y", q1="Z")) == (1j, ps(2, q0="Z"))
    with pytest.raises(ValueError):
        multiply(ps(1, q0="X"), ps(2, q0="X"))


@given(st.integers(1, 3).flatmap(lambda n: st.tuples(*[pauli_strings(n)] * 3)))
def test_multiply_matches_kronecker_and_is_associative(triple):
    a, b, c = triple
    mats = [oracles.kron_pauli(s.label()) for s in triple]
    ph, ab = multiply(a, b)
    np.testing.assert_allclose(ph * oracles.kron_pauli(ab.label()), mats[0] @ mats[1], atol=1e-12)
    ph1, abc1 = multiply(ab, c)
    ph2, bc = multiply(b, c)
    ph3, abc2 = multiply(a, bc)
    assert abc1 == abc2
    assert ph * ph1 == pytest.approx(ph2 * ph3)


def test_hits_examples():
    m = PauliString.from_label("ZXZ")
    assert hits(m, PauliString.from_label("IXI"))
    assert hits(m, PauliString.from_label("ZII"))
    assert not hits(m, PauliString.from_label("XII"))
    with pytest.raises(ValueError):
        hits(PauliString.from_label("ZIZ"), PauliString.from_label("ZII"))


@given(st.integers(1, 4).flatmap(
    lambda n: st.tuples(st.lists(st.sampled_from("XYZ"), min_size=n, max_size=n),
                        st.lists(letters, min_size=n, max_size=n),
                        st.lists(st.booleans(), min_size=n, max_size=n))))
def test_hits_is_monotone_under_support_shrinking(data):
    m_letters, o_letters, keep = data
    m = PauliString.from_label("".join(m_letters))
    o = PauliString.from_label("".join(o_letters))
    sub = PauliString.from_label("".join(c if k else "I" for c, k in zip(o_letters, keep)))
    if hits(m, o):
        assert hits(m, sub)


# ---------------------------------------------------------------- matrices


def test_to_matrix_examples():
    np.testing.assert_allclose(to_matrix(parse_hamiltonian("qubits: 1\n1 Z0")), np.diag([1, -1]))
    m = to_matrix(parse_hamiltonian("qubits: 2\n1 X0"))
    # X on qubit 0 couples |b1 b0> with b0 flipped: 0<->1, 2<->3
    expected = np.zeros((4, 4))
    for a, b in [(0, 1), (1, 0), (2, 3), (3, 2)]:
        expected[a, b] = 1
    np.testing.assert_allclose(m, expected)


def test_lih_matrix_matches_kronecker_oracle():
    h = load_fixture("lih")
    m = to_matrix(h)
    ref = oracles.kron_hamiltonian(as_terms(h), 6)
    assert np.linalg.norm(m - ref) < 1e-10
    assert np.linalg.norm(m - m.conj().T) < 1e-12


@given(hamiltonians(max_qubits=5))
def test_to_matrix_matches_kronecker(h):
    ref = oracles.kron_hamiltonian(as_terms(h), h.n_qubits)
    assert np.linalg.norm(to_matrix(h) - ref) < 1e-10


def test_matrix_cap():
    h = PauliHamiltonian.from_terms(15, [(1.0, ps(15, q0="Z"))])
    with pytest.raises(CapExceededError):
        to_matrix(h)
    assert to_matrix(PauliHamiltonian.from_terms(3, [(1.0, ps(3, q0="X"))]), max_qubits=3).shape == (8, 8)


def test_ground_energy_examples():
    assert ground_energy_exact(parse_hamiltonian("qubits: 1\n1.0 Z0")) == -1.0
    assert ground_energy_exact(parse_hamiltonian("qubits: 2\n0.7 I")) == pytest.approx(0.7)


def test_golden_fixture_energies():
    lih, beh2 = load_fixture("lih"), load_fixture("beh2")
    assert ground_energy_exact(lih) == pytest.approx(LIH_E0, rel=1e-9)
    assert ground_energy_exact(beh2) == pytest.approx(BEH2_E0, rel=1e-9)
    # independent dense solve on the Kronecker realization
    ref = np.linalg.eigvalsh(oracles.kron_hamiltonian(as_terms(lih), 6))[0]
    assert ref == pytest.approx(LIH_E0, rel=1e-9)


# ---------------------------------------------------------------- expectation


def test_expectation_examples():
    h = parse_hamiltonian("qubits: 3\n0.3 Z0\n-0.2 Z1 Z2\n0.4 I")
    zero = np.zeros(8, complex)
    zero[0] = 1
    assert expectation(h, zero) == pytest.approx(0.5)
    plus = np.array([1, 1], complex) / np.sqrt(2)
    assert expectation(parse_hamiltonian("qubits: 1\n1.0 X0"), plus) == pytest.approx(1.0)


def test_expectation_on_beh2_ground_state():
    h = load_fixture("beh2")
    e, v = ground_state_exact(h)
    assert expectation(h, v) == pytest.approx(BEH2_E0, abs=1e-8)


def test_expectation_errors():
    h = parse_hamiltonian("qubits: 2\n1 Z0")
    with pytest.raises(ValueError):
        expectation(h, np.ones(2) / np.sqrt(2))
    with pytest.raises(ValueError):
        expectation(h, np.ones(4))


def _random_state(rng, n):
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return v / np.linalg.norm(v)


@pytest.mark.parametrize("seed", range(12))
def test_expectation_matches_matrix_up_to_8_qubits(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 9))
    pairs = [(rng.normal(), PauliString(n, tuple(enumerate(rng.choice(list("IXYZ"), n)))))
             for _ in range(10)]
    h = PauliHamiltonian.from_terms(n, pairs)
    psi = _random_state(rng, n)
    ref = np.vdot(psi, oracles.kron_hamiltonian(as_terms(h), n) @ psi).real
    assert expectation(h, psi) == pytest.approx(ref, abs=1e-9)


# ---------------------------------------------------------------- Jordan-Wigner


def test_jw_number_operator():
    h = jordan_wigner(FermionHamiltonian(1, np.array([[1.0]]), np.zeros((1, 1, 1, 1))))
    assert h.term_set() == {PauliString.identity(1): 0.5, ps(1, q0="Z"): -0.5}


def test_jw_hopping():
    h1 = np.array([[0, 1.0], [1.0, 0]])
    h = jordan_wigner(FermionHamiltonian(2, h1, np.zeros((2,) * 4)))
    assert h.term_set() == pytest.approx({ps(2, q0="X", q1="X"): 0.5, ps(2, q0="Y", q1="Y"): 0.5})


def test_jw_two_body_density_term():
    h2 = np.zeros((2,) * 4)
    h2[0, 1, 1, 0] = 2.0
    h = jordan_wigner(FermionHamiltonian(2, np.zeros((2, 2)), h2))
    assert np.linalg.norm(to_matrix(h) - oracles.fock_matrix(np.zeros((2, 2)), h2)) < 1e-12


def _random_fermion(rng, n):
    h1 = rng.normal(size=(n, n))
    h1 = h1 + h1.T
    h2 = rng.normal(size=(n,) * 4)
    # Hermiticity of the two-body operator: h_pqrs = h_srqp
    h2 = h2 + h2.transpose(3, 2, 1, 0)
    return h1, h2


@pytest.mark.parametrize("seed", range(8))
def test_jw_matches_fock_space(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 5))
    h1, h2 = _random_fermion(rng, n)
    h = jordan_wigner(FermionHamiltonian(n, h1, h2))
    assert np.linalg.norm(to_matrix(h) - oracles.fock_matrix(h1, h2)) < 1e-9


def test_jw_rejects_non_hermitian_and_caps():
    bad = np.zeros((3,) * 4)
    bad[0, 1, 2, 1] = 1.0  # a+_0 a+_1 a_2 a_1 without its adjoint
    with pytest.raises(ValueError, match="non-Hermitian"):
        jordan_wigner(FermionHamiltonian(3, np.zeros((3, 3)), bad))
    with pytest.raises(CapExceededError):
        jordan_wigner(FermionHamiltonian(3, np.eye(3), np.zeros((3,) * 4)), max_modes=2)


def test_fermion_shape_and_symmetry_checks():
    with pytest.raises(ValueError):
        FermionHamiltonian(2, np.array([[0, 1.0], [0, 0]]), np.zeros((2,) * 4))
    with pytest.raises(ValueError):
        FermionHamiltonian(2, np.zeros((2, 2)), np.zeros((2, 2, 2)))
    f = FermionHamiltonian.from_dict({"n_modes": 1, "one_body": [1.0], "two_body": [0.0]})
    assert f.one_body.shape == (1, 1)


def test_fixture_term_counts():
    assert len(load_fixture("lih")) == 118
    assert len(load_fixture("beh2")) == 165
    assert load_fixture("lih").n_qubits == load_fixture("beh2").n_qubits == 6
    # spot checks against the printed listing
    lih = load_fixture("lih")
    assert lih.coefficient(ps(6, q0="Z", q1="Z")) == pytest.approx(-0.31773)
    beh2 = load_fixture("beh2")
    assert beh2.identity_coefficient == pytest.approx(-1.90305)
    assert beh2.coefficient(ps(6, q0="Z", q2="Z")) == pytest.approx(0.18326)


def test_all_letters_pairs_cover_product_table():
    for a, b in itertools.product("IXYZ", repeat=2):
        ph, prod = multiply(PauliString.from_label(a), PauliString.from_label(b))
        np.testing.assert_allclose(ph * oracles.kron_pauli(prod.label()),
                                   oracles.PAULI[a] @ oracles.PAULI[b], atol=1e-12)
