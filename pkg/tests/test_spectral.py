import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from inhomqw.butterfly import enumerate_alphas
from inhomqw.core import AlphaPQ
from inhomqw.errors import ComputationError, ValidationError
from inhomqw.spectral import (
    CWMatrix,
    SpectrumRecord,
    Tolerances,
    boundary_sign,
    build_cw_matrix,
    canonical_arg,
    cw_basis,
    eigenpairs,
    lattice_block,
    multisets_match,
    p6_similarity_deviation,
    parity_diagonal,
    unitarity_deviation,
    verify_all,
    verify_p1,
    verify_p2_p3,
    verify_p4,
    verify_p5,
    verify_p6,
    wc_cw_similarity,
)

FOURTH_ROOTS = np.array([1, 1j, -1, -1j])


@st.composite
def admissible(draw, qmax=12):
    q = draw(st.integers(1, qmax))
    p = draw(st.sampled_from([p for p in range(1, 4 * q, 2) if math.gcd(p, q) == 1]))
    return AlphaPQ(p, q)


def test_basis_order():
    assert cw_basis(1) == ((-1, 1), (0, 0), (0, 1), (1, 0))
    assert len(cw_basis(7)) == 28


def test_boundary_sign():
    assert [boundary_sign(p) for p in (1, 3, 5, 7)] == [-1, 1, -1, 1]
    with pytest.raises(ValidationError):
        boundary_sign(2)


def test_cw_matrix_q1_by_hand():
    m = build_cw_matrix(AlphaPQ(1, 1)).matrix
    expected = np.array([[0, -1, 0, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, 0, -1, 0]])
    assert np.array_equal(m, expected)


def test_cw_matrix_q3_interior_coins():
    """alpha = 1/12: coin at n = +-1 is a 30 degree rotation."""
    cw = build_cw_matrix(AlphaPQ(1, 3))
    m = cw.matrix
    idx = {b: k for k, b in enumerate(cw.basis)}
    c, s = math.sqrt(3) / 2, 0.5
    # row (1;L) = cos * psi(2;L) - sin * psi(0;R)
    assert m[idx[(1, 0)], idx[(2, 0)]] == pytest.approx(c, abs=1e-15)
    assert m[idx[(1, 0)], idx[(0, 1)]] == pytest.approx(-s, abs=1e-15)
    assert m[idx[(1, 1)], idx[(2, 0)]] == pytest.approx(s, abs=1e-15)
    assert m[idx[(1, 1)], idx[(0, 1)]] == pytest.approx(c, abs=1e-15)
    # n = -1 rotates by -30 degrees
    assert m[idx[(-1, 0)], idx[(-2, 1)]] == pytest.approx(s, abs=1e-15)
    assert m[idx[(-1, 1)], idx[(0, 0)]] == pytest.approx(-s, abs=1e-15)


@pytest.mark.parametrize("a", enumerate_alphas(8))
def test_cw_matrix_equals_lattice_restriction(a):
    block, leak = lattice_block(a, "CW")
    assert leak == 0.0
    assert np.array_equal(block, build_cw_matrix(a).matrix)


@pytest.mark.parametrize("a", enumerate_alphas(6))
def test_wc_block_is_invariant(a):
    _, leak = lattice_block(a, "WC")
    assert leak == 0.0


def test_cw_matrix_rejects_bad_input():
    with pytest.raises(ValidationError):
        build_cw_matrix((1, 1))


def test_exactly_unitary_when_all_entries_quarter_turns():
    for a in enumerate_alphas(1):
        assert unitarity_deviation(build_cw_matrix(a).matrix) == 0.0


@pytest.mark.parametrize("q", [1, 2, 5, 13, 30, 47, 60])
def test_unitary_and_sparse(q):
    for p in (1, 4 * q - 1, 2 * q + 1 if math.gcd(2 * q + 1, q) == 1 else 1):
        m = build_cw_matrix(AlphaPQ(p, q)).matrix
        assert unitarity_deviation(m) <= 1e-12
        nz = np.abs(m) > 0
        assert nz.sum(axis=0).max() <= 2 and nz.sum(axis=1).max() <= 2


def test_eigenvalues_q1_against_companion_roots():
    m = build_cw_matrix(AlphaPQ(1, 1)).matrix
    # signed 4-cycle: M^4 = I exactly, so the characteristic polynomial is x^4 - 1
    assert np.array_equal(np.linalg.matrix_power(m, 4), np.eye(4))
    roots = np.roots([1, 0, 0, 0, -1])
    rec = eigenpairs(build_cw_matrix(AlphaPQ(1, 1)))
    ok, dist = multisets_match(rec.eigenvalues, roots, 1e-12)
    assert ok, dist
    ok, dist = multisets_match(rec.eigenvalues, FOURTH_ROOTS, 1e-12)
    assert ok, dist


def test_eigenvalues_three_quarters():
    rec = eigenpairs(build_cw_matrix(AlphaPQ(3, 1)))
    assert multisets_match(rec.eigenvalues, FOURTH_ROOTS, 1e-12)[0]


def test_record_fields():
    rec = eigenpairs(build_cw_matrix(AlphaPQ(5, 7)))
    assert len(rec.eigenvalues) == 28
    assert rec.max_residual <= 1e-8
    assert rec.max_modulus_deviation <= 1e-10
    turns = np.mod(np.angle(rec.eigenvalues), 2 * np.pi)
    assert np.all(np.diff(turns) >= 0)
    v = rec.eigenvectors
    m = build_cw_matrix(AlphaPQ(5, 7)).matrix
    np.testing.assert_allclose(m @ v, v * rec.eigenvalues, atol=1e-10)


def test_solver_failure_carries_alpha(monkeypatch):
    def broken(_):
        raise np.linalg.LinAlgError("did not converge")

    monkeypatch.setattr(np.linalg, "eig", broken)
    with pytest.raises(ComputationError) as info:
        eigenpairs(build_cw_matrix(AlphaPQ(1, 3)))
    assert info.value.alpha == AlphaPQ(1, 3)


def test_residual_violation_raises():
    with pytest.raises(ComputationError, match="residual"):
        eigenpairs(build_cw_matrix(AlphaPQ(1, 2)), Tolerances(residual=-1.0))


def test_match_multisets_wraparound():
    eps = 1e-10
    x = np.exp(1j * np.array([eps, 1.0, 2.0]))
    y = np.exp(1j * np.array([-eps, 1.0, 2.0]))
    # sorted pairing puts -eps last; greedy fallback repairs it
    ok, dist = multisets_match(x, y, 1e-8)
    assert ok and dist < 1e-9
    assert multisets_match([1, 1j], [1, 1j, -1], 1e-8) == (False, math.inf)


@pytest.mark.parametrize("p, q", [(1, 1), (1, 3), (5, 3)])
def test_verify_p1(p, q):
    r = verify_p1(AlphaPQ(p, q))
    assert r.passed and r.value <= 1e-8


@pytest.mark.parametrize("p, q", [(1, 1), (1, 3), (7, 10)])
def test_verify_p2_p3(p, q):
    reports = verify_p2_p3(eigenpairs(build_cw_matrix(AlphaPQ(p, q))))
    assert [r.prop for r in reports] == ["P2", "P3"]
    assert all(r.passed for r in reports)


def test_verify_p2_p3_detects_asymmetry():
    a = AlphaPQ(1, 1)
    rec = SpectrumRecord(a, np.exp(1j * np.array([0.1, 0.2, 0.3, 0.4])), np.zeros(4), 0.1)
    assert not any(r.passed for r in verify_p2_p3(rec))


def test_verify_p4():
    r = verify_p4(eigenpairs(build_cw_matrix(AlphaPQ(1, 1))))
    assert r.passed and r.value == pytest.approx(math.sqrt(2), abs=1e-12)
    assert verify_p4(eigenpairs(build_cw_matrix(AlphaPQ(1, 3)))).passed
    big = eigenpairs(build_cw_matrix(AlphaPQ(1, 60)))
    assert len(big.eigenvalues) == 240
    assert verify_p4(big).passed


def test_verify_p4_flags_degeneracy():
    a = AlphaPQ(1, 1)
    rec = SpectrumRecord(a, np.array([1, 1 + 1e-12, -1, 1j]), np.zeros(4), 1e-12)
    assert not verify_p4(rec).passed


@pytest.mark.parametrize("p, q", [(1, 1), (1, 3), (7, 5)])
def test_verify_p5(p, q):
    assert verify_p5(eigenpairs(build_cw_matrix(AlphaPQ(p, q)))).passed


def test_parity_diagonal_q1():
    d = parity_diagonal(1)
    assert np.array_equal(d, [1j, 1, 1, 1j])
    D = np.diag(parity_diagonal(5))
    assert np.array_equal(np.linalg.matrix_power(D, 4), np.eye(20))


@pytest.mark.parametrize("p, q", [(1, 1), (1, 3)])
def test_verify_p6(p, q):
    reports = verify_p6(AlphaPQ(p, q))
    assert all(r.passed for r in reports)
    assert reports[1].value == 0.0


def test_p6_rotation_explicit():
    a = AlphaPQ(1, 3)
    assert a.half_shift() == AlphaPQ(7, 3)
    w = eigenpairs(build_cw_matrix(a)).eigenvalues
    w_shift = eigenpairs(build_cw_matrix(AlphaPQ(7, 3))).eigenvalues
    assert multisets_match(w_shift, 1j * w, 1e-8)[0]


@settings(max_examples=40, deadline=None)
@given(admissible(qmax=20))
def test_p6_similarity_exact(a):
    assert p6_similarity_deviation(a) == 0.0


@settings(max_examples=25, deadline=None)
@given(admissible(qmax=12))
def test_wc_cw_similarity(a):
    r = wc_cw_similarity(a)
    assert r.passed, str(r)


def test_wc_cw_small_cases():
    assert wc_cw_similarity(AlphaPQ(1, 1)).value < 1e-12
    assert wc_cw_similarity(AlphaPQ(1, 3)).passed


def test_canonical_arg_range():
    args = canonical_arg(np.array([complex(-1, -0.0), -1, 1, 1j, -1j]))
    assert args[0] == math.pi and args[1] == math.pi
    assert np.all((args > -math.pi) & (args <= math.pi))


def _faulty(a):
    m = build_cw_matrix(a)
    bad = m.matrix.copy()
    bad[0, 0] += 1e-3
    return CWMatrix(a, bad, m.basis)


def test_verify_all_flags_fault():
    reports = verify_all(AlphaPQ(1, 3), builder=_faulty)
    failed = {r.prop for r in reports if not r.passed}
    assert {"unitary", "P6-similarity"} <= failed


@settings(max_examples=20, deadline=None)
@given(admissible(qmax=20))
def test_verify_all_passes(a):
    reports = verify_all(a)
    assert all(r.passed for r in reports), [str(r) for r in reports if not r.passed]
    assert len(eigenpairs(build_cw_matrix(a)).eigenvalues) == 4 * a.Q
