from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gmps.channels import random_mixed_state, random_pure_state, tms_state
from gmps.covmat import (
    BLOCKED,
    CovMat,
    CriticalWarning,
    collapse_epr,
    direct_sum,
    entropy,
    partial_transpose,
    purity,
    schur_complement,
    symplectic_eigenvalues,
    symplectic_form,
    validate_state,
    williamson,
    xy_decompose,
)

seeds = st.integers(0, 2**32 - 1)


def test_symplectic_form_examples():
    np.testing.assert_array_equal(symplectic_form(1), [[0, 1], [-1, 0]])
    blocked = [[0, 0, 1, 0], [0, 0, 0, 1], [-1, 0, 0, 0], [0, -1, 0, 0]]
    np.testing.assert_array_equal(symplectic_form(2, BLOCKED), blocked)
    s2 = symplectic_form(2)
    np.testing.assert_array_equal(s2[:2, :2], [[0, 1], [-1, 0]])
    np.testing.assert_array_equal(s2[2:, 2:], [[0, 1], [-1, 0]])
    assert not s2[:2, 2:].any()


def test_validate_state_examples():
    assert validate_state(np.eye(2)).valid
    chk = validate_state(0.5 * np.eye(2))
    assert not chk.valid
    assert chk.min_eigenvalue == pytest.approx(-0.5, abs=1e-14)
    assert validate_state(np.diag([2.0, 2.0])).valid


def test_validate_state_rejects_asymmetric():
    with pytest.raises(ValueError):
        validate_state(np.array([[1.0, 0.1], [0.0, 1.0]]))


def test_purity_examples():
    assert purity(np.eye(2)).pure
    # diag(2, 1/2) is a squeezed vacuum: (sigma gamma)^2 = [[0, 1/2], [-2, 0]]^2 = -1
    chk = purity(np.diag([2.0, 0.5]))
    assert chk.pure and chk.square_residual == 0.0
    # for valid states det = prod nu_k^2, so det = 1 forces all nu_k = 1
    assert not purity(np.diag([2.0, 0.5, 2.0, 2.0])).pure
    for s in (0.0, 0.3, 1.0, 2.5):
        assert purity(tms_state(s)).pure
    assert not purity(np.diag([2.0, 2.0])).pure


def test_schur_complement_examples():
    np.testing.assert_allclose(schur_complement(np.diag([3.0, 5.0]), [0]), [[5.0]])
    np.testing.assert_allclose(schur_complement([[2.0, 1.0], [1.0, 2.0]], [0]), [[1.5]])
    a, b = np.diag([1.0, 2.0]), np.array([[4.0, 1.0], [1.0, 3.0]])
    np.testing.assert_allclose(schur_complement(direct_sum(a, b), [0, 1]), b)


@given(seeds)
def test_schur_complement_matches_elimination(seed):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(8, 8))
    m = x @ x.T + 0.5 * np.eye(8)
    idx = sorted(rng.choice(8, size=3, replace=False))
    # oracle: eliminate the pivots one at a time
    work = m.copy()
    alive = list(range(8))
    for k in idx:
        p = alive.index(k)
        work = work - np.outer(work[:, p], work[p, :]) / work[p, p]
        work = np.delete(np.delete(work, p, 0), p, 1)
        alive.pop(p)
    assert np.max(np.abs(schur_complement(m, idx) - work)) <= 1e-12


def test_schur_complement_singular_block_warns():
    m = np.array([[1.0, 1.0, 0.5], [1.0, 1.0, 0.5], [0.5, 0.5, 2.0]])
    with pytest.warns(CriticalWarning):
        schur_complement(m, [0, 1])


def test_partial_transpose_examples():
    np.testing.assert_array_equal(np.asarray(partial_transpose(np.eye(4), [0, 1])), np.eye(4))
    t = np.asarray(tms_state(0.4))
    pt = np.asarray(partial_transpose(t, [1]))
    # Q entries untouched, P-P cross entry flips sign
    assert pt[0, 2] == t[0, 2]
    assert pt[1, 3] == -t[1, 3]
    assert pt[3, 3] == t[3, 3]


@given(seeds)
def test_partial_transpose_involution(seed):
    rng = np.random.default_rng(seed)
    g = random_mixed_state(3, rng)
    modes = [k for k in range(3) if rng.random() < 0.5]
    back = np.asarray(partial_transpose(partial_transpose(g, modes), modes))
    np.testing.assert_array_equal(back, g)


def test_collapse_vacua_leaves_vacuum():
    out = collapse_epr(np.eye(6), [0], [1])
    np.testing.assert_allclose(np.asarray(out), np.eye(2), atol=1e-15)


def test_entanglement_swapping_reduces_squeezing():
    s = 0.8
    t = np.asarray(tms_state(s))
    out = np.asarray(collapse_epr(direct_sum(t, t), [1], [2]))
    assert purity(out).pure
    nu = symplectic_eigenvalues(out[:2, :2])[0]
    # swapped pair is a two-mode squeezed state, less entangled than the inputs
    assert 1.0 < nu < np.cosh(2 * s)
    # closed form: the merged block is 2 cosh(2s) I, the cross block sinh(2s) Z
    c, sh = np.cosh(2 * s), np.sinh(2 * s)
    np.testing.assert_allclose(out[:2, :2], (c - sh**2 / (2 * c)) * np.eye(2), atol=1e-12)
    np.testing.assert_allclose(nu, c - sh**2 / (2 * c), rtol=1e-12)


def test_covmat_orderings_round_trip(rng):
    g = random_pure_state(3, rng)
    cm = CovMat(g)
    np.testing.assert_array_equal(cm.blocked().interleaved().entries, g)
    assert cm.blocked().ordering == BLOCKED
    with pytest.raises(ValueError):
        CovMat(np.eye(3))


def test_xy_decompose_examples():
    d = xy_decompose(np.eye(4))
    np.testing.assert_allclose(d.X, np.eye(2))
    np.testing.assert_allclose(d.Y, 0)
    s = 0.7
    d = xy_decompose(np.diag([np.exp(2 * s), np.exp(-2 * s)]))
    np.testing.assert_allclose(d.X, [[np.exp(2 * s)]])
    np.testing.assert_allclose(d.Y, 0)


@given(seeds)
def test_xy_reassembly(seed):
    g = random_pure_state(3, np.random.default_rng(seed))
    d = xy_decompose(g)
    assert np.max(np.abs(d.reassemble() - CovMat(g).blocked().entries)) <= 1e-9


@given(seeds)
def test_williamson_normal_form(seed):
    rng = np.random.default_rng(seed)
    g = random_mixed_state(2, rng)
    nu, s = williamson(g)
    sig = symplectic_form(2)
    assert np.max(np.abs(s @ sig @ s.T - sig)) <= 1e-9
    np.testing.assert_allclose(s @ np.diag(np.repeat(nu, 2)) @ s.T, g, atol=1e-9)
    np.testing.assert_allclose(nu, symplectic_eigenvalues(g), rtol=1e-9)
    assert np.all(nu >= 1 - 1e-9)


def test_entropy_of_pure_and_thermal():
    assert entropy([1.0, 1.0]) == 0.0
    # nu = 3: (nu+1)/2 = 2, (nu-1)/2 = 1
    assert entropy([3.0]) == pytest.approx(2 * np.log(2))
