from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gmps.channels import (
    S_REG,
    GaussChannel,
    SymplecticOp,
    apply_channel,
    apply_symplectic,
    channel_compose,
    channel_from_symplectic,
    epr_state,
    identity_channel,
    random_channel,
    random_mixed_state,
    random_pure_channel,
    random_pure_state,
    random_symplectic,
    tms_state,
    vacuum_channel,
)
from gmps.covmat import CovMat, collapse_epr, direct_sum, purity, validate_state

seeds = st.integers(0, 2**32 - 1)


def tms_channel(s: float) -> GaussChannel:
    return GaussChannel(1, 1, tms_state(s), pure=True)


def test_tms_state_values():
    np.testing.assert_array_equal(np.asarray(tms_state(0.0)), np.eye(4))
    t = np.asarray(tms_state(1.0))
    assert t[0, 0] == pytest.approx(3.7621956910836314)
    assert t[0, 2] == pytest.approx(3.626860407847019)
    for s in (0.1, 1.0, 3.0):
        assert np.linalg.det(np.asarray(tms_state(s))) == pytest.approx(1.0, rel=1e-9)
    with pytest.raises(ValueError):
        tms_state(-0.1)


def test_constant_channel_outputs_vacuum(rng):
    ch = vacuum_channel(2, 1)
    out = apply_channel(ch, random_mixed_state(2, rng))
    np.testing.assert_allclose(np.asarray(out), np.eye(2), atol=1e-14)


@pytest.mark.parametrize("s", [0.0, 0.5, 2.0, 6.0])
def test_tms_channel_on_vacuum_gives_vacuum(s):
    out = apply_channel(tms_channel(s), np.eye(2))
    np.testing.assert_allclose(np.asarray(out), np.eye(2), rtol=1e-12)


@given(seeds)
def test_teleportation_error_strictly_decreasing(seed):
    g = random_mixed_state(1, np.random.default_rng(seed))
    errs = [np.max(np.abs(np.asarray(apply_channel(tms_channel(s), g)) - g)) for s in (2, 4, 6, 8)]
    assert all(a > b for a, b in zip(errs, errs[1:]))


def test_epr_resource_teleports_multimode_states(rng):
    g = random_pure_state(2, rng)
    out = apply_channel(identity_channel(2), g)
    assert np.max(np.abs(np.asarray(out) - g)) < 1e-6


def test_apply_symplectic_examples(rng):
    g = random_mixed_state(2, rng)
    np.testing.assert_array_equal(np.asarray(apply_symplectic(np.eye(4), g)), g)
    s = 0.6
    sq = np.diag([np.exp(s), np.exp(-s)])
    np.testing.assert_allclose(np.asarray(apply_symplectic(sq, np.eye(2))), np.diag([np.exp(2 * s), np.exp(-2 * s)]))
    with pytest.raises(ValueError):
        apply_symplectic(np.diag([2.0, 2.0]), np.eye(2))


@given(seeds)
def test_apply_symplectic_keeps_purity(seed):
    rng = np.random.default_rng(seed)
    g = random_pure_state(2, rng)
    assert purity(apply_symplectic(random_symplectic(2, rng), g)).pure


def test_symplectic_op_from_generator():
    op = SymplecticOp.from_generator(np.diag([1.0, 1.0]), 0.3)
    assert op.is_symplectic()
    # H = identity generates a phase-space rotation
    np.testing.assert_allclose(op.S, [[np.cos(0.3), np.sin(0.3)], [-np.sin(0.3), np.cos(0.3)]])


def test_compose_with_regularized_identity(rng):
    for _ in range(5):
        ch1 = random_channel(2, 1, rng)
        out = channel_compose(identity_channel(1), ch1)
        assert np.max(np.abs(out.entries - ch1.entries)) <= 1e-6
        out = channel_compose(ch1, identity_channel(2))
        assert np.max(np.abs(out.entries - ch1.entries)) <= 1e-6


def test_compose_vacuum_channels():
    out = channel_compose(vacuum_channel(1, 2), vacuum_channel(1, 1))
    np.testing.assert_allclose(out.entries, np.eye(6), atol=1e-14)


@given(seeds)
def test_compose_associative(seed):
    rng = np.random.default_rng(seed)
    a, b, c = (random_channel(1, 1, rng) for _ in range(3))
    left = channel_compose(c, channel_compose(b, a)).entries
    right = channel_compose(channel_compose(c, b), a).entries
    assert np.max(np.abs(left - right)) <= 1e-9


@given(seeds)
def test_compose_matches_sequential_application(seed):
    rng = np.random.default_rng(seed)
    a, b = random_channel(2, 1, rng), random_channel(1, 2, rng)
    g = random_mixed_state(2, rng)
    once = np.asarray(apply_channel(channel_compose(b, a), g))
    twice = np.asarray(apply_channel(b, apply_channel(a, g)))
    assert np.max(np.abs(once - twice)) <= 1e-9


@given(seeds, st.integers(1, 3), st.integers(1, 3))
def test_apply_channel_equals_collapse(seed, n_in, n_out):
    rng = np.random.default_rng(seed)
    ch = random_channel(n_in, n_out, rng)
    g = random_mixed_state(n_in, rng)
    direct = np.asarray(collapse_epr(direct_sum(g, ch.cm), range(n_in), range(n_in, 2 * n_in)))
    assert np.max(np.abs(np.asarray(apply_channel(ch, g)) - direct)) <= 1e-10


@given(seeds)
def test_pure_channel_keeps_pure_states_pure(seed):
    rng = np.random.default_rng(seed)
    ch = random_pure_channel(2, 2, rng)
    out = apply_channel(ch, random_pure_state(2, rng))
    assert abs(np.linalg.det(np.asarray(out)) - 1) <= 1e-7
    assert validate_state(out).valid


def test_channel_from_symplectic_acts_as_congruence(rng):
    S = random_symplectic(2, rng, 0.4)
    ch = channel_from_symplectic(S)
    assert ch.regularized and ch.pure
    g = random_mixed_state(2, rng)
    out = np.asarray(apply_channel(ch, g))
    assert np.max(np.abs(out - S @ g @ S.T)) <= 1e-6


def test_epr_state_is_rotated_tms():
    # both are pure with the same reduced states; only the P-P (resp. Q-Q) sign differs
    e, t = np.asarray(epr_state(0.5)), np.asarray(tms_state(0.5))
    assert purity(e).pure
    np.testing.assert_allclose(np.diag(e), np.diag(t))
    np.testing.assert_allclose(e[0, 2], -t[0, 2])
    np.testing.assert_allclose(e[1, 3], -t[1, 3])


def test_default_regularization():
    assert identity_channel(1).regularized
    assert S_REG == 10.0


def test_channel_mode_count_checked():
    with pytest.raises(ValueError):
        GaussChannel(2, 2, CovMat(np.eye(6)))
