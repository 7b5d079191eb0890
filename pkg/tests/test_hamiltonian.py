from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.polynomial import polynomial as P
from scipy.integrate import quad

from gmps.channels import random_pure_channel
from gmps.covmat import CriticalState, symplectic_eigenvalues
from gmps.hamiltonian import (
    SIGMA1,
    QuadHamiltonian,
    ground_energy_density,
    ground_state,
    has_gmps_ground_state,
    parent_hamiltonian,
    spectral_function,
)
from gmps.spectral import RationalCM, gamma_hat, phi_grid, rationalize

seeds = st.integers(0, 2**32 - 1)
PHI64 = phi_grid(64)


def test_identity_energy():
    h = QuadHamiltonian([1.0], [1.0], [0.0])
    # vacuum energy per site: 1/2 tr(H gamma) with gamma = H = identity
    assert ground_energy_density(h) == pytest.approx(1.0, abs=1e-12)


def test_five_quarter_energy_and_riemann_sum():
    h = QuadHamiltonian([1.25, -1.0], [1.0], [0.0])
    e = ground_energy_density(h)
    # mean of sqrt(5/4 - cos) is not 5/4; compare against a Riemann sum
    riemann = np.mean(spectral_function(h)(phi_grid(4096)))
    assert abs(e - riemann) <= 1e-8
    # E = 5/4 - cos phi itself (det = E^2) averages to 5/4
    h2 = QuadHamiltonian(P.polymul([1.25, -1.0], [1.25, -1.0]), [1.0], [0.0])
    assert ground_energy_density(h2) == pytest.approx(1.25, abs=1e-10)


def test_energy_matches_finite_ring_oracle(rng):
    rc = rationalize(random_pure_channel(2, 1, rng))
    h = parent_hamiltonian(rc)
    N = 64
    ring = h.real_space(N)
    # ground energy of sum H_kl R_k R_l is the sum of symplectic eigenvalues of H
    finite = np.sum(symplectic_eigenvalues(ring)) / N
    assert abs(finite - ground_energy_density(h)) <= 1e-8


def test_couplings_reproduce_symbol():
    h = QuadHamiltonian([1.0, 0.5, 0.25], [2.0, -0.3], [0.1, 0.0, 0.2])
    blocks = h.couplings()
    assert h.range == 2
    phi = np.linspace(0, 2 * np.pi, 13)
    recon = blocks[0] + sum(2 * np.cos(n * phi)[:, None, None] * blocks[n] for n in range(1, 3))
    np.testing.assert_allclose(recon, h.evaluate(phi), atol=1e-14)
    # real-space matrix is the circulant built from the same blocks
    ring = h.real_space(7)
    np.testing.assert_allclose(ring[0:2, 2:4], blocks[1])
    np.testing.assert_allclose(ring[0:2, 12:14], blocks[1])
    np.testing.assert_allclose(ring, ring.T)


def test_sigma_swap_is_exact():
    rc = RationalCM(np.array([5.0, -3.0, 2.0]), np.array([4.0, 1.0, 0.0]), np.array([1.0, 2.0, -1.0]),
                    np.array([1.0, 0.0, 0.0]))
    h = QuadHamiltonian(rc.p, rc.q, rc.r)
    for phi in (0.0, 1.0, 2.5):
        swapped = SIGMA1 @ h.evaluate(phi) @ SIGMA1.T
        c = np.cos(phi)
        q, r, p = (P.polyval(c, x) for x in (rc.q, rc.r, rc.p))
        np.testing.assert_array_equal(swapped, [[q, r], [r, p]])


@given(seeds, st.integers(1, 2))
def test_round_trip_reproduces_state(seed, M):
    ch = random_pure_channel(2 * M, 1, np.random.default_rng(seed))
    rc = rationalize(ch)
    h = parent_hamiltonian(rc)
    assert np.max(np.abs(ground_state(h)(PHI64) - gamma_hat(ch, PHI64).real)) <= 1e-10


@given(seeds, st.integers(1, 2))
def test_round_trip_energy_is_mean_of_d(seed, M):
    rc = rationalize(random_pure_channel(2 * M, 1, np.random.default_rng(seed)))
    direct, _ = quad(lambda x: P.polyval(np.cos(x), rc.d), 0, 2 * np.pi, epsabs=1e-14)
    assert abs(ground_energy_density(parent_hamiltonian(rc)) - direct / (2 * np.pi)) <= 1e-8


@given(seeds, st.integers(1, 2))
def test_parent_hamiltonians_pass_converse(seed, M):
    rc = rationalize(random_pure_channel(2 * M, 1, np.random.default_rng(seed)))
    res = has_gmps_ground_state(parent_hamiltonian(rc))
    assert res.status == "yes"
    # d is recovered (normalized to d(1) = 1)
    c = np.linspace(-1, 1, 11)
    assert np.max(np.abs(P.polyval(c, res.rational.d) - P.polyval(c, rc.d))) <= 1e-6 * np.max(np.abs(rc.d))


def test_converse_witness():
    res = has_gmps_ground_state(QuadHamiltonian([1.25, -1.0], [1.0], [0.0]))
    assert res.status == "no"
    assert res.witness_root == pytest.approx(1.25)
    assert res.witness_multiplicity == 1


def test_converse_perfect_square():
    res = has_gmps_ground_state(QuadHamiltonian(P.polymul([1.5, -1.0], [1.5, -1.0]), [1.0], [0.0]))
    assert res.status == "yes"
    np.testing.assert_allclose(res.sqrt_det, [1.5, -1.0], atol=1e-10)
    # induced state is normalized to d(1) = 1
    np.testing.assert_allclose(res.rational.d, [3.0, -2.0, 0.0], atol=1e-10)


def test_converse_near_square_is_indeterminate():
    res = has_gmps_ground_state(QuadHamiltonian(P.polymul([1.5, -1.0], [1.501, -1.0]), [1.0], [0.0]))
    assert res.status == "indeterminate"
    assert res.margin == pytest.approx(1e-3, rel=1e-3)
    res = has_gmps_ground_state(QuadHamiltonian(P.polymul([1.5, -1.0], [1.6, -1.0]), [1.0], [0.0]))
    assert res.status == "no"


def test_converse_negative_leading_coefficient():
    res = has_gmps_ground_state(QuadHamiltonian([0.0, 0.0, -1.0], [1.0], [0.0]))
    assert res.status == "no"


def test_singular_hamiltonian_is_critical():
    with pytest.raises(CriticalState):
        ground_state(QuadHamiltonian([1.0, -1.0], [1.0], [0.0]))


def test_parent_hamiltonian_rejects_mixed_form():
    rc = RationalCM(np.array([2.0]), np.array([2.0]), np.array([0.0]), np.array([1.0]))
    with pytest.raises(ValueError):
        parent_hamiltonian(rc)
