"""Acceptance suite: nine end-to-end criteria at their stated tolerances.

Each criterion prints one ``PASS``/``FAIL`` line. Run with ``pytest -s`` to see
the lines inline, or directly with ``python3 tests/test_acceptance.py``.
"""

from __future__ import annotations

import time
from typing import Callable

import numpy as np
import pytest
from numpy.polynomial import polynomial as P
from scipy.integrate import quad

from gmps.channels import apply_channel, random_channel, random_mixed_state, random_pure_channel, random_pure_state
from gmps.channels import random_symplectic
from gmps.covmat import collapse_epr, direct_sum, symplectic_eigenvalues, symplectic_form
from gmps.hamiltonian import QuadHamiltonian, ground_energy_density, ground_state, has_gmps_ground_state
from gmps.hamiltonian import parent_hamiltonian
from gmps.lattice import GmpsSpec, build_gmps
from gmps.protocols import protocol_report, reduce_bond_entanglement
from gmps.spectral import RationalCM, correlation_length, dft_roundtrip, gamma_hat, phi_grid, rationalize

SEED = 20240611


def _rng(k: int) -> np.random.Generator:
    return np.random.default_rng([SEED, k])


def _block_circulant(seq: np.ndarray) -> np.ndarray:
    N, d = seq.shape[0], seq.shape[1]
    out = np.empty((N * d, N * d))
    for i in range(N):
        for j in range(N):
            out[d * i:d * i + d, d * j:d * j + d] = seq[(i - j) % N]
    return out


# ---------------------------------------------------------------- criteria


def finite_fourier_equivalence() -> tuple[bool, str]:
    rng = _rng(1)
    N = 32
    t0 = time.perf_counter()
    worst = 0.0
    for k in range(20):
        M = 1 + k % 2
        ch = random_pure_channel(2 * M, 1, rng)
        g = np.asarray(build_gmps(GmpsSpec.uniform(ch, N)))
        seq = dft_roundtrip(gamma_hat(ch, phi_grid(N)))
        assert np.max(np.abs(seq.imag)) <= 1e-12
        worst = max(worst, float(np.max(np.abs(g - _block_circulant(seq.real)))))
    dt = time.perf_counter() - t0
    return worst <= 1e-8 and dt <= 10.0, f"max entry diff {worst:.2e} (tol 1e-8), {dt:.2f} s (limit 10 s)"


def purity_conservation() -> tuple[bool, str]:
    rng = _rng(2)
    det_err = sq_err = 0.0
    count = 0
    for N in range(2, 17):
        for M in (1, 2):
            g = np.asarray(build_gmps(GmpsSpec.uniform(random_pure_channel(2 * M, 1, rng), N)))
            sg = symplectic_form(N) @ g
            det_err = max(det_err, abs(np.linalg.det(g) - 1.0))
            sq_err = max(sq_err, float(np.max(np.abs(sg @ sg + np.eye(2 * N)))))
            count += 1
    ok = det_err <= 1e-7 and sq_err <= 1e-6
    return ok, f"{count} chains: |det - 1| {det_err:.2e} (tol 1e-7), |(sg)^2 + 1| {sq_err:.2e} (tol 1e-6)"


def rational_representation() -> tuple[bool, str]:
    rng = _rng(3)
    worst_deg, worst_rel = 0, 0.0
    for _ in range(20):
        rc = rationalize(random_pure_channel(2, 1, rng))
        worst_deg = max(worst_deg, rc.L)
        diff = P.polysub(P.polymul(rc.p, rc.q), P.polyadd(P.polymul(rc.r, rc.r), P.polymul(rc.d, rc.d)))
        scale = max(np.max(np.abs(c)) for c in (rc.p, rc.q, rc.r, rc.d))
        worst_rel = max(worst_rel, float(np.max(np.abs(diff)) / scale))
    ok = worst_deg <= 3 and worst_rel <= 1e-7
    return ok, f"max degree {worst_deg} (bound 3), |pq - r^2 - d^2| / |coeffs| {worst_rel:.2e} (tol 1e-7)"


def correlation_length_family() -> tuple[bool, str]:
    d = np.array([5.0, -4.0])  # proportional to 5/4 - cos phi, d(1) = 1
    rc = RationalCM(P.polymul(d, d), np.array([1.0]), np.array([0.0]), d)
    xi = correlation_length(rc).xi
    xi_err = abs(xi - 1 / np.log(2))
    seq = dft_roundtrip(rc.evaluate(phi_grid(4096))).real[:, 0, 0]
    n = np.arange(10, 41)
    slope = np.polyfit(n, np.log(np.abs(seq[n])), 1)[0]
    rel = abs(slope - np.log(0.5)) / abs(np.log(0.5))
    return xi_err <= 1e-9 and rel <= 0.02, f"|xi - 1/ln 2| {xi_err:.2e} (tol 1e-9), slope rel. error {rel:.2e} (tol 2%)"


def parent_hamiltonian_round_trip() -> tuple[bool, str]:
    rng = _rng(5)
    phi = phi_grid(64)
    worst_state = worst_energy = 0.0
    for k in range(20):
        M = 1 + k % 2
        ch = random_pure_channel(2 * M, 1, rng)
        rc = rationalize(ch)
        h = parent_hamiltonian(rc)
        worst_state = max(worst_state, float(np.max(np.abs(ground_state(h)(phi) - gamma_hat(ch, phi)))))
        mean_d, _ = quad(lambda x: P.polyval(np.cos(x), rc.d), 0, 2 * np.pi, epsabs=1e-14)
        worst_energy = max(worst_energy, abs(ground_energy_density(h) - mean_d / (2 * np.pi)))
    ok = worst_state <= 1e-10 and worst_energy <= 1e-8
    return ok, f"state {worst_state:.2e} (tol 1e-10), energy {worst_energy:.2e} (tol 1e-8)"


def converse_test() -> tuple[bool, str]:
    rng = _rng(6)
    statuses = []
    for k in range(20):
        M = 1 + k % 2
        statuses.append(has_gmps_ground_state(parent_hamiltonian(rationalize(random_pure_channel(2 * M, 1, rng)))).status)
    n_yes = statuses.count("yes")
    w = has_gmps_ground_state(QuadHamiltonian([1.25, -1.0], [1.0], [0.0]))
    witness_ok = (w.status == "no" and w.witness_multiplicity % 2 == 1
                  and abs(w.witness_root - 1.25) <= 1e-9)
    ok = n_yes == len(statuses) and witness_ok
    return ok, (f"parent Hamiltonians 'yes' {n_yes}/{len(statuses)}; witness {w.status} "
                f"at root {complex(w.witness_root):.6g} (multiplicity {w.witness_multiplicity})")


def protocol_convergence() -> tuple[bool, str]:
    rng = _rng(7)
    N = 4
    worst_last, monotone = 0.0, True
    for _ in range(3):
        rep = protocol_report(random_pure_state(N, rng), random_symplectic(2, rng, 0.2), (4, 6, 8, 10, 12))
        errs = rep["error"]
        monotone &= all(a > b for a, b in zip(errs, errs[1:]))
        worst_last = max(worst_last, errs[-1])
    ok = monotone and worst_last <= 1e-5
    return ok, f"strictly decreasing: {monotone}; error at s = 12: {worst_last:.2e} (tol 1e-5)"


def bond_reduction() -> tuple[bool, str]:
    rng = _rng(8)
    phi = phi_grid(64)
    worst_gamma = worst_nu = 0.0
    for _ in range(10):
        ch = random_pure_channel(2, 1, rng)
        new = reduce_bond_entanglement(GmpsSpec.uniform(ch, 4))
        worst_gamma = max(worst_gamma, float(np.max(np.abs(gamma_hat(ch, phi) - gamma_hat(new.sites[0], phi)))))
        nu = symplectic_eigenvalues(ch.entries[:2, :2])
        r = np.asarray(new.bond_squeezing)
        r = np.concatenate([r, np.zeros(len(nu) - len(r))])  # dropped bonds carry r = 0
        worst_nu = max(worst_nu, float(np.max(np.abs(np.sort(np.cosh(2 * r)) - nu))))
    ok = worst_gamma <= 1e-7 and worst_nu <= 1e-8
    return ok, f"gamma_hat change {worst_gamma:.2e} (tol 1e-7), |cosh 2r - nu| {worst_nu:.2e} (tol 1e-8)"


def cross_op_consistency() -> tuple[bool, str]:
    rng = _rng(9)
    worst = 0.0
    for _ in range(50):
        n_in, n_out = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        ch = random_channel(n_in, n_out, rng)
        g = random_mixed_state(n_in, rng)
        direct = np.asarray(collapse_epr(direct_sum(g, ch.cm), range(n_in), range(n_in, 2 * n_in)))
        worst = max(worst, float(np.max(np.abs(np.asarray(apply_channel(ch, g)) - direct))))
    return worst <= 1e-10, f"max diff {worst:.2e} (tol 1e-10)"


CRITERIA: list[tuple[str, Callable[[], tuple[bool, str]]]] = [
    ("1 finite/Fourier equivalence", finite_fourier_equivalence),
    ("2 purity conservation", purity_conservation),
    ("3 rational representation", rational_representation),
    ("4 correlation length", correlation_length_family),
    ("5 parent-Hamiltonian round trip", parent_hamiltonian_round_trip),
    ("6 converse test", converse_test),
    ("7 protocol convergence", protocol_convergence),
    ("8 bond reduction", bond_reduction),
    ("9 cross-op consistency", cross_op_consistency),
]


def _line(name: str, ok: bool, detail: str) -> str:
    return f"{'PASS' if ok else 'FAIL'}  criterion {name}: {detail}"


@pytest.mark.parametrize("name,fn", CRITERIA, ids=[n.split(" ", 1)[1].replace(" ", "_") for n, _ in CRITERIA])
def test_criterion(name, fn, capsys):
    ok, detail = fn()
    with capsys.disabled():
        print("\n" + _line(name, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    results = [(name, *fn()) for name, fn in CRITERIA]
    for name, ok, detail in results:
        print(_line(name, ok, detail))
    raise SystemExit(0 if all(ok for _, ok, _ in results) else 1)
