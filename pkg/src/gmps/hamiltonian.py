"""Parent Hamiltonians of translation-invariant GMPS and the converse test.

A quadratic translation-invariant Hamiltonian ``sum H_kl R_k R_l`` with one
mode per site is stored by its Fourier symbol

    H_hat(phi) = [[p(c), -r(c)], [-r(c), q(c)]],    c = cos(phi)

in Q-P order. Its ground state is ``sigma H_hat sigma^T / E`` with the spectral
function ``E = sqrt(det H_hat)``.

Energies use ``E_0 / N = (1/2pi) int E(phi) dphi``, i.e. ``1/2 tr`` over the
Q and P copies of ``E`` for the operator ``sum H_kl R_k R_l`` with a vacuum
covariance matrix equal to the identity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import chebyshev as C
from numpy.polynomial import polynomial as P
from scipy.integrate import quad

from .covmat import CriticalState
from .spectral import ROOT_CLUSTER, RationalCM, SpectralCM, _trim, cluster_roots, degree

SIGMA1 = np.array([[0.0, 1.0], [-1.0, 0.0]])


@dataclass(frozen=True)
class QuadHamiltonian:
    p: np.ndarray
    q: np.ndarray
    r: np.ndarray

    def __post_init__(self):
        L = max(len(self.p), len(self.q), len(self.r)) - 1
        for name in "pqr":
            c = np.zeros(L + 1)
            v = np.asarray(getattr(self, name), dtype=float)
            c[: len(v)] = v
            c.setflags(write=False)
            object.__setattr__(self, name, c)

    @property
    def h_q(self) -> np.ndarray:
        return self.p

    @property
    def h_p(self) -> np.ndarray:
        return self.q

    @property
    def h_qp(self) -> np.ndarray:
        return -self.r

    @property
    def range(self) -> int:
        return max(degree(self.p), degree(self.q), degree(self.r))

    def evaluate(self, phi) -> np.ndarray:
        c = np.cos(np.asarray(phi, dtype=float))
        p, q, r = (P.polyval(c, x) for x in (self.p, self.q, self.r))
        return np.stack([np.stack([p, -r], -1), np.stack([-r, q], -1)], -2)

    def det_poly(self) -> np.ndarray:
        return P.polysub(P.polymul(self.p, self.q), P.polymul(self.r, self.r))

    def couplings(self) -> np.ndarray:
        """Real-space 2x2 coupling blocks ``H_n`` for ``n = 0 .. range``.

        ``H_hat(phi) = H_0 + sum_n H_n (e^{i n phi} + e^{-i n phi})``.
        """
        L = len(self.p) - 1
        out = np.zeros((L + 1, 2, 2))
        for (i, j), poly in (((0, 0), self.p), ((1, 1), self.q), ((0, 1), -self.r), ((1, 0), -self.r)):
            a = np.zeros(L + 1)
            cheb = C.poly2cheb(poly)
            a[: len(cheb)] = cheb
            out[0, i, j] = a[0]
            out[1:, i, j] = a[1:] / 2
        return out

    def real_space(self, N: int) -> np.ndarray:
        """Interleaved ``2N x 2N`` Hamiltonian matrix on a ring of ``N`` sites."""
        blocks = self.couplings()
        if 2 * (len(blocks) - 1) >= N:
            raise ValueError(f"ring of {N} sites too short for range {len(blocks) - 1}")
        h = np.zeros((2 * N, 2 * N))
        for k in range(N):
            for n, b in enumerate(blocks):
                for l in {(k + n) % N, (k - n) % N}:
                    h[2 * k:2 * k + 2, 2 * l:2 * l + 2] += b
        return h

    def min_eigenvalue(self, n_grid: int = 512) -> float:
        phi = 2 * np.pi * np.arange(n_grid) / n_grid
        return float(np.min(np.linalg.eigvalsh(self.evaluate(phi))))


@dataclass(frozen=True)
class SpectralFunction:
    h: QuadHamiltonian
    poly_sqrt: np.ndarray | None = None

    def __call__(self, phi) -> np.ndarray:
        det = np.linalg.det(self.h.evaluate(phi))
        return np.sqrt(np.clip(det, 0.0, None))


def parent_hamiltonian(rc: RationalCM, tol: float = 1e-7) -> QuadHamiltonian:
    """``H_hat = [[p, -r], [-r, q]]``, the local Hamiltonian with ground state ``rc``."""
    res = rc.purity_residual()
    if res > tol:
        raise ValueError(f"state is not pure: pq - r^2 - d^2 residual {res:.3g}")
    return QuadHamiltonian(rc.p, rc.q, rc.r)


def spectral_function(h: QuadHamiltonian, with_poly: bool = False) -> SpectralFunction:
    """``E = sqrt(det H_hat)``; ``with_poly`` also tries the polynomial square root."""
    if with_poly:
        res = has_gmps_ground_state(h)
        if res.status == "yes":
            return SpectralFunction(h, res.sqrt_det)
    return SpectralFunction(h)


def ground_state(h: QuadHamiltonian, n_check: int = 512) -> SpectralCM:
    """Ground state ``gamma_hat = sigma H_hat sigma^T / E`` as a function of ``phi``."""
    grid = 2 * np.pi * np.arange(n_check) / n_check
    scale = max(1.0, np.max(np.abs(h.evaluate(grid))))
    if np.min(np.linalg.det(h.evaluate(grid))) <= 1e-12 * scale**2:
        raise CriticalState("H_hat is singular on the grid")
    ef = spectral_function(h)

    def evaluator(phi):
        hh = h.evaluate(phi)
        return SIGMA1 @ hh @ SIGMA1.T / ef(phi)[..., None, None]

    return SpectralCM(evaluator, meta={"range": h.range})


def ground_energy_density(h: QuadHamiltonian) -> float:
    """Ground-state energy per site, ``(1/2pi) int_0^2pi E(phi) dphi``."""
    ef = spectral_function(h)
    if h.min_eigenvalue() < -1e-9:
        raise ValueError("Hamiltonian matrix is not positive semidefinite")
    val, _ = quad(lambda x: float(ef(x)), 0.0, 2 * np.pi, epsabs=0.0, epsrel=1e-12, limit=200)
    return val / (2 * np.pi)


@dataclass(frozen=True)
class ConverseResult:
    """Outcome of :func:`has_gmps_ground_state`.

    ``status`` is ``"yes"``, ``"no"`` or ``"indeterminate"``. For ``"no"`` the
    witness is a zero of ``det H_hat`` (in ``cos phi``) of odd multiplicity;
    ``margin`` is the distance from that zero to its nearest neighbour.
    """

    status: str
    rational: RationalCM | None = None
    witness_root: complex | None = None
    witness_multiplicity: int = 0
    margin: float = np.inf
    sqrt_det: np.ndarray | None = None

    def __bool__(self) -> bool:
        return self.status == "yes"


def _poly_from_roots(lead: float, roots: list[complex]) -> np.ndarray:
    c = np.array([lead], dtype=complex)
    for z in roots:
        c = P.polymul(c, [-z, 1.0])
    return c.real


def _split_radius(det: np.ndarray, z: complex, eta: float) -> float:
    """Expected splitting of a double root at ``z`` under relative coefficient noise ``eta``."""
    noise = eta * np.sum(np.abs(det) * np.abs(z) ** np.arange(len(det)))
    curv = abs(P.polyval(z, P.polyder(det, 2))) / 2
    if curv == 0.0:
        return 0.0
    return 2.0 * np.sqrt(noise / curv)


def _pair_split_roots(det, groups, eta: float = 1e-8):
    """Merge odd-multiplicity clusters that look like one numerically split even root."""
    groups = list(groups)
    while True:
        odd = [k for k, (_, m) in enumerate(groups) if m % 2]
        best = None
        for i in odd:
            for j in odd:
                if j <= i:
                    continue
                zi, zj = groups[i][0], groups[j][0]
                mid = (zi + zj) / 2
                gap = abs(zi - zj)
                if gap <= _split_radius(det, mid, eta) and (best is None or gap < best[0]):
                    best = (gap, i, j)
        if best is None:
            return groups
        _, i, j = best
        (zi, mi), (zj, mj) = groups[i], groups[j]
        merged = ((zi * mi + zj * mj) / (mi + mj), mi + mj)
        groups = [g for k, g in enumerate(groups) if k not in (i, j)] + [merged]


def _polish_sqrt(d: np.ndarray, det: np.ndarray, iters: int = 8) -> tuple[np.ndarray, float]:
    """Gauss-Newton refinement of ``d`` towards ``d^2 = det``; returns ``(d, relative residual)``."""
    scale = np.max(np.abs(det))

    def resid(x):
        out = np.zeros(len(det))
        sq = P.polymul(x, x)
        out[: len(sq)] += sq[: len(det)]
        return det - out

    k = len(d)
    best = (d, np.max(np.abs(resid(d))) / scale)
    for _ in range(iters):
        jac = np.zeros((len(det), k))
        for j in range(k):
            jac[j:j + k, j] = 2 * d
        step = np.linalg.lstsq(jac, resid(d), rcond=None)[0]
        d = d + step
        res = np.max(np.abs(resid(d))) / scale
        if res < best[1]:
            best = (d, res)
        if np.max(np.abs(step)) <= 1e-16 * np.max(np.abs(d)):
            break
    return best


def _greedy_pairs(roots: np.ndarray) -> list[complex] | None:
    """Pair every root with its nearest unpaired neighbour; one root per pair."""
    rest = list(roots)
    half = []
    while rest:
        z = rest.pop(0)
        if not rest:
            return None
        j = int(np.argmin([abs(w - z) for w in rest]))
        half.append((z + rest.pop(j)) / 2)
    return half


def _square_root(det: np.ndarray, half: list[complex]) -> tuple[np.ndarray, float]:
    d = _poly_from_roots(np.sqrt(det[-1]), half)
    d, res = _polish_sqrt(d, det)
    if P.polyval(1.0, d) < 0:
        d = -d
    return d, res


def has_gmps_ground_state(h: QuadHamiltonian, cluster_tol: float = ROOT_CLUSTER,
                          indeterminate_zone: float = 1e-3, verify_tol: float = 1e-8) -> ConverseResult:
    """Is the ground state of ``h`` rational in ``cos phi``, i.e. is ``det H_hat`` a square?

    Roots of ``det H_hat`` (a polynomial in ``c = cos phi``) are clustered; odd
    clusters that sit within the expected numerical splitting of a double root
    are merged. ``"yes"`` additionally requires the polished square root to
    reproduce the coefficients of ``det`` to ``verify_tol``. If odd clusters
    remain, a greedy pairing of all roots may still certify a square to
    ``verify_tol / 100`` (large roots are poorly resolved by the companion
    matrix); otherwise an odd root is reported, ``"indeterminate"`` when it
    lies within ``indeterminate_zone`` (relative) of another root.
    """
    det = _trim(h.det_poly())
    if len(det) == 1:
        if det[0] <= 0:
            return ConverseResult("no", margin=0.0)
        d = np.array([np.sqrt(det[0])])
        return ConverseResult("yes", _induced(h, d), sqrt_det=d)
    lead = det[-1]
    roots = P.polyroots(det)
    groups = _pair_split_roots(det, cluster_roots(roots, cluster_tol))
    odd = [(z, m) for z, m in groups if m % 2]
    if lead <= 0 or odd:
        if not odd:
            return ConverseResult("no", margin=0.0)
        z, m = min(odd, key=lambda t: abs(t[0].imag) + max(0.0, abs(t[0].real) - 1.0))
        others = [abs(w - z) for w in roots if abs(w - z) > cluster_tol * max(1.0, abs(z))]
        margin = min(others, default=np.inf)
        half = _greedy_pairs(roots) if lead > 0 else None
        if half is not None:
            d, res = _square_root(det, half)
            if res <= verify_tol / 100:
                return ConverseResult("yes", _induced(h, d), sqrt_det=d, margin=float(res))
        status = "no" if margin > indeterminate_zone * max(1.0, abs(z)) else "indeterminate"
        return ConverseResult(status, witness_root=complex(z), witness_multiplicity=m, margin=float(margin))
    half = [z for z, m in groups for _ in range(m // 2)]
    d, res = _square_root(det, half)
    if res > verify_tol:
        return ConverseResult("indeterminate", margin=float(res))
    return ConverseResult("yes", _induced(h, d), sqrt_det=d)


def _induced(h: QuadHamiltonian, d: np.ndarray) -> RationalCM:
    s = P.polyval(1.0, d)
    return RationalCM(h.p / s, h.q / s, h.r / s, d / s)
