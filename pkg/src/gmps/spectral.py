"""Fourier-space description of translation-invariant GMPS.

Transforms follow ``A_hat(phi) = sum_n A_n exp(-i n phi)`` with ``A_n`` the
block between sites ``k + n`` and ``k``. For pure maps with one physical mode
the transform is real and even in ``phi`` and can be written as

    gamma_hat(phi) = [[q(c), r(c)], [r(c), p(c)]] / d(c),    c = cos(phi)

with polynomials ``p, q, r, d`` (:class:`RationalCM`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.polynomial import polynomial as P

from .channels import GaussChannel
from .covmat import PINV_RCOND, CriticalState, theta

UNIT_CIRCLE_MARGIN = 1e-8
ROOT_CLUSTER = 1e-6
FIT_TOL = 1e-10


class RationalFitError(ArithmeticError):
    def __init__(self, msg: str, residual: float):
        super().__init__(f"{msg} (residual {residual:.3g})")
        self.residual = residual


@dataclass
class SpectralCM:
    """A ``phi -> 2d x 2d`` Hermitian-matrix valued function."""

    evaluator: Callable[[np.ndarray], np.ndarray]
    M: int | None = None
    meta: dict = field(default_factory=dict)

    def __call__(self, phi) -> np.ndarray:
        return self.evaluator(np.asarray(phi, dtype=float))


def _split_ports(ch: GaussChannel) -> tuple[int, np.ndarray, np.ndarray, np.ndarray]:
    g = ch.entries
    nb = 2 * ch.n_in
    return ch.n_in // 2, g[:nb, :nb], g[:nb, nb:], g[nb:, nb:]


def gamma_hat(ch: GaussChannel, phi) -> np.ndarray:
    """Fourier transform of the GMPS generated by ``ch`` on an infinite ring.

    ``gamma_C - Gamma_C|AB L^+ (L Gamma_AB L^+)^-1 L Gamma_AB|C`` with
    ``L = (1_A, exp(-i phi) theta_B)``. Accepts scalar or array ``phi``;
    returns shape ``phi.shape + (2d, 2d)``.
    """
    M, g_ab, g_abc, g_c = _split_ports(ch)
    phi = np.asarray(phi, dtype=float)
    flat = phi.reshape(-1)
    d2 = g_c.shape[0]
    if M == 0:
        return np.broadcast_to(g_c.astype(complex), phi.shape + (d2, d2)).copy()
    th = theta(M)
    ph = np.exp(-1j * flat)[:, None, None]
    lam = np.concatenate([np.broadcast_to(np.eye(2 * M), (len(flat), 2 * M, 2 * M)), ph * th], axis=2)
    lam_h = np.conj(np.swapaxes(lam, 1, 2))
    mid = lam @ g_ab @ lam_h
    w = np.linalg.eigvalsh(mid)
    bad = w[:, 0] <= PINV_RCOND * max(w[:, -1].max(), np.max(np.abs(g_ab)))
    if bad.any():
        # the merged bond block is singular exactly where d vanishes on the unit circle
        raise CriticalState(f"merged bond block singular at phi = {flat[bad][0]:.6g} "
                            "(denominator zero on the unit circle, distance 0)")
    rhs = lam @ g_abc
    x = np.linalg.solve(mid, rhs)
    out = g_c - np.conj(np.swapaxes(rhs, 1, 2)) @ x
    out = (out + np.conj(np.swapaxes(out, 1, 2))) / 2
    return out.reshape(phi.shape + (d2, d2))


def gamma_hat_function(ch: GaussChannel) -> SpectralCM:
    return SpectralCM(lambda phi: gamma_hat(ch, phi), M=ch.n_in // 2)


def dft_roundtrip(samples) -> np.ndarray:
    """Correlation sequence ``gamma_n`` from samples at ``phi_m = 2 pi m / N``.

    Index ``n`` of the result is the distance ``n mod N``.
    """
    samples = np.asarray(samples)
    if samples.shape[0] < 2:
        raise ValueError("need at least two samples")
    return np.fft.ifft(samples, axis=0)


def dft_forward(seq) -> np.ndarray:
    """Inverse of :func:`dft_roundtrip`."""
    return np.fft.fft(np.asarray(seq), axis=0)


def phi_grid(N: int) -> np.ndarray:
    return 2 * np.pi * np.arange(N) / N


def finite_correlations(ch: GaussChannel, N: int) -> np.ndarray:
    """Blocks ``gamma_{n,0}`` of the ``N``-site ring, via the inverse DFT of gamma_hat."""
    seq = dft_roundtrip(gamma_hat(ch, phi_grid(N)))
    if np.max(np.abs(seq.imag)) > 1e-9 * max(1.0, np.max(np.abs(seq.real))):
        raise ArithmeticError("correlation sequence is not real")
    return seq.real


# --------------------------------------------------------------------------
# polynomial helpers


def _trim(c: np.ndarray, rel: float = 1e-13) -> np.ndarray:
    c = np.asarray(c, dtype=float)
    top = np.max(np.abs(c), initial=0.0)
    if top == 0.0:
        return np.zeros(1)
    nz = np.flatnonzero(np.abs(c) > rel * top)
    return c[: nz[-1] + 1]


def degree(c) -> int:
    t = _trim(c)
    return 0 if len(t) == 1 and t[0] == 0 else len(t) - 1


def to_z(coeffs, K: int) -> np.ndarray:
    """Coefficients (ascending in ``z``) of ``z^K s((z + 1/z) / 2)``."""
    out = np.zeros(2 * K + 1, dtype=complex)
    for k, ck in enumerate(coeffs):
        if ck == 0:
            continue
        if k > K:
            raise ValueError(f"K = {K} too small for degree {k}")
        term = P.polypow([1.0, 0.0, 1.0], k) * (ck / 2.0**k)
        out[K - k:K - k + len(term)] += term
    return out


def cluster_roots(roots, tol: float = ROOT_CLUSTER) -> list[tuple[complex, int]]:
    """Group numerically split multiple roots; returns ``(centroid, multiplicity)``."""
    left = list(np.asarray(roots, dtype=complex))
    out = []
    while left:
        z = left.pop(0)
        group = [z]
        changed = True
        while changed:
            changed = False
            c = np.mean(group)
            for w in list(left):
                if abs(w - c) <= tol * max(1.0, abs(c)):
                    group.append(w)
                    left.remove(w)
                    changed = True
        out.append((complex(np.mean(group)), len(group)))
    return out


def _shift_taylor(coeffs, z0: complex, order: int) -> np.ndarray:
    """Taylor coefficients of a polynomial around ``z0`` up to ``order``."""
    c = np.asarray(coeffs, dtype=complex)
    out = np.zeros(order + 1, dtype=complex)
    d = c.copy()
    for j in range(order + 1):
        if len(d) == 0:
            break
        out[j] = P.polyval(z0, d) / math.factorial(j)
        d = P.polyder(d)
    return out


def _series_div(num: np.ndarray, den: np.ndarray, order: int) -> np.ndarray:
    out = np.zeros(order + 1, dtype=complex)
    for j in range(order + 1):
        acc = num[j] - sum(out[i] * den[j - i] for i in range(j))
        out[j] = acc / den[0]
    return out


@dataclass(frozen=True)
class ZPoly:
    """``z^K s((z + 1/z)/2)`` together with its clustered zeros."""

    coeffs: np.ndarray
    K: int
    zeros: tuple[tuple[complex, int], ...]
    lead: complex

    @classmethod
    def from_cos_poly(cls, c, K: int | None = None) -> ZPoly:
        c = _trim(c)
        if K is None:
            K = len(c) - 1
        z = to_z(c, K)
        zt = _trim(np.abs(z))
        top = len(zt) - 1
        coeffs = z[: top + 1]
        if top == 0:
            return cls(coeffs, K, (), coeffs[0])
        low = np.flatnonzero(np.abs(coeffs) > 1e-13 * np.max(np.abs(coeffs)))[0]
        roots = list(P.polyroots(coeffs[low:])) + [0.0] * low
        return cls(coeffs, K, tuple(cluster_roots(roots)), coeffs[-1])


@dataclass(frozen=True)
class RationalCM:
    """``gamma_hat = [[q, r], [r, p]] / d`` with ascending power coefficients in ``cos phi``."""

    p: np.ndarray
    q: np.ndarray
    r: np.ndarray
    d: np.ndarray
    residual: float = 0.0
    critical: bool = False

    def __post_init__(self):
        L = max(len(self.p), len(self.q), len(self.r), len(self.d)) - 1
        for name in "pqrd":
            c = np.zeros(L + 1)
            v = np.asarray(getattr(self, name), dtype=float)
            c[: len(v)] = v
            c.setflags(write=False)
            object.__setattr__(self, name, c)

    @property
    def L(self) -> int:
        return len(self.d) - 1

    def component(self, s: str) -> np.ndarray:
        if s not in ("p", "q", "r"):
            raise ValueError(f"component must be one of p, q, r, got {s!r}")
        return getattr(self, s)

    def evaluate(self, phi) -> np.ndarray:
        c = np.cos(np.asarray(phi, dtype=float))
        q, r, p, d = (P.polyval(c, x) for x in (self.q, self.r, self.p, self.d))
        return np.stack([np.stack([q, r], -1), np.stack([r, p], -1)], -2) / d[..., None, None]

    def purity_residual(self) -> float:
        """``max |pq - r^2 - d^2|`` coefficient-wise, relative to the largest coefficient."""
        diff = P.polysub(P.polysub(P.polymul(self.p, self.q), P.polymul(self.r, self.r)), P.polymul(self.d, self.d))
        scale = max(np.max(np.abs(c)) for c in (self.p, self.q, self.r, self.d)) ** 2
        return float(np.max(np.abs(diff)) / scale)

    def spectral(self) -> SpectralCM:
        return SpectralCM(self.evaluate, meta={"L": self.L})


def _cheb_nodes(n: int) -> np.ndarray:
    return np.cos((2 * np.arange(n) + 1) * np.pi / (2 * n))


def _fit(values_fn, L: int) -> RationalCM:
    n = 4 * L + 4
    c = _cheb_nodes(n)
    g = values_fn(np.arccos(c))
    V = np.vander(c, L + 1, increasing=True)
    zero = np.zeros_like(V)
    rows = []
    for (i, j), slot in (((0, 0), 0), ((1, 1), 1), ((0, 1), 2)):
        blocks = [zero, zero, zero, -g[:, i, j, None] * V]
        blocks[slot] = V
        rows.append(np.hstack(blocks))
    A = np.vstack(rows)
    _, _, vt = np.linalg.svd(A)
    x = vt[-1]
    q, p, r, d = np.split(x, 4)
    scale = np.sum(d)
    return RationalCM(p / scale, q / scale, r / scale, d / scale)


def rationalize_function(values_fn, L_max: int, tol: float = FIT_TOL, n_check: int = 64) -> RationalCM:
    """Smallest-degree rational representation of a real 2x2 function of ``phi``.

    ``values_fn`` maps an array of angles to real ``(.., 2, 2)`` matrices.
    """
    check = (np.arange(n_check) + 0.37) * np.pi / n_check
    ref = values_fn(check)
    scale = max(1.0, np.max(np.abs(ref)))
    best = None
    for L in range(L_max + 1):
        rc = _fit(values_fn, L)
        res = float(np.max(np.abs(rc.evaluate(check) - ref)))
        rc = RationalCM(rc.p, rc.q, rc.r, rc.d, residual=res)
        if best is None or res < best.residual:
            best = rc
        if res <= tol * scale:
            return rc
    if best.residual > 1e-7 * scale:
        raise RationalFitError(f"no rational fit of degree <= {L_max}", best.residual)
    return best


def rationalize(ch: GaussChannel, M: int | None = None, tol: float = FIT_TOL) -> RationalCM:
    """Rational-in-``cos phi`` form of ``gamma_hat`` for a pure one-mode map."""
    if ch.n_out != 1:
        raise ValueError("rational form needs exactly one physical mode per site")
    if M is None:
        M = ch.n_in // 2

    def values(phi):
        g = gamma_hat(ch, phi)
        if np.max(np.abs(g.imag)) > 1e-9 * max(1.0, np.max(np.abs(g.real))):
            raise ValueError("gamma_hat is not real; is the map pure?")
        return g.real

    rc = rationalize_function(values, 2 * M + 1, tol)
    if np.any(P.polyval(np.linspace(-1, 1, 201), rc.d) <= 0):
        rc = RationalCM(rc.p, rc.q, rc.r, rc.d, rc.residual, critical=True)
    return rc


# --------------------------------------------------------------------------
# infinite-chain correlations


def _denominator(rc: RationalCM, K: int) -> ZPoly:
    return ZPoly.from_cos_poly(rc.d, K)


def _check_critical(zeros) -> float:
    dist = min((abs(abs(z) - 1.0) for z, _ in zeros), default=np.inf)
    if dist < UNIT_CIRCLE_MARGIN:
        raise CriticalState(f"denominator has a zero at distance {dist:.3g} from the unit circle")
    return dist


def _residue(num_taylor_fn, zeros, lead, z0, nu) -> complex:
    """Residue at ``z0`` (order ``nu``) of ``num / (lead prod (z - z_j)^nu_j)``."""
    order = nu - 1
    den = np.zeros(order + 1, dtype=complex)
    den[0] = lead
    for zj, nj in zeros:
        if zj == z0:
            continue
        factor = np.zeros(order + 1, dtype=complex)
        factor[0] = z0 - zj
        if order >= 1:
            factor[1] = 1.0
        for _ in range(nj):
            den = P.polymul(den, factor)[: order + 1]
    num = num_taylor_fn(z0, order)
    return _series_div(num, den, order)[order]


def correlations_infinite(rc: RationalCM, component: str, n) -> np.ndarray | float:
    """Real-space correlations ``(gamma_s)_n`` of the infinite chain by residues.

    Sums the residues of ``s~(z) z^(n-1) / d~(z)`` over the poles inside the
    unit circle; ``n = 0`` picks up the extra pole at ``z = 0``.
    """
    s = _trim(rc.component(component))
    dc = _trim(rc.d)
    K = max(len(s), len(dc)) - 1
    st = to_z(s, K)
    den = _denominator(rc, K)
    _check_critical([(z, m) for z, m in den.zeros if abs(z) > 1e-12])
    inside = [(z, m) for z, m in den.zeros if abs(z) < 1.0]
    ns = np.atleast_1d(np.abs(np.asarray(n, dtype=int)))
    out = np.zeros(len(ns))
    for k, nn in enumerate(ns):
        if nn >= 1:
            zeros, poles = den.zeros, inside

            def num(z0, order, nn=nn):
                a = _shift_taylor(st, z0, order)
                b = np.array([math.comb(nn - 1, j) * z0 ** (nn - 1 - j) if j <= nn - 1 else 0.0
                              for j in range(order + 1)], dtype=complex)
                return P.polymul(a, b)[: order + 1]
        else:
            zeros = _add_zero(den.zeros)
            poles = [(z, m) for z, m in zeros if abs(z) < 1.0]

            def num(z0, order):
                return _shift_taylor(st, z0, order)
        total = sum(_residue(num, zeros, den.lead, z0, nu) for z0, nu in poles)
        total = complex(total)
        if abs(total.imag) > 1e-9 * max(1.0, abs(total.real)):
            raise ArithmeticError(f"residue sum not real: {total}")
        out[k] = total.real
    return out if np.ndim(n) else float(out[0])


def _add_zero(zeros):
    zeros = list(zeros)
    for k, (z, m) in enumerate(zeros):
        if abs(z) <= 1e-12:
            zeros[k] = (0.0 + 0.0j, m + 1)
            return zeros
    return zeros + [(0.0 + 0.0j, 1)]


@dataclass(frozen=True)
class CorrelationLength:
    xi: float
    z_star: complex
    multiplicity: int
    unit_circle_distance: float


def correlation_length(rc: RationalCM) -> CorrelationLength:
    """``xi = -1 / ln|z*|`` for the largest zero ``z*`` of ``d~`` inside the unit circle."""
    den = ZPoly.from_cos_poly(rc.d)
    zeros = [(z, m) for z, m in den.zeros if abs(z) > 1e-12]
    dist = _check_critical(zeros)
    inside = [(z, m) for z, m in zeros if abs(z) < 1.0]
    if not inside:
        return CorrelationLength(0.0, 0j, 0, float(dist))
    z, m = max(inside, key=lambda t: abs(t[0]))
    return CorrelationLength(float(-1.0 / np.log(abs(z))), complex(z), m, float(dist))
