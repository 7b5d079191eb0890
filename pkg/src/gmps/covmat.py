"""Covariance-matrix primitives for zero-mean Gaussian states.

Conventions: the single-mode vacuum has covariance matrix ``identity``, the
canonical ordering is interleaved ``(Q1, P1, ..., Qn, Pn)`` and the symplectic
form is the direct sum of ``[[0, 1], [-1, 0]]``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np
from scipy.linalg import schur as real_schur

TOL_SYM = 1e-12
TOL_PSD = 1e-9
TOL_PURE = 1e-8
PINV_RCOND = 1e-10

INTERLEAVED = "interleaved"
BLOCKED = "blocked"


class CriticalWarning(RuntimeWarning):
    """A Schur complement needed a pseudo-inverse (diverging correlations)."""


class CriticalState(ArithmeticError):
    """Raised when an operation is undefined for a critical state."""


def _interleaved_to_blocked_perm(n: int) -> np.ndarray:
    return np.concatenate([np.arange(0, 2 * n, 2), np.arange(1, 2 * n, 2)])


@dataclass(frozen=True)
class CovMat:
    """Covariance matrix of an ``n_modes`` Gaussian state.

    ``entries`` is stored read-only. ``critical`` records that some Schur
    complement on the way here fell back to a pseudo-inverse.
    """

    entries: np.ndarray
    ordering: str = INTERLEAVED
    critical: bool = False
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        a = np.array(self.entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] % 2:
            raise ValueError(f"covariance matrix must be 2n x 2n, got shape {a.shape}")
        if self.ordering not in (INTERLEAVED, BLOCKED):
            raise ValueError(f"unknown ordering {self.ordering!r}")
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @property
    def n_modes(self) -> int:
        return self.entries.shape[0] // 2

    def interleaved(self) -> CovMat:
        if self.ordering == INTERLEAVED:
            return self
        perm = np.argsort(_interleaved_to_blocked_perm(self.n_modes))
        return CovMat(self.entries[np.ix_(perm, perm)], INTERLEAVED, self.critical, dict(self.meta))

    def blocked(self) -> CovMat:
        if self.ordering == BLOCKED:
            return self
        perm = _interleaved_to_blocked_perm(self.n_modes)
        return CovMat(self.entries[np.ix_(perm, perm)], BLOCKED, self.critical, dict(self.meta))

    def modes(self, idx: Iterable[int]) -> np.ndarray:
        """Reduced (interleaved) covariance matrix of the listed modes."""
        sel = mode_indices(idx)
        return self.interleaved().entries[np.ix_(sel, sel)]

    def __array__(self, dtype=None, copy=None):
        a = self.interleaved().entries
        return a.astype(dtype) if dtype is not None else a


def as_array(gamma) -> np.ndarray:
    """Interleaved ndarray view of a CovMat or array-like."""
    if isinstance(gamma, CovMat):
        return gamma.interleaved().entries
    a = np.asarray(gamma, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] % 2:
        raise ValueError(f"covariance matrix must be 2n x 2n, got shape {a.shape}")
    return a


def _is_critical(gamma) -> bool:
    return isinstance(gamma, CovMat) and gamma.critical


def mode_indices(modes: Iterable[int]) -> np.ndarray:
    """Interleaved row indices ``(2k, 2k+1)`` of the listed modes."""
    modes = np.asarray(list(modes), dtype=int)
    return np.stack([2 * modes, 2 * modes + 1], axis=1).reshape(-1)


def direct_sum(*mats) -> np.ndarray:
    """Block-diagonal direct sum of covariance matrices (interleaved)."""
    arrays = [as_array(m) for m in mats]
    size = sum(a.shape[0] for a in arrays)
    out = np.zeros((size, size))
    k = 0
    for a in arrays:
        m = a.shape[0]
        out[k:k + m, k:k + m] = a
        k += m
    return out


def symplectic_form(n: int, ordering: str = INTERLEAVED) -> np.ndarray:
    """The ``2n x 2n`` symplectic form for ``n`` modes."""
    if n < 1:
        raise ValueError("need at least one mode")
    sigma = np.kron(np.eye(n), np.array([[0.0, 1.0], [-1.0, 0.0]]))
    if ordering == BLOCKED:
        perm = _interleaved_to_blocked_perm(n)
        sigma = sigma[np.ix_(perm, perm)]
    elif ordering != INTERLEAVED:
        raise ValueError(f"unknown ordering {ordering!r}")
    return sigma


def theta(n: int) -> np.ndarray:
    """Partial transposition ``diag(1, -1)`` on each of ``n`` modes."""
    return np.diag(np.tile([1.0, -1.0], n))


class StateCheck(NamedTuple):
    valid: bool
    min_eigenvalue: float


class PurityCheck(NamedTuple):
    pure: bool
    det: float
    square_residual: float


def validate_state(gamma, tol: float = TOL_PSD) -> StateCheck:
    """Check the uncertainty relation ``gamma + i sigma >= 0``."""
    a = as_array(gamma)
    if np.max(np.abs(a - a.T), initial=0.0) > TOL_SYM * max(1.0, np.max(np.abs(a))):
        raise ValueError("covariance matrix is not symmetric")
    sigma = symplectic_form(a.shape[0] // 2)
    ev = np.linalg.eigvalsh(a + 1j * sigma)
    lo = float(ev[0])
    return StateCheck(lo >= -tol, lo)


def purity(gamma, tol: float = TOL_PURE) -> PurityCheck:
    """Test ``det gamma = 1`` and ``(sigma gamma)^2 = -1``.

    For valid states the two are equivalent (``det = prod nu_k^2``); both are
    reported so that round-off in either shows up.
    """
    a = as_array(gamma)
    check = validate_state(a)
    if not check.valid:
        raise ValueError(f"not a valid state (min eigenvalue {check.min_eigenvalue:.3g})")
    sigma = symplectic_form(a.shape[0] // 2)
    sg = sigma @ a
    res = float(np.max(np.abs(sg @ sg + np.eye(len(a)))))
    det = float(np.linalg.det(a))
    # (sigma gamma)^2 carries squared entries; scale the tolerance accordingly
    tol_sq = tol * max(1.0, np.max(np.abs(a))) ** 2 * 100
    return PurityCheck(abs(det - 1.0) <= tol and res <= tol_sq, det, res)


def _inverse(block: np.ndarray) -> tuple[np.ndarray, bool]:
    """Thresholded pseudo-inverse of a singular symmetric block, ``None`` if regular."""
    w, v = np.linalg.eigh((block + block.T) / 2)
    top = np.max(np.abs(w), initial=0.0)
    if top == 0.0:
        return np.zeros_like(block), True
    small = np.abs(w) <= PINV_RCOND * top
    if not small.any():
        return None, False
    inv_w = np.where(small, 0.0, 1.0 / np.where(small, 1.0, w))
    return (v * inv_w) @ v.T, True


def _schur(m: np.ndarray, x: np.ndarray) -> tuple[np.ndarray, bool]:
    n = m.shape[0]
    mask = np.zeros(n, dtype=bool)
    mask[x] = True
    y = np.flatnonzero(~mask)
    x = np.flatnonzero(mask)
    if len(x) == 0:
        return m[np.ix_(y, y)], False
    mxx = m[np.ix_(x, x)]
    myx = m[np.ix_(y, x)]
    inv, critical = _inverse(mxx)
    if critical:
        out = m[np.ix_(y, y)] - myx @ inv @ m[np.ix_(x, y)]
    else:
        out = m[np.ix_(y, y)] - myx @ np.linalg.solve(mxx, m[np.ix_(x, y)])
    return (out + out.T) / 2, critical


def schur_complement(m, x: Sequence[int]) -> np.ndarray:
    """Schur complement ``M_YY - M_YX M_XX^{-1} M_XY`` of the rows/cols ``x``.

    ``x`` holds plain row indices (not modes). A singular ``M_XX`` is replaced
    by its eigenvalue-thresholded pseudo-inverse and a :class:`CriticalWarning`
    is emitted.
    """
    m = np.asarray(m, dtype=float)
    out, critical = _schur(m, np.asarray(x, dtype=int))
    if critical:
        warnings.warn("singular block in Schur complement, used pseudo-inverse", CriticalWarning, stacklevel=2)
    return out


def partial_transpose(gamma, modes: Iterable[int]) -> CovMat:
    """Flip the sign of the P rows and columns of ``modes``."""
    a = as_array(gamma)
    n = a.shape[0] // 2
    modes = list(modes)
    if any(k < 0 or k >= n for k in modes):
        raise IndexError(f"mode index out of range for {n} modes: {modes}")
    flip = np.ones(2 * n)
    flip[[2 * k + 1 for k in modes]] = -1.0
    return CovMat(a * np.outer(flip, flip), critical=_is_critical(gamma))


def _collapse_matrix(n: int, a: Sequence[int], b: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
    """Linear map merging modes ``a[k] + theta b[k]`` and keeping the rest.

    Returns the map (merged rows first) and the kept mode labels.
    """
    rest = [k for k in range(n) if k not in set(a) | set(b)]
    rows = len(a) + len(rest)
    pi = np.zeros((2 * rows, 2 * n))
    for j, (ka, kb) in enumerate(zip(a, b)):
        pi[2 * j, 2 * ka] = 1.0
        pi[2 * j + 1, 2 * ka + 1] = 1.0
        pi[2 * j, 2 * kb] += 1.0
        pi[2 * j + 1, 2 * kb + 1] -= 1.0
    for j, k in enumerate(rest, start=len(a)):
        pi[2 * j, 2 * k] = 1.0
        pi[2 * j + 1, 2 * k + 1] = 1.0
    return pi, np.array(rest, dtype=int)


def collapse_epr(gamma, a: Sequence[int], b: Sequence[int]) -> CovMat:
    """Project mode pairs ``(a[k], b[k])`` onto ideal EPR states.

    Partially transposes ``b``, adds the ``a`` and ``b`` entries into one merged
    block and takes the Schur complement of that block. The result is the
    covariance matrix of the remaining modes, in their original order.
    """
    g = as_array(gamma)
    n = g.shape[0] // 2
    a, b = list(a), list(b)
    if len(a) != len(b):
        raise ValueError("mode sets to collapse must have equal size")
    if set(a) & set(b) or len(set(a)) != len(a) or len(set(b)) != len(b):
        raise ValueError("mode sets to collapse must be disjoint and repetition free")
    if any(k < 0 or k >= n for k in a + b):
        raise IndexError("mode index out of range")
    pi, _ = _collapse_matrix(n, a, b)
    u = pi @ g @ pi.T
    out, critical = _schur(u, np.arange(2 * len(a)))
    if critical:
        warnings.warn("singular merged block in EPR collapse", CriticalWarning, stacklevel=2)
    return CovMat(out, critical=critical or _is_critical(gamma))


@dataclass(frozen=True)
class XYDecomposition:
    """Pure state in Q-P block form ``(X, XY; YX, X^-1 + YXY)``."""

    X: np.ndarray
    Y: np.ndarray
    point_symmetric: bool

    def reassemble(self) -> np.ndarray:
        """Blocked-ordering covariance matrix rebuilt from ``X`` and ``Y``."""
        x, y = self.X, self.Y
        xy = x @ y
        return np.block([[x, xy], [y @ x, np.linalg.inv(x) + y @ x @ y]])


def xy_decompose(gamma, tol: float = TOL_PURE) -> XYDecomposition:
    if not purity(gamma, tol).pure:
        raise ValueError("xy_decompose needs a pure state")
    g = CovMat(as_array(gamma)).blocked().entries
    n = g.shape[0] // 2
    gq, gqp = g[:n, :n], g[:n, n:]
    y = np.linalg.solve(gq, gqp)
    scale = max(1.0, np.max(np.abs(gqp)))
    return XYDecomposition(gq.copy(), y, bool(np.max(np.abs(gqp - gqp.T)) <= 1e3 * tol * scale))


def williamson(gamma) -> tuple[np.ndarray, np.ndarray]:
    """Williamson normal form ``gamma = S diag(nu_k, nu_k) S^T``.

    Returns the symplectic eigenvalues ``nu`` (ascending) and the symplectic
    matrix ``S`` (interleaved ordering).
    """
    a = as_array(gamma)
    n = a.shape[0] // 2
    w, v = np.linalg.eigh(a)
    if w[0] <= 0:
        raise ValueError("Williamson form needs a positive definite matrix")
    half = (v * np.sqrt(w)) @ v.T
    mhalf = (v / np.sqrt(w)) @ v.T
    k = mhalf @ symplectic_form(n) @ mhalf
    t, o = real_schur(k, output="real")
    # pick out the 2x2 blocks, orient them as [[0, t], [-t, 0]] with t > 0
    order = []
    for j in range(n):
        tj = t[2 * j, 2 * j + 1]
        if tj < 0:
            o[:, [2 * j, 2 * j + 1]] = o[:, [2 * j + 1, 2 * j]]
            tj = -tj
        order.append(tj)
    nu = 1.0 / np.array(order)
    idx = np.argsort(nu)
    cols = mode_indices(idx)
    o = o[:, cols]
    nu = nu[idx]
    s = half @ o @ np.diag(np.repeat(1.0 / np.sqrt(nu), 2))
    return nu, s


def symplectic_eigenvalues(gamma) -> np.ndarray:
    """Moduli of the eigenvalues of ``i sigma gamma`` (each listed once), ascending."""
    a = as_array(gamma)
    ev = np.abs(np.linalg.eigvals(1j * symplectic_form(a.shape[0] // 2) @ a))
    return np.sort(ev)[::2]


def entropy(nu) -> float:
    """Von Neumann entropy (nats) of a state with symplectic eigenvalues ``nu``."""
    total = 0.0
    for x in np.atleast_1d(nu):
        if x <= 1.0 + 1e-12:
            continue
        hp, hm = (x + 1) / 2, (x - 1) / 2
        total += hp * np.log(hp) - hm * np.log(hm)
    return float(total)
