"""Gaussian channels stored as Jamiolkowski covariance matrices.

A channel from ``n_in`` to ``n_out`` modes is the state obtained by sending one
half of ``n_in`` EPR pairs through it. Input ports come first in the stored
matrix, output ports after them. Channels act on states through the
Schur complement of the merged input block.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .covmat import (
    CovMat,
    CriticalWarning,
    _inverse,
    as_array,
    collapse_epr,
    direct_sum,
    purity,
    symplectic_form,
    theta,
    validate_state,
)

S_REG = 10.0


@dataclass(frozen=True)
class GaussChannel:
    n_in: int
    n_out: int
    cm: CovMat
    pure: bool = False
    regularized: bool = False
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        cm = self.cm if isinstance(self.cm, CovMat) else CovMat(self.cm)
        object.__setattr__(self, "cm", cm.interleaved())
        if cm.n_modes != self.n_in + self.n_out:
            raise ValueError(f"channel CM has {cm.n_modes} modes, expected {self.n_in} + {self.n_out}")

    @classmethod
    def from_cm(cls, cm, n_in: int, **kw) -> GaussChannel:
        """Wrap a CM, detecting purity."""
        cm = cm if isinstance(cm, CovMat) else CovMat(cm)
        pure = purity(cm).pure
        return cls(n_in, cm.n_modes - n_in, cm, pure=pure, **kw)

    @property
    def entries(self) -> np.ndarray:
        return self.cm.entries


@dataclass(frozen=True)
class SymplecticOp:
    S: np.ndarray

    def __post_init__(self):
        s = np.array(self.S, dtype=float)
        if s.ndim != 2 or s.shape[0] != s.shape[1] or s.shape[0] % 2:
            raise ValueError(f"symplectic matrix must be 2n x 2n, got {s.shape}")
        s.setflags(write=False)
        object.__setattr__(self, "S", s)

    @property
    def n_modes(self) -> int:
        return self.S.shape[0] // 2

    def residual(self) -> float:
        sig = symplectic_form(self.n_modes)
        return float(np.max(np.abs(self.S @ sig @ self.S.T - sig)))

    def is_symplectic(self, tol: float = 1e-10) -> bool:
        return self.residual() <= tol * max(1.0, np.max(np.abs(self.S))) ** 2

    @classmethod
    def from_generator(cls, h, t: float = 1.0) -> SymplecticOp:
        """``exp(t sigma H)`` for a real symmetric generator ``H``."""
        h = np.asarray(h, dtype=float)
        return cls(expm(t * symplectic_form(h.shape[0] // 2) @ h))


def tms_state(s: float) -> CovMat:
    """Two-mode squeezed vacuum with squeezing ``s`` (pure, 2 modes)."""
    if s < 0:
        raise ValueError("squeezing must be non-negative")
    c, sh = np.cosh(2 * s), np.sinh(2 * s)
    z = np.diag([1.0, -1.0])
    return CovMat(np.block([[c * np.eye(2), sh * z], [sh * z, c * np.eye(2)]]))


def apply_channel(ch: GaussChannel, gamma_in) -> CovMat:
    """Output ``Gamma_C - Gamma_CB (Gamma_B + theta gamma theta)^-1 Gamma_BC``.

    Evaluated directly from the block formula; :func:`collapse_epr` on
    ``gamma_in (+) Gamma`` gives the same matrix and serves as a cross-check.
    """
    g = as_array(gamma_in)
    n = g.shape[0] // 2
    if n != ch.n_in:
        raise ValueError(f"channel takes {ch.n_in} modes, state has {n}")
    G = ch.entries
    k = 2 * n
    th = theta(n)
    merged = G[:k, :k] + th @ g @ th
    inv, singular = _inverse(merged)
    if singular:
        warnings.warn("singular merged block in channel application", CriticalWarning, stacklevel=2)
        x = inv @ G[:k, k:]
    else:
        x = np.linalg.solve(merged, G[:k, k:])
    out = G[k:, k:] - G[k:, :k] @ x
    crit = singular or ch.cm.critical or (isinstance(gamma_in, CovMat) and gamma_in.critical)
    return CovMat((out + out.T) / 2, critical=crit)


def apply_symplectic(op: SymplecticOp | np.ndarray, gamma) -> CovMat:
    """Congruence ``S gamma S^T``."""
    op = op if isinstance(op, SymplecticOp) else SymplecticOp(op)
    g = as_array(gamma)
    if op.S.shape != g.shape:
        raise ValueError(f"dimension mismatch: S {op.S.shape}, gamma {g.shape}")
    if not op.is_symplectic():
        raise ValueError(f"matrix is not symplectic (residual {op.residual():.3g})")
    out = op.S @ g @ op.S.T
    return CovMat((out + out.T) / 2, critical=isinstance(gamma, CovMat) and gamma.critical)


def channel_compose(ch2: GaussChannel, ch1: GaussChannel) -> GaussChannel:
    """Jamiolkowski CM of ``ch2 o ch1`` (``ch1`` acts first)."""
    if ch1.n_out != ch2.n_in:
        raise ValueError(f"cannot compose: {ch1.n_out} outputs into {ch2.n_in} inputs")
    total = direct_sum(ch1.cm, ch2.cm)
    c1 = range(ch1.n_in, ch1.n_in + ch1.n_out)
    b2 = range(ch1.n_in + ch1.n_out, ch1.n_in + ch1.n_out + ch2.n_in)
    out = collapse_epr(total, c1, b2)
    crit = out.critical or ch1.cm.critical or ch2.cm.critical
    return GaussChannel(
        ch1.n_in,
        ch2.n_out,
        CovMat(out.entries, critical=crit),
        pure=ch1.pure and ch2.pure and not crit,
        regularized=ch1.regularized or ch2.regularized,
    )


def epr_state(s: float) -> CovMat:
    """Finite-squeezing version of the state :func:`collapse_epr` projects onto.

    Same as :func:`tms_state` with the second mode rotated by pi, so that
    correlations read ``x_1 = -x_2``, ``p_1 = p_2`` in the large ``s`` limit.
    Teleporting through this resource is the identity (``tms_state`` gives a
    pi phase rotation instead, invisible on single-mode inputs).
    """
    flip = np.diag([1.0, 1.0, -1.0, -1.0])
    return CovMat(flip @ as_array(tms_state(s)) @ flip)


def identity_channel(n: int = 1, s_reg: float = S_REG) -> GaussChannel:
    """Regularized identity: ``n`` EPR pairs at squeezing ``s_reg``."""
    t = as_array(epr_state(s_reg))
    cm = np.zeros((4 * n, 4 * n))
    for k in range(n):
        b, c = 2 * k, 2 * (n + k)
        for i, gi in enumerate((b, c)):
            for j, gj in enumerate((b, c)):
                cm[gi:gi + 2, gj:gj + 2] = t[2 * i:2 * i + 2, 2 * j:2 * j + 2]
    return GaussChannel(n, n, CovMat(cm), pure=True, regularized=True)


def channel_from_symplectic(op: SymplecticOp | np.ndarray, s_reg: float = S_REG) -> GaussChannel:
    """Regularized Jamiolkowski CM of the unitary channel ``S``."""
    op = op if isinstance(op, SymplecticOp) else SymplecticOp(op)
    n = op.n_modes
    ident = identity_channel(n, s_reg)
    s_full = np.eye(4 * n)
    s_full[2 * n:, 2 * n:] = op.S
    cm = apply_symplectic(s_full, ident.cm)
    return GaussChannel(n, n, cm, pure=True, regularized=True)


def vacuum_channel(n_in: int, n_out: int = 1) -> GaussChannel:
    """Constant channel that discards its input and outputs the vacuum."""
    return GaussChannel(n_in, n_out, CovMat(np.eye(2 * (n_in + n_out))), pure=True)


def random_symplectic(n: int, rng: np.random.Generator, scale: float = 0.5) -> np.ndarray:
    """``exp(sigma H)`` for a random symmetric ``H`` with entries of size ``scale``."""
    a = rng.normal(size=(2 * n, 2 * n)) * scale
    return expm(symplectic_form(n) @ (a + a.T) / 2)


def random_pure_state(n: int, rng: np.random.Generator, scale: float = 0.5) -> np.ndarray:
    s = random_symplectic(n, rng, scale)
    g = s @ s.T
    return (g + g.T) / 2


def random_mixed_state(n: int, rng: np.random.Generator, scale: float = 0.5) -> np.ndarray:
    """Random valid state: a pure state plus positive classical noise."""
    g = random_pure_state(n, rng, scale)
    x = rng.normal(size=(2 * n, 2 * n)) * scale
    return g + x @ x.T


def random_pure_channel(n_in: int, n_out: int, rng: np.random.Generator, scale: float = 0.5) -> GaussChannel:
    cm = random_pure_state(n_in + n_out, rng, scale)
    return GaussChannel(n_in, n_out, CovMat(cm), pure=True)


def random_channel(n_in: int, n_out: int, rng: np.random.Generator, scale: float = 0.5) -> GaussChannel:
    cm = random_mixed_state(n_in + n_out, rng, scale)
    assert validate_state(cm).valid
    return GaussChannel(n_in, n_out, CovMat(cm), pure=False)
