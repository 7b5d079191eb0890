"""Physical covariance matrix of a finite GMPS chain.

Every site carries a map ``Gamma`` over ports ``A`` (M modes, bond to the left),
``B`` (M modes, bond to the right) and ``C`` (physical modes). Neighbouring
sites are glued by projecting ``A_{i+1}`` and ``B_i`` onto EPR states, which
amounts to one linear map ``Pi`` followed by a Schur complement.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .channels import GaussChannel
from .covmat import CovMat, _schur, purity

PERIODIC = "periodic"
OPEN = "open"


@dataclass(frozen=True)
class GmpsSpec:
    """Site maps, bond count and boundary condition of a 1D GMPS.

    ``open_ports`` chooses what happens to the unmatched ports of an open
    chain: ``"trace"`` discards them, ``"vacuum"`` projects them onto the
    vacuum (which keeps pure maps pure).
    """

    sites: tuple[GaussChannel, ...]
    M: int
    boundary: str = PERIODIC
    open_ports: str = "trace"
    bond_squeezing: tuple[float, ...] | None = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "sites", tuple(self.sites))
        if self.boundary not in (PERIODIC, OPEN):
            raise ValueError(f"unknown boundary {self.boundary!r}")
        if self.open_ports not in ("trace", "vacuum"):
            raise ValueError(f"unknown open-port treatment {self.open_ports!r}")
        if not self.sites:
            raise ValueError("need at least one site")
        d = self.sites[0].n_out
        for k, ch in enumerate(self.sites):
            if ch.n_in != 2 * self.M:
                raise ValueError(f"site {k}: map has {ch.n_in} input ports, expected 2M = {2 * self.M}")
            if ch.n_out != d:
                raise ValueError(f"site {k}: {ch.n_out} physical modes, site 0 has {d}")

    @classmethod
    def uniform(cls, ch: GaussChannel, N: int, M: int | None = None, **kw) -> GmpsSpec:
        if M is None:
            M = ch.n_in // 2
        return cls(tuple([ch] * N), M, **kw)

    @property
    def N(self) -> int:
        return len(self.sites)

    @property
    def d_phys(self) -> int:
        return self.sites[0].n_out

    @property
    def translation_invariant(self) -> bool:
        first = self.sites[0].entries
        return all(np.array_equal(ch.entries, first) for ch in self.sites[1:])


@dataclass(frozen=True)
class PiMatrix:
    """Sparse map from site-major ``A B C`` ports onto merged ``A'`` then ``C``.

    ``n_merged`` rows-of-modes come first. ``vacuum_rows`` lists merged modes
    that stand for ports projected onto the vacuum; ``discarded`` lists the
    input modes that are dropped (open chains).
    """

    matrix: sp.csr_matrix
    n_merged: int
    n_out: int
    discarded: tuple[int, ...] = ()
    vacuum_rows: tuple[int, ...] = ()


def _port_modes(i: int, M: int, d: int) -> tuple[range, range, range]:
    base = i * (2 * M + d)
    return range(base, base + M), range(base + M, base + 2 * M), range(base + 2 * M, base + 2 * M + d)


def build_pi(N: int, M: int, boundary: str = PERIODIC, d: int = 1, open_ports: str = "trace") -> PiMatrix:
    """Gluing map with ``A'_i = A_i + theta B_{i-1}`` (indices mod ``N``).

    For open chains the wrap-around term is dropped; the first ``A`` and last
    ``B`` ports are either discarded or kept as merged rows to be projected
    onto the vacuum.
    """
    if N < 2:
        raise ValueError("need at least two sites")
    rows, cols, vals = [], [], []

    def put(row_mode, col_mode, sign_p=1.0):
        rows.extend([2 * row_mode, 2 * row_mode + 1])
        cols.extend([2 * col_mode, 2 * col_mode + 1])
        vals.extend([1.0, sign_p])

    r = 0
    discarded, vacuum_rows = [], []
    for i in range(N):
        a_i = _port_modes(i, M, d)[0]
        if boundary == PERIODIC or i > 0:
            b_prev = _port_modes((i - 1) % N, M, d)[1]
            for k in range(M):
                put(r, a_i[k])
                put(r, b_prev[k], -1.0)
                r += 1
        elif open_ports == "vacuum":
            for k in range(M):
                put(r, a_i[k])
                vacuum_rows.append(r)
                r += 1
        else:
            discarded.extend(a_i)
    if boundary == OPEN:
        b_last = _port_modes(N - 1, M, d)[1]
        if open_ports == "vacuum":
            for k in range(M):
                put(r, b_last[k], -1.0)
                vacuum_rows.append(r)
                r += 1
        else:
            discarded.extend(b_last)
    n_merged = r
    for i in range(N):
        for c in _port_modes(i, M, d)[2]:
            put(r, c)
            r += 1
    n_cols = 2 * N * (2 * M + d)
    mat = sp.csr_matrix((vals, (rows, cols)), shape=(2 * r, n_cols))
    return PiMatrix(mat, n_merged, r - n_merged, tuple(discarded), tuple(vacuum_rows))


def _block_diag(mats: list[np.ndarray]) -> np.ndarray:
    size = sum(m.shape[0] for m in mats)
    out = np.zeros((size, size))
    k = 0
    for m in mats:
        out[k:k + len(m), k:k + len(m)] = m
        k += len(m)
    return out


def build_gmps(spec: GmpsSpec) -> CovMat:
    """Physical CM ``SC_A'[Pi (+)_i Gamma_i Pi^T]`` of the chain, modes ``C_1 ... C_N``."""
    pi = build_pi(spec.N, spec.M, spec.boundary, spec.d_phys, spec.open_ports)
    g = _block_diag([ch.entries for ch in spec.sites])
    u = pi.matrix @ (pi.matrix @ g).T
    u = (u + u.T) / 2
    for row in pi.vacuum_rows:
        u[2 * row:2 * row + 2, 2 * row:2 * row + 2] += np.eye(2)
    out, critical = _schur(u, np.arange(2 * pi.n_merged))
    critical = critical or any(ch.cm.critical for ch in spec.sites)
    meta = {
        "N": spec.N,
        "M": spec.M,
        "boundary": spec.boundary,
        "translation_invariant": spec.translation_invariant,
        "critical": critical,
    }
    if spec.boundary == OPEN:
        meta["open_ports"] = spec.open_ports
    return CovMat(out, critical=critical, meta=meta)


def block(gamma, k: int, l: int, d: int = 1) -> np.ndarray:
    """``(2d x 2d)`` block between sites ``k`` and ``l`` of an interleaved chain CM."""
    a = np.asarray(gamma)
    return a[2 * d * k:2 * d * (k + 1), 2 * d * l:2 * d * (l + 1)]


def circulant_defect(gamma, d: int = 1) -> float:
    """``max |gamma_{k,l} - gamma_{k+1,l+1}|`` over all blocks (indices mod N)."""
    a = np.asarray(gamma)
    shift = np.roll(np.roll(a, 2 * d, axis=0), 2 * d, axis=1)
    return float(np.max(np.abs(a - shift)))


def is_pure_chain(gamma, tol: float = 1e-7) -> bool:
    return purity(gamma, tol).pure
