"""Constructive protocols: teleportation rounds and bond-entanglement reduction.

Teleportation at finite squeezing ``s`` leaves noise of order ``exp(-2 s)``
while the resource entries grow like ``cosh(2 s)``. In float64 the round-off
of the Schur complement overtakes the noise near ``s = 9``, so the round
simulation runs in mpmath (``dps`` digits) and only the result is rounded.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import mpmath as mp
import numpy as np
from scipy.linalg import expm

from .channels import GaussChannel, SymplecticOp
from .covmat import (
    CovMat,
    _collapse_matrix,
    _schur,
    as_array,
    direct_sum,
    entropy,
    purity,
    symplectic_form,
    williamson,
)
from .lattice import GmpsSpec

THETA1 = np.diag([1.0, -1.0])


# ---------------------------------------------------------------- rounds


def _shift(N: int, k: int) -> np.ndarray:
    """``(P x)_i = x_{i+k}`` on site-major interleaved vectors."""
    p = np.zeros((N, N))
    p[np.arange(N), (np.arange(N) + k) % N] = 1.0
    return np.kron(p, np.eye(2))


def nested_symplectic(S, N: int) -> np.ndarray:
    """Ideal (infinite squeezing) output map of one teleportation round.

    With ``S`` acting on ``(v_i, u_i)`` and producing ``(y_i, w_i)``, the round
    wires ``u_i = x_{i+1}`` (left teleportation) and ``v_i = w_{i-1}``
    (teleportation back into the neighbouring bond). Solving the ring gives
    ``y = T x``. To first order in ``S - 1`` this is the product of all
    translated copies of ``S``.
    """
    s = S.S if isinstance(S, SymplecticOp) else np.asarray(S, dtype=float)
    if s.shape != (4, 4):
        raise ValueError("nearest-neighbour symplectic must be 4 x 4")
    if N < 2:
        raise ValueError("need at least two sites")
    bb, bl, lb, ll = s[:2, :2], s[:2, 2:], s[2:, :2], s[2:, 2:]
    eye = np.eye(N)
    plus, minus = _shift(N, 1), _shift(N, -1)
    k_lb = np.kron(eye, lb) @ minus
    k_ll = np.kron(eye, ll) @ plus
    w = np.linalg.solve(np.eye(2 * N) - k_lb, k_ll)
    return np.kron(eye, bb) @ minus @ w + np.kron(eye, bl) @ plus


def _mp(a: np.ndarray) -> mp.matrix:
    return mp.matrix(a.tolist())


def _np(a: mp.matrix) -> np.ndarray:
    return np.array(a.tolist(), dtype=float)


def _mp_epr(s: float) -> mp.matrix:
    c, sh = mp.cosh(2 * mp.mpf(s)), mp.sinh(2 * mp.mpf(s))
    m = mp.zeros(4, 4)
    for i in range(4):
        m[i, i] = c
    # x_1 = -x_2, p_1 = p_2 correlations
    m[0, 2] = m[2, 0] = -sh
    m[1, 3] = m[3, 1] = sh
    return m


def _round_layout(N: int) -> dict[str, list[int]]:
    """Mode labels per site: input x, bond halves a, l, g, b."""
    lab = {}
    for j, name in enumerate("xalgb"):
        lab[name] = [5 * i + j for i in range(N)]
    return lab


def protocol_round(gamma_in, S, s_bond: float, dps: int = 50) -> CovMat:
    """One round: teleport left, apply ``S``, teleport back into the next bond.

    Each site ``i`` holds its input mode ``x_i`` and four bond modes. The bond
    ``(a_{i+1}, l_i)`` carries the input of site ``i+1`` to site ``i``;
    ``S`` acts on ``(b_i, l_i)``; the bond ``(g_i, b_{i+1})`` carries the
    result on to ``b_{i+1}``. Both bonds are EPR-type states of squeezing
    ``s_bond``. Returns the CM of the ``b`` modes, which tends to
    ``T gamma_in T^T`` with ``T = nested_symplectic(S, N)``.
    """
    g_in = as_array(gamma_in)
    N = g_in.shape[0] // 2
    s = S.S if isinstance(S, SymplecticOp) else np.asarray(S, dtype=float)
    if N < 2:
        raise ValueError("need at least two sites")
    lab = _round_layout(N)
    n = 5 * N
    with mp.workdps(dps):
        g = mp.zeros(2 * n, 2 * n)
        x = [2 * k + t for k in lab["x"] for t in (0, 1)]
        for i, r in enumerate(x):
            for j, c in enumerate(x):
                g[r, c] = mp.mpf(g_in[i, j])
        res = _mp_epr(s_bond)
        pairs = [(lab["a"][(i + 1) % N], lab["l"][i]) for i in range(N)]
        pairs += [(lab["g"][i], lab["b"][(i + 1) % N]) for i in range(N)]
        for m1, m2 in pairs:
            idx = [2 * m1, 2 * m1 + 1, 2 * m2, 2 * m2 + 1]
            for i, r in enumerate(idx):
                for j, c in enumerate(idx):
                    g[r, c] = res[i, j]
        big = np.eye(2 * n)
        for i in range(N):
            idx = [2 * lab["b"][i], 2 * lab["b"][i] + 1, 2 * lab["l"][i], 2 * lab["l"][i] + 1]
            big[np.ix_(idx, idx)] = s
        sm = _mp(big)
        g = sm * g * sm.T
        a = lab["x"] + lab["l"]
        b = lab["a"] + lab["g"]
        pi, rest = _collapse_matrix(n, a, b)
        pm = _mp(pi)
        u = pm * g * pm.T
        k = 2 * len(a)
        m11 = u[0:k, 0:k]
        m12 = u[0:k, k:u.rows]
        m22 = u[k:u.rows, k:u.cols]
        out = m22 - m12.T * (mp.inverse(m11) * m12)
        out = _np(out)
    # remaining modes are exactly the b modes, in site order
    assert list(rest) == lab["b"]
    return CovMat((out + out.T) / 2, meta={"s_bond": float(s_bond)})


def protocol_error(gamma_in, S, s_bond: float, dps: int = 50) -> float:
    """``max |protocol_round - T gamma_in T^T|``."""
    g = as_array(gamma_in)
    t = nested_symplectic(S, g.shape[0] // 2)
    return float(np.max(np.abs(as_array(protocol_round(g, S, s_bond, dps)) - t @ g @ t.T)))


def protocol_report(gamma_in, S, s_values=(4, 6, 8, 10, 12), dps: int = 50) -> dict:
    """Errors over ``s_values`` plus the fitted slope of ``log(error)`` in ``s``."""
    s_values = [float(s) for s in s_values]
    errs = [protocol_error(gamma_in, S, s, dps) for s in s_values]
    logs = np.log(np.maximum(errs, np.finfo(float).tiny))
    slope = float(np.polyfit(s_values, logs, 1)[0]) if len(s_values) > 1 else float("nan")
    return {"s_bond": s_values, "error": errs, "slope": slope}


# ---------------------------------------------------------------- Trotter


@dataclass(frozen=True)
class TrotterPlan:
    """Ordered layers ``(tag, op)`` with ``tag`` in ``{"onsite", "nearest-neighbor"}``.

    Layers are listed in the order they act; the product is
    ``layers[-1] @ ... @ layers[0]``.
    """

    layers: tuple[tuple[str, SymplecticOp], ...]
    J: int
    target: np.ndarray | None = field(default=None, compare=False)

    def product(self) -> np.ndarray:
        n = self.layers[0][1].S.shape[0] if self.layers else len(self.target)
        out = np.eye(n)
        for _, op in self.layers:
            out = op.S @ out
        return out

    def error(self) -> float:
        return float(np.max(np.abs(self.product() - self.target)))


def ring_generator(h_onsite, h_bond, N: int) -> np.ndarray:
    """Full ``2N x 2N`` generator ``sum_n h_onsite(n) + sum_n h_bond(n, n+1)`` on a ring."""
    h1 = np.asarray(h_onsite, dtype=float)
    h2 = np.asarray(h_bond, dtype=float)
    out = np.zeros((2 * N, 2 * N))
    for n in range(N):
        idx = [2 * n, 2 * n + 1]
        out[np.ix_(idx, idx)] += h1
        idx2 = idx + [2 * ((n + 1) % N), 2 * ((n + 1) % N) + 1]
        out[np.ix_(idx2, idx2)] += h2
    return out


def _bond_layer(h2: np.ndarray, N: int, start: int) -> np.ndarray:
    out = np.zeros((2 * N, 2 * N))
    for n in range(start, N, 2):
        idx = [2 * n, 2 * n + 1, 2 * ((n + 1) % N), 2 * ((n + 1) % N) + 1]
        out[np.ix_(idx, idx)] += h2
    return out


def trotterize(h_onsite, h_bond, N: int, t: float, J: int) -> TrotterPlan:
    """First-order plan ``J x [onsite, even bonds, odd bonds]`` for ``exp(t sigma H)``.

    Each layer is a direct sum of commuting one- or two-mode symplectics.
    ``N`` must be even so that even and odd bonds tile the ring.
    """
    if J < 1:
        raise ValueError("need at least one layer")
    if N < 2 or N % 2:
        raise ValueError("ring length must be even and at least 2")
    h1 = np.asarray(h_onsite, dtype=float)
    h2 = np.asarray(h_bond, dtype=float)
    if h1.shape != (2, 2) or h2.shape != (4, 4):
        raise ValueError("generators must be 2 x 2 (onsite) and 4 x 4 (bond)")
    if not (np.allclose(h1, h1.T) and np.allclose(h2, h2.T)):
        raise ValueError("generators must be symmetric")
    sig = symplectic_form(N)
    dt = t / J
    onsite = np.kron(np.eye(N), h1)
    parts = [
        ("onsite", onsite),
        ("nearest-neighbor", _bond_layer(h2, N, 0)),
        ("nearest-neighbor", _bond_layer(h2, N, 1)),
    ]
    step = [(tag, SymplecticOp(expm(dt * sig @ h))) for tag, h in parts if np.any(h)]
    layers = tuple(step * J)
    target = expm(t * sig @ ring_generator(h1, h2, N))
    return TrotterPlan(layers, J, target)


# ---------------------------------------------------------------- Schmidt form


@dataclass(frozen=True)
class SchmidtForm:
    """``Gamma = (S_A + S_BC) N (S_A + S_BC)^T``.

    ``N`` holds two-mode squeezed states ``TMS(r_k)`` between ``A_k`` and the
    ``k``-th of the last ``M`` modes of ``BC``; all other ``BC`` modes are in
    the vacuum. ``squeezings`` are sorted in descending order.
    """

    S_A: SymplecticOp
    S_BC: SymplecticOp
    squeezings: np.ndarray
    n_a: int
    n_bc: int

    def normal_form(self) -> np.ndarray:
        m, nbc = self.n_a, self.n_bc
        out = np.eye(2 * (m + nbc))
        for k, r in enumerate(self.squeezings):
            a = [2 * k, 2 * k + 1]
            c = [2 * (nbc + k), 2 * (nbc + k) + 1]
            ch, sh = np.cosh(2 * r), np.sinh(2 * r)
            out[np.ix_(a, a)] = ch * np.eye(2)
            out[np.ix_(c, c)] = ch * np.eye(2)
            out[np.ix_(a, c)] = sh * THETA1
            out[np.ix_(c, a)] = sh * THETA1
        return out

    def reassemble(self) -> np.ndarray:
        s = direct_sum(self.S_A.S, self.S_BC.S)
        return s @ self.normal_form() @ s.T


def _mode_perm(order: list[int]) -> np.ndarray:
    """Column permutation moving mode ``order[j]`` to position ``j``."""
    return np.concatenate([[2 * k, 2 * k + 1] for k in order]).astype(int)


def schmidt_decompose(gamma, n_a: int, tol: float = 1e-8) -> SchmidtForm:
    """Normal form of a pure CM across the split (first ``n_a`` modes) | rest.

    Symplectic eigenvalues ``nu_k`` of the ``A`` reduction give the
    squeezings through ``cosh 2 r_k = nu_k``.
    """
    g = as_array(gamma)
    n = g.shape[0] // 2
    nbc = n - n_a
    if not 0 < n_a <= nbc:
        raise ValueError(f"need 0 < n_a <= n - n_a, got n_a={n_a}, n={n}")
    if not purity(g, tol).pure:
        raise ValueError("Schmidt decomposition needs a pure state")
    ia, ib = np.arange(2 * n_a), np.arange(2 * n_a, 2 * n)
    nu_a, s_a = williamson(g[np.ix_(ia, ia)])
    nu_bc, s_bc = williamson(g[np.ix_(ib, ib)])
    # A in descending order; BC: vacuum modes first, then ascending reversed
    s_a = s_a[:, _mode_perm(list(range(n_a))[::-1])]
    nu_a = nu_a[::-1]
    order = list(range(nbc - n_a)) + list(range(nbc - n_a, nbc))[::-1]
    s_bc = s_bc[:, _mode_perm(order)]
    r = np.arccosh(np.maximum(nu_a, 1.0)) / 2
    # fix the local freedom on the BC side so that the cross block is sinh(2r) theta
    k = np.linalg.solve(s_a, g[np.ix_(ia, ib)]) @ np.linalg.inv(s_bc).T
    k_slots = k[:, 2 * (nbc - n_a):]
    o = np.eye(2 * n_a)
    sh = np.sinh(2 * r)
    big = sh > 1e-12
    for j in np.flatnonzero(big):
        for l in np.flatnonzero(big):
            blk = k_slots[2 * j:2 * j + 2, 2 * l:2 * l + 2]
            o[2 * l:2 * l + 2, 2 * j:2 * j + 2] = blk.T / sh[j] @ THETA1
    full_o = np.eye(2 * nbc)
    full_o[2 * (nbc - n_a):, 2 * (nbc - n_a):] = o
    s_bc = s_bc @ full_o
    form = SchmidtForm(SymplecticOp(s_a), SymplecticOp(s_bc), r, n_a, nbc)
    err = np.max(np.abs(form.reassemble() - g))
    if err > tol * max(1.0, np.max(np.abs(g))):
        raise ArithmeticError(f"Schmidt reassembly residual {err:.3g}")
    return form


# ---------------------------------------------------------------- bond reduction


def _vacuum_project(gamma: np.ndarray, modes: list[int]) -> np.ndarray:
    """Condition on ``modes`` being found in the vacuum."""
    if not modes:
        return gamma
    n = gamma.shape[0] // 2
    keep = [k for k in range(n) if k not in set(modes)]
    order = _mode_perm(list(modes) + keep)
    g = gamma[np.ix_(order, order)].copy()
    g[: 2 * len(modes), : 2 * len(modes)] += np.eye(2 * len(modes))
    out, _ = _schur(g, np.arange(2 * len(modes)))
    return out


def reduce_bond_entanglement(spec: GmpsSpec, r_tol: float = 1e-7) -> GmpsSpec:
    """Move the local symplectic of every ``A`` port through its bond.

    With ``Gamma = (S_A + S_BC) N (S_A + S_BC)^T`` the EPR bond turns ``S_A``
    on ``A_{i+1}`` into ``theta S_A^-1 theta`` on ``B_i``. The new map is
    ``(S_A^-1 + theta S_A^-1 theta + 1) Gamma (...)^T``, whose ``A`` ports hold
    ``TMS(r_k)`` halves, so each bond is equivalent to a finitely squeezed
    ``TMS(r_k)`` resource. Bonds with ``r_k <= r_tol`` are removed: their ``A``
    mode is dropped and the matching ``B`` port is projected onto the vacuum.
    """
    if not spec.translation_invariant:
        raise ValueError("bond reduction needs a translation-invariant spec")
    ch = spec.sites[0]
    M, d = spec.M, ch.n_out
    g = as_array(ch.cm)
    if not purity(g).pure:
        raise ValueError("bond reduction needs a pure map")
    form = schmidt_decompose(g, M)
    s_inv = np.linalg.inv(form.S_A.S)
    th = np.kron(np.eye(M), THETA1)
    move = direct_sum(s_inv, th @ s_inv @ th, np.eye(2 * d))
    new = move @ g @ move.T
    new = (new + new.T) / 2
    r = form.squeezings
    drop = [k for k in range(M) if r[k] <= r_tol]
    keep = [k for k in range(M) if r[k] > r_tol]
    new = _vacuum_project(new, [M + k for k in drop])
    # remaining modes: A (all M), B (kept), C; drop the decoupled A modes
    n_left = new.shape[0] // 2
    sel = keep + list(range(M, n_left))
    idx = _mode_perm(sel)
    new = new[np.ix_(idx, idx)]
    m_new = len(keep)
    cm = CovMat(new, meta={"bond_squeezing": [float(r[k]) for k in keep]})
    new_ch = GaussChannel(2 * m_new, d, cm, pure=True)
    bonds = tuple(float(r[k]) for k in keep)
    meta = dict(spec.meta)
    meta.update({"reduced_from_M": M, "bond_entropy": [entropy([np.cosh(2 * x)]) for x in bonds]})
    return GmpsSpec(tuple([new_ch] * spec.N), m_new, spec.boundary, spec.open_ports, bonds, meta)
