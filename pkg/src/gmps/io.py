"""JSON and CSV forms of the data model.

Every ``*_to_dict`` has a matching ``*_from_dict``; keys are checked strictly
so that typos in hand-written spec files fail early.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Any, TextIO

import numpy as np

from .channels import GaussChannel
from .covmat import BLOCKED, INTERLEAVED, CovMat
from .hamiltonian import QuadHamiltonian
from .lattice import GmpsSpec
from .spectral import RationalCM


class ParseError(ValueError):
    """Malformed input file; ``line`` and ``col`` are 1-based when known."""

    def __init__(self, msg: str, line: int | None = None, col: int | None = None):
        where = f" (line {line}, column {col})" if line is not None else ""
        super().__init__(msg + where)
        self.line = line
        self.col = col


def _check_keys(obj: Any, required: set[str], optional: set[str] = frozenset(), what: str = "object"):
    if not isinstance(obj, dict):
        raise ParseError(f"{what}: expected a JSON object, got {type(obj).__name__}")
    missing = required - obj.keys()
    if missing:
        raise ParseError(f"{what}: missing keys {sorted(missing)}")
    unknown = obj.keys() - required - optional
    if unknown:
        raise ParseError(f"{what}: unknown keys {sorted(unknown)}")


def _int(v, what: str) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise ParseError(f"{what}: expected an integer, got {v!r}")
    return v


def _floats(v, what: str) -> np.ndarray:
    try:
        a = np.asarray(v, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{what}: expected numbers ({exc})") from None
    if not np.all(np.isfinite(a)):
        raise ParseError(f"{what}: non-finite value")
    return a


def _list(a) -> list:
    return np.asarray(a, dtype=float).tolist()


# ---------------------------------------------------------------- CovMat


def covmat_to_dict(cm: CovMat) -> dict:
    return {"n_modes": cm.n_modes, "ordering": cm.ordering, "entries": _list(cm.entries.ravel())}


def covmat_from_dict(obj: Any) -> CovMat:
    _check_keys(obj, {"n_modes", "ordering", "entries"}, what="CovMat")
    n = _int(obj["n_modes"], "CovMat.n_modes")
    if obj["ordering"] not in (INTERLEAVED, BLOCKED):
        raise ParseError(f"CovMat.ordering: {obj['ordering']!r} is not 'interleaved' or 'blocked'")
    e = _floats(obj["entries"], "CovMat.entries").ravel()
    if e.size != 4 * n * n:
        raise ParseError(f"CovMat.entries: {e.size} values for {n} modes, expected {4 * n * n}")
    try:
        return CovMat(e.reshape(2 * n, 2 * n), ordering=obj["ordering"])
    except ValueError as exc:
        raise ParseError(f"CovMat: {exc}") from None


# ---------------------------------------------------------------- channels and specs


def channel_to_dict(ch: GaussChannel) -> dict:
    return {
        "n_in": ch.n_in,
        "n_out": ch.n_out,
        "cm": covmat_to_dict(ch.cm),
        "pure": bool(ch.pure),
        "regularized": bool(ch.regularized),
    }


def channel_from_dict(obj: Any) -> GaussChannel:
    _check_keys(obj, {"n_in", "n_out", "cm"}, {"pure", "regularized"}, what="GaussChannel")
    cm = covmat_from_dict(obj["cm"])
    n_in, n_out = _int(obj["n_in"], "GaussChannel.n_in"), _int(obj["n_out"], "GaussChannel.n_out")
    try:
        if "pure" in obj:
            return GaussChannel(n_in, n_out, cm, pure=bool(obj["pure"]),
                                regularized=bool(obj.get("regularized", False)))
        ch = GaussChannel.from_cm(cm, n_in, regularized=bool(obj.get("regularized", False)))
    except ValueError as exc:
        raise ParseError(f"GaussChannel: {exc}") from None
    if ch.n_out != n_out:
        raise ParseError(f"GaussChannel: {ch.n_out} output modes, declared {n_out}")
    return ch


def spec_to_dict(spec: GmpsSpec) -> dict:
    out: dict[str, Any] = {"M": spec.M, "boundary": spec.boundary}
    if spec.translation_invariant:
        out["sites"] = {"uniform": channel_to_dict(spec.sites[0]), "N": spec.N}
    else:
        out["sites"] = [channel_to_dict(ch) for ch in spec.sites]
    if spec.open_ports != "trace":
        out["open_ports"] = spec.open_ports
    if spec.bond_squeezing is not None:
        out["bond_squeezing"] = list(spec.bond_squeezing)
    return out


def spec_from_dict(obj: Any) -> GmpsSpec:
    _check_keys(obj, {"M", "boundary", "sites"}, {"open_ports", "bond_squeezing"}, what="GmpsSpec")
    M = _int(obj["M"], "GmpsSpec.M")
    sites = obj["sites"]
    if isinstance(sites, dict):
        _check_keys(sites, {"uniform", "N"}, what="GmpsSpec.sites")
        N = _int(sites["N"], "GmpsSpec.sites.N")
        if N < 1:
            raise ParseError("GmpsSpec.sites.N must be positive")
        chans = (channel_from_dict(sites["uniform"]),) * N
    elif isinstance(sites, list):
        chans = tuple(channel_from_dict(s) for s in sites)
    else:
        raise ParseError("GmpsSpec.sites: expected a list or {'uniform', 'N'}")
    bonds = obj.get("bond_squeezing")
    if bonds is not None:
        bonds = tuple(float(x) for x in _floats(bonds, "GmpsSpec.bond_squeezing").ravel())
    try:
        return GmpsSpec(chans, M, obj["boundary"], obj.get("open_ports", "trace"), bonds)
    except ValueError as exc:
        raise ParseError(f"GmpsSpec: {exc}") from None


# ---------------------------------------------------------------- spectral and Hamiltonian


def rational_to_dict(rc: RationalCM) -> dict:
    return {"L": rc.L, "p": _list(rc.p), "q": _list(rc.q), "r": _list(rc.r), "d": _list(rc.d),
            "normalization": "d(1)=1"}


def rational_from_dict(obj: Any) -> RationalCM:
    _check_keys(obj, {"L", "p", "q", "r", "d"}, {"normalization"}, what="RationalCM")
    if obj.get("normalization", "d(1)=1") != "d(1)=1":
        raise ParseError(f"RationalCM.normalization: unsupported {obj['normalization']!r}")
    L = _int(obj["L"], "RationalCM.L")
    polys = {k: _floats(obj[k], f"RationalCM.{k}").ravel() for k in "pqrd"}
    for k, v in polys.items():
        if len(v) != L + 1:
            raise ParseError(f"RationalCM.{k}: {len(v)} coefficients, expected L + 1 = {L + 1}")
    return RationalCM(polys["p"], polys["q"], polys["r"], polys["d"])


def hamiltonian_to_dict(h: QuadHamiltonian) -> dict:
    return {"p": _list(h.p), "q": _list(h.q), "r": _list(h.r), "range": h.range,
            "couplings": h.couplings().tolist()}


def hamiltonian_from_dict(obj: Any) -> QuadHamiltonian:
    _check_keys(obj, {"p", "q", "r"}, {"range", "couplings"}, what="QuadHamiltonian")
    return QuadHamiltonian(*(_floats(obj[k], f"QuadHamiltonian.{k}").ravel() for k in "pqr"))


# ---------------------------------------------------------------- files


def loads(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", exc.lineno, exc.colno) from None


def load_json(path: str | Path) -> Any:
    return loads(Path(path).read_text())


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2) + "\n"


def write_text(text: str, path: str | Path | None, stream: TextIO) -> None:
    if path is None:
        stream.write(text)
    else:
        Path(path).write_text(text)


def load_spec(path: str | Path) -> GmpsSpec:
    return spec_from_dict(load_json(path))


# ---------------------------------------------------------------- CSV

CSV_COLUMNS = ("n", "gamma_q", "gamma_p", "gamma_r")


def correlations_to_csv(rows: np.ndarray, meta: dict | None = None) -> str:
    """``rows[k] = (gamma_q, gamma_p, gamma_r)`` at ``n = k``; ``meta`` goes into ``#`` lines."""
    buf = io.StringIO()
    for k, v in (meta or {}).items():
        buf.write(f"# {k}={v}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for n, row in enumerate(np.asarray(rows, dtype=float)):
        w.writerow([n] + [f"{x:.17g}" for x in row])
    return buf.getvalue()


def correlations_from_csv(text: str) -> tuple[np.ndarray, dict]:
    meta, body = {}, []
    for line in text.splitlines():
        if line.startswith("#"):
            k, _, v = line[1:].strip().partition("=")
            meta[k] = v
        elif line.strip():
            body.append(line)
    reader = csv.reader(body)
    header = next(reader, None)
    if tuple(header or ()) != CSV_COLUMNS:
        raise ParseError(f"CSV header must be {','.join(CSV_COLUMNS)}")
    rows = []
    for k, rec in enumerate(reader):
        if len(rec) != 4 or int(rec[0]) != k:
            raise ParseError(f"bad CSV row {k}: {rec}", line=len(meta) + k + 2, col=1)
        rows.append([float(x) for x in rec[1:]])
    return np.array(rows).reshape(-1, 3), meta
