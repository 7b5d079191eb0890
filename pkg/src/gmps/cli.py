"""Command-line front end: ``python3 -m gmps <command> ...``.

Exit codes: 0 success, 1 failed check (``verify``), 2 parse/usage error,
3 invalid state, 4 critical state. Artifacts go to ``--out`` or stdout,
diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import io as gio
from .channels import random_pure_channel, random_pure_state, random_symplectic
from .covmat import CriticalState, purity, validate_state
from .hamiltonian import (
    ground_energy_density,
    ground_state,
    has_gmps_ground_state,
    parent_hamiltonian,
)
from .lattice import OPEN, PERIODIC, GmpsSpec, build_gmps, circulant_defect
from .protocols import protocol_report, reduce_bond_entanglement, schmidt_decompose
from .spectral import (
    correlation_length,
    correlations_infinite,
    finite_correlations,
    gamma_hat,
    phi_grid,
    rationalize,
)

EXIT_OK, EXIT_FAIL, EXIT_PARSE, EXIT_INVALID, EXIT_CRITICAL = 0, 1, 2, 3, 4

COMMANDS = ("build", "correlations", "corrlength", "parent-ham", "schmidt", "reduce-bonds",
            "protocol-demo", "verify")


class CliError(Exception):
    def __init__(self, msg: str, code: int):
        super().__init__(msg)
        self.code = code


@dataclass
class RunConfig:
    command: str
    spec: str | None = None
    hamiltonian: str | None = None
    N: int | None = None
    M: int = 1
    boundary: str | None = None
    phi_grid: int = 64
    n_max: int = 20
    finite: int | None = None
    out: str | None = None
    seed: int | None = None
    tol: dict = field(default_factory=dict)

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise CliError(f"unknown command {self.command!r}", EXIT_PARSE)
        needs_spec = self.command in ("build", "correlations", "corrlength", "schmidt", "reduce-bonds")
        if needs_spec and self.spec is None:
            raise CliError(f"{self.command} needs --spec", EXIT_PARSE)
        if self.command == "parent-ham" and (self.spec is None) == (self.hamiltonian is None):
            raise CliError("parent-ham needs exactly one of --spec and --hamiltonian", EXIT_PARSE)
        for name in ("N", "finite"):
            v = getattr(self, name)
            if v is not None and v < 2:
                raise CliError(f"--{name} must be at least 2", EXIT_PARSE)
        if self.M < 1:
            raise CliError("--M must be positive", EXIT_PARSE)
        if self.phi_grid < 4:
            raise CliError("--phi-grid must be at least 4", EXIT_PARSE)
        if self.n_max < 0:
            raise CliError("--n-max must be non-negative", EXIT_PARSE)
        if self.finite is not None and self.n_max >= self.finite:
            raise CliError("--n-max must be below the --finite ring length", EXIT_PARSE)
        for k, v in self.tol.items():
            if not v > 0:
                raise CliError(f"--tol-{k} must be positive", EXIT_PARSE)


TOL_DEFAULTS = {"psd": 1e-9, "pure": 1e-8, "fit": 1e-10, "roundtrip": 1e-10}


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gmps", description="Gaussian matrix product state toolkit")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--spec", help="GmpsSpec JSON file")
    p.add_argument("--hamiltonian", help="QuadHamiltonian JSON file (parent-ham converse test)")
    p.add_argument("--N", type=int, help="chain length (overrides the --spec file)")
    p.add_argument("--M", type=int, default=1, help="bond modes for randomized demos")
    p.add_argument("--boundary", choices=(PERIODIC, OPEN), help="boundary condition (overrides the --spec file)")
    p.add_argument("--phi-grid", type=int, default=64, help="number of phi check points")
    p.add_argument("--n-max", type=int, default=20, help="largest distance in correlation output")
    p.add_argument("--finite", type=int, metavar="N", help="finite ring of N sites instead of the infinite chain")
    p.add_argument("--out", help="output file (default: stdout)")
    for k, v in TOL_DEFAULTS.items():
        p.add_argument(f"--tol-{k}", type=float, default=v, dest=f"tol_{k}")
    return p


def parse_config(argv: Sequence[str]) -> RunConfig:
    ns = _parser().parse_args(argv)
    seed = os.environ.get("GMPS_SEED")
    try:
        seed = int(seed) if seed not in (None, "") else None
    except ValueError:
        raise CliError(f"GMPS_SEED must be an integer, got {seed!r}", EXIT_PARSE) from None
    cfg = RunConfig(
        command=ns.command,
        spec=ns.spec,
        hamiltonian=ns.hamiltonian,
        N=ns.N,
        M=ns.M,
        boundary=ns.boundary,
        phi_grid=ns.phi_grid,
        n_max=ns.n_max,
        finite=ns.finite,
        out=ns.out,
        seed=seed,
        tol={k: getattr(ns, f"tol_{k}") for k in TOL_DEFAULTS},
    )
    cfg.validate()
    return cfg


def _load_spec(cfg: RunConfig) -> GmpsSpec:
    try:
        spec = gio.load_spec(cfg.spec)
    except OSError as exc:
        raise CliError(f"cannot read {cfg.spec}: {exc.strerror}", EXIT_PARSE) from None
    except gio.ParseError as exc:
        raise CliError(f"{cfg.spec}: {exc}", EXIT_PARSE) from None
    if cfg.N is not None:
        if not spec.translation_invariant:
            raise CliError("--N only applies to translation-invariant specs", EXIT_PARSE)
        spec = GmpsSpec.uniform(spec.sites[0], cfg.N, spec.M, boundary=spec.boundary, open_ports=spec.open_ports)
    if cfg.boundary is not None:
        spec = GmpsSpec(spec.sites, spec.M, cfg.boundary, spec.open_ports, spec.bond_squeezing)
    for k, ch in enumerate(spec.sites[:1] if spec.translation_invariant else spec.sites):
        chk = validate_state(ch.cm, cfg.tol["psd"])
        if not chk.valid:
            raise CliError(f"site {k}: map CM is not a valid state (min eigenvalue {chk.min_eigenvalue:.3g})",
                           EXIT_INVALID)
    return spec


def _ti_pure_map(spec: GmpsSpec, cfg: RunConfig):
    if not spec.translation_invariant:
        raise CliError("command needs a translation-invariant spec", EXIT_INVALID)
    ch = spec.sites[0]
    if not purity(ch.cm, cfg.tol["pure"]).pure:
        raise CliError("command needs a pure site map", EXIT_INVALID)
    return ch


def _rng(cfg: RunConfig) -> np.random.Generator:
    return np.random.default_rng(cfg.seed)


def _emit(text: str, cfg: RunConfig, out) -> None:
    gio.write_text(text, cfg.out, out)


# ---------------------------------------------------------------- commands


def cmd_build(cfg: RunConfig, out, err) -> int:
    spec = _load_spec(cfg)
    cm = build_gmps(spec)
    chk = validate_state(cm, cfg.tol["psd"])
    summary = {
        "N": spec.N,
        "M": spec.M,
        "boundary": spec.boundary,
        "valid": bool(chk.valid),
        "min_eigenvalue": chk.min_eigenvalue,
        "pure": bool(purity(cm, cfg.tol["pure"]).pure),
        "critical": bool(cm.critical),
        "translation_invariant": bool(spec.translation_invariant),
    }
    if spec.boundary == PERIODIC:
        summary["circulant_defect"] = circulant_defect(cm, spec.d_phys)
    if cm.critical:
        err.write("critical: singular merged block in the chain contraction\n")
        err.write(gio.dumps(summary))
        return EXIT_CRITICAL
    if not chk.valid:
        err.write(f"invalid output state: min eigenvalue of gamma + i sigma is {chk.min_eigenvalue:.3g}\n")
        return EXIT_INVALID
    text = gio.dumps(gio.covmat_to_dict(cm))
    if cfg.out is None:
        out.write(text)
        err.write(gio.dumps(summary))
    else:
        _emit(text, cfg, out)
        out.write(gio.dumps(summary))
    return EXIT_OK


def _rational(ch, cfg: RunConfig):
    rc = rationalize(ch, tol=cfg.tol["fit"])
    return rc


def cmd_correlations(cfg: RunConfig, out, err) -> int:
    spec = _load_spec(cfg)
    ch = _ti_pure_map(spec, cfg)
    n = np.arange(cfg.n_max + 1)
    if cfg.finite is not None:
        g = finite_correlations(ch, cfg.finite).real
        rows = np.stack([g[n, 0, 0], g[n, 1, 1], g[n, 0, 1]], -1)
        meta = {"mode": "finite", "N": cfg.finite}
    else:
        rc = _rational(ch, cfg)
        cl = correlation_length(rc)
        rows = np.stack([correlations_infinite(rc, s, n) for s in "qpr"], -1).real
        meta = {"mode": "infinite", "L": rc.L, "xi": repr(cl.xi), "z_star": repr(cl.z_star)}
    _emit(gio.correlations_to_csv(rows, meta), cfg, out)
    return EXIT_OK


def cmd_corrlength(cfg: RunConfig, out, err) -> int:
    spec = _load_spec(cfg)
    rc = _rational(_ti_pure_map(spec, cfg), cfg)
    cl = correlation_length(rc)
    res = {
        "L": rc.L,
        "xi": cl.xi,
        "z_star": [cl.z_star.real, cl.z_star.imag],
        "multiplicity": cl.multiplicity,
        "unit_circle_distance": cl.unit_circle_distance,
    }
    _emit(gio.dumps(res), cfg, out)
    return EXIT_OK


def _converse_dict(res) -> dict:
    out = {"status": res.status, "margin": res.margin}
    if res.witness_root is not None:
        out["witness_root"] = [res.witness_root.real, res.witness_root.imag]
        out["witness_multiplicity"] = res.witness_multiplicity
    if res.rational is not None:
        out["rational"] = gio.rational_to_dict(res.rational)
    return out


def cmd_parent_ham(cfg: RunConfig, out, err) -> int:
    if cfg.hamiltonian is not None:
        try:
            h = gio.hamiltonian_from_dict(gio.load_json(cfg.hamiltonian))
        except OSError as exc:
            raise CliError(f"cannot read {cfg.hamiltonian}: {exc.strerror}", EXIT_PARSE) from None
        except gio.ParseError as exc:
            raise CliError(f"{cfg.hamiltonian}: {exc}", EXIT_PARSE) from None
        res = {"hamiltonian": gio.hamiltonian_to_dict(h), "converse": _converse_dict(has_gmps_ground_state(h))}
        _emit(gio.dumps(res), cfg, out)
        return EXIT_OK
    spec = _load_spec(cfg)
    ch = _ti_pure_map(spec, cfg)
    rc = _rational(ch, cfg)
    h = parent_hamiltonian(rc)
    phi = phi_grid(cfg.phi_grid)
    resid = float(np.max(np.abs(ground_state(h)(phi) - gamma_hat(ch, phi))))
    res = {
        "hamiltonian": gio.hamiltonian_to_dict(h),
        "rational": gio.rational_to_dict(rc),
        "roundtrip_residual": resid,
        "energy_density": ground_energy_density(h),
        "converse": _converse_dict(has_gmps_ground_state(h)),
    }
    if resid > cfg.tol["roundtrip"]:
        err.write(f"warning: round-trip residual {resid:.3g} exceeds {cfg.tol['roundtrip']:.3g}\n")
    _emit(gio.dumps(res), cfg, out)
    return EXIT_OK


def cmd_schmidt(cfg: RunConfig, out, err) -> int:
    spec = _load_spec(cfg)
    ch = _ti_pure_map(spec, cfg)
    form = schmidt_decompose(ch.cm, spec.M, cfg.tol["pure"])
    g = np.asarray(ch.cm)
    res = {
        "squeezings": form.squeezings.tolist(),
        "symplectic_eigenvalues": np.cosh(2 * form.squeezings).tolist(),
        "S_A": form.S_A.S.tolist(),
        "S_BC": form.S_BC.S.tolist(),
        "reassembly_residual": float(np.max(np.abs(form.reassemble() - g))),
    }
    _emit(gio.dumps(res), cfg, out)
    return EXIT_OK


def cmd_reduce_bonds(cfg: RunConfig, out, err) -> int:
    spec = _load_spec(cfg)
    _ti_pure_map(spec, cfg)
    new = reduce_bond_entanglement(spec)
    phi = phi_grid(cfg.phi_grid)
    diff = float(np.max(np.abs(gamma_hat(spec.sites[0], phi) - gamma_hat(new.sites[0], phi))))
    err.write(f"bond modes {spec.M} -> {new.M}; squeezings {list(new.bond_squeezing)}; "
              f"max |gamma_hat change| = {diff:.3g}\n")
    _emit(gio.dumps(gio.spec_to_dict(new)), cfg, out)
    return EXIT_OK


def cmd_protocol_demo(cfg: RunConfig, out, err) -> int:
    rng = _rng(cfg)
    N = cfg.N or 4
    gamma = random_pure_state(N, rng)
    S = random_symplectic(2, rng, 0.2)
    rep = protocol_report(gamma, S)
    _emit(gio.dumps(rep), cfg, out)
    return EXIT_OK


def _verify_checks(cfg: RunConfig) -> list[tuple[str, Callable[[], float], float]]:
    rng = _rng(cfg)
    phi = phi_grid(cfg.phi_grid)
    M = cfg.M

    def ti_fourier():
        ch = random_pure_channel(2 * M, 1, rng)
        N = 16
        g = np.asarray(build_gmps(GmpsSpec.uniform(ch, N, M)))
        blocks = finite_correlations(ch, N).real
        return float(max(np.max(np.abs(g[2 * n:2 * n + 2, 0:2] - blocks[n])) for n in range(N)))

    def roundtrip():
        ch = random_pure_channel(2 * M, 1, rng)
        h = parent_hamiltonian(rationalize(ch))
        return float(np.max(np.abs(ground_state(h)(phi) - gamma_hat(ch, phi))))

    def converse():
        ch = random_pure_channel(2 * M, 1, rng)
        return 0.0 if has_gmps_ground_state(parent_hamiltonian(rationalize(ch))) else 1.0

    def reduction():
        ch = random_pure_channel(2 * M, 1, rng)
        new = reduce_bond_entanglement(GmpsSpec.uniform(ch, 4, M))
        return float(np.max(np.abs(gamma_hat(ch, phi) - gamma_hat(new.sites[0], phi))))

    return [
        ("chain CM matches inverse DFT of gamma_hat", ti_fourier, 1e-10),
        ("parent Hamiltonian ground state reproduces gamma_hat", roundtrip, cfg.tol["roundtrip"]),
        ("parent Hamiltonian passes the converse test", converse, 0.5),
        ("bond reduction keeps gamma_hat", reduction, 1e-7),
    ]


def cmd_verify(cfg: RunConfig, out, err) -> int:
    failed = 0
    lines = []
    for name, fn, tol in _verify_checks(cfg):
        val = fn()
        ok = val <= tol
        failed += not ok
        lines.append(f"{'PASS' if ok else 'FAIL'}  {name}: {val:.3g} (tol {tol:.3g})\n")
    _emit("".join(lines), cfg, out)
    return EXIT_OK if not failed else EXIT_FAIL


HANDLERS = {
    "build": cmd_build,
    "correlations": cmd_correlations,
    "corrlength": cmd_corrlength,
    "parent-ham": cmd_parent_ham,
    "schmidt": cmd_schmidt,
    "reduce-bonds": cmd_reduce_bonds,
    "protocol-demo": cmd_protocol_demo,
    "verify": cmd_verify,
}


def main(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        cfg = parse_config(argv)
        return HANDLERS[cfg.command](cfg, out, err)
    except SystemExit as exc:  # argparse usage errors
        return int(exc.code or 0) and EXIT_PARSE
    except CliError as exc:
        err.write(f"error: {exc}\n")
        return exc.code
    except CriticalState as exc:
        err.write(f"critical: {exc}\n")
        return EXIT_CRITICAL
    except (ValueError, ArithmeticError) as exc:
        err.write(f"invalid: {exc}\n")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
