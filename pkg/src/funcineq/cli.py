"""Command-line front end: ``funcineq MODE PROBLEM [options]``.

Modes: validate, build, solve, export, certify, table, import.
Exit codes: 0 success, 1 validation failure, 2 build failure, 3 solver did
not return an optimal (or verified) answer, 4 I/O error.
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .certificate import (CertificateError, SProcConfig, SdpProblem, assemble_sproc,
                          extract_solution, verify_certificate)
from .problem import ProblemSpec, validate_group, validate_invariance, validate_structure
from .problem_file import ProblemFileError, parse_problem
from .relaxation import RelaxationError, build_relaxation
from .sdp import SdpaFormatError, SolverOptions, export_sdpa, import_solution, solve

MODES = ("validate", "build", "solve", "export", "certify", "table", "import")

EXIT_OK, EXIT_VALIDATION, EXIT_BUILD, EXIT_SOLVER, EXIT_IO = 0, 1, 2, 3, 4


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


@dataclass
class RunConfig:
    mode: str
    problem: str
    omega: list[int] = field(default_factory=lambda: [1])
    d: list[int] | None = None
    params: dict[str, int] = field(default_factory=dict)
    sproc: dict = field(default_factory=dict)
    solver: SolverOptions = field(default_factory=SolverOptions)
    export: str | None = None
    import_path: str | None = None
    dump: str | None = None
    seed: int = 0
    samples: int = 20

    def __post_init__(self):
        if self.mode not in MODES:
            raise CliError(f"unknown mode {self.mode!r}", EXIT_VALIDATION)
        if self.mode == "export" and not self.export:
            raise CliError("export needs --export PATH", EXIT_VALIDATION)
        if self.mode == "import" and not self.import_path:
            raise CliError("import needs --import PATH", EXIT_VALIDATION)
        if self.mode not in ("table", "validate") and len(self.omega) != 1:
            raise CliError(f"{self.mode} takes a single --omega", EXIT_VALIDATION)
        if self.mode not in ("table", "validate") and self.d is not None and len(self.d) != 1:
            raise CliError(f"{self.mode} takes a single --d", EXIT_VALIDATION)


# --------------------------------------------------------------------------
# helpers
# --------------------------------------------------------------------------

def bundled_problems() -> list[str]:
    return sorted(p.name for p in resources.files("funcineq").joinpath("data").iterdir()
                  if p.name.endswith(".fi"))


def resolve_problem(name: str) -> tuple[str, str]:
    """(text, source) for a path, or for the bundled file with the same name."""
    path = Path(name)
    if path.is_file():
        try:
            return path.read_text(), str(path)
        except OSError as exc:
            raise CliError(f"cannot read {path}: {exc.strerror}", EXIT_IO) from exc
    stem = path.name if path.suffix == ".fi" else path.name + ".fi"
    if stem in bundled_problems():
        return resources.files("funcineq").joinpath("data", stem).read_text(), f"examples/{stem}"
    raise CliError(f"no such problem file: {name} (bundled: {', '.join(bundled_problems())})",
                   EXIT_IO)


def load(cfg: RunConfig, d: int | None = None) -> ProblemSpec:
    text, source = resolve_problem(cfg.problem)
    params = dict(cfg.params)
    if d is not None:
        params["d"] = d
    try:
        return parse_problem(text, source, params)
    except (ProblemFileError, ValueError) as exc:
        raise CliError(str(exc), EXIT_VALIDATION) from exc


def validate(spec: ProblemSpec) -> tuple[bool, str]:
    reports = [("group", validate_group(spec.symmetry)), ("invariance", validate_invariance(spec)),
               ("structure", validate_structure(spec))]
    ok = all(r.ok for _, r in reports)
    text = "\n".join(f"{name}: {rep}" for name, rep in reports)
    return ok, text


_SPROC_KEYS = {"K": "K", "qdeg": "deg_q", "Qdeg": "deg_Q", "resdeg": "deg_residual",
               "per_block": "per_block", "cross_blocks": "cross_blocks", "Qvars": "Q_vars"}


def sproc_config(spec: ProblemSpec, overrides: dict) -> SProcConfig:
    """Certificate settings: problem-file defaults, then command-line flags."""
    merged = {**spec.certificate, **{k: v for k, v in overrides.items() if v is not None}}
    try:
        return SProcConfig(**{_SPROC_KEYS[k]: v for k, v in merged.items()})
    except ValueError as exc:
        raise CliError(str(exc), EXIT_VALIDATION) from exc


def default_degree_note(spec: ProblemSpec, overrides: dict) -> str | None:
    merged = {**spec.certificate, **{k: v for k, v in overrides.items() if v is not None}}
    unset = [k for k in ("Qdeg", "resdeg") if k not in merged]
    if unset:
        return f"note: default degree rule in use for {', '.join(unset)} (derived from deg f)"
    return None


def assemble(spec: ProblemSpec, omega: int, sproc: SProcConfig, out) -> SdpProblem:
    ok, text = validate(spec)
    if not ok:
        print(text, file=out)
        raise CliError("problem failed validation", EXIT_VALIDATION)
    try:
        relax = build_relaxation(spec, omega)
        if not relax.eq.consistent:
            print(relax.report(), file=out)
            raise CliError("moment equalities are inconsistent", EXIT_BUILD)
        return assemble_sproc(relax, sproc)
    except (RelaxationError, CertificateError) as exc:
        raise CliError(str(exc), EXIT_BUILD) from exc


def write_text(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc.strerror}", EXIT_IO) from exc


def read_text(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}", EXIT_IO) from exc


def format_value(v: float) -> str:
    return f"{v:#.7g}"


def describe_outcome(problem: SdpProblem, report, sol, diag) -> list[str]:
    lines = [report.summary()]
    if report.status != "optimal":
        if report.status == "primal_infeasible":
            lines.append("no certificate exists at these degrees")
        return lines
    if problem.objective is not None:
        for name, v in zip(problem.lambda_names, sol.lam):
            lines.append(f"{name}* = {format_value(v)}")
    elif problem.n_lambda:
        lines.append("certificate found for " + ", ".join(
            f"{n} = {format_value(v)}" for n, v in zip(problem.lambda_names, sol.lam)))
    else:
        lines.append("certificate found: the inequality holds")
    lines.append(f"certificate check: min Gram eigenvalue {diag['min_eigenvalue']:.2e}, "
                 f"identity residual {diag['identity_residual']:.2e} over {diag['samples']} "
                 f"samples -> {'ok' if diag['ok'] else 'FAILED'}")
    return lines


# --------------------------------------------------------------------------
# modes
# --------------------------------------------------------------------------

def _single(cfg: RunConfig) -> tuple[ProblemSpec, int]:
    d = cfg.d[0] if cfg.d else None
    return load(cfg, d), cfg.omega[0]


def _validate(cfg: RunConfig, out) -> int:
    spec = load(cfg, cfg.d[0] if cfg.d else None)
    ok, text = validate(spec)
    print(f"problem {spec.name}: n={spec.domain.n}, m={spec.field.m}, p={spec.field.p}, "
          f"d={spec.field.d}, |G|={len(spec.symmetry.elements)}", file=out)
    print(text, file=out)
    print("ok" if ok else "validation failed", file=out)
    return EXIT_OK if ok else EXIT_VALIDATION


def _build(cfg: RunConfig, out) -> int:
    spec, omega = _single(cfg)
    ok, text = validate(spec)
    if not ok:
        print(text, file=out)
        return EXIT_VALIDATION
    try:
        relax = build_relaxation(spec, omega)
    except RelaxationError as exc:
        raise CliError(str(exc), EXIT_BUILD) from exc
    print(relax.report(), file=out)
    if cfg.dump:
        write_text(cfg.dump, relax.dump())
    if not relax.eq.consistent:
        return EXIT_BUILD
    try:
        problem = assemble_sproc(relax, sproc_config(spec, cfg.sproc))
    except CertificateError as exc:
        raise CliError(str(exc), EXIT_BUILD) from exc
    print(problem.summary(), file=out)
    if cfg.export:
        write_text(cfg.export, export_sdpa(problem.sdp))
    return EXIT_OK


def _export(cfg: RunConfig, out) -> int:
    spec, omega = _single(cfg)
    problem = assemble(spec, omega, sproc_config(spec, cfg.sproc), out)
    write_text(cfg.export, export_sdpa(problem.sdp))
    if cfg.export != "-":
        print(f"wrote {cfg.export}: {problem.sdp.summary()}", file=out)
    return EXIT_OK


def _solve(cfg: RunConfig, out, strict: bool = False) -> int:
    spec, omega = _single(cfg)
    problem = assemble(spec, omega, sproc_config(spec, cfg.sproc), out)
    print(f"{spec.name}, omega = {omega}", file=out)
    print(problem.summary(), file=out)
    note = default_degree_note(spec, cfg.sproc)
    if note:
        print(note, file=out)
    if cfg.export:
        write_text(cfg.export, export_sdpa(problem.sdp))
    if cfg.import_path:
        try:
            report = import_solution(problem.sdp, read_text(cfg.import_path))
        except SdpaFormatError as exc:
            raise CliError(f"{cfg.import_path}: {exc}", EXIT_IO) from exc
    else:
        report = solve(problem.sdp, cfg.solver)
    sol = extract_solution(problem, report)
    diag = verify_certificate(sol, problem, samples=cfg.samples, seed=cfg.seed) \
        if report.status == "optimal" else {}
    for line in describe_outcome(problem, report, sol, diag):
        print(line, file=out)
    if strict:
        _certificate_detail(problem, sol, out)
    if report.status != "optimal":
        return EXIT_SOLVER
    if strict and not diag["ok"]:
        return EXIT_SOLVER
    return EXIT_OK


def _certificate_detail(problem: SdpProblem, sol, out) -> None:
    for term, G in zip(problem.terms, sol.grams):
        ev = np.linalg.eigvalsh(G)
        print(f"  {term.label}: Gram {G.shape[0]}x{G.shape[0]}, eigenvalues in "
              f"[{ev.min():.3e}, {ev.max():.3e}], rank {(ev > 1e-7 * max(ev.max(), 1)).sum()}",
              file=out)
    if sol.sigma_gram.size:
        ev = np.linalg.eigvalsh(sol.sigma_gram)
        print(f"  sigma_0: Gram {sol.sigma_gram.shape[0]}x{sol.sigma_gram.shape[0]}, eigenvalues in "
              f"[{ev.min():.3e}, {ev.max():.3e}]", file=out)


def table_cells(cfg: RunConfig, out=None):
    """Solve every (omega, d) cell; yields (omega, d, status, value, seconds)."""
    for omega in cfg.omega:
        for d in cfg.d or [None]:
            t0 = time.perf_counter()
            try:
                spec = load(cfg, d)
                problem = assemble(spec, omega, sproc_config(spec, cfg.sproc), out or _Null())
            except CliError as exc:
                yield omega, d, "error", str(exc), time.perf_counter() - t0
                continue
            report = solve(problem.sdp, cfg.solver)
            value = None
            if report.status == "optimal":
                sol = extract_solution(problem, report)
                value = float(sol.lam[0]) if problem.n_lambda else 0.0
            yield omega, d, report.status, value, time.perf_counter() - t0


class _Null:
    def write(self, _s):
        return 0

    def flush(self):
        pass


_CELL = {"primal_infeasible": "infeas", "dual_infeasible": "unbdd", "max_iter": "--",
         "numerical": "fail", "error": "error"}
_FOOT = {"infeas": "infeas: no certificate exists at these degrees",
         "unbdd": "unbdd: the certificate objective is unbounded",
         "--": "--: solver reached the iteration limit",
         "fail": "fail: numerical breakdown in the solver",
         "error": "error: the relaxation could not be built"}


def _table(cfg: RunConfig, out) -> int:
    cols = cfg.d or [None]
    width = 11
    header = "omega".ljust(7) + "".join(
        (f"d={d}" if d is not None else "value").rjust(width) for d in cols)
    first = load(cfg, cols[0])
    K = sproc_config(first, cfg.sproc).K
    print(f"Upper bounds on the minimum lambda (K={K})", file=out)
    print(header, file=out)
    results = {}
    for omega, d, status, value, secs in table_cells(cfg):
        results[omega, d] = (status, value, secs)
    used = set()
    all_ok = True
    for omega in cfg.omega:
        row = str(omega).ljust(7)
        for d in cols:
            status, value, _ = results[omega, d]
            if status == "optimal":
                cell = format_value(value)
            else:
                all_ok = False
                cell = _CELL.get(status, status)
                used.add(cell)
            row += cell.rjust(width)
        print(row, file=out)
    for mark in ("infeas", "unbdd", "--", "fail", "error"):
        if mark in used:
            print(f"  {_FOOT[mark]}", file=out)
    total = sum(v[2] for v in results.values())
    note = default_degree_note(first, cfg.sproc)
    if note:
        print(f"  {note}", file=out)
    print(f"({len(results)} cells, {total:.1f} s)", file=out)
    return EXIT_OK if all_ok else EXIT_SOLVER


def _import(cfg: RunConfig, out) -> int:
    return _solve(cfg, out)


def run(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    handlers = {"validate": _validate, "build": _build, "solve": _solve, "export": _export,
                "certify": lambda c, o: _solve(c, o, strict=True), "table": _table,
                "import": _import}
    try:
        return handlers[cfg.mode](cfg, out)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


# --------------------------------------------------------------------------
# argument parsing
# --------------------------------------------------------------------------

def int_range(text: str) -> list[int]:
    """``N`` or ``A..B`` (inclusive)."""
    try:
        if ".." in text:
            a, b = text.split("..", 1)
            lo, hi = int(a), int(b)
            if hi < lo:
                raise ValueError
            return list(range(lo, hi + 1))
        return [int(text)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected N or A..B, got {text!r}") from None


def int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected N[,N...], got {text!r}") from None


def param(text: str) -> tuple[str, int]:
    name, sep, value = text.partition("=")
    try:
        if not sep or not name.strip():
            raise ValueError
        return name.strip(), int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected NAME=INT, got {text!r}") from None


def on_off(text: str) -> bool:
    if text not in ("on", "off"):
        raise argparse.ArgumentTypeError("expected on or off")
    return text == "on"


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="funcineq",
                                 description="Certify polynomial inequalities between integrals "
                                             "of functions by moment relaxation and SDP.")
    ap.add_argument("mode", choices=MODES)
    ap.add_argument("problem", help="problem file, or the name of a bundled example")
    ap.add_argument("--omega", type=int_range, default=[1], help="relaxation order, N or A..B")
    ap.add_argument("--d", type=int_range, help="value(s) of the problem parameter d, N or A..B")
    ap.add_argument("--param", type=param, action="append", default=[],
                    help="set an integer problem parameter, NAME=INT")
    ap.add_argument("--K", type=int, help="number of iterated-trace terms (default 1)")
    ap.add_argument("--qdeg", type=int, help="degree of the linear multipliers")
    ap.add_argument("--Qdeg", type=int_list, help="degree(s) of the SOS matrices Q_k")
    ap.add_argument("--resdeg", type=int, help="degree of the SOS residual")
    ap.add_argument("--per-block", type=on_off, help="on|off (default on)")
    ap.add_argument("--cross-blocks", type=on_off,
                    help="include mixed block tuples in per-block mode (on|off)")
    ap.add_argument("--Qvars", choices=("f", "all"),
                    help="variables the certificate polynomials may depend on")
    ap.add_argument("--tol", type=float, default=1e-8, help="solver gap and feasibility tolerance")
    ap.add_argument("--max-iter", type=int, default=200)
    ap.add_argument("--export", metavar="PATH", help="write the SDP in SDPA sparse format")
    ap.add_argument("--import", dest="import_path", metavar="PATH",
                    help="read an SDPA-style solution instead of solving")
    ap.add_argument("--dump", metavar="PATH", help="build: write the equality system and LMI")
    ap.add_argument("--seed", type=int, default=0, help="seed for certificate sampling")
    ap.add_argument("--samples", type=int, default=20, help="identity check sample points")
    return ap


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    sproc = {"K": ns.K, "qdeg": ns.qdeg, "Qdeg": ns.Qdeg, "resdeg": ns.resdeg,
             "per_block": ns.per_block, "cross_blocks": ns.cross_blocks, "Qvars": ns.Qvars}
    try:
        solver = SolverOptions(tol_gap=ns.tol, tol_feas=ns.tol, tol_infeas=ns.tol,
                               max_iter=ns.max_iter)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_VALIDATION) from exc
    return RunConfig(mode=ns.mode, problem=ns.problem, omega=ns.omega, d=ns.d,
                     params=dict(ns.param), sproc=sproc, solver=solver, export=ns.export,
                     import_path=ns.import_path, dump=ns.dump, seed=ns.seed, samples=ns.samples)


def main(argv: list[str] | None = None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(ns)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
