"""Command-line front end: ``fecert {mesh,solve,certify,oracle}``.

Reports are JSON with sorted keys, so repeated runs on the same input are
byte-identical.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.io

from . import certify as cert_mod
from .fem import assemble_linearized
from .mesh import Mesh, MeshError, analyze, gen_structured, load_mesh, write_mesh
from .problem import ProblemSpec, SourceField
from .solver import SolveOptions, SolverError, solve_picard

logger = logging.getLogger("fecert")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INADMISSIBLE = 2
EXIT_CODES = {
    cert_mod.CERTIFIED: 0,
    cert_mod.ORACLE_ONLY: 3,
    cert_mod.NOT_CERTIFIED: 4,
    cert_mod.REFUTED: 5,
}
EXIT_NOT_MONOTONE = 5


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    mesh: dict
    problem: dict
    f1: object = None
    f2: object = None
    solver: dict = field(default_factory=dict)
    certify: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, d: dict, base: Path | None = None) -> "RunConfig":
        unknown = set(d) - {"mesh", "problem", "f1", "f2", "solver", "certify", "output"}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "mesh" not in d or "problem" not in d:
            raise ConfigError("config needs 'mesh' and 'problem' blocks")
        mesh = dict(d["mesh"])
        if ("path" in mesh) == ("gen" in mesh):
            raise ConfigError("mesh block needs exactly one of 'path' or 'gen'")
        if "path" in mesh and base is not None:
            mesh["path"] = str((base / mesh["path"]))
        return cls(mesh, d["problem"], d.get("f1"), d.get("f2"), d.get("solver", {}),
                   d.get("certify", {}), d.get("output", {}))

    @classmethod
    def load(cls, path) -> "RunConfig":
        path = Path(path)
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
        return cls.from_dict(data, path.parent)

    def build_mesh(self) -> Mesh:
        if "path" in self.mesh:
            return load_mesh(self.mesh["path"])
        return gen_structured(self.mesh["gen"], int(self.mesh.get("n", 4)))

    def build_spec(self) -> ProblemSpec:
        return ProblemSpec.from_config(self.problem)

    def sources(self, spec):
        f1 = spec.f if self.f1 is None else SourceField.from_config(self.f1)
        f2 = f1 if self.f2 is None else SourceField.from_config(self.f2)
        return f1, f2

    def solve_options(self, **override) -> SolveOptions:
        s = {k: v for k, v in self.solver.items() if k in ("max_iters", "tol", "dense_limit")}
        s.update({k: v for k, v in override.items() if v is not None})
        return SolveOptions(**s)


def _dump(obj, out: Path | None):
    text = json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text)


def _report_path(args, cfg: RunConfig | None, name: str) -> Path | None:
    if getattr(args, "report", None):
        return Path(args.report)
    if cfg is not None and cfg.output.get("dir"):
        return Path(cfg.output["dir"]) / name
    return None


# -- subcommands -----------------------------------------------------------------

def cmd_mesh(args) -> int:
    if (args.gen is None) == (args.inp is None):
        raise ConfigError("give exactly one of --gen or --in")
    mesh = gen_structured(args.gen, args.n) if args.gen else load_mesh(args.inp)
    adm = analyze(mesh)
    report = {"schema": 1, "n_vertices": mesh.n_vertices,
              "n_triangles": mesh.n_triangles,
              "n_interior": int(len(mesh.interior_vertices)),
              "admissibility": adm.to_dict()}
    out = None
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        stem = out / (args.gen or Path(args.inp).stem)
        node, ele = write_mesh(mesh, stem)
        report["files"] = [node.name, ele.name]
        _dump(report, out / "report.json")
    else:
        _dump(report, None)
    return EXIT_OK if adm.admissible else EXIT_INADMISSIBLE


def cmd_solve(args) -> int:
    cfg = RunConfig.load(args.config)
    mesh, spec = cfg.build_mesh(), cfg.build_spec()
    f1, _ = cfg.sources(spec)
    res = solve_picard(mesh, spec, f1, cfg.solve_options(tol=args.tol, max_iters=args.max_iters))
    _dump({"schema": 1, "solve": res.to_dict()}, _report_path(args, cfg, "solve.json"))
    return EXIT_OK


def _certify_options(cfg: RunConfig, args) -> dict:
    c = dict(cfg.certify)
    for key in ("eps0", "sign_tol", "oracle_cap", "oracle_tol", "max_halvings"):
        v = getattr(args, key, None)
        if v is not None:
            c[key] = v
    if getattr(args, "no_oracle", False):
        c["oracle"] = False
    allowed = {"eps0", "sign_tol", "oracle_cap", "oracle_tol", "max_halvings", "oracle"}
    unknown = set(c) - allowed
    if unknown:
        raise ConfigError(f"unknown certify options: {sorted(unknown)}")
    return c


def cmd_certify(args) -> int:
    cfg = RunConfig.load(args.config)
    mesh, spec = cfg.build_mesh(), cfg.build_spec()
    f1, f2 = cfg.sources(spec)
    opts = cfg.solve_options(tol=args.tol, max_iters=args.max_iters)
    kw = _certify_options(cfg, args)
    report = {"schema": 1, "mesh": {"n_vertices": mesh.n_vertices,
                                    "n_triangles": mesh.n_triangles}}
    if f1 == f2:
        # uniqueness run: same data, two different starting points
        guess = np.where(mesh.boundary_mask, 0.0, 1.0)
        opts_b = cfg.solve_options(tol=args.tol, max_iters=args.max_iters)
        opts_b.initial_guess = guess
        rep = cert_mod.comparison_experiment(mesh, spec, f1, f2, opts, opts_b,
                                             require_order=False, **kw)
    else:
        rep = cert_mod.comparison_experiment(mesh, spec, f1, f2, opts, opts,
                                             require_order=False, **kw)
    report["comparison"] = rep.to_dict()
    report["verdict"] = rep.certificate.verdict
    _dump(report, _report_path(args, cfg, "certificate.json"))
    return EXIT_CODES[rep.certificate.verdict]


def cmd_oracle(args) -> int:
    if (args.matrix is None) == (args.config is None):
        raise ConfigError("give exactly one of --matrix or --config")
    if args.matrix:
        A = scipy.io.mmread(args.matrix)
        cfg = None
    else:
        cfg = RunConfig.load(args.config)
        mesh, spec = cfg.build_mesh(), cfg.build_spec()
        f1, f2 = cfg.sources(spec)
        opts = cfg.solve_options(tol=args.tol, max_iters=args.max_iters)
        u1 = solve_picard(mesh, spec, f1, opts).u
        u2 = u1 if f2 == f1 else solve_picard(mesh, spec, f2, opts).u
        A = assemble_linearized(mesh, spec, u1, u2).A
    if A.shape[0] != A.shape[1]:
        raise ConfigError("matrix must be square")
    if A.shape[0] > args.oracle_cap:
        raise ConfigError(f"matrix too large for the dense oracle ({A.shape[0]} > {args.oracle_cap})")
    res = cert_mod.monotone_oracle(A, args.oracle_tol)
    _dump(cert_mod._jsonable({"schema": 1, "n": A.shape[0], "oracle": res}),
          _report_path(args, cfg, "oracle.json"))
    return EXIT_OK if res.monotone else EXIT_NOT_MONOTONE


# -- parser ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fecert",
                                description="Monotonicity certificates for P1 quasilinear FEM.")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    m = sub.add_parser("mesh", help="generate or load a mesh and report admissibility")
    m.add_argument("--gen", choices=["three_direction", "right_uniform"])
    m.add_argument("--n", type=int, default=4)
    m.add_argument("--in", dest="inp", help=".node/.ele stem or file")
    m.add_argument("--out", help="output directory for mesh files and report.json")
    m.set_defaults(func=cmd_mesh)

    def solver_flags(sp):
        sp.add_argument("--tol", type=float, help="Picard increment tolerance (default 1e-10)")
        sp.add_argument("--max-iters", type=int, help="Picard iteration cap (default 200)")
        sp.add_argument("--report", help="write the JSON report here instead of stdout")

    s = sub.add_parser("solve", help="solve the nonlinear problem for f1")
    s.add_argument("config")
    solver_flags(s)
    s.set_defaults(func=cmd_solve)

    c = sub.add_parser("certify", help="solve for f1, f2 and certify A(u1, u2)")
    c.add_argument("config")
    solver_flags(c)
    c.add_argument("--eps0", type=float, help=f"base scaling deficit (default {cert_mod.DEFAULT_EPS0})")
    c.add_argument("--sign-tol", type=float, help=f"relative sign tolerance (default {cert_mod.SIGN_TOL})")
    c.add_argument("--max-halvings", type=int, help=f"eps_bar halvings (default {cert_mod.MAX_HALVINGS})")
    c.add_argument("--oracle-cap", type=int, help=f"largest n for the dense oracle (default {cert_mod.ORACLE_CAP})")
    c.add_argument("--oracle-tol", type=float, help=f"relative oracle tolerance (default {cert_mod.ORACLE_TOL})")
    c.add_argument("--no-oracle", action="store_true", help="skip the dense oracle")
    c.set_defaults(func=cmd_certify)

    o = sub.add_parser("oracle", help="dense monotonicity check of a matrix")
    o.add_argument("--matrix", help="Matrix Market file")
    o.add_argument("--config", help="run config; checks A(u1, u2)")
    solver_flags(o)
    o.add_argument("--oracle-cap", type=int, default=cert_mod.ORACLE_CAP)
    o.add_argument("--oracle-tol", type=float, default=cert_mod.ORACLE_TOL)
    o.set_defaults(func=cmd_oracle)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (MeshError, ConfigError, SolverError, OSError, ValueError, KeyError) as exc:
        print(f"fecert: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
