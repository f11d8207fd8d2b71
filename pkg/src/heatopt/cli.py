"""Command-line entry point: optimize | solve | eigen | verify | sweep."""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .config import RunConfig
from .design import DesignField, MaterialParams, coefficient
from .fem import assemble_stiffness, lumped_mass
from .heat import RunParams, SourceSpec, duality_steady, duality_time_average, \
    solve_elliptic, solve_parabolic
from .io_vtk import write_history_csv, write_oracle_csv, write_vtk
from .mesh import build_rect_mesh
from .optimizer import OptimizerConfig, run as run_optimizer
from .oracles import run_derivative_suite, run_galerkin_suite, run_manufactured_suite
from .spectral import check_source_assumption, smallest_eigenpair

EXIT_OK = 0
EXIT_FAIL = 1      # oracle or validation failure
EXIT_RUNTIME = 2


def _build_problem(cfg: RunConfig):
    mesh = build_rect_mesh(cfg.mesh.nx, cfg.mesh.ny, tuple(cfg.mesh.domain))
    mat = cfg.material
    source = SourceSpec(kind=cfg.source.kind, amplitude=cfg.source.amplitude,
                        table=tuple(map(tuple, cfg.source.table)))
    phi0 = DesignField(np.full(mesh.n_nodes, cfg.design.phi0),
                       gamma=cfg.design.gamma, m=cfg.design.m)
    opt = OptimizerConfig(epsilon=cfg.optimizer.epsilon, tau=cfg.optimizer.tau,
                          q=cfg.optimizer.q, m=cfg.design.m,
                          delta_reg=cfg.optimizer.delta_reg, eta1=cfg.optimizer.eta1,
                          eta2=cfg.optimizer.eta2, max_iters=cfg.optimizer.max_iters,
                          mode=cfg.mode.kind, T=cfg.mode.T, nt=cfg.mode.nt)
    return mesh, mat, source, phi0, opt


def _load_config(args) -> RunConfig:
    cfg = cfgmod.parse_config(args.config) if args.config else RunConfig().validate()
    if args.set:
        cfg = cfgmod.apply_overrides(cfg, args.set)
    if args.out:
        cfg.output_dir = args.out
    return cfg


def _out_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_optimize(args) -> int:
    cfg = _load_config(args)
    mesh, mat, source, phi0, opt = _build_problem(cfg)
    result = run_optimizer(opt, mesh, mat, source, phi0, u0=cfg.u0)
    out = _out_dir(cfg)
    write_history_csv(out / "history.csv", result.history)
    fields = {"phi": result.design.phi}
    if opt.mode == "elliptic":
        fields["u"] = result.final_state
    else:
        fields["u"] = result.final_state.fields[-1]
    write_vtk(out / "result.vtk", mesh, fields)
    cfgmod.write_config(cfg, out / "config.yaml")
    last = result.history[-1]
    print(f"converged={result.converged} iters={last.iter} J={last.J:.10e}")
    return EXIT_OK if result.converged else EXIT_FAIL


def cmd_solve(args) -> int:
    cfg = _load_config(args)
    mesh, mat, source, phi0, opt = _build_problem(cfg)
    kappa = coefficient(phi0.phi, phi0.m, mesh, mat)
    out = _out_dir(cfg)
    if cfg.mode.kind == "elliptic":
        u = solve_elliptic(mesh, kappa, source.f_infinity())
        energy = duality_steady(mesh, u, source.f_infinity())
    else:
        series = solve_parabolic(mesh, kappa, source,
                                 RunParams(T=cfg.mode.T, nt=opt.nt_for(), u0=cfg.u0))
        u = series.fields[-1]
        energy = duality_time_average(series, source)
    write_vtk(out / "state.vtk", mesh, {"u": u, "phi": phi0.phi})
    print(f"E={energy:.10e}")
    return EXIT_OK


def cmd_eigen(args) -> int:
    cfg = _load_config(args)
    mesh, mat, source, phi0, _ = _build_problem(cfg)
    kappa = coefficient(phi0.phi, phi0.m, mesh, mat)
    K = assemble_stiffness(mesh, kappa)
    pair = smallest_eigenpair(K, lumped_mass(mesh), mesh)
    verdict = ""
    if source.kind == "constant":
        ok = check_source_assumption(source.amplitude, cfg.u0, pair.lambda1)
        verdict = "PASS" if ok else "FAIL"
    out = _out_dir(cfg)
    (out / "eigen.txt").write_text(
        f"lambda1 {pair.lambda1:.17e}\nassumption {verdict or 'N/A'}\n")
    write_vtk(out / "eigenmode.vtk", mesh, {"w1": pair.w1})
    print(f"lambda1={pair.lambda1:.10e} assumption={verdict or 'N/A'}")
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = _load_config(args)
    reports = (run_manufactured_suite() + run_derivative_suite(seed=cfg.seed)
               + run_galerkin_suite())
    out = _out_dir(cfg)
    write_oracle_csv(out / "oracles.csv", reports)
    all_ok = True
    for r in reports:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status} {r.name}: measured={r.measured:.6e} expected={r.expected:.6e} "
              f"tol={r.tolerance:.1e}")
        all_ok &= r.passed
    return EXIT_OK if all_ok else EXIT_FAIL


def _sweep_item(payload):
    cfg_dict, param, value = payload
    cfg = cfgmod.from_dict(cfg_dict)
    if param == "T":
        if value == "inf":
            cfg.mode.kind = "elliptic"
        else:
            cfg.mode.kind = "parabolic"
            cfg.mode.T = float(value)
            cfg.mode.nt = None
    else:
        cfg.optimizer.epsilon = float(value)
    mesh, mat, source, phi0, opt = _build_problem(cfg)
    result = run_optimizer(opt, mesh, mat, source, phi0, u0=cfg.u0)
    last = result.history[-1]
    return str(value), last.J, last.E, result.converged, last.iter


def cmd_sweep(args) -> int:
    cfg = _load_config(args)
    values = [v.strip() for v in args.values.split(",")]
    jobs = [(cfgmod.to_dict(cfg), args.param, v) for v in values]
    workers = int(os.environ.get("HEATOPT_WORKERS", "1"))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_item, jobs))
    else:
        rows = [_sweep_item(job) for job in jobs]
    out = _out_dir(cfg)
    with open(out / "sweep.csv", "w") as fh:
        fh.write(f"{args.param},J,E,converged,iters\n")
        for value, J, E, conv, iters in rows:
            fh.write(f"{value},{J:.17e},{E:.17e},{int(conv)},{iters}\n")
    for value, J, E, conv, iters in rows:
        print(f"{args.param}={value}: J={J:.10e} converged={conv} iters={iters}")
    return EXIT_OK if all(r[3] for r in rows) else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="heatopt",
                                     description="Two-material heat conduction design "
                                                 "via a nonlinear-diffusion level-set method")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="YAML configuration file")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override a config entry, e.g. --set mode.T=5")
        p.add_argument("--out", help="output directory (overrides config)")

    common(sub.add_parser("optimize", help="run the level-set optimization"))
    common(sub.add_parser("solve", help="solve the state for the initial design"))
    common(sub.add_parser("eigen", help="smallest eigenvalue and source assumption check"))
    common(sub.add_parser("verify", help="run the independent oracle suites"))
    p_sweep = sub.add_parser("sweep", help="optimize over a list of T or epsilon values")
    common(p_sweep)
    p_sweep.add_argument("--param", choices=["T", "epsilon"], required=True)
    p_sweep.add_argument("--values", required=True,
                         help="comma-separated values; 'inf' selects the elliptic case")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {"optimize": cmd_optimize, "solve": cmd_solve, "eigen": cmd_eigen,
                "verify": cmd_verify, "sweep": cmd_sweep}
    try:
        return handlers[args.command](args)
    except (cfgmod.ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except Exception as exc:  # noqa: BLE001
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
