"""Command-line interface.

Output paths default to the directory named by ``VORTEXTUBES_OUT`` (or the
current directory).  Errors are printed as one JSON object
``{"error": ..., "message": ...}`` and the exit status is nonzero.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

OUT_ENV = "VORTEXTUBES_OUT"
_THREAD_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS")

EXIT_ERROR = 2
EXIT_FAILED = 1


def _floats(text: str, n: int | None = None):
    vals = [float(v) for v in text.split(",")]
    if n is not None and len(vals) != n:
        raise argparse.ArgumentTypeError(f"expected {n} comma-separated numbers")
    return vals


def _ints(text: str):
    return [int(v) for v in text.split(",")]


def _out_path(name: str | None, default: str) -> Path:
    base = Path(os.environ.get(OUT_ENV, "."))
    p = Path(name) if name else Path(default)
    return p if p.is_absolute() or name else base / p


def _emit(obj):
    from .io import to_jsonable
    print(json.dumps(to_jsonable(obj), sort_keys=True, indent=2))


def _curve_arg(p):
    p.add_argument("--curve", default="trefoil",
                   help="curve JSON file or built-in name (trefoil, circle)")
    p.add_argument("--eps", type=float, required=True, help="tube thickness")


def _grid_arg(p, default="256,16,32"):
    p.add_argument("--grid", type=_ints, default=_ints(default), help="n_alpha,n_r,n_theta")


# ---------------------------------------------------------------------------
# subcommand implementations
# ---------------------------------------------------------------------------

def _chart(args):
    from .chart import TubeChart
    from .config import resolve_curve
    return TubeChart(resolve_curve(args.curve), args.eps)


def cmd_curve_check(args):
    from .config import resolve_curve
    from .curves import check_admissible
    _emit(check_admissible(resolve_curve(args.curve), args.eps).to_dict())


def cmd_tube_sample(args):
    import numpy as np

    from .io import write_csv
    ch = _chart(args)
    na, nr, nt = args.grid
    a = np.arange(na) * ch.length / na
    r = (np.arange(nr) + 1) / nr
    t = np.arange(nt) * 2 * np.pi / nt
    A, R, T = (v.ravel() for v in np.meshgrid(a, r, t, indexing="ij"))
    X = ch.polar_to_cartesian(A, R, T)
    m = ch.metric(A, R, T)
    rows = zip(A, R, T, X[:, 0], X[:, 1], X[:, 2], m.A, m.B)
    path = write_csv(_out_path(args.out, "tube.csv"), ["alpha", "r", "theta", "x", "y", "z", "A", "B"], rows,
                     curve=str(args.curve), eps=args.eps)
    _emit(dict(out=str(path), rows=len(A)))


def _harmonic(args):
    from .grid import TubeGrid, TubeScalarField
    from .harmonic import HarmonicField, solve_harmonic
    from .io import read_grid
    ch = _chart(args)
    if getattr(args, "psi", None):
        vals, head = read_grid(args.psi)
        g = TubeGrid(ch, *head["shape"])
        return HarmonicField(g, TubeScalarField(g, vals, "psi"))
    return solve_harmonic(ch, *args.grid)


def cmd_solve_psi(args):
    import numpy as np

    from .harmonic import solve_harmonic
    from .io import write_grid, write_json
    ch = _chart(args)
    h = solve_harmonic(ch, *args.grid, tol=args.tol)
    vals = np.zeros(h.grid.shape) if h.psi is None else h.psi.values
    header = dict(eps=args.eps, length=ch.length, n_alpha=args.grid[0], n_r=args.grid[1],
                  n_theta=args.grid[2], r_nodes=h.grid.r)
    out = _out_path(args.out, "psi.bin")
    write_grid(out, vals, header)
    info = {} if h.psi is None else dict(h.psi.info)
    side = write_json(out.with_suffix(".json"), dict(header=header, residuals=info,
                                                     boundary_normal_max=h.boundary_normal_max()))
    _emit(dict(out=str(out), sidecar=str(side), residuals=info))


def cmd_field_eval(args):
    import numpy as np
    h = _harmonic(args)
    a, r, t = args.at
    fv = h.value(a, np.array([r]), np.array([t]), polar=r >= h.grid.r[-1])
    x = h.to_euclidean(fv)
    d = dict(alpha=a, r=r, theta=t, v_alpha=float(fv.v_alpha[0]), v_y=fv.v_y[0].tolist(),
             cartesian=x[0].tolist())
    if fv.v_r is not None:
        d.update(v_r=float(fv.v_r[0]), v_theta=float(fv.v_theta[0]))
    _emit(d)


def cmd_field_grid(args):
    import numpy as np

    from .io import write_csv
    h = _harmonic(args)
    ch = h.chart
    na, nr, nt = args.sample
    a = np.arange(na) * ch.length / na
    r = (np.arange(nr) + 1) / nr
    t = np.arange(nt) * 2 * np.pi / nt
    A, R, T = (v.ravel() for v in np.meshgrid(a, r, t, indexing="ij"))
    fv = h.values(A, R, T)
    X = ch.polar_to_cartesian(A, R, T)
    U = h.to_euclidean(fv)
    rows = zip(A, R, T, fv.v_alpha, fv.v_y[:, 0], fv.v_y[:, 1], X[:, 0], X[:, 1], X[:, 2],
               U[:, 0], U[:, 1], U[:, 2])
    path = write_csv(_out_path(args.out, "field.csv"),
                     ["alpha", "r", "theta", "v_alpha", "v_y1", "v_y2", "x", "y", "z", "ux", "uy", "uz"],
                     rows, curve=str(args.curve), eps=args.eps)
    _emit(dict(out=str(path), rows=len(A)))


def _read_seeds(path):
    """Seeds from JSON ``[[r, theta], ...]`` or CSV with ``r,theta`` rows."""
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        data = [[float(v) for v in line.split(",")[:2]] for line in text.splitlines()
                if line.strip() and not line.startswith("#") and not line[0].isalpha()]
    return [d[0] for d in data], [d[1] for d in data]


def cmd_flow_poincare(args):
    import numpy as np

    from .flow import field_X
    from .io import write_csv
    from .runner import section_rows
    h = _harmonic(args)
    if args.seeds:
        r0, t0 = _read_seeds(args.seeds)
    else:
        rng = np.random.default_rng(args.seed)
        r0 = np.sqrt(rng.uniform(0.01, 1.0, 8))
        t0 = rng.uniform(0, 2 * np.pi, 8)
    rows = section_rows(field_X(h.chart, h), r0, t0, args.iters, args.tol)
    path = write_csv(_out_path(args.out, "sec.csv"), ["seed_id", "iter", "r", "theta_lifted"], rows,
                     curve=str(args.curve), eps=args.eps, seed=args.seed)
    _emit(dict(out=str(path), rows=len(rows)))


def cmd_flow_kam(args):
    from .config import RunConfig
    from .flow import field_X
    from .io import write_json
    from .runner import kam_report
    h = _harmonic(args)
    cfg = RunConfig(curves=[args.curve], eps=args.eps, birkhoff_iters=args.iters)
    rep = kam_report(h.chart, field_X(h.chart, h), cfg)
    path = write_json(_out_path(args.out, "report.json"), rep)
    rep["out"] = str(path)
    _emit(rep)


def cmd_predict(args):
    from .config import resolve_curve
    from .predictions import predict
    _emit(predict(resolve_curve(args.curve), args.eps).to_dict())


def _tubes(path):
    from .config import resolve_curve
    d = json.loads(Path(path).read_text())
    specs = d["curves"] if isinstance(d, dict) else d
    return [resolve_curve(s) for s in specs]


def cmd_global_fit(args):
    from .globalfield import PipelineConfig, pipeline
    from .io import write_json
    curves = _tubes(args.tubes) if args.tubes else [_chart(args).curve]
    pc = PipelineConfig(lam=args.lam, method=args.method, L=args.L, n_sources=args.sources,
                        source_radius=args.source_radius, reg=args.reg, grid=tuple(args.grid),
                        orbits=False)
    res = pipeline(curves, args.eps, pc)
    doc = dict(representation=res.field.helmholtz.to_dict(), lam=res.lam, projected=True,
               fit=res.fit.to_dict(), tubes=[t.to_dict() for t in res.tubes])
    path = write_json(_out_path(args.out, "field.json"), doc)
    _emit(dict(out=str(path), lam=res.lam, misfit=res.fit.misfit,
               per_tube={str(k): v for k, v in res.fit.per_label.items()}))


def cmd_global_sample(args):
    import numpy as np

    from .globalfield import beltrami_project, field_from_dict
    from .io import read_json, write_vtk_vectors
    doc = read_json(args.field)
    w = field_from_dict(doc["representation"])
    u = beltrami_project(w) if doc.get("projected", True) else w
    x0, x1, y0, y1, z0, z1 = args.box
    n = args.n
    axes = [np.linspace(lo, hi, n) for lo, hi in ((x0, x1), (y0, y1), (z0, z1))]
    P = np.stack(np.meshgrid(*axes, indexing="ij"), -1)
    U = np.asarray(u(P.reshape(-1, 3))).reshape(n, n, n, 3)
    spacing = [(hi - lo) / (n - 1) for lo, hi in ((x0, x1), (y0, y1), (z0, z1))]
    path = write_vtk_vectors(_out_path(args.out, "u.vtk"), (x0, y0, z0), spacing, (n, n, n), U)
    _emit(dict(out=str(path), points=n ** 3))


def cmd_pipeline(args):
    from .config import RunConfig
    from .runner import run_pipeline
    cfg = RunConfig.load(args.config)
    if args.out_dir:
        cfg.out_dir = args.out_dir
    elif OUT_ENV in os.environ and not Path(cfg.out_dir).is_absolute():
        cfg.out_dir = str(Path(os.environ[OUT_ENV]) / cfg.out_dir)
    log = (lambda m: print(m, file=sys.stderr)) if args.verbose else None
    summary = run_pipeline(cfg, log=log)
    _emit(dict(status="ok", out_dir=cfg.out_dir, files=summary["files"], tubes=summary["tubes"]))


VERIFY_REQUIRED = ("curve", "eps_values")


def cmd_verify(args):
    from .acceptance import Suite, report, run_suite
    from .config import resolve_curve
    from .io import write_json
    if args.config:
        cfg = json.loads(Path(args.config).read_text())
        missing = [k for k in VERIFY_REQUIRED if k not in cfg]
        if missing:
            _emit(dict(error="ConfigError", message="missing inputs", missing=missing))
            return EXIT_ERROR
    else:
        cfg = dict(curve="trefoil", eps_values=[0.1, 0.05, 0.025])
    suite = Suite(resolve_curve(cfg["curve"]), cfg["eps_values"], tuple(cfg.get("grid", (256, 16, 32))),
                  int(cfg.get("seed", 0)))
    criteria = args.criteria or cfg.get("criteria")
    echo = (lambda m: print(m, file=sys.stderr))
    results = run_suite(criteria, suite, cfg.get("thresholds"), echo=echo)
    rep = report(results)
    if args.out:
        write_json(_out_path(args.out, "verify.json"), rep, seed=suite.seed)
    _emit(rep)
    return 0 if rep["all_passed"] else EXIT_FAILED


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="vortextubes", description=__doc__.splitlines()[0])
    ap.add_argument("--threads", type=int, default=None, help="cap BLAS/OpenMP threads")
    sub = ap.add_subparsers(dest="group", required=True)

    g = sub.add_parser("curve").add_subparsers(dest="action", required=True)
    p = g.add_parser("check", help="admissibility report as JSON")
    _curve_arg(p)
    p.set_defaults(func=cmd_curve_check)

    g = sub.add_parser("tube").add_subparsers(dest="action", required=True)
    p = g.add_parser("sample", help="CSV of chart points and metric factors")
    _curve_arg(p)
    _grid_arg(p, "16,4,8")
    p.add_argument("--out")
    p.set_defaults(func=cmd_tube_sample)

    g = sub.add_parser("solve").add_subparsers(dest="action", required=True)
    p = g.add_parser("psi", help="solve the Neumann problem of the harmonic field")
    _curve_arg(p)
    _grid_arg(p)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--out")
    p.set_defaults(func=cmd_solve_psi)

    g = sub.add_parser("field").add_subparsers(dest="action", required=True)
    p = g.add_parser("eval", help="harmonic field at one chart point")
    _curve_arg(p)
    _grid_arg(p)
    p.add_argument("--psi", help="binary grid from 'solve psi' (solved on the fly otherwise)")
    p.add_argument("--at", type=lambda s: _floats(s, 3), required=True, help="alpha,r,theta")
    p.set_defaults(func=cmd_field_eval)
    p = g.add_parser("grid", help="CSV of harmonic field samples")
    _curve_arg(p)
    _grid_arg(p)
    p.add_argument("--psi")
    p.add_argument("--sample", type=_ints, default=[32, 4, 16], help="n_alpha,n_r,n_theta samples")
    p.add_argument("--out")
    p.set_defaults(func=cmd_field_grid)

    g = sub.add_parser("flow").add_subparsers(dest="action", required=True)
    p = g.add_parser("poincare", help="Poincare orbits as CSV")
    _curve_arg(p)
    _grid_arg(p)
    p.add_argument("--psi")
    p.add_argument("--seeds", help="JSON [[r, theta], ...] or CSV r,theta")
    p.add_argument("--seed", type=int, default=0, help="RNG seed for random seeds")
    p.add_argument("--iters", type=int, default=100)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--out")
    p.set_defaults(func=cmd_flow_poincare)
    p = g.add_parser("kam-report", help="boundary-circle analysis vs. predictions")
    _curve_arg(p)
    _grid_arg(p)
    p.add_argument("--psi")
    p.add_argument("--iters", type=int, default=10_000)
    p.add_argument("--out")
    p.set_defaults(func=cmd_flow_kam)

    p = sub.add_parser("predict", help="leading-order predictions as JSON")
    _curve_arg(p)
    p.set_defaults(func=cmd_predict)

    g = sub.add_parser("global").add_subparsers(dest="action", required=True)
    p = g.add_parser("fit", help="fit one global Beltrami field to the tube fields")
    p.add_argument("--tubes", help='JSON {"curves": [...]} (default: --curve)')
    p.add_argument("--curve", default="trefoil")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--lam", type=float, default=None, help="default eps^3")
    p.add_argument("--method", choices=("bessel", "mfs"), default="bessel")
    p.add_argument("--L", type=int, default=24)
    p.add_argument("--sources", type=int, default=1600)
    p.add_argument("--source-radius", type=float, default=2.05, help="in units of R")
    p.add_argument("--reg", type=float, default=None)
    _grid_arg(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_global_fit)
    p = g.add_parser("sample", help="legacy-VTK samples of a fitted field")
    p.add_argument("--field", required=True)
    p.add_argument("--box", type=lambda s: _floats(s, 6), required=True, help="x0,x1,y0,y1,z0,z1")
    p.add_argument("--n", type=int, default=16)
    p.add_argument("--out")
    p.set_defaults(func=cmd_global_sample)

    p = sub.add_parser("pipeline", help="end-to-end run from a JSON RunConfig")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir")
    p.add_argument("-v", "--verbose", action="store_true")
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("verify", help="acceptance suite as a JSON report")
    p.add_argument("--config", help='JSON {"curve", "eps_values", "criteria", "thresholds"}')
    p.add_argument("--criteria", type=_ints, default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.threads:
        for var in _THREAD_VARS:
            os.environ[var] = str(args.threads)
    from .errors import VortexTubeError
    try:
        rc = args.func(args)
    except (VortexTubeError, ValueError, OSError, KeyError) as exc:
        err = dict(error=type(exc).__name__, message=str(exc))
        for attr in ("problems", "misfit", "condition"):
            if getattr(exc, attr, None) is not None:
                err[attr] = getattr(exc, attr)
        if getattr(exc, "report", None) is not None:
            rep = exc.report
            err["report"] = rep.to_dict() if hasattr(rep, "to_dict") else rep
        _emit(err)
        return EXIT_ERROR
    return int(rc or 0)


if __name__ == "__main__":
    sys.exit(main())
