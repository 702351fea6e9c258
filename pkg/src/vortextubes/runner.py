"""End-to-end run: per-tube fields and boundary analysis, then the global
Beltrami field, written as deterministic artifacts."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .chart import TubeChart
from .config import ConfigError, RunConfig, resolve_curve
from .curves import check_admissible
from .errors import NotAdmissible
from .flow import analyze_boundary, field_X, monodromy_core, poincare_orbits
from .harmonic import solve_harmonic
from .io import to_jsonable, write_csv, write_grid, write_json
from .predictions import predict


def kam_report(chart: TubeChart, flow, cfg: RunConfig) -> dict:
    """Boundary-circle analysis next to its leading-order predictions."""
    an = analyze_boundary(flow, n_iter=cfg.birkhoff_iters, n_samples=cfg.boundary_samples,
                          K_modes=cfg.conjugacy_modes, n_nodes=cfg.torsion_nodes)
    pred = predict(chart.curve, chart.eps)
    mono = monodromy_core(chart.curve)
    return dict(
        omega=an.omega, omega_error=an.omega_error, omega_predicted=pred.omega,
        torsion=an.normal_torsion, torsion_predicted=pred.normal_torsion,
        theta_sin=an.theta_sin_coefficient, theta_sin_predicted=pred.theta_sin,
        dioph=an.dioph.to_dict(),
        elliptic=dict(T=mono.T, eigenvalues=[[float(z.real), float(z.imag)] for z in mono.eigenvalues],
                      hypothesis_ok=mono.elliptic),
        diagnostics=an.diagnostics,
    )


def section_rows(flow, seeds_r, seeds_theta, n_iter, tol):
    """Rows ``(seed_id, iter, r, theta_lifted)`` of Poincaré orbits."""
    R, T = poincare_orbits(flow, seeds_r, seeds_theta, n_iter, tol)
    rows = []
    for j in range(R.shape[1]):
        for k in range(R.shape[0]):
            rows.append((j, k, float(R[k, j]), float(T[k, j])))
    return rows


def run_pipeline(cfg: RunConfig, out_dir=None, log=None) -> dict:
    """Produce all artifacts of ``cfg`` in ``out_dir`` (default ``cfg.out_dir``).

    Raises
    ------
    ConfigError
    NotAdmissible
        Before any computation if a curve fails the admissibility checks.
    """
    cfg.validate()
    out = Path(out_dir or cfg.out_dir)
    h = cfg.hash
    meta = dict(seed=cfg.seed)
    say = log or (lambda msg: None)
    curves = [resolve_curve(c) for c in cfg.curves]
    eps = cfg.eps_list()
    reports = [check_admissible(c, e) for c, e in zip(curves, eps)]
    for i, rep in enumerate(reports):
        if not rep.geometric_ok:
            raise NotAdmissible(f"tube {i}: admissibility failed at eps = {rep.eps}", rep)
    rng = np.random.default_rng(cfg.seed)
    files, tubes, fields = [], [], []
    for i, (c, e, adm) in enumerate(zip(curves, eps, reports)):
        say(f"tube {i}: solving harmonic field")
        chart = TubeChart(c, e)
        hf = solve_harmonic(chart, *cfg.grid, tol=cfg.solver_tol)
        fields.append(hf.cartesian)
        vals = np.zeros(hf.grid.shape) if hf.psi is None else hf.psi.values
        info = {} if hf.psi is None else dict(hf.psi.info)
        header = dict(eps=e, length=chart.length, n_alpha=cfg.grid[0], n_r=cfg.grid[1],
                      n_theta=cfg.grid[2], r_nodes=hf.grid.r)
        files.append(write_grid(out / f"psi_{i}.bin", vals, header, h))
        files.append(write_json(out / f"psi_{i}.json", dict(tube=i, residuals=info, header=header), h, **meta))
        say(f"tube {i}: boundary analysis")
        flow = field_X(chart, hf)
        kam = kam_report(chart, flow, cfg)
        kam["admissibility"] = adm.to_dict()
        files.append(write_json(out / f"kam_report_{i}.json", kam, h, **meta))
        r0 = np.sqrt(rng.uniform(0.01, 1.0, cfg.section_seeds))
        t0 = rng.uniform(0, 2 * np.pi, cfg.section_seeds)
        rows = section_rows(flow, r0, t0, cfg.section_iters, cfg.ode_tol)
        files.append(write_csv(out / f"section_{i}.csv", ["seed_id", "iter", "r", "theta_lifted"], rows,
                               h, **meta))
        tubes.append(dict(index=i, eps=e, omega=kam["omega"], omega_predicted=kam["omega_predicted"],
                          elliptic=kam["elliptic"]["hypothesis_ok"]))
    summary = dict(tubes=tubes, config=cfg.to_dict())
    if cfg.global_fit:
        summary["global"] = _global_stage(cfg, curves, eps, fields, out, h, meta, files, say)
    files.append(write_json(out / "summary.json", dict(summary, files=[p.name for p in files]), h, **meta))
    summary["files"] = [str(p) for p in files]
    return summary


def _global_stage(cfg, curves, eps, fields, out, h, meta, files, say):
    from .globalfield import PipelineConfig, beltrami_residual, decay_check, pipeline, sample_grid

    if len(set(eps)) != 1:
        raise ConfigError(["the global fit needs one common eps"])
    say("global field: fitting")
    pc = PipelineConfig(lam=cfg.lam, method=cfg.fit_method, L=cfg.fit_L, n_sources=cfg.fit_sources,
                        source_radius=cfg.fit_source_radius, reg=cfg.fit_reg, tol=cfg.fit_tol,
                        grid=cfg.grid, orbits=cfg.global_orbits, n_returns=cfg.n_returns)
    res = pipeline(curves, eps[0], pc, fields=fields)
    u = res.field
    rep = res.fit
    field_doc = dict(representation=u.helmholtz.to_dict(), lam=res.lam, projected=True,
                     fit=rep.to_dict(), tubes=[t.to_dict() for t in res.tubes])
    files.append(write_json(out / "field.json", field_doc, h, **meta))
    center = np.asarray(rep.extra.get("center", np.zeros(3)))
    R = float(rep.extra.get("R", 1.0))
    resid = beltrami_residual(u, res.lam, sample_grid(center, R, 20))
    files.append(write_json(out / "residual.json", resid.to_dict(), h, **meta))
    if cfg.fit_method == "bessel":
        dec = decay_check(u, R, center)
        files.append(write_json(out / "decay.json", dec.to_dict(), h, **meta))
    return dict(lam=res.lam, misfit=rep.misfit, residual=resid.residual,
                tubes=to_jsonable([t.to_dict() for t in res.tubes]))
