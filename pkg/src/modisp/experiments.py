"""Sweeps that connect path roughness with solver behaviour.

Each study returns an :class:`ExperimentTable` (rows plus a summary) and can
write it to a directory holding ``manifest.json``, ``results.csv`` and one log
file per cell. Cells are independent; ``workers > 1`` runs them in a process
pool and rows are sorted into a canonical order before they are returned.

Only the control rows (``W = t``, linear model, smooth data) have closed-form
expectations. The rest are findings to be read, not asserted.
"""
from __future__ import annotations

import csv
import json
import math
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .models import parse_model
from .occupation import default_xi_grid, estimate_irregularity, resolved_xi_grid
from .pathgen import FbmParams, generate_deterministic, generate_fbm
from .solver import (InitialData, IntegrationFailure, SimConfig, galerkin_pair, hs_norm,
                     initial_coeffs, run)


@dataclass
class ExperimentTable:
    name: str
    params: dict
    columns: list
    rows: list
    summary: dict = field(default_factory=dict)
    logs: dict = field(default_factory=dict)

    def column(self, key, **where):
        return [r[key] for r in self.rows if all(r.get(k) == v for k, v in where.items())]

    def write(self, outdir, timestamp: bool = True) -> Path:
        out = Path(outdir)
        (out / "logs").mkdir(parents=True, exist_ok=True)
        manifest = {
            "experiment": self.name,
            "code_version": __version__,
            "params": self.params,
            "summary": self.summary,
            "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S") if timestamp else None,
        }
        (out / "manifest.json").write_text(json.dumps(manifest, indent=1, default=_json_default) + "\n")
        with open(out / "results.csv", "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=self.columns, lineterminator="\n", extrasaction="ignore")
            w.writeheader()
            for r in self.rows:
                w.writerow({k: _fmt(r.get(k)) for k in self.columns})
        for cell, text in self.logs.items():
            (out / "logs" / f"{cell}.log").write_text(text)
        return out


def _fmt(x):
    if isinstance(x, float):
        return "nan" if math.isnan(x) else f"{x:.17g}"
    return "" if x is None else x


def _json_default(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    return str(x)


def _map(fn, cells, workers):
    if workers and workers > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, cells))
    return [fn(c) for c in cells]


def _median_band(values):
    v = np.asarray([x for x in values if x is not None and np.isfinite(x)], dtype=float)
    if v.size == 0:
        return {"median": None, "q25": None, "q75": None, "n": 0}
    q25, med, q75 = np.percentile(v, [25, 50, 75])
    return {"median": float(med), "q25": float(q25), "q75": float(q75), "n": int(v.size)}


# ---------------------------------------------------------------------------
# irregularity sweep


def _irregularity_cell(cell):
    kind, H, seed, gamma, n_points, horizon, threshold, c = cell
    if kind == "linear":
        path = generate_deterministic(1.0, horizon, n_points)
        xi = default_xi_grid()
    else:
        path = generate_fbm(FbmParams(H, horizon, n_points, seed))
        xi = resolved_xi_grid(path, c)
    rep = estimate_irregularity(path, gamma, xi_grid=xi, threshold=threshold)
    b = rep.breakdown_rho
    return {
        "kind": kind,
        "H": H,
        "seed": seed,
        "gamma": gamma,
        "breakdown_rho": b,
        "reference": (1 - gamma) / H if kind == "fbm" else 1 - gamma,
        "xi_max": float(xi.max()),
    }


def irregularity_sweep(H_list, gamma: float = 0.5, seeds=range(20), n_points: int = 2**16 + 1,
                       horizon: float = 1.0, threshold: float = 0.1, c: float = 0.5,
                       include_control: bool = True, workers: int | None = None) -> ExperimentTable:
    """Empirical breakdown rho of fBm paths against the curve ``(1 - gamma)/H``.

    The frequency grid of each fBm path stops at ``c / median|dW|`` (see
    :func:`modisp.occupation.resolved_xi_grid`). The ``W = t`` control row
    uses the default grid up to ``2**14``; its reference value is ``1 - gamma``.
    """
    H_list = [float(h) for h in H_list]
    if any(not 0 < h < 1 for h in H_list):
        raise ValueError("every H must lie in (0, 1)")
    seeds = [int(s) for s in seeds]
    cells = [("fbm", h, s, gamma, n_points, horizon, threshold, c) for h in H_list for s in seeds]
    if include_control:
        cells.append(("linear", 1.0, 0, gamma, n_points, horizon, threshold, c))
    rows = _map(_irregularity_cell, cells, workers)
    rows.sort(key=lambda r: (r["kind"] != "fbm", r["H"], r["seed"]))
    summary = {}
    for h in H_list:
        band = _median_band([r["breakdown_rho"] for r in rows if r["kind"] == "fbm" and r["H"] == h])
        summary[f"H={h:g}"] = {**band, "reference": (1 - gamma) / h}
    if include_control:
        ctrl = [r for r in rows if r["kind"] == "linear"][0]
        summary["W=t"] = {"breakdown_rho": ctrl["breakdown_rho"], "reference": 1 - gamma}
    params = dict(H_list=H_list, gamma=gamma, seeds=seeds, n_points=n_points, horizon=horizon,
                  threshold=threshold, c=c, include_control=include_control)
    cols = ["kind", "H", "seed", "gamma", "breakdown_rho", "reference", "xi_max"]
    return ExperimentTable("irregularity_sweep", params, cols, rows, summary)


# ---------------------------------------------------------------------------
# Galerkin self-convergence against H


def _make_path(kind, H, seed, T, dt):
    n_points = int(math.ceil(T / (dt / 4) - 1e-9)) + 1
    if kind == "linear":
        return generate_deterministic(1.0, T, n_points)
    return generate_fbm(FbmParams(H, T, n_points, seed))


def _galerkin_cell(cell):
    model, s, kind, H, seed, N, T, dt, init = cell
    spec = parse_model(model)
    path = _make_path(kind, H, seed, T, dt)
    cfg = SimConfig(spec, N, dt, T, path, init, diagnostics_every=10**9, hs_orders=(s,),
                    keep_states=True)
    row = {"model": model, "s": s, "path": kind, "H": H, "seed": seed, "N": N, "T": T, "dt": dt,
           "data": init.profile}
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            gp = galerkin_pair(cfg, N, 2, s)
            row.update(diff=float(gp.diff[-1]), diff0=float(gp.diff[0]), status="ok")
        except IntegrationFailure as exc:
            row.update(diff=float("nan"), diff0=float("nan"), status=f"failed: {exc}")
    row["warnings"] = len(caught)
    log = "\n".join([json.dumps(row, default=_json_default)] + [str(w.message) for w in caught])
    return row, log


def galerkin_vs_hurst(model: str = "fkdv:a=2", s: float = -0.25, H_list=(0.2, 0.5, 0.8),
                      N_list=(16, 32, 64), T: float = 0.1, seeds=(0,), dt: float = 5e-5,
                      amplitude: float = 0.3, eps: float = 0.1, include_control: bool = True,
                      smooth_row: bool = True, workers: int | None = None) -> ExperimentTable:
    """``||u_N - u_{2N}||_{H^s}(T)`` over Hurst index and truncation.

    Data are randomized ``H^s`` profiles (``random_hs`` with the same seed as
    the path). The control column uses ``W = t``; the sanity row uses the
    single-mode cosine, for which both truncations hold the data exactly.
    """
    spec = parse_model(model)
    rough = [InitialData("random_hs", amplitude=amplitude, s=s, eps=eps, seed=int(sd)) for sd in seeds]
    cells = []
    for N in N_list:
        for h in H_list:
            for sd, init in zip(seeds, rough):
                cells.append((spec.name, s, "fbm", float(h), int(sd), int(N), T, dt, init))
        if include_control:
            for sd, init in zip(seeds, rough):
                cells.append((spec.name, s, "linear", 1.0, int(sd), int(N), T, dt, init))
        if smooth_row:
            cells.append((spec.name, s, "fbm", float(H_list[0]), int(seeds[0]), int(N), T, dt,
                          InitialData("cosine", amplitude=amplitude)))
    out = _map(_galerkin_cell, cells, workers)
    rows, logs = [], {}
    for i, (row, log) in enumerate(out):
        rows.append(row)
        logs[f"cell{i:04d}_{row['path']}_H{row['H']:g}_s{row['seed']}_N{row['N']}_{row['data']}"] = log
    rows.sort(key=lambda r: (r["data"], r["path"], r["H"], r["N"], r["seed"]))
    summary = {}
    for r in rows:
        key = f"{r['data']}/{r['path']}/H={r['H']:g}/N={r['N']}"
        summary.setdefault(key, []).append(r["diff"])
    summary = {k: _median_band(v) for k, v in summary.items()}
    params = dict(model=spec.name, s=s, H_list=list(H_list), N_list=list(N_list), T=T,
                  seeds=list(seeds), dt=dt, amplitude=amplitude, eps=eps,
                  include_control=include_control, smooth_row=smooth_row)
    cols = ["model", "s", "path", "H", "seed", "N", "T", "dt", "data", "diff0", "diff", "status",
            "warnings"]
    return ExperimentTable("galerkin_vs_hurst", params, cols, rows, summary, logs)


# ---------------------------------------------------------------------------
# Lipschitz probe of the flow map


def _lipschitz_cell(cell):
    model, s, kind, H, seed, N, T, dt, eps, base, direction, linear = cell
    spec = parse_model(model)
    if linear:
        spec = spec.linear()
    path = _make_path(kind, H, seed, T, dt)
    cfg = SimConfig(spec, N, dt, T, path, diagnostics_every=1, hs_orders=(s,))
    u1 = initial_coeffs(base, N, spec)
    d = initial_coeffs(direction, N, spec)
    d = d / hs_norm(d, s)
    u2 = u1 + eps * d
    d0 = hs_norm(u1 - u2, s)
    row = {"model": spec.name, "s": s, "path": kind, "H": H, "seed": seed, "N": N, "eps": eps}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        r1 = run(cfg, u1)
        r2 = run(cfg, u2) if d0 > 0 else r1
    diffs = [hs_norm(r1.physical_at(i) - r2.physical_at(i), s) for i in range(len(r1.states))]
    sup = max(diffs)
    if d0 == 0:
        row.update(ratio=float("nan"), exact_equal=bool(sup == 0), d0=0.0, sup_diff=sup)
    else:
        row.update(ratio=sup / d0, exact_equal=False, d0=d0, sup_diff=sup)
    return row


def flow_lipschitz_probe(model: str = "fkdv:a=2", s: float = 0.0, eps_list=(1e-3, 1e-4),
                         T: float = 0.05, N: int = 32, dt: float = 1e-4, H: float = 0.3,
                         seeds=(0,), base: InitialData | None = None, workers: int | None = None,
                         include_identical: bool = True, linear: bool = False) -> ExperimentTable:
    """``sup_t ||u_1 - u_2||_{H^s} / ||u_1(0) - u_2(0)||_{H^s}`` for data at distance ``eps``.

    ``u_2(0) = u_1(0) + eps * d`` with ``d`` a randomized profile normalised in
    ``H^s``. ``eps = 0`` (the identical pair) reports ``nan`` and an exact
    equality flag instead of dividing by zero. ``linear=True`` drops the
    nonlinearity, the control case where every ratio is 1.
    """
    spec = parse_model(model)
    base = base or InitialData("gaussian", amplitude=0.5, width=0.5)
    eps_all = ([0.0] if include_identical else []) + [float(e) for e in eps_list]
    cells = []
    for sd in seeds:
        direction = InitialData("random_hs", s=s + 1.0, seed=int(sd) + 1000)
        for e in eps_all:
            cells.append((spec.name, s, "fbm", H, int(sd), N, T, dt, e, base, direction, linear))
    rows = _map(_lipschitz_cell, cells, workers)
    rows.sort(key=lambda r: (r["seed"], r["eps"]))
    summary = {f"eps={e:g}": _median_band([r["ratio"] for r in rows if r["eps"] == e]) for e in eps_all}
    params = dict(model=spec.name, linear=linear, s=s, eps_list=eps_all, T=T, N=N, dt=dt, H=H, seeds=list(seeds),
                  base=vars(base))
    cols = ["model", "s", "path", "H", "seed", "N", "eps", "d0", "sup_diff", "ratio", "exact_equal"]
    return ExperimentTable("flow_lipschitz_probe", params, cols, rows, summary)


EXPERIMENTS = {
    "irregularity_sweep": irregularity_sweep,
    "galerkin_vs_hurst": galerkin_vs_hurst,
    "flow_lipschitz_probe": flow_lipschitz_probe,
}
