"""Scenario files, orchestration and the ``mxil`` command line.

Scenario files are YAML documents with five blocks::

    grid:      {L: [1, 1, 1], N: [40, 8, 40], s: 0.5, periodic: [false, true]}
    materials: {minus: {law: linear_isotropic, eps: 1.0},
                plus:  {law: kerr, vartheta: 0.1}}
    data:      {initial: {preset: pec_standing_wave}, source: null,
                surface_current: null, rho0: 0.0, rho_sigma0: 0.0}
    run:       {T: 1.0, cfl: 0.5, eps4: 0.02, m: 1, strict: false}
    output:    {csv: out.csv, cadence: 1, checkpoint: null}

``N`` may be a single integer (used on every axis). Every key not given is
filled from :data:`DEFAULTS`; the resolved document is echoed by ``run``.
Exit codes: 0 completed, 2 blow-up flag, 1 configuration or runtime error.
"""

from __future__ import annotations

import argparse
import copy
import sys
import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
import yaml

from . import compatibility as cp
from .diagnostics import (
    DiagnosticsSeries,
    Thresholds,
    piecewise_norms,
)
from .grid_solver import REGIONS, FieldState, Grid, Scenario, Solver, evolve, save_checkpoint
from .material_laws import LAWS, MaterialLaw, make_law
from .presets import INITIAL_PRESETS, SOURCE_PRESETS, SURFACE_PRESETS, InitialData, PresetError
from .suites import run_suite

EXIT_OK, EXIT_ERROR, EXIT_BLOWUP = 0, 1, 2

DEFAULTS: dict = {
    "grid": {"L": [1.0, 1.0, 1.0], "N": 16, "s": 0.5, "periodic": [False, False]},
    "materials": {"minus": {"law": "linear_isotropic"}, "plus": {"law": "linear_isotropic"}},
    "data": {"initial": {"preset": "zero"}, "source": None, "surface_current": None, "rho0": 0.0, "rho_sigma0": 0.0},
    "run": {
        "T": 1.0,
        "cfl": 0.5,
        "eps4": 0.02,
        "m": 1,
        "strict": False,
        "compat_tol": None,
        "norm_order": 3,
        "max_steps": 10_000_000,
        "thresholds": {"kappa_min": 1e-3, "L_max": 1e6, "N_max": 1e8},
    },
    "output": {"csv": None, "cadence": 1, "checkpoint": None},
}


class ConfigError(ValueError):
    """Invalid scenario file; ``line`` is set for parse errors."""

    def __init__(self, message: str, line: Optional[int] = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


# ---------------------------------------------------------------------------
# builtin scenarios
# ---------------------------------------------------------------------------


BUILTIN: dict[str, dict] = {
    "zero": {"grid": {"N": 8}, "run": {"T": 0.1}},
    "pec_standing_wave": {
        "grid": {"L": [1.0, 1.0, 1.0], "N": [40, 8, 40], "s": 0.5, "periodic": [False, True]},
        "data": {"initial": {"preset": "pec_standing_wave"}},
        "run": {"T": 2.0 ** -0.5 * 2.0},
        "output": {"cadence": 10},
    },
    "two_dielectric_planewave": {
        "grid": {"L": [0.08, 0.08, 2.0], "N": [8, 8, 200], "s": 1.0, "periodic": [True, True]},
        "materials": {"minus": {"law": "linear_isotropic", "eps": 1.0}, "plus": {"law": "linear_isotropic", "eps": 4.0}},
        "data": {"initial": {"preset": "two_dielectric_planewave", "center": 0.5, "width": 0.08}},
        "run": {"T": 0.9},
        "output": {"cadence": 20},
    },
    "interface_conservation": {
        "grid": {"L": [1.0, 1.0, 1.0], "N": [40, 8, 40], "s": 0.5, "periodic": [True, True]},
        "materials": {"minus": {"law": "linear_isotropic", "eps": 1.0}, "plus": {"law": "linear_isotropic", "eps": 2.0}},
        "data": {
            "initial": {"preset": "compact_pulse", "amplitude": 1.0, "center": 0.25, "width": 0.2},
            "surface_current": {"preset": "ramped_cosine", "amplitude": 1.0, "t_center": 0.3, "t_width": 0.2},
        },
        "run": {"T": 0.7, "m": 2},
        "output": {"cadence": 1},
    },
    "kerr_pulse": {
        "grid": {"L": [1.0, 1.0, 1.0], "N": [32, 8, 32], "s": 0.5, "periodic": [True, True]},
        "materials": {"minus": {"law": "kerr", "vartheta": 0.5}, "plus": {"law": "linear_isotropic", "eps": 2.0}},
        "data": {"initial": {"preset": "kerr_pulse", "amplitude": 0.5}},
        "run": {"T": 0.5, "m": 2},
        "output": {"cadence": 5},
    },
    "kerr_blowup": {
        "grid": {"L": [1.0, 1.0, 1.0], "N": 16, "s": 0.5},
        "materials": {"minus": {"law": "kerr", "vartheta": -1.0}, "plus": {"law": "kerr", "vartheta": -1.0}},
        "data": {"source": {"preset": "localized_pump", "amplitude": 4.0, "center": [0.5, 0.5, 0.25], "width": 0.2, "ramp": 1.0}},
        "run": {"T": 3.0},
        "output": {"cadence": 1},
    },
}


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


def _merge(base: dict, over: dict, path: str = "") -> dict:
    out = copy.deepcopy(base)
    for k, v in (over or {}).items():
        key = f"{path}{k}"
        if isinstance(out.get(k), dict) and isinstance(v, dict) and k not in ("initial", "source", "surface_current"):
            out[k] = _merge(out[k], v, key + ".")
        else:
            out[k] = copy.deepcopy(v)
    return out


@dataclass
class ScenarioConfig:
    """Resolved scenario document (defaults filled and validated)."""

    doc: dict
    source_path: Optional[str] = None

    @property
    def grid(self) -> dict:
        return self.doc["grid"]

    @property
    def run(self) -> dict:
        return self.doc["run"]

    @property
    def output(self) -> dict:
        return self.doc["output"]

    def echo(self) -> str:
        return yaml.safe_dump(self.doc, sort_keys=False, default_flow_style=None)

    def with_grid(self, N: Sequence[int]) -> "ScenarioConfig":
        d = copy.deepcopy(self.doc)
        d["grid"]["N"] = [int(n) for n in N]
        return validate_config(d, self.source_path)


def _need(cond: bool, msg: str) -> None:
    if not cond:
        raise ConfigError(msg)


def _number(doc: dict, block: str, key: str, positive: bool = False) -> float:
    v = doc[block][key]
    _need(isinstance(v, (int, float)) and not isinstance(v, bool), f"{block}.{key} must be a number")
    if positive:
        _need(v > 0, f"{block}.{key} must be positive")
    return float(v)


def validate_config(doc: dict, path: Optional[str] = None) -> ScenarioConfig:
    _need(isinstance(doc, dict), "scenario file must contain a mapping")
    unknown = set(doc) - set(DEFAULTS)
    _need(not unknown, f"unknown top-level key(s): {', '.join(sorted(unknown))}")
    d = _merge(DEFAULTS, doc)
    g = d["grid"]
    L, N = g["L"], g["N"]
    if isinstance(L, (int, float)):
        L = [float(L)] * 3
    if isinstance(N, int):
        N = [N] * 3
    _need(isinstance(L, list) and len(L) == 3 and all(isinstance(x, (int, float)) and x > 0 for x in L),
          "grid.L must be three positive numbers")
    _need(isinstance(N, list) and len(N) == 3 and all(isinstance(n, int) for n in N), "grid.N must be integers")
    _need(all(n >= 8 for n in N), "grid.N must be ≥ 8")
    per = g["periodic"]
    _need(isinstance(per, list) and len(per) == 2 and all(isinstance(p, bool) for p in per),
          "grid.periodic must be two booleans (x1, x2)")
    s = g["s"]
    _need(isinstance(s, (int, float)) and 0 < s < L[2], "grid.s must satisfy 0 < s < L3")
    k = s / (L[2] / N[2])
    _need(abs(k - round(k)) < 1e-9, "grid.s must lie on a cell face")
    g.update(L=[float(x) for x in L], N=N, s=float(s), periodic=per)

    for side in ("minus", "plus"):
        mat = d["materials"].get(side)
        _need(isinstance(mat, dict) and "law" in mat, f"materials.{side}.law missing")
        _need(mat["law"] in LAWS, f"materials.{side}.law: unknown law {mat['law']!r}; registered laws: {', '.join(sorted(LAWS))}")
    extra = set(d["materials"]) - {"minus", "plus"}
    _need(not extra, f"materials: unknown region(s) {', '.join(sorted(extra))}")

    data = d["data"]
    ini = data.get("initial") or {"preset": "zero"}
    data["initial"] = ini
    _need(ini.get("preset") in INITIAL_PRESETS,
          f"data.initial.preset: unknown preset {ini.get('preset')!r}; available: {', '.join(sorted(INITIAL_PRESETS))}")
    for key, table in (("source", SOURCE_PRESETS), ("surface_current", SURFACE_PRESETS)):
        blk = data.get(key)
        if blk is not None:
            _need(isinstance(blk, dict) and blk.get("preset") in table,
                  f"data.{key}.preset: unknown preset; available: {', '.join(sorted(table))}")
    for key in ("rho0", "rho_sigma0"):
        _number(d, "data", key)

    r = d["run"]
    _number(d, "run", "T", positive=True)
    cfl = _number(d, "run", "cfl", positive=True)
    _need(cfl <= 1.0, "run.cfl must not exceed 1")
    _need(_number(d, "run", "eps4") >= 0, "run.eps4 must be non-negative")
    _need(isinstance(r["m"], int) and 1 <= r["m"] <= cp.MAX_ORDER + 1, f"run.m must be an integer in 1..{cp.MAX_ORDER + 1}")
    _need(isinstance(r["strict"], bool), "run.strict must be a boolean")
    _need(isinstance(r["norm_order"], int) and 0 <= r["norm_order"] <= 3, "run.norm_order must be 0..3")
    for key in ("kappa_min", "L_max", "N_max"):
        v = r["thresholds"].get(key)
        _need(isinstance(v, (int, float)) and v > 0, f"run.thresholds.{key} must be a positive number")
    o = d["output"]
    _need(isinstance(o["cadence"], int) and o["cadence"] >= 1, "output.cadence must be a positive integer")
    return ScenarioConfig(d, path)


def load_scenario(path: str) -> ScenarioConfig:
    """Read a scenario file, or a builtin scenario given as ``builtin:NAME``."""
    if path.startswith("builtin:"):
        name = path.split(":", 1)[1]
        if name not in BUILTIN:
            raise ConfigError(f"unknown builtin scenario {name!r}; available: {', '.join(sorted(BUILTIN))}")
        return validate_config(copy.deepcopy(BUILTIN[name]), path)
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read scenario file: {exc}") from exc
    return parse_scenario(text, path)


def parse_scenario(text: str, path: Optional[str] = None) -> ScenarioConfig:
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        raise ConfigError(f"parse error: {getattr(exc, 'problem', None) or exc}", line) from exc
    return validate_config(doc if doc is not None else {}, path)


# ---------------------------------------------------------------------------
# building a solver scenario
# ---------------------------------------------------------------------------


@dataclass
class Built:
    scenario: Scenario
    initial: InitialData
    source: Optional[Callable] = None
    surface_current: Optional[Callable] = None


def _params(block: dict) -> dict:
    return {k: v for k, v in block.items() if k != "preset"}


def build_grid(cfg: ScenarioConfig) -> Grid:
    g = cfg.grid
    return Grid(tuple(g["L"]), tuple(g["N"]), g["s"], tuple(g["periodic"]))


def build_laws(cfg: ScenarioConfig) -> dict[str, MaterialLaw]:
    out = {}
    for side, tag in (("minus", "-"), ("plus", "+")):
        mat = dict(cfg.doc["materials"][side])
        name = mat.pop("law")
        try:
            out[tag] = make_law(name, tag, **mat)
        except TypeError as exc:
            raise ConfigError(f"materials.{side}: {exc}") from exc
    return out


def build(cfg: ScenarioConfig) -> Built:
    grid = build_grid(cfg)
    laws = build_laws(cfg)
    data = cfg.doc["data"]
    try:
        ini = INITIAL_PRESETS[data["initial"]["preset"]](grid, laws, **_params(data["initial"]))
        src = None if data["source"] is None else SOURCE_PRESETS[data["source"]["preset"]](grid, **_params(data["source"]))
        srf = (
            None if data["surface_current"] is None
            else SURFACE_PRESETS[data["surface_current"]["preset"]](grid, **_params(data["surface_current"]))
        )
    except (PresetError, TypeError) as exc:
        raise ConfigError(f"data: {exc}") from exc
    r = cfg.run
    rho0, rs0 = float(data["rho0"]), float(data["rho_sigma0"])
    sc = Scenario(
        grid=grid,
        laws=laws,
        u0=ini,
        T=float(r["T"]),
        source=src,
        surface_current=srf,
        cfl=float(r["cfl"]),
        eps4=float(r["eps4"]),
        cadence=int(cfg.output["cadence"]),
        rho0=lambda x, tag: np.full(x.shape[:-1], rho0),
        rho_sigma0=lambda xf: np.full(xf.shape[:-1], rs0),
        thresholds=Thresholds(**{k: float(v) for k, v in r["thresholds"].items()}),
        norm_order=int(r["norm_order"]),
        max_steps=int(r["max_steps"]),
        exact=ini.exact if src is None and srf is None else None,
    )
    return Built(sc, ini, src, srf)


# ---------------------------------------------------------------------------
# compatibility
# ---------------------------------------------------------------------------


def check_compatibility(cfg: ScenarioConfig, m: Optional[int] = None) -> cp.CompatibilityReport:
    """Residuals of the order-``m`` compatibility conditions at ``t0 = 0``.

    Time derivatives are built on the nodal grid with finite-difference
    spatial derivatives, so the residual of order ``p`` carries a
    truncation floor: ``O(h^2)`` for ``p = 1`` and ``O(h)`` for ``p >= 2``,
    where one-sided stencils are composed at the boundary nodes. The
    default tolerance is ``1e-8`` for ``p = 0`` and ``10 h^2`` or ``10 h``
    beyond, each scaled by ``1 + max|S_p|``.
    """
    m = cfg.run["m"] if m is None else int(m)
    b = build(cfg)
    g = b.scenario.grid
    ig = cp.InterfaceGrid.box(g.L, g.N, g.s, g.periodic)
    u0, f_jet = {}, None
    for tag in REGIONS:
        u0[tag] = b.initial(ig.region(tag).points(), tag)
    if b.source is not None:
        f_jet = {tag: b.source.time_jet(0.0, ig.region(tag).points(), tag, m) for tag in REGIONS}
    jet = cp.time_derivatives_nonlinear(b.scenario.laws, 0.0, f_jet, u0, ig, m - 1)
    g_jet = None
    if b.surface_current is not None:
        xf = ig.region("+").points()[:, :, 0, :]
        g_jet = b.surface_current.time_jet(0.0, xf, m)
    tol = cfg.run["compat_tol"]
    if tol is None:
        h = max(g.h)
        tol = []
        for p in range(m):
            scale = max(float(np.max(np.abs(jet[t][p]), initial=0.0)) for t in REGIONS)
            floor = 1e-8 if p == 0 else max(1e-8, 10.0 * (h * h if p == 1 else h))
            tol.append(floor * (1.0 + scale))
    return cp.compatibility_residuals(jet, g_jet, m, ig, tol)


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------


@dataclass
class RunSummary:
    flag: str
    wall_time: float
    steps: int
    final_norms: dict
    max_residuals: dict
    trigger_time: Optional[float] = None
    trigger_value: Optional[float] = None
    series: Optional[DiagnosticsSeries] = field(default=None, repr=False)
    final_state: Optional[FieldState] = field(default=None, repr=False)
    max_error: Optional[float] = None

    @property
    def exit_code(self) -> int:
        return EXIT_OK if self.flag == "completed" else EXIT_BLOWUP

    def text(self) -> str:
        lines = [f"flag        {self.flag}", f"steps       {self.steps}", f"wall time   {self.wall_time:.2f}s"]
        if self.trigger_time is not None and self.flag != "completed":
            lines.append(f"trigger     t={self.trigger_time!r} value={self.trigger_value!r}")
        for k, v in self.final_norms.items():
            lines.append(f"final {k:<10} {v!r}")
        for k, v in self.max_residuals.items():
            lines.append(f"max {k:<12} {v!r}")
        if self.max_error is not None:
            lines.append(f"max L2 error vs exact {self.max_error!r}")
        return "\n".join(lines)


def run(cfg: ScenarioConfig, csv_path: Optional[str] = None, log=None) -> RunSummary:
    """Evolve a configured scenario; writes CSV and checkpoint when requested."""
    b = build(cfg)
    rep = check_compatibility(cfg)
    if not rep.passed:
        bad = [p for p in range(rep.order) if max(rep.interface[p], rep.boundary[p]) > rep.tol_at(p)]
        p = bad[0]
        msg = (f"compatibility of order {rep.order} violated at p={p}: interface {rep.interface[p]:.3e}, "
               f"boundary {rep.boundary[p]:.3e} (tol {rep.tol_at(p):.1e})")
        if cfg.run["strict"]:
            raise ConfigError(msg)
        if log is not None:
            print(f"warning: {msg}", file=log)
    t0 = time.perf_counter()
    res = evolve(b.scenario)
    wall = time.perf_counter() - t0
    series = res.series
    path = csv_path or cfg.output["csv"]
    if path:
        series.to_csv(path)
    if cfg.output["checkpoint"]:
        save_checkpoint(cfg.output["checkpoint"], b.scenario.grid, res.state)
    last = series.rows[-1]
    return RunSummary(
        flag=res.status.flag,
        wall_time=wall,
        steps=res.steps,
        final_norms={"l2": last.l2, "h1": last.h1, "energy": last.energy},
        max_residuals={k: float(np.max(series.column(k))) for k in ("divB", "divD_rho", "jumpB", "jumpD_rho")},
        trigger_time=res.status.time,
        trigger_value=res.status.value,
        series=series,
        final_state=res.state,
        max_error=res.max_error,
    )


# ---------------------------------------------------------------------------
# convergence and flow-map studies
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConvergenceRow:
    N: int
    error: float
    order: Optional[float]  # against the previous (coarser) row; None for the first

    def order_text(self) -> str:
        if self.order is None:
            return ""
        return "exact" if np.isnan(self.order) else f"{self.order:.4f}"


EXACT_FLOOR = 1e-13


def _scaled_grid(cfg: ScenarioConfig, N: int) -> list[int]:
    """Cell counts for refinement level ``N`` (the count on the longest-resolved axis).

    Other axes are refined in proportion, except thin invariant periodic axes
    with 8 cells, which stay as they are.
    """
    base = cfg.grid["N"]
    f = N / max(base)
    out = []
    for a, n in enumerate(base):
        inv = a < 2 and cfg.grid["periodic"][a] and n == 8  # keep thin invariant axes thin
        out.append(n if inv else int(round(n * f)))
    return out


def convergence_study(cfg: ScenarioConfig, N_list: Sequence[int], csv_path: Optional[str] = None) -> list[ConvergenceRow]:
    """Max-in-time L2 errors per grid and the fitted orders ``log2(e_N / e_2N)``.

    Uses the preset's exact solution when there is one, otherwise the
    finest run as a Richardson-style reference (sampled at cell centres
    of the coarser grid by block averaging of the final state).
    """
    if len(N_list) < 2:
        raise ConfigError("convergence study needs at least two grids")
    Ns = sorted(int(n) for n in N_list)
    errs = []
    finals = []
    for N in Ns:
        c = cfg.with_grid(_scaled_grid(cfg, N))
        b = build(c)
        res = evolve(b.scenario)
        finals.append((b.scenario.grid, res.state))
        errs.append(res.max_error)
    if any(e is None for e in errs):
        g_ref, s_ref = finals[-1]
        errs = [_restricted_error(g, s, g_ref, s_ref) for g, s in finals[:-1]] + [0.0]
        Ns_used = Ns[:-1]
        errs = errs[:-1]
    else:
        Ns_used = Ns
    rows = []
    for i, (N, e) in enumerate(zip(Ns_used, errs)):
        order = None
        if i > 0:
            prev = errs[i - 1]
            if prev < EXACT_FLOOR and e < EXACT_FLOOR:
                order = float("nan")
            else:
                order = float(np.log(prev / e) / np.log(N / Ns_used[i - 1]))
        rows.append(ConvergenceRow(N, float(e), order))
    if csv_path:
        with open(csv_path, "w") as fh:
            fh.write("N,error,order\n")
            for r in rows:
                fh.write(f"{r.N},{r.error!r},{r.order_text()}\n")
    return rows


def _restricted_error(g: Grid, s: FieldState, g_ref: Grid, s_ref: FieldState) -> float:
    tot = 0.0
    for tag in REGIONS:
        coarse = s.interior(tag)
        fine = s_ref.interior(tag)
        f = [fa // ca for fa, ca in zip(fine.shape[:3], coarse.shape[:3])]
        if any(fa != ca * k for fa, ca, k in zip(fine.shape[:3], coarse.shape[:3], f)):
            raise ConfigError("Richardson reference needs integer refinement ratios")
        avg = fine.reshape(coarse.shape[0], f[0], coarse.shape[1], f[1], coarse.shape[2], f[2], 6).mean(axis=(1, 3, 5))
        d = coarse - avg
        tot += float(np.sum(d * d))
    return float(np.sqrt(tot * g.cell_volume))


@dataclass(frozen=True)
class FlowMapRow:
    delta: float
    distance: float


def flow_map_study(
    cfg: ScenarioConfig,
    deltas: Sequence[float],
    perturbation: Optional[dict] = None,
    m: int = 2,
) -> list[FlowMapRow]:
    """``sup_t`` of the ``G_{m-1}`` distance between runs from ``u0`` and ``u0 + delta w0``.

    ``G_{m-1}`` is ``sum_j |d_t^j w|_{H^{m-1-j}}`` for ``j < m``; only
    ``m <= 2`` is supported (time derivatives come from the solver rate).
    Both runs use the common step ``min(dt_a, dt_b)`` so they stay in lockstep.
    """
    if not 1 <= m <= 2:
        raise ConfigError("flow-map distance supports m = 1 or 2")
    b = build(cfg)
    sc = b.scenario
    grid = sc.grid
    pert = perturbation or {"preset": "compact_pulse", "amplitude": 1.0, "k1": 2}
    w0 = INITIAL_PRESETS[pert["preset"]](grid, sc.laws, **_params(pert))
    rows = []
    for delta in deltas:
        solver = Solver(grid, sc.laws, sc.source, sc.surface_current, sc.eps4)
        a = FieldState.from_function(grid, sc.u0, sc.t0)
        bb = FieldState.from_function(grid, lambda x, tag: sc.u0(x, tag) + delta * w0(x, tag), sc.t0)
        solver.fill_ghosts(a)
        solver.fill_ghosts(bb)
        T = sc.t0 + sc.T
        dist = _g_distance(solver, a, bb, m)
        while a.t < T - 1e-12 * max(1.0, abs(T)):
            dt = solver.common_timestep([a, bb], sc.cfl, T - a.t)
            a, bb = solver.advance(a, dt), solver.advance(bb, dt)
            dist = max(dist, _g_distance(solver, a, bb, m))
        rows.append(FlowMapRow(float(delta), dist))
    return rows


def _g_distance(solver: Solver, a: FieldState, b: FieldState, m: int) -> float:
    grid = solver.grid
    w = FieldState(a.t, {t: b.u[t] - a.u[t] for t in REGIONS})
    d = piecewise_norms(grid, w, m - 1)[m - 1]
    if m >= 2:
        ra, rb = solver.rate(a), solver.rate(b)
        wt = FieldState(a.t, {t: np.pad(rb[t] - ra[t], ((2, 2), (2, 2), (2, 2), (0, 0))) for t in REGIONS})
        d += piecewise_norms(grid, wt, 0)[0]
    return float(d)


# ---------------------------------------------------------------------------
# command line
# ---------------------------------------------------------------------------


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mxil", description="Maxwell interface solver and identity checks")
    sub = p.add_subparsers(dest="cmd", required=True)
    r = sub.add_parser("run", help="evolve a scenario file (or builtin:NAME)")
    r.add_argument("config")
    r.add_argument("--csv", help="override output.csv")
    r.add_argument("--quiet", action="store_true", help="do not echo the resolved configuration")
    v = sub.add_parser("verify", help="run identity suites")
    v.add_argument("selector", choices=["algebra", "transforms", "compat", "all"])
    c = sub.add_parser("converge", help="grid convergence study")
    c.add_argument("config")
    c.add_argument("--grids", required=True, help="comma-separated list of x1 cell counts")
    c.add_argument("--csv", help="write the order table")
    k = sub.add_parser("check-compat", help="compatibility residuals of the initial data")
    k.add_argument("config")
    k.add_argument("--order", type=int, default=None)
    sub.add_parser("list", help="list builtin scenarios, presets and laws")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    out = sys.stdout
    try:
        if args.cmd == "verify":
            rows = run_suite(args.selector)
            for row in rows:
                print(row.line(), file=out)
            ok = all(r.passed for r in rows)
            print("verify", args.selector, "PASSED" if ok else "FAILED", file=out)
            return EXIT_OK if ok else EXIT_ERROR
        if args.cmd == "list":
            print("builtin scenarios:", ", ".join(sorted(BUILTIN)), file=out)
            print("initial presets:  ", ", ".join(sorted(INITIAL_PRESETS)), file=out)
            print("source presets:   ", ", ".join(sorted(SOURCE_PRESETS)), file=out)
            print("surface presets:  ", ", ".join(sorted(SURFACE_PRESETS)), file=out)
            print("laws:             ", ", ".join(sorted(LAWS)), file=out)
            return EXIT_OK
        cfg = load_scenario(args.config)
        if args.cmd == "run":
            if not args.quiet:
                print(cfg.echo(), file=out)
            summary = run(cfg, args.csv, log=sys.stderr)
            print(summary.text(), file=out)
            return summary.exit_code
        if args.cmd == "converge":
            grids = [int(x) for x in args.grids.split(",") if x.strip()]
            rows = convergence_study(cfg, grids, args.csv)
            print(f"{'N':>6} {'error':>14} {'order':>8}", file=out)
            for r in rows:
                print(f"{r.N:>6} {r.error:>14.6e} {r.order_text():>8}", file=out)
            return EXIT_OK
        if args.cmd == "check-compat":
            rep = check_compatibility(cfg, args.order)
            print(f"{'p':>3} {'interface':>12} {'boundary':>12} {'tol':>10}", file=out)
            for p, a, b in rep.rows():
                print(f"{p:>3} {a:>12.3e} {b:>12.3e} {rep.tol_at(p):>10.1e}", file=out)
            print("compatible" if rep.passed else "NOT compatible", file=out)
            return EXIT_OK if rep.passed else EXIT_ERROR
    except (ConfigError, cp.CompatibilityError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_ERROR


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
