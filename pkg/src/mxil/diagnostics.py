"""Norms, constraint residuals and blow-up monitors along discrete trajectories.

All derivatives are taken region by region (``np.gradient`` with one-sided
second-order closures at region edges, central wrap-around on periodic
axes), so nothing is ever differenced across the interface or the outer
boundary. Reductions use ``np.sum`` over arrays of fixed shape, which keeps
results independent of the solver's thread count.
"""

from __future__ import annotations

import csv
import io
from dataclasses import astuple, dataclass, field, fields
from itertools import product
from typing import Callable, Iterable, Mapping, Optional, Sequence, TextIO

import numpy as np
from numpy.typing import NDArray

from .grid_solver import REGIONS, FieldState, Grid, Solver, Source, SurfaceCurrent, _face_trace
from .material_laws import MaterialLaw

COLUMNS = ("t", "l2", "h1", "h2", "h3", "lip", "divB", "divD_rho", "jumpB", "jumpD_rho", "dist_U", "energy")
FLAGS = ("running", "domain_exit", "lipschitz_blowup", "norm_blowup", "completed")
MAX_NORM_ORDER = 3


class DiagnosticsError(ValueError):
    pass


# ---------------------------------------------------------------------------
# discrete derivatives
# ---------------------------------------------------------------------------


def region_derivative(v: NDArray, axis: int, h: float, periodic: bool = False) -> NDArray:
    """First derivative along a spatial axis of a cell array ``(n1, n2, n3, ...)``."""
    if periodic:
        return (np.roll(v, -1, axis=axis) - np.roll(v, 1, axis=axis)) / (2.0 * h)
    return np.gradient(v, h, axis=axis, edge_order=2)


def _periodic(grid: Grid, axis: int) -> bool:
    return axis < 2 and grid.periodic[axis]


def _multi_indices(m: int) -> list[tuple[int, int, int]]:
    out = [a for a in product(range(m + 1), repeat=3) if sum(a) <= m]
    return sorted(out, key=lambda a: (sum(a), tuple(-x for x in a)))


def region_derivatives(grid: Grid, v: NDArray, m: int) -> dict[tuple[int, int, int], NDArray]:
    """All mixed partial derivatives ``d^alpha v`` with ``|alpha| <= m``."""
    out = {(0, 0, 0): v}
    for a in _multi_indices(m)[1:]:
        axis = next(i for i in range(3) if a[i] > 0)
        parent = list(a)
        parent[axis] -= 1
        out[a] = region_derivative(out[tuple(parent)], axis, grid.h[axis], _periodic(grid, axis))
    return out


# ---------------------------------------------------------------------------
# norms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NormReport:
    per_region: dict[str, tuple[float, ...]]
    combined: tuple[float, ...]

    def __getitem__(self, k: int) -> float:
        return self.combined[k]


def piecewise_norms(grid: Grid, state: FieldState, m: int) -> NormReport:
    """Discrete ``H^0 .. H^m`` norms per region and combined (squares add)."""
    if not 0 <= m <= MAX_NORM_ORDER:
        raise DiagnosticsError(f"norm order m={m} unsupported (0 <= m <= {MAX_NORM_ORDER})")
    vol = grid.cell_volume
    per, sq_total = {}, np.zeros(m + 1)
    for tag in REGIONS:
        ders = region_derivatives(grid, state.interior(tag), m)
        sq = np.zeros(m + 1)
        for a, d in ders.items():
            sq[sum(a)] += float(np.sum(d * d)) * vol
        acc = np.cumsum(sq)
        per[tag] = tuple(float(np.sqrt(x)) for x in acc)
        sq_total += sq
    return NormReport(per, tuple(float(np.sqrt(x)) for x in np.cumsum(sq_total)))


def lipschitz_norm(grid: Grid, state: FieldState) -> float:
    """Discrete ``W^{1,inf}``: max over cells of ``|u|`` and of the gradient's Frobenius norm."""
    best = 0.0
    for tag in REGIONS:
        v = state.interior(tag)
        g2 = sum(region_derivative(v, a, grid.h[a], _periodic(grid, a)) ** 2 for a in range(3))
        best = max(best, float(np.max(np.linalg.norm(v, axis=-1))), float(np.sqrt(np.max(np.sum(g2, axis=-1)))))
    return best


def weighted_sup_norm(series: "DiagnosticsSeries", gamma: float, column: str = "l2") -> float:
    """``sup_t exp(-gamma t) |u(t)|`` over the sampled times."""
    if gamma < 0:
        raise DiagnosticsError("gamma must be non-negative")
    if not len(series):
        return 0.0
    t, v = series.column("t"), series.column(column)
    return float(np.max(np.exp(-gamma * (t - t[0])) * v))


# ---------------------------------------------------------------------------
# charges and constraints
# ---------------------------------------------------------------------------


def _divergence(grid: Grid, v: NDArray) -> NDArray:
    return sum(region_derivative(v[..., a], a, grid.h[a], _periodic(grid, a)) for a in range(3))


def _face_divergence(grid: Grid, j: NDArray) -> NDArray:
    return sum(region_derivative(j[..., a], a, grid.h[a], _periodic(grid, a)) for a in range(2))


class ChargeTracker:
    """Trapezoidal accumulation of ``rho_+-`` and ``rho_Sigma``.

    ``d_t rho = -div J`` in each region and
    ``d_t rho_Sigma = -(div_Sigma J_Sigma - [J . nu])`` on the face, where the
    volume current is read off the source as ``J = -f_E``.
    """

    def __init__(
        self,
        grid: Grid,
        source: Optional[Source] = None,
        surface_current: Optional[SurfaceCurrent] = None,
        rho0: Optional[Callable[[NDArray, str], NDArray]] = None,
        rho_sigma0: Optional[Callable[[NDArray], NDArray]] = None,
        t0: float = 0.0,
    ):
        self.grid = grid
        self.source = source
        self.surface_current = surface_current
        self.t = t0
        self.rho = {
            tag: (np.zeros(grid.shape(tag)) if rho0 is None else np.asarray(rho0(grid.centers(tag), tag), float).copy())
            for tag in REGIONS
        }
        xf = grid.face_centers()
        self.rho_sigma = np.zeros(xf.shape[:-1]) if rho_sigma0 is None else np.asarray(rho_sigma0(xf), float).copy()
        self._rate = self._rates(t0)

    def _rates(self, t: float) -> tuple[dict[str, NDArray], NDArray]:
        g = self.grid
        vol = {tag: np.zeros(g.shape(tag)) for tag in REGIONS}
        face = np.zeros(self.rho_sigma.shape)
        xf = g.face_centers()
        if self.source is not None:
            for tag in REGIONS:
                J = -np.asarray(self.source(t, g.centers(tag), tag), float)[..., :3]
                vol[tag] = -_divergence(g, J)
            jp = -np.asarray(self.source(t, xf, "+"), float)[..., 2]
            jm = -np.asarray(self.source(t, xf, "-"), float)[..., 2]
            face += jp - jm
        if self.surface_current is not None:
            face -= _face_divergence(g, np.asarray(self.surface_current(t, xf), float))
        return vol, face

    def advance_to(self, t: float) -> None:
        if self.source is None and self.surface_current is None:
            self.t = t
            return
        dt = t - self.t
        new = self._rates(t)
        for tag in REGIONS:
            self.rho[tag] += 0.5 * dt * (self._rate[0][tag] + new[0][tag])
        self.rho_sigma += 0.5 * dt * (self._rate[1] + new[1])
        self._rate, self.t = new, t


def _theta(laws: Mapping[str, MaterialLaw], grid: Grid, state: FieldState, tag: str) -> tuple[NDArray, NDArray]:
    u = state.interior(tag)
    D, B = laws[tag].theta(grid.centers(tag), u[..., :3], u[..., 3:])
    shp = u.shape[:-1] + (3,)
    return np.broadcast_to(D, shp), np.broadcast_to(B, shp)


@dataclass(frozen=True)
class DivergenceReport:
    divB: float
    divD_rho: float
    per_region: dict[str, tuple[float, float]]


def divergence_and_charge_report(
    grid: Grid, state: FieldState, laws: Mapping[str, MaterialLaw], rho: Optional[Mapping[str, NDArray]] = None
) -> DivergenceReport:
    """L2 norms of ``div_h B`` and ``div_h D - rho`` per region and combined."""
    vol = grid.cell_volume
    per, sb, sd = {}, 0.0, 0.0
    for tag in REGIONS:
        D, B = _theta(laws, grid, state, tag)
        db = _divergence(grid, B)
        dd = _divergence(grid, D) - (0.0 if rho is None else rho[tag])
        b2, d2 = float(np.sum(db * db)) * vol, float(np.sum(dd * dd)) * vol
        per[tag] = (float(np.sqrt(b2)), float(np.sqrt(d2)))
        sb, sd = sb + b2, sd + d2
    return DivergenceReport(float(np.sqrt(sb)), float(np.sqrt(sd)), per)


def interface_traces(grid: Grid, values: Mapping[str, NDArray]) -> tuple[NDArray, NDArray]:
    """One-sided third-order traces on the face ``x3 = s`` of cell arrays."""
    vm, vp = values["-"], values["+"]
    return _face_trace(vm[:, :, -1], vm[:, :, -2], vm[:, :, -3]), _face_trace(vp[:, :, 0], vp[:, :, 1], vp[:, :, 2])


def interface_conservation_check(
    grid: Grid, state: FieldState, laws: Mapping[str, MaterialLaw], rho_sigma: Optional[NDArray] = None
) -> tuple[float, float]:
    """Face-grid L2 norms of ``[B . nu]`` and ``[D . nu] + rho_Sigma`` with ``nu = e3``."""
    th = {tag: _theta(laws, grid, state, tag) for tag in REGIONS}
    Dm, Dp = interface_traces(grid, {t: th[t][0][..., 2] for t in REGIONS})
    Bm, Bp = interface_traces(grid, {t: th[t][1][..., 2] for t in REGIONS})
    area = grid.h[0] * grid.h[1]
    jb = Bp - Bm
    jd = Dp - Dm + (0.0 if rho_sigma is None else rho_sigma)
    return float(np.sqrt(np.sum(jb * jb) * area)), float(np.sqrt(np.sum(jd * jd) * area))


def domain_distance(grid: Grid, state: FieldState, laws: Mapping[str, MaterialLaw]) -> float:
    d = np.inf
    for tag in REGIONS:
        dist = laws[tag].distance(state.interior(tag)[..., :3])
        if np.size(dist):
            d = min(d, float(np.min(dist)))
    return d


# ---------------------------------------------------------------------------
# series
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Sample:
    t: float
    l2: float
    h1: float
    h2: float
    h3: float
    lip: float
    divB: float
    divD_rho: float
    jumpB: float
    jumpD_rho: float
    dist_U: float
    energy: float


@dataclass
class DiagnosticsSeries:
    rows: list[Sample] = field(default_factory=list)

    def append(self, row: Sample) -> None:
        if self.rows and not row.t > self.rows[-1].t:
            raise DiagnosticsError("sample times must increase strictly")
        self.rows.append(row)

    def __len__(self) -> int:
        return len(self.rows)

    def column(self, name: str) -> NDArray:
        if name not in COLUMNS:
            raise KeyError(f"unknown column {name!r}")
        return np.array([getattr(r, name) for r in self.rows], dtype=float)

    def write_csv(self, out: TextIO) -> None:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(COLUMNS)
        for r in self.rows:
            w.writerow([repr(float(x)) for x in astuple(r)])

    def to_csv(self, path: Optional[str] = None) -> str:
        buf = io.StringIO()
        self.write_csv(buf)
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text


# ---------------------------------------------------------------------------
# blow-up monitoring
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Thresholds:
    kappa_min: float = 1e-3
    L_max: float = 1e6
    N_max: float = 1e8


@dataclass(frozen=True)
class BlowupStatus:
    flag: str = "running"
    time: Optional[float] = None
    value: Optional[float] = None

    def __post_init__(self) -> None:
        if self.flag not in FLAGS:
            raise ValueError(f"unknown flag {self.flag!r}")

    @property
    def terminal(self) -> bool:
        return self.flag != "running"

    @property
    def blowup(self) -> bool:
        return self.flag in ("domain_exit", "lipschitz_blowup", "norm_blowup")


def blowup_monitor(
    status: BlowupStatus,
    t: float,
    thresholds: Thresholds,
    dist: float,
    lip: Optional[float] = None,
    hm: Optional[float] = None,
    finite: bool = True,
) -> BlowupStatus:
    """Update a status with fresh indicators; a terminal flag never reverts.

    Within one check the precedence is domain exit, then Lipschitz, then the
    Sobolev norm. A non-finite state counts as norm blow-up.
    """
    if status.terminal:
        return status
    if not finite:
        return BlowupStatus("norm_blowup", t, float("inf"))
    if dist < thresholds.kappa_min:
        return BlowupStatus("domain_exit", t, dist)
    if lip is not None and not lip <= thresholds.L_max:
        return BlowupStatus("lipschitz_blowup", t, lip)
    if hm is not None and not hm <= thresholds.N_max:
        return BlowupStatus("norm_blowup", t, hm)
    return status


class Monitor:
    """Diagnostics driver used by the evolution loop."""

    def __init__(
        self,
        solver: Solver,
        thresholds: Thresholds,
        rho0=None,
        rho_sigma0=None,
        norm_order: int = 3,
    ):
        self.solver = solver
        self.grid = solver.grid
        self.laws = solver.laws
        self.thresholds = thresholds
        self.rho0, self.rho_sigma0 = rho0, rho_sigma0
        self.norm_order = min(int(norm_order), MAX_NORM_ORDER)
        self.status = BlowupStatus()
        self.tracker: Optional[ChargeTracker] = None

    def start(self, state: FieldState) -> None:
        s = self.solver
        self.tracker = ChargeTracker(self.grid, s.source, s.surface_current, self.rho0, self.rho_sigma0, state.t)
        self.status = BlowupStatus()
        self._check(state)

    def _check(self, state: FieldState, hm: Optional[float] = None) -> None:
        finite = state.is_finite()
        dist = domain_distance(self.grid, state, self.laws) if finite else -np.inf
        lip = lipschitz_norm(self.grid, state) if finite else None
        self.status = blowup_monitor(self.status, state.t, self.thresholds, dist, lip, hm, finite)

    def step(self, old: FieldState, new: FieldState) -> None:
        self.tracker.advance_to(new.t)
        self._check(new)

    def force(self, flag: str, t: float, value: float) -> None:
        if not self.status.terminal:
            self.status = BlowupStatus(flag, t, value)

    def sample(self, state: FieldState) -> Sample:
        g, laws = self.grid, self.laws
        norms = piecewise_norms(g, state, 3)
        div = divergence_and_charge_report(g, state, laws, self.tracker.rho)
        jb, jd = interface_conservation_check(g, state, laws, self.tracker.rho_sigma)
        self._check(state, norms[self.norm_order])
        return Sample(
            float(state.t),
            norms[0],
            norms[1],
            norms[2],
            norms[3],
            lipschitz_norm(g, state),
            div.divB,
            div.divD_rho,
            jb,
            jd,
            domain_distance(g, state, laws),
            self.solver.energy(state),
        )

    def finish(self, state: FieldState) -> None:
        if not self.status.terminal:
            self.status = BlowupStatus("completed", state.t, None)


# ---------------------------------------------------------------------------
# a priori bound echo
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AprioriReport:
    gammas: tuple[float, ...]
    constants: tuple[float, ...]
    C_hat: float


def apriori_bound_check(
    series: DiagnosticsSeries,
    data_norms: tuple[float, float],
    gamma_grid: Sequence[float],
    column: str = "l2",
) -> AprioriReport:
    """Smallest ``C`` with ``sup_t e^{-2 gamma t}|u|^2 <= C (|data|^2 + |f|^2 / gamma)``.

    ``data_norms = (initial data norm, source norm)``. The per-gamma
    constants are reported and ``C_hat`` is their maximum; zero data gives 0.
    """
    d0, fn = data_norms
    consts = []
    for g in gamma_grid:
        if g <= 0:
            raise DiagnosticsError("gamma grid must be positive")
        lhs = weighted_sup_norm(series, g, column) ** 2
        rhs = d0**2 + fn**2 / g
        consts.append(0.0 if lhs == 0 else (np.inf if rhs == 0 else lhs / rhs))
    return AprioriReport(tuple(float(g) for g in gamma_grid), tuple(float(c) for c in consts), float(max(consts, default=0.0)))
