"""Finite-difference evolution of ``chi(u) d_t u + sum_j A_j^co d_j u + sigma(u) u = f``.

Discretisation
--------------
* Colocated cell-centred grid on ``[0,L1]x[0,L2]x[0,L3]`` split by the face
  ``x3 = s`` into the minus region (below) and the plus region (above).
  Each region carries two ghost layers on every side.
* Second-order central differences. Each stage solves the 6x6 system
  ``chi(u) k = r`` cell by cell and then adds the fourth-difference
  dissipation ``-(eps4 c_max / h) delta^4 u`` per axis, with ``c_max`` the
  largest wave speed ``lambda_min(chi)^(-1/2)``. The damping stabilises the
  explicit midpoint rule (RK2) for the purely imaginary central spectrum.

Boundary closures
-----------------
* Perfect conductor faces use the mirror rule: tangential E and normal H
  odd, normal E and tangential H even.
* Periodic axes (x1, x2 only) wrap around.
* At the interface the two one-sided face traces are combined by an
  upwind (characteristic) solve that enforces ``[E x nu] = 0`` and
  ``[H x nu] = J_Sigma`` exactly with ``nu = e3``. The tangential ghosts of
  each side are then quadratic extrapolations through the face state and the
  two nearest interior cells; normal components are extrapolated one-sidedly
  (they never enter the x3 derivatives of the curl).

Stability of the interface closure is not proven; it is checked
empirically through the energy monitor and the test-suite.
"""

from __future__ import annotations

import os
import struct
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Optional

import numpy as np
from numpy.typing import NDArray

from .material_laws import MaterialLaw

GHOST = 2
REGIONS = ("-", "+")
MAGIC = b"MXIL0001"

Source = Callable[[float, NDArray, str], NDArray]
SurfaceCurrent = Callable[[float, NDArray], NDArray]


class SolverError(RuntimeError):
    pass


class HyperbolicityError(SolverError):
    pass


# ---------------------------------------------------------------------------
# grid and state
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Grid:
    L: tuple[float, float, float]
    N: tuple[int, int, int]
    s: float
    periodic: tuple[bool, bool] = (False, False)

    def __post_init__(self) -> None:
        if len(self.L) != 3 or len(self.N) != 3:
            raise ValueError("grid needs three extents and three cell counts")
        if any(n < 1 for n in self.N) or any(l <= 0 for l in self.L):
            raise ValueError("cell counts and extents must be positive")
        k = self.s / self.h[2]
        if abs(k - round(k)) > 1e-9 or not (3 <= round(k) <= self.N[2] - 3):
            raise ValueError(
                f"interface s={self.s!r} must lie on a cell face with at least three cells on each side"
            )

    @property
    def h(self) -> tuple[float, float, float]:
        return tuple(l / n for l, n in zip(self.L, self.N))  # type: ignore[return-value]

    @property
    def k_s(self) -> int:
        return int(round(self.s / self.h[2]))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.h))

    def shape(self, tag: str) -> tuple[int, int, int]:
        n3 = self.k_s if tag == "-" else self.N[2] - self.k_s
        return (self.N[0], self.N[1], n3)

    def axis_centers(self, tag: str, axis: int) -> NDArray:
        h = self.h[axis]
        if axis < 2:
            return (np.arange(self.N[axis]) + 0.5) * h
        off = 0 if tag == "-" else self.k_s
        return (np.arange(self.shape(tag)[2]) + off + 0.5) * h

    def centers(self, tag: str) -> NDArray:
        axes = [self.axis_centers(tag, a) for a in range(3)]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)

    def face_centers(self) -> NDArray:
        a = [self.axis_centers("-", 0), self.axis_centers("-", 1), np.array([self.s])]
        return np.stack(np.meshgrid(*a, indexing="ij"), axis=-1)[:, :, 0, :]

    def region_mask(self) -> NDArray[np.int8]:
        m = np.zeros(self.N, dtype=np.int8)
        m[:, :, self.k_s :] = 1
        return m


@dataclass
class FieldState:
    t: float
    u: dict[str, NDArray]  # tag -> (n1+4, n2+4, n3+4, 6) including ghosts

    @classmethod
    def zeros(cls, grid: Grid, t: float = 0.0) -> "FieldState":
        return cls(t, {tag: np.zeros(tuple(n + 2 * GHOST for n in grid.shape(tag)) + (6,)) for tag in REGIONS})

    @classmethod
    def from_function(cls, grid: Grid, u0: Callable[[NDArray, str], NDArray], t: float = 0.0) -> "FieldState":
        st = cls.zeros(grid, t)
        for tag in REGIONS:
            st.interior(tag)[...] = u0(grid.centers(tag), tag)
        return st

    def interior(self, tag: str) -> NDArray:
        g = GHOST
        return self.u[tag][g:-g, g:-g, g:-g]

    def copy(self) -> "FieldState":
        return FieldState(self.t, {k: v.copy() for k, v in self.u.items()})

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(self.interior(t))) for t in REGIONS)


# ---------------------------------------------------------------------------
# boundary closures
# ---------------------------------------------------------------------------

# sign of the mirror image per component, indexed by the face normal axis
_PEC_SIGN = {}
for _a in range(3):
    s = -np.ones(6)
    s[_a] = 1.0  # normal E even
    s[3:] = 1.0
    s[3 + _a] = -1.0  # normal H odd
    _PEC_SIGN[_a] = s


def _sl(axis: int, idx) -> tuple:
    sel = [slice(GHOST, -GHOST)] * 3
    sel[axis] = idx
    return tuple(sel)


def apply_outer_boundary(state: FieldState, grid: Grid) -> FieldState:
    """Fill the ghosts on the outer box faces (mirror or periodic) in place."""
    for tag in REGIONS:
        u = state.u[tag]
        for axis in range(3):
            n = grid.shape(tag)[axis]
            if axis < 2 and grid.periodic[axis]:
                for g in range(GHOST):
                    u[_sl(axis, g)] = u[_sl(axis, n + g)]
                    u[_sl(axis, n + GHOST + g)] = u[_sl(axis, GHOST + g)]
                continue
            sign = _PEC_SIGN[axis]
            sides = ("lo", "hi")
            if axis == 2:
                sides = ("lo",) if tag == "-" else ("hi",)
            for side in sides:
                for g in range(1, GHOST + 1):
                    if side == "lo":
                        u[_sl(axis, GHOST - g)] = sign * u[_sl(axis, GHOST + g - 1)]
                    else:
                        u[_sl(axis, GHOST + n - 1 + g)] = sign * u[_sl(axis, GHOST + n - g)]
    return state


def _face_trace(c1: NDArray, c2: NDArray, c3: NDArray) -> NDArray:
    """Third-order extrapolation to a face from cells at h/2, 3h/2, 5h/2."""
    return (15.0 * c1 - 10.0 * c2 + 3.0 * c3) / 8.0


def impedance(law: MaterialLaw, x: NDArray, u: NDArray) -> NDArray:
    """Tangential wave impedance ``sqrt(chi_H / chi_E)`` at face states."""
    c = law.chi(x, u[..., :3], u[..., 3:])
    ce = 0.5 * (c[..., 0, 0] + c[..., 1, 1])
    ch = 0.5 * (c[..., 3, 3] + c[..., 4, 4])
    return np.sqrt(ch / ce)


def interface_state(
    um: NDArray, up: NDArray, Zm: NDArray, Zp: NDArray, J: Optional[NDArray]
) -> tuple[NDArray, NDArray]:
    """Upwind face states of both sides satisfying the jump relations.

    ``um``, ``up``: face traces (..., 6) from below and above. Returns the
    face states ``(u*_-, u*_+)``; normal components are left as traced.
    """
    Et_m, Et_p = um[..., :2], up[..., :2]
    Km = np.stack([um[..., 4], -um[..., 3]], axis=-1)  # H x e3, tangential part
    Kp = np.stack([up[..., 4], -up[..., 3]], axis=-1)
    j = np.zeros_like(Km) if J is None else J[..., :2]
    zm, zp = Zm[..., None], Zp[..., None]
    R = Et_m + zm * Km  # travels towards +x3, known from below
    Lf = Et_p - zp * Kp  # travels towards -x3, known from above
    K_m = (R - Lf - zp * j) / (zm + zp)
    K_p = K_m + j
    E = R - zm * K_m
    out_m, out_p = um.copy(), up.copy()
    for out, K in ((out_m, K_m), (out_p, K_p)):
        out[..., 0:2] = E
        out[..., 3] = -K[..., 1]
        out[..., 4] = K[..., 0]
    return out_m, out_p


_TANGENTIAL = np.array([0, 1, 3, 4])
_NORMAL = np.array([2, 5])


def apply_interface_coupling(
    state: FieldState,
    grid: Grid,
    laws: Mapping[str, MaterialLaw],
    J_sigma: Optional[SurfaceCurrent] = None,
) -> FieldState:
    """Fill the interface ghosts of both regions in place."""
    g = GHOST
    um_all, up_all = state.u["-"], state.u["+"]
    nm = grid.shape("-")[2]
    xy = (slice(g, -g), slice(g, -g))
    m = [um_all[xy + (g + nm - i,)] for i in (1, 2, 3)]  # nearest first
    p = [up_all[xy + (g + i - 1,)] for i in (1, 2, 3)]
    fm, fp = _face_trace(*m), _face_trace(*p)
    xf = grid.face_centers()
    J = None
    if J_sigma is not None:
        J = np.asarray(J_sigma(state.t, xf), dtype=float)
        if np.max(np.abs(J[..., 2]), initial=0.0) > 1e-12:
            raise SolverError("surface current must be tangential to the interface")
    sm, sp = interface_state(fm, fp, impedance(laws["-"], xf, fm), impedance(laws["+"], xf, fp), J)
    for face, c, arr, step in ((sm, m, um_all, 1), (sp, p, up_all, -1)):
        base = g + nm - 1 if step == 1 else g  # index of the nearest interior cell
        ghost1 = (8.0 / 3.0) * face - 2.0 * c[0] + (1.0 / 3.0) * c[1]
        ghost2 = 8.0 * face - 9.0 * c[0] + 2.0 * c[1]
        ghost1[..., _NORMAL] = 3.0 * c[0][..., _NORMAL] - 3.0 * c[1][..., _NORMAL] + c[2][..., _NORMAL]
        ghost2[..., _NORMAL] = 6.0 * c[0][..., _NORMAL] - 8.0 * c[1][..., _NORMAL] + 3.0 * c[2][..., _NORMAL]
        arr[xy + (base + step,)] = ghost1
        arr[xy + (base + 2 * step,)] = ghost2
    return state


# ---------------------------------------------------------------------------
# right-hand side and stepping
# ---------------------------------------------------------------------------


def thread_count() -> int:
    try:
        n = int(os.environ.get("MXIL_THREADS", "1"))
    except ValueError:
        n = 1
    return max(1, n)


def _shifted(u: NDArray, axis: int, off: int, n: tuple[int, int, int]) -> NDArray:
    sel = [slice(GHOST, GHOST + k) for k in n]
    sel[axis] = slice(GHOST + off, GHOST + off + n[axis])
    return u[tuple(sel)]


class Solver:
    """Holds the static data of a discretised problem."""

    def __init__(
        self,
        grid: Grid,
        laws: Mapping[str, MaterialLaw],
        source: Optional[Source] = None,
        surface_current: Optional[SurfaceCurrent] = None,
        eps4: float = 0.02,
        workers: Optional[int] = None,
    ):
        self.grid = grid
        self.laws = dict(laws)
        self.source = source
        self.surface_current = surface_current
        self.eps4 = float(eps4)
        self.workers = thread_count() if workers is None else max(1, int(workers))
        self.x = {tag: grid.centers(tag) for tag in REGIONS}
        self._linear_diag = {}
        self._linear_sigma: dict[str, Optional[NDArray]] = {}
        for tag, law in self.laws.items():
            if law.name == "linear_isotropic":
                c = law.chi(self.x[tag], np.zeros(self.x[tag].shape), np.zeros(self.x[tag].shape))
                self._linear_diag[tag] = np.diagonal(c, axis1=-2, axis2=-1).copy()
                sg = law.sigma(self.x[tag], np.zeros(self.x[tag].shape), np.zeros(self.x[tag].shape))
                self._linear_sigma[tag] = np.broadcast_to(sg, self.x[tag].shape[:-1] + (6, 6)).copy() if np.any(sg) else None
        self.c_max = 1.0

    # --- ghosts -----------------------------------------------------------
    def fill_ghosts(self, state: FieldState) -> FieldState:
        apply_outer_boundary(state, self.grid)
        apply_interface_coupling(state, self.grid, self.laws, self.surface_current)
        return state

    # --- material helpers -------------------------------------------------
    def min_chi_eigenvalue(self, state: FieldState) -> float:
        lam = np.inf
        for tag in REGIONS:
            if tag in self._linear_diag:
                lam = min(lam, float(np.min(self._linear_diag[tag])))
                continue
            ui = state.interior(tag)
            c = self.laws[tag].chi(self.x[tag], ui[..., :3], ui[..., 3:])
            lam = min(lam, float(np.min(np.linalg.eigvalsh(c)[..., 0])))
        return lam

    def _solve_chi(self, tag: str, ui: NDArray, r: NDArray) -> NDArray:
        if tag in self._linear_diag:
            return r / self._linear_diag[tag]
        law = self.laws[tag]
        x = self.x[tag]

        def work(sl: slice) -> NDArray:
            c = law.chi(x[sl], ui[sl][..., :3], ui[sl][..., 3:])
            return np.linalg.solve(c, r[sl][..., None])[..., 0]

        n0 = ui.shape[0]
        if self.workers == 1 or n0 < 2:
            return work(slice(None))
        bounds = np.linspace(0, n0, min(self.workers, n0) + 1).astype(int)
        chunks = [slice(a, b) for a, b in zip(bounds[:-1], bounds[1:])]
        with ThreadPoolExecutor(self.workers) as pool:
            parts = list(pool.map(work, chunks))
        return np.concatenate(parts, axis=0)

    # --- residual ---------------------------------------------------------
    def residual(self, state: FieldState, tag: str) -> NDArray:
        """``f - sum_j A_j^co D_j u - sigma(u) u`` on interior cells."""
        grid = self.grid
        u = state.u[tag]
        n = grid.shape(tag)
        h = grid.h
        ui = state.interior(tag)
        d = [(_shifted(u, a, 1, n) - _shifted(u, a, -1, n)) / (2.0 * h[a]) for a in range(3)]
        r = np.zeros(ui.shape)
        # curl H into the E rows, -curl E into the H rows
        r[..., 0] = d[1][..., 5] - d[2][..., 4]
        r[..., 1] = d[2][..., 3] - d[0][..., 5]
        r[..., 2] = d[0][..., 4] - d[1][..., 3]
        r[..., 3] = -(d[1][..., 2] - d[2][..., 1])
        r[..., 4] = -(d[2][..., 0] - d[0][..., 2])
        r[..., 5] = -(d[0][..., 1] - d[1][..., 0])
        if tag in self._linear_sigma:
            sig = self._linear_sigma[tag]
        else:
            sig = self.laws[tag].sigma(self.x[tag], ui[..., :3], ui[..., 3:])
        if sig is not None and np.any(sig):
            r[..., :3] -= np.einsum("...pq,...q->...p", sig[..., :3, :3], ui[..., :3])
        if self.source is not None:
            r += np.asarray(self.source(state.t, self.x[tag], tag), dtype=float)
        return r

    def dissipation(self, state: FieldState, tag: str) -> NDArray:
        """``(eps4 c_max / h_a) sum_a delta_a^4 u``, i.e. ``eps4 c_max h^3 D^4 u``."""
        u, n, h = state.u[tag], self.grid.shape(tag), self.grid.h
        ui = state.interior(tag)
        out = np.zeros(ui.shape)
        for a in range(3):
            d4 = _shifted(u, a, -2, n) + _shifted(u, a, 2, n)
            d4 -= 4.0 * (_shifted(u, a, -1, n) + _shifted(u, a, 1, n))
            d4 += 6.0 * ui
            d4 *= self.eps4 * self.c_max / h[a]
            out += d4
        return out

    def rate(self, state: FieldState) -> dict[str, NDArray]:
        """``d_t u`` on interior cells; ghosts must be fresh.

        The dissipation acts on ``d_t u`` directly (after the ``chi`` solve),
        so its rate is ``eps4 c_max / h`` whatever the size of ``chi``.
        """
        out = {}
        for tag in REGIONS:
            k = self._solve_chi(tag, state.interior(tag), self.residual(state, tag))
            if self.eps4 > 0:
                k -= self.dissipation(state, tag)
            out[tag] = k
        return out

    # --- stepping ---------------------------------------------------------
    def cfl_timestep(self, state: FieldState, cfl: float, remaining: float = np.inf) -> float:
        return self.common_timestep([state], cfl, remaining)

    def common_timestep(self, states: list[FieldState], cfl: float, remaining: float = np.inf) -> float:
        """CFL step valid for every given state; also sets the dissipation speed."""
        lam = min(self.min_chi_eigenvalue(st) for st in states)
        if not lam > 0:
            raise HyperbolicityError(f"chi lost positivity (min eigenvalue {lam!r})")
        self.c_max = 1.0 / np.sqrt(lam)
        dt = cfl * min(self.grid.h) * np.sqrt(lam) / np.sqrt(3.0)
        return float(min(dt, remaining))

    def advance(self, state: FieldState, dt: float) -> FieldState:
        """Explicit midpoint step; returns a new state with fresh ghosts."""
        self.fill_ghosts(state)
        k1 = self.rate(state)
        mid = state.copy()
        for tag in REGIONS:
            mid.interior(tag)[...] += 0.5 * dt * k1[tag]
        mid.t = state.t + 0.5 * dt
        self.fill_ghosts(mid)
        k2 = self.rate(mid)
        new = state.copy()
        for tag in REGIONS:
            new.interior(tag)[...] += dt * k2[tag]
        new.t = state.t + dt
        self.fill_ghosts(new)
        return new

    def energy(self, state: FieldState) -> float:
        tot = 0.0
        for tag in REGIONS:
            ui = state.interior(tag)
            c = self.laws[tag].chi(self.x[tag], ui[..., :3], ui[..., 3:])
            tot += 0.5 * float(np.sum(np.einsum("...p,...pq,...q->...", ui, c, ui)))
        return tot * self.grid.cell_volume


def cfl_timestep(solver: Solver, state: FieldState, cfl_factor: float, remaining: float = np.inf) -> float:
    return solver.cfl_timestep(state, cfl_factor, remaining)


def advance(solver: Solver, state: FieldState, dt: float) -> FieldState:
    return solver.advance(state, dt)


# ---------------------------------------------------------------------------
# scenarios and the evolution loop
# ---------------------------------------------------------------------------


@dataclass
class Scenario:
    grid: Grid
    laws: dict[str, MaterialLaw]
    u0: Callable[[NDArray, str], NDArray]
    T: float
    source: Optional[Source] = None
    surface_current: Optional[SurfaceCurrent] = None
    cfl: float = 0.5
    eps4: float = 0.02
    cadence: int = 1
    t0: float = 0.0
    rho0: Optional[Callable[[NDArray, str], NDArray]] = None
    rho_sigma0: Optional[Callable[[NDArray], NDArray]] = None
    thresholds: Optional[object] = None
    norm_order: int = 3
    max_steps: int = 10_000_000
    exact: Optional[Callable[[float, NDArray, str], NDArray]] = None


@dataclass
class EvolveResult:
    state: FieldState
    series: object
    status: object
    steps: int
    max_error: Optional[float] = None


def evolve(scenario: Scenario, observer: Optional[Callable[[FieldState], None]] = None) -> EvolveResult:
    """Run a scenario to ``T`` or until the blow-up monitor stops it."""
    from .diagnostics import DiagnosticsSeries, Monitor, Thresholds

    grid = scenario.grid
    solver = Solver(grid, scenario.laws, scenario.source, scenario.surface_current, scenario.eps4)
    state = FieldState.from_function(grid, scenario.u0, scenario.t0)
    solver.fill_ghosts(state)
    thresholds = scenario.thresholds or Thresholds()
    mon = Monitor(solver, thresholds, scenario.rho0, scenario.rho_sigma0, scenario.norm_order)
    series = DiagnosticsSeries()
    max_err = None if scenario.exact is None else 0.0

    def err(st: FieldState) -> float:
        return l2_error(grid, st, lambda x, tag: scenario.exact(st.t, x, tag))

    mon.start(state)
    series.append(mon.sample(state))
    if max_err is not None:
        max_err = err(state)
    if observer is not None:
        observer(state)
    steps = 0
    T = scenario.t0 + scenario.T
    while mon.status.flag == "running" and state.t < T - 1e-12 * max(1.0, abs(T)):
        if steps >= scenario.max_steps:
            break
        try:
            dt = solver.cfl_timestep(state, scenario.cfl, T - state.t)
        except HyperbolicityError as exc:
            mon.force("domain_exit", state.t, float("nan"))
            break
        new = solver.advance(state, dt)
        steps += 1
        mon.step(state, new)
        state = new
        if max_err is not None and state.is_finite():
            max_err = max(max_err, err(state))
        if observer is not None:
            observer(state)
        if steps % scenario.cadence == 0 or mon.status.flag != "running" or state.t >= T - 1e-12 * max(1.0, abs(T)):
            series.append(mon.sample(state))
    mon.finish(state)
    return EvolveResult(state, series, mon.status, steps, max_err)


def l2_error(grid: Grid, state: FieldState, exact: Callable[[NDArray, str], NDArray]) -> float:
    tot = 0.0
    for tag in REGIONS:
        diff = state.interior(tag) - exact(grid.centers(tag), tag)
        tot += float(np.sum(diff * diff))
    return float(np.sqrt(tot * grid.cell_volume))


# ---------------------------------------------------------------------------
# checkpoints
# ---------------------------------------------------------------------------
#
# layout (all numbers in the byte order announced in byte 8):
#   0..7   magic b"MXIL0001"
#   8      b"<" little endian or b">" big endian
#   9      bit 0: x1 periodic, bit 1: x2 periodic
#   10..15 reserved, zero
#   f8 t | i8 N1 N2 N3 | f8 h1 h2 h3 | f8 s | i8 k_s
#   i1 region mask (N1*N2*N3, C order; 1 = plus, 0 = minus)
#   f8 minus interior (N1, N2, k_s, 6), C order
#   f8 plus interior (N1, N2, N3 - k_s, 6), C order


def save_checkpoint(path: str, grid: Grid, state: FieldState) -> None:
    order = "<" if sys.byteorder == "little" else ">"
    flags = int(grid.periodic[0]) | (int(grid.periodic[1]) << 1)
    header = MAGIC + order.encode() + bytes([flags]) + bytes(6)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(struct.pack(order + "d3q3ddq", state.t, *grid.N, *grid.h, grid.s, grid.k_s))
        fh.write(grid.region_mask().astype(np.int8).tobytes(order="C"))
        for tag in REGIONS:
            fh.write(np.ascontiguousarray(state.interior(tag), dtype=order + "f8").tobytes(order="C"))


def load_checkpoint(path: str) -> tuple[Grid, FieldState]:
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:8] != MAGIC:
        raise SolverError("not a checkpoint file (bad magic)")
    order = data[8:9].decode()
    if order not in "<>":
        raise SolverError("checkpoint has an invalid byte-order flag")
    flags = data[9]
    fmt = order + "d3q3ddq"
    off = 16
    t, n1, n2, n3, h1, h2, h3, s, k_s = struct.unpack_from(fmt, data, off)
    off += struct.calcsize(fmt)
    grid = Grid((n1 * h1, n2 * h2, n3 * h3), (n1, n2, n3), s, (bool(flags & 1), bool(flags & 2)))
    if grid.k_s != k_s:
        raise SolverError("checkpoint interface index is inconsistent")
    mask = np.frombuffer(data, dtype=np.int8, count=n1 * n2 * n3, offset=off).reshape(grid.N)
    if not np.array_equal(mask, grid.region_mask()):
        raise SolverError("checkpoint region mask does not describe a flat interface")
    off += n1 * n2 * n3
    state = FieldState.zeros(grid, t)
    for tag in REGIONS:
        shp = grid.shape(tag) + (6,)
        cnt = int(np.prod(shp))
        arr = np.frombuffer(data, dtype=order + "f8", count=cnt, offset=off).reshape(shp)
        state.interior(tag)[...] = arr
        off += cnt * 8
    return grid, state
