"""Initial time derivatives, compatibility residuals and data correction.

The time derivatives ``S_p = (d_t^p u)(t0)`` of a solution are determined by
the data through a recursion obtained by differentiating the evolution
equation in time. They are evaluated here on nodal sample grids (one per
region, both containing the interface nodes) so that boundary and interface
traces are plain samples. Spatial derivatives are second-order central
differences with second-order one-sided closures, applied to each region
separately so that no stencil reaches across the interface.

Field layout: component axis last, i.e. ``(n1, n2, n3, ncomp)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb, factorial
from typing import Mapping, Optional, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .material_laws import MaterialLaw
from .maxwell_algebra import NORMAL_IDX, block_symbols, boundary_matrices, symbol_matrices

MAX_ORDER = 4
REGIONS = ("+", "-")


class CompatibilityError(ValueError):
    pass


class SingularCoefficientError(CompatibilityError):
    pass


class UnsupportedOrderError(CompatibilityError):
    pass


# ---------------------------------------------------------------------------
# sample grids and finite differences
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SampleGrid:
    """Tensor grid of one region. Periodic axes omit the right end point."""

    axes: tuple[NDArray, NDArray, NDArray]
    periodic: tuple[bool, bool, bool] = (False, False, False)

    @classmethod
    def box(cls, lo: Sequence[float], hi: Sequence[float], n: Sequence[int],
            periodic: Sequence[bool] = (False, False, False)) -> "SampleGrid":
        axes = []
        for a, b, k, per in zip(lo, hi, n, periodic):
            axes.append(a + (b - a) * np.arange(k) / k if per else np.linspace(a, b, k))
        return cls(tuple(axes), tuple(bool(p) for p in periodic))

    @property
    def shape(self) -> tuple[int, int, int]:
        return tuple(len(a) for a in self.axes)  # type: ignore[return-value]

    @property
    def spacing(self) -> tuple[float, float, float]:
        return tuple(float(a[1] - a[0]) for a in self.axes)  # type: ignore[return-value]

    def points(self) -> NDArray[np.float64]:
        return np.stack(np.meshgrid(*self.axes, indexing="ij"), axis=-1)


def partial(f: NDArray, axis: int, grid: SampleGrid) -> NDArray:
    """Second-order derivative along a spatial axis of a component-last field."""
    h = grid.spacing[axis]
    if grid.periodic[axis]:
        return (np.roll(f, -1, axis=axis) - np.roll(f, 1, axis=axis)) / (2.0 * h)
    return np.gradient(f, h, axis=axis, edge_order=2)


@dataclass(frozen=True)
class InterfaceGrid:
    """Two regions split by the plane ``x3 = s``; minus lies below."""

    plus: SampleGrid
    minus: SampleGrid

    def __post_init__(self) -> None:
        if not np.isclose(self.plus.axes[2][0], self.minus.axes[2][-1]):
            raise CompatibilityError("region grids do not share the interface plane")
        for k in (0, 1):
            if not np.allclose(self.plus.axes[k], self.minus.axes[k]):
                raise CompatibilityError("region grids differ in tangential axes")

    @classmethod
    def box(cls, L: Sequence[float], n: Sequence[int], s: float,
            periodic: Sequence[bool] = (False, False)) -> "InterfaceGrid":
        """Nodal grid of ``[0,L1]x[0,L2]x[0,L3]`` with ``n`` intervals per axis."""
        h3 = L[2] / n[2]
        k = int(round(s / h3))
        if not (0 < k < n[2]) or abs(k * h3 - s) > 1e-12 * max(1.0, L[2]):
            raise CompatibilityError("interface must lie on an interior grid plane")
        per = (bool(periodic[0]), bool(periodic[1]), False)
        nt = [n[a] if per[a] else n[a] + 1 for a in (0, 1)]
        minus = SampleGrid.box((0, 0, 0), (L[0], L[1], s), (nt[0], nt[1], k + 1), per)
        plus = SampleGrid.box((0, 0, s), (L[0], L[1], L[2]), (nt[0], nt[1], n[2] - k + 1), per)
        return cls(plus, minus)

    def region(self, tag: str) -> SampleGrid:
        return self.plus if tag == "+" else self.minus


# ---------------------------------------------------------------------------
# jets
# ---------------------------------------------------------------------------


@dataclass
class TimeJet:
    """Plain time derivatives ``d_t^p u(t0)`` for ``p = 0..order`` per region."""

    order: int
    coefficients: dict[str, list[NDArray]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        shapes = {c.shape for v in self.coefficients.values() for c in v[:1]}
        for tag, v in self.coefficients.items():
            if len(v) != self.order + 1:
                raise CompatibilityError(f"region {tag}: expected {self.order + 1} coefficients")
            if any(c.shape != v[0].shape for c in v):
                raise CompatibilityError(f"region {tag}: coefficients differ in shape")
        if len({s[-1] for s in shapes}) > 1:
            raise CompatibilityError("regions differ in component count")

    def __getitem__(self, tag: str) -> list[NDArray]:
        return self.coefficients[tag]


def _matvec(M: NDArray, v: NDArray) -> NDArray:
    return np.einsum("...pq,...q->...p", M, v)


def _spd_solve(M: NDArray, rhs: NDArray) -> NDArray:
    sym = 0.5 * (M + np.swapaxes(M, -1, -2))
    lam = np.linalg.eigvalsh(sym)
    scale = np.max(np.abs(lam), axis=-1)
    bad = lam[..., 0] <= 1e-13 * np.maximum(scale, 1e-300)
    if np.any(bad):
        idx = tuple(int(i) for i in np.argwhere(np.atleast_1d(bad))[0])
        raise SingularCoefficientError(f"coefficient of d_t u is singular at cell {idx}")
    return np.linalg.solve(M, rhs[..., None])[..., 0]


def _spatial_term(A: Sequence[NDArray], S: NDArray, grid: SampleGrid) -> NDArray:
    return sum(_matvec(np.asarray(A[j]), partial(S, j, grid)) for j in range(3))


def _check_order(m: int) -> None:
    if m < 0:
        raise CompatibilityError("order must be non-negative")
    if m > MAX_ORDER:
        raise UnsupportedOrderError(f"jet order {m} exceeds the implemented maximum {MAX_ORDER}")


def linear_jet_region(
    grid: SampleGrid,
    A0_jet: Sequence[NDArray],
    A: Sequence[NDArray],
    D_jet: Sequence[NDArray],
    f_jet: Sequence[NDArray],
    u0: NDArray,
    m: int,
) -> list[NDArray]:
    """Recursion for a linear system on one region.

    ``A0_jet[l]``, ``D_jet[l]`` and ``f_jet[l]`` hold the plain time
    derivatives of order ``l`` at ``t0`` (``l <= m - 1``); ``A`` are the
    time-independent spatial coefficients (constant or fields).
    """
    _check_order(m)
    S = [np.asarray(u0, dtype=float)]
    for p in range(1, m + 1):
        rhs = np.asarray(f_jet[p - 1], dtype=float) - _spatial_term(A, S[p - 1], grid)
        for l in range(1, p):
            rhs = rhs - comb(p - 1, l) * _matvec(A0_jet[l], S[p - l])
        for l in range(p):
            rhs = rhs - comb(p - 1, l) * _matvec(D_jet[l], S[p - 1 - l])
        S.append(_spd_solve(np.asarray(A0_jet[0]), rhs))
    return S


def _zero_jet(shape: tuple, m: int) -> list[NDArray]:
    return [np.zeros(shape) for _ in range(max(m, 1))]


def time_derivatives_linear(
    t0: float,
    A0_jet: Mapping[str, Sequence[NDArray]],
    A_j: Optional[Sequence[NDArray]],
    D_jet: Optional[Mapping[str, Sequence[NDArray]]],
    f_jet: Optional[Mapping[str, Sequence[NDArray]]],
    u0: Mapping[str, NDArray],
    grid: InterfaceGrid,
    m: int,
) -> TimeJet:
    """``S_p`` for ``p = 0..m`` of a linear system on both regions.

    ``A_j`` defaults to the Maxwell symbols. ``t0`` only labels the jet:
    all inputs are already evaluated there.
    """
    A = [a.to_array() for a in symbol_matrices()] if A_j is None else list(A_j)
    out: dict[str, list[NDArray]] = {}
    for tag, u in u0.items():
        u = np.asarray(u, dtype=float)
        mat_shape = u.shape + (u.shape[-1],)
        D = D_jet[tag] if D_jet is not None else _zero_jet(mat_shape, m)
        f = f_jet[tag] if f_jet is not None else _zero_jet(u.shape, m)
        out[tag] = linear_jet_region(grid.region(tag), A0_jet[tag], A, D, f, u, m)
    return TimeJet(m, out)


def nonlinear_jet_region(
    law: MaterialLaw,
    grid: SampleGrid,
    f_jet: Optional[Sequence[NDArray]],
    u0: NDArray,
    m: int,
) -> list[NDArray]:
    """Recursion with coefficients ``chi(u(t))`` and ``sigma(u(t))``.

    The coefficient derivatives are read off truncated time-Taylor jets of
    ``chi`` and ``sigma`` evaluated on the already known part of the jet.
    """
    _check_order(m)
    if law.chi_jet is None or law.sigma_jet is None:
        raise CompatibilityError(f"law {law.name!r} provides no jet evaluation")
    u0 = np.asarray(u0, dtype=float)
    law.check_domain(u0[..., :3])
    x = grid.points()
    A = [a.to_array() for a in symbol_matrices()]
    f = f_jet if f_jet is not None else _zero_jet(u0.shape, m)
    S = [u0]
    coeffs = [u0]  # normalised Taylor coefficients
    for p in range(1, m + 1):
        c = np.stack(coeffs[:p])
        M1 = [factorial(l) * a for l, a in enumerate(law.chi_jet(x, c))]
        M2 = [factorial(l) * a for l, a in enumerate(law.sigma_jet(x, c))]
        rhs = np.asarray(f[p - 1], dtype=float) - _spatial_term(A, S[p - 1], grid)
        for l in range(1, p):
            rhs = rhs - comb(p - 1, l) * _matvec(M1[l], S[p - l])
        for l in range(p):
            rhs = rhs - comb(p - 1, l) * _matvec(M2[l], S[p - 1 - l])
        S.append(_spd_solve(M1[0], rhs))
        coeffs.append(S[p] / factorial(p))
    return S


def time_derivatives_nonlinear(
    laws: Mapping[str, MaterialLaw],
    t0: float,
    f_jet: Optional[Mapping[str, Sequence[NDArray]]],
    u0: Mapping[str, NDArray],
    grid: InterfaceGrid,
    m: int,
) -> TimeJet:
    out = {
        tag: nonlinear_jet_region(laws[tag], grid.region(tag),
                                  None if f_jet is None else f_jet[tag], u, m)
        for tag, u in u0.items()
    }
    return TimeJet(m, out)


def coefficient_jets(law: MaterialLaw, grid: SampleGrid, S: Sequence[NDArray], K: int):
    """Plain derivatives of ``chi(u(t))`` and ``sigma(u(t))`` of order ``< K``."""
    x = grid.points()
    c = np.stack([S[p] / factorial(p) for p in range(K)])
    chi = [factorial(l) * a for l, a in enumerate(law.chi_jet(x, c))]
    sig = [factorial(l) * a for l, a in enumerate(law.sigma_jet(x, c))]
    return chi, sig


def consistency_check(
    laws: Mapping[str, MaterialLaw],
    t0: float,
    f_jet: Optional[Mapping[str, Sequence[NDArray]]],
    u0: Mapping[str, NDArray],
    frozen_jet: TimeJet,
    grid: InterfaceGrid,
) -> float:
    """Largest deviation between the linear recursion with frozen
    coefficients ``chi(u_hat)``, ``sigma(u_hat)`` and the nonlinear one."""
    m = frozen_jet.order
    nonlin = time_derivatives_nonlinear(laws, t0, f_jet, u0, grid, m)
    dev = 0.0
    for tag in u0:
        g = grid.region(tag)
        chi, sig = coefficient_jets(laws[tag], g, frozen_jet[tag], max(m, 1))
        f = None if f_jet is None else f_jet[tag]
        lin = linear_jet_region(
            g, chi, [a.to_array() for a in symbol_matrices()], sig,
            f if f is not None else _zero_jet(np.shape(u0[tag]), m), u0[tag], m,
        )
        for a, b in zip(lin, nonlin[tag]):
            dev = max(dev, float(np.max(np.abs(a - b), initial=0.0)))
    return dev


# ---------------------------------------------------------------------------
# compatibility residuals
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CompatibilityReport:
    order: int
    interface: tuple[float, ...]
    boundary: tuple[float, ...]
    tol: float | tuple[float, ...]

    def tol_at(self, p: int) -> float:
        return float(self.tol[p]) if isinstance(self.tol, tuple) else float(self.tol)

    @property
    def passed(self) -> bool:
        return all(
            max(self.interface[p], self.boundary[p]) <= self.tol_at(p) for p in range(self.order)
        )

    def rows(self) -> list[tuple[int, float, float]]:
        return [(p, self.interface[p], self.boundary[p]) for p in range(self.order)]


def _outer_faces(grid: SampleGrid, tag: str):
    """Yield (normal, trace selector) for the outer faces of one region."""
    for a in range(3):
        if grid.periodic[a]:
            continue
        for side, sgn in ((0, -1), (-1, 1)):
            if a == 2 and ((tag == "+" and side == 0) or (tag == "-" and side == -1)):
                continue  # interface, not outer boundary
            nu = [0, 0, 0]
            nu[a] = sgn
            sel = [slice(None)] * 3
            sel[a] = side
            yield nu, tuple(sel)


def compatibility_residuals(
    jet: TimeJet,
    g_jet: Optional[Sequence[NDArray]],
    m: int,
    grid: InterfaceGrid,
    tol: Optional[float | Sequence[float]] = None,
) -> CompatibilityReport:
    """Sup-norm residuals of ``B_Sigma S_p - d_t^p g`` on the interface and
    of ``B_dG S_p`` on the outer boundary, ``p = 0..m-1``.

    ``tol`` is one tolerance or one per order; the default is
    ``1e-8 (1 + max|data|)``.

    ``g_jet[p]`` is the tangential surface current derivative on the
    interface nodes, shape ``(n1, n2, 3)``; ``None`` means zero.
    """
    if m > jet.order + 1 or m < 1:
        raise CompatibilityError(f"order {m} not covered by a jet of order {jet.order}")
    plus, minus = jet["+"], jet["-"]
    if plus[0].shape[:2] != minus[0].shape[:2]:
        raise CompatibilityError("interface traces of the two regions do not match")
    _, _, b_sig = boundary_matrices([0, 0, 1])
    b_sig = b_sig.to_array()
    iface, bnd = [], []
    scale = 0.0
    for p in range(m):
        tr = np.concatenate([plus[p][:, :, 0, :], minus[p][:, :, -1, :]], axis=-1)
        target = np.zeros(tr.shape[:2] + (6,))
        if g_jet is not None:
            target[..., 3:] = np.asarray(g_jet[p], dtype=float)
            scale = max(scale, float(np.max(np.abs(g_jet[p]), initial=0.0)))
        iface.append(float(np.max(np.abs(_matvec(b_sig, tr) - target), initial=0.0)))
        worst = 0.0
        for tag, S in (("+", plus), ("-", minus)):
            scale = max(scale, float(np.max(np.abs(S[p]), initial=0.0)))
            for nu, sel in _outer_faces(grid.region(tag), tag):
                _, b_dg, _ = boundary_matrices(nu)
                r = _matvec(b_dg.to_array(), S[p][sel])
                worst = max(worst, float(np.max(np.abs(r), initial=0.0)))
        bnd.append(worst)
    if tol is None:
        tol = 1e-8 * (1.0 + scale)
    elif not np.isscalar(tol):
        tol = tuple(float(t) for t in tol)
        if len(tol) != m:
            raise CompatibilityError(f"expected {m} tolerances, got {len(tol)}")
    return CompatibilityReport(m, tuple(iface), tuple(bnd), tol)


# ---------------------------------------------------------------------------
# constructive correction of initial data
# ---------------------------------------------------------------------------


def _q_matrix() -> NDArray[np.float64]:
    q = np.zeros((6, 6))
    for r, (c, s) in enumerate(((4, 1), (3, -1), (2, 1), (1, -1), (0, 1), (5, 1))):
        q[r, c] = s
    return q


Q6 = _q_matrix()
Q12 = np.block([[Q6, np.zeros((6, 6))], [np.zeros((6, 6)), -Q6]])


@dataclass(frozen=True)
class CorrectionResult:
    v: NDArray[np.float64]
    norm_ratio: float
    bound: float


def correction_step(A0: NDArray, w: NDArray) -> NDArray:
    """One step ``w -> w'`` with ``A3 A0^-1 A3 w' = A3 w`` (signed block ``A3``).

    The normal entries of ``A0 (w + h)`` are cancelled by ``h`` supported on
    the normal components; the result is rotated by ``Q12`` onto the range
    of ``A3``.
    """
    idx = list(NORMAL_IDX)
    theta = A0[..., idx, :][..., :, idx]
    a0w = _matvec(A0, w)
    hn = -np.linalg.solve(theta, a0w[..., idx][..., None])[..., 0]
    shifted = np.array(w, dtype=float, copy=True)
    shifted[..., idx] += hn
    w_tilde = -_matvec(A0, shifted)
    return -_matvec(Q12, w_tilde)


def correct_initial_data(A0: ArrayLike, v0: ArrayLike, p: int, eta: float = 1e-8) -> CorrectionResult:
    """Return ``v_p`` with ``A3 (A0^-1 A3)^p v_p = A3 v0`` pointwise.

    ``A0`` has shape ``(..., 12, 12)`` and ``v0`` shape ``(..., 12)``. The
    bound reported is ``(r (1 + r / eta_n))^p`` with ``r`` the largest
    eigenvalue of ``A0`` and ``eta_n`` the smallest eigenvalue of its normal
    block.
    """
    A0 = np.asarray(A0, dtype=float)
    v = np.asarray(v0, dtype=float)
    if p < 0:
        raise CompatibilityError("p must be non-negative")
    idx = list(NORMAL_IDX)
    theta = A0[..., idx, :][..., :, idx]
    lam_t = np.linalg.eigvalsh(0.5 * (theta + np.swapaxes(theta, -1, -2)))
    if np.any(lam_t[..., 0] < eta):
        raise SingularCoefficientError("normal 4x4 block of A0 is not positive definite")
    r = float(np.max(np.linalg.eigvalsh(A0)[..., -1]))
    eta_n = float(np.min(lam_t[..., 0]))
    out = v
    for _ in range(p):
        out = correction_step(A0, out)
    n0 = float(np.linalg.norm(v))
    ratio = float(np.linalg.norm(out)) / n0 if n0 > 0 else 0.0
    return CorrectionResult(out, ratio, (r * (1.0 + r / eta_n)) ** p)


def correction_identity_residual(A0: ArrayLike, v0: ArrayLike, vp: ArrayLike, p: int) -> float:
    """``max |A3 (A0^-1 A3)^p v_p - A3 v0|`` with the signed block ``A3``."""
    A0 = np.asarray(A0, dtype=float)
    a3 = block_symbols().A3_tilde.to_array()
    w = np.asarray(vp, dtype=float)
    for _ in range(p):
        w = np.linalg.solve(A0, _matvec(a3, w)[..., None])[..., 0]
    return float(np.max(np.abs(_matvec(a3, w) - _matvec(a3, np.asarray(v0, dtype=float)))))
