"""Reduction of a flat-chart interface problem to a 12x12 half-space system.

A chart ``phi`` maps a neighbourhood of the interface to coordinates ``y``
with the interface on ``{y3 = 0}``. The Maxwell operator transported by the
chart has coefficients ``sum_j A_j^co d_j phi_l``. The minus side is
reflected onto ``{y3 > 0}`` (with a sign on the normal coefficient), and
the normaliser ``G_r`` built from ``grad phi_3`` turns the normal
coefficient into the constant signed block and the interface matrix into
the constant 4x12 matrix.

Only charts with a dominant third normal derivative (``d_3 phi_3 >= tau``)
are handled. All routines accept sample points as arrays ``(..., 3)`` and
also work pointwise on :class:`~mxil.taylor.TaylorJet` coordinates, which
is how exact derivatives of the transformed coefficients are obtained.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from typing import Callable, Optional, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .maxwell_algebra import ExactMatrix, block_symbols, symbol_matrices
from .taylor import TaylorJet, assemble, block_diag, is_jet


class ChartError(ValueError):
    """Degenerate chart or normaliser."""


def _co() -> list[NDArray]:
    return [a.to_array() for a in symbol_matrices()]


# ---------------------------------------------------------------------------
# charts
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Chart:
    """Chart with explicit inverse and Jacobian.

    ``phi``, ``psi`` map a triple of coordinates to a triple; ``jacobian``
    returns the nested 3x3 list ``J[l][j] = d_j phi_l``. Coordinates can be
    floats, arrays or Taylor jets.
    """

    phi: Callable
    psi: Callable
    jacobian: Callable
    tau: float = 0.3
    name: str = "chart"
    z: int = 3

    def __post_init__(self) -> None:
        if self.z != 3:
            raise ChartError("only charts whose normal is the third coordinate (z = 3) are supported")

    def grad_phi3(self, y) -> list:
        """``grad phi_3`` evaluated at ``psi(y)``."""
        return list(self.jacobian(self.psi(y))[2])

    def check(self, points: ArrayLike, det_floor: float = 1e-10) -> None:
        pts = np.asarray(points, dtype=float)
        y = [pts[..., i] for i in range(3)]
        J = assemble(self.jacobian(self.psi(y)))
        b3 = np.asarray(J[..., 2, 2])
        if np.any(b3 < self.tau):
            raise ChartError(
                f"chart {self.name!r}: d_3 phi_3 = {float(np.min(b3)):.3g} below tau = {self.tau}"
            )
        if np.any(np.abs(np.linalg.det(J)) < det_floor):
            raise ChartError(f"chart {self.name!r}: singular Jacobian")


def identity_chart(tau: float = 0.3) -> Chart:
    ident = lambda x: [x[0], x[1], x[2]]
    return Chart(ident, ident, lambda x: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]], tau, "identity")


def linear_chart(R: ArrayLike, tau: float = 0.3, name: str = "linear") -> Chart:
    """``phi(x) = R x`` for an invertible matrix ``R``."""
    R = np.asarray(R, dtype=float)
    Ri = np.linalg.inv(R)

    def apply(M):
        return lambda x: [sum(M[l, j] * x[j] for j in range(3)) for l in range(3)]

    return Chart(apply(R), apply(Ri), lambda x: [[R[l, j] for j in range(3)] for l in range(3)], tau, name)


def graph_chart(
    scale: float = 1.0, lin=(0.0, 0.0), quad=(0.0, 0.0, 0.0), tau: float = 0.3, stretch: float = 0.0
) -> Chart:
    """``phi(x) = (x1, x2, scale * ((1 + stretch x1) x3 - h(x1, x2)))`` with quadratic ``h``.

    ``h = lin[0] x1 + lin[1] x2 + quad[0] x1^2 + quad[1] x1 x2 + quad[2] x2^2``.
    A nonzero ``stretch`` makes ``d_3 phi_3`` vary along the interface; the
    chart is valid where ``1 + stretch x1 > 0``.
    """
    if scale <= 0:
        raise ChartError("graph chart needs a positive scale")
    l1, l2 = lin
    q11, q12, q22 = quad
    beta = float(stretch)

    def h(x1, x2):
        return l1 * x1 + l2 * x2 + q11 * x1 * x1 + q12 * x1 * x2 + q22 * x2 * x2

    def phi(x):
        return [x[0], x[1], scale * ((1.0 + beta * x[0]) * x[2] - h(x[0], x[1]))]

    def psi(y):
        y3 = y[2] * (1.0 / scale) + h(y[0], y[1])
        return [y[0], y[1], y3 if beta == 0.0 else y3 / (1.0 + beta * y[0])]

    def jac(x):
        d1 = scale * (beta * x[2] - l1 - 2.0 * q11 * x[0] - q12 * x[1])
        d2 = -scale * (l2 + q12 * x[0] + 2.0 * q22 * x[1])
        d3 = scale * (1.0 + beta * x[0])
        zero = 0.0 * d1
        return [[1.0 + zero, zero, zero], [zero, 1.0 + zero, zero], [d1, d2, d3 + zero]]

    return Chart(phi, psi, jac, tau, "graph")


def tilted_chart(alpha: float, tau: float = 0.3) -> Chart:
    """``phi(x) = (x1, x2, x3 - alpha x1)``."""
    return graph_chart(1.0, (alpha, 0.0), tau=tau)


# ---------------------------------------------------------------------------
# chart transport and reflection
# ---------------------------------------------------------------------------


def transported_symbols(jac) -> list:
    """``A~_l = sum_j A_j^co d_j phi_l`` from a nested Jacobian."""
    co = _co()
    out = []
    for l in range(3):
        acc = None
        for j in range(3):
            c = jac[l][j]
            term = c * TaylorJet.constant(co[j], c.K) if is_jet(c) else np.multiply.outer(np.asarray(c, dtype=float), co[j])
            acc = term if acc is None else acc + term
        out.append(acc)
    return out


def chart_transported_coefficients(chart: Chart, y, A0: Callable, D: Callable):
    """Coefficients of the transported operator at chart points ``y``.

    ``A0`` and ``D`` are callables of the original coordinates (given as a
    triple). Returns ``(A0~, A1~, A2~, A3~, D~)``.
    """
    ycomp = _components(y)
    x = chart.psi(ycomp)
    jac = chart.jacobian(x)
    if not any(is_jet(c) for c in ycomp):
        det = np.linalg.det(assemble(jac))
        if np.any(np.abs(det) < 1e-12):
            raise ChartError("singular chart Jacobian")
    out = (A0(x), *transported_symbols(jac), D(x))
    jet = next((c for c in ycomp if is_jet(c)), None)
    if jet is not None:
        out = tuple(o if is_jet(o) else TaylorJet.constant(o, jet.K) for o in out)
    return out


def _components(y):
    if isinstance(y, (list, tuple)):
        return list(y)
    y = np.asarray(y, dtype=float)
    return [y[..., i] for i in range(3)]


def reflect_point(y):
    c = _components(y)
    return [c[0], c[1], -c[2]]


@dataclass(frozen=True)
class ReflectedSystem:
    """12x12 coefficients on ``{y3 >= 0}`` assembled from both sides.

    ``plus`` and ``minus`` are callables ``y -> (A0, A1, A2, A3, D)`` in
    chart coordinates; ``minus`` is defined for ``y3 <= 0``.
    """

    plus: Callable
    minus: Callable

    def minus_reflected(self, y):
        """Minus-side coefficients moved to ``y3 >= 0``; the normal one flips sign."""
        a0, a1, a2, a3, d = self.minus(reflect_point(y))
        return a0, a1, a2, -a3, d

    def coefficients(self, y):
        p = self.plus(_components(y))
        m = self.minus_reflected(y)
        return tuple(block_diag(a, b) for a, b in zip(p, m))


def reflect_system(plus: Callable | Sequence, minus: Callable | Sequence) -> ReflectedSystem:
    """Build the reflected system; sequences of five constant matrices are
    accepted in place of callables."""
    return ReflectedSystem(_as_callable(plus), _as_callable(minus))


def _as_callable(c):
    if callable(c):
        return c
    mats = [np.asarray(m, dtype=float) for m in c]

    def const(y):
        yc = _components(y)
        if any(is_jet(v) for v in yc):
            K = next(v for v in yc if is_jet(v)).K
            return tuple(TaylorJet.constant(m, K) for m in mats)
        shape = np.shape(np.asarray(yc[0], dtype=float))
        return tuple(np.broadcast_to(m, shape + m.shape).copy() for m in mats)

    return const


def chart_side(chart: Chart, A0: Callable, D: Callable) -> Callable:
    """Callable ``y -> (A0~, A1~, A2~, A3~, D~)`` for one side of a chart."""
    return lambda y: chart_transported_coefficients(chart, y, A0, D)


# ---------------------------------------------------------------------------
# the normaliser
# ---------------------------------------------------------------------------


def g_hat(a1, a2, b3):
    """``b3^(-1/2) [[1, 0, a1], [0, 1, a2], [0, 0, b3]]``."""
    s = _rsqrt(b3)
    zero = 0.0 * s
    return assemble([[s, zero, a1 * s], [zero, s, a2 * s], [zero, zero, b3 * s]])


def g_hat_inverse(a1, a2, b3):
    """Closed-form inverse ``b3^(1/2) [[1, 0, -a1/b3], [0, 1, -a2/b3], [0, 0, 1/b3]]``."""
    r = _sqrt(b3)
    ib = _recip(b3)
    zero = 0.0 * r
    return assemble([[r, zero, -a1 * ib * r], [zero, r, -a2 * ib * r], [zero, zero, ib * r]])


def _rsqrt(b):
    return b.power(-0.5) if is_jet(b) else np.asarray(b, dtype=float) ** -0.5


def _sqrt(b):
    return b.power(0.5) if is_jet(b) else np.sqrt(np.asarray(b, dtype=float))


def _recip(b):
    return b.power(-1.0) if is_jet(b) else 1.0 / np.asarray(b, dtype=float)


def a3_hat(a1, a2, b3):
    """Transported normal block ``-[a x]`` with ``a = (a1, a2, b3)``."""
    zero = 0.0 * b3
    return assemble([[zero, b3, -a2], [-b3, zero, a1], [a2, -a1, zero]])


def _check_b3(b3, tau: float) -> None:
    v = b3.value if is_jet(b3) else np.asarray(b3, dtype=float)
    if np.any(v < tau):
        raise ChartError(f"normal coefficient b3 = {float(np.min(v)):.3g} below tau = {tau}")


def normaliser(chart: Chart, y):
    """``G_r`` and its inverse at points ``y`` (plus block at ``y``, minus
    block at the reflected point)."""
    yc = _components(y)
    jet = next((c for c in yc if is_jet(c)), None)
    lift = (lambda v: v if is_jet(v) else TaylorJet.constant(v, jet.K)) if jet is not None else (lambda v: v)
    ap = [lift(v) for v in chart.grad_phi3(yc)]
    am = [lift(v) for v in chart.grad_phi3(reflect_point(yc))]
    _check_b3(ap[2], chart.tau)
    _check_b3(am[2], chart.tau)
    gp, gm = g_hat(*ap), g_hat(*am)
    ip, im = g_hat_inverse(*ap), g_hat_inverse(*am)
    return block_diag(gp, gp, gm, gm), block_diag(ip, ip, im, im)


def boundary_block(a1, a2, b3):
    """``B_bl,3``: ``G_hat^T A_hat_3`` with its zero row removed."""
    R = g_hat(a1, a2, b3)
    prod = np.swapaxes(R, -1, -2) @ a3_hat(a1, a2, b3)
    return prod[..., :2, :]


def interface_matrix(a1, a2, b3):
    """Assembled 4x12 interface matrix ``B^3`` for a normal field sample."""
    bb = boundary_block(a1, a2, b3)
    z = np.zeros(bb.shape)
    top = np.concatenate([bb, z, -bb, z], axis=-1)
    bot = np.concatenate([z, bb, z, -bb], axis=-1)
    return np.concatenate([top, bot], axis=-2)


def _mT(M):
    return M.T if is_jet(M) else np.swapaxes(M, -1, -2)


def _mm(A, B):
    return A @ B


@dataclass
class NormalisedSystem:
    G: object
    G_inv: object
    A0: object
    A1: object
    A2: object
    A3: object
    D: object
    B_co: ExactMatrix


def interface_normalizer(chart: Chart, reflected: ReflectedSystem, y) -> NormalisedSystem:
    """Apply ``G_r`` to the reflected system at points (or jets) ``y``.

    For Taylor jet input the derivative term of the zero-order coefficient
    is formed by differentiating the closed-form inverse; for plain arrays
    that term needs derivatives and is left out (``D`` then holds only
    ``G^T D G``).
    """
    yc = _components(y)
    G, Gi = normaliser(chart, yc)
    a0, a1, a2, a3, d = reflected.coefficients(yc)
    Gt = _mT(G)
    A = [_mm(Gt, _mm(a, G)) for a in (a0, a1, a2, a3)]
    D = _mm(Gt, _mm(d, G))
    if is_jet(G):
        for j, aj in enumerate((a1, a2, a3)):
            D = D - _mm(_mm(Gt, _mm(aj, G)), _mm(Gi.deriv(j), G))
    return NormalisedSystem(G, Gi, A[0], A[1], A[2], A[3], D, block_symbols().B)


# ---------------------------------------------------------------------------
# identity checks
# ---------------------------------------------------------------------------


def normal_identity_residual(a_plus, a_minus) -> float:
    """``max |G^T A3 G - A3~co|`` for given ``grad phi_3`` samples.

    ``a_plus``, ``a_minus``: arrays ``(..., 3)`` (minus taken at the
    reflected point)."""
    ap = np.asarray(a_plus, dtype=float)
    am = np.asarray(a_minus, dtype=float)
    gp = g_hat(ap[..., 0], ap[..., 1], ap[..., 2])
    gm = g_hat(am[..., 0], am[..., 1], am[..., 2])
    G = block_diag(gp, gp, gm, gm)
    hp = a3_hat(ap[..., 0], ap[..., 1], ap[..., 2])
    hm = a3_hat(am[..., 0], am[..., 1], am[..., 2])
    z = np.zeros(hp.shape)
    A3 = np.concatenate(
        [
            np.concatenate([z, hp, z, z], axis=-1),
            np.concatenate([-hp, z, z, z], axis=-1),
            np.concatenate([z, z, z, -hm], axis=-1),
            np.concatenate([z, z, hm, z], axis=-1),
        ],
        axis=-2,
    )
    lhs = np.swapaxes(G, -1, -2) @ A3 @ G
    return float(np.max(np.abs(lhs - block_symbols().A3_tilde.to_array())))


def boundary_identity_residual(a) -> float:
    """``max |B^3 G_r - B_co|`` on the interface (both blocks share ``a``)."""
    a = np.asarray(a, dtype=float)
    B3 = interface_matrix(a[..., 0], a[..., 1], a[..., 2])
    g = g_hat(a[..., 0], a[..., 1], a[..., 2])
    G = block_diag(g, g, g, g)
    return float(np.max(np.abs(B3 @ G - block_symbols().B.to_array())))


def random_admissible_normal(rng: np.random.Generator, n: int, tau: float = 0.3, spread: float = 2.0) -> NDArray:
    """Samples ``(a1, a2, b3)`` with ``b3 in [tau, tau + spread]``."""
    a = rng.uniform(-spread, spread, size=(n, 3))
    a[:, 2] = rng.uniform(tau, tau + spread, size=n)
    return a


# ---------------------------------------------------------------------------
# jet comparison between the reflected and the normalised system
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TransformReport:
    jet_deviation: tuple[float, ...]
    min_eig_A0: float
    spd_floor: float
    normal_residual: float

    @property
    def passed(self) -> bool:
        return max(self.jet_deviation) <= 1e-9 and self.min_eig_A0 >= self.spd_floor * (1 - 1e-12)


def _time_jets(coeffs, u0, f_jets, pmax: int):
    """``S_p`` (p <= pmax) of a system with time-independent coefficients at
    the expansion point, via Taylor jets in space."""
    a0, a1, a2, a3, d = coeffs
    a0i = a0.inv()
    S = [u0]
    for p in range(1, pmax + 1):
        rhs = f_jets[p - 1] - d @ S[p - 1]
        for j, aj in enumerate((a1, a2, a3)):
            rhs = rhs - aj @ S[p - 1].deriv(j)
        S.append(a0i @ rhs)
    return S


def verify_transforms(
    chart: Chart,
    law_samples: Sequence[NDArray],
    point: Sequence[float] = (0.13, -0.21, 0.37),
    pmax: int = 2,
    seed: int = 0,
) -> TransformReport:
    """Compare initial time derivatives before and after normalisation.

    ``law_samples = (A0_plus, A0_minus, D_plus, D_minus)`` are 6x6 sample
    matrices (for instance ``chi`` and ``sigma`` of a law at fixed states).
    Random polynomial data ``u0`` and ``f`` are expanded at ``point``;
    the transformed jets must equal ``G_r^-1`` times the original ones.
    """
    if point[2] <= 0:
        raise ChartError("expansion point must lie in the open upper half-space")
    K = pmax + 1
    A0p, A0m, Dp, Dm = (np.asarray(m, dtype=float) for m in law_samples)
    refl = reflect_system(
        chart_side(chart, lambda x: _const_like(A0p, x), lambda x: _const_like(Dp, x)),
        chart_side(chart, lambda x: _const_like(A0m, x), lambda x: _const_like(Dm, x)),
    )
    y = TaylorJet.variables(point, K)
    rng = np.random.default_rng(seed)
    u0 = _random_poly(rng, y, K, 12)
    f = [_random_poly(rng, y, K, 12) for _ in range(pmax)]

    orig = _time_jets(refl.coefficients(y), u0, f, pmax)
    ns = interface_normalizer(chart, refl, y)
    Gt = ns.G.T
    trans = _time_jets(
        (ns.A0, ns.A1, ns.A2, ns.A3, ns.D), ns.G_inv @ u0, [Gt @ fp for fp in f], pmax
    )
    dev = tuple(
        float(np.max(np.abs(t.value - ns.G_inv.value @ o.value))) for o, t in zip(orig, trans)
    )
    a0t = ns.A0.value
    lam = float(np.linalg.eigvalsh(0.5 * (a0t + a0t.T))[0])
    eta = float(np.linalg.eigvalsh(refl.coefficients(y)[0].value)[0])
    gtg = float(np.linalg.eigvalsh(ns.G.value.T @ ns.G.value)[0])
    a3_res = float(np.max(np.abs(ns.A3.value - block_symbols().A3_tilde.to_array())))
    return TransformReport(dev, lam, eta * gtg, a3_res)


def _const_like(M: NDArray, x):
    if any(is_jet(v) for v in x):
        return TaylorJet.constant(M, next(v for v in x if is_jet(v)).K)
    return np.broadcast_to(M, np.shape(x[0]) + M.shape)


def _random_poly(rng: np.random.Generator, y: Sequence[TaylorJet], K: int, n: int) -> TaylorJet:
    """Random vector polynomial of degree ``K`` in the coordinate jets."""
    out = TaylorJet.constant(rng.normal(size=n), K)
    terms = [TaylorJet.constant(1.0, K)]
    for _ in range(K):
        terms = [t * yi for t in terms for yi in y]
        for t in terms:
            out = out + t * TaylorJet.constant(rng.normal(size=n) * 0.5, K)
    return out
