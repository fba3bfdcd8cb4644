"""Initial data, source and surface-current presets for scenario files.

Every preset is a small object with ``__call__`` (field values) and, where
the compatibility check needs it, ``time_jet`` (plain time derivatives at
``t0``). Bumps are the polynomials ``(1 - r^2)^k`` on ``|r| < 1``: compactly
supported and ``C^(k-1)``, with exact derivatives.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from numpy.polynomial import Polynomial
from numpy.typing import NDArray

from .grid_solver import Grid
from .material_laws import MaterialLaw

BUMP_POWER = 8


class PresetError(ValueError):
    pass


def bump(r: NDArray, k: int = BUMP_POWER) -> NDArray:
    r = np.asarray(r, dtype=float)
    return np.where(np.abs(r) < 1.0, np.clip(1.0 - r * r, 0.0, None) ** k, 0.0)


def bump_derivative(r: NDArray, p: int, k: int = BUMP_POWER) -> NDArray:
    """``d^p/dr^p`` of :func:`bump`."""
    poly = Polynomial([1.0, 0.0, -1.0]) ** k
    r = np.asarray(r, dtype=float)
    return np.where(np.abs(r) < 1.0, poly.deriv(p)(r) if p else poly(r), 0.0)


def _zeros(x: NDArray) -> NDArray:
    return np.zeros(np.shape(x)[:-1] + (6,))


def _require_x2_periodic(grid: Grid, name: str) -> None:
    if not grid.periodic[1]:
        raise PresetError(f"{name} is x2-invariant and needs a periodic x2 axis")


def _linear_params(laws: dict[str, MaterialLaw], tag: str) -> Optional[tuple[float, float]]:
    law = laws[tag]
    if law.name != "linear_isotropic":
        return None
    eps, mu = law.param("eps"), law.param("mu")
    if callable(eps) or callable(mu) or law.param("sigma0", 0.0) != 0.0:
        return None
    return float(eps), float(mu)


# ---------------------------------------------------------------------------
# initial data
# ---------------------------------------------------------------------------


@dataclass
class InitialData:
    name: str
    u0: Callable[[NDArray, str], NDArray]
    exact: Optional[Callable[[float, NDArray, str], NDArray]] = None
    reference: dict = field(default_factory=dict)

    def __call__(self, x: NDArray, tag: str) -> NDArray:
        return self.u0(x, tag)


def zero_data(grid: Grid, laws, **_) -> InitialData:
    return InitialData("zero", lambda x, tag: _zeros(x), lambda t, x, tag: _zeros(x))


def pec_standing_wave(grid: Grid, laws, amplitude: float = 1.0, k1: int = 1, k3: int = 1, **_) -> InitialData:
    """x2-invariant cavity mode ``E2 = A sin(k1 pi x1/L1) sin(k3 pi x3/L3) cos(w t)``.

    Exact whenever both regions carry the same constant linear law.
    """
    _require_x2_periodic(grid, "pec_standing_wave")
    L1, _, L3 = grid.L
    a, c = k1 * np.pi / L1, k3 * np.pi / L3
    pm, pp = _linear_params(laws, "-"), _linear_params(laws, "+")
    eps, mu = pm if pm is not None else (1.0, 1.0)
    w = np.sqrt(a * a + c * c) / np.sqrt(eps * mu)

    def exact(t: float, x: NDArray, tag: str) -> NDArray:
        u = _zeros(x)
        s1, c1 = np.sin(a * x[..., 0]), np.cos(a * x[..., 0])
        s3, c3 = np.sin(c * x[..., 2]), np.cos(c * x[..., 2])
        u[..., 1] = amplitude * s1 * s3 * np.cos(w * t)
        u[..., 3] = amplitude * c * s1 * c3 * np.sin(w * t) / (mu * w)
        u[..., 5] = -amplitude * a * c1 * s3 * np.sin(w * t) / (mu * w)
        return u

    ok = pm is not None and pm == pp
    return InitialData(
        "pec_standing_wave",
        lambda x, tag: exact(0.0, x, tag),
        exact if ok else None,
        {"omega": float(w), "period": float(2 * np.pi / w)},
    )


def two_dielectric_planewave(
    grid: Grid, laws, amplitude: float = 1.0, center: float = 0.5, width: float = 0.08, **_
) -> InitialData:
    """Gaussian ``(E1, H2)`` pulse travelling in +x3 from the minus region.

    While the pulse stays clear of the outer walls the exact solution is the
    incident pulse plus Fresnel-scaled reflected and transmitted copies.
    """
    _require_x2_periodic(grid, "two_dielectric_planewave")
    pm, pp = _linear_params(laws, "-"), _linear_params(laws, "+")
    if pm is None or pp is None:
        raise PresetError("two_dielectric_planewave needs constant lossless linear laws in both regions")
    (e1, m1), (e2, m2) = pm, pp
    c1, c2 = 1.0 / np.sqrt(e1 * m1), 1.0 / np.sqrt(e2 * m2)
    z1, z2 = np.sqrt(m1 / e1), np.sqrt(m2 / e2)
    r, tc = (z2 - z1) / (z2 + z1), 2.0 * z2 / (z1 + z2)
    s = grid.s

    def prof(xi):
        return amplitude * np.exp(-((xi - center) ** 2) / (2.0 * width**2))

    def exact(t: float, x: NDArray, tag: str) -> NDArray:
        u = _zeros(x)
        x3 = x[..., 2]
        if tag == "-":
            inc, ref = prof(x3 - c1 * t), r * prof(2.0 * s - x3 - c1 * t)
            u[..., 0] = inc + ref
            u[..., 4] = (inc - ref) / z1
        else:
            tr = tc * prof(s + (x3 - s) * c1 / c2 - c1 * t)
            u[..., 0] = tr
            u[..., 4] = tr / z2
        return u

    return InitialData(
        "two_dielectric_planewave",
        lambda x, tag: exact(0.0, x, tag),
        exact,
        {"reflection": float(r), "transmission": float(tc), "c_minus": float(c1), "c_plus": float(c2)},
    )


def compact_pulse(
    grid: Grid,
    laws,
    amplitude: float = 0.3,
    center: float = 0.25,
    width: float = 0.2,
    k1: int = 1,
    te: float = 1.0,
    tm: float = 1.0,
    region: str = "-",
    **_,
) -> InitialData:
    """x2-invariant TE (``E2``) plus TM (``H2``) bump supported inside one region.

    The bump profile in x3 vanishes to high order before reaching the
    interface and the walls, so the data satisfy the compatibility
    conditions of every order the bump smoothness allows. Along x1 the
    profile is periodic (``cos``/``sin`` of ``2 pi k1 x1/L1``) or matched to
    the conductor walls (``sin`` for ``E2``, ``cos`` for ``H2``).
    """
    _require_x2_periodic(grid, "compact_pulse")
    L1 = grid.L[0]
    lo, hi = (0.0, grid.s) if region == "-" else (grid.s, grid.L[2])
    if not (lo < center - width and center + width < hi):
        raise PresetError("compact_pulse support must lie strictly inside its region")
    if grid.periodic[0]:
        kk = 2.0 * np.pi * k1 / L1
        fe, fh = np.cos, np.sin
    else:
        kk = np.pi * k1 / L1
        fe, fh = np.sin, np.cos

    def u0(x: NDArray, tag: str) -> NDArray:
        u = _zeros(x)
        if tag != region:
            return u
        b = amplitude * bump((x[..., 2] - center) / width)
        u[..., 1] = te * b * fe(kk * x[..., 0])
        u[..., 4] = tm * b * fh(kk * x[..., 0])
        return u

    return InitialData("compact_pulse", u0)


def kerr_pulse(grid: Grid, laws, **params) -> InitialData:
    """:func:`compact_pulse` with amplitude defaults suited to Kerr media."""
    params.setdefault("amplitude", 0.5)
    d = compact_pulse(grid, laws, **params)
    d.name = "kerr_pulse"
    return d


INITIAL_PRESETS: dict[str, Callable[..., InitialData]] = {
    "zero": zero_data,
    "pec_standing_wave": pec_standing_wave,
    "two_dielectric_planewave": two_dielectric_planewave,
    "compact_pulse": compact_pulse,
    "kerr_pulse": kerr_pulse,
}


# ---------------------------------------------------------------------------
# volume sources f = (-J, 0)
# ---------------------------------------------------------------------------


@dataclass
class SourceField:
    name: str
    fn: Callable[[float, NDArray, str], NDArray]
    jet: Callable[[float, NDArray, str, int], list]

    def __call__(self, t: float, x: NDArray, tag: str) -> NDArray:
        return self.fn(t, x, tag)

    def time_jet(self, t0: float, x: NDArray, tag: str, m: int) -> list:
        return self.jet(t0, x, tag, m)


_SMOOTHSTEP = Polynomial([0.0, 0.0, 0.0, 10.0, -15.0, 6.0])


def smoothstep_derivative(t: float, ramp: float, p: int) -> float:
    """``d^p/dt^p`` of the C^2 switch-on profile rising from 0 to 1 over ``[0, ramp]``."""
    if ramp <= 0:
        return 1.0 if p == 0 else 0.0
    if t <= 0:
        return 0.0
    if t >= ramp:
        return 1.0 if p == 0 else 0.0
    poly = _SMOOTHSTEP.deriv(p) if p else _SMOOTHSTEP
    return float(poly(t / ramp)) / ramp**p


def localized_pump(
    grid: Grid,
    amplitude: float = 1.0,
    center=(0.5, 0.5, 0.25),
    width: float = 0.2,
    component: int = 1,
    ramp: float = 0.0,
    **_,
) -> SourceField:
    """Radial bump driving one field component, switched on smoothly over ``ramp``.

    After the ramp the source is constant in time.
    """
    c = np.asarray(center, dtype=float)
    if not 0 <= int(component) < 6:
        raise PresetError("pump component must be 0..5")

    def shape(x: NDArray) -> NDArray:
        f = _zeros(x)
        r = np.linalg.norm(x - c, axis=-1) / width
        f[..., int(component)] = amplitude * bump(r)
        return f

    def fn(t: float, x: NDArray, tag: str) -> NDArray:
        return smoothstep_derivative(t, ramp, 0) * shape(x)

    def jet(t0, x, tag, m):
        base = shape(x)
        return [smoothstep_derivative(t0, ramp, p) * base for p in range(max(m, 1))]

    return SourceField("localized_pump", fn, jet)


def linear_current(grid: Grid, amplitude: float = 1.0, **_) -> SourceField:
    """``J = (a x1, 0, 0)``: ``div J = a`` so ``rho(t) = rho0 - a t``."""

    def fn(t: float, x: NDArray, tag: str) -> NDArray:
        f = _zeros(x)
        f[..., 0] = -amplitude * x[..., 0]
        return f

    def jet(t0, x, tag, m):
        return [fn(t0, x, tag)] + [_zeros(x) for _ in range(max(m, 1) - 1)]

    return SourceField("linear_current", fn, jet)


SOURCE_PRESETS: dict[str, Callable[..., SourceField]] = {
    "localized_pump": localized_pump,
    "linear_current": linear_current,
}


# ---------------------------------------------------------------------------
# surface currents on the interface
# ---------------------------------------------------------------------------


@dataclass
class SurfaceField:
    name: str
    fn: Callable[[float, NDArray], NDArray]
    jet: Callable[[float, NDArray, int], list]

    def __call__(self, t: float, xf: NDArray) -> NDArray:
        return self.fn(t, xf)

    def time_jet(self, t0: float, xf: NDArray, m: int) -> list:
        return self.jet(t0, xf, m)


def ramped_cosine(
    grid: Grid, amplitude: float = 1.0, t_center: float = 0.3, t_width: float = 0.2, k1: int = 1, **_
) -> SurfaceField:
    """``J_Sigma = (a(t) cos(2 pi k1 x1 / L1), 0, 0)`` with a bump-shaped ``a``.

    ``a`` vanishes identically near ``t = 0`` when ``t_center > t_width``,
    which keeps zero-current initial data compatible at every order.
    """
    kk = (2.0 if grid.periodic[0] else 1.0) * np.pi * k1 / grid.L[0]

    def fn(t: float, xf: NDArray) -> NDArray:
        J = np.zeros(np.shape(xf))
        J[..., 0] = amplitude * bump((t - t_center) / t_width) * np.cos(kk * xf[..., 0])
        return J

    def jet(t0, xf, m):
        out = []
        for p in range(max(m, 1)):
            J = np.zeros(np.shape(xf))
            a = amplitude * bump_derivative((t0 - t_center) / t_width, p) / t_width**p
            J[..., 0] = a * np.cos(kk * xf[..., 0])
            out.append(J)
        return out

    return SurfaceField("ramped_cosine", fn, jet)


SURFACE_PRESETS: dict[str, Callable[..., SurfaceField]] = {"ramped_cosine": ramped_cosine}
