"""Randomised and exact identity suites behind ``mxil verify``."""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import compatibility as cp
from . import halfspace_transform as ht
from . import maxwell_algebra as ma
from .material_laws import kerr_law


@dataclass(frozen=True)
class SuiteRow:
    name: str
    residual: float
    tol: float
    seconds: float

    @property
    def passed(self) -> bool:
        return bool(self.residual <= self.tol)

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"{mark}  {self.name:<34} residual={self.residual:.3e}  tol={self.tol:.1e}  ({self.seconds:.2f}s)"


def _timed(name: str, tol: float, fn: Callable[[], float]) -> SuiteRow:
    t0 = time.perf_counter()
    r = float(fn())
    return SuiteRow(name, r, tol, time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# random sample generators
# ---------------------------------------------------------------------------


def random_spd(rng: np.random.Generator, n: int, lo: float = 0.1, hi: float = 10.0) -> np.ndarray:
    q, _ = np.linalg.qr(rng.normal(size=(n, n)))
    lam = np.exp(rng.uniform(np.log(lo), np.log(hi), size=n))
    lam[0], lam[-1] = lo, hi
    return (q * lam) @ q.T


def random_mu(rng: np.random.Generator) -> np.ndarray:
    mu = rng.uniform(-2.0, 2.0, size=(3, 3))
    mu[0, 2] = mu[1, 2] = 0.0
    mu[2, 2] = 1.0
    return mu


def random_hessian(rng: np.random.Generator) -> np.ndarray:
    """Second derivatives of a random quadratic 12-vector field."""
    h = rng.normal(size=(12, 3, 3))
    return 0.5 * (h + np.swapaxes(h, -1, -2))


def random_graph_chart(rng: np.random.Generator, tau: float = 0.3) -> ht.Chart:
    """Random curved chart, admissible with ``d_3 phi_3 >= tau`` for ``|x1| <= 1``."""
    stretch = float(rng.uniform(-0.3, 0.3))
    return ht.graph_chart(
        scale=float(rng.uniform(tau / (1.0 - abs(stretch)), 3.0)),
        lin=tuple(rng.uniform(-1.5, 1.5, size=2)),
        quad=tuple(rng.uniform(-0.7, 0.7, size=3)),
        tau=tau,
        stretch=stretch,
    )


# ---------------------------------------------------------------------------
# individual checks
# ---------------------------------------------------------------------------


def algebra_exact() -> list[SuiteRow]:
    t0 = time.perf_counter()
    rep = ma.structural_identity_report()
    dt = time.perf_counter() - t0
    return [SuiteRow(f"exact {c.name}", float(c.residual), 0.0, dt / len(rep.checks)) for c in rep.checks]


def cancellation(trials: int = 1000, seed: int = 1) -> float:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        r = ma.cancellation_residual(random_mu(rng), random_hessian(rng))
        worst = max(worst, float(np.max(np.abs(r))))
    return worst


def chart_identities(charts: int = 100, points: int = 8, tau: float = 0.3, seed: int = 2) -> tuple[float, float]:
    """Max residuals of the A3 and boundary identities on random graph charts.

    ``grad phi_3`` is taken at a random point of the upper half-space (plus
    side) and at the preimage of its reflection (minus side).
    """
    rng = np.random.default_rng(seed)
    worst_a, worst_b = 0.0, 0.0
    for _ in range(charts):
        ch = random_graph_chart(rng, tau)
        y = rng.uniform(-1.0, 1.0, size=(points, 3))
        y[:, 2] = np.abs(y[:, 2]) + 1e-3
        comps = [y[:, i] for i in range(3)]
        ap = np.stack(np.broadcast_arrays(*ch.grad_phi3(comps)), axis=-1)
        am = np.stack(np.broadcast_arrays(*ch.grad_phi3(ht.reflect_point(comps))), axis=-1)
        worst_a = max(worst_a, ht.normal_identity_residual(ap, am))
        y0 = [y[:, 0], y[:, 1], np.zeros(points)]
        a0 = np.stack(np.broadcast_arrays(*ch.grad_phi3(y0)), axis=-1)
        worst_b = max(worst_b, ht.boundary_identity_residual(a0))
    return worst_a, worst_b


def transported_jets(charts: int = 5, seed: int = 3) -> float:
    """Largest jet deviation of the normalised system on curved charts with Kerr data."""
    rng = np.random.default_rng(seed)
    law_p, law_m = kerr_law(0.3, "+", sigma0=0.2), kerr_law(0.1, "-", sigma0=0.5)
    worst = 0.0
    for _ in range(charts):
        ch = random_graph_chart(rng, 0.5)
        E = rng.uniform(-0.5, 0.5, size=(2, 3))
        samp = (
            law_p.chi(None, E[0], np.zeros(3)),
            law_m.chi(None, E[1], np.zeros(3)),
            law_p.sigma(None, E[0], np.zeros(3)),
            law_m.sigma(None, E[1], np.zeros(3)),
        )
        rep = ht.verify_transforms(ch, samp, point=tuple(rng.uniform(0.1, 0.4, size=3)), pmax=2, seed=int(rng.integers(1 << 30)))
        worst = max(worst, max(rep.jet_deviation))
    return worst


def normal_recovery(samples: int = 100, seed: int = 4) -> float:
    """Relative error of ``d3 u`` recovered from ``mu_breve d3 u``."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        a0 = random_spd(rng, 12)
        mu = random_mu(rng)
        d = rng.normal(size=12)
        rs = ma.assemble_recovery(a0, mu)
        got = ma.normal_derivative_recovery(a0, rs.mu_breve @ d, mu)
        worst = max(worst, float(np.linalg.norm(got - d) / np.linalg.norm(d)))
    return worst


def correction(samples: int = 100, pmax: int = 3, seed: int = 5) -> float:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        a0 = random_spd(rng, 12)
        v0 = rng.normal(size=12)
        for p in range(pmax + 1):
            res = cp.correct_initial_data(a0, v0, p)
            worst = max(worst, cp.correction_identity_residual(a0, v0, res.v, p))
    return worst


def linear_nonlinear_consistency(n: int = 32, m: int = 3, seed: int = 6) -> float:
    """Deviation of the frozen-coefficient linear recursion from the nonlinear one."""
    rng = np.random.default_rng(seed)
    grid = cp.InterfaceGrid.box((1.0, 1.0, 1.0), (n, n, n), 0.5)
    laws = {"+": kerr_law(0.4, "+", sigma0=0.3, sigma2=0.2), "-": kerr_law(0.2, "-", sigma0=0.1)}
    coef = rng.uniform(-0.3, 0.3, size=(2, 6, 4))
    u0 = {}
    for k, tag in enumerate(("+", "-")):
        x = grid.region(tag).points()
        ph = np.stack([np.sin(1.0 + x @ np.array([1.0, 2.0, 0.5])), np.cos(x[..., 0]), x[..., 1], x[..., 2] ** 2], axis=-1)
        u0[tag] = ph @ coef[k].T
    f = {tag: [0.1 * np.cos(p + u0[tag]) for p in range(m)] for tag in ("+", "-")}
    frozen = cp.time_derivatives_nonlinear(laws, 0.0, f, u0, grid, m)
    return cp.consistency_check(laws, 0.0, f, u0, frozen, grid)


# ---------------------------------------------------------------------------
# selectors
# ---------------------------------------------------------------------------


def run_suite(selector: str) -> list[SuiteRow]:
    if selector not in ("algebra", "transforms", "compat", "all"):
        raise ValueError(f"unknown selector {selector!r}; choose algebra, transforms, compat or all")
    rows: list[SuiteRow] = []
    if selector in ("algebra", "all"):
        rows += algebra_exact()
        rows.append(_timed("cancellation (1000 trials)", 1e-12, cancellation))
        rows.append(_timed("normal recovery (100 SPD)", 1e-10, normal_recovery))
    if selector in ("transforms", "all"):
        t0 = time.perf_counter()
        a, b = chart_identities()
        dt = time.perf_counter() - t0
        rows.append(SuiteRow("G^T A3 G = A3~co (100 charts)", a, 1e-12, dt))
        rows.append(SuiteRow("B3 G = Bco (100 charts)", b, 1e-12, dt))
        rows.append(_timed("normalised time jets (Kerr)", 1e-9, transported_jets))
    if selector in ("compat", "all"):
        rows.append(_timed("linear/nonlinear consistency m=3", 1e-9, linear_nonlinear_consistency))
        rows.append(_timed("initial-data correction p<=3", 1e-10, correction))
    return rows
