"""Instantaneous material laws ``(D, B) = theta(x, E, H)``.

A law bundles ``theta``, its state Jacobian ``chi`` (6x6, symmetric
positive definite on the admissible set), the conductivity ``sigma`` with
block form ``diag(sigma_e, 0)`` and the admissible set itself, which is
either the whole state space or an open ball ``|E| < radius``.

Units are normalised (vacuum permittivity, permeability and light speed
equal one). All evaluators broadcast over leading axes: ``E`` and ``H``
have shape ``(..., 3)``, matrices come back as ``(..., 6, 6)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from numpy.typing import ArrayLike, NDArray

from . import jets

Field = Callable[..., NDArray]

#: fraction of the exact hyperbolicity ball kept for negative Kerr coefficients
KERR_BALL_SHRINK = 0.99


class DomainViolation(ValueError):
    """State left the admissible set; carries the signed distance."""

    def __init__(self, message: str, distance: float):
        super().__init__(message)
        self.distance = distance


@dataclass(frozen=True)
class MaterialLaw:
    name: str
    region: str
    theta: Field
    chi: Field
    sigma: Field
    radius: Optional[float] = None  # None: every state admissible
    chi_jet: Optional[Field] = None
    sigma_jet: Optional[Field] = None
    params: tuple = ()

    def __post_init__(self) -> None:
        if self.region not in ("+", "-"):
            raise ValueError(f"region tag must be '+' or '-', got {self.region!r}")

    def distance(self, E: ArrayLike) -> NDArray:
        """Distance of each state to the boundary of the admissible set."""
        e = np.linalg.norm(np.asarray(E, dtype=float), axis=-1)
        if self.radius is None:
            return np.full(e.shape, np.inf)
        return self.radius - e

    def check_domain(self, E: ArrayLike) -> None:
        d = self.distance(E)
        dmin = float(np.min(d)) if np.size(d) else np.inf
        if dmin <= 0.0:
            raise DomainViolation(
                f"state outside the admissible set of law {self.name!r} "
                f"(distance {dmin:.3e})", dmin
            )

    def param(self, key: str, default=None):
        return dict(self.params).get(key, default)


def _scalar(value, x: Optional[NDArray]) -> NDArray | float:
    if callable(value):
        if x is None:
            raise ValueError("position-dependent parameter needs sample positions")
        return np.asarray(value(np.asarray(x, dtype=float)), dtype=float)
    return float(value)


def _block(e_block: NDArray, h_block: NDArray) -> NDArray:
    lead = np.broadcast_shapes(e_block.shape[:-2], h_block.shape[:-2])
    out = np.zeros(lead + (6, 6))
    out[..., :3, :3] = e_block
    out[..., 3:, 3:] = h_block
    return out


# ---------------------------------------------------------------------------
# Kerr law with polynomial conductivity
# ---------------------------------------------------------------------------


def kerr_law(
    vartheta=0.0,
    region: str = "+",
    sigma0=0.0,
    sigma2=0.0,
) -> MaterialLaw:
    """``D = E + vartheta |E|^2 E``, ``B = H``, ``sigma_e = (sigma0 + sigma2 |E|^2) I``.

    For negative ``vartheta`` the admissible set is the ball
    ``|E| < 0.99 (-3 vartheta)^(-1/2)``, on which ``chi >= 1 - 0.99^2``.
    A position-dependent ``vartheta`` must be non-negative to stay global.
    """
    radius = None
    if not callable(vartheta) and vartheta < 0:
        radius = KERR_BALL_SHRINK / np.sqrt(-3.0 * vartheta)

    def theta(x, E, H):
        E = np.asarray(E, dtype=float)
        t = np.asarray(_scalar(vartheta, x))[..., None]
        return E + t * np.sum(E * E, axis=-1, keepdims=True) * E, np.asarray(H, dtype=float).copy()

    def chi(x, E, H):
        E = np.asarray(E, dtype=float)
        t = np.asarray(_scalar(vartheta, x))[..., None, None]
        e2 = np.sum(E * E, axis=-1)[..., None, None]
        eye = np.eye(3)
        e_block = (1.0 + t * e2) * eye + 2.0 * t * E[..., :, None] * E[..., None, :]
        return _block(e_block, np.broadcast_to(eye, e_block.shape))

    def sigma(x, E, H):
        E = np.asarray(E, dtype=float)
        s0 = np.asarray(_scalar(sigma0, x))[..., None, None]
        s2 = np.asarray(_scalar(sigma2, x))[..., None, None]
        e2 = np.sum(E * E, axis=-1)[..., None, None]
        e_block = (s0 + s2 * e2) * np.eye(3)
        return _block(e_block, np.zeros(e_block.shape))

    def chi_jet(x, u_jet):
        E = u_jet[..., :3]
        K = u_jet.shape[0]
        t = np.asarray(_scalar(vartheta, x))[..., None, None]
        e2 = jets.sq_norm(E)[..., None, None]
        eye = np.eye(3)
        e_block = t * e2 * eye + 2.0 * t * jets.outer(E)
        e_block[0] += eye
        h_block = np.zeros(e_block.shape)
        h_block[0] = eye
        assert e_block.shape[0] == K
        return _block(e_block, h_block)

    def sigma_jet(x, u_jet):
        E = u_jet[..., :3]
        s0 = np.asarray(_scalar(sigma0, x))[..., None, None]
        s2 = np.asarray(_scalar(sigma2, x))[..., None, None]
        e_block = s2 * jets.sq_norm(E)[..., None, None] * np.eye(3)
        e_block[0] = e_block[0] + s0 * np.eye(3)
        return _block(e_block, np.zeros(e_block.shape))

    return MaterialLaw(
        "kerr", region, theta, chi, sigma, radius, chi_jet, sigma_jet,
        params=(("vartheta", vartheta), ("sigma0", sigma0), ("sigma2", sigma2)),
    )


# ---------------------------------------------------------------------------
# linear isotropic law
# ---------------------------------------------------------------------------


def linear_isotropic(eps=1.0, region: str = "+", mu=1.0, sigma0=0.0) -> MaterialLaw:
    """``D = eps E``, ``B = mu H``, ``sigma_e = sigma0 I``."""
    for name, v in (("eps", eps), ("mu", mu)):
        if not callable(v) and v <= 0:
            raise ValueError(f"{name} must be positive, got {v!r}")

    def theta(x, E, H):
        e = np.asarray(_scalar(eps, x))[..., None]
        m = np.asarray(_scalar(mu, x))[..., None]
        return e * np.asarray(E, dtype=float), m * np.asarray(H, dtype=float)

    def chi(x, E, H):
        E = np.asarray(E, dtype=float)
        e = np.asarray(_scalar(eps, x))[..., None, None]
        m = np.asarray(_scalar(mu, x))[..., None, None]
        shape = E.shape[:-1] + (3, 3)
        return _block(np.broadcast_to(e * np.eye(3), shape), np.broadcast_to(m * np.eye(3), shape))

    def sigma(x, E, H):
        E = np.asarray(E, dtype=float)
        s = np.asarray(_scalar(sigma0, x))[..., None, None]
        shape = E.shape[:-1] + (3, 3)
        return _block(np.broadcast_to(s * np.eye(3), shape), np.zeros(shape))

    def chi_jet(x, u_jet):
        return jets.constant(chi(x, u_jet[0, ..., :3], u_jet[0, ..., 3:]), u_jet.shape[0])

    def sigma_jet(x, u_jet):
        return jets.constant(sigma(x, u_jet[0, ..., :3], u_jet[0, ..., 3:]), u_jet.shape[0])

    return MaterialLaw(
        "linear_isotropic", region, theta, chi, sigma, None, chi_jet, sigma_jet,
        params=(("eps", eps), ("mu", mu), ("sigma0", sigma0)),
    )


LAWS: dict[str, Callable[..., MaterialLaw]] = {
    "kerr": kerr_law,
    "linear_isotropic": linear_isotropic,
}


def make_law(name: str, region: str = "+", **params) -> MaterialLaw:
    if name not in LAWS:
        raise KeyError(f"unknown law {name!r}; registered laws: {', '.join(sorted(LAWS))}")
    return LAWS[name](region=region, **params)


# ---------------------------------------------------------------------------
# evaluation front-ends
# ---------------------------------------------------------------------------


def evaluate_theta(law: MaterialLaw, x, E, H) -> tuple[NDArray, NDArray]:
    law.check_domain(E)
    return law.theta(x, E, H)


def jacobian_chi(law: MaterialLaw, x, E, H) -> NDArray:
    law.check_domain(E)
    return law.chi(x, E, H)


def conductivity_matrix(law: MaterialLaw, x, E, H) -> NDArray:
    return law.sigma(x, E, H)


@dataclass(frozen=True)
class LawReport:
    min_eigenvalue: float
    symmetry_defect: float
    eta: float

    @property
    def spd_ok(self) -> bool:
        return self.min_eigenvalue >= self.eta

    @property
    def symmetric_ok(self) -> bool:
        return self.symmetry_defect <= 1e-12

    @property
    def passed(self) -> bool:
        return self.spd_ok and self.symmetric_ok


def validate_law(law: MaterialLaw, sample_states: ArrayLike, eta: float = 1e-8, x=None) -> LawReport:
    """Smallest eigenvalue and symmetry defect of ``chi`` over sample states.

    ``sample_states`` has shape ``(n, 6)``.
    """
    u = np.asarray(sample_states, dtype=float)
    c = law.chi(x, u[..., :3], u[..., 3:])
    defect = float(np.max(np.abs(c - np.swapaxes(c, -1, -2)), initial=0.0))
    lam = np.linalg.eigvalsh(0.5 * (c + np.swapaxes(c, -1, -2)))
    return LawReport(float(np.min(lam[..., 0])), defect, eta)
