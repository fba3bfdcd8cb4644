"""Constant symbols of the first-order Maxwell system and their identities.

Every constant matrix here is built in exact rational arithmetic
(:class:`ExactMatrix`, backed by :class:`fractions.Fraction`). Matrices that
depend on data (the tangential coefficients ``mu`` or a sample of the
coefficient ``A0``) are ordinary float arrays, optionally batched over
leading axes so that a whole grid can be processed in one call.

Index conventions: Python indices are zero based. The state of the twelve
component half-space system is ``(E_+, H_+, E_-, H_-)``; the "normal
components" are therefore the entries ``2, 5, 8, 11``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

#: zero-based positions of the x3 components in a 12-vector
NORMAL_IDX = (2, 5, 8, 11)


class AlgebraError(ValueError):
    """Raised for invalid inputs to the symbol constructors."""


class SingularMaterialError(AlgebraError):
    """Raised when the normal 4x4 block of a coefficient sample is not SPD."""


# ---------------------------------------------------------------------------
# exact matrices
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExactMatrix:
    """Dense matrix with exact rational entries and fixed shape."""

    rows: int
    cols: int
    entries: tuple[tuple[Fraction, ...], ...] = field(repr=False)

    def __post_init__(self) -> None:
        if self.rows <= 0 or self.cols <= 0:
            raise AlgebraError("matrix dimensions must be positive")
        if len(self.entries) != self.rows or any(len(r) != self.cols for r in self.entries):
            raise AlgebraError("entries do not match the declared shape")

    # construction -----------------------------------------------------
    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int | Fraction]]) -> "ExactMatrix":
        ent = tuple(tuple(Fraction(x) for x in r) for r in rows)
        return cls(len(ent), len(ent[0]) if ent else 0, ent)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "ExactMatrix":
        return cls.from_rows([[0] * cols for _ in range(rows)])

    @classmethod
    def identity(cls, n: int) -> "ExactMatrix":
        return cls.from_rows([[int(i == j) for j in range(n)] for i in range(n)])

    @classmethod
    def block(cls, blocks: Sequence[Sequence["ExactMatrix"]]) -> "ExactMatrix":
        out: list[list[Fraction]] = []
        for brow in blocks:
            height = brow[0].rows
            if any(b.rows != height for b in brow):
                raise AlgebraError("block row heights differ")
            for i in range(height):
                out.append([x for b in brow for x in b.entries[i]])
        return cls.from_rows(out)

    @classmethod
    def block_diag(cls, *mats: "ExactMatrix") -> "ExactMatrix":
        grid = [
            [m if i == j else cls.zeros(m.rows, other.cols) for j, other in enumerate(mats)]
            for i, m in enumerate(mats)
        ]
        return cls.block(grid)

    # arithmetic -------------------------------------------------------
    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def __getitem__(self, idx: tuple[int, int]) -> Fraction:
        i, j = idx
        return self.entries[i][j]

    @property
    def T(self) -> "ExactMatrix":
        return ExactMatrix.from_rows([list(c) for c in zip(*self.entries)])

    def __neg__(self) -> "ExactMatrix":
        return ExactMatrix.from_rows([[-x for x in r] for r in self.entries])

    def __add__(self, other: "ExactMatrix") -> "ExactMatrix":
        self._same_shape(other)
        return ExactMatrix.from_rows(
            [[a + b for a, b in zip(r, s)] for r, s in zip(self.entries, other.entries)]
        )

    def __sub__(self, other: "ExactMatrix") -> "ExactMatrix":
        return self + (-other)

    def scale(self, c: int | Fraction) -> "ExactMatrix":
        c = Fraction(c)
        return ExactMatrix.from_rows([[c * x for x in r] for r in self.entries])

    def __matmul__(self, other: "ExactMatrix") -> "ExactMatrix":
        if self.cols != other.rows:
            raise AlgebraError(f"shape mismatch {self.shape} @ {other.shape}")
        cols = list(zip(*other.entries))
        return ExactMatrix.from_rows(
            [[sum((a * b for a, b in zip(r, c)), Fraction(0)) for c in cols] for r in self.entries]
        )

    def __eq__(self, other: object) -> bool:
        return isinstance(other, ExactMatrix) and self.entries == other.entries

    def __hash__(self) -> int:
        return hash(self.entries)

    def _same_shape(self, other: "ExactMatrix") -> None:
        if self.shape != other.shape:
            raise AlgebraError(f"shape mismatch {self.shape} vs {other.shape}")

    # queries ----------------------------------------------------------
    def max_abs(self) -> Fraction:
        return max(abs(x) for r in self.entries for x in r)

    def select_rows(self, idx: Iterable[int]) -> "ExactMatrix":
        return ExactMatrix.from_rows([self.entries[i] for i in idx])

    def rank(self) -> int:
        """Rank by fraction-exact Gaussian elimination."""
        m = [list(r) for r in self.entries]
        rank, col = 0, 0
        while rank < self.rows and col < self.cols:
            piv = next((i for i in range(rank, self.rows) if m[i][col] != 0), None)
            if piv is None:
                col += 1
                continue
            m[rank], m[piv] = m[piv], m[rank]
            for i in range(self.rows):
                if i != rank and m[i][col] != 0:
                    q = m[i][col] / m[rank][col]
                    m[i] = [a - q * b for a, b in zip(m[i], m[rank])]
            rank += 1
            col += 1
        return rank

    def is_antisymmetric(self) -> bool:
        return self.rows == self.cols and self.T == -self

    def to_array(self) -> NDArray[np.float64]:
        return np.array([[float(x) for x in r] for r in self.entries])


# ---------------------------------------------------------------------------
# constant symbols
# ---------------------------------------------------------------------------


def levi_civita(i: int, j: int, k: int) -> int:
    """Permutation symbol for zero-based indices."""
    return (i - j) * (j - k) * (k - i) // 2


def curl_generators() -> tuple[ExactMatrix, ExactMatrix, ExactMatrix]:
    """Return ``(J1, J2, J3)`` with ``sum_l J_l d_l = curl``."""
    return tuple(  # type: ignore[return-value]
        ExactMatrix.from_rows([[-levi_civita(l, m, n) for n in range(3)] for m in range(3)])
        for l in range(3)
    )


def symbol_matrices() -> tuple[ExactMatrix, ExactMatrix, ExactMatrix]:
    """Return the 6x6 matrices ``A_j^co = [[0, -J_j], [J_j, 0]]``."""
    z = ExactMatrix.zeros(3, 3)
    return tuple(ExactMatrix.block([[z, -J], [J, z]]) for J in curl_generators())  # type: ignore[return-value]


def _b_nu_exact(nu: Sequence[int | Fraction]) -> ExactMatrix:
    n1, n2, n3 = (Fraction(x) for x in nu)
    return ExactMatrix.from_rows([[0, n3, -n2], [-n3, 0, n1], [n2, -n1, 0]])


def boundary_matrices(nu: ArrayLike, tol: float = 1e-12):
    """Boundary and interface matrices for the unit normal ``nu``.

    Returns ``(B_nu, B_dG, B_Sigma)`` of shapes 3x3, 3x6 and 6x12, where
    ``B_nu v = v x nu``. Exact matrices are returned when ``nu`` has
    integer or Fraction entries, float arrays otherwise.
    """
    nu_list = list(np.asarray(nu, dtype=object).ravel())
    if len(nu_list) != 3:
        raise AlgebraError("normal must have three components")
    norm = float(np.sqrt(sum(float(x) ** 2 for x in nu_list)))
    if abs(norm - 1.0) > tol:
        raise AlgebraError(f"normal is not a unit vector (|nu| = {norm!r})")
    if all(isinstance(x, (int, np.integer, Fraction)) for x in nu_list):
        b = _b_nu_exact([Fraction(int(x)) if not isinstance(x, Fraction) else x for x in nu_list])
        z3 = ExactMatrix.zeros(3, 3)
        b_dg = ExactMatrix.block([[b, z3]])
        b_sig = ExactMatrix.block([[b, z3, -b, z3], [z3, b, z3, -b]])
        return b, b_dg, b_sig
    n1, n2, n3 = (float(x) for x in nu_list)
    b = np.array([[0.0, n3, -n2], [-n3, 0.0, n1], [n2, -n1, 0.0]])
    z3 = np.zeros((3, 3))
    b_dg = np.block([[b, z3]])
    b_sig = np.block([[b, z3, -b, z3], [z3, b, z3, -b]])
    return b, b_dg, b_sig


@dataclass(frozen=True)
class BlockSymbols:
    """The 12x12 half-space symbols and the 4x12 interface matrices."""

    A1: ExactMatrix
    A2: ExactMatrix
    A3: ExactMatrix
    A3_tilde: ExactMatrix
    B: ExactMatrix
    C: ExactMatrix
    M: ExactMatrix

    def as_tuple(self) -> tuple[ExactMatrix, ...]:
        return (self.A1, self.A2, self.A3, self.A3_tilde, self.B, self.C, self.M)


B_BL = ExactMatrix.from_rows([[0, 1, 0], [-1, 0, 0]])
C_BL = ExactMatrix.from_rows([[1, 0, 0], [0, 1, 0]])


def block_symbols() -> BlockSymbols:
    a1, a2, a3 = symbol_matrices()
    z = ExactMatrix.zeros(2, 3)
    b = ExactMatrix.block([[B_BL, z, -B_BL, z], [z, B_BL, z, -B_BL]])
    c = ExactMatrix.block([[z, -C_BL, z, -C_BL], [C_BL, z, C_BL, z]])
    return BlockSymbols(
        A1=ExactMatrix.block_diag(a1, a1),
        A2=ExactMatrix.block_diag(a2, a2),
        A3=ExactMatrix.block_diag(a3, a3),
        A3_tilde=ExactMatrix.block_diag(a3, -a3),
        B=b,
        C=c,
        M=c,
    )


# ---------------------------------------------------------------------------
# identity report
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IdentityCheck:
    name: str
    passed: bool
    residual: Fraction


@dataclass(frozen=True)
class IdentityReport:
    checks: tuple[IdentityCheck, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getattr__(self, name: str) -> IdentityCheck:
        for c in self.__dict__.get("checks", ()):
            if c.name == name:
                return c
        raise AttributeError(name)

    def failures(self) -> list[IdentityCheck]:
        return [c for c in self.checks if not c.passed]

    def table(self) -> str:
        lines = [f"{'identity':<22} {'residual':>10}  status"]
        for c in self.checks:
            lines.append(f"{c.name:<22} {str(c.residual):>10}  {'PASS' if c.passed else 'FAIL'}")
        return "\n".join(lines)


def _compare(name: str, lhs: ExactMatrix, rhs: ExactMatrix) -> IdentityCheck:
    if lhs.shape != rhs.shape:
        return IdentityCheck(name, False, Fraction(-1))
    res = (lhs - rhs).max_abs()
    return IdentityCheck(name, res == 0, res)


def structural_identity_report() -> IdentityReport:
    """Check the exact interface identities of the block symbols."""
    s = block_symbols()
    _, _, j3 = curl_generators()
    sym = (s.C.T @ s.B + s.B.T @ s.C).scale(Fraction(1, 2))
    rank_b = s.B.rank()
    return IdentityReport(
        (
            _compare("symmetrized_product", sym, s.A3_tilde),
            _compare("M_times_A3", s.M @ s.A3_tilde, s.B),
            _compare("CblT_Bbl", C_BL.T @ B_BL, -j3),
            IdentityCheck("rank_B", rank_b == 4, Fraction(abs(rank_b - 4))),
        )
    )


# ---------------------------------------------------------------------------
# tangential coefficients
# ---------------------------------------------------------------------------


def validate_mu(mu: ArrayLike, tol: float = 1e-12) -> NDArray[np.float64]:
    """Check ``mu13 = mu23 = 0`` and ``mu33 = 1`` at every sample point."""
    mu = np.asarray(mu, dtype=float)
    if mu.shape[-2:] != (3, 3):
        raise AlgebraError(f"mu must end in a 3x3 block, got shape {mu.shape}")
    bad = (
        (np.abs(mu[..., 0, 2]) > tol)
        | (np.abs(mu[..., 1, 2]) > tol)
        | (np.abs(mu[..., 2, 2] - 1.0) > tol)
    )
    if np.any(bad):
        where = tuple(int(i) for i in np.argwhere(np.atleast_1d(bad))[0])
        raise AlgebraError(
            f"mu violates the column-3 normalisation at sample point {where}"
        )
    return mu


def mu_hat(mu: ArrayLike) -> NDArray[np.float64]:
    out = np.array(mu, dtype=float, copy=True)
    out[..., 2, 2] *= -1.0
    return out


def block_diag_field(*blocks: NDArray) -> NDArray[np.float64]:
    """Block diagonal assembly over the trailing two axes."""
    lead = np.broadcast_shapes(*(b.shape[:-2] for b in blocks))
    n = sum(b.shape[-2] for b in blocks)
    m = sum(b.shape[-1] for b in blocks)
    out = np.zeros(lead + (n, m))
    r = c = 0
    for b in blocks:
        out[..., r : r + b.shape[-2], c : c + b.shape[-1]] = b
        r += b.shape[-2]
        c += b.shape[-1]
    return out


def build_mu_tilde(mu: ArrayLike) -> NDArray[np.float64]:
    """12x12 block diagonal ``diag(mu, mu, mu_hat, mu_hat)`` per sample."""
    mu = validate_mu(mu)
    mh = mu_hat(mu)
    return block_diag_field(mu, mu, mh, mh)


def coefficients_from_mu(mu: ArrayLike) -> tuple[NDArray, NDArray, NDArray]:
    """Tangential coefficients ``(A_1, A_2, A_3)`` generated by ``mu``.

    ``A_j = sum_l A_l^co mu_lj`` for ``j = 1, 2`` and ``A_3`` is the signed
    constant block ``diag(A3^co, -A3^co)``.
    """
    mu = validate_mu(mu)
    s = block_symbols()
    big = np.stack([s.A1.to_array(), s.A2.to_array(), s.A3.to_array()])
    a1 = np.einsum("...l,lpq->...pq", mu[..., :, 0], big)
    a2 = np.einsum("...l,lpq->...pq", mu[..., :, 1], big)
    a3 = np.broadcast_to(s.A3_tilde.to_array(), a1.shape).copy()
    return a1, a2, a3


def generalized_divergence(mu: ArrayLike, grad_h: ArrayLike) -> NDArray[np.float64]:
    """Four trace sums of ``mu_tilde^T grad h``.

    ``grad_h[..., p, k]`` holds ``d_k h_p`` for ``p < 12`` and ``k < 3``.
    """
    mt = build_mu_tilde(mu)
    g = np.asarray(grad_h, dtype=float)
    if g.shape[-2:] != (12, 3):
        raise AlgebraError(f"grad_h must end in a 12x3 block, got {g.shape}")
    prod = np.einsum("...qp,...qk->...pk", mt, g)
    return np.stack(
        [sum(prod[..., k + 3 * l, k] for k in range(3)) for l in range(4)], axis=-1
    )


def cancellation_residual(
    mu: ArrayLike, hessian_u: ArrayLike, tol: float = 1e-12
) -> NDArray[np.float64]:
    """Trace residuals of the generalized divergence of ``sum_j A_j d_j u``.

    ``hessian_u[..., p, k, j]`` holds ``d_k d_j u_p``; ``mu`` is constant.
    All four returned entries vanish for admissible ``mu``.
    """
    hess = np.asarray(hessian_u, dtype=float)
    if hess.shape[-3:] != (12, 3, 3):
        raise AlgebraError(f"hessian must end in 12x3x3, got {hess.shape}")
    scale = max(1.0, float(np.max(np.abs(hess), initial=0.0)))
    if np.max(np.abs(hess - np.swapaxes(hess, -1, -2)), initial=0.0) > tol * scale:
        raise AlgebraError("hessian is not symmetric in its derivative indices")
    a = np.stack(coefficients_from_mu(mu), axis=-3)  # (..., 3, 12, 12)
    # gradient of sum_j A_j d_j u: entry (p, k) = sum_j (A_j)_{pq} d_k d_j u_q
    grad = np.einsum("...jpq,...qkj->...pk", a, hess)
    return generalized_divergence(mu, grad)


# ---------------------------------------------------------------------------
# normal derivative recovery
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RecoverySystem:
    """Gauss elimination matrices for the normal derivative of a trace."""

    A0_sample: NDArray[np.float64]
    mu: NDArray[np.float64]
    G1: NDArray[np.float64]
    G2: NDArray[np.float64]
    mu_breve: NDArray[np.float64]

    @property
    def M_tilde(self) -> NDArray[np.float64]:
        return M_TILDE.to_array()


def _m_tilde() -> ExactMatrix:
    order = [4, 3, None, 1, 0, None, 10, 9, None, 7, 6, None, 2, 5, 8, 11]
    return ExactMatrix.from_rows(
        [[int(k is not None and j == k) for j in range(12)] for k in order]
    )


M_TILDE = _m_tilde()
_G1_TOP = (1, -1, 1, -1, 1, 1, -1, 1, 1, 1, -1, 1)


def normal_block(a0: ArrayLike) -> NDArray[np.float64]:
    a0 = np.asarray(a0, dtype=float)
    return a0[..., NORMAL_IDX, :][..., :, NORMAL_IDX]


def check_normal_block(a0: ArrayLike, eta: float = 1e-8) -> NDArray[np.float64]:
    theta = normal_block(a0)
    lam = np.linalg.eigvalsh(0.5 * (theta + np.swapaxes(theta, -1, -2)))
    if np.any(lam[..., 0] < eta):
        raise SingularMaterialError(
            f"normal 4x4 block has eigenvalue {float(np.min(lam[..., 0]))!r} below eta={eta!r}"
        )
    return theta


def assemble_recovery(a0: ArrayLike, mu: ArrayLike | None = None, eta: float = 1e-8) -> RecoverySystem:
    """Assemble ``mu_breve``, ``G1`` and ``G2`` for one coefficient sample."""
    a0 = np.asarray(a0, dtype=float)
    if a0.shape != (12, 12):
        raise AlgebraError("A0 sample must be 12x12")
    mu = np.eye(3) if mu is None else validate_mu(mu)
    theta = check_normal_block(a0, eta)
    zeta = build_mu_tilde(mu).T @ a0
    a3 = block_symbols().A3_tilde.to_array()
    mu_breve = np.vstack([a3, zeta[list(NORMAL_IDX)]])

    g1 = np.zeros((16, 16))
    g1[:12, :12] = np.diag(_G1_TOP)

    def row(z: NDArray, sign: float) -> NDArray:
        r = np.zeros(12)
        r[0], r[1], r[3], r[4] = -z[4], z[3], z[1], -z[0]
        r[6], r[7], r[9], r[10] = z[10], -z[9], -z[7], z[6]
        return sign * r

    for i, (zi, sign) in enumerate(zip(NORMAL_IDX, (1.0, 1.0, -1.0, -1.0))):
        g1[12 + i, :12] = row(zeta[zi], sign)
        g1[12 + i, 12 + i] = sign
    g2 = np.eye(16)
    g2[12:, 12:] = np.linalg.inv(theta)
    return RecoverySystem(a0, mu, g1, g2, mu_breve)


def normal_derivative_recovery(
    a0: ArrayLike, F: ArrayLike, mu: ArrayLike | None = None, eta: float = 1e-8
) -> NDArray[np.float64]:
    """Solve ``mu_breve d3u = F`` through the Gauss matrices ``G2 G1``."""
    sys_ = assemble_recovery(a0, mu, eta)
    F = np.asarray(F, dtype=float)
    if F.shape[-1] != 16:
        raise AlgebraError("F must be a 16-vector")
    return M_TILDE.to_array().T @ (sys_.G2 @ (sys_.G1 @ F))
