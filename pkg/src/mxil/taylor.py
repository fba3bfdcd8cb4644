"""Truncated multivariate Taylor polynomials in three space variables.

A :class:`TaylorJet` stores the coefficients of all monomials ``y^alpha``
with ``|alpha| <= K`` around a base point, each coefficient being an array
of a common "tail" shape (scalar, vector or matrix). Arithmetic is
truncated at degree ``K``; derivatives lower the degree of validity by one,
which callers track themselves. This gives exact (to rounding) derivatives
of compositions of polynomial and power functions at a point.
"""

from __future__ import annotations

from functools import lru_cache
from math import factorial
from typing import Iterable, Sequence

import numpy as np
from numpy.typing import NDArray


@lru_cache(maxsize=None)
def _monomials(K: int) -> tuple[tuple[int, int, int], ...]:
    out = [(i, j, d - i - j) for d in range(K + 1) for i in range(d, -1, -1) for j in range(d - i, -1, -1)]
    return tuple(out)


@lru_cache(maxsize=None)
def _tables(K: int):
    mons = _monomials(K)
    index = {m: n for n, m in enumerate(mons)}
    pairs = []
    for a, ma in enumerate(mons):
        for b, mb in enumerate(mons):
            s = (ma[0] + mb[0], ma[1] + mb[1], ma[2] + mb[2])
            if sum(s) <= K:
                pairs.append((a, b, index[s]))
    deriv = []
    for axis in range(3):
        rows = []
        for n, m in enumerate(mons):
            if m[axis] >= 1:
                lower = list(m)
                lower[axis] -= 1
                rows.append((n, index[tuple(lower)], m[axis]))
        deriv.append(tuple(rows))
    return mons, index, tuple(pairs), tuple(deriv)


class TaylorJet:
    """Truncated Taylor polynomial with array-valued coefficients."""

    __array_priority__ = 1000

    def __init__(self, coeffs: NDArray, K: int):
        self.K = K
        self.c = np.asarray(coeffs, dtype=float)
        if self.c.shape[0] != len(_monomials(K)):
            raise ValueError("coefficient count does not match the degree")

    # constructors -----------------------------------------------------
    @classmethod
    def constant(cls, value, K: int) -> "TaylorJet":
        v = np.asarray(value, dtype=float)
        c = np.zeros((len(_monomials(K)),) + v.shape)
        c[0] = v
        return cls(c, K)

    @classmethod
    def variables(cls, point: Sequence[float], K: int, signs: Sequence[float] = (1, 1, 1)) -> list["TaylorJet"]:
        """Coordinate jets ``s_i * (y_i)`` expanded at ``point`` (already signed)."""
        _, index, _, _ = _tables(K)
        out = []
        for i in range(3):
            c = np.zeros(len(_monomials(K)))
            c[0] = point[i]
            if K >= 1:
                e = [0, 0, 0]
                e[i] = 1
                c[index[tuple(e)]] = signs[i]
            out.append(cls(c, K))
        return out

    # helpers ----------------------------------------------------------
    @property
    def tail(self) -> tuple[int, ...]:
        return self.c.shape[1:]

    @property
    def value(self) -> NDArray:
        return self.c[0]

    def _lift(self, other) -> "TaylorJet":
        if isinstance(other, TaylorJet):
            if other.K != self.K:
                raise ValueError("jets of different degree")
            return other
        return TaylorJet.constant(other, self.K)

    # arithmetic -------------------------------------------------------
    def __add__(self, other):
        o = self._lift(other)
        return TaylorJet(self.c + o.c, self.K)

    __radd__ = __add__

    def __neg__(self):
        return TaylorJet(-self.c, self.K)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def _product(self, o: "TaylorJet", op) -> "TaylorJet":
        _, _, pairs, _ = _tables(self.K)
        first = op(self.c[0], o.c[0])
        out = np.zeros((self.c.shape[0],) + np.shape(first))
        for a, b, s in pairs:
            out[s] += op(self.c[a], o.c[b])
        return TaylorJet(out, self.K)

    def __mul__(self, other):
        if not isinstance(other, TaylorJet) and np.ndim(other) == 0:
            return TaylorJet(self.c * float(other), self.K)
        return self._product(self._lift(other), np.multiply)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, TaylorJet):
            return self * other.power(-1.0)
        return TaylorJet(self.c / other, self.K)

    def __rtruediv__(self, other):
        return self.power(-1.0) * other

    def __matmul__(self, other):
        return self._product(self._lift(other), np.matmul)

    def __rmatmul__(self, other):
        return self._lift(other)._product(self, np.matmul)

    @property
    def T(self) -> "TaylorJet":
        return TaylorJet(np.swapaxes(self.c, -1, -2), self.K)

    def power(self, alpha: float) -> "TaylorJet":
        """Scalar jet raised to a real power (base value must be positive)."""
        c0 = self.c[0]
        if np.any(c0 <= 0):
            raise ValueError("power of a jet needs a positive base value")
        n = TaylorJet(self.c.copy(), self.K)
        n.c[0] = 0.0
        out = TaylorJet.constant(c0**alpha, self.K)
        term = TaylorJet.constant(np.ones_like(c0), self.K)
        coef = 1.0
        for k in range(1, self.K + 1):
            coef *= (alpha - k + 1) / k
            term = term * n
            out = out + term * (coef * c0 ** (alpha - k))
        return out

    def inv(self) -> "TaylorJet":
        """Inverse of a square-matrix jet via a terminating Neumann series."""
        x0 = np.linalg.inv(self.c[0])
        n = TaylorJet(self.c.copy(), self.K)
        n.c[0] = 0.0
        step = TaylorJet.constant(-x0, self.K) @ n
        out = TaylorJet.constant(x0, self.K)
        acc = TaylorJet.constant(np.eye(x0.shape[0]), self.K)
        for _ in range(self.K):
            acc = step @ acc
            out = out + acc @ x0
        return out

    def deriv(self, axis: int) -> "TaylorJet":
        _, _, _, deriv = _tables(self.K)
        out = np.zeros_like(self.c)
        for n, lower, mult in deriv[axis]:
            out[lower] += mult * self.c[n]
        return TaylorJet(out, self.K)

    def __getitem__(self, idx) -> "TaylorJet":
        if not isinstance(idx, tuple):
            idx = (idx,)
        return TaylorJet(self.c[(slice(None),) + idx], self.K)


def is_jet(x) -> bool:
    return isinstance(x, TaylorJet)


def assemble(nested) -> "TaylorJet | NDArray":
    """Matrix from nested lists of scalars, arrays or jets.

    Array entries are broadcast; the matrix axes are appended at the end.
    """
    flat = list(_flatten(nested))
    shape = np.shape(np.empty(_nested_shape(nested), dtype=object))
    jet = next((x for x in flat if is_jet(x)), None)
    if jet is not None:
        K = jet.K
        parts = [x if is_jet(x) else TaylorJet.constant(x, K) for x in flat]
        tails = np.broadcast_shapes(*(p.tail for p in parts))
        c = np.stack([np.broadcast_to(p.c, (p.c.shape[0],) + tails) for p in parts], axis=-1)
        return TaylorJet(c.reshape(c.shape[:-1] + shape), K)
    arrs = np.broadcast_arrays(*[np.asarray(x, dtype=float) for x in flat])
    return np.stack(arrs, axis=-1).reshape(arrs[0].shape + shape)


def _flatten(nested) -> Iterable:
    if isinstance(nested, (list, tuple)):
        for x in nested:
            yield from _flatten(x)
    else:
        yield nested


def _nested_shape(nested) -> tuple[int, ...]:
    if isinstance(nested, (list, tuple)):
        return (len(nested),) + _nested_shape(nested[0])
    return ()


def block_diag(*blocks):
    """Block diagonal of square matrices (arrays or jets)."""
    if any(is_jet(b) for b in blocks):
        K = next(b for b in blocks if is_jet(b)).K
        js = [b if is_jet(b) else TaylorJet.constant(b, K) for b in blocks]
        lead = np.broadcast_shapes(*(j.c.shape[:-2] for j in js))
        n = sum(j.c.shape[-1] for j in js)
        c = np.zeros(lead + (n, n))
        r = 0
        for j in js:
            k = j.c.shape[-1]
            c[..., r : r + k, r : r + k] = j.c
            r += k
        return TaylorJet(c, K)
    from .maxwell_algebra import block_diag_field

    return block_diag_field(*[np.asarray(b, dtype=float) for b in blocks])


def taylor_factor(alpha: tuple[int, int, int]) -> int:
    return factorial(alpha[0]) * factorial(alpha[1]) * factorial(alpha[2])
