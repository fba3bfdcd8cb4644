"""Independent reference computations used to freeze expected values.

Nothing here calls the jet machinery of the package: the Maxwell operator
is written with explicit curls, and the Kerr coefficient derivatives are
hand-expanded with the Leibniz rule.
"""

from math import comb

import numpy as np


def grad(f, axis, h):
    return np.gradient(f, h, axis=axis, edge_order=2)


def maxwell_operator(u, h):
    """``sum_j A_j d_j u = (-curl H, curl E)`` for a component-last nodal field."""

    def curl(v):
        d = lambda c, a: grad(v[..., c], a, h[a])  # noqa: E731
        return np.stack([d(2, 1) - d(1, 2), d(0, 2) - d(2, 0), d(1, 0) - d(0, 1)], axis=-1)

    return np.concatenate([-curl(u[..., 3:]), curl(u[..., :3])], axis=-1)


def _dot(a, b):
    return np.sum(a * b, axis=-1)


def kerr_coefficient_derivatives(S, vartheta, sigma0, sigma2, K):
    """Plain time derivatives of order ``< K`` of the Kerr ``chi`` and ``sigma``.

    ``S[p]`` holds ``d_t^p u``. Leibniz rule on ``|E|^2`` and ``E E^T``.
    """
    E = [s[..., :3] for s in S]
    shape = S[0].shape[:-1]
    chi, sig = [], []
    for l in range(K):
        e2 = sum(comb(l, a) * _dot(E[a], E[l - a]) for a in range(l + 1))
        eet = sum(comb(l, a) * E[a][..., :, None] * E[l - a][..., None, :] for a in range(l + 1))
        c = np.zeros(shape + (6, 6))
        c[..., :3, :3] = vartheta * (e2[..., None, None] * np.eye(3) + 2 * eet)
        s = np.zeros(shape + (6, 6))
        s[..., :3, :3] = sigma2 * e2[..., None, None] * np.eye(3)
        if l == 0:
            c += np.eye(6)
            s[..., :3, :3] += sigma0 * np.eye(3)
        chi.append(c)
        sig.append(s)
    return chi, sig


def kerr_s1_s2(u0, f0, f1, h, vartheta, sigma0=0.0, sigma2=0.0):
    """Hand-expanded ``S_1`` and ``S_2`` for the Kerr law with polynomial conductivity.

    ``chi S1 = f - L u0 - sigma u0`` and
    ``chi S2 = f' - L S1 - chi' S1 - sigma S1 - sigma' u0`` with
    ``chi' = vartheta (2 (E.E') I + 2 (E' E^T + E E'^T))`` on the electric
    block and ``sigma' = 2 sigma2 (E.E') I``.
    """
    E = u0[..., :3]
    e2 = _dot(E, E)[..., None, None]
    chi = np.broadcast_to(np.eye(6), u0.shape[:-1] + (6, 6)).copy()
    chi[..., :3, :3] += vartheta * (e2 * np.eye(3) + 2 * E[..., :, None] * E[..., None, :])
    sig = np.zeros_like(chi)
    sig[..., :3, :3] = (sigma0 + sigma2 * e2) * np.eye(3)

    def solve(rhs):
        return np.linalg.solve(chi, rhs[..., None])[..., 0]

    mv = lambda M, v: np.einsum("...pq,...q->...p", M, v)  # noqa: E731
    s1 = solve(f0 - maxwell_operator(u0, h) - mv(sig, u0))
    Ed = s1[..., :3]
    ed = _dot(E, Ed)[..., None, None]
    chid = np.zeros_like(chi)
    chid[..., :3, :3] = vartheta * (2 * ed * np.eye(3) + 2 * (Ed[..., :, None] * E[..., None, :] + E[..., :, None] * Ed[..., None, :]))
    sigd = np.zeros_like(chi)
    sigd[..., :3, :3] = 2 * sigma2 * ed * np.eye(3)
    s2 = solve(f1 - maxwell_operator(s1, h) - mv(chid, s1) - mv(sig, s1) - mv(sigd, u0))
    return s1, s2


def fresnel(eps1, eps2):
    """Normal-incidence amplitude coefficients for E, from region 1 into region 2."""
    n1, n2 = np.sqrt(eps1), np.sqrt(eps2)
    return (n1 - n2) / (n1 + n2), 2 * n1 / (n1 + n2)


def random_spd(rng, n, lo=0.1, hi=10.0):
    q, _ = np.linalg.qr(rng.normal(size=(n, n)))
    lam = np.exp(rng.uniform(np.log(lo), np.log(hi), size=n))
    lam[0], lam[-1] = lo, hi
    return (q * lam) @ q.T


def smooth_state(x, seed, amplitude=0.3):
    """Random smooth 6-component field built from a few trigonometric modes."""
    rng = np.random.default_rng(seed)
    k = rng.uniform(0.5, 2.0, size=(6, 3))
    ph = rng.uniform(0, 2 * np.pi, size=6)
    return amplitude * np.stack([np.sin(x @ k[c] + ph[c]) for c in range(6)], axis=-1)
