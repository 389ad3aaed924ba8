"""Independent closed-form oracles used by the tests.

These are textbook formulas evaluated directly with numpy; nothing here
touches the Taylor engine, so agreement with it is a genuine cross-check.
"""

import numpy as np


def conformal_round_metric(x, sign=+1.0):
    """a_ij = (2 / (1 + sign |x|^2))^2 delta_ij: sphere (+1) / hyperbolic (-1)."""
    x = np.asarray(x, float)
    s = 2.0 / (1.0 + sign * float(x @ x))
    return s * s * np.eye(x.size)


def conformal_christoffels(x, sign=+1.0):
    """Levi-Civita symbols of the conformal round metric, Gamma^i_jk.

    For a_ij = exp(2 phi) delta_ij:  Gamma^i_jk = d_k phi delta^i_j
    + d_j phi delta^i_k - d_i phi delta_jk, with phi = log(2/(1 + sign r^2)).
    """
    x = np.asarray(x, float)
    n = x.size
    dphi = -2.0 * sign * x / (1.0 + sign * float(x @ x))
    G = np.zeros((n, n, n))
    for i in range(n):
        for j in range(n):
            for k in range(n):
                G[i, j, k] = ((i == j) * dphi[k] + (i == k) * dphi[j]
                              - (j == k) * dphi[i])
    return G


def constant_curvature_riemann(a, lam):
    """R^i_jkl = lam (delta^i_k a_jl - delta^i_l a_jk)."""
    n = a.shape[0]
    eye = np.eye(n)
    return lam * (np.einsum("ik,jl->ijkl", eye, a)
                  - np.einsum("il,jk->ijkl", eye, a))


def fd_christoffels(a_fn, x, h=1e-5):
    """Levi-Civita symbols of a generic x-dependent metric by central differences."""
    x = np.asarray(x, float)
    n = x.size
    a0 = np.asarray(a_fn(x), float)
    da = np.empty((n, n, n))  # da[i,j,k] = d a_ij / dx^k
    for k in range(n):
        e = np.zeros(n)
        e[k] = h
        da[:, :, k] = (np.asarray(a_fn(x + e)) - np.asarray(a_fn(x - e))) / (2 * h)
    ainv = np.linalg.inv(a0)
    G = np.empty((n, n, n))
    for i in range(n):
        for j in range(n):
            for k in range(n):
                G[i, j, k] = 0.5 * sum(
                    ainv[i, s] * (da[s, j, k] + da[s, k, j] - da[j, k, s])
                    for s in range(n))
    return G
