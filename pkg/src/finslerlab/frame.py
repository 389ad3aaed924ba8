"""Per-point tensor pipeline.

A Frame evaluates one Finsler structure at one base point and lazily derives
every tensor of the Chern-connection apparatus from the single jet of F:
fundamental tensor, Cartan tensor, nonlinear connection, connection
coefficients, hh/hv curvature, the contracted curvatures, and the chain of
horizontal Cartan derivatives down to the D-tensor.  Jet-valued tensors are
kept so later operations can differentiate them again; cheap value/derivative
extraction feeds the residual checks.

Frames are immutable after construction and safe to use from several threads;
distinct base points can be processed concurrently with no coordination.
"""

from __future__ import annotations

from functools import cached_property

import numpy as np

from . import jets as _j
from .errors import DomainError, OrderError, StructureInvalidError
from .jets import BasePoint, Jet, jet_space, taylor_eval
from .metrics import EPS_PD, FinslerStructure


def _oarray(shape):
    return np.empty(shape, dtype=object)


def jet_values(arr: np.ndarray) -> np.ndarray:
    out = np.empty(arr.shape)
    for idx in np.ndindex(arr.shape):
        out[idx] = arr[idx].value
    return out


def jet_dx_values(arr: np.ndarray, n: int) -> np.ndarray:
    """Values of d/dx^p applied entrywise; new trailing axis indexes p."""
    out = np.empty(arr.shape + (n,))
    for idx in np.ndindex(arr.shape):
        jt = arr[idx]
        for p in range(n):
            out[idx + (p,)] = jt.dvalue_x(p)
    return out


def jet_dy_values(arr: np.ndarray, n: int) -> np.ndarray:
    out = np.empty(arr.shape + (n,))
    for idx in np.ndindex(arr.shape):
        jt = arr[idx]
        for p in range(n):
            out[idx + (p,)] = jt.dvalue_y(p)
    return out


class Frame:
    """All Chern-connection data of `structure` at `base`, derived on demand."""

    def __init__(self, structure: FinslerStructure, base: BasePoint,
                 x_order: int | None = None, y_order: int | None = None):
        if base.n != structure.n:
            raise DomainError("base point dimension does not match the structure")
        if not structure.in_domain(base):
            raise DomainError(f"{base} outside the domain of {structure.label}")
        self.structure = structure
        self.base = base
        self.n = structure.n
        xo = _j.DEFAULT_X_ORDER if x_order is None else x_order
        yo = _j.DEFAULT_Y_ORDER if y_order is None else y_order
        self.space = jet_space(self.n, xo, yo)
        self._yjets = [self.space.fiber_jet(i, base.y[i]) for i in range(self.n)]

    # -- norm and metric -----------------------------------------------------

    @cached_property
    def norm_jet(self) -> Jet:
        F = taylor_eval(self.structure.F, self.base, space=self.space)
        if F.value <= 0.0:
            raise StructureInvalidError(
                f"F({self.base}) = {F.value}: norm not positive")
        return F

    @cached_property
    def norm_sq_jet(self) -> Jet:
        return self.norm_jet * self.norm_jet

    @cached_property
    def metric_jets(self) -> np.ndarray:
        n = self.n
        dys = [self.norm_sq_jet.dy(i) for i in range(n)]
        g = _oarray((n, n))
        for i in range(n):
            for j in range(i, n):
                g[i, j] = g[j, i] = 0.5 * dys[i].dy(j)
        return g

    @cached_property
    def metric_values(self) -> np.ndarray:
        gv = jet_values(self.metric_jets)
        if np.linalg.eigvalsh(gv)[0] <= EPS_PD:
            raise StructureInvalidError(
                f"fundamental tensor not positive-definite at {self.base}")
        return gv

    @cached_property
    def metric_inverse_jets(self) -> np.ndarray:
        """Inverse of the fundamental tensor in jet arithmetic (Newton iteration)."""
        n = self.n
        g = self.metric_jets
        vx, vy = g[0, 0].vx, g[0, 0].vy
        X = _oarray((n, n))
        g0inv = np.linalg.inv(self.metric_values)
        for i in range(n):
            for j in range(n):
                X[i, j] = self.space.constant(g0inv[i, j], vx, vy)
        steps = 0
        while (1 << steps) - 1 < vx + vy:
            steps += 1
        for _ in range(steps):
            GX = _matmul(g, X, self.space, vx, vy)
            for i in range(n):
                for j in range(n):
                    GX[i, j] = -GX[i, j]
                GX[i, i] = 2.0 + GX[i, i]
            X = _matmul(X, GX, self.space, vx, vy)
        return X

    @cached_property
    def metric_inverse_values(self) -> np.ndarray:
        return jet_values(self.metric_inverse_jets)

    @cached_property
    def unit_fiber_jets(self) -> np.ndarray:
        """Distinguished section l^i = y^i / F as jets."""
        finv = self.norm_jet.reciprocal()
        l = _oarray((self.n,))
        for i in range(self.n):
            l[i] = finv.mul_fiber_linear(i, self.base.y[i])
        return l

    @cached_property
    def unit_fiber_values(self) -> np.ndarray:
        return self.base.y / self.norm_jet.value

    @cached_property
    def unit_fiber_lowered(self) -> np.ndarray:
        return self.metric_values @ self.unit_fiber_values

    # -- Cartan tensor ---------------------------------------------------------

    @cached_property
    def cartan_lowered_jets(self) -> np.ndarray:
        n = self.n
        F = self.norm_jet
        A = _oarray((n, n, n))
        dys = [self.norm_sq_jet.dy(i) for i in range(n)]
        for i in range(n):
            for j in range(i, n):
                dij = dys[i].dy(j)
                for k in range(j, n):
                    a = 0.25 * (F * dij.dy(k))
                    for perm in ((i, j, k), (i, k, j), (j, i, k),
                                 (j, k, i), (k, i, j), (k, j, i)):
                        A[perm] = a
        return A

    @cached_property
    def cartan_lowered_values(self) -> np.ndarray:
        return jet_values(self.cartan_lowered_jets)

    @cached_property
    def cartan_mixed_jets(self) -> np.ndarray:
        """A^i_jk = g^im A_mjk."""
        n = self.n
        gi = self.metric_inverse_jets
        Al = self.cartan_lowered_jets
        A = _oarray((n, n, n))
        for i in range(n):
            for j in range(n):
                for k in range(j, n):
                    acc = gi[i, 0] * Al[0, j, k]
                    for m in range(1, n):
                        acc = acc + gi[i, m] * Al[m, j, k]
                    A[i, j, k] = A[i, k, j] = acc
        return A

    @cached_property
    def cartan_mixed_values(self) -> np.ndarray:
        return jet_values(self.cartan_mixed_jets)

    # -- nonlinear connection ----------------------------------------------------

    @cached_property
    def nonlinear_jets(self) -> np.ndarray:
        """N^i_m = 1/4 d/dy^m [ g^is (dg_sk/dx^j + dg_sj/dx^k - dg_kj/dx^s) y^j y^k ]."""
        n = self.n
        g = self.metric_jets
        gi = self.metric_inverse_jets
        y = self.base.y
        dgx = [[[g[s, k].dx(j) for k in range(n)] for s in range(n)] for j in range(n)]
        spray = []
        for s in range(n):
            acc = None
            for j in range(n):
                inner = None
                for k in range(n):
                    term = dgx[j][s][k] + dgx[k][s][j] - dgx[s][j][k]
                    term = term.mul_fiber_linear(k, y[k])
                    inner = term if inner is None else inner + term
                inner = inner.mul_fiber_linear(j, y[j])
                acc = inner if acc is None else acc + inner
            spray.append(acc)
        N = _oarray((n, n))
        for i in range(n):
            h = gi[i, 0] * spray[0]
            for s in range(1, n):
                h = h + gi[i, s] * spray[s]
            for m in range(n):
                N[i, m] = 0.25 * h.dy(m)
        return N

    @cached_property
    def nonlinear_values(self) -> np.ndarray:
        return jet_values(self.nonlinear_jets)

    # -- horizontal derivative -------------------------------------------------

    def horiz_all(self, jet: Jet) -> list:
        """delta/delta x^k applied to one jet, for every k (as jets)."""
        n = self.n
        N = self.nonlinear_jets
        dys = [jet.dy(m) for m in range(n)]
        out = []
        for k in range(n):
            acc = jet.dx(k)
            for m in range(n):
                acc = acc - N[m, k] * dys[m]
            out.append(acc)
        return out

    def horiz(self, jet: Jet, k: int) -> Jet:
        acc = jet.dx(k)
        N = self.nonlinear_jets
        for m in range(self.n):
            acc = acc - N[m, k] * jet.dy(m)
        return acc

    def horiz_values(self, arr: np.ndarray) -> np.ndarray:
        """Values of delta/delta x^p entrywise; trailing axis indexes p."""
        n = self.n
        dX = jet_dx_values(arr, n)
        dY = jet_dy_values(arr, n)
        return dX - np.einsum("...m,mp->...p", dY, self.nonlinear_values)

    # -- Chern connection coefficients -------------------------------------------

    @cached_property
    def gamma_jets(self) -> np.ndarray:
        """Gamma^i_jk, symmetrized in (j, k) on construction."""
        n = self.n
        g = self.metric_jets
        gi = self.metric_inverse_jets
        dgh = {}
        for s in range(n):
            for j in range(s, n):
                hz = self.horiz_all(g[s, j])
                dgh[(s, j)] = hz
                dgh[(j, s)] = hz
        Gamma = _oarray((n, n, n))
        for i in range(n):
            for j in range(n):
                for k in range(j, n):
                    acc = None
                    for s in range(n):
                        comb = dgh[(s, j)][k] - dgh[(j, k)][s] + dgh[(k, s)][j]
                        term = gi[i, s] * comb
                        acc = term if acc is None else acc + term
                    Gamma[i, j, k] = Gamma[i, k, j] = 0.5 * acc
        return Gamma

    @cached_property
    def gamma_values(self) -> np.ndarray:
        return jet_values(self.gamma_jets)

    @cached_property
    def gamma_vertical_values(self) -> np.ndarray:
        """d Gamma^i_jk / dy^h, indexed [i, j, k, h]."""
        return jet_dy_values(self.gamma_jets, self.n)

    # -- curvature ------------------------------------------------------------

    @cached_property
    def hh_jets(self) -> np.ndarray:
        """R^i_jkl = delta_k Gamma^i_jl - delta_l Gamma^i_jk + Gamma Gamma terms.

        Every (k, l) entry is computed independently from the formula, so the
        (k, l)-antisymmetry check downstream exercises the construction rather
        than a mirroring convention.
        """
        n = self.n
        G = self.gamma_jets
        hz = {}
        for i in range(n):
            for j in range(n):
                for l in range(j, n):
                    hs = self.horiz_all(G[i, j, l])
                    hz[(i, j, l)] = hs
                    hz[(i, l, j)] = hs
        R = _oarray((n, n, n, n))
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    for l in range(n):
                        acc = hz[(i, j, l)][k] - hz[(i, j, k)][l]
                        for h in range(n):
                            acc = acc + (G[i, h, k] * G[h, j, l]
                                         - G[i, h, l] * G[h, j, k])
                        R[i, j, k, l] = acc
        return R

    @cached_property
    def hh_values(self) -> np.ndarray:
        return jet_values(self.hh_jets)

    @cached_property
    def hv_values(self) -> np.ndarray:
        """P^i_jkl = -F dGamma^i_jk/dy^l (values), indexed [i, j, k, l]."""
        Fv = self.norm_jet.value
        return -Fv * self.gamma_vertical_values

    @cached_property
    def r3_jets(self) -> np.ndarray:
        """R^i_kl = l^j R^i_jkl as jets."""
        n = self.n
        l = self.unit_fiber_jets
        R = self.hh_jets
        out = _oarray((n, n, n))
        for i in range(n):
            for k in range(n):
                for m in range(k, n):
                    acc = l[0] * R[i, 0, k, m]
                    for j in range(1, n):
                        acc = acc + l[j] * R[i, j, k, m]
                    out[i, k, m] = acc
                    if m != k:
                        out[i, m, k] = -acc
        return out

    @cached_property
    def r3_values(self) -> np.ndarray:
        return jet_values(self.r3_jets)

    @cached_property
    def r2_values(self) -> np.ndarray:
        """R^i_j = R^i_jl l^l (flag-curvature predecessor)."""
        return np.einsum("ijl,l->ij", self.r3_values, self.unit_fiber_values)

    @cached_property
    def fiber_weighted_r3_jets(self) -> np.ndarray:
        """y^j R^i_jkl = F R^i_kl as jets (the degree-1 companion of r3)."""
        n = self.n
        R = self.hh_jets
        out = _oarray((n, n, n))
        for i in range(n):
            for k in range(n):
                for m in range(n):
                    acc = R[i, 0, k, m].mul_fiber_linear(0, self.base.y[0])
                    for j in range(1, n):
                        acc = acc + R[i, j, k, m].mul_fiber_linear(j, self.base.y[j])
                    out[i, k, m] = acc
        return out

    def traces(self):
        """(R_kh, R_k, scalar) from the standard index contractions."""
        R4 = self.hh_values
        R3 = self.r3_values
        R2 = self.r2_values
        R_kh = np.einsum("iikh->kh", R4)
        R_k = np.einsum("iik->k", R3)
        scalar = float(np.trace(R2)) / (self.n - 1)
        return R_kh, R_k, scalar

    # -- Cartan derivative chain ---------------------------------------------------

    def hcov_jets(self, T: np.ndarray, valence: tuple) -> np.ndarray:
        """Horizontal covariant derivative of a jet tensor; trailing axis is p."""
        n = self.n
        G = self.gamma_jets
        out = _oarray(T.shape + (n,))
        for idx in np.ndindex(T.shape):
            hz = self.horiz_all(T[idx])
            for p in range(n):
                acc = hz[p]
                for slot, v in enumerate(valence):
                    a = idx[slot]
                    for m in range(n):
                        jdx = list(idx)
                        jdx[slot] = m
                        if v == "u":
                            acc = acc + G[a, m, p] * T[tuple(jdx)]
                        else:
                            acc = acc - G[m, a, p] * T[tuple(jdx)]
                out[idx + (p,)] = acc
        return out

    def hcov_values(self, T: np.ndarray, valence: tuple) -> np.ndarray:
        """Value-level horizontal covariant derivative of a jet tensor."""
        Tval = jet_values(T)
        out = self.horiz_values(T)
        G = self.gamma_values
        for slot, v in enumerate(valence):
            moved = np.moveaxis(Tval, slot, -1)
            if v == "u":
                corr = np.tensordot(moved, G, axes=([-1], [1]))
            else:
                corr = np.tensordot(moved, G, axes=([-1], [0]))
            corr = np.moveaxis(corr, -2, slot)
            out = out + corr if v == "u" else out - corr
        return out

    @cached_property
    def cartan_hcov_jets(self) -> np.ndarray:
        """A^i_jl|s, indexed [i, j, l, s]."""
        return self.hcov_jets(self.cartan_mixed_jets, ("u", "d", "d"))

    @cached_property
    def adot_jets(self) -> np.ndarray:
        """Adot^i_jl = A^i_jl|s l^s."""
        n = self.n
        Ah = self.cartan_hcov_jets
        l = self.unit_fiber_jets
        out = _oarray((n, n, n))
        for i in range(n):
            for j in range(n):
                for m in range(j, n):
                    acc = Ah[i, j, m, 0] * l[0]
                    for s in range(1, n):
                        acc = acc + Ah[i, j, m, s] * l[s]
                    out[i, j, m] = out[i, m, j] = acc
        return out

    @cached_property
    def adot_values(self) -> np.ndarray:
        return jet_values(self.adot_jets)

    @cached_property
    def adot_hcov_jets(self) -> np.ndarray:
        """Adot^i_jl|k, indexed [i, j, l, k]."""
        return self.hcov_jets(self.adot_jets, ("u", "d", "d"))

    @cached_property
    def dbracket_jets(self) -> np.ndarray:
        """Adot^i_jl|k - Adot^i_jk|l + Adot^s_jl Adot^i_sk - Adot^s_jk Adot^i_sl."""
        n = self.n
        Ah = self.adot_hcov_jets
        Ad = self.adot_jets
        out = _oarray((n, n, n, n))
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    for l in range(n):
                        acc = Ah[i, j, l, k] - Ah[i, j, k, l]
                        for s in range(n):
                            acc = acc + (Ad[s, j, l] * Ad[i, s, k]
                                         - Ad[s, j, k] * Ad[i, s, l])
                        out[i, j, k, l] = acc
        return out

    @cached_property
    def d_values(self) -> np.ndarray:
        """D^i_hkl = y^j d/dy^h [bracket^i_jkl], indexed [i, h, k, l] (values)."""
        n = self.n
        B = self.dbracket_jets
        y = self.base.y
        out = np.zeros((n, n, n, n))
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    for l in range(n):
                        jt = B[i, j, k, l]
                        for h in range(n):
                            out[i, h, k, l] += y[j] * jt.dvalue_y(h)
        return out

    @property
    def deep_ad_available(self) -> bool:
        """True when retained orders admit a pure-AD horizontal derivative of D."""
        return self.space.x_order >= 3 and self.space.y_order >= 7

    @cached_property
    def d_jets(self) -> np.ndarray:
        """D-tensor as jets; needs y_order >= 7 (else OrderError)."""
        if not self.deep_ad_available:
            raise OrderError(
                "jet orders too low to keep the D-tensor differentiable; "
                "raise y_order to 7 or use the finite-difference fallback")
        n = self.n
        B = self.dbracket_jets
        y = self.base.y
        out = _oarray((n, n, n, n))
        for i in range(n):
            for h in range(n):
                for k in range(n):
                    for l in range(n):
                        acc = B[i, 0, k, l].dy(h).mul_fiber_linear(0, y[0])
                        for j in range(1, n):
                            acc = acc + B[i, j, k, l].dy(h).mul_fiber_linear(j, y[j])
                        out[i, h, k, l] = acc
        return out


def _matmul(A, B, space, vx, vy):
    n = A.shape[0]
    out = _oarray((n, n))
    for i in range(n):
        for j in range(n):
            acc = A[i, 0] * B[0, j]
            for k in range(1, n):
                acc = acc + A[i, k] * B[k, j]
            out[i, j] = acc
    return out
