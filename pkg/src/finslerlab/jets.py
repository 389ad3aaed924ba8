"""Truncated multivariate Taylor arithmetic on the slit tangent bundle.

A scalar field f(x, y) is carried as a *jet*: the dense table of its Taylor
coefficients at a base point, truncated at a maximum total order in the chart
variables x and, separately, in the fiber variables y.  All arithmetic
(+, *, /, sqrt, exp, ...) is exact on the retained coefficients, so reading a
coefficient back out yields the exact mixed partial derivative up to
floating-point rounding.  A central-difference estimator is provided as an
independent oracle.

Each jet tracks how many orders remain *valid* in x and in y (`vx`, `vy`).
Differentiating consumes one order; products are valid up to the smaller
validity of the factors.  Requests past the valid range raise OrderError
instead of silently returning truncation garbage.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import product as _product

import numpy as np

from .errors import ConfigError, DomainError, NumericError, OrderError

# Hard engine caps: coefficient tables grow combinatorially past these.
X_ORDER_LIMIT = 4
Y_ORDER_LIMIT = 8

# Default retained orders.  The deepest standard derivative chain (the
# horizontal derivative of the D-tensor) needs (3, 7) to stay inside pure
# Taylor arithmetic; at the default (3, 6) that one operation falls back to
# central differences in x of the fully-AD inner tensor.
DEFAULT_X_ORDER = 3
DEFAULT_Y_ORDER = 6

# Lower bound on |y|: fields live away from the zero section.
EPS_Y = 1e-8


class BasePoint:
    """A point (x, y) of the slit tangent bundle in one coordinate chart."""

    __slots__ = ("x", "y")

    def __init__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if x.ndim != 1 or y.ndim != 1 or x.shape != y.shape:
            raise ConfigError("x and y must be 1-d arrays of equal length")
        if x.size < 2:
            raise ConfigError("chart dimension must be at least 2")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise DomainError("non-finite base point coordinates")
        if float(np.linalg.norm(y)) < EPS_Y:
            raise DomainError(f"|y| < {EPS_Y}: base point too close to the zero section")
        x.setflags(write=False)
        y.setflags(write=False)
        self.x = x
        self.y = y

    @property
    def n(self) -> int:
        return self.x.size

    def displaced(self, dx=None, dy=None) -> "BasePoint":
        x = self.x if dx is None else self.x + dx
        y = self.y if dy is None else self.y + dy
        return BasePoint(x, y)

    def with_y_scaled(self, lam: float) -> "BasePoint":
        return BasePoint(self.x, lam * self.y)

    def __repr__(self):
        return f"BasePoint(x={self.x.tolist()}, y={self.y.tolist()})"


@dataclass(frozen=True)
class MultiIndex:
    """Mixed partial-derivative orders: alpha for x, beta for y."""

    alpha: tuple
    beta: tuple

    def __post_init__(self):
        for part in (self.alpha, self.beta):
            if not all(isinstance(k, int) and k >= 0 for k in part):
                raise ConfigError("multi-index entries must be nonnegative integers")
        if len(self.alpha) != len(self.beta):
            raise ConfigError("alpha and beta must have the same length")

    @property
    def order_x(self) -> int:
        return sum(self.alpha)

    @property
    def order_y(self) -> int:
        return sum(self.beta)

    @property
    def order(self) -> int:
        return self.order_x + self.order_y


def _graded_indices(nvars: int, max_total: int):
    """Exponent tuples with total degree <= max_total, graded order, zero first."""
    out = []

    def rec(prefix, remaining, slots):
        if slots == 1:
            out.append(prefix + (remaining,))
            return
        for head in range(remaining + 1):
            rec(prefix + (head,), remaining - head, slots - 1)

    for total in range(max_total + 1):
        rec((), total, nvars)
    return out


class JetSpace:
    """Coefficient layout, multiplication and shift tables for one (n, x_order, y_order)."""

    def __init__(self, n: int, x_order: int, y_order: int):
        if n < 1:
            raise ConfigError("need at least one variable")
        if not (0 <= x_order <= X_ORDER_LIMIT):
            raise ConfigError(f"x_order must be in [0, {X_ORDER_LIMIT}], got {x_order}")
        if not (0 <= y_order <= Y_ORDER_LIMIT):
            raise ConfigError(f"y_order must be in [0, {Y_ORDER_LIMIT}], got {y_order}")
        self.n = n
        self.x_order = x_order
        self.y_order = y_order

        xm = _graded_indices(n, x_order)
        ym = _graded_indices(n, y_order)
        self.terms = [(a, b) for a in xm for b in ym]
        self.nterms = len(self.terms)
        self.index = {t: i for i, t in enumerate(self.terms)}

        E = np.array([a + b for (a, b) in self.terms], dtype=np.int64)
        self._exps = E
        self.xdeg = E[:, :n].sum(axis=1)
        self.ydeg = E[:, n:].sum(axis=1)

        base = 2 * max(x_order, y_order) + 2
        self._pw = base ** np.arange(2 * n, dtype=np.int64)
        keys = E @ self._pw
        self._korder = np.argsort(keys, kind="stable")
        self._skeys = keys[self._korder]
        self._keys = keys

        fact = np.ones(self.nterms)
        for i, (a, b) in enumerate(self.terms):
            f = 1.0
            for k in a + b:
                f *= math.factorial(k)
            fact[i] = f
        self.fact = fact

        self._tables: dict = {}
        self._masks: dict = {}
        self._down: dict = {}
        self._up: dict = {}

    # -- lookup ------------------------------------------------------------

    def _locate(self, keys: np.ndarray) -> np.ndarray:
        pos = np.searchsorted(self._skeys, keys)
        return self._korder[pos]

    def term_index(self, alpha, beta) -> int:
        try:
            return self.index[(tuple(alpha), tuple(beta))]
        except KeyError:
            raise OrderError(f"multi-index {(alpha, beta)} outside retained orders")

    # -- multiplication ----------------------------------------------------

    def _pair_table(self, vx: int, vy: int):
        key = (vx, vy)
        tab = self._tables.get(key)
        if tab is not None:
            return tab
        cand = np.flatnonzero((self.xdeg <= vx) & (self.ydeg <= vy))
        X = self.xdeg[cand]
        Y = self.ydeg[cand]
        K = self._keys[cand]
        i1_parts, i2_parts, io_parts = [], [], []
        chunk = max(1, 4_000_000 // max(len(cand), 1))
        for s in range(0, len(cand), chunk):
            sl = slice(s, s + chunk)
            sx = X[sl][:, None] + X[None, :]
            sy = Y[sl][:, None] + Y[None, :]
            ii, jj = np.nonzero((sx <= vx) & (sy <= vy))
            i1 = cand[sl][ii]
            i2 = cand[jj]
            io = self._locate(self._keys[i1] + self._keys[i2])
            i1_parts.append(i1)
            i2_parts.append(i2)
            io_parts.append(io)
        tab = (
            np.concatenate(i1_parts),
            np.concatenate(i2_parts),
            np.concatenate(io_parts),
        )
        self._tables[key] = tab
        return tab

    def multiply(self, a: np.ndarray, b: np.ndarray, vx: int, vy: int) -> np.ndarray:
        i1, i2, io = self._pair_table(vx, vy)
        return np.bincount(io, weights=a[i1] * b[i2], minlength=self.nterms)

    def mask(self, vx: int, vy: int) -> np.ndarray:
        key = (vx, vy)
        m = self._masks.get(key)
        if m is None:
            m = (self.xdeg <= vx) & (self.ydeg <= vy)
            self._masks[key] = m
        return m

    # -- derivative / variable shifts ---------------------------------------

    def _shift_down(self, axis: int):
        tab = self._down.get(axis)
        if tab is None:
            src = np.flatnonzero(self._exps[:, axis] >= 1)
            dst = self._locate(self._keys[src] - self._pw[axis])
            fac = self._exps[src, axis].astype(float)
            tab = (src, dst, fac)
            self._down[axis] = tab
        return tab

    def _shift_up(self, axis: int):
        tab = self._up.get(axis)
        if tab is None:
            deg = self.xdeg if axis < self.n else self.ydeg
            cap = self.x_order if axis < self.n else self.y_order
            src = np.flatnonzero(deg <= cap - 1)
            dst = self._locate(self._keys[src] + self._pw[axis])
            tab = (src, dst)
            self._up[axis] = tab
        return tab

    # -- constructors --------------------------------------------------------

    def constant(self, value: float, vx=None, vy=None) -> "Jet":
        c = np.zeros(self.nterms)
        c[0] = float(value)
        return Jet(self, c, self.x_order if vx is None else vx,
                   self.y_order if vy is None else vy)

    def coordinate_jet(self, i: int, value: float) -> "Jet":
        c = np.zeros(self.nterms)
        c[0] = float(value)
        if self.x_order >= 1:
            e = [0] * self.n
            e[i] = 1
            c[self.index[(tuple(e), (0,) * self.n)]] = 1.0
        return Jet(self, c, self.x_order, self.y_order)

    def fiber_jet(self, i: int, value: float) -> "Jet":
        c = np.zeros(self.nterms)
        c[0] = float(value)
        if self.y_order >= 1:
            e = [0] * self.n
            e[i] = 1
            c[self.index[((0,) * self.n, tuple(e))]] = 1.0
        return Jet(self, c, self.x_order, self.y_order)


@lru_cache(maxsize=None)
def jet_space(n: int, x_order: int, y_order: int) -> JetSpace:
    return JetSpace(n, x_order, y_order)


class Jet:
    """Truncated Taylor expansion of a scalar field at a base point.

    Coefficients are stored in Taylor normalization (derivative divided by
    alpha!*beta!), which makes multiplication a plain coefficient convolution.
    """

    __slots__ = ("space", "coeffs", "vx", "vy")

    def __init__(self, space: JetSpace, coeffs: np.ndarray, vx: int, vy: int):
        self.space = space
        self.coeffs = coeffs
        self.vx = vx
        self.vy = vy

    # -- basic access --------------------------------------------------------

    @property
    def value(self) -> float:
        return float(self.coeffs[0])

    def partial(self, alpha, beta) -> float:
        """Exact mixed partial derivative d^|alpha| d^|beta| f / dx^alpha dy^beta."""
        alpha = tuple(alpha)
        beta = tuple(beta)
        if sum(alpha) > self.vx or sum(beta) > self.vy:
            raise OrderError(
                f"partial {(alpha, beta)} beyond valid orders ({self.vx}, {self.vy})"
            )
        i = self.space.term_index(alpha, beta)
        return float(self.coeffs[i] * self.space.fact[i])

    def dvalue_x(self, i: int) -> float:
        if self.vx < 1:
            raise OrderError("x-order exhausted")
        e = [0] * self.space.n
        e[i] = 1
        return float(self.coeffs[self.space.index[(tuple(e), (0,) * self.space.n)]])

    def dvalue_y(self, i: int) -> float:
        if self.vy < 1:
            raise OrderError("y-order exhausted")
        e = [0] * self.space.n
        e[i] = 1
        return float(self.coeffs[self.space.index[((0,) * self.space.n, tuple(e))]])

    # -- derivatives as jets ---------------------------------------------------

    def dx(self, i: int) -> "Jet":
        if self.vx < 1:
            raise OrderError("cannot differentiate in x: order exhausted")
        src, dst, fac = self.space._shift_down(i)
        out = np.zeros(self.space.nterms)
        out[dst] = self.coeffs[src] * fac
        out *= self.space.mask(self.vx - 1, self.vy)
        return Jet(self.space, out, self.vx - 1, self.vy)

    def dy(self, i: int) -> "Jet":
        if self.vy < 1:
            raise OrderError("cannot differentiate in y: order exhausted")
        src, dst, fac = self.space._shift_down(self.space.n + i)
        out = np.zeros(self.space.nterms)
        out[dst] = self.coeffs[src] * fac
        out *= self.space.mask(self.vx, self.vy - 1)
        return Jet(self.space, out, self.vx, self.vy - 1)

    # -- ring operations -------------------------------------------------------

    def _check_space(self, other: "Jet"):
        if other.space is not self.space:
            raise ConfigError("jets from different spaces cannot be combined")

    def __add__(self, other):
        if isinstance(other, Jet):
            self._check_space(other)
            return Jet(self.space, self.coeffs + other.coeffs,
                       min(self.vx, other.vx), min(self.vy, other.vy))
        c = self.coeffs.copy()
        c[0] += float(other)
        return Jet(self.space, c, self.vx, self.vy)

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.space, -self.coeffs, self.vx, self.vy)

    def __sub__(self, other):
        if isinstance(other, Jet):
            self._check_space(other)
            return Jet(self.space, self.coeffs - other.coeffs,
                       min(self.vx, other.vx), min(self.vy, other.vy))
        c = self.coeffs.copy()
        c[0] -= float(other)
        return Jet(self.space, c, self.vx, self.vy)

    def __rsub__(self, other):
        c = -self.coeffs
        c[0] += float(other)
        return Jet(self.space, c, self.vx, self.vy)

    def __mul__(self, other):
        if isinstance(other, Jet):
            self._check_space(other)
            vx = min(self.vx, other.vx)
            vy = min(self.vy, other.vy)
            return Jet(self.space, self.space.multiply(self.coeffs, other.coeffs, vx, vy), vx, vy)
        return Jet(self.space, self.coeffs * float(other), self.vx, self.vy)

    __rmul__ = __mul__

    def mul_fiber_linear(self, i: int, value: float) -> "Jet":
        """Fast product with the exact linear jet (value + eta_i) of fiber variable i."""
        out = self.coeffs * float(value)
        src, dst = self.space._shift_up(self.space.n + i)
        out[dst] += self.coeffs[src]
        out *= self.space.mask(self.vx, self.vy)
        return Jet(self.space, out, self.vx, self.vy)

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        return Jet(self.space, self.coeffs / float(other), self.vx, self.vy)

    def __rtruediv__(self, other):
        return self.reciprocal() * float(other)

    def __pow__(self, p):
        if isinstance(p, (int, np.integer)) and p >= 0:
            result = self.space.constant(1.0, self.vx, self.vy)
            base = self
            k = int(p)
            while k:
                if k & 1:
                    result = result * base
                base = base * base if k > 1 else base
                k >>= 1
            return result
        return self.powf(float(p))

    # -- analytic functions (univariate composition, Horner on the nilpotent part)

    def _compose(self, tc) -> "Jet":
        # tc[k] = f^(k)(u0) / k!
        space = self.space
        w = self.coeffs.copy()
        w[0] = 0.0
        acc = np.zeros(space.nterms)
        acc[0] = tc[-1]
        for c in tc[-2::-1]:
            acc = space.multiply(acc, w, self.vx, self.vy)
            acc[0] += c
        return Jet(space, acc, self.vx, self.vy)

    def _depth(self) -> int:
        return self.vx + self.vy

    def reciprocal(self) -> "Jet":
        u0 = self.value
        if u0 == 0.0:
            raise NumericError("reciprocal of a jet with zero value")
        K = self._depth()
        tc = [1.0 / u0]
        for _ in range(K):
            tc.append(-tc[-1] / u0)
        return self._compose(tc)

    def sqrt(self) -> "Jet":
        u0 = self.value
        if u0 <= 0.0:
            raise DomainError(f"sqrt of a jet with nonpositive value {u0}")
        K = self._depth()
        tc = [math.sqrt(u0)]
        for k in range(1, K + 1):
            tc.append(tc[-1] * (1.5 / k - 1.0) / u0)
        return self._compose(tc)

    def powf(self, p: float) -> "Jet":
        u0 = self.value
        if u0 <= 0.0:
            raise DomainError(f"fractional power of a jet with nonpositive value {u0}")
        K = self._depth()
        tc = [u0 ** p]
        for k in range(1, K + 1):
            tc.append(tc[-1] * ((p - k + 1.0) / k) / u0)
        return self._compose(tc)

    def exp(self) -> "Jet":
        K = self._depth()
        e = math.exp(self.value)
        tc = [e]
        for k in range(1, K + 1):
            tc.append(tc[-1] / k)
        return self._compose(tc)

    def log(self) -> "Jet":
        u0 = self.value
        if u0 <= 0.0:
            raise DomainError(f"log of a jet with nonpositive value {u0}")
        K = self._depth()
        tc = [math.log(u0)]
        sign = 1.0
        for k in range(1, K + 1):
            tc.append(sign / (k * u0 ** k))
            sign = -sign
        return self._compose(tc)

    def sin(self) -> "Jet":
        K = self._depth()
        s, c = math.sin(self.value), math.cos(self.value)
        cycle = (s, c, -s, -c)
        tc = [cycle[k % 4] / math.factorial(k) for k in range(K + 1)]
        return self._compose(tc)

    def cos(self) -> "Jet":
        K = self._depth()
        s, c = math.sin(self.value), math.cos(self.value)
        cycle = (c, -s, -c, s)
        tc = [cycle[k % 4] / math.factorial(k) for k in range(K + 1)]
        return self._compose(tc)

    def tan(self) -> "Jet":
        return self.sin() * self.cos().reciprocal()

    def __repr__(self):
        return f"Jet(n={self.space.n}, valid=({self.vx},{self.vy}), value={self.value})"


# -- scalar/jet polymorphic math; family definitions use these -----------------

def sqrt(v):
    if isinstance(v, Jet):
        return v.sqrt()
    if v <= 0.0:
        raise DomainError(f"sqrt of nonpositive value {v}")
    return math.sqrt(v)


def exp(v):
    return v.exp() if isinstance(v, Jet) else math.exp(v)


def log(v):
    if isinstance(v, Jet):
        return v.log()
    if v <= 0.0:
        raise DomainError(f"log of nonpositive value {v}")
    return math.log(v)


def sin(v):
    return v.sin() if isinstance(v, Jet) else math.sin(v)


def cos(v):
    return v.cos() if isinstance(v, Jet) else math.cos(v)


def tan(v):
    return v.tan() if isinstance(v, Jet) else math.tan(v)


def power(v, p):
    if isinstance(v, Jet):
        return v ** p
    if isinstance(p, (int, np.integer)):
        return float(v) ** int(p)
    if v <= 0.0:
        raise DomainError(f"fractional power of nonpositive value {v}")
    return float(v) ** float(p)


# -- public engine operations ---------------------------------------------------

def taylor_eval(f, base: BasePoint, x_order: int = DEFAULT_X_ORDER,
                y_order: int = DEFAULT_Y_ORDER, space: JetSpace | None = None) -> Jet:
    """Evaluate the scalar field f(x, y) as a jet at `base`.

    `f` must be written against the polymorphic math in this module; it
    receives lists of coordinate/fiber jets and returns a jet (or a plain
    number for constant fields).
    """
    if space is None:
        space = jet_space(base.n, x_order, y_order)
    elif space.n != base.n:
        raise ConfigError("jet space dimension does not match base point")
    xs = [space.coordinate_jet(i, base.x[i]) for i in range(base.n)]
    ys = [space.fiber_jet(i, base.y[i]) for i in range(base.n)]
    out = f(xs, ys)
    if not isinstance(out, Jet):
        out = space.constant(float(out))
    if not np.all(np.isfinite(out.coeffs)):
        raise NumericError("non-finite jet coefficients")
    return out


def coefficient(jet: Jet, m: MultiIndex) -> float:
    """The mixed partial derivative stored in `jet` for multi-index `m`."""
    return jet.partial(m.alpha, m.beta)


# Central-difference stencils of order O(h^2), per derivative order.
_STENCILS = {
    0: ((0,), (1.0,)),
    1: ((-1, 1), (-0.5, 0.5)),
    2: ((-1, 0, 1), (1.0, -2.0, 1.0)),
    3: ((-2, -1, 1, 2), (-0.5, 1.0, -1.0, 0.5)),
    4: ((-2, -1, 0, 1, 2), (1.0, -4.0, 6.0, -4.0, 1.0)),
}


def fd_partial(f, base: BasePoint, m: MultiIndex, step: float | None = None,
               levels: int = 2) -> float:
    """Central-difference estimate of the mixed partial selected by `m`.

    Tensor-product stencils of O(h^2) per variable, Richardson-extrapolated
    over `levels` halvings (levels=2 gives O(h^6)).  Independent of the Taylor
    engine; intended for cross-checks and tests.
    """
    orders = list(m.alpha) + list(m.beta)
    if any(k > 4 for k in orders):
        raise OrderError("fd_partial supports per-variable orders up to 4")
    total = sum(orders)
    if step is None:
        step = 0.01 if total <= 2 else 0.05
    if step <= 0:
        raise NumericError("fd step must be positive")
    if step / 2 ** levels < 1e-12:
        raise NumericError("fd step underflow after Richardson halvings")

    n = base.n
    active = [(v, k) for v, k in enumerate(orders) if k > 0]
    if not active:
        return float(f(base.x.copy(), base.y.copy()))

    def estimate(h: float) -> float:
        acc = 0.0
        grids = [_STENCILS[k] for _, k in active]
        for combo in _product(*[zip(*g) for g in grids]):
            dx = np.zeros(n)
            dy = np.zeros(n)
            w = 1.0
            for (v, _), (off, wt) in zip(active, combo):
                w *= wt
                if v < n:
                    dx[v] += off * h
                else:
                    dy[v - n] += off * h
            acc += w * float(f(base.x + dx, base.y + dy))
        return acc / h ** total

    vals = [estimate(step / 2 ** j) for j in range(levels + 1)]
    for r in range(1, levels + 1):
        fac = 4.0 ** r
        vals = [(fac * vals[j + 1] - vals[j]) / (fac - 1.0) for j in range(len(vals) - 1)]
    return vals[0]
