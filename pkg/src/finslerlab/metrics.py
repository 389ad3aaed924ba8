"""Finsler structures and the tensors derived directly from the norm.

Built-in families:

* Riemannian  F = sqrt(a_ij(x) y^i y^j), with the base metric given as a
  constant matrix, constant diagonal, or the conformal round-sphere /
  hyperbolic-disk charts (curvature +1 / -1).
* Randers     F = alpha + beta, Riemannian alpha plus a 1-form beta(x).
* Locally Minkowski  any y-only norm; the default is the perturbed quartic
  F = (|y|^4 + c * sum_i y_i^4)^(1/4).
* Custom      a closed-form expression for F over x1.., y1.. .

Nothing is assumed about a family beyond its formula: homogeneity, positivity
and strong convexity are validated numerically by `validate_structure`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import jets
from .errors import (
    ConfigError,
    DomainError,
    NumericError,
    StructureInvalidError,
)
from .expressions import compile_field
from .jets import BasePoint, Jet, MultiIndex, jet_space, taylor_eval
from .report import CheckReport, CheckRow
from .tolerances import Tolerances

EPS_PD = 1e-10  # minimum eigenvalue below which g counts as degenerate


@dataclass(frozen=True)
class FinslerStructure:
    """A Finsler norm together with its chart dimension and domain predicate.

    `F` takes sequences (x, y) whose entries are floats or jets and returns a
    scalar of the same kind.  `domain` takes plain coordinate arrays.
    """

    n: int
    F: Callable
    domain: Callable[[np.ndarray, np.ndarray], bool]
    family_tag: str
    params: dict = field(default_factory=dict)
    label: str = ""

    def in_domain(self, p: BasePoint) -> bool:
        return bool(self.domain(p.x, p.y))

    def value(self, p: BasePoint) -> float:
        if not self.in_domain(p):
            raise DomainError(f"{p} outside the domain of {self.label or self.family_tag}")
        return float(self.F(p.x, p.y))

    def f_squared(self):
        fn = self.F

        def f2(x, y):
            v = fn(x, y)
            return v * v

        return f2


@dataclass(frozen=True)
class MetricTensor:
    """Fundamental tensor g_ij at one base point."""

    matrix: np.ndarray
    base: BasePoint

    @property
    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.matrix)[0])


@dataclass(frozen=True)
class TensorBlock:
    """An indexed multi-array with declared valence and symmetry notes.

    `valence` uses "u"/"d" per slot.  `jets`, when present, holds the
    jet-valued components so the block can be differentiated further.
    """

    components: np.ndarray
    valence: tuple
    base: BasePoint
    symmetries: tuple = ()
    jets: np.ndarray | None = None

    @property
    def sup(self) -> float:
        return float(np.abs(self.components).max())


# --------------------------------------------------------------------------
# family builders
# --------------------------------------------------------------------------

def _whole_chart(x, y):
    return True


def _quadratic_form(a_entries, y):
    n = len(y)
    acc = None
    for i in range(n):
        for j in range(n):
            aij = a_entries[i][j]
            if isinstance(aij, float) and aij == 0.0:
                continue
            term = aij * (y[i] * y[j])
            acc = term if acc is None else acc + term
    return acc


def _riemannian_base(n: int, kind: str, data=None):
    """Return (a_fn, params) with a_fn(x) -> nested list of scalar-like entries."""
    if kind == "euclidean":
        mat = np.eye(n)
        return (lambda x: mat.tolist()), {"kind": "euclidean"}
    if kind == "constant":
        mat = np.asarray(data, dtype=float)
        if mat.shape != (n, n) or not np.allclose(mat, mat.T):
            raise ConfigError("constant base metric must be a symmetric n x n matrix")
        if np.linalg.eigvalsh(mat)[0] <= 0:
            raise ConfigError("constant base metric must be positive-definite")
        lst = mat.tolist()
        return (lambda x: lst), {"kind": "constant", "matrix": lst}
    if kind == "diagonal":
        diag = [float(d) for d in data]
        if len(diag) != n or any(d <= 0 for d in diag):
            raise ConfigError("diagonal entries must be n positive numbers")
        lst = np.diag(diag).tolist()
        return (lambda x: lst), {"kind": "diagonal", "entries": diag}
    if kind in ("sphere", "hyperbolic"):
        sign = 1.0 if kind == "sphere" else -1.0

        def a_fn(x):
            r2 = x[0] * x[0]
            for xi in x[1:]:
                r2 = r2 + xi * xi
            s = 2.0 / (1.0 + sign * r2)
            s2 = s * s
            return [[s2 if i == j else 0.0 for j in range(n)] for i in range(n)]

        return a_fn, {"kind": kind}
    raise ConfigError(f"unknown Riemannian base kind {kind!r}")


def riemannian(n: int, kind: str = "euclidean", data=None) -> FinslerStructure:
    a_fn, params = _riemannian_base(n, kind, data)

    def F(x, y):
        return jets.sqrt(_quadratic_form(a_fn(x), y))

    if kind == "hyperbolic":
        def domain(x, y):
            return float(np.dot(x, x)) < 0.95 ** 2
    elif kind == "sphere":
        def domain(x, y):
            return float(np.dot(x, x)) < 36.0
    else:
        domain = _whole_chart

    return FinslerStructure(n, F, domain, "riemannian", params, f"riemannian[{kind}]")


def euclidean(n: int) -> FinslerStructure:
    return riemannian(n, "euclidean")


def sphere_chart(n: int) -> FinslerStructure:
    """Round sphere of curvature +1 in a single stereographic chart."""
    return riemannian(n, "sphere")


def hyperbolic_chart(n: int) -> FinslerStructure:
    """Hyperbolic space of curvature -1 in the conformal disk chart."""
    return riemannian(n, "hyperbolic")


def randers(n: int, a_kind: str = "euclidean", a_data=None,
            b=None, b_expressions=None) -> FinslerStructure:
    """Randers norm F = sqrt(a_ij y^i y^j) + b_i(x) y^i.

    `b` gives constant 1-form coefficients; `b_expressions` gives them as
    expression strings over x1..xn.  Strong convexity (|b|_a < 1) is not
    assumed here; validate_structure discovers violations.
    """
    a_fn, a_params = _riemannian_base(n, a_kind, a_data)
    if (b is None) == (b_expressions is None):
        raise ConfigError("provide exactly one of b= (constants) or b_expressions=")
    if b is not None:
        coeffs = [float(v) for v in b]
        if len(coeffs) != n:
            raise ConfigError("b must have n entries")

        def b_fn(x):
            return coeffs

        b_params = {"kind": "constant", "entries": coeffs}
    else:
        if len(b_expressions) != n:
            raise ConfigError("b_expressions must have n entries")
        compiled = [compile_field(src, n) for src in b_expressions]
        for c in compiled:
            if c.used_y:
                raise ConfigError("1-form coefficients may depend on x only")

        def b_fn(x):
            return [c(x, None) for c in compiled]

        b_params = {"kind": "expressions", "entries": list(b_expressions)}

    def F(x, y):
        alpha = jets.sqrt(_quadratic_form(a_fn(x), y))
        bs = b_fn(x)
        beta = bs[0] * y[0]
        for i in range(1, n):
            beta = beta + bs[i] * y[i]
        return alpha + beta

    params = {"a": a_params, "b": b_params}
    return FinslerStructure(n, F, _whole_chart, "randers", params, "randers")


def perturbed_quartic(n: int, c: float = 0.1) -> FinslerStructure:
    """Locally Minkowski norm F = (|y|^4 + c * sum y_i^4)^(1/4)."""
    if c < 0:
        raise ConfigError("quartic perturbation c must be nonnegative")

    def F(x, y):
        q = y[0] * y[0]
        for yi in y[1:]:
            q = q + yi * yi
        quart = y[0] ** 4
        for yi in y[1:]:
            quart = quart + yi ** 4
        return jets.power(q * q + c * quart, 0.25)

    return FinslerStructure(n, F, _whole_chart, "perturbed_quartic", {"c": float(c)},
                            "perturbed quartic")


def minkowski_custom(n: int, expression: str) -> FinslerStructure:
    """Locally Minkowski norm from a y-only expression."""
    fld = compile_field(expression, n)
    if fld.used_x:
        raise ConfigError("a locally Minkowski norm must not reference x variables")
    return FinslerStructure(n, fld, _whole_chart, "locally_minkowski",
                            {"expression": expression}, "locally Minkowski")


def custom(n: int, expression: str) -> FinslerStructure:
    fld = compile_field(expression, n)
    return FinslerStructure(n, fld, _whole_chart, "custom",
                            {"expression": expression}, "custom")


# --------------------------------------------------------------------------
# pointwise tensors
# --------------------------------------------------------------------------

def evaluate_F(structure: FinslerStructure, p: BasePoint) -> float:
    v = structure.value(p)
    if not np.isfinite(v):
        raise NumericError("F evaluated to a non-finite value")
    return v


def _f2_jet(structure: FinslerStructure, p: BasePoint, x_order: int, y_order: int) -> Jet:
    if not structure.in_domain(p):
        raise DomainError(f"{p} outside the structure's domain")
    return taylor_eval(structure.f_squared(), p, x_order, y_order)


def fundamental_tensor(structure: FinslerStructure, p: BasePoint) -> MetricTensor:
    """g_ij = 1/2 d^2 F^2 / dy^i dy^j, checked for positive-definiteness."""
    n = structure.n
    j = _f2_jet(structure, p, 0, 2)
    g = np.empty((n, n))
    for i in range(n):
        for k in range(i, n):
            beta = [0] * n
            beta[i] += 1
            beta[k] += 1
            g[i, k] = g[k, i] = 0.5 * j.partial((0,) * n, tuple(beta))
    if np.linalg.eigvalsh(g)[0] <= EPS_PD:
        raise StructureInvalidError(
            f"fundamental tensor not positive-definite at {p} (min eig "
            f"{np.linalg.eigvalsh(g)[0]:.3e})"
        )
    return MetricTensor(g, p)


def inverse_metric(g: MetricTensor | np.ndarray) -> np.ndarray:
    mat = g.matrix if isinstance(g, MetricTensor) else np.asarray(g, float)
    try:
        inv = np.linalg.inv(mat)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"singular fundamental tensor: {exc}") from exc
    if np.abs(mat @ inv - np.eye(mat.shape[0])).max() > 1e-10:
        raise NumericError("fundamental tensor too ill-conditioned to invert")
    return inv


def cartan_tensor(structure: FinslerStructure, p: BasePoint) -> TensorBlock:
    """Totally symmetric Cartan tensor A_ijk = (F/4) d^3 F^2 / dy^i dy^j dy^k."""
    n = structure.n
    j = _f2_jet(structure, p, 0, 3)
    Fv = evaluate_F(structure, p)
    A = np.empty((n, n, n))
    for i in range(n):
        for k in range(i, n):
            for l in range(k, n):
                beta = [0] * n
                beta[i] += 1
                beta[k] += 1
                beta[l] += 1
                v = 0.25 * Fv * j.partial((0,) * n, tuple(beta))
                for perm in ((i, k, l), (i, l, k), (k, i, l), (k, l, i), (l, i, k), (l, k, i)):
                    A[perm] = v
    return TensorBlock(A, ("d", "d", "d"), p, ("totally symmetric",))


def distinguished_section(structure: FinslerStructure, p: BasePoint):
    """Unit fiber direction l^i = y^i / F and its lowered form l_i = g_ij l^j."""
    Fv = evaluate_F(structure, p)
    l_up = p.y / Fv
    g = fundamental_tensor(structure, p).matrix
    return l_up, g @ l_up


# --------------------------------------------------------------------------
# axiom validation
# --------------------------------------------------------------------------

_HOMOGENEITY_SCALES = (0.5, 2.0, 3.0)


def validate_structure(structure: FinslerStructure, samples,
                       tolerances: Tolerances | None = None) -> CheckReport:
    """Numerical audit of the norm axioms over a sample of base points.

    Reports max residuals for positivity of F, degree-1 homogeneity in y,
    positive-definiteness of g, the quadratic-form identity g_ij y^i y^j = F^2,
    and the fiber-annihilation identity A_ijk y^k = 0.  Failures become FAIL
    verdicts, not exceptions.
    """
    samples = list(samples)
    if not samples:
        raise ConfigError("validate_structure needs at least one sample point")
    tol = tolerances or Tolerances()

    worst = {key: (0.0, None) for key in
             ("positivity", "homogeneity", "positive_definite", "euler",
              "cartan_annihilation")}
    note = {}

    def bump(key, value, idx):
        if value > worst[key][0]:
            worst[key] = (value, idx)

    n = structure.n
    for idx, p in enumerate(samples):
        try:
            Fv = float(structure.F(p.x, p.y))
        except (DomainError, NumericError):
            bump("positivity", np.inf, idx)
            continue
        bump("positivity", max(0.0, -Fv) + (0.0 if Fv > 0 else 1.0), idx)

        for lam in _HOMOGENEITY_SCALES:
            try:
                Fl = float(structure.F(p.x, lam * p.y))
            except (DomainError, NumericError):
                bump("homogeneity", np.inf, idx)
                continue
            denom = max(abs(lam * Fv), 1e-300)
            bump("homogeneity", abs(Fl - lam * Fv) / denom, idx)

        try:
            j3 = _f2_jet(structure, p, 0, 3)
        except (DomainError, NumericError):
            bump("positive_definite", np.inf, idx)
            continue
        g = np.empty((n, n))
        third = np.empty((n, n, n))
        for i in range(n):
            for k in range(n):
                beta = [0] * n
                beta[i] += 1
                beta[k] += 1
                g[i, k] = 0.5 * j3.partial((0,) * n, tuple(beta))
                for l in range(n):
                    b3 = list(beta)
                    b3[l] += 1
                    third[i, k, l] = j3.partial((0,) * n, tuple(b3))
        min_eig = float(np.linalg.eigvalsh(g)[0])
        bump("positive_definite", max(0.0, EPS_PD - min_eig), idx)

        f2 = Fv * Fv
        bump("euler", abs(float(p.y @ g @ p.y) - f2) / max(abs(f2), 1e-300), idx)

        A = 0.25 * Fv * third
        bump("cartan_annihilation", float(np.abs(A @ p.y).max()), idx)

    tols = {
        "positivity": tol.positivity,
        "homogeneity": tol.homogeneity,
        "positive_definite": EPS_PD,
        "euler": tol.euler,
        "cartan_annihilation": tol.cartan_annihilation,
    }
    rows = []
    for key, (residual, idx) in worst.items():
        if key == "positive_definite":
            ok = residual == 0.0
        else:
            ok = residual < tols[key]
        rows.append(CheckRow(
            name=f"validate.{key}",
            residual=float(residual),
            tol=tols[key],
            verdict="PASS" if ok else "FAIL",
            worst_sample=idx,
            note=note.get(key, ""),
        ))
    return CheckReport.single_section("validate", rows, len(samples))
