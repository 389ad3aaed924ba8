#!/usr/bin/env python3
"""Generate frozen reference tensors with an independent symbolic implementation.

Everything here is derived with sympy from the norm alone — no code is shared
with the package's Taylor engine — so the printed arrays are an external
ground truth for the connection/curvature pipeline.  The output is pasted
into tests/reference_data.py.

Usage: python3 tools/gen_symbolic_reference.py
"""

import numpy as np
import sympy as sp


def main():
    x1, x2, y1, y2 = sp.symbols("x1 x2 y1 y2", real=True)
    xs = [x1, x2]
    ys = [y1, y2]
    n = 2

    # non-Berwald Randers norm: Euclidean alpha, x-dependent 1-form
    F = sp.sqrt(y1 ** 2 + y2 ** 2) + (sp.Rational(1, 5) + sp.sin(x2) / 10) * y1 \
        + x1 * y2 / 10
    F2 = F ** 2

    g = sp.Matrix(n, n, lambda i, j: sp.diff(F2, ys[i], ys[j]) / 2)
    ginv = g.inv()

    # Cartan tensor A_ijk = (F/4) d^3 F^2 / dy_i dy_j dy_k
    A = [[[sp.diff(F2, ys[i], ys[j], ys[k]) * F / 4
           for k in range(n)] for j in range(n)] for i in range(n)]

    # nonlinear connection from the spray quadratic form
    bracket_yy = [
        sum((sp.diff(g[s, k], xs[j]) + sp.diff(g[s, j], xs[k])
             - sp.diff(g[k, j], xs[s])) * ys[j] * ys[k]
            for j in range(n) for k in range(n))
        for s in range(n)
    ]
    spray = [sum(ginv[i, s] * bracket_yy[s] for s in range(n)) for i in range(n)]
    N = [[sp.diff(spray[i], ys[m]) / 4 for m in range(n)] for i in range(n)]

    def hderiv(expr, k):
        return sp.diff(expr, xs[k]) - sum(N[m][k] * sp.diff(expr, ys[m])
                                          for m in range(n))

    Gamma = [[[sp.simplify(0) for _ in range(n)] for _ in range(n)] for _ in range(n)]
    for i in range(n):
        for j in range(n):
            for k in range(n):
                Gamma[i][j][k] = sum(
                    ginv[i, s] * (hderiv(g[s, j], k) - hderiv(g[j, k], s)
                                  + hderiv(g[k, s], j))
                    for s in range(n)) / 2

    GammaV = [[[[sp.diff(Gamma[i][j][k], ys[h]) for h in range(n)]
                for k in range(n)] for j in range(n)] for i in range(n)]

    R4 = [[[[hderiv(Gamma[i][j][l], k) - hderiv(Gamma[i][j][k], l)
             + sum(Gamma[i][h][k] * Gamma[h][j][l]
                   - Gamma[i][h][l] * Gamma[h][j][k] for h in range(n))
             for l in range(n)] for k in range(n)] for j in range(n)]
          for i in range(n)]

    P4 = [[[[-F * GammaV[i][j][k][l] for l in range(n)] for k in range(n)]
           for j in range(n)] for i in range(n)]

    point = (0.4, -0.3, 0.9, 0.7)

    def ev(expr):
        fn = sp.lambdify((x1, x2, y1, y2), expr, modules="numpy")
        return float(fn(*point))

    def dump(name, obj, shape):
        arr = np.empty(shape)
        for idx in np.ndindex(shape):
            e = obj
            for k in idx:
                e = e[k]
            arr[idx] = ev(e)
        flat = ", ".join(repr(v) for v in arr.ravel())
        print(f'    "{name}": _np.array([{flat}]).reshape{shape},')

    print("# generated by tools/gen_symbolic_reference.py -- do not edit by hand")
    print("import numpy as _np")
    print()
    print("POINT_X = [0.4, -0.3]")
    print("POINT_Y = [0.9, 0.7]")
    print('B_EXPRESSIONS = ["0.2 + 0.1*sin(x2)", "0.1*x1"]')
    print()
    print("RANDERS_REFERENCE = {")
    dump("F", [F], (1,))
    dump("g", g.tolist(), (n, n))
    dump("g_inv", ginv.tolist(), (n, n))
    dump("cartan", A, (n, n, n))
    dump("nonlinear", N, (n, n))
    dump("gamma", Gamma, (n, n, n))
    dump("gamma_vertical", GammaV, (n, n, n, n))
    dump("hh", R4, (n, n, n, n))
    dump("hv", P4, (n, n, n, n))
    print("}")


if __name__ == "__main__":
    main()
