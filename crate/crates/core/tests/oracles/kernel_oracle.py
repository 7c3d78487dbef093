"""Exact kernel constants by symbolic integration (sympy); frozen into kernel tests."""
import sympy as sp

u, s = sp.symbols("u s", real=True)

KERNELS = {
    "epanechnikov": (sp.Rational(3, 4) * (1 - u**2), 1),
    "rectangular": (sp.Rational(1, 2), 1),
    "triangular": (None, 1),
    "quartic": (sp.Rational(15, 16) * (1 - u**2) ** 2, 1),
}


def pieces(name):
    if name == "triangular":
        return [(1 + u, -1, 0), (1 - u, 0, 1)]
    k, a = KERNELS[name]
    return [(k, -a, a)]


for name in KERNELS:
    ps = pieces(name)
    mass = sum(sp.integrate(k, (u, lo, hi)) for k, lo, hi in ps)
    lam = sum(sp.integrate(k**2, (u, lo, hi)) for k, lo, hi in ps)
    psi = sum(sp.integrate(u**2 * k, (u, lo, hi)) for k, lo, hi in ps) / 2
    left = ps[0][0].subs(u, ps[0][1]) if hasattr(ps[0][0], "subs") else ps[0][0]
    right = ps[-1][0].subs(u, ps[-1][2]) if hasattr(ps[-1][0], "subs") else ps[-1][0]
    k1 = (sp.sympify(left) ** 2 + sp.sympify(right) ** 2) / (2 * lam)
    k2 = sum(sp.integrate(sp.diff(k, u) ** 2, (u, lo, hi)) for k, lo, hi in ps) / (2 * lam)
    print(name, "mass", mass, "lambda", lam, "psi", psi, "K1", k1, "K2", k2)

