"""Independent reference computations shared by several test modules."""
import sympy as sp


def simpson_series_oracle(n_terms):
    """Taylor coefficients of the Simpson-closure solution with u(0) = 1.

    Substitutes a truncated power series into
    ``u' = (t/6)(u(0) + 4 u(t/2) + u(t))`` and solves the equations for the
    coefficients of ``t^0 .. t^(n_terms-1)`` symbolically.
    """
    t = sp.symbols("t")
    a = sp.symbols(f"a1:{n_terms + 1}")
    u = 1 + sum(a[k - 1] * t**k for k in range(1, n_terms + 1))
    residual = sp.expand(sp.diff(u, t) - t / 6 * (u.subs(t, 0) + 4 * u.subs(t, t / 2) + u))
    eqs = [residual.coeff(t, k) for k in range(n_terms)]
    sol = sp.solve(eqs, a, dict=True)[0]
    return [sp.Integer(1)] + [sp.Rational(sol[ak]) for ak in a]
