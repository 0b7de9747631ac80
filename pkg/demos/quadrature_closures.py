"""
Closing u' = int_0^t u with Newton-Cotes rules
==============================================

Replacing the integral by a one-panel rule over [0, t] gives a differential
equation with a delayed argument. The trapezoid closure has a closed form,
the Simpson closure a power series with rational coefficients.
"""

from fractions import Fraction

import numpy as np
from scipy.integrate import solve_ivp

from itersplit import simpson_closure_series, trapezoid_closure_exact

# trapezoid: u' = (t/2)(u0 + u)
u0 = 1.0
sol = solve_ivp(lambda t, u: t / 2 * (u0 + u), (0.0, 2.0), [u0], rtol=1e-12, atol=1e-13, dense_output=True)
for t in (0.5, 1.0, 2.0):
    print(f"t={t}: closed form {trapezoid_closure_exact(t, u0):.12f}, ODE solver {sol.sol(t)[0]:.12f}")

# Simpson: u' = (t/6)(u(0) + 4 u(t/2) + u(t)); odd coefficients vanish
a = simpson_closure_series(1, 12)
for k, ak in enumerate(a):
    print(f"a{k:<2} = {str(ak):>24}")
print("a4 / a2 =", a[4] / a[2])

# the truncated series against the exact solution cosh(t) of u'' = u
t = 1.0
approx = sum(float(ak) * t**k for k, ak in enumerate(a))
print(f"series at t=1: {approx:.10f}   cosh(1): {np.cosh(1.0):.10f}")
print("a2 for u'' = u would be", Fraction(1, 2), "and a4", Fraction(1, 24))
