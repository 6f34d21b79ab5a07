"""Inverting the Kummer ratio: closed-form estimators against Newton.

For a Watson distribution on S^{p-1} the MLE of kappa solves
g(0.5, p/2, kappa) = r, where r is the top (or bottom) eigenvalue of the
scatter matrix. This script compares the three closed-form estimators
L, B, U and the older BBG approximation with the Newton solution, and
shows that L < B < kappa < U below a/c and L < kappa < B < U above it.

Run: python3 demos/01_kappa_estimators.py
"""

from watsonmle import bbg, bound_B, bound_L, bound_U, estimate_combined, kummer_ratio, solve_newton

a, c = 0.5, 50.0  # p = 100
print(f"a = {a}, c = {c}, a/c = {a / c}")
print(f"{'r':>8} {'kappa':>12} {'L':>12} {'B':>12} {'U':>12} {'BBG':>12}  ordering holds")
for r in (0.001, 0.005, 0.02, 0.1, 0.3, 0.6, 0.9, 0.99):
    k = solve_newton(a, c, r).kappa
    L, B, U = bound_L(a, c, r), bound_B(a, c, r), bound_U(a, c, r)
    ok = (L < B < k < U) if r < a / c else (L < k < B < U)
    print(f"{r:8.3f} {k:12.4f} {L:12.4f} {B:12.4f} {U:12.4f} {bbg(a, c, r):12.4f}  {ok}")

# Round trip: kappa -> r -> kappa
print("\nround trip and relative error of the Combined estimator")
for kappa in (-500.0, -20.0, 3.0, 80.0, 2000.0):
    r = kummer_ratio(a, c, kappa)
    rep = solve_newton(a, c, r)
    comb = estimate_combined(a, c, r).kappa
    print(f"kappa* = {kappa:8.1f}  r = {r:.6f}  Newton = {rep.kappa:12.6f} "
          f"({rep.iterations} iterations)  Combined error = {abs(comb / kappa - 1):.2%}")

# Large concentration: pass bigger series controls
from watsonmle import EvalControls, kappa_asymptotic  # noqa: E402

r = 1 - 1e-6
rep = solve_newton(a, 5.0, r, eval_controls=EvalControls(max_terms=2_000_000))
approx = kappa_asymptotic(a, 5.0, r, "One")
print(f"\nr = 1 - 1e-6, c = 5: Newton {rep.kappa:.6e} in {rep.iterations} iterations, "
      f"expansion about r = 1 {approx:.6e}, relative gap {abs(rep.kappa / approx - 1):.1e}")
