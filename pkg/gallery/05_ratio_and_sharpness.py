"""
The ratio f/g and an empirical stability constant
=================================================

On the manifold of angular/radial coordinates the ratio ``f/g`` is bounded;
its supremum controls the constant in the stability inequality. The bound is
estimated by multi-start ascent, so every value here is empirical. Near the
regular polygon both ``f`` and ``g`` vanish quadratically, and the ratio
tends to a limit given by a generalised eigenvalue problem.
"""
# %%
import math

from polystab import manifold as mf

for n in (3, 4, 6):
    est = mf.estimate_ratio_sup(n, restarts=4, seed=0)
    c = mf.combine_constants(n, est.sup_ratio)
    print(f"n={n}: sup f/g ~ {est.sup_ratio:.4f} (limit at regular polygon "
          f"{est.limit_at_star:.4f} = 1/sin^2(pi/n) = {1 / math.sin(math.pi / n) ** 2:.4f}); "
          f"C_theorem = {c.C_theorem:.4f}")

# %%
# Along a tangent direction ``w`` both ``f(z*+eps w)/eps^2`` and
# ``g(z*+eps w)/eps^2`` converge to half the Hessian quadratic forms.
limit, w = mf.limit_ratio_at_star(6)
curve = mf.scaling_curve(6, w)
for e, fe, ge, r in zip(curve.eps, curve.f_error, curve.g_error, curve.ratio):
    print(f"eps={e:.0e}  f err={fe:.2e}  g err={ge:.2e}  f/g={r:.6f}")
print("limit:", limit)
