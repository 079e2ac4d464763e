"""
Deficit and variances of a polygon
==================================

The isoperimetric deficit of an n-gon compares its perimeter with the area
of the regular n-gon of the same perimeter: ``delta = L^2 - 4 n tan(pi/n) F``.
It vanishes only for regular polygons. Two variances measure how far a
polygon is from regular: the side-length variance and the variance of the
distances from the vertex centroid to the vertices.
"""
# %%
import numpy as np

import polystab as ps

rect = ps.validate([(0, 0), (2, 0), (2, 1), (0, 1)])
m = ps.metrics(rect)
print(f"rectangle: L={m.L:g} F={m.F:g} delta={m.delta:g} "
      f"sigma_s^2={m.sigma_s2:g} sigma_r^2={m.sigma_r2:.1e}")

# %%
# A regular polygon has zero deficit wherever it sits and however large it is.
hexagon = ps.regular_polygon(6, radius=3.0, phase=0.4, center=(5, -2))
print("regular hexagon delta:", ps.metrics(hexagon).delta)

# %%
# Perturbing one vertex makes the deficit positive, and it grows roughly
# quadratically with the size of the perturbation.
for eps in (1e-1, 1e-2, 1e-3):
    v = ps.regular_polygon(6).vertices.copy()
    v[0] *= 1 + eps
    print(f"eps={eps:.0e}  delta/eps^2={ps.metrics(ps.validate(v)).delta / eps**2:.4f}")

# %%
# The same polygon in angular/radial coordinates: central angles between
# consecutive radii and the radii themselves, measured from the vertex centroid.
z = ps.to_angular_radial(rect)
print("angles:", np.round(z.x, 4), "radii:", np.round(z.r, 4))
