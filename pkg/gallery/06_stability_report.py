"""
Checking the stability inequality on random polygons
====================================================

For a simple polygon the area gained by convexification plus the two
variances is bounded by a constant times the deficit:
``tau + sigma_s^2 + sigma_r^2 <= C delta``. This script builds the same
report the ``polystab analyze`` command prints, for a few random polygons.
"""
# %%
from polystab import cli
from polystab import manifold as mf
from polystab import polygon as pg

n = 7
C = mf.combine_constants(n, mf.estimate_ratio_sup(n, restarts=4, seed=0).sup_ratio).C_theorem
for P in pg.random_corpus(n, 5, seed=11):
    rep = cli.stability_report(P, C)
    chk = rep["inequality_check"]
    print(f"tau={rep['tau']:.4f}  lhs={chk['lhs']:.4f}  rhs={chk['rhs']:.4f}  ok={chk['satisfied']}")
