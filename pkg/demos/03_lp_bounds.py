"""
Linear programming bounds in exact arithmetic
=============================================
"""

# %%
from binoa import delsarte_min_runs, lp_max_multiplicity_bound
from binoa.model import build_constraints, rank

# Delsarte's bound on the number of runs, strength 4.
for n in range(5, 13):
    d = delsarte_min_runs(n, 4)
    print(n, d.lp_value, d.min_lambda, d.min_runs)

# %%
# How often can a single run repeat? The LP relaxation of the balance
# system answers this for every run at once (all runs are equivalent).
for n, lam in ((8, 6), (7, 7)):
    b = lp_max_multiplicity_bound(n, 4, lam)
    cs = build_constraints(n, 4, lam)
    print(f"OA({16 * lam},{n},2,4): {len(cs.rows)} rows, rank {rank(cs)}, LP {b.lp_value}, pmax {b.pmax}")
