"""
Classifying OA(96, a, 2, 4) and OA(112, a, 2, 4) column by column
==================================================================

Each level extends every class on a columns by one new column and merges
the results by canonical form. An empty level ends the chain.
"""

# %%
import time

from binoa.solver import classify_chain, feasible

for lam in (6, 7):
    t0 = time.monotonic()
    chain = classify_chain(8 if lam == 6 else 7, 4, lam)
    print(f"N={16 * lam}:", " ".join(f"a={c.factors}:{len(c)}" for c in chain),
          f"({time.monotonic() - t0:.1f}s)")

# %%
# The same nonexistence answer from the other route: one search over all
# 2^7 run counts at once.
r = feasible(7, 4, 7, method="direct")
print(r.status.value, r.pmax, r.nodes)
