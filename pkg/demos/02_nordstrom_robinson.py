"""
The Nordstrom-Robinson array
============================

Gray image of the octacode: 256 distinct rows on 16 columns, strength 5.
"""

# %%
from binoa import BooleanFunction, ci_order, delete_columns, is_simple, nordstrom_robinson, verify_strength, weight

nr = nordstrom_robinson()
rep = verify_strength(nr, 5)
print(nr.N, nr.n, rep.ok, rep.index, is_simple(nr))

# %%
# Keep the first k columns. Each cut is still simple, so its indicator is a
# correlation-immune function of weight 256.
for k in range(16, 10, -1):
    cut = delete_columns(nr, range(k, 16))
    f = BooleanFunction.from_support(cut)
    print(k, weight(f), ci_order(f), is_simple(cut))
