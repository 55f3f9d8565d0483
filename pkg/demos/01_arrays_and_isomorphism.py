"""
Binary orthogonal arrays and their isomorphism classes
======================================================

Rows are stored as integer words: bit j of a row is column j.
"""

# %%
import numpy as np

from binoa import (
    BinaryArray,
    IsoOp,
    canonical_form,
    delete_columns,
    derive,
    is_simple,
    verify_strength,
)

# The even-weight words of length 5 form an OA(16, 5, 2, 4).
even = BinaryArray(5, [w for w in range(32) if bin(w).count("1") % 2 == 0])
print(even.matrix()[:4])
print(verify_strength(even, 4))

# %%
# One flipped bit breaks the balance; the report names a bad projection.
broken = BinaryArray(5, np.r_[even.rows[:-1], even.rows[-1] ^ 1])
print(verify_strength(broken, 4))

# %%
# Relabel columns and flip levels: the canonical form does not move.
rng = np.random.default_rng(0)
g = IsoOp.random(5, rng)
print(g)
print(canonical_form(g.apply(even)) == canonical_form(even))

# %%
# Fixing column 0 to a value and dropping it halves the runs and lowers
# the strength by one. Deleting a column keeps strength 3 here (a
# 4-column array cannot have strength 4).
half = derive(even, 0, 1)
print(half.N, verify_strength(half, 3).ok, is_simple(half))
print(verify_strength(delete_columns(even, [4]), 3))
