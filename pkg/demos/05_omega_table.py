"""
Minimum weights of correlation-immune functions
================================================

Bounds on ω(n, t) (and the run minimum F(n, t)) are closed under a few
rules; every entry keeps the chain of facts it came from.
"""

# %%
from binoa.bounds import omega_table, propagate, standard_knowledge_base

kb = propagate(standard_knowledge_base())
print(omega_table(kb, details=False))

# %%
print(kb.exact("omega", 11, 4).explain())

# %%
# ω(11,5) stays open between 192 and 256 with only the two exclusions on
# 11 columns. Add the exclusions on 8 and 7 columns and it closes.
print(kb.status("omega", 11, 5))
more = propagate(standard_knowledge_base(exclusions=((96, 8, 4), (112, 7, 4))))
print(more.status("omega", 11, 5))
