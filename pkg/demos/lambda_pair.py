# coding: utf-8

# # Two index sequences, n^2 and n^3
#
# Both have step ratios lambda(n+1)/lambda(n) tending to 1, but n^3 / n^2
# is unbounded, so the two submethods need not agree.  We estimate the ratio
# conditions on a finite window and look at the T and R matrices.

# In[1]:

from wijsum.index_methods import (
    Quantity,
    lambda_from_expr,
    r_abs_row_sum,
    r_rows,
    ratio_condition,
    regularity_report,
    t_rows,
)

lam, mu = lambda_from_expr("n^2"), lambda_from_expr("n^3")


# In[2]:

for q, m, comp in [
    (Quantity.LIMSUP_NEXT, lam, None),
    (Quantity.LIMSUP_NEXT, mu, None),
    (Quantity.LIM_COMPANION, lam, mu),
]:
    r = ratio_condition(m, q, 1000, comp)
    print(r.label, round(r.estimate, 5), r.verdict_hint.value, r.window)


# T turns block means into prefix means and is always a convex combination.
# R goes the other way; its absolute row sum is 1 + 2 / (ratio - 1), which
# blows up when the steps shrink.

# In[3]:

for n in (2, 10, 100):
    print(n, r_abs_row_sum(lam, n), r_abs_row_sum(lambda_from_expr("2^n"), n))


# The column test only asks that a fixed column's entry in the last row is
# below 1e-3.  For lambda(n) = n that entry is 1/N, so the horizon has to
# pass 1000 before plain Cesaro means look regular.

# In[4]:

for N in (200, 2000):
    for label in ("n", "n^2", "2^n"):
        m = lambda_from_expr(label)
        print(N, label, "T:", regularity_report(t_rows(m), N).verdict_hint,
              "R:", regularity_report(r_rows(m), N).verdict_hint)
