# coding: utf-8

# # Circles that flatten onto a line
#
# A_k is the circle of radius k centred at (k, 0).  Every circle passes
# through the origin, and as k grows the piece near any fixed point looks
# more and more like the vertical axis x1 = 0.  Here we watch that happen
# through distances from a few probe points.

# In[1]:

from wijsum import Hyperplane, SetSequence, Sphere, c_lambda, lambda_from_expr, trace


# In[2]:

circles = SetSequence("Sphere((k,0), k)", lambda k: Sphere((float(k), 0.0), float(k)))
axis = Hyperplane((1.0, 0.0), 0.0)
probes = [(2.0, 1.0), (0.0, 3.0), (-1.0, 2.0)]

tr = trace(circles, probes, 10_000, axis)
print("target distances:", tr.target_row)


# The deviation |d(x, A_k) - d(x, axis)| shrinks roughly like b^2 / (2k)
# for a probe at height b.

# In[3]:

dev = tr.deviations()
for k in (10, 100, 1000, 5000, 10_000):
    print(k, dev[:, k - 1])


# In[4]:

print("worst deviation for k >= 5000:", dev[:, 4999:].max())


# Averages converge too, and more slowly on sparse subsequences: the C_lambda
# mean with lambda(n) = n^2 only looks at the prefixes 1, 4, 9, ...

# In[5]:

lam = lambda_from_expr("n^2")
cl = c_lambda(tr, lam)
print("last C_lambda means:", cl.values[:, -1])
print("lambda(n) used:", cl.upper[-3:])
