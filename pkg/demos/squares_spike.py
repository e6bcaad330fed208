# coding: utf-8

# # Spikes on the perfect squares
#
# A_k is the single point (k, 0) when k is a perfect square and the origin
# otherwise.  Seen from the origin the distance jumps to k on the squares,
# so the sequence does not converge, yet the squares are so sparse that it
# converges statistically.

# In[1]:

import math

import numpy as np

from wijsum import Ideal, Mode, SetSequence, Singleton, ideal_verdict, statistical_density, trace


# In[2]:

def spike(k):
    return Singleton((float(k), 0.0) if math.isqrt(k) ** 2 == k else (0.0, 0.0))

seq = SetSequence("spikes at squares", spike)
tr = trace(seq, [(0.0, 0.0)], 10_000, Singleton((0.0, 0.0)))
tr.values[0, :20]


# The share of indices up to N where the deviation reaches eps is sqrt(N) / N.

# In[3]:

dens = statistical_density(tr, 0.5)
for N in (100, 1000, 10_000):
    print(N, dens.values[0, N - 1], dens.counts[0, N - 1])


# Ordinary convergence fails (the exceptional set is infinite), but the
# exceptional set has density zero.

# In[4]:

for I in (Ideal.fin(), Ideal.density_zero()):
    v = ideal_verdict(Mode.ICONV, tr, None, I, eps=0.5)
    print(I.name, v.statuses[0].value, v.estimates[0].window_density)


# The Cesaro means do not settle though: the spikes are large enough that
# their sum up to N grows like N^(3/2) / 3.

# In[5]:

from wijsum import c1

means = c1(tr).values[0]
print(means[[99, 999, 9999]])
print(np.sqrt([100, 1000, 10_000]) / 3)
