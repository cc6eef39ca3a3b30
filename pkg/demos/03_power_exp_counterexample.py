# coding: utf-8

# # The family exp(-x^2 / t^(1/3)) dt
#
# Every log-derivative is a multiple of x t^(-1/3), so small moments are fine
# while the measures themselves sit in different exponential classes.

# In[1]:

import numpy as np
from scipy.special import exp1

from infogeom import models as M
from infogeom import orlicz as O
from infogeom.spaces import lebesgue

pe = M.power_exp(3)
axes = [np.linspace(-1, 1, 21)]


# Second moments against a closed form in the exponential integral.

# In[2]:

rep = M.check_k_integrability(pe, 2, axes=axes)
for x, v in zip(rep.lattice[::4, 0], rep.integrals[::4, 0]):
    closed = 0.0 if x == 0 else 12 * x**2 * np.exp(-x**2) - 12 * x**4 * exp1(x**2)
    print(f"x={x: .1f}  I2={v:.12f}  closed={closed:.12f}")
print(rep.verdict)


# Higher moments: the L^k norm still vanishes at x = 0, but for k = 6 it jumps
# from 0 to about 384^(1/6) next to the origin.

# In[3]:

for k in (3, 4, 6):
    r = M.check_k_integrability(pe, k, axes=axes)
    print(k, r.verdict, round(r.max_jump, 3), r.point)


# Lebesgue measure is not dominated by p(1); p(0.5) and p(1) are similar.

# In[4]:

p = {x: M.density_at(pe, [x]) for x in (0.5, 1.0)}
print(O.preceq(lebesgue(pe.space), p[1.0]).status)
print(O.similar(p[0.5], p[1.0]).witness)
