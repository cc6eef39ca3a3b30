# coding: utf-8

# # Natural gradient descent
#
# Fit a Bernoulli model to the target (0.7, 0.3) by preconditioning the KL
# gradient with the inverse Fisher form.

# In[1]:

import numpy as np

from infogeom import models as M
from infogeom import natgrad as N

b = M.bernoulli()
cfg = N.NatGradConfig(eta=0.5, max_iter=200, objective=N.KLObjective([0.7, 0.3]))
traj = N.descend(b, [0.2], cfg)
print(traj.to_dict())


# In[2]:

print(traj.to_csv().splitlines()[:6])


# The direction does not depend on the chart: pull the gradient back through the
# logistic map, solve there, and push the result forward again.

# In[3]:

f = lambda y: 1 / (1 + np.exp(-np.asarray(y, dtype=float)))
logistic = M.reparametrize(b, f, [(-20, 20)])
y = np.array([0.4])
J = M.jacobian_fd(f, y)
g = np.array([1.0])
print(J @ N.natural_direction(logistic, y, J.T @ g, rho=0.0), N.natural_direction(b, f(y), g, rho=0.0))
