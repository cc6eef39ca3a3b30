# coding: utf-8

# # Statistics, sufficiency and invariance
#
# Lumping atoms 2 and 3 of p(x) = (x, (1-x)/2, (1-x)/2) loses nothing: the
# within-class conditional does not move with x.  Lumping atoms 1 and 2 of
# p(x) = (x, x^2, 1-x-x^2) does lose Fisher information.

# In[1]:

import numpy as np

from infogeom import chentsov as C
from infogeom import markov as K
from infogeom import models as M
from infogeom.spaces import Finite, Statistic

lumped = M.expression_model(["x1", "(1-x1)/2", "(1-x1)/2"], Finite(3), [(0, 1)])
quadratic = M.expression_model(["x1", "x1^2", "1-x1-x1^2"], Finite(3), [(0, 0.6)])
k23 = Statistic.partition(Finite(3), [[0], [1, 2]])
k12 = Statistic.partition(Finite(3), [[0, 1], [2]])


# In[2]:

print(K.check_sufficiency(lumped, k23).to_dict())
print(K.check_sufficiency(quadratic, k12).to_dict())


# Tensors are unchanged by a sufficient statistic.

# In[3]:

print(C.invariance_report(lumped, k23).to_dict()["deviations"])


# For the insufficient statistic the Fisher form drops, and the drop is the
# information lost inside the fibres.

# In[4]:

for x in (0.1, 0.3, 0.5):
    loss = C.information_loss(quadratic, k12, [x], [1.0])
    print(f"x={x}  gap={loss.fisher - loss.fisher_push:.12f}  loss={loss.loss:.12f}  residual={loss.residual:.1e}")


# A Markov kernel factors through a lift on the product space.

# In[5]:

P = K.MarkovKernel([[0.2, 0.3, 0.5], [0.6, 0.2, 0.2]])
dec = K.decompose_markov_morphism(M.bernoulli(), P, K.finite_measure(3, [1 / 3] * 3))
print(dec.to_dict())
