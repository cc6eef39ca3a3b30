# coding: utf-8

# # Tensors on the Bernoulli family
#
# The Bernoulli model p(x) = (x, 1-x) is the smallest statistical model.
# Its Fisher form is 1/(x(1-x)) and its Amari-Chentsov tensor is 1/x^2 - 1/(1-x)^2.

# In[1]:

import numpy as np

from infogeom import models as M
from infogeom import tensors as T

b = M.bernoulli()
print(b)


# Exact derivative callbacks and central differences give the same numbers.

# In[2]:

for x in (0.1, 0.25, 0.5, 0.9):
    exact = T.fisher_form(b, [x], [1.0], [1.0]).value
    fd = T.fisher_form(b, [x], [1.0], [1.0], exact=False).value
    print(f"x={x:4}  fisher={exact:.10f}  fd={fd:.10f}  closed={1 / (x * (1 - x)):.10f}")


# In[3]:

for x in (0.1, 0.25, 0.5, 0.9):
    ac = T.ac_tensor(b, [x], [1.0], [1.0], [1.0]).value
    print(f"x={x:4}  ac={ac: .8f}  closed={1 / x**2 - 1 / (1 - x)**2: .8f}")


# The same family written as an expression in the 1-based atom variable w1.

# In[4]:

e = M.expression_model("x1^(2-w1)*(1-x1)^(w1-1)", M.Finite(2), [(0, 1)], statistical=True)
print(T.all_tensors(e, [0.25], [1.0]))


# Under the logistic chart the Fisher form picks up the squared Jacobian.

# In[5]:

logistic = M.reparametrize(b, ["1/(1+exp(-x1))"], [(-20, 20)])
y = 0.8
p = 1 / (1 + np.exp(-y))
print(T.fisher_matrix(logistic, [y]).value[0, 0], p * (1 - p))
