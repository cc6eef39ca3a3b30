"""Canonical tensor fields evaluated pointwise: the 1-form A, the Fisher form,
the Amari–Chentsov 3-tensor and the n-th moment tensor."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations_with_replacement

import numpy as np

from .models import ParametrizedModel


@dataclass
class TensorValue:
    order: int
    value: object
    error: float
    x: list
    directions: list = field(default_factory=list)

    def __float__(self):
        return float(self.value)

    def to_dict(self):
        v = self.value
        return {
            "order": self.order,
            "value": v.tolist() if isinstance(v, np.ndarray) else float(v),
            "error": float(self.error),
            "x": list(self.x),
            "directions": [list(map(float, d)) for d in self.directions],
        }


def _products(m: ParametrizedModel, x, factor_sets, exact=True):
    """``∫ Π_k ∂_{V_k} ln p̄ dp(x)`` for each list of directions in ``factor_sets``.

    All products share one quadrature pass so matrix entries use identical nodes.
    """
    x = m.check_x(x)
    dirs = []
    index = []
    for fs in factor_sets:
        row = []
        for V in fs:
            V = np.atleast_1d(np.asarray(V, dtype=float))
            for j, D in enumerate(dirs):
                if np.array_equal(D, V):
                    row.append(j)
                    break
            else:
                dirs.append(V)
                row.append(len(dirs) - 1)
        index.append(row)

    def integrand(pts):
        d = m.dlog_many(x, dirs, pts, exact) if dirs else None
        out = []
        for row in index:
            prod = np.ones(d.shape[1]) if d is not None else 1.0
            for j in row:
                prod = prod * d[j]
            out.append(prod)
        return np.stack(out)

    res = m.quad(x, integrand)
    res.require("tensor integral")
    return np.atleast_1d(res.value), float(np.max(np.atleast_1d(res.error))), x


def _tv(order, vals, err, x, dirs):
    return TensorValue(order, float(vals[0]), err, x.tolist(), [np.atleast_1d(np.asarray(d, float)) for d in dirs])


def one_form_A(m, x, V, exact=True) -> TensorValue:
    vals, err, x = _products(m, x, [[V]], exact)
    return _tv(1, vals, err, x, [V])


def fisher_form(m, x, V, W, exact=True) -> TensorValue:
    vals, err, x = _products(m, x, [[V, W]], exact)
    return _tv(2, vals, err, x, [V, W])


def ac_tensor(m, x, V, W, X, exact=True) -> TensorValue:
    vals, err, x = _products(m, x, [[V, W, X]], exact)
    return _tv(3, vals, err, x, [V, W, X])


def moment_tensor(m, x, V, n, exact=True) -> TensorValue:
    if n < 1:
        raise ValueError("moment order must be >= 1")
    vals, err, x = _products(m, x, [[V] * n], exact)
    return _tv(n, vals, err, x, [V] * n)


def fisher_matrix(m, x, exact=True) -> TensorValue:
    """Fisher matrix over the coordinate basis; exactly symmetric by construction."""
    d = m.dim
    basis = np.eye(d)
    pairs = list(combinations_with_replacement(range(d), 2))
    vals, err, x = _products(m, x, [[basis[i], basis[j]] for i, j in pairs], exact)
    G = np.empty((d, d))
    for (i, j), v in zip(pairs, vals):
        G[i, j] = G[j, i] = v
    return TensorValue(2, G, err, x.tolist(), [b for b in basis])


def ac_array(m, x, exact=True) -> np.ndarray:
    """Full ``d×d×d`` Amari–Chentsov array over the coordinate basis."""
    d = m.dim
    basis = np.eye(d)
    triples = list(combinations_with_replacement(range(d), 3))
    vals, _, _ = _products(m, x, [[basis[i] for i in t] for t in triples], exact)
    T = np.empty((d, d, d))
    for t, v in zip(triples, vals):
        for a in {(t[0], t[1], t[2]), (t[0], t[2], t[1]), (t[1], t[0], t[2]),
                  (t[1], t[2], t[0]), (t[2], t[0], t[1]), (t[2], t[1], t[0])}:
            T[a] = v
    return T


def all_tensors(m, x, V, exact=True) -> dict:
    """A, Fisher and AC diagonal in direction V from one quadrature pass."""
    vals, err, x = _products(m, x, [[V], [V, V], [V, V, V]], exact)
    return {"A": float(vals[0]), "fisher": float(vals[1]), "ac": float(vals[2]), "error": err}
