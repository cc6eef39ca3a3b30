"""Fisher-preconditioned gradient descent on a parametrized model."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from . import expr as ex
from .errors import LeftDomain, SingularMetric, SpaceMismatch
from .models import ParametrizedModel, density_at
from .spaces import Finite
from .tensors import fisher_matrix


def natural_direction(m: ParametrizedModel, x, g, rho=1e-10, G=None) -> np.ndarray:
    """Solve ``(G + ρI) d = g`` with ``G`` the Fisher matrix at ``x``."""
    g = np.atleast_1d(np.asarray(g, dtype=float))
    if G is None:
        G = fisher_matrix(m, x).value
    A = G + rho * np.eye(len(G))
    lam_min = float(np.linalg.eigvalsh(A)[0])
    if lam_min <= 0:
        raise SingularMetric(f"Fisher matrix not positive definite (smallest eigenvalue {lam_min:.3g})")
    if not np.any(g):
        return np.zeros_like(g)
    try:
        return cho_solve(cho_factor(A), g)
    except LinAlgError as exc:
        raise SingularMetric(str(exc)) from exc


class KLObjective:
    """Generalized ``KL(q ‖ p(x)) = Σ q ln(q/p) - q + p`` on a finite model."""

    def __init__(self, target):
        self.q = np.asarray(target, dtype=float)
        if np.any(self.q <= 0):
            raise ValueError("KL target must be strictly positive")

    def value(self, m, x):
        p = density_at(m, x).weights
        return float(np.sum(self.q * np.log(self.q / p) - self.q + p))

    def gradient(self, m, x):
        if not isinstance(m.space, Finite):
            raise SpaceMismatch("KL objective needs a finite model")
        p = density_at(m, x).weights
        atoms = m.space.atoms
        return np.array([np.sum((p - self.q) * m.dlog(x, e, atoms)) for e in np.eye(m.dim)])

    def describe(self):
        return {"kind": "kl", "target": self.q.tolist()}


class ExpressionObjective:
    """Objective given as an expression in the parameters ``x1..xd``; FD gradient."""

    def __init__(self, text, cfg: ex.DiffConfig = ex.DEFAULT_DIFF):
        self.text = text
        self.expr = ex.parse(text)
        self.cfg = cfg

    def _f(self, x):
        return float(ex.evaluate(self.expr, x, np.zeros(1)).ravel()[0])

    def value(self, m, x):
        return self._f(x)

    def gradient(self, m, x):
        x = np.asarray(x, dtype=float)
        return np.array([float(ex.central_difference(self._f, x, e, self.cfg)) for e in np.eye(len(x))])

    def describe(self):
        return {"kind": "expression", "text": self.text}


@dataclass
class NatGradConfig:
    eta: float = 0.5
    max_iter: int = 200
    objective: object = None
    rho: float = 1e-10
    tol: float = 1e-10
    max_clip_fraction: float = 0.5

    def __post_init__(self):
        if not self.eta > 0 or not self.tol > 0:
            raise ValueError("eta and tol must be positive")
        if self.max_iter < 0:
            raise ValueError("max_iter must be nonnegative")
        if isinstance(self.objective, str):
            self.objective = ExpressionObjective(self.objective)

    def to_dict(self):
        return {"eta": self.eta, "max_iter": self.max_iter, "rho": self.rho, "tol": self.tol,
                "max_clip_fraction": self.max_clip_fraction,
                "objective": None if self.objective is None else self.objective.describe()}


@dataclass
class Trajectory:
    xs: list = field(default_factory=list)
    objective: list = field(default_factory=list)
    step_norms: list = field(default_factory=list)
    clipped: int = 0
    converged: bool = False

    @property
    def x(self) -> np.ndarray:
        return self.xs[-1]

    @property
    def iterations(self) -> int:
        return len(self.step_norms)

    @property
    def monotone(self) -> bool:
        f = self.objective
        return all(b <= a + 1e-12 * max(1.0, abs(a)) for a, b in zip(f, f[1:]))

    def to_dict(self):
        return {
            "x": self.x.tolist(),
            "iterations": self.iterations,
            "converged": self.converged,
            "monotone": self.monotone,
            "clipped": self.clipped,
            "objective": self.objective[-1],
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        d = len(self.xs[0])
        w.writerow(["iteration"] + [f"x{i + 1}" for i in range(d)] + ["objective", "step_norm"])
        for i, (x, f) in enumerate(zip(self.xs, self.objective)):
            step = self.step_norms[i - 1] if i > 0 else 0.0
            w.writerow([i] + [repr(float(v)) for v in x] + [repr(f), repr(step)])
        return buf.getvalue()


def _clip(m: ParametrizedModel, x):
    lo, hi = m.box[:, 0], m.box[:, 1]
    margin = 1e-9 * (hi - lo)
    y = np.clip(x, lo + margin, hi - margin)
    return y, bool(np.any(y != x))


def descend(m: ParametrizedModel, x0, cfg: NatGradConfig) -> Trajectory:
    """``x ← clip(x - η · natural_direction)`` until the step is below ``tol``."""
    if cfg.objective is None:
        raise ValueError("config needs an objective")
    x = m.check_x(x0)
    obj = cfg.objective
    traj = Trajectory([x.copy()], [obj.value(m, x)])
    for _ in range(cfg.max_iter):
        direction = natural_direction(m, x, obj.gradient(m, x), cfg.rho)
        step = cfg.eta * direction
        norm = float(np.linalg.norm(step))
        if norm <= cfg.tol:
            traj.converged = True
            break
        x, clipped = _clip(m, x - step)
        traj.clipped += clipped
        traj.xs.append(x.copy())
        traj.objective.append(obj.value(m, x))
        traj.step_norms.append(norm)
    if traj.iterations and traj.clipped > cfg.max_clip_fraction * traj.iterations:
        raise LeftDomain(f"clipping active in {traj.clipped} of {traj.iterations} steps")
    return traj
