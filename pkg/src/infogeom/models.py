"""Parametrized measure models ``x -> p(x) = p̄(x, ·) μ`` over open parameter boxes.

A model couples an open box ``M ⊂ R^d``, a sample space, a strictly positive
reference measure ``μ`` and a *potential* computing ``ln p̄(x, ω)`` (and,
when available, exact directional derivatives of it).  Everything the tensor
fields need is ``∂_V ln p̄`` integrated against ``p(x)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.special import logsumexp

from . import expr as ex
from .errors import NonPositiveDensity, OutOfDomain, PartitionMismatch, SpaceMismatch
from .spaces import (
    CONVERGED,
    DIVERGENT,
    Finite,
    Grid,
    Measure,
    Product,
    QuadResult,
    Statistic,
    density_measure,
    finite_measure,
    lebesgue,
    n_points,
    product_measure,
    pushforward_statistic,
    quad,
    sample_points,
    uniform_measure,
)

# ---------------------------------------------------------------------------
# Potentials
# ---------------------------------------------------------------------------


class Potential:
    """Computes ``ln p̄(x, ω)`` on point arrays.

    Subclasses set ``exact = True`` when :meth:`dlog` returns exact values.
    """

    exact = False

    def log_density(self, x, points):
        raise NotImplementedError

    def dlog(self, x, V, points):
        raise NotImplementedError

    def describe(self):
        return {"kind": type(self).__name__}


class ExpressionPotential(Potential):
    """``p̄`` given by one expression, or by one expression per atom."""

    def __init__(self, source, param_dim=None):
        if isinstance(source, (list, tuple)):
            self.per_atom = tuple(ex.parse(s, param_dim) if isinstance(s, str) else s for s in source)
            self.expression = None
        else:
            self.expression = ex.parse(source, param_dim) if isinstance(source, str) else source
            self.per_atom = None
        self._logs = None

    @property
    def text(self):
        if self.per_atom is not None:
            return [str(e) for e in self.per_atom]
        return str(self.expression)

    def log_density(self, x, points):
        try:
            if self.per_atom is not None:
                atoms = np.asarray(points)
                vals = np.array([float(ex.evaluate(ex.log_of(e), x, np.zeros(1)).ravel()[0])
                                 for e in self.per_atom])
                return vals[atoms]
            out = ex.evaluate(ex.log_of(self.expression), x, _expr_points(points))
        except (ex.DomainError, ex.NonFinite) as exc:
            raise NonPositiveDensity(f"potential not strictly positive at x={list(np.atleast_1d(x))}: {exc}") from exc
        return np.broadcast_to(out, (n_points(points),)).astype(float)

    def describe(self):
        return {"kind": "expression", "text": self.text}


def _expr_points(points):
    # finite atoms are exposed to expressions 1-based
    if isinstance(points, tuple):
        return tuple(_expr_points(p) for p in points)
    points = np.asarray(points)
    if points.dtype.kind in "iu":
        return points + 1.0
    return points


class CategoricalPotential(Potential):
    """``p = (x_1, ..., x_{n-1}, 1 - Σ x_i)`` against counting measure."""

    exact = True

    def __init__(self, n):
        self.n = n

    def probs(self, x):
        x = np.asarray(x, dtype=float)
        return np.append(x, 1.0 - x.sum())

    def log_density(self, x, points):
        p = self.probs(x)
        if np.any(p <= 0):
            raise NonPositiveDensity(f"categorical point {list(x)} outside the open simplex")
        return np.log(p)[points]

    def dlog(self, x, V, points):
        p = self.probs(x)
        V = np.asarray(V, dtype=float)
        d = np.append(V, -V.sum()) / p
        return d[points]

    def describe(self):
        return {"kind": "categorical", "n": self.n}


class ExpFamilyPotential(Potential):
    """``ln p̄ = Σ x_i h_i(ω) - ψ(x)`` on a finite space (normalized against μ)."""

    exact = True

    def __init__(self, features, ref_weights):
        self.features = np.asarray(features, dtype=float)  # (n_atoms, d)
        self.log_ref = np.log(np.asarray(ref_weights, dtype=float))

    def _theta(self, x):
        return self.features @ np.asarray(x, dtype=float)

    def log_density(self, x, points):
        th = self._theta(x)
        return (th - logsumexp(th + self.log_ref))[points]

    def dlog(self, x, V, points):
        th = self._theta(x)
        w = np.exp(th + self.log_ref - logsumexp(th + self.log_ref))
        hv = self.features @ np.asarray(V, dtype=float)
        return (hv - w @ hv)[points]

    def describe(self):
        return {"kind": "exp_family", "features": self.features.tolist()}


class ScalingPotential(Potential):
    """``p(t) = t μ``."""

    exact = True

    def log_density(self, x, points):
        return np.full(n_points(points), math.log(float(np.asarray(x).ravel()[0])))

    def dlog(self, x, V, points):
        return np.full(n_points(points), float(np.asarray(V).ravel()[0]) / float(np.asarray(x).ravel()[0]))

    def describe(self):
        return {"kind": "scaling"}


class PowerExpPotential(Potential):
    """``p̄(x, t) = exp(-x² / t^(1/k))`` on ``(0, 1)``."""

    exact = True

    def __init__(self, k):
        self.k = k

    def log_density(self, x, t):
        x0 = float(np.asarray(x).ravel()[0])
        return -(x0 * x0) * np.power(t, -1.0 / self.k)

    def dlog(self, x, V, t):
        x0 = float(np.asarray(x).ravel()[0])
        v0 = float(np.asarray(V).ravel()[0])
        return -2.0 * x0 * v0 * np.power(t, -1.0 / self.k)

    def describe(self):
        return {"kind": "power_exp", "k": self.k}


class StepPotential(Potential):
    """``ln p̄(x, ω) = (x - x0) τ_i`` on class ``D_i`` of a statistic."""

    exact = True

    def __init__(self, statistic: Statistic, tau, x0):
        self.statistic = statistic
        self.tau = np.asarray(tau, dtype=float)
        self.x0 = float(x0)
        if len(self.tau) != statistic.target.n:
            raise PartitionMismatch(f"{len(self.tau)} coefficients for {statistic.target.n} classes")

    def log_density(self, x, points):
        x = float(np.asarray(x).ravel()[0])
        return (x - self.x0) * self.tau[self.statistic.apply(points)]

    def dlog(self, x, V, points):
        return float(np.asarray(V).ravel()[0]) * self.tau[self.statistic.apply(points)]

    def describe(self):
        return {"kind": "step", "tau": self.tau.tolist(), "x0": self.x0}


class CallbackPotential(Potential):
    """Wraps plain callables; ``dlog`` optional."""

    def __init__(self, log_density, dlog=None, name="callback"):
        self._log = log_density
        self._dlog = dlog
        self.exact = dlog is not None
        self.name = name

    def log_density(self, x, points):
        return np.asarray(self._log(x, points), dtype=float)

    def dlog(self, x, V, points):
        return np.asarray(self._dlog(x, V, points), dtype=float)

    def describe(self):
        return {"kind": self.name}


# ---------------------------------------------------------------------------
# Model
# ---------------------------------------------------------------------------


class ParametrizedModel:
    """``(M, Ω, μ, p)`` with ``M`` an open box and ``p(x) = p̄(x, ·) μ``."""

    def __init__(self, box, space, reference: Measure, potential: Potential, statistical=False,
                 exact_dlog: Optional[Callable] = None, name="", diff: ex.DiffConfig = ex.DEFAULT_DIFF):
        box = np.array(box, dtype=float).reshape(-1, 2)
        if np.any(box[:, 0] >= box[:, 1]):
            raise ValueError("parameter box needs lower < upper on every axis")
        if reference.space != space:
            raise SpaceMismatch("reference measure lives on a different space")
        self.box = box
        self.space = space
        self.reference = reference
        self.potential = potential
        self.statistical = statistical
        self.exact_dlog = exact_dlog
        self.name = name
        self.diff = diff

    def __repr__(self):
        return f"ParametrizedModel({self.name or self.potential.describe()['kind']}, d={self.dim}, {self.space!r})"

    @property
    def dim(self) -> int:
        return len(self.box)

    @property
    def has_exact(self) -> bool:
        return self.exact_dlog is not None or self.potential.exact

    def check_x(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if x.shape != (self.dim,):
            raise OutOfDomain(f"expected {self.dim} parameters, got {x.shape}")
        if np.any(x <= self.box[:, 0]) or np.any(x >= self.box[:, 1]):
            raise OutOfDomain(f"x={x.tolist()} outside open box {self.box.tolist()}")
        return x

    # -- pointwise quantities ------------------------------------------------

    def log_pbar(self, x, points):
        return np.asarray(self.potential.log_density(np.asarray(x, dtype=float), points), dtype=float)

    def log_density(self, x, points):
        """``ln dp(x)/d(base)``: potential plus reference log-density."""
        return self.log_pbar(x, points) + self.reference.log_density(points)

    def dlog(self, x, V, points, exact=True):
        V = np.atleast_1d(np.asarray(V, dtype=float))
        if not np.any(V):
            return np.zeros(n_points(points))
        if exact and self.exact_dlog is not None:
            return np.asarray(self.exact_dlog(x, V, points), dtype=float)
        if exact and self.potential.exact:
            return np.broadcast_to(self.potential.dlog(x, V, points), (n_points(points),))
        return ex.central_difference(lambda xx: self.log_pbar(xx, points), x, V, self.diff)

    def dlog_many(self, x, directions, points, exact=True):
        return np.stack([self.dlog(x, V, points, exact) for V in directions])

    # -- integration -----------------------------------------------------------

    def quad(self, x, g) -> QuadResult:
        """``∫ g dp(x)``; ``g(points)`` may be vector valued (leading axes)."""

        def integrand(pts):
            lp = self.log_density(x, pts)
            return np.asarray(g(pts), dtype=float) * np.exp(lp)

        return quad(self.space, integrand)

    def integrate(self, x, g, what="model integral"):
        return self.quad(x, g).require(what)


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------


def density_at(m: ParametrizedModel, x) -> Measure:
    x = m.check_x(x)
    if isinstance(m.space, Finite):
        lp = m.log_density(x, m.space.atoms)
        w = np.exp(lp)
        if np.any(w <= 0) or not np.all(np.isfinite(w)):
            raise NonPositiveDensity(f"density not strictly positive at x={x.tolist()}")
        return finite_measure(m.space, w)
    if isinstance(m.space, Product) and all(isinstance(s, Finite) for s in m.space.factors):
        n1, n2 = m.space.left.n, m.space.right.n
        i, j = np.meshgrid(np.arange(n1), np.arange(n2), indexing="ij")
        w = np.exp(m.log_density(x, (i.ravel(), j.ravel())))
        if np.any(w <= 0):
            raise NonPositiveDensity(f"density not strictly positive at x={x.tolist()}")
        return finite_measure(m.space, w)
    return density_measure(m.space, log_density=lambda pts: m.log_density(x, pts))


def log_derivative(m: ParametrizedModel, x, V, omega, exact=True) -> float:
    """``∂_V ln p̄(x, ω)`` at a single sample point (atom index, float, or pair)."""
    x = m.check_x(x)
    if isinstance(omega, tuple):
        pts = tuple(np.array([o]) for o in omega)
    else:
        pts = np.array([omega])
    return float(np.asarray(m.dlog(x, V, pts, exact)).ravel()[0])


def mass(m: ParametrizedModel, x) -> float:
    x = m.check_x(x)
    return float(m.integrate(x, lambda pts: np.ones(n_points(pts)), "mass"))


def mass_derivative(m: ParametrizedModel, x, V, both=False):
    """``∂_V ∫ dp(x)`` as ``∫ ∂_V ln p̄ dp(x)``.

    With ``both=True`` returns ``(integral, finite_difference)`` for the
    interchange-of-derivative check.
    """
    x = m.check_x(x)
    integral = float(m.integrate(x, lambda pts: m.dlog(x, V, pts), "mass derivative"))
    if not both:
        return integral
    fd = float(ex.central_difference(lambda xx: mass(m, xx), x, V, m.diff))
    return integral, fd


def box_lattice(box, n=5, axes=None):
    """Product lattice strictly inside ``box`` (or over explicit ``axes``)."""
    box = np.asarray(box, dtype=float).reshape(-1, 2)
    if axes is None:
        axes = [lo + (hi - lo) * np.arange(1, n + 1) / (n + 1) for lo, hi in box]
    axes = [np.asarray(a, dtype=float) for a in axes]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in mesh], axis=-1), tuple(len(a) for a in axes)


def validate(m: ParametrizedModel, n=3, tol=1e-9):
    """Spot-check positivity (and unit mass for statistical models) on a lattice."""
    pts = sample_points(m.space)
    lattice, _ = box_lattice(m.box, n)
    for x in lattice:
        lp = m.log_pbar(x, pts)
        if not np.all(np.isfinite(lp)):
            raise NonPositiveDensity(f"p̄ not strictly positive at x={x.tolist()}")
        if m.statistical:
            mm = mass(m, x)
            if abs(mm - 1.0) > tol:
                raise ValueError(f"statistical model has mass {mm!r} at x={x.tolist()}")
    return m


@dataclass
class IntegrabilityReport:
    k: int
    lattice: np.ndarray
    integrals: np.ndarray  # ∫ |∂_i ln p̄|^k dp(x), shape (points, d)
    norms: np.ndarray  # L^k norms
    max_jump: float
    verdict: str  # "pass" | "fail" | "divergent"
    point: Optional[list] = None
    direction: Optional[int] = None
    evidence: str = ""
    threshold: float = 0.5

    def to_dict(self):
        return {
            "k": self.k,
            "verdict": self.verdict,
            "point": self.point,
            "direction": self.direction,
            "max_jump": self.max_jump,
            "threshold": self.threshold,
            "lattice": self.lattice.tolist(),
            "integrals": np.where(np.isfinite(self.integrals), self.integrals, None).tolist(),
            "evidence": self.evidence,
        }


def check_k_integrability(m: ParametrizedModel, k: int, n=9, axes=None, threshold=0.5,
                          exact=True) -> IntegrabilityReport:
    """Lattice check of ``∂_i ln p̄ ∈ L^k(p(x))`` with a continuity proxy.

    The continuity proxy bounds the jump of the L^k norm between lattice
    neighbours, relative to the largest norm seen on the lattice.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    lattice, shape = box_lattice(m.box, n, axes)
    d = m.dim
    basis = np.eye(d)
    integrals = np.full((len(lattice), d), np.nan)
    for p, x in enumerate(lattice):
        res = m.quad(x, lambda pts: np.abs(m.dlog_many(x, basis, pts, exact)) ** k)
        if res.status != CONVERGED:
            return IntegrabilityReport(k, lattice, integrals, math.inf, "divergent", x.tolist(), None,
                                       f"{res.status}: {res.evidence}", threshold)
        integrals[p] = res.value
    norms = integrals ** (1.0 / k)
    grid_norms = norms.reshape(shape + (d,))
    max_jump, worst = 0.0, None
    for i in range(d):
        scale = float(np.max(grid_norms[..., i]))
        if scale == 0.0:
            continue
        for ax in range(len(shape)):
            jumps = np.abs(np.diff(grid_norms[..., i], axis=ax)) / scale
            if jumps.size and jumps.max() > max_jump:
                max_jump = float(jumps.max())
                idx = np.unravel_index(np.argmax(jumps), jumps.shape)
                worst = (int(np.ravel_multi_index(idx, shape)), i)
    if max_jump > threshold:
        return IntegrabilityReport(k, lattice, integrals, norms, max_jump, "fail",
                                   lattice[worst[0]].tolist(), worst[1],
                                   "L^k norm jumps between lattice neighbours", threshold)
    return IntegrabilityReport(k, lattice, integrals, norms, max_jump, "pass", threshold=threshold)


# ---------------------------------------------------------------------------
# Constructors
# ---------------------------------------------------------------------------


def expression_model(potential, space, box, reference=None, statistical=False, exact_dlog=None,
                     name="expression", check=True):
    box = np.array(box, dtype=float).reshape(-1, 2)
    if reference is None:
        reference = counting(space) if isinstance(space, Finite) else base_measure(space)
    pot = ExpressionPotential(potential, param_dim=len(box))
    m = ParametrizedModel(box, space, reference, pot, statistical, exact_dlog, name)
    return validate(m) if check else m


def counting(space: Finite) -> Measure:
    return finite_measure(space, np.ones(space.n))


def base_measure(space) -> Measure:
    if isinstance(space, Finite):
        return counting(space)
    if isinstance(space, Grid):
        return lebesgue(space)
    return product_measure(base_measure(space.left), base_measure(space.right))


def categorical(n: int) -> ParametrizedModel:
    """Statistical model on ``Finite(n)``, box ``(0, 1/(n-1))^(n-1)``."""
    if n < 2:
        raise ValueError("categorical needs n >= 2")
    space = Finite(n)
    upper = 1.0 if n == 2 else 1.0 / (n - 1)
    box = [(0.0, upper)] * (n - 1)
    return ParametrizedModel(box, space, counting(space), CategoricalPotential(n), statistical=True,
                             name=f"categorical({n})")


def bernoulli() -> ParametrizedModel:
    m = categorical(2)
    m.name = "bernoulli"
    return m


def exp_family(features, reference=None, box=None) -> ParametrizedModel:
    features = np.asarray(features, dtype=float)
    if features.ndim == 1:
        features = features[:, None]
    n, d = features.shape
    space = Finite(n)
    if reference is None:
        reference = counting(space)
    if box is None:
        box = [(-5.0, 5.0)] * d
    return ParametrizedModel(box, space, reference, ExpFamilyPotential(features, reference.weights),
                             statistical=True, name="exp_family")


def scaling(reference: Measure, upper=1.0) -> ParametrizedModel:
    return ParametrizedModel([(0.0, upper)], reference.space, reference, ScalingPotential(), name="scaling")


def power_exp(k=3, box=(-5.0, 5.0), config=None) -> ParametrizedModel:
    """The family ``exp(-x²/t^(1/k)) dt`` on ``(0, 1)``."""
    if k not in (2, 3, 4, 5, 6):
        raise ValueError("k must be in 2..6")
    space = Grid(0.0, 1.0) if config is None else Grid(0.0, 1.0, config)
    return ParametrizedModel([box], space, lebesgue(space), PowerExpPotential(k), name=f"power_exp(k={k})")


def make_step_model(mu: Measure, kappa: Statistic, tau, x0=0.5) -> ParametrizedModel:
    """Model on ``(0, 1)`` with ``p(x0) = μ`` and ``∂_x ln p̄ = Σ τ_i χ_{D_i}``."""
    kappa.check_source(mu.space)
    if not 0.0 < x0 < 1.0:
        raise OutOfDomain("anchor x0 must lie in (0, 1)")
    return ParametrizedModel([(0.0, 1.0)], mu.space, mu, StepPotential(kappa, tau, x0), name="step")


BUILTINS = {
    "bernoulli": lambda: bernoulli(),
    "categorical": lambda n: categorical(int(n)),
    "power_exp": lambda k=3: power_exp(int(k)),
    "exp_family": lambda features, reference=None: exp_family(
        features, None if reference is None else finite_measure(len(features), reference)),
    "scaling": lambda weights: scaling(finite_measure(len(weights), weights)),
}


def builtin(name: str, **params) -> ParametrizedModel:
    try:
        factory = BUILTINS[name]
    except KeyError:
        raise ValueError(f"unknown builtin family {name!r}; known: {sorted(BUILTINS)}") from None
    return factory(**params)


# ---------------------------------------------------------------------------
# Derived models
# ---------------------------------------------------------------------------


class _PushforwardPotential(Potential):
    def __init__(self, base: ParametrizedModel, kappa: Statistic, ref_push: Measure):
        self.base = base
        self.kappa = kappa
        self.ref_push = ref_push
        self.exact = base.has_exact

    def _classes_log_mass(self, x, with_grad_V=None):
        m, k = self.base, self.kappa
        if k.kind == "partition":
            atoms = m.space.atoms
            lp = m.log_density(x, atoms)
            out = np.array([logsumexp(lp[c]) for c in k.classes])
            if with_grad_V is None:
                return out
            d = m.dlog(x, with_grad_V, atoms)
            grad = np.array([np.sum(np.exp(lp[c] - logsumexp(lp[c])) * d[c]) for c in k.classes])
            return out, grad
        # intervals: quadrature per class
        vals, grads = [], []
        for lo, hi in k.interval_bounds():
            sub = m.space.sub(lo, hi)
            if with_grad_V is None:
                r = quad(sub, lambda t: np.exp(m.log_density(x, t))).require("class mass")
                vals.append(math.log(float(r)))
            else:
                r = quad(sub, lambda t: np.stack([np.ones_like(t), m.dlog(x, with_grad_V, t)])
                         * np.exp(m.log_density(x, t))).require("class mass")
                vals.append(math.log(float(r[0])))
                grads.append(float(r[1] / r[0]))
        if with_grad_V is None:
            return np.array(vals)
        return np.array(vals), np.array(grads)

    def log_density(self, x, points):
        k = self.kappa
        if k.kind == "projection":
            return self._projection(x, points)
        return (self._classes_log_mass(x) - np.log(self.ref_push.weights))[points]

    def dlog(self, x, V, points):
        if self.kappa.kind == "projection":
            return self._projection(x, points, V)
        _, grad = self._classes_log_mass(x, V)
        return grad[points]

    def _projection(self, x, points, V=None):
        m, k = self.base, self.kappa
        keep = k.target
        other = m.space.factors[2 - k.which]
        other_ref = m.reference.factors[2 - k.which]
        out = []
        for pt in np.atleast_1d(points):
            def joint(po):
                full = np.full(n_points(po), pt)
                pts = (full, po) if k.which == 1 else (po, full)
                lp = m.log_pbar(x, pts)
                if V is None:
                    return np.exp(lp)
                return np.stack([np.exp(lp), np.exp(lp) * m.dlog(x, V, pts)])
            r = other_ref.quad(joint).require("marginal")
            if V is None:
                out.append(math.log(float(r) / other_ref.mass))
            else:
                out.append(float(r[1] / r[0]))
        return np.array(out)


def pushforward_model(m: ParametrizedModel, kappa: Statistic) -> ParametrizedModel:
    """``κ_* m``: density ``dκ_*p(x) / dκ_*μ`` against ``κ_*μ``."""
    kappa.check_source(m.space)
    if kappa.kind == "identity":
        return m
    if kappa.kind == "projection":
        if m.reference.factors is None:
            raise SpaceMismatch("projection pushforward needs a product reference measure")
        ref = pushforward_statistic(m.reference, kappa)
    else:
        ref = pushforward_statistic(m.reference, kappa)
    pot = _PushforwardPotential(m, kappa, ref)
    return ParametrizedModel(m.box, kappa.target, ref, pot, m.statistical, name=f"push({m.name})", diff=m.diff)


class _ReparamPotential(Potential):
    def __init__(self, base, f, jacobian):
        self.base = base
        self.f = f
        self.jacobian = jacobian
        self.exact = True  # chain rule on the base derivative (exact or FD)

    def log_density(self, y, points):
        return self.base.log_pbar(self.f(y), points)

    def dlog(self, y, V, points):
        J = self.jacobian(y)
        W = J @ np.asarray(V, dtype=float)
        return self.base.dlog(self.f(y), W, points)


def jacobian_fd(f, y, cfg: ex.DiffConfig = ex.DEFAULT_DIFF):
    """Central-difference Jacobian using the representable step actually taken."""
    y = np.asarray(y, dtype=float)
    cols = []
    for i in range(len(y)):
        h = cfg.step_scale * max(1.0, abs(y[i]))
        yp, ym = y.copy(), y.copy()
        yp[i] += h
        ym[i] -= h
        cols.append((np.asarray(f(yp), dtype=float) - np.asarray(f(ym), dtype=float)) / (yp[i] - ym[i]))
    return np.stack(cols, axis=-1)


def reparametrize(m: ParametrizedModel, f, box, n_check=7) -> ParametrizedModel:
    """Pull ``m`` back along ``f: N-box -> M-box``.

    ``f`` is a callable or a list of expression strings in ``x1..xe`` (one per
    coordinate of ``M``).
    """
    box = np.array(box, dtype=float).reshape(-1, 2)
    if not callable(f):
        exprs = [ex.parse(s, len(box)) for s in f]
        if len(exprs) != m.dim:
            raise SpaceMismatch(f"map has {len(exprs)} components, model dimension is {m.dim}")

        def f(y, _e=exprs):
            return np.array([float(ex.evaluate(e, y, np.zeros(1), strict=True).ravel()[0]) for e in _e])

    fmap = f
    lattice, _ = box_lattice(box, n_check)
    for y in lattice:
        fy = np.atleast_1d(fmap(y))
        if np.any(fy <= m.box[:, 0]) or np.any(fy >= m.box[:, 1]):
            raise OutOfDomain(f"reparametrization leaves the parameter box at y={y.tolist()}")
    pot = _ReparamPotential(m, lambda y: np.atleast_1d(fmap(y)), lambda y: np.atleast_2d(jacobian_fd(fmap, y, m.diff)))
    return ParametrizedModel(box, m.space, m.reference, pot, m.statistical, name=f"reparam({m.name})", diff=m.diff)


class _ScaledPotential(Potential):
    def __init__(self, base):
        self.base = base
        self.exact = True

    def log_density(self, x, points):
        x = np.asarray(x, dtype=float)
        return self.base.log_pbar(x[:-1], points) + math.log(x[-1])

    def dlog(self, x, V, points):
        x = np.asarray(x, dtype=float)
        V = np.asarray(V, dtype=float)
        return self.base.dlog(x[:-1], V[:-1], points) + V[-1] / x[-1]


def scaled(m: ParametrizedModel) -> ParametrizedModel:
    """``(x, t) -> t p(x)`` over ``M × (0, 1)``."""
    box = np.vstack([m.box, [[0.0, 1.0]]])
    return ParametrizedModel(box, m.space, m.reference, _ScaledPotential(m), False, name=f"scaled({m.name})",
                             diff=m.diff)
