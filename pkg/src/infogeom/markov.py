"""Markov kernels, congruent embeddings, the Fisher–Neyman sufficiency test,
conditional distributions on products, the kernel lift and the decomposition
of a Markov morphism into a lift followed by a projection."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.special import logsumexp

from . import expr as ex
from .errors import (
    NonPositiveDensity,
    NotProbability,
    PartitionMismatch,
    SpaceMismatch,
    SupportViolation,
    ZeroDenominator,
    ZeroMarginal,
    ZeroRow,
)
from .models import ParametrizedModel, Potential, box_lattice, density_at, pushforward_model
from .spaces import (
    Finite,
    Grid,
    Measure,
    Product,
    Statistic,
    density_measure,
    finite_measure,
    lebesgue,
    n_points,
    product_measure,
    quad,
    sample_points,
)

ROW_TOL = 1e-12
SUFFICIENT_TOL = 1e-7
INCONCLUSIVE_TOL = 1e-4

# ---------------------------------------------------------------------------
# Kernels
# ---------------------------------------------------------------------------


class MarkovKernel:
    """Row-stochastic transition from ``Finite(n)`` to a finite or grid target.

    Finite targets carry an ``(n, m)`` matrix.  Grid targets carry one
    probability density per source atom (callable or expression in ``w1``)
    against Lebesgue measure.
    """

    def __init__(self, matrix=None, target=None, row_densities=None, source=None):
        if matrix is not None:
            P = np.array(matrix, dtype=float)
            if P.ndim != 2:
                raise SpaceMismatch("kernel matrix must be 2-d")
            if np.any(P < 0):
                raise ValueError("kernel entries must be nonnegative")
            sums = P.sum(axis=1)
            if np.any(sums == 0):
                raise ZeroRow(f"rows {np.flatnonzero(sums == 0).tolist()} are zero")
            if np.any(np.abs(sums - 1.0) > ROW_TOL):
                raise NotProbability(f"row sums {sums.tolist()} differ from 1")
            P.setflags(write=False)
            self.matrix = P
            self.source = Finite(P.shape[0])
            self.target = Finite(P.shape[1])
            self.row_densities = None
        else:
            if not isinstance(target, Grid):
                raise SpaceMismatch("row densities need a grid target")
            rows = []
            for r in row_densities:
                if isinstance(r, str):
                    e = ex.parse(r, 0)
                    rows.append(lambda t, _e=e: ex.evaluate(_e, np.zeros(0), t) * np.ones(np.shape(t)))
                else:
                    rows.append(r)
            self.matrix = None
            self.source = Finite(len(rows)) if source is None else source
            self.target = target
            self.row_densities = rows
            for i, r in enumerate(rows):
                mass = float(quad(target, r).require("kernel row mass"))
                if abs(mass - 1.0) > 1e-9:
                    raise NotProbability(f"row {i} has mass {mass!r}")

    def __repr__(self):
        return f"MarkovKernel({self.source!r} -> {self.target!r})"

    @property
    def finite(self) -> bool:
        return self.matrix is not None

    @property
    def strictly_positive(self) -> bool:
        if self.finite:
            return bool(np.all(self.matrix > 0))
        pts = sample_points(self.target)
        return all(bool(np.all(r(pts) > 0)) for r in self.row_densities)

    def row_density(self, i, points):
        """Density of row ``i`` against the target base (counting or Lebesgue)."""
        if self.finite:
            return self.matrix[i][points]
        return np.asarray(self.row_densities[i](points), dtype=float)

    def compose(self, other: "MarkovKernel") -> "MarkovKernel":
        """``self`` then ``other`` (finite only)."""
        if not (self.finite and other.finite):
            raise SpaceMismatch("composition implemented for finite kernels")
        if self.target != other.source:
            raise SpaceMismatch("kernel target/source mismatch")
        P = self.matrix @ other.matrix
        # renormalize away accumulated rounding so rows stay stochastic to ROW_TOL
        return MarkovKernel(P / P.sum(axis=1, keepdims=True))

    def to_dict(self):
        if self.finite:
            return {"matrix": self.matrix.tolist()}
        return {"grid": [self.target.a, self.target.b], "rows": len(self.row_densities)}


def identity_kernel(n: int) -> MarkovKernel:
    return MarkovKernel(np.eye(n))


def kernel_pushforward(P: MarkovKernel, nu: Measure) -> Measure:
    """``(Π_*ν)_j = Σ_i ν_i Π_ij``."""
    if nu.space != P.source:
        raise SpaceMismatch(f"measure on {nu.space!r}, kernel from {P.source!r}")
    w = nu.weights
    if P.finite:
        return finite_measure(P.target, w @ P.matrix, signed_allowed=nu.signed_allowed)
    rows = P.row_densities
    return density_measure(P.target, lambda t: sum(wi * r(t) for wi, r in zip(w, rows)),
                           signed_allowed=nu.signed_allowed)


def lumping_matrix(kappa: Statistic) -> np.ndarray:
    """``(m, n)`` 0/1 matrix of the partition ``κ: Finite(m) -> Finite(n)``."""
    if kappa.kind == "identity":
        return np.eye(kappa.source.n)
    if kappa.kind != "partition":
        raise PartitionMismatch("lumping needs a partition statistic")
    L = np.zeros((kappa.source.n, kappa.target.n))
    L[np.arange(kappa.source.n), kappa.assignment] = 1.0
    return L


def congruent_embedding(kappa: Statistic, weights) -> MarkovKernel:
    """Kernel ``Finite(n) -> Finite(m)`` whose row ``i`` lives on ``κ⁻¹(i)``.

    ``weights[i]`` lists the row over the class atoms (in class order) or is a
    full length-``m`` vector vanishing off the class.
    """
    if kappa.kind == "identity":
        kappa = Statistic.partition(kappa.source, list(range(kappa.source.n)))
    if kappa.kind != "partition":
        raise PartitionMismatch("congruent embeddings need a partition statistic")
    m, n = kappa.source.n, kappa.target.n
    if len(weights) != n:
        raise PartitionMismatch(f"{len(weights)} weight rows for {n} classes")
    P = np.zeros((n, m))
    for i, (cls, w) in enumerate(zip(kappa.classes, weights)):
        w = np.asarray(w, dtype=float)
        if w.shape == (m,):
            off = np.setdiff1d(np.arange(m), cls)
            if np.any(w[off] != 0):
                raise SupportViolation(f"row {i} puts mass outside class {cls.tolist()}")
            w = w[cls]
        if w.shape != (len(cls),):
            raise SupportViolation(f"row {i} has {w.size} weights for class of size {len(cls)}")
        if np.any(w < 0):
            raise SupportViolation(f"row {i} has negative weights")
        if not np.any(w > 0):
            raise ZeroRow(f"row {i} is zero")
        if abs(w.sum() - 1.0) > ROW_TOL:
            raise NotProbability(f"row {i} sums to {w.sum()!r}")
        P[i, cls] = w
    return MarkovKernel(P)


def left_inverse_check(P: MarkovKernel, kappa: Statistic, tol=ROW_TOL) -> bool:
    """``κ_* ∘ Π = Id``: kernel matrix times lumping matrix is the identity."""
    if not P.finite:
        raise SpaceMismatch("left-inverse check needs finite spaces")
    if kappa.source != P.target or kappa.target != P.source:
        return False
    return bool(np.max(np.abs(P.matrix @ lumping_matrix(kappa) - np.eye(P.source.n))) <= tol)


def random_kernel(rng: np.random.Generator, n, m, alpha=1.0) -> MarkovKernel:
    """Strictly positive random kernel with Dirichlet rows."""
    P = rng.dirichlet(np.full(m, alpha), size=n)
    P = np.maximum(P, 1e-6)
    return MarkovKernel(P / P.sum(axis=1, keepdims=True))


def random_partition(rng: np.random.Generator, m, n) -> Statistic:
    """Uniformly shuffled surjective partition of ``Finite(m)`` into ``n`` classes."""
    if not 1 <= n <= m:
        raise PartitionMismatch("need 1 <= n <= m")
    assignment = np.concatenate([np.arange(n), rng.integers(0, n, m - n)])
    rng.shuffle(assignment)
    return Statistic.partition(Finite(m), assignment)


# ---------------------------------------------------------------------------
# Models transported by kernels
# ---------------------------------------------------------------------------


class _KernelPotential(Potential):
    """``Π_* p(x)`` against ``Π_* μ`` on a finite target."""

    def __init__(self, base: ParametrizedModel, P: MarkovKernel, log_ref):
        self.base = base
        self.P = P
        self.log_ref = log_ref
        self.exact = True

    def _log_weights(self, x):
        lp = self.base.log_density(x, self.base.space.atoms)
        with np.errstate(divide="ignore"):
            return logsumexp(lp[:, None] + np.log(self.P.matrix), axis=0)

    def log_density(self, x, points):
        return (self._log_weights(x) - self.log_ref)[points]

    def dlog(self, x, V, points):
        atoms = self.base.space.atoms
        lp = self.base.log_density(x, atoms)
        p = np.exp(lp - lp.max())
        d = self.base.dlog(x, V, atoms)
        num = (p * d) @ self.P.matrix
        den = p @ self.P.matrix
        return (num / den)[points]


def kernel_model(m: ParametrizedModel, P: MarkovKernel) -> ParametrizedModel:
    """``x -> Π_* p(x)`` on the (finite) kernel target."""
    if m.space != P.source:
        raise SpaceMismatch("model space differs from kernel source")
    if not P.finite:
        raise SpaceMismatch("kernel models need a finite target")
    ref = kernel_pushforward(P, m.reference)
    if np.any(ref.weights <= 0):
        raise NonPositiveDensity("kernel leaves target atoms without reference mass")
    pot = _KernelPotential(m, P, np.log(ref.weights))
    return ParametrizedModel(m.box, P.target, ref, pot, m.statistical, name=f"kernel({m.name})", diff=m.diff)


class _LiftPotential(Potential):
    """``Π(ω₁, ω₂) p̄(x, ω₁)`` against ``μ₁ ⊗ μ₂``."""

    def __init__(self, base: ParametrizedModel, P: MarkovKernel, mu2: Measure):
        self.base = base
        self.P = P
        self.mu2 = mu2
        self.exact = True
        if P.finite:
            self.log_pi_matrix = np.log(P.matrix) - np.log(mu2.weights)[None, :]

    def log_pi(self, points):
        i, j = points
        if self.P.finite:
            return self.log_pi_matrix[i, j]
        i = np.asarray(i)
        out = np.empty(n_points(j))
        for a in np.unique(i):
            sel = i == a
            out[sel] = np.log(self.P.row_density(int(a), j[sel])) - self.mu2.log_density(j[sel])
        return out

    def log_density(self, x, points):
        return self.base.log_pbar(x, points[0]) + self.log_pi(points)

    def dlog(self, x, V, points):
        return self.base.dlog(x, V, points[0])


def lift_model_by_kernel(m: ParametrizedModel, P: MarkovKernel, mu2: Measure) -> ParametrizedModel:
    """Lift ``p`` to ``Ω₁ × Ω₂`` with density ``Π(ω₁, ω₂) p̄(x, ω₁)``."""
    if m.space != P.source:
        raise SpaceMismatch("model space differs from kernel source")
    if mu2.space != P.target:
        raise SpaceMismatch("μ₂ must live on the kernel target")
    if not P.strictly_positive:
        raise NonPositiveDensity("lift requires a strictly positive kernel")
    if abs(mu2.mass - 1.0) > 1e-12:
        raise NotProbability(f"μ₂ has mass {mu2.mass!r}")
    if mu2.weights is not None and np.any(mu2.weights <= 0):
        raise NonPositiveDensity("μ₂ must be strictly positive")
    ref = product_measure(m.reference, mu2)
    pot = _LiftPotential(m, P, mu2)
    return ParametrizedModel(m.box, ref.space, ref, pot, m.statistical, name=f"lift({m.name})", diff=m.diff)


# ---------------------------------------------------------------------------
# Sufficiency
# ---------------------------------------------------------------------------


@dataclass
class SufficiencyVerdict:
    verdict: str  # "sufficient" | "not_sufficient" | "inconclusive"
    deviation: float
    witness: Optional[dict] = None
    tolerance: float = SUFFICIENT_TOL
    band: float = INCONCLUSIVE_TOL
    n_points: int = 0

    @property
    def sufficient(self) -> bool:
        return self.verdict == "sufficient"

    def to_dict(self):
        return {
            "verdict": self.verdict,
            "deviation": self.deviation,
            "witness": self.witness,
            "tolerance": self.tolerance,
            "inconclusive_band": [self.tolerance, self.band],
            "lattice_points": self.n_points,
        }


def _statistic_points(m: ParametrizedModel):
    space = m.space
    if isinstance(space, Finite):
        return space.atoms
    if isinstance(space, Product) and all(isinstance(s, Finite) for s in space.factors):
        i, j = np.meshgrid(np.arange(space.left.n), np.arange(space.right.n), indexing="ij")
        return (i.ravel(), j.ravel())
    return sample_points(space)


def _point_label(points, k):
    if isinstance(points, tuple):
        return [_scalar(p[k]) for p in points]
    return _scalar(points[k])


def _scalar(v):
    v = np.asarray(v).item()
    return int(v) if isinstance(v, (int, np.integer)) else float(v)


def log_ratio(m: ParametrizedModel, push: ParametrizedModel, kappa: Statistic, x, points):
    """``ln r(x, ω) = ln p̄(x, ω) - ln κ_*p̄(x, κ(ω))``."""
    lp = m.log_pbar(x, points)
    target_pts = kappa.apply(points)
    lq = push.log_pbar(x, target_pts)
    if not np.all(np.isfinite(lq)):
        raise ZeroDenominator(f"pushforward density vanishes at x={list(x)}")
    return lp - lq


def check_sufficiency(m: ParametrizedModel, kappa: Statistic, n=7, axes=None, tol=SUFFICIENT_TOL,
                      band=INCONCLUSIVE_TOL) -> SufficiencyVerdict:
    """Fisher–Neyman test: is ``r(x, ω)`` independent of ``x`` on a lattice?

    The deviation is ``max_ω (max_x r - min_x r) / max_x r``.
    """
    kappa.check_source(m.space)
    if kappa.kind == "identity":
        return SufficiencyVerdict("sufficient", 0.0, None, tol, band)
    push = pushforward_model(m, kappa)
    lattice, _ = box_lattice(m.box, n, axes)
    points = _statistic_points(m)
    logs = np.stack([log_ratio(m, push, kappa, x, points) for x in lattice])  # (lattice, points)
    hi, lo = logs.max(axis=0), logs.min(axis=0)
    dev = -np.expm1(lo - hi) + 0.0  # no negative zero
    k = int(np.argmax(dev))
    deviation = float(dev[k])
    if deviation <= tol:
        verdict = "sufficient"
    elif deviation <= band:
        verdict = "inconclusive"
    else:
        verdict = "not_sufficient"
    witness = None
    if verdict != "sufficient":
        witness = {
            "x": lattice[int(np.argmax(logs[:, k]))].tolist(),
            "x_prime": lattice[int(np.argmin(logs[:, k]))].tolist(),
            "omega": _point_label(points, k),
        }
    return SufficiencyVerdict(verdict, deviation, witness, tol, band, len(lattice))


# ---------------------------------------------------------------------------
# Conditionals, lift and decomposition
# ---------------------------------------------------------------------------


@dataclass
class ConditionalFamily:
    """Fiber measures of ``p(x)`` on ``Ω₂`` given ``ω₁`` (projection onto factor 1)."""

    model: ParametrizedModel
    x: np.ndarray
    which: int = 1

    def _pts(self, keep_pt, other_pts):
        full = np.full(n_points(other_pts), keep_pt)
        return (full, other_pts) if self.which == 1 else (other_pts, full)

    @property
    def fiber_space(self):
        return self.model.space.factors[2 - self.which]

    def _fiber_ref(self):
        return self.model.reference.factors[2 - self.which]

    def marginal(self, keep_pt) -> float:
        m, x = self.model, self.x
        keep_ref = m.reference.factors[self.which - 1]
        pt = np.array([keep_pt])
        val = self._fiber_ref().quad(lambda po: np.exp(m.log_pbar(x, self._pts(keep_pt, po))))
        return float(val.require("fiber mass")) * float(keep_ref.density(pt)[0])

    def fiber(self, keep_pt) -> Measure:
        m, x = self.model, self.x
        ref = self._fiber_ref()
        total = ref.quad(lambda po: np.exp(m.log_pbar(x, self._pts(keep_pt, po)))).require("fiber mass")
        total = float(total)
        if not total > 0:
            raise ZeroMarginal(f"fiber over {keep_pt} has zero mass")
        log_total = math.log(total)
        space = self.fiber_space
        if isinstance(space, Finite):
            pts = space.atoms
            w = np.exp(m.log_pbar(x, self._pts(keep_pt, pts)) - log_total) * ref.weights
            return finite_measure(space, w)
        return density_measure(space, log_density=lambda t: m.log_pbar(x, self._pts(keep_pt, t)) - log_total
                               + ref.log_density(t))

    def matrix(self) -> np.ndarray:
        """Row ``i`` = fiber over atom ``i`` (finite × finite only)."""
        keep = self.model.space.factors[self.which - 1]
        if not isinstance(keep, Finite) or not isinstance(self.fiber_space, Finite):
            raise SpaceMismatch("matrix form needs finite factors")
        return np.stack([self.fiber(i).weights for i in range(keep.n)])


def conditional_distribution(m: ParametrizedModel, x, which=1) -> ConditionalFamily:
    if not isinstance(m.space, Product):
        raise SpaceMismatch("conditional distributions need a product space")
    if m.reference.factors is None:
        raise SpaceMismatch("conditional distributions need a product reference measure")
    return ConditionalFamily(m, m.check_x(x), which)


@dataclass
class Decomposition:
    lift: ParametrizedModel
    certificate: SufficiencyVerdict
    pushforward: ParametrizedModel
    residual: float

    def to_dict(self):
        return {"certificate": self.certificate.to_dict(), "residual": self.residual}


def decompose_markov_morphism(m: ParametrizedModel, P: MarkovKernel, mu2: Measure, n=5,
                              axes=None) -> Decomposition:
    """``Π_* p = (π₂)_* Π^{[p]}`` with ``π₁`` sufficient for the lift."""
    lift = lift_model_by_kernel(m, P, mu2)
    pi1 = Statistic.projection(lift.space, 1)
    pi2 = Statistic.projection(lift.space, 2)
    cert = check_sufficiency(lift, pi1, n=n, axes=axes)
    push = pushforward_model(lift, pi2)
    lattice, _ = box_lattice(m.box, n, axes)
    residual = 0.0
    for x in lattice:
        direct = kernel_pushforward(P, density_at(m, x))
        via = density_at(push, x)
        if P.finite:
            residual = max(residual, float(np.max(np.abs(via.weights - direct.weights))))
        else:
            pts = sample_points(P.target)
            residual = max(residual, float(np.max(np.abs(via.density(pts) - direct.density(pts)))))
    return Decomposition(lift, cert, push, residual)
