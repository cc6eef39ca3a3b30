"""Sample spaces, finite measures and quadrature.

Three kinds of sample space are supported:

* ``Finite(n)``: atoms ``0..n-1`` with the counting measure as base,
* ``Grid(a, b)``: the open interval ``(a, b)`` with Lebesgue measure as base,
* ``Product(left, right)``: pairs of the above.

Points handed to integrands are numpy arrays: integer atom indices for finite
spaces, floats for grids, and a ``(left, right)`` tuple of equal-length arrays
for products.

Integrals over a grid use composite Gauss-Legendre panels.  The two end panels
are replaced by dyadic shells ``[a + h 2^-(j+1), a + h 2^-j]`` so that
integrable endpoint singularities such as ``t**-0.5`` are resolved without
special-casing, and so that the sequence of shell contributions can be
inspected: a shell sequence that stops decaying means the integral diverges.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DivergentIntegral, PartitionMismatch, SpaceMismatch, ZeroDenominator

CONVERGED = "converged"
DIVERGENT = "divergent"
INCONCLUSIVE = "inconclusive"

# relative rounding allowed when placing nodes near a nonzero endpoint
_ENDPOINT_RESOLUTION = 2.0**-32
_TAIL_SHELLS = 6


@dataclass(frozen=True)
class QuadratureConfig:
    base_panels: int = 4
    nodes_per_panel: int = 16
    levels: int = 6
    growth_threshold: float = 10.0
    rtol: float = 1e-9
    max_depth: int = 100

    def __post_init__(self):
        if self.base_panels < 4:
            raise ValueError("base_panels must be >= 4")
        if self.nodes_per_panel < 1 or self.levels < 1 or self.max_depth < _TAIL_SHELLS + 2:
            raise ValueError("quadrature sizes must be positive")
        if not self.growth_threshold > 1:
            raise ValueError("growth_threshold must exceed 1")
        if not self.rtol > 0:
            raise ValueError("rtol must be positive")


DEFAULT_QUADRATURE = QuadratureConfig()


@functools.lru_cache(maxsize=None)
def gauss_legendre(n: int):
    """Nodes and weights of the n-point Gauss-Legendre rule on (-1, 1)."""
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def panel_rule(lo, hi, n):
    x, w = gauss_legendre(n)
    half = 0.5 * (hi - lo)
    return lo + half * (x + 1.0), half * w


# ---------------------------------------------------------------------------
# Sample spaces
# ---------------------------------------------------------------------------


class SampleSpace:
    """Marker base class."""

    kind = "abstract"


@dataclass(frozen=True)
class Finite(SampleSpace):
    n: int
    labels: Optional[tuple] = None
    kind = "finite"

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"Finite space needs n >= 1, got {self.n!r}")
        if self.labels is not None:
            labels = tuple(self.labels)
            if len(labels) != self.n or len(set(labels)) != self.n:
                raise ValueError("labels must be n distinct values")
            object.__setattr__(self, "labels", labels)

    @property
    def atoms(self):
        return np.arange(self.n)

    def label(self, i):
        return self.labels[i] if self.labels is not None else i + 1


@dataclass(frozen=True)
class Grid(SampleSpace):
    a: float
    b: float
    config: QuadratureConfig = DEFAULT_QUADRATURE
    kind = "grid"

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b)) or not self.a < self.b:
            raise ValueError(f"Grid needs finite a < b, got ({self.a}, {self.b})")

    def rule(self, level: int, max_depth: Optional[int] = None) -> "GridRule":
        return _grid_rule(self.a, self.b, self.config, level,
                          self.config.max_depth if max_depth is None else max_depth)

    def sub(self, lo, hi) -> "Grid":
        return Grid(float(lo), float(hi), self.config)


@dataclass(frozen=True)
class Product(SampleSpace):
    left: SampleSpace
    right: SampleSpace
    kind = "product"

    def __post_init__(self):
        if isinstance(self.left, Product) or isinstance(self.right, Product):
            raise ValueError("products of depth > 2 are not supported")

    @property
    def factors(self):
        return (self.left, self.right)


def n_points(points) -> int:
    if isinstance(points, tuple):
        return len(points[0])
    return len(points)


def take_points(points, idx):
    if isinstance(points, tuple):
        return (points[0][idx], points[1][idx])
    return points[idx]


def sample_points(space: SampleSpace, level: int = 0):
    """A representative point set: all atoms, or the quadrature nodes of a level."""
    if isinstance(space, Finite):
        return space.atoms
    if isinstance(space, Grid):
        return space.rule(level, max_depth=min(20, space.config.max_depth)).points
    left = sample_points(space.left, level)
    right = sample_points(space.right, level)
    i, j = np.meshgrid(np.arange(len(left)), np.arange(len(right)), indexing="ij")
    return (left[i.ravel()], right[j.ravel()])


# ---------------------------------------------------------------------------
# Quadrature
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GridRule:
    points: np.ndarray
    weights: np.ndarray
    # node ranges of the endpoint shells, outermost shell first
    left: slice
    left_depth: int
    right: slice
    right_depth: int
    q: int


def _depth(endpoint, h, max_depth):
    if endpoint == 0.0:
        return max_depth
    d = int(math.floor(math.log2(h / (abs(endpoint) * _ENDPOINT_RESOLUTION))))
    return max(_TAIL_SHELLS + 2, min(max_depth, d))


@functools.lru_cache(maxsize=256)
def _grid_rule(a, b, cfg, level, max_depth):
    q = cfg.nodes_per_panel
    n = cfg.base_panels * 2**level
    h = (b - a) / n
    x, w = gauss_legendre(q)
    pts, wts = [], []
    # interior panels
    lo = a + h * np.arange(1, n - 1)
    half = 0.5 * h
    pts.append((lo[:, None] + half * (x[None, :] + 1.0)).ravel())
    wts.append(np.broadcast_to(half * w, (n - 2, q)).ravel())
    n_interior = (n - 2) * q

    def shells(depth):
        j = np.arange(depth)
        outer = h * 2.0 ** (-j)
        inner = outer * 0.5
        hs = 0.5 * (outer - inner)
        off = inner[:, None] + hs[:, None] * (x[None, :] + 1.0)
        return off, np.broadcast_to(hs[:, None] * w[None, :], off.shape)

    dl = _depth(a, h, max_depth)
    off, ww = shells(dl)
    pts.append((a + off).ravel())
    wts.append(ww.ravel())
    dr = _depth(b, h, max_depth)
    off, ww = shells(dr)
    pts.append((b - off).ravel())
    wts.append(ww.ravel())
    points = np.concatenate(pts)
    weights = np.concatenate(wts)
    points.setflags(write=False)
    weights.setflags(write=False)
    left = slice(n_interior, n_interior + dl * q)
    right = slice(left.stop, left.stop + dr * q)
    return GridRule(points, weights, left, dl, right, dr, q)


@dataclass
class QuadResult:
    value: np.ndarray
    error: float
    status: str
    trace: list = field(default_factory=list)
    evidence: str = ""

    @property
    def ok(self):
        return self.status == CONVERGED

    def require(self, what="integral"):
        if not self.ok:
            raise DivergentIntegral(f"{what}: {self.status} ({self.evidence})", self)
        return self.value


def _tail(abs_shells, signed_shells):
    """Classify one endpoint from its shell contributions (outermost first).

    Returns (status, signed tail estimate, tail error bound, evidence).
    """
    zero = np.zeros(signed_shells.shape[:-1])
    last = abs_shells[-_TAIL_SHELLS:]
    if last[-1] == 0.0:
        return CONVERGED, zero, 0.0, ""
    if np.any(last[:-1] == 0.0):
        return INCONCLUSIVE, zero, float(last[-1]), "isolated nonzero shells at depth"
    ratios = last[1:] / last[:-1]
    r = ratios[-1]
    if r >= 1.0 - 1e-10:
        return DIVERGENT, zero, math.inf, f"endpoint shells not decaying (ratio {r:.6g})"
    spread = float(np.max(np.abs(ratios - r)))
    if spread <= 1e-3 * r:
        # geometric tail: extrapolate the remaining shells
        factor = r / (1.0 - r)
        tail = signed_shells[..., -1] * factor
        err = float(last[-1]) * (factor * spread / (1.0 - r) + 1e-12 * factor)
        if r > 1.0 - 1e-3:
            return INCONCLUSIVE, tail, err, f"slowly decaying geometric tail (ratio {r:.6g})"
        return CONVERGED, tail, err, ""
    if np.all(np.diff(ratios) <= 1e-12) or r < 0.25:
        return CONVERGED, zero, float(last[-1]) * r / (1.0 - r), ""
    return INCONCLUSIVE, zero, float(last[-1]) * r / (1.0 - r), f"irregular endpoint tail (ratio {r:.6g})"


def _as_values(f, points):
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        return np.asarray(f(points), dtype=float)


def _quad_finite(space, f):
    vals = _as_values(f, space.atoms)
    if not np.all(np.isfinite(vals)):
        return QuadResult(np.sum(vals, axis=-1), math.inf, DIVERGENT, [], "non-finite integrand")
    value = np.sum(vals, axis=-1)
    return QuadResult(value, 0.0, CONVERGED, [value])


def _quad_grid(space: Grid, f):
    cfg = space.config
    prev = None
    prev_abs = None
    trace = []
    status, evidence, err = INCONCLUSIVE, "refinement budget exhausted", math.inf
    value = None
    for level in range(cfg.levels + 1):
        rule = space.rule(level)
        vals = _as_values(f, rule.points)
        if not np.all(np.isfinite(vals)):
            return QuadResult(np.full(vals.shape[:-1], np.inf), math.inf, DIVERGENT, trace,
                              f"non-finite integrand at level {level}")
        contrib = vals * rule.weights
        absc = np.abs(contrib)
        if absc.ndim > 1:
            absc = absc.reshape(-1, absc.shape[-1]).sum(axis=0)
        abs_total = float(absc.sum())
        value = contrib.sum(axis=-1)
        tail_err = 0.0
        tail_status = CONVERGED
        tail_evidence = ""
        for sl, depth in ((rule.left, rule.left_depth), (rule.right, rule.right_depth)):
            s_abs = absc[sl].reshape(depth, rule.q).sum(axis=1)
            s_sig = contrib[..., sl].reshape(contrib.shape[:-1] + (depth, rule.q)).sum(axis=-1)
            st, tail, terr, ev = _tail(s_abs, s_sig)
            if st == DIVERGENT:
                return QuadResult(value, math.inf, DIVERGENT, trace + [value], ev)
            value = value + tail
            tail_err += terr
            if st == INCONCLUSIVE:
                tail_status, tail_evidence = INCONCLUSIVE, ev
        trace.append(value)
        if prev_abs is not None and prev_abs > 0 and abs_total > cfg.growth_threshold * prev_abs:
            return QuadResult(value, math.inf, DIVERGENT, trace,
                              f"integral grew {abs_total / prev_abs:.3g}x between levels")
        if prev is not None:
            err = float(np.max(np.abs(value - prev))) + tail_err
            scale = max(abs_total, 1e-300)
            if err <= cfg.rtol * scale or abs_total == 0.0:
                if tail_status == CONVERGED:
                    return QuadResult(value, err, CONVERGED, trace)
                status, evidence = INCONCLUSIVE, tail_evidence
            else:
                status, evidence = INCONCLUSIVE, f"no convergence to rtol (err {err:.3g})"
        prev, prev_abs = value, abs_total
    return QuadResult(value, err, status, trace, evidence)


def _factor_rule(space, level):
    if isinstance(space, Finite):
        return space.atoms, np.ones(space.n)
    rule = space.rule(level, max_depth=min(30, space.config.max_depth))
    # the uncovered gap next to each endpoint is as wide as the innermost shell;
    # count that shell twice instead of dropping the gap
    w = np.array(rule.weights)
    for sl, depth in ((rule.left, rule.left_depth), (rule.right, rule.right_depth)):
        w[sl.start + (depth - 1) * rule.q: sl.stop] *= 2.0
    return rule.points, w


def _quad_product(space: Product, f):
    finite = isinstance(space.left, Finite) and isinstance(space.right, Finite)
    levels = [0] if finite else range(space_config(space).levels + 1)
    cfg = space_config(space)
    prev, prev_abs, trace = None, None, []
    value, err = None, math.inf
    for level in levels:
        p1, w1 = _factor_rule(space.left, level)
        p2, w2 = _factor_rule(space.right, level)
        i, j = np.meshgrid(np.arange(len(p1)), np.arange(len(p2)), indexing="ij")
        i, j = i.ravel(), j.ravel()
        vals = _as_values(f, (p1[i], p2[j]))
        if not np.all(np.isfinite(vals)):
            return QuadResult(np.sum(vals, axis=-1), math.inf, DIVERGENT, trace, "non-finite integrand")
        contrib = vals * (w1[i] * w2[j])
        value = contrib.sum(axis=-1)
        abs_total = float(np.abs(contrib).sum())
        trace.append(value)
        if finite:
            return QuadResult(value, 0.0, CONVERGED, trace)
        if prev_abs is not None and prev_abs > 0 and abs_total > cfg.growth_threshold * prev_abs:
            return QuadResult(value, math.inf, DIVERGENT, trace, "integral grew between levels")
        if prev is not None:
            err = float(np.max(np.abs(value - prev)))
            if err <= cfg.rtol * max(abs_total, 1e-300) or abs_total == 0.0:
                return QuadResult(value, err, CONVERGED, trace)
        prev, prev_abs = value, abs_total
    return QuadResult(value, err, INCONCLUSIVE, trace, "product refinement did not settle")


def space_config(space) -> QuadratureConfig:
    if isinstance(space, Grid):
        return space.config
    if isinstance(space, Product):
        for s in space.factors:
            if isinstance(s, Grid):
                return s.config
    return DEFAULT_QUADRATURE


def quad(space: SampleSpace, f: Callable) -> QuadResult:
    """Integrate ``f(points)`` against the base measure of ``space``.

    ``f`` must be vectorized: it receives a point array (see module docstring)
    and returns values whose last axis runs over the points; leading axes are
    integrated componentwise.
    """
    if isinstance(space, Finite):
        return _quad_finite(space, f)
    if isinstance(space, Grid):
        return _quad_grid(space, f)
    if isinstance(space, Product):
        return _quad_product(space, f)
    raise TypeError(f"unsupported space {space!r}")


# ---------------------------------------------------------------------------
# Measures
# ---------------------------------------------------------------------------


class Measure:
    """A finite measure given by its density against the base of ``space``.

    Use the constructors :func:`finite_measure`, :func:`density_measure` and
    :func:`product_measure` rather than instantiating directly.
    """

    def __init__(self, space, density, log_density=None, signed_allowed=False,
                 weights=None, factors=None):
        self.space = space
        self._density = density
        self._log_density = log_density
        self.signed_allowed = signed_allowed
        self.weights = weights
        self.factors = factors

    def __repr__(self):
        if self.weights is not None:
            return f"Measure({self.space!r}, weights={self.weights.tolist()})"
        return f"Measure({self.space!r})"

    def density(self, points):
        if self._density is None:
            return np.exp(self._log_density(points))
        return np.asarray(self._density(points), dtype=float)

    def log_density(self, points):
        if self._log_density is not None:
            return np.asarray(self._log_density(points), dtype=float)
        with np.errstate(divide="ignore"):
            return np.log(self.density(points))

    def quad(self, g) -> QuadResult:
        """``∫ g dm`` with full quadrature diagnostics."""
        return quad(self.space, lambda pts: np.asarray(g(pts), dtype=float) * self.density(pts))

    def integrate(self, g):
        return self.quad(g).require("measure integral")

    @property
    def mass(self) -> float:
        return float(self.integrate(lambda pts: np.ones(n_points(pts))))

    def is_probability(self, tol=1e-9) -> bool:
        return abs(self.mass - 1.0) <= tol

    def scaled(self, c: float) -> "Measure":
        if self.weights is not None:
            return finite_measure(self.space, c * self.weights, signed_allowed=self.signed_allowed)
        d = self._density
        return Measure(self.space, lambda p: c * d(p) if d else c * np.exp(self._log_density(p)),
                       signed_allowed=self.signed_allowed)


def finite_measure(space, weights, signed_allowed=False) -> Measure:
    if isinstance(space, int):
        space = Finite(space)
    w = np.array(weights, dtype=float)
    expected = space.n if isinstance(space, Finite) else None
    if isinstance(space, Product) and all(isinstance(s, Finite) for s in space.factors):
        expected = space.left.n * space.right.n
        w = w.reshape(-1)
    if expected is None:
        raise SpaceMismatch("weights need a finite (or finite x finite) space")
    if w.shape != (expected,):
        raise SpaceMismatch(f"expected {expected} weights, got shape {w.shape}")
    if not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite")
    if not signed_allowed and np.any(w < 0):
        raise ValueError("negative weight in unsigned measure")
    w.setflags(write=False)
    if isinstance(space, Product):
        n2 = space.right.n
        return Measure(space, lambda p: w[p[0] * n2 + p[1]], signed_allowed=signed_allowed, weights=w)
    return Measure(space, lambda idx: w[idx], signed_allowed=signed_allowed, weights=w)


def uniform_measure(space, total=1.0) -> Measure:
    if isinstance(space, int):
        space = Finite(space)
    if isinstance(space, Finite):
        return finite_measure(space, np.full(space.n, total / space.n))
    if isinstance(space, Grid):
        c = total / (space.b - space.a)
        return density_measure(space, lambda t: np.full(np.shape(t), c))
    raise SpaceMismatch("uniform measure needs a finite or grid space")


def lebesgue(space: Grid) -> Measure:
    return density_measure(space, lambda t: np.ones(np.shape(t)), log_density=lambda t: np.zeros(np.shape(t)))


def density_measure(space, density=None, log_density=None, signed_allowed=False) -> Measure:
    """Measure with a density callback against Lebesgue (grid) or the product base."""
    if density is None and log_density is None:
        raise ValueError("need density or log_density")
    if isinstance(space, Finite):
        vals = density(space.atoms) if density is not None else np.exp(log_density(space.atoms))
        return finite_measure(space, vals, signed_allowed=signed_allowed)
    return Measure(space, density, log_density, signed_allowed=signed_allowed)


def product_measure(m1: Measure, m2: Measure) -> Measure:
    space = Product(m1.space, m2.space)

    def dens(p):
        return m1.density(p[0]) * m2.density(p[1])

    def logd(p):
        return m1.log_density(p[0]) + m2.log_density(p[1])

    weights = None
    if m1.weights is not None and m2.weights is not None:
        weights = np.outer(m1.weights, m2.weights).ravel()
    return Measure(space, dens, logd, signed_allowed=m1.signed_allowed or m2.signed_allowed,
                   weights=weights, factors=(m1, m2))


# ---------------------------------------------------------------------------
# Statistics (partition maps between sample spaces)
# ---------------------------------------------------------------------------


class Statistic:
    """A surjective partition map ``source -> target``.

    Kinds: ``"identity"``, ``"partition"`` (finite source, class index per
    atom), ``"intervals"`` (grid source split at breakpoints) and
    ``"projection"`` (product source onto factor 1 or 2).
    """

    def __init__(self, kind, source, target, assignment=None, breakpoints=None, which=None):
        self.kind = kind
        self.source = source
        self.target = target
        self.assignment = assignment
        self.breakpoints = breakpoints
        self.which = which

    def __repr__(self):
        return f"Statistic({self.kind}, {self.source!r} -> {self.target!r})"

    @classmethod
    def identity(cls, source):
        return cls("identity", source, source)

    @classmethod
    def partition(cls, source, classes):
        """``classes``: list of atom lists (0-based) or an assignment vector."""
        if isinstance(source, int):
            source = Finite(source)
        if not isinstance(source, Finite):
            raise PartitionMismatch("partition statistics need a finite source")
        if len(classes) and np.ndim(classes[0]) == 0 and len(classes) == source.n:
            assignment = np.asarray(classes, dtype=int)
        else:
            assignment = np.full(source.n, -1)
            for ci, cls_atoms in enumerate(classes):
                for atom in cls_atoms:
                    if not 0 <= atom < source.n:
                        raise PartitionMismatch(f"atom {atom} outside Finite({source.n})")
                    if assignment[atom] != -1:
                        raise PartitionMismatch(f"atom {atom} in two classes")
                    assignment[atom] = ci
        if np.any(assignment < 0):
            missing = np.flatnonzero(assignment < 0).tolist()
            raise PartitionMismatch(f"partition does not cover atoms {missing}")
        n_classes = int(assignment.max()) + 1
        if set(assignment.tolist()) != set(range(n_classes)):
            raise PartitionMismatch("partition classes must be non-empty")
        assignment.setflags(write=False)
        return cls("partition", source, Finite(n_classes), assignment=assignment)

    @classmethod
    def intervals(cls, source: Grid, breakpoints: Sequence[float]):
        bp = np.asarray(sorted(breakpoints), dtype=float)
        if not isinstance(source, Grid):
            raise PartitionMismatch("interval statistics need a grid source")
        if np.any(bp <= source.a) or np.any(bp >= source.b) or np.any(np.diff(bp) <= 0):
            raise PartitionMismatch("breakpoints must be distinct and interior")
        return cls("intervals", source, Finite(len(bp) + 1), breakpoints=bp)

    @classmethod
    def projection(cls, source: Product, which: int):
        if not isinstance(source, Product) or which not in (1, 2):
            raise PartitionMismatch("projection needs a product source and which in {1, 2}")
        return cls("projection", source, source.factors[which - 1], which=which)

    @property
    def classes(self):
        """Atom lists per class (partition kind)."""
        return [np.flatnonzero(self.assignment == i) for i in range(self.target.n)]

    def interval_bounds(self):
        edges = np.concatenate([[self.source.a], self.breakpoints, [self.source.b]])
        return list(zip(edges[:-1], edges[1:]))

    def apply(self, points):
        if self.kind == "identity":
            return points
        if self.kind == "partition":
            return self.assignment[points]
        if self.kind == "intervals":
            return np.searchsorted(self.breakpoints, points, side="left")
        return points[self.which - 1]

    def check_source(self, space):
        if space != self.source:
            raise PartitionMismatch(f"statistic defined on {self.source!r}, measure lives on {space!r}")


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------


def total_variation(m: Measure) -> float:
    if m.weights is not None:
        return float(np.sum(np.abs(m.weights)))
    res = quad(m.space, lambda pts: np.abs(m.density(pts)))
    return float(res.require("total variation"))


def radon_nikodym(m1: Measure, m2: Measure):
    """Pointwise ratio ``dm1/dm2``.

    Returns an array over atoms for finite spaces and a vectorized callable
    otherwise.
    """
    if m1.space != m2.space:
        raise SpaceMismatch("measures live on different spaces")
    if m1.weights is not None and m2.weights is not None:
        if np.any(m2.weights <= 0):
            bad = np.flatnonzero(m2.weights <= 0).tolist()
            raise ZeroDenominator(f"reference vanishes at atoms {bad}")
        return m1.weights / m2.weights
    probe = sample_points(m2.space)
    if np.any(m2.density(probe) <= 0):
        raise ZeroDenominator("reference density vanishes at a quadrature node")

    def ratio(points):
        return np.exp(m1.log_density(points) - m2.log_density(points)) if not m1.signed_allowed \
            else m1.density(points) / m2.density(points)

    return ratio


def _class_mass(m: Measure, grid: Grid, lo, hi):
    sub = grid.sub(lo, hi)
    return float(quad(sub, lambda t: m.density(t)).require("class mass"))


def pushforward_statistic(m: Measure, k: Statistic) -> Measure:
    k.check_source(m.space)
    if k.kind == "identity":
        return m
    if k.kind == "partition":
        w = np.bincount(k.assignment, weights=m.weights, minlength=k.target.n)
        return finite_measure(k.target, w, signed_allowed=m.signed_allowed)
    if k.kind == "intervals":
        w = [_class_mass(m, m.space, lo, hi) for lo, hi in k.interval_bounds()]
        return finite_measure(k.target, w, signed_allowed=m.signed_allowed)
    # projection
    if m.factors is not None:
        keep, other = (m.factors[0], m.factors[1]) if k.which == 1 else (m.factors[1], m.factors[0])
        return keep.scaled(other.mass)
    return marginal(m, k.which)


def marginal(m: Measure, which: int) -> Measure:
    """Marginal of a joint measure on a product space onto factor ``which``."""
    space = m.space
    keep = space.factors[which - 1]
    other = space.factors[2 - which]

    def at(pt_keep, pts_other):
        full = np.full(n_points(pts_other), pt_keep)
        if isinstance(keep, Finite):
            full = full.astype(int)
        return (full, pts_other) if which == 1 else (pts_other, full)

    def value(pt):
        res = quad(other, lambda po: m.density(at(pt, po)))
        return float(res.require("marginal"))

    if isinstance(keep, Finite):
        return finite_measure(keep, [value(i) for i in range(keep.n)], signed_allowed=m.signed_allowed)
    return density_measure(keep, lambda t: np.array([value(ti) for ti in np.atleast_1d(t)]).reshape(np.shape(t)),
                           signed_allowed=m.signed_allowed)
