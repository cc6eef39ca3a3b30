"""Orlicz-space numerics: Young functions, Luxemburg norms, exponential tangent
space membership, the similarity preorder on measures, e-convergence
diagnostics and similarity along exponential segments.

Every verdict is three-valued (holds / fails / inconclusive) and carries the
quadrature evidence it was decided on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import NotInOrliczSpace
from .spaces import CONVERGED, DIVERGENT, Finite, Measure, QuadResult, n_points, quad, sample_points

HOLDS = "holds"
FAILS = "fails"
INCONCLUSIVE = "inconclusive"

TANGENT_GRID = tuple(2.0 ** -i for i in range(21))  # 1, 1/2, ..., 2^-20
EXPONENT_GRID = tuple(1.0 + 2.0 ** -i for i in range(15))  # 2, 1.5, ..., 1 + 2^-14


# ---------------------------------------------------------------------------
# Young functions
# ---------------------------------------------------------------------------


def _log_cosh_m1(u):
    # cosh u - 1 = e^u (1 - e^-u)^2 / 2 for u >= 0
    u = np.abs(u)
    with np.errstate(divide="ignore"):
        return u + 2.0 * np.log(-np.expm1(-u)) - math.log(2.0)


def _log_expabs(u):
    # e^u - u - 1
    u = np.abs(u)
    small = u < 1.0
    out = np.empty_like(u)
    with np.errstate(divide="ignore"):
        out[small] = np.log(np.expm1(u[small]) - u[small])
        big = u[~small]
        out[~small] = big + np.log1p(-(big + 1.0) * np.exp(-big))
    return out


@dataclass(frozen=True)
class YoungFunction:
    """``φ(t) = base(λ t)^q`` with base ``cosh - 1``, ``|t|^p`` or ``e^|t| - |t| - 1``."""

    base: str = "cosh"
    p: float = 2.0
    stretch: float = 1.0
    power: float = 1.0

    def __post_init__(self):
        if self.base not in ("cosh", "power", "expabs"):
            raise ValueError(f"unknown Young base {self.base!r}")
        if self.base == "power" and not self.p > 1:
            raise ValueError("power Young function needs p > 1")
        if not self.stretch > 0:
            raise ValueError("stretch must be positive")
        if not self.power >= 1:
            raise ValueError("power must be >= 1")

    @classmethod
    def cosh(cls, **kw):
        return cls("cosh", **kw)

    @classmethod
    def powerp(cls, p, **kw):
        return cls("power", p=p, **kw)

    @classmethod
    def expabs(cls, **kw):
        return cls("expabs", **kw)

    def with_stretch(self, lam):
        return YoungFunction(self.base, self.p, self.stretch * lam, self.power)

    def with_power(self, q):
        return YoungFunction(self.base, self.p, self.stretch, self.power * q)

    def log(self, t):
        """``ln φ(t)``, ``-inf`` at 0; stable for large arguments."""
        u = self.stretch * np.abs(np.asarray(t, dtype=float))
        if self.base == "cosh":
            lb = _log_cosh_m1(u)
        elif self.base == "power":
            with np.errstate(divide="ignore"):
                lb = self.p * np.log(u)
        else:
            lb = _log_expabs(np.atleast_1d(u)).reshape(np.shape(u))
        return self.power * lb

    def __call__(self, t):
        return np.exp(self.log(t))

    def to_dict(self):
        return {"base": self.base, "p": self.p, "stretch": self.stretch, "power": self.power}


# ---------------------------------------------------------------------------
# Verdicts
# ---------------------------------------------------------------------------


@dataclass
class OrliczVerdict:
    status: str
    witness: object = None
    grid: list = field(default_factory=list)
    traces: list = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return self.status == HOLDS

    def to_dict(self):
        return {"status": self.status, "witness": self.witness, "grid": list(self.grid), "traces": self.traces}


def _trace(param, res: QuadResult):
    return {
        "param": param,
        "status": res.status,
        "value": float(res.value) if res.ok else None,
        "evidence": res.evidence,
        "levels": [float(v) if np.isfinite(v) else None for v in np.ravel(res.trace)],
    }


def _log_values(f, measure: Measure, pts):
    """``ln |f|`` on points, where ``f`` is a callable or an atom array."""
    if callable(f):
        v = np.asarray(f(pts), dtype=float)
    else:
        v = np.asarray(f, dtype=float)[pts]
    return np.broadcast_to(v, (n_points(pts),))


def _integral_of_exp(space, log_integrand) -> QuadResult:
    def g(pts):
        with np.errstate(over="ignore", invalid="ignore"):
            return np.exp(log_integrand(pts))
    return quad(space, g)


def _search(grid, make_log_integrand, space, stop_on_first=True) -> OrliczVerdict:
    traces, statuses = [], []
    for param in grid:
        res = _integral_of_exp(space, make_log_integrand(param))
        traces.append(_trace(param, res))
        statuses.append(res.status)
        if res.status == CONVERGED:
            return OrliczVerdict(HOLDS, param, list(grid), traces)
    status = FAILS if all(s == DIVERGENT for s in statuses) else INCONCLUSIVE
    return OrliczVerdict(status, None, list(grid), traces)


# ---------------------------------------------------------------------------
# Norms
# ---------------------------------------------------------------------------


def _modular(f, mu: Measure, phi: YoungFunction, a) -> float:
    """``∫ φ(f/a) dμ``; ``inf`` when the quadrature does not converge."""
    def log_integrand(pts):
        fv = _log_values(f, mu, pts)
        return phi.log(fv / a) + mu.log_density(pts)

    res = _integral_of_exp(mu.space, log_integrand)
    return float(res.value) if res.ok else math.inf


def orlicz_norm(f, mu: Measure, phi: YoungFunction, rtol=1e-12, max_doublings=64) -> float:
    """Luxemburg norm ``inf{a > 0 : ∫ φ(f/a) dμ ≤ 1}`` by bracketing and bisection."""
    pts = sample_points(mu.space)
    fv = np.abs(_log_values(f, mu, pts))
    scale = float(np.max(fv[np.isfinite(fv)], initial=0.0)) or 1.0
    a = scale
    if _modular(f, mu, phi, a) <= 1.0:
        hi = a
        for _ in range(max_doublings + 1):
            a = hi / 2.0
            if _modular(f, mu, phi, a) > 1.0:
                lo = a
                break
            hi = a
        else:
            return 0.0
    else:
        lo = a
        for _ in range(max_doublings):
            a = lo * 2.0
            if _modular(f, mu, phi, a) <= 1.0:
                hi = a
                break
            lo = a
        else:
            raise NotInOrliczSpace(f"no finite bracket up to a = 2^{max_doublings}·{scale:g}")
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if _modular(f, mu, phi, mid) <= 1.0:
            hi = mid
        else:
            lo = mid
    return hi


def stretch_equivalence_check(f, mu: Measure, phi: YoungFunction, lam) -> dict:
    """``‖f‖_{φ(λ·)}`` against ``λ‖f‖_φ``."""
    lhs = orlicz_norm(f, mu, phi.with_stretch(lam))
    base = orlicz_norm(f, mu, phi)
    rhs = lam * base
    return {"stretched": lhs, "scaled": rhs, "residual": abs(lhs - rhs), "bound": 1e-8 * (1.0 + rhs)}


# ---------------------------------------------------------------------------
# Membership and similarity predicates
# ---------------------------------------------------------------------------


def in_exponential_tangent(f, mu: Measure, grid=TANGENT_GRID) -> OrliczVerdict:
    """Is ``∫ e^{t|f|} dμ`` finite for some ``t`` on the decreasing grid?"""

    def make(t):
        return lambda pts: t * np.abs(_log_values(f, mu, pts)) + mu.log_density(pts)

    return _search(grid, make, mu.space)


def log_ratio(mu_prime: Measure, mu: Measure):
    if mu_prime.space != mu.space:
        raise ValueError("measures live on different spaces")
    return lambda pts: mu_prime.log_density(pts) - mu.log_density(pts)


def preceq(mu_prime: Measure, mu: Measure, grid=EXPONENT_GRID) -> OrliczVerdict:
    """``μ′ ≼ μ``: ``dμ′/dμ ∈ L^p(μ)`` for some ``p`` on the grid toward 1."""
    lr = log_ratio(mu_prime, mu)

    def make(p):
        return lambda pts: p * lr(pts) + mu.log_density(pts)

    return _search(grid, make, mu.space)


def similar(mu_prime: Measure, mu: Measure, grid=EXPONENT_GRID) -> OrliczVerdict:
    a = preceq(mu_prime, mu, grid)
    b = preceq(mu, mu_prime, grid)
    if a.holds and b.holds:
        status = HOLDS
    elif FAILS in (a.status, b.status):
        status = FAILS
    else:
        status = INCONCLUSIVE
    witness = [a.witness, b.witness] if status == HOLDS else None
    return OrliczVerdict(status, witness, list(grid), [{"forward": a.to_dict()}, {"backward": b.to_dict()}])


def transitivity_bound(p, p_prime) -> float:
    """Exponent guaranteed for ``μ″ ≼ μ`` from witnesses of ``μ″ ≼ μ′`` and ``μ′ ≼ μ``."""
    return p * p_prime / (p + p_prime - 1.0)


# ---------------------------------------------------------------------------
# Diagnostics
# ---------------------------------------------------------------------------


def _lp_seminorm_minus_one(space, log_weight, log_ratio_fn, p) -> QuadResult:
    def g(pts):
        lr = log_ratio_fn(pts)
        with np.errstate(over="ignore", invalid="ignore"):
            return np.abs(np.expm1(lr)) ** p * np.exp(log_weight(pts))
    return quad(space, g)


def e_convergence_diagnostic(log_gs: Sequence[Callable], log_g: Callable, mu: Measure, n_max=None,
                             ps=(2, 4, 8)) -> dict:
    """Per ``n``: ``‖g_n - g‖₁`` and ``‖g_n/g - 1‖_p``, ``‖g/g_n - 1‖_p`` in ``L^p(g μ)``.

    Densities are passed as log-density callables against ``μ``.  No limit is
    certified; tail flags only record whether the last half of each column is
    finite and non-increasing.
    """
    space = mu.space
    n_max = len(log_gs) if n_max is None else min(n_max, len(log_gs))
    rows = []

    def log_w(pts):
        return log_g(pts) + mu.log_density(pts)

    for n in range(n_max):
        lgn = log_gs[n]
        row = {"n": n + 1}

        def l1(pts, _l=lgn):
            with np.errstate(over="ignore", invalid="ignore"):
                return np.abs(np.exp(_l(pts)) - np.exp(log_g(pts))) * np.exp(mu.log_density(pts))

        res = quad(space, l1)
        row["l1"] = float(res.value) if res.ok else None
        row["l1_status"] = res.status
        for p in ps:
            fwd = _lp_seminorm_minus_one(space, log_w, lambda pts, _l=lgn: _l(pts) - log_g(pts), p)
            bwd = _lp_seminorm_minus_one(space, log_w, lambda pts, _l=lgn: log_g(pts) - _l(pts), p)
            row[f"ratio_p{p}"] = float(fwd.value) ** (1.0 / p) if fwd.ok else None
            row[f"inverse_p{p}"] = float(bwd.value) ** (1.0 / p) if bwd.ok else None
            row[f"ratio_p{p}_status"] = fwd.status
            row[f"inverse_p{p}_status"] = bwd.status
        rows.append(row)

    columns = ["l1"] + [f"{k}_p{p}" for p in ps for k in ("ratio", "inverse")]
    flags = {}
    for c in columns:
        tail = [r[c] for r in rows[len(rows) // 2:]]
        finite = all(v is not None for v in tail)
        flags[c] = bool(finite and all(b <= a * (1 + 1e-9) + 1e-15 for a, b in zip(tail, tail[1:])))
    return {"rows": rows, "tail_monotone": flags}


def segment_similarity(f0: Callable, f1: Callable, mu0: Measure, lambdas=(0.25, 0.5, 0.75),
                       grid=EXPONENT_GRID) -> dict:
    """Similarity along ``μ_λ = exp(f₀ + λ(f₁ - f₀)) μ₀``.

    Checks that interior measures are pairwise similar and that each interior
    measure is dominated by both endpoints.
    """
    from .spaces import Measure as _M

    def seg(lam):
        return _M(mu0.space, None, log_density=lambda pts, _l=lam: (1 - _l) * f0(pts) + _l * f1(pts)
                  + mu0.log_density(pts))

    ends = {0.0: seg(0.0), 1.0: seg(1.0)}
    interior = {lam: seg(lam) for lam in lambdas}
    pairs = []
    for i, a in enumerate(lambdas):
        for b in lambdas[i + 1:]:
            v = similar(interior[a], interior[b], grid)
            pairs.append({"lambda": [a, b], "status": v.status, "witness": v.witness})
    dominated = []
    for lam in lambdas:
        for e, em in ends.items():
            v = preceq(interior[lam], em, grid)
            dominated.append({"lambda": lam, "endpoint": e, "status": v.status, "witness": v.witness})
    ok = all(p["status"] == HOLDS for p in pairs) and all(d["status"] == HOLDS for d in dominated)
    return {"pairs": pairs, "dominated": dominated, "status": HOLDS if ok else (
        FAILS if any(r["status"] == FAILS for r in pairs + dominated) else INCONCLUSIVE)}
