"""Invariance under sufficient statistics, monotonicity, information loss and
mass-binned fits of candidate fields to the invariant tensor bases."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import IllConditioned, NotSufficient, PartitionMismatch, SpaceMismatch, ZeroMarginal
from .markov import check_sufficiency, conditional_distribution, random_partition
from .models import ParametrizedModel, box_lattice, make_step_model, mass, pushforward_model
from .spaces import Finite, Grid, Product, Statistic, finite_measure, n_points, quad
from .tensors import ac_array, fisher_form, fisher_matrix, moment_tensor, one_form_A

BIN_WIDTH = 0.05

# ---------------------------------------------------------------------------
# Invariance, monotonicity, information loss
# ---------------------------------------------------------------------------


@dataclass
class InvarianceReport:
    deviations: dict  # tensor -> {"abs": ..., "rel": ...}
    n_points: int
    sufficiency: dict

    @property
    def max_abs(self) -> float:
        return max(d["abs"] for d in self.deviations.values())

    def to_dict(self):
        return {"deviations": self.deviations, "lattice_points": self.n_points, "sufficiency": self.sufficiency}


def _tensor_set(m, x):
    d = m.dim
    A = np.array([one_form_A(m, x, e).value for e in np.eye(d)])
    return {"A": A, "fisher": fisher_matrix(m, x).value, "ac": ac_array(m, x)}


def invariance_report(m: ParametrizedModel, kappa: Statistic, n=5, axes=None, force=False) -> InvarianceReport:
    """Compare A, Fisher and AC on ``m`` and on ``κ_* m`` over a lattice."""
    verdict = check_sufficiency(m, kappa, n=n, axes=axes)
    if not verdict.sufficient and not force:
        raise NotSufficient(f"statistic is {verdict.verdict} (deviation {verdict.deviation:.3g})")
    push = pushforward_model(m, kappa)
    lattice, _ = box_lattice(m.box, n, axes)
    dev = {k: {"abs": 0.0, "rel": 0.0} for k in ("A", "fisher", "ac")}
    for x in lattice:
        before, after = _tensor_set(m, x), _tensor_set(push, x)
        for k in dev:
            a = float(np.max(np.abs(before[k] - after[k])))
            scale = float(np.max(np.abs(before[k])))
            dev[k]["abs"] = max(dev[k]["abs"], a)
            # relative to max(|value|, 1) so vanishing tensors do not blow up the ratio
            dev[k]["rel"] = max(dev[k]["rel"], a / max(scale, 1.0))
    return InvarianceReport(dev, len(lattice), verdict.to_dict())


def monotonicity_gap(m: ParametrizedModel, kappa: Statistic, x, V) -> float:
    """``g(V, V) - g̃(V, V)`` with ``g̃`` the Fisher form of ``κ_* m``."""
    push = pushforward_model(m, kappa)
    return fisher_form(m, x, V, V).value - fisher_form(push, x, V, V).value


@dataclass
class InformationLoss:
    loss: float
    fisher: float
    fisher_push: float
    residual: float

    def to_dict(self):
        return {"loss": self.loss, "fisher": self.fisher, "fisher_push": self.fisher_push,
                "residual": self.residual}


def _fibers(m: ParametrizedModel, kappa: Statistic):
    """Yield ``(class index, fiber space, embed(points) -> model points)``."""
    if kappa.kind == "partition":
        for i, cls in enumerate(kappa.classes):
            sub = Finite(len(cls))
            yield i, sub, (lambda pts, _c=cls: _c[pts])
    elif kappa.kind == "intervals":
        for i, (lo, hi) in enumerate(kappa.interval_bounds()):
            yield i, m.space.sub(lo, hi), (lambda pts: pts)
    elif kappa.kind == "projection":
        keep = kappa.target
        if not isinstance(keep, Finite):
            raise SpaceMismatch("information loss over a projection needs an enumerable kept factor")
        other = m.space.factors[2 - kappa.which]
        for i in range(keep.n):
            def embed(pts, _i=i):
                full = np.full(n_points(pts), _i)
                return (full, pts) if kappa.which == 1 else (pts, full)
            yield i, other, embed
    elif kappa.kind == "identity":
        return
    else:
        raise PartitionMismatch(f"unsupported statistic kind {kappa.kind}")


def information_loss(m: ParametrizedModel, kappa: Statistic, x, V) -> InformationLoss:
    """Fiberwise Fisher information of the conditional models, averaged over ``κ_* p(x)``.

    On each fiber the conditional model has log-derivative
    ``∂_V ln p̄ - ∂_V ln κ_*p̄ ∘ κ``; its second moment under the normalized
    fiber measure is weighted by the fiber mass.
    """
    x = m.check_x(x)
    V = np.atleast_1d(np.asarray(V, dtype=float))
    push = pushforward_model(m, kappa)
    g = fisher_form(m, x, V, V).value
    gt = fisher_form(push, x, V, V).value
    loss = 0.0
    if kappa.kind != "identity":
        push_w = np.exp(push.log_density(x, kappa.target.atoms))
        push_d = push.dlog(x, V, kappa.target.atoms)
        for i, sub, embed in _fibers(m, kappa):
            if push_w[i] <= 0:
                raise ZeroMarginal(f"class {i} has zero mass at x={x.tolist()}")

            def integrand(pts, _i=i, _embed=embed):
                mp = _embed(pts)
                s = m.dlog(x, V, mp) - push_d[_i]
                dens = np.exp(m.log_density(x, mp))
                return np.stack([dens, dens * s * s])

            res = quad(sub, integrand)
            mass_i, raw = res.require("fiber Fisher information")
            fiber_fisher = raw / mass_i
            loss += push_w[i] * fiber_fisher
    return InformationLoss(float(loss), float(g), float(gt), float(abs(g - gt - loss)))


# ---------------------------------------------------------------------------
# Step-model samples and mass-binned fits
# ---------------------------------------------------------------------------

BASES = {
    1: ("c",),
    2: ("f", "d"),
    3: ("t", "a1", "a2"),
}


@dataclass
class StepSample:
    mass: float
    A: float
    fisher: float
    ac: float
    d: np.ndarray
    tau: np.ndarray

    def basis(self, order):
        if order == 1:
            return [self.A]
        if order == 2:
            return [self.fisher, self.A ** 2]
        if order == 3:
            return [self.ac, self.A ** 3, self.A * self.fisher]
        raise ValueError("order must be 1, 2 or 3")


def bin_index(m, width=BIN_WIDTH):
    return int(math.floor(m / width + 1e-9))


def bin_center(k, width=BIN_WIDTH):
    return (k + 0.5) * width


def random_step_model(rng: np.random.Generator, total_mass, n_atoms=None, n_classes=None, statistical=False,
                      x0=0.5):
    """Random positive measure of given mass on ``Finite(n)``, random lumping and τ."""
    n_atoms = n_atoms or int(rng.integers(2, 7))
    n_classes = n_classes or int(rng.integers(2, n_atoms + 1))
    w = rng.dirichlet(np.ones(n_atoms)) * total_mass
    mu = finite_measure(Finite(n_atoms), w)
    kappa = random_partition(rng, n_atoms, n_classes)
    tau = rng.normal(size=n_classes)
    d = np.array([w[c].sum() for c in kappa.classes])
    if statistical:
        tau = tau - (d @ tau) / d.sum()
    return make_step_model(mu, kappa, tau, x0), d, tau


def step_samples(rng: np.random.Generator, masses, per_mass=50, statistical=False, x0=0.5):
    """Evaluate A, Fisher and AC (direction ``∂ₓ``) on random step models at ``x0``."""
    out = []
    for mtot in masses:
        for _ in range(per_mass):
            model, d, tau = random_step_model(rng, mtot, statistical=statistical, x0=x0)
            A = one_form_A(model, [x0], [1.0]).value
            g = fisher_form(model, [x0], [1.0], [1.0]).value
            T = moment_tensor(model, [x0], [1.0], 3).value
            out.append(StepSample(mass(model, [x0]), A, g, T, d, tau))
    return out


@dataclass
class ChentsovFit:
    order: int
    names: tuple
    bins: list = field(default_factory=list)

    @property
    def max_residual(self) -> float:
        return max((b["residual"] for b in self.bins), default=0.0)

    def coefficient(self, name, center=None):
        j = self.names.index(name)
        for b in self.bins:
            if center is None or abs(b["center"] - center) < 1e-12:
                return b["coefficients"][j]
        raise KeyError(center)

    def to_dict(self):
        return {"order": self.order, "names": list(self.names), "bins": self.bins}

    def to_csv_rows(self):
        rows = [["center", "n"] + list(self.names) + ["residual", "degenerate"]]
        for b in self.bins:
            rows.append([b["center"], b["n"]] + b["coefficients"] + [b["residual"], ";".join(b["degenerate"])])
        return rows


def _fit(order, masses, basis, values, width=BIN_WIDTH, zero_tol=1e-13, cond_max=1e10) -> ChentsovFit:
    masses = np.asarray(masses, dtype=float)
    B = np.asarray(basis, dtype=float).reshape(len(masses), -1)
    y = np.asarray(values, dtype=float)
    names = BASES[order]
    fit = ChentsovFit(order, names)
    idx = np.array([bin_index(m, width) for m in masses])
    for k in sorted(set(idx.tolist())):
        sel = idx == k
        Bk, yk = B[sel], y[sel]
        scale = max(1.0, float(np.max(np.abs(Bk))) if Bk.size else 1.0)
        live = [j for j in range(B.shape[1]) if np.max(np.abs(Bk[:, j])) > zero_tol * scale]
        coef = [None] * B.shape[1]
        resid = yk.copy()
        if live:
            Bl = Bk[:, live]
            if np.linalg.matrix_rank(Bl) < len(live) or np.linalg.cond(Bl) > cond_max:
                raise IllConditioned(f"mass bin {bin_center(k, width):.3f}: basis columns "
                                     f"{[names[j] for j in live]} are collinear on {int(sel.sum())} samples")
            c, *_ = np.linalg.lstsq(Bl, yk, rcond=None)
            for j, cj in zip(live, c):
                coef[j] = float(cj)
            resid = yk - Bl @ c
        fit.bins.append({
            "center": round(bin_center(k, width), 12),
            "n": int(sel.sum()),
            "coefficients": coef,
            "residual": float(np.max(np.abs(resid))) if resid.size else 0.0,
            "degenerate": [names[j] for j in range(B.shape[1]) if j not in live],
        })
    return fit


def fit_invariant_oneform(masses, basis, values, width=BIN_WIDTH) -> ChentsovFit:
    """Fit ``candidate = c(m)·A`` per mass bin."""
    return _fit(1, masses, basis, values, width)


def fit_invariant_quadratic(masses, basis, values, width=BIN_WIDTH) -> ChentsovFit:
    """Fit ``candidate = f(m)·g + d(m)·A²`` per mass bin."""
    return _fit(2, masses, basis, values, width)


def fit_invariant_cubic(masses, basis, values, width=BIN_WIDTH) -> ChentsovFit:
    """Fit ``candidate = t(m)·T + a1(m)·A³ + a2(m)·A·g`` per mass bin."""
    return _fit(3, masses, basis, values, width)


FITTERS = {1: fit_invariant_oneform, 2: fit_invariant_quadratic, 3: fit_invariant_cubic}


def fit_samples(order, samples, candidate: Callable[[StepSample], float], width=BIN_WIDTH) -> ChentsovFit:
    masses = [s.mass for s in samples]
    basis = [s.basis(order) for s in samples]
    values = [candidate(s) for s in samples]
    return FITTERS[order](masses, basis, values, width)


def step_moment_oracle(d, tau, n) -> float:
    """``Σ_i d_i τ_i^n``."""
    return float(np.sum(np.asarray(d) * np.asarray(tau) ** n))
