"""Acceptance checks shared by ``infogeom verify-all`` and the test suite.

Each ``criterion_N(rng)`` returns a :class:`CriterionResult`; random inputs
come from per-criterion child seeds so results do not depend on run order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import chentsov as C
from . import markov as K
from . import models as M
from . import natgrad as N
from . import orlicz as O
from . import tensors as T
from .spaces import Finite, Grid, Statistic, finite_measure, lebesgue, uniform_measure

BERNOULLI_EXPR = "x1^(2-w1)*(1-x1)^(w1-1)"


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        summary = self.detail.get("summary", "")
        return f"[{status}] criterion {self.number:2d}: {self.name}" + (f" ({summary})" if summary else "")

    def to_dict(self):
        return {"number": self.number, "name": self.name, "passed": self.passed, "detail": self.detail}


def _rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


# ---------------------------------------------------------------------------
# Random inputs
# ---------------------------------------------------------------------------


class _LogLinear(M.Potential):
    """``ln p̄ = x·h(ω) + b(ω)``: positive, not normalized."""

    exact = True

    def __init__(self, h, b):
        self.h = h
        self.b = b

    def log_density(self, x, points):
        return (self.h @ np.asarray(x, dtype=float) + self.b)[points]

    def dlog(self, x, V, points):
        return (self.h @ np.asarray(V, dtype=float))[points]


def random_finite_model(rng: np.random.Generator, n_atoms=None):
    """Random exact-derivative model on ``Finite(n)`` (normalized or not)."""
    n = n_atoms or int(rng.integers(3, 7))
    d = int(rng.integers(1, 4))
    h = rng.normal(size=(n, d))
    space = Finite(n)
    ref = finite_measure(space, rng.uniform(0.2, 2.0, n))
    box = [(-2.0, 2.0)] * d
    if rng.random() < 0.5:
        return M.exp_family(h, ref, box)
    pot = _LogLinear(h, rng.normal(scale=0.5, size=n))
    return M.ParametrizedModel(box, space, ref, pot, name="loglinear")


def random_catalog_model(rng: np.random.Generator):
    """A finite model from the builtin catalog at a random configuration."""
    kind = int(rng.integers(0, 4))
    if kind == 0:
        return M.bernoulli()
    if kind == 1:
        return M.categorical(int(rng.integers(3, 5)))
    if kind == 2:
        n, d = int(rng.integers(2, 5)), int(rng.integers(1, 3))
        return M.exp_family(rng.normal(size=(n, d)), box=[(-2.0, 2.0)] * d)
    n = int(rng.integers(2, 5))
    return M.scaling(finite_measure(Finite(n), rng.dirichlet(np.ones(n))))


def random_interior(rng, m):
    # categorical boxes (0, 1/(n-1))^(n-1) already keep the point inside the simplex
    lo, hi = m.box[:, 0], m.box[:, 1]
    return lo + (hi - lo) * rng.uniform(0.1, 0.9, m.dim)


def random_congruent(rng, n_classes, n_atoms):
    kappa = K.random_partition(rng, n_atoms, n_classes)
    weights = []
    for cls in kappa.classes:
        w = rng.dirichlet(np.ones(len(cls)))
        w = np.maximum(w, 1e-3)
        weights.append(w / w.sum())
    return kappa, K.congruent_embedding(kappa, weights)


# ---------------------------------------------------------------------------
# Criteria
# ---------------------------------------------------------------------------


def criterion_1(rng=None) -> CriterionResult:
    exact = M.bernoulli()
    fd = M.expression_model(BERNOULLI_EXPR, Finite(2), [(0.0, 1.0)], statistical=True)
    rows, ok = [], True
    for x in (0.1, 0.25, 0.5, 0.9):
        g_true = 1.0 / (x * (1.0 - x))
        t_true = 1.0 / x ** 2 - 1.0 / (1.0 - x) ** 2
        ge = T.fisher_form(exact, [x], [1.0], [1.0]).value
        gf = T.fisher_form(fd, [x], [1.0], [1.0]).value
        te = T.ac_tensor(exact, [x], [1.0], [1.0], [1.0]).value
        tf = T.ac_tensor(fd, [x], [1.0], [1.0], [1.0]).value
        row = {"x": x, "fisher_exact_rel": _rel(ge, g_true), "fisher_fd_rel": _rel(gf, g_true),
               "ac_exact_abs": abs(te - t_true), "ac_fd_abs": abs(tf - t_true)}
        ok &= (row["fisher_exact_rel"] <= 1e-10 and row["fisher_fd_rel"] <= 1e-5
               and row["ac_exact_abs"] <= 1e-10 and row["ac_fd_abs"] <= 1e-4)
        rows.append(row)
    worst = max(r["fisher_fd_rel"] for r in rows)
    return CriterionResult(1, "Bernoulli Fisher and Amari-Chentsov closed forms", ok,
                           {"rows": rows, "summary": f"worst FD Fisher rel error {worst:.2e}"})


def criterion_2(rng, trials=200) -> CriterionResult:
    worst = 0.0
    for _ in range(trials):
        base = random_catalog_model(rng)
        n = base.space.n
        kappa, P = random_congruent(rng, n, n + int(rng.integers(0, 3)))
        m = K.kernel_model(base, P)
        x = random_interior(rng, m)
        rep = C.invariance_report(m, kappa, axes=[[xi] for xi in x])
        worst = max(worst, max(d["rel"] for d in rep.deviations.values()))
    # examples with sufficient statistics
    F3 = Finite(3)
    k1 = Statistic.partition(F3, [[0], [1, 2]])
    examples = {
        "lumped": M.expression_model(["x1", "(1-x1)/2", "(1-x1)/2"], F3, [(0.0, 1.0)], statistical=True),
        "embedded_bernoulli": K.kernel_model(M.bernoulli(), K.congruent_embedding(k1, [[1.0], [0.4, 0.6]])),
    }
    examples["scaled_embedded"] = M.scaled(examples["embedded_bernoulli"])
    ex_worst = {k: C.invariance_report(m, k1, n=3).max_abs for k, m in examples.items()}
    ok = worst <= 1e-8 and max(ex_worst.values()) <= 1e-10
    return CriterionResult(2, "tensor invariance under congruent embeddings", ok, {
        "trials": trials, "max_deviation": worst, "examples": ex_worst,
        "summary": f"max deviation {worst:.2e}, examples {max(ex_worst.values()):.2e}"})


def criterion_3(rng, trials=1000) -> CriterionResult:
    worst, violations = math.inf, 0
    for _ in range(trials):
        m = random_finite_model(rng)
        kappa = K.random_partition(rng, m.space.n, int(rng.integers(1, m.space.n + 1)))
        x = random_interior(rng, m)
        V = rng.normal(size=m.dim)
        gap = C.monotonicity_gap(m, kappa, x, V)
        worst = min(worst, gap)
        violations += gap < -1e-9
    return CriterionResult(3, "monotonicity of the Fisher form under statistics", violations == 0, {
        "trials": trials, "violations": violations, "min_gap": worst,
        "summary": f"{violations} violations, min gap {worst:.2e}"})


def criterion_4(rng, trials=200) -> CriterionResult:
    worst = 0.0
    for i in range(trials):
        if i % 4 == 3:
            base = M.bernoulli() if rng.random() < 0.5 else M.categorical(3)
            P = K.random_kernel(rng, base.space.n, int(rng.integers(2, 4)))
            mu2 = finite_measure(P.target, rng.dirichlet(np.ones(P.target.n)))
            m = K.lift_model_by_kernel(base, P, mu2)
            kappa = Statistic.projection(m.space, 1 if rng.random() < 0.5 else 2)
        else:
            m = random_finite_model(rng)
            kappa = K.random_partition(rng, m.space.n, int(rng.integers(1, m.space.n + 1)))
        x = random_interior(rng, m)
        V = rng.normal(size=m.dim)
        worst = max(worst, C.information_loss(m, kappa, x, V).residual)
    return CriterionResult(4, "information loss identity", worst <= 1e-8, {
        "trials": trials, "max_residual": worst, "summary": f"max residual {worst:.2e}"})


def criterion_5(rng, trials=100) -> CriterionResult:
    worst, cert_ok = 0.0, True
    for n, m_target, base in ((2, 3, M.bernoulli()), (3, 5, M.categorical(3))):
        for _ in range(trials):
            P = K.random_kernel(rng, n, m_target)
            mu2 = finite_measure(P.target, rng.dirichlet(np.ones(m_target)))
            x = random_interior(rng, base)
            dec = K.decompose_markov_morphism(base, P, mu2, axes=[[xi] for xi in x])
            worst = max(worst, dec.residual)
            cert_ok &= dec.certificate.sufficient
    return CriterionResult(5, "Markov morphism decomposition residual", worst <= 1e-10 and cert_ok, {
        "trials": 2 * trials, "max_residual": worst, "projection_sufficient": cert_ok,
        "summary": f"max residual {worst:.2e}"})


def criterion_6(rng, trials=100) -> CriterionResult:
    congruent_pass = 0
    for _ in range(trials):
        n = int(rng.integers(1, 5))
        kappa, P = random_congruent(rng, n, n + int(rng.integers(0, 4)))
        congruent_pass += K.left_inverse_check(P, kappa)
    random_fail = 0
    for _ in range(trials):
        n = int(rng.integers(2, 5))
        mm = n + int(rng.integers(0, 4))
        kappa = K.random_partition(rng, mm, n)
        random_fail += not K.left_inverse_check(K.random_kernel(rng, n, mm), kappa)
    ok = congruent_pass == trials and random_fail == trials
    return CriterionResult(6, "left-inverse characterization of congruent embeddings", ok, {
        "congruent_pass": congruent_pass, "random_fail": random_fail, "trials": trials,
        "summary": f"{congruent_pass}/{trials} congruent pass, {random_fail}/{trials} random fail"})


def criterion_7(rng, per_bin=50) -> CriterionResult:
    masses = (0.525, 1.025, 1.525)
    samples = C.step_samples(rng, masses, per_bin)
    quad_fit = C.fit_samples(2, samples, lambda s: s.mass * s.fisher + 2.0 * s.A ** 2)
    cubic_fit = C.fit_samples(3, samples, lambda s: s.ac + 0.5 * s.A ** 3 - 1.0 * s.A * s.fisher)
    coef_err, resid = 0.0, 0.0
    for b in quad_fit.bins:
        f, d = b["coefficients"]
        coef_err = max(coef_err, abs(f - b["center"]), abs(d - 2.0))
        resid = max(resid, b["residual"])
    for b in cubic_fit.bins:
        t, a1, a2 = b["coefficients"]
        coef_err = max(coef_err, abs(t - 1.0), abs(a1 - 0.5), abs(a2 + 1.0))
        resid = max(resid, b["residual"])
    ok = coef_err <= 1e-6 and resid <= 1e-8 and all(b["n"] >= 50 for b in quad_fit.bins)
    return CriterionResult(7, "invariant-field fits on step models", ok, {
        "quadratic": quad_fit.to_dict(), "cubic": cubic_fit.to_dict(), "max_coefficient_error": coef_err,
        "max_residual": resid, "summary": f"coef err {coef_err:.2e}, residual {resid:.2e}"})


def criterion_8(rng, trials=100) -> CriterionResult:
    worst = 0.0
    for _ in range(trials):
        total = float(rng.uniform(0.2, 3.0))
        model, d, tau = C.random_step_model(rng, total)
        x0 = model.potential.x0
        w = model.reference.weights
        # independent oracle: class masses straight from the weights
        d_oracle = np.array([w[model.potential.statistic.assignment == i].sum() for i in range(len(tau))])
        for n in (1, 2, 3):
            val = T.moment_tensor(model, [x0], [1.0], n).value
            ref = float(np.sum(d_oracle * tau ** n))
            worst = max(worst, abs(val - ref) / max(1.0, abs(ref)))
    return CriterionResult(8, "step-model moment tensors reduce to finite sums", worst <= 1e-10, {
        "trials": trials, "max_error": worst, "summary": f"max error {worst:.2e}"})


def criterion_9(rng=None) -> CriterionResult:
    checks = {}
    cosh = O.YoungFunction.cosh()
    F4 = Finite(4)
    prob = uniform_measure(F4)
    for c in (0.5, 3.0):
        checks[f"const_finite_{c}"] = _rel(O.orlicz_norm(np.full(4, c), prob, cosh), c / math.acosh(2.0))
    G = Grid(0.0, 1.0)
    leb = lebesgue(G)
    checks["const_grid_2"] = _rel(O.orlicz_norm(lambda t: np.full(np.shape(t), 2.0), leb, cosh), 2.0 / math.acosh(2.0))
    f = np.array([1.0, -2.0, 3.0, 0.5])
    w = np.array([0.1, 0.2, 0.3, 0.4])
    mu = finite_measure(F4, w)
    for p in (1.5, 2.0, 3.0):
        lp = float(np.sum(np.abs(f) ** p * w)) ** (1.0 / p)
        checks[f"powerp_{p}"] = _rel(O.orlicz_norm(f, mu, O.YoungFunction.powerp(p)), lp)
    # L^2 norm of t on (0, 1) is 1/sqrt(3)
    checks["powerp_grid"] = _rel(O.orlicz_norm(lambda t: t, leb, O.YoungFunction.powerp(2.0)), 1.0 / math.sqrt(3.0))
    stretch = []
    for fn, meas, lam in ((np.ones(4), prob, 3.0), (lambda t: t, leb, 0.5), (f, mu, 1.0)):
        r = O.stretch_equivalence_check(fn, meas, cosh, lam)
        stretch.append(r["residual"] / (1.0 + r["scaled"]))
    ok = max(checks.values()) <= 1e-9 and max(stretch) <= 1e-8
    return CriterionResult(9, "Orlicz norms and stretch identity", ok, {
        "norm_rel_errors": checks, "stretch_scaled_residuals": stretch,
        "summary": f"norm err {max(checks.values()):.2e}, stretch {max(stretch):.2e}"})


def criterion_10_parts() -> dict:
    pe = M.power_exp(3)
    axes = [np.linspace(-1.0, 1.0, 21)]
    k2 = M.check_k_integrability(pe, 2, axes=axes)
    k3 = M.check_k_integrability(pe, 3, axes=axes)
    leb = lebesgue(pe.space)
    p = {x: M.density_at(pe, [x]) for x in (0.5, 1.0)}
    pre = O.preceq(leb, p[1.0])
    # analytic: ∫ (dp(x)/dp(y))^s dp(y) = ∫ exp(((y²-x²)s - y²) t^(-1/3)) dt is finite iff (y²-x²)s < y²
    def first_p(x, y):
        for s in O.EXPONENT_GRID:
            if (y * y - x * x) * s < y * y:
                return s
        return None
    fwd = O.preceq(p[0.5], p[1.0])
    bwd = O.preceq(p[1.0], p[0.5])
    sim = O.similar(p[0.5], p[1.0])
    return {
        "a_k2_pass": {"ok": k2.verdict == "pass", "verdict": k2.verdict, "max_jump": k2.max_jump},
        "b_k3_divergent_at_0": {"ok": k3.verdict == "divergent" and k3.point == [0.0],
                                "verdict": k3.verdict, "point": k3.point, "max_jump": k3.max_jump},
        "c_dt_not_preceq_p1": {"ok": pre.status == O.FAILS and all(t["status"] == "divergent" for t in pre.traces),
                               "status": pre.status, "evidence": pre.traces[0]["evidence"]},
        "d_similar_0.5_1": {"ok": sim.holds and fwd.witness == first_p(0.5, 1.0) and bwd.witness == first_p(1.0, 0.5),
                            "status": sim.status, "witness": [fwd.witness, bwd.witness],
                            "analytic": [first_p(0.5, 1.0), first_p(1.0, 0.5)]},
    }


def criterion_10(rng=None) -> CriterionResult:
    parts = criterion_10_parts()
    failed = [k for k, v in parts.items() if not v["ok"]]
    return CriterionResult(10, "power-exponential family counterexample", not failed, {
        "parts": parts, "summary": "all parts hold" if not failed else "failed: " + ", ".join(failed)})


def criterion_11(rng=None) -> CriterionResult:
    b = M.bernoulli()
    traj = N.descend(b, [0.2], N.NatGradConfig(eta=0.5, max_iter=200, objective=N.KLObjective([0.7, 0.3])))
    err = abs(float(traj.x[0]) - 0.7)
    logistic = M.reparametrize(b, ["1/(1+exp(-x1))"], [(-20.0, 20.0)])

    def f(y):
        return 1.0 / (1.0 + np.exp(-np.asarray(y, dtype=float)))

    cov = 0.0
    for y in (-2.0, -0.5, 0.3, 1.7):
        yv = np.array([y])
        J = M.jacobian_fd(f, yv)
        for g in (1.0, -2.5):
            gv = np.array([g])
            lhs = J @ N.natural_direction(logistic, yv, J.T @ gv, rho=0.0)
            rhs = N.natural_direction(b, f(yv), gv, rho=0.0)
            cov = max(cov, float(np.max(np.abs(lhs - rhs) / np.abs(rhs))))
    ok = err <= 1e-6 and traj.iterations <= 200 and cov <= 1e-4
    return CriterionResult(11, "natural gradient convergence and covariance", ok, {
        "final_error": err, "iterations": traj.iterations, "covariance_residual": cov,
        "summary": f"error {err:.1e} in {traj.iterations} steps, covariance {cov:.1e}"})


CRITERIA: dict[int, Callable] = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5, 6: criterion_6,
    7: criterion_7, 8: criterion_8, 9: criterion_9, 10: criterion_10, 11: criterion_11,
}


def criterion_rng(seed: int, number: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed).spawn(number)[number - 1])


def run_criterion(number: int, seed: int = 42) -> CriterionResult:
    return CRITERIA[number](criterion_rng(seed, number))


def run_all(seed: int = 42, numbers=None) -> list:
    numbers = sorted(CRITERIA) if numbers is None else numbers
    return [run_criterion(n, seed) for n in numbers]
