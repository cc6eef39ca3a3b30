"""Command-line front end: model specs in, JSON reports out.

Exit codes: 0 all checks pass, 1 a verdict failed, 2 input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import chentsov as C
from . import markov as K
from . import models as M
from . import natgrad as N
from . import orlicz as O
from . import specfile
from . import tensors as T
from . import verification as VER
from .errors import InfoGeomError, NotSufficient, SpecError

PROFILES = {
    "default": {"sufficiency": 1e-7, "continuity": 0.5, "invariance": 1e-8, "monotonicity": -1e-9,
                "infoloss": 1e-8, "decomposition": 1e-10, "fit_residual": 1e-8, "fit_coefficient": 1e-6},
    "strict": {"sufficiency": 1e-9, "continuity": 0.25, "invariance": 1e-10, "monotonicity": -1e-12,
               "infoloss": 1e-10, "decomposition": 1e-12, "fit_residual": 1e-10, "fit_coefficient": 1e-8},
}


class InputError(Exception):
    pass


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating,)):
        obj = float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, float) and not np.isfinite(obj):
        return None if np.isnan(obj) else ("inf" if obj > 0 else "-inf")
    return obj


def render(report: dict) -> str:
    return json.dumps(_jsonable(report), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _parse_x(text, m=None):
    if text is None:
        return None
    try:
        return np.array([float(v) for v in text.split(",")])
    except ValueError:
        raise InputError(f"--x expects comma-separated floats, got {text!r}") from None


def _model_and_x(args, doc):
    m = specfile.build_model(doc)
    x = _parse_x(args.x)
    if x is None:
        x = np.asarray(doc["x"], dtype=float) if "x" in doc else 0.5 * (m.box[:, 0] + m.box[:, 1])
    return m, m.check_x(x)


def _lattice(doc):
    lat = doc.get("lattice", {})
    return lat.get("n", 5), lat.get("axes")


def _directions(doc, m):
    if "directions" in doc:
        return [np.asarray(v, dtype=float) for v in doc["directions"]]
    return list(np.eye(m.dim))


# ---------------------------------------------------------------------------
# Subcommands; each returns (passed, result dict)
# ---------------------------------------------------------------------------


def cmd_tensors(args, doc, tol):
    m, x = _model_and_x(args, doc)
    A = np.array([T.one_form_A(m, x, e).value for e in np.eye(m.dim)])
    G = T.fisher_matrix(m, x)
    AC = T.ac_array(m, x)
    if m.dim == 1:
        out = {"A": float(A[0]), "fisher": float(G.value[0, 0]), "ac": float(AC[0, 0, 0])}
    else:
        out = {"A": A, "fisher": G.value, "ac": AC}
    out.update({"x": x, "quadrature_error": G.error, "exact_derivatives": m.has_exact})
    return True, out


def cmd_integrability(args, doc, tol):
    m = specfile.build_model(doc)
    n, axes = _lattice(doc)
    rep = M.check_k_integrability(m, args.k, n=n, axes=axes, threshold=tol["continuity"])
    return rep.verdict == "pass", rep.to_dict()


def cmd_sufficiency(args, doc, tol):
    m = specfile.build_model(doc)
    kappa = specfile.build_statistic(doc, m.space)
    n, axes = _lattice(doc)
    v = K.check_sufficiency(m, kappa, n=n, axes=axes, tol=tol["sufficiency"])
    return v.sufficient, v.to_dict()


def cmd_invariance(args, doc, tol):
    m = specfile.build_model(doc)
    kappa = specfile.build_statistic(doc, m.space)
    n, axes = _lattice(doc)
    try:
        rep = C.invariance_report(m, kappa, n=n, axes=axes)
    except NotSufficient as exc:
        return False, {"refused": str(exc)}
    worst = max(d["rel"] for d in rep.deviations.values())
    return worst <= tol["invariance"], rep.to_dict()


def cmd_monotonicity(args, doc, tol):
    m, x = _model_and_x(args, doc)
    kappa = specfile.build_statistic(doc, m.space)
    gaps = [float(C.monotonicity_gap(m, kappa, x, V)) for V in _directions(doc, m)]
    return min(gaps) >= tol["monotonicity"], {"x": x, "gaps": gaps, "min_gap": min(gaps)}


def cmd_infoloss(args, doc, tol):
    m, x = _model_and_x(args, doc)
    kappa = specfile.build_statistic(doc, m.space)
    rows = [C.information_loss(m, kappa, x, V).to_dict() for V in _directions(doc, m)]
    worst = max(r["residual"] for r in rows)
    return worst <= tol["infoloss"], {"x": x, "directions": rows, "max_residual": worst}


def cmd_decompose(args, doc, tol):
    m = specfile.build_model(doc)
    P, mu2 = specfile.build_kernel(doc)
    n, axes = _lattice(doc)
    dec = K.decompose_markov_morphism(m, P, mu2, n=n, axes=axes)
    return dec.residual <= tol["decomposition"] and dec.certificate.sufficient, dec.to_dict()


def cmd_chentsov_fit(args, doc, tol):
    rng = np.random.default_rng(np.random.SeedSequence(args.seed).spawn(1)[0])
    masses = (0.525, 1.025, 1.525)
    samples = C.step_samples(rng, masses, 50)
    members = {
        1: (lambda s: 2.0 * s.mass * s.A, lambda c: [2.0 * c]),
        2: (lambda s: s.mass * s.fisher + 2.0 * s.A ** 2, lambda c: [c, 2.0]),
        3: (lambda s: s.ac + 0.5 * s.A ** 3 - s.A * s.fisher, lambda c: [1.0, 0.5, -1.0]),
    }
    cand, expected = members[args.order]
    fit = C.fit_samples(args.order, samples, cand)
    err = 0.0
    for b in fit.bins:
        err = max(err, max(abs(a - e) for a, e in zip(b["coefficients"], expected(b["center"]))))
    if args.out:
        import csv
        path = Path(args.out) / f"chentsov-fit-{args.order}.csv"
        with path.open("w", newline="") as fh:
            csv.writer(fh, lineterminator="\n").writerows(fit.to_csv_rows())
    ok = err <= tol["fit_coefficient"] and fit.max_residual <= tol["fit_residual"]
    return ok, {"fit": fit.to_dict(), "max_coefficient_error": err, "max_residual": fit.max_residual}


def _orlicz_measures(args, doc):
    m, x = _model_and_x(args, doc)
    o = doc.get("orlicz", {})
    here = M.density_at(m, x)
    if o.get("against_reference") or "other_x" not in o:
        other = m.reference
    else:
        other = M.density_at(m, o["other_x"])
    return m, x, here, other, o


def cmd_orlicz(args, doc, tol):
    m, x, here, other, o = _orlicz_measures(args, doc)
    op = args.op
    if op in ("norm", "tangent"):
        if "f" not in o:
            raise InputError("orlicz norm/tangent need 'orlicz.f' (expression in w1)")
        e = specfile.ex.parse(o["f"], 0)
        f = lambda pts: np.broadcast_to(specfile.ex.evaluate(e, np.zeros(0), M._expr_points(pts)),
                                         np.shape(pts)).astype(float)
        if op == "norm":
            y = o.get("young", {})
            phi = O.YoungFunction(y.get("base", "cosh"), y.get("p", 2.0), y.get("stretch", 1.0), y.get("power", 1.0))
            return True, {"norm": O.orlicz_norm(f, here, phi), "young": phi.to_dict()}
        v = O.in_exponential_tangent(f, here)
        return v.holds, v.to_dict()
    if op == "preceq":
        v = O.preceq(here, other)
        return v.holds, v.to_dict()
    if op == "similar":
        v = O.similar(here, other)
        return v.holds, v.to_dict()
    if op == "econv":
        target = np.asarray(o.get("other_x", x * 0.0), dtype=float)
        n_max = o.get("n_max", 8)
        seq = [target + (x - target) / n for n in range(1, n_max + 1)]
        log_gs = [lambda pts, _x=xn: m.log_pbar(_x, pts) for xn in seq]
        rep = O.e_convergence_diagnostic(log_gs, lambda pts: m.log_pbar(target, pts), m.reference)
        return all(rep["tail_monotone"].values()), rep
    if op == "segment":
        if "other_x" not in o:
            raise InputError("orlicz segment needs 'orlicz.other_x'")
        x1 = np.asarray(o["other_x"], dtype=float)
        rep = O.segment_similarity(lambda pts: m.log_pbar(x, pts), lambda pts: m.log_pbar(x1, pts), m.reference,
                                   tuple(o.get("lambdas", (0.25, 0.5, 0.75))))
        return rep["status"] == O.HOLDS, rep
    raise InputError(f"unknown orlicz operation {op!r}")


def cmd_natgrad(args, doc, tol):
    m, x = _model_and_x(args, doc)
    ng = doc.get("natgrad", {})
    if "target" in ng:
        obj = N.KLObjective(ng["target"])
    elif "objective" in ng:
        obj = N.ExpressionObjective(ng["objective"])
    else:
        raise InputError("natgrad needs 'natgrad.target' or 'natgrad.objective'")
    cfg = N.NatGradConfig(eta=ng.get("eta", 0.5), max_iter=ng.get("max_iter", 200), objective=obj,
                          rho=ng.get("rho", 1e-10), tol=ng.get("tol", 1e-10))
    traj = N.descend(m, x, cfg)
    if args.out:
        (Path(args.out) / "natgrad-trajectory.csv").write_text(traj.to_csv())
    return traj.converged, {"trajectory": traj.to_dict(), "config": cfg.to_dict()}


def cmd_verify_all(args, doc, tol):
    results = VER.run_all(args.seed)
    again = VER.run_all(args.seed)
    same = render({"c": [r.to_dict() for r in results]}) == render({"c": [r.to_dict() for r in again]})
    results.append(VER.CriterionResult(12, "deterministic reports for a fixed seed", same, {
        "summary": "rerun byte-identical" if same else "rerun differs"}))
    for r in results:
        print(r.line(), file=sys.stderr)
    passed = all(r.passed for r in results)
    return passed, {"criteria": [r.to_dict() for r in results],
                    "summary": {str(r.number): r.passed for r in results}}


COMMANDS = {
    "tensors": cmd_tensors,
    "integrability": cmd_integrability,
    "sufficiency": cmd_sufficiency,
    "invariance": cmd_invariance,
    "monotonicity": cmd_monotonicity,
    "infoloss": cmd_infoloss,
    "decompose-kernel": cmd_decompose,
    "chentsov-fit": cmd_chentsov_fit,
    "orlicz": cmd_orlicz,
    "natgrad": cmd_natgrad,
    "verify-all": cmd_verify_all,
}

NEEDS_SPEC = {"tensors", "integrability", "sufficiency", "invariance", "monotonicity", "infoloss",
              "decompose-kernel", "orlicz", "natgrad"}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--spec", help="JSON model specification")
    common.add_argument("--x", help="parameter point as comma-separated floats")
    common.add_argument("--seed", type=int, default=42)
    common.add_argument("--out", help="directory for report files")
    common.add_argument("--tolerance-profile", choices=sorted(PROFILES), default="default")

    parser = argparse.ArgumentParser(prog="infogeom", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"infogeom {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name == "integrability":
            p.add_argument("--k", type=int, required=True)
        elif name == "chentsov-fit":
            p.add_argument("--order", type=int, choices=(1, 2, 3), required=True)
        elif name == "orlicz":
            p.add_argument("op", choices=("norm", "tangent", "preceq", "similar", "econv", "segment"))
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    tol = PROFILES[args.tolerance_profile]
    try:
        if args.command in NEEDS_SPEC and not args.spec:
            raise InputError(f"{args.command} needs --spec")
        doc = specfile.load(args.spec) if args.spec else {}
        if args.command == "integrability" and args.k < 1:
            raise InputError("--k must be >= 1")
        if args.out:
            Path(args.out).mkdir(parents=True, exist_ok=True)
        passed, result = COMMANDS[args.command](args, doc, tol)
    except (InputError, SpecError) as exc:
        print(f"infogeom: error: {exc}", file=sys.stderr)
        return 2
    except InfoGeomError as exc:
        print(f"infogeom: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2 if args.command != "verify-all" else 1
    # output location is not part of the configuration
    flags = {k: v for k, v in vars(args).items() if k not in ("command", "out")}
    report = {
        "tool": "infogeom",
        "version": __version__,
        "command": args.command,
        "flags": flags,
        "config": {"spec": specfile.resolved(doc) if doc else None, "tolerances": tol},
        "passed": bool(passed),
        "result": result,
    }
    text = render(report)
    if args.out:
        (Path(args.out) / f"{args.command}.json").write_text(text)
    sys.stdout.write(text)
    return 0 if passed else 1


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
