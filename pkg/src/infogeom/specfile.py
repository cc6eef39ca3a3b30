"""JSON model specifications: schema, validation and construction."""

from __future__ import annotations

import json
from pathlib import Path

import jsonschema
import numpy as np

from . import models as M
from .errors import SpecError
from .markov import MarkovKernel, kernel_model
from .spaces import (
    Finite,
    Grid,
    Product,
    QuadratureConfig,
    Statistic,
    density_measure,
    finite_measure,
    product_measure,
)
from . import expr as ex

_SPACE = {
    "oneOf": [
        {"type": "object", "properties": {"finite": {"type": "integer", "minimum": 1}},
         "required": ["finite"], "additionalProperties": False},
        {"type": "object", "properties": {"grid": {"type": "array", "items": {"type": "number"},
                                                   "minItems": 2, "maxItems": 2}},
         "required": ["grid"], "additionalProperties": False},
        {"type": "object", "properties": {"product": {"type": "array", "items": {"$ref": "#/$defs/space"},
                                                      "minItems": 2, "maxItems": 2}},
         "required": ["product"], "additionalProperties": False},
    ]
}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "$defs": {"space": _SPACE},
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string"},
        "space": {"$ref": "#/$defs/space"},
        "reference": {
            "type": "object", "additionalProperties": False,
            "properties": {"weights": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}},
                           "density": {"type": "string"}},
        },
        "potential": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "expression": {"type": "string"},
                "atoms": {"type": "array", "items": {"type": "string"}},
                "builtin": {"type": "object", "additionalProperties": False,
                            "properties": {"name": {"type": "string"}, "params": {"type": "object"}},
                            "required": ["name"]},
                "step": {"type": "object", "additionalProperties": False,
                         "properties": {"classes": {"type": "array"}, "tau": {"type": "array"},
                                        "x0": {"type": "number"}},
                         "required": ["classes", "tau"]},
            },
            "minProperties": 1, "maxProperties": 1,
        },
        "param_box": {"type": "array", "items": {"type": "array", "items": {"type": "number"},
                                                 "minItems": 2, "maxItems": 2}, "minItems": 1, "maxItems": 8},
        "statistical": {"type": "boolean"},
        "statistic": {
            "type": "object", "additionalProperties": False,
            "properties": {"partition": {"type": "array"}, "intervals": {"type": "array"},
                           "projection": {"enum": [1, 2]}, "identity": {"type": "boolean"}},
            "minProperties": 1, "maxProperties": 1,
        },
        "kernel": {
            "type": "object", "additionalProperties": False,
            "properties": {"matrix": {"type": "array"}, "mu2": {"type": "array"},
                           "apply": {"type": "boolean"}},
            "required": ["matrix"],
        },
        "quadrature": {
            "type": "object", "additionalProperties": False,
            "properties": {k: {"type": "number"} for k in
                           ("base_panels", "nodes_per_panel", "levels", "growth_threshold", "rtol", "max_depth")},
        },
        "lattice": {
            "type": "object", "additionalProperties": False,
            "properties": {"n": {"type": "integer", "minimum": 1},
                           "axes": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}}},
        },
        "x": {"type": "array", "items": {"type": "number"}},
        "directions": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}},
        "orlicz": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "f": {"type": "string"},
                "young": {"type": "object", "additionalProperties": False,
                          "properties": {"base": {"enum": ["cosh", "power", "expabs"]}, "p": {"type": "number"},
                                         "stretch": {"type": "number"}, "power": {"type": "number"}}},
                "other_x": {"type": "array", "items": {"type": "number"}},
                "against_reference": {"type": "boolean"},
                "lambdas": {"type": "array", "items": {"type": "number"}},
                "n_max": {"type": "integer", "minimum": 1},
            },
        },
        "natgrad": {
            "type": "object", "additionalProperties": False,
            "properties": {"target": {"type": "array", "items": {"type": "number"}},
                           "objective": {"type": "string"}, "eta": {"type": "number"},
                           "max_iter": {"type": "integer"}, "rho": {"type": "number"},
                           "tol": {"type": "number"}},
        },
        "seed": {"type": "integer"},
    },
    "required": ["potential"],
}


def load(path) -> dict:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise SpecError(f"cannot read spec {path}: {exc}") from exc
    validate(doc)
    return doc


def validate(doc: dict):
    try:
        jsonschema.validate(doc, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(map(str, exc.absolute_path)) or "<root>"
        raise SpecError(f"invalid spec at {where}: {exc.message}") from None


def build_space(node, cfg=None):
    if "finite" in node:
        return Finite(int(node["finite"]))
    if "grid" in node:
        a, b = node["grid"]
        return Grid(float(a), float(b), cfg) if cfg is not None else Grid(float(a), float(b))
    left, right = node["product"]
    return Product(build_space(left, cfg), build_space(right, cfg))


def _density_fn(text):
    e = ex.parse(text, 0)
    return lambda pts: np.broadcast_to(ex.evaluate(e, np.zeros(0), pts), np.shape(pts[0] if isinstance(pts, tuple) else pts)).astype(float)


def build_reference(doc, space):
    ref = doc.get("reference")
    if ref is None:
        return M.base_measure(space)
    if "weights" in ref:
        return finite_measure(space, ref["weights"])
    if "density" in ref:
        return density_measure(space, _density_fn(ref["density"]))
    return M.base_measure(space)


def build_statistic(doc, space):
    st = doc.get("statistic")
    if st is None:
        raise SpecError("spec needs a 'statistic' block for this command")
    if "partition" in st:
        classes = st["partition"]
        # classes are written 1-based in spec files
        if classes and isinstance(classes[0], list):
            classes = [[a - 1 for a in c] for c in classes]
        else:
            classes = [c - 1 for c in classes]
        return Statistic.partition(space, classes)
    if "intervals" in st:
        return Statistic.intervals(space, st["intervals"])
    if "projection" in st:
        return Statistic.projection(space, st["projection"])
    return Statistic.identity(space)


def build_kernel(doc):
    k = doc.get("kernel")
    if k is None:
        raise SpecError("spec needs a 'kernel' block for this command")
    P = MarkovKernel(k["matrix"])
    mu2 = finite_measure(P.target, k.get("mu2", np.full(P.target.n, 1.0 / P.target.n)))
    return P, mu2


def build_model(doc) -> M.ParametrizedModel:
    cfg = None
    if "quadrature" in doc:
        q = {k: (float(v) if k in ("rtol", "growth_threshold") else int(v)) for k, v in doc["quadrature"].items()}
        cfg = QuadratureConfig(**q)
    pot = doc["potential"]
    if "builtin" in pot:
        params = dict(pot["builtin"].get("params", {}))
        m = M.builtin(pot["builtin"]["name"], **params)
    else:
        if "space" not in doc:
            raise SpecError("non-builtin potentials need a 'space'")
        space = build_space(doc["space"], cfg)
        ref = build_reference(doc, space)
        if "step" in pot:
            st = pot["step"]
            kappa = build_statistic({"statistic": {"partition": st["classes"]}}, space)
            m = M.make_step_model(ref, kappa, st["tau"], st.get("x0", 0.5))
        else:
            if "param_box" not in doc:
                raise SpecError("expression potentials need a 'param_box'")
            source = pot.get("expression", pot.get("atoms"))
            try:
                m = M.expression_model(source, space, doc["param_box"], ref, doc.get("statistical", False),
                                       name=doc.get("name", "expression"))
            except ex.ExprError as exc:
                raise SpecError(f"potential: {exc}") from exc
    k = doc.get("kernel")
    if k is not None and k.get("apply"):
        m = kernel_model(m, MarkovKernel(k["matrix"]))
    return m


def resolved(doc) -> dict:
    """Spec with defaults filled in (embedded in reports)."""
    out = dict(doc)
    out.setdefault("statistical", False)
    out.setdefault("seed", 0)
    return out
