"""Built-in planar models and JSON model files.

Model file schema (unknown keys rejected)::

    {"name": "<builtin>", "params": {...}}
    {"expr_x": "...", "expr_y": "...", "params": {...}}
"""
from __future__ import annotations

import json

import numpy as np

from .expr import FieldExpr
from .flow import PlanarField

__all__ = ["builtin", "BUILTIN_NAMES", "field_from_spec", "load_model",
           "POLYNOMIAL_SCHEMA", "GTPASE_SCHEMA"]

POLYNOMIAL_SCHEMA = (("epsilon", 1.0), ("a", 2.0 / 9.0), ("b", 1.0), ("c", -8.0 / 9.0))

# Table-2 defaults of the GTPase activation model, state = (L, G).
GTPASE_SCHEMA = (
    ("beta", 0.0052),
    ("b", 0.2530),
    ("gamma", 1.6),
    ("G_T", 2.0),
    ("ell0", 1.0),
    ("phi1", 0.9),
    ("phi2", 2.0),
    ("G_h", 0.4),
    ("epsilon", 0.1),
    ("n", 4),
    ("p", 4),
    ("m", 4),
)


def _ipow(base: float, exponent: float) -> float:
    """Power with exact repeated multiplication for small integer exponents."""
    k = int(exponent)
    if k == exponent and 0 <= k <= 16:
        out = 1.0
        for _ in range(k):
            out *= base
        return out
    return float(np.exp(exponent * np.log(base)))


def _poly_eval(s, p):
    x, y = s[0], s[1]
    g = (p["a"] * x + p["b"]) * x + p["c"]  # Horner
    f = (y * y - 3.0) * y
    return (p["epsilon"] * (g - y), x - f)


def _poly_jac(s, p):
    x, y = s[0], s[1]
    return np.array([
        [p["epsilon"] * (2.0 * p["a"] * x + p["b"]), -p["epsilon"]],
        [1.0, -(3.0 * y * y - 3.0)],
    ])


def _gtpase_rest_length(G, phi, p):
    num = _ipow(G, p["p"])
    return p["ell0"] - phi * num / (_ipow(p["G_h"], p["p"]) + num)


def _gtpase_eval(s, p):
    L, G = s[0], s[1]
    L0_feedback = _gtpase_rest_length(G, p["phi2"], p)
    Lm = _ipow(L, p["m"])
    f_L = p["beta"] * Lm / (_ipow(L0_feedback, p["m"]) + Lm)
    Gn = _ipow(G, p["n"])
    activation = p["b"] + f_L + p["gamma"] * Gn / (1.0 + Gn)
    return (
        -p["epsilon"] * (L - _gtpase_rest_length(G, p["phi1"], p)),
        activation * (p["G_T"] - G) - G,
    )


def _gtpase_jac(s, p):
    L, G = s[0], s[1]
    h = 1e-7 * (1.0 + abs(L) + abs(G))
    J = np.empty((2, 2))
    for j in range(2):
        d = np.zeros(2)
        d[j] = h
        fp = _gtpase_eval(s + d, p)
        fm = _gtpase_eval(s - d, p)
        J[:, j] = [(fp[0] - fm[0]) / (2 * h), (fp[1] - fm[1]) / (2 * h)]
    return J


def _normalform_sn_eval(s, p):
    x, y = s[0], s[1]
    return (x * x - p["mu1"], p["rho"] * y)


def _normalform_sn_jac(s, p):
    return np.array([[2.0 * s[0], 0.0], [0.0, p["rho"]]])


def _linear_saddle_eval(s, p):
    return (p["lambda_u"] * s[0], p["lambda_s"] * s[1])


def _linear_saddle_jac(s, p):
    return np.array([[p["lambda_u"], 0.0], [0.0, p["lambda_s"]]])


_BUILTINS = {
    "polynomial": (POLYNOMIAL_SCHEMA, _poly_eval, _poly_jac),
    "gtpase": (GTPASE_SCHEMA, _gtpase_eval, _gtpase_jac),
    "normalform_sn": ((("mu1", 0.0), ("rho", -1.0)),
                      _normalform_sn_eval, _normalform_sn_jac),
    "linear_saddle": ((("lambda_u", 1.0), ("lambda_s", -2.0)),
                      _linear_saddle_eval, _linear_saddle_jac),
}

BUILTIN_NAMES = tuple(sorted(_BUILTINS))


def builtin(name: str, **overrides) -> PlanarField:
    """Named built-in field with optional parameter overrides."""
    try:
        schema, ev, jac = _BUILTINS[name]
    except KeyError:
        raise KeyError(f"unknown builtin {name!r}; choose from {BUILTIN_NAMES}") from None
    return PlanarField(name=name, eval_fn=ev, jac_fn=jac,
                       param_schema=schema, params=overrides)


def parse_field(source_x: str, source_y: str,
                params: dict[str, float]) -> FieldExpr:
    """Compile a user-defined field from expression strings."""
    return FieldExpr(source_x, source_y, params)


def field_from_expr(expr: FieldExpr) -> PlanarField:
    schema = tuple((k, v) for k, v in expr.params.items())
    return PlanarField(
        name="expr",
        eval_fn=lambda s, p: expr(s, p),
        param_schema=schema,
    )


def field_from_spec(spec: dict) -> PlanarField:
    """Build a field from a decoded model-file dictionary."""
    allowed = {"name", "expr_x", "expr_y", "params"}
    unknown = set(spec) - allowed
    if unknown:
        raise ValueError(f"unknown model keys: {sorted(unknown)}")
    params = spec.get("params", {})
    if not isinstance(params, dict):
        raise ValueError("'params' must be an object")
    if "name" in spec:
        if "expr_x" in spec or "expr_y" in spec:
            raise ValueError("give either 'name' or 'expr_x'/'expr_y', not both")
        return builtin(spec["name"], **params)
    if "expr_x" in spec and "expr_y" in spec:
        return field_from_expr(parse_field(spec["expr_x"], spec["expr_y"], params))
    raise ValueError("model needs 'name' or both 'expr_x' and 'expr_y'")


def load_model(path: str) -> PlanarField:
    with open(path, "r", encoding="utf-8") as fh:
        return field_from_spec(json.load(fh))
