"""Invariant expressions, PDE descriptors, residual evaluation and emission.

A :class:`PdeDescriptor` pairs a geometry with an invariant expression; its
residual at a graph jet vanishes exactly when the jet solves the PDE the
expression defines.  Euclidean and conformal residuals evaluate the
expression on the second-order invariants directly; affine and projective
residuals normalize the jet to the origin first and measure the trace-free
part of the normalized cubic.  Residual values transform by a nonzero
factor under the group, so only zero sets and eigenvalue ratios are
meaningful across points.
"""

from __future__ import annotations

import dataclasses
import json
from fractions import Fraction

import numpy as np

from .errors import (
    DivisionByZero,
    InvalidExpr,
    NotPolynomial,
    SchemaMismatch,
)
from .exactpoly import Poly
from .groups import GeometryTag, normalize_to_origin
from .invariants import (
    elementary_symmetric,
    eigenvalues,
    pick_norm,
    shape_matrix,
    tau_d,
    tracefree_cubic,
    tracefree_shape,
)
from .jetspace import GraphJet

DIV_EPS = 1e-300

LEAVES = ("const", "lam", "sigma", "tau", "tauring", "pick")
NODES = ("add", "sub", "mul", "div", "pow")

ALLOWED_LEAVES = {
    "euclidean": ("const", "lam", "sigma", "tau"),
    "conformal": ("const", "tauring"),
    "affine": ("const", "pick"),
    "projective": ("const", "pick"),
}


@dataclasses.dataclass(frozen=True)
class Expr:
    """Invariant-expression tree node."""

    op: str
    value: float = 0.0
    index: int = 0
    args: tuple["Expr", ...] = ()

    def __add__(self, other):
        return Expr("add", args=(self, _coerce(other)))

    def __sub__(self, other):
        return Expr("sub", args=(self, _coerce(other)))

    def __mul__(self, other):
        return Expr("mul", args=(self, _coerce(other)))

    def __truediv__(self, other):
        return Expr("div", args=(self, _coerce(other)))

    def __pow__(self, k: int):
        return Expr("pow", index=int(k), args=(self,))


def _coerce(v) -> Expr:
    return v if isinstance(v, Expr) else const(float(v))


def const(v: float) -> Expr:
    return Expr("const", value=float(v))


def lam(i: int) -> Expr:
    return Expr("lam", index=int(i))


def sigma(i: int) -> Expr:
    return Expr("sigma", index=int(i))


def tau(d: int) -> Expr:
    return Expr("tau", index=int(d))


def tauring(d: int) -> Expr:
    return Expr("tauring", index=int(d))


def pick() -> Expr:
    return Expr("pick")


@dataclasses.dataclass(frozen=True)
class PdeDescriptor:
    geometry: GeometryTag
    order: int
    expr: Expr
    chart: str

    @property
    def desc_id(self) -> str:
        for name in PRESETS:
            if self.expr == PRESETS[name][1](self.geometry.n) and self.geometry.name == PRESETS[name][0]:
                return name
        return "custom"


PRESETS = {
    "minimal_surface": ("euclidean", lambda n: tau(1), 2),
    "monge_ampere": ("euclidean", lambda n: sigma(n), 2),
    "umbilical": ("conformal", lambda n: tauring(2), 2),
    "affine_cubic": ("affine", lambda n: pick(), 3),
    "projective_cubic": ("projective", lambda n: pick(), 3),
}


def _validate(geometry: GeometryTag, e: Expr, depth: int = 0):
    if depth > 64:
        raise InvalidExpr("expression too deep")
    if e.op in LEAVES:
        if e.op not in ALLOWED_LEAVES[geometry.name]:
            raise InvalidExpr(f"leaf {e.op!r} not allowed for {geometry.name} geometry")
        if e.op in ("lam", "sigma") and not 1 <= e.index <= geometry.n:
            raise InvalidExpr(f"{e.op}({e.index}) outside 1..{geometry.n}")
        if e.op == "tau" and e.index < 1:
            raise InvalidExpr("tau needs d >= 1")
        if e.op == "tauring" and e.index < 2:
            raise InvalidExpr("tauring needs d >= 2")
        return
    if e.op == "pow":
        if e.index < 0:
            raise InvalidExpr("negative powers go through div")
        _validate(geometry, e.args[0], depth + 1)
        return
    if e.op in NODES:
        for a in e.args:
            _validate(geometry, a, depth + 1)
        return
    raise InvalidExpr(f"unknown node {e.op!r}")


def build(geometry: GeometryTag, expr: Expr | str) -> PdeDescriptor:
    """Descriptor of the invariant PDE with the given zero-set expression."""
    if isinstance(expr, str):
        try:
            geo_name, make, order = PRESETS[expr]
        except KeyError as exc:
            raise InvalidExpr(f"unknown preset {expr!r}") from exc
        if geo_name != geometry.name:
            raise InvalidExpr(f"preset {expr!r} belongs to the {geo_name} geometry")
        expr = make(geometry.n)
    else:
        order = 3 if geometry.name in ("affine", "projective") else 2
    _validate(geometry, expr)
    return PdeDescriptor(geometry, order, expr, geometry.chart)


def _eval_tree(e: Expr, leaf_value) -> float:
    if e.op == "const":
        return e.value
    if e.op in LEAVES:
        return leaf_value(e)
    vals = [_eval_tree(a, leaf_value) for a in e.args]
    if e.op == "add":
        return vals[0] + vals[1]
    if e.op == "sub":
        return vals[0] - vals[1]
    if e.op == "mul":
        return vals[0] * vals[1]
    if e.op == "div":
        if abs(vals[1]) < DIV_EPS:
            raise DivisionByZero("quotient node hit a vanishing denominator")
        return vals[0] / vals[1]
    if e.op == "pow":
        return vals[0] ** e.index
    raise InvalidExpr(f"unknown node {e.op!r}")


def residual(desc: PdeDescriptor, j: GraphJet) -> float:
    """Scalar whose vanishing says the jet solves the PDE."""
    if j.chart != desc.chart:
        raise SchemaMismatch(f"jet chart {j.chart!r}, descriptor wants {desc.chart!r}")
    if j.order != desc.order:
        raise SchemaMismatch(f"jet order {j.order}, descriptor wants {desc.order}")
    if j.n != desc.geometry.n:
        raise SchemaMismatch("jet and descriptor dimension differ")
    name = desc.geometry.name
    cache: dict = {}

    if name in ("euclidean", "conformal"):

        def leaf_value(e: Expr) -> float:
            if e.op == "lam":
                if "lams" not in cache:
                    cache["lams"] = eigenvalues(j.grad, j.hess)
                return float(cache["lams"][e.index - 1])
            if e.op == "sigma":
                if "lams" not in cache:
                    cache["lams"] = eigenvalues(j.grad, j.hess)
                return elementary_symmetric(cache["lams"], e.index)
            if e.op == "tau":
                if "S" not in cache:
                    cache["S"] = shape_matrix(j.grad, j.hess)
                return tau_d(cache["S"], e.index)
            if e.op == "tauring":
                if "S0" not in cache:
                    cache["S0"] = tracefree_shape(j.grad, j.hess)
                return tau_d(cache["S0"], e.index)
            raise InvalidExpr(f"leaf {e.op!r} unexpected here")

        return _eval_tree(desc.expr, leaf_value)

    # affine / projective third-order route
    def leaf_value(e: Expr) -> float:
        if e.op != "pick":
            raise InvalidExpr(f"leaf {e.op!r} unexpected here")
        if "pick" not in cache:
            res = normalize_to_origin(desc.geometry, j)
            eps = res.signature.metric()
            cache["pick"] = pick_norm(eps, tracefree_cubic(eps, res.jet.cubic))
        return cache["pick"]

    return _eval_tree(desc.expr, leaf_value)


def residual_via_normalization(desc: PdeDescriptor, j: GraphJet) -> float:
    """Independent Euclidean route: normalize to the origin, then read the
    expression off the spectrum of the normalized Hessian (where h = I)."""
    if desc.geometry.name != "euclidean":
        raise SchemaMismatch("normalization route is defined for euclidean descriptors")
    if j.chart != desc.chart or j.order != desc.order:
        raise SchemaMismatch("jet does not match descriptor")
    res = normalize_to_origin(desc.geometry, j)
    lams = np.sort(np.linalg.eigvalsh(res.jet.hess.full()))[::-1]

    def leaf_value(e: Expr) -> float:
        if e.op == "lam":
            return float(lams[e.index - 1])
        if e.op == "sigma":
            return elementary_symmetric(lams, e.index)
        if e.op == "tau":
            return float(np.sum(lams**e.index))
        raise InvalidExpr(f"leaf {e.op!r} unexpected here")

    return _eval_tree(desc.expr, leaf_value)


def homogeneity_degree(e: Expr) -> int:
    """Degree of the residual in the top-order jet data (for scale-free
    defect normalization)."""
    if e.op == "const":
        return 0
    if e.op == "lam":
        return 1
    if e.op in ("sigma", "tau", "tauring"):
        return e.index
    if e.op == "pick":
        return 2
    degs = [homogeneity_degree(a) for a in e.args]
    if e.op in ("add", "sub"):
        return max(degs)
    if e.op == "mul":
        return degs[0] + degs[1]
    if e.op == "div":
        return max(degs[0] - degs[1], 0)
    if e.op == "pow":
        return degs[0] * e.index
    raise InvalidExpr(f"unknown node {e.op!r}")


# -- exact polynomial expansion -------------------------------------------------

EUCLID_VARS = ("u_x", "u_y", "u_xx", "u_xy", "u_yy")
AFFINE_VARS = ("u_xx", "u_xy", "u_yy", "u_xxx", "u_xxy", "u_xyy", "u_yyy")

# 13-term scalar third-order invariant, monomials over AFFINE_VARS
# (a, b, c, p, q, r, s) = (u_xx, u_xy, u_yy, u_xxx, u_xxy, u_xyy, u_yyy).
_F_AFF3_MONOMIALS = {
    (1, 1, 1, 1, 0, 0, 1): Fraction(6),
    (1, 0, 2, 1, 0, 1, 0): Fraction(-6),
    (1, 1, 1, 0, 1, 1, 0): Fraction(-18),
    (1, 2, 0, 0, 1, 0, 1): Fraction(12),
    (2, 0, 1, 0, 1, 0, 1): Fraction(-6),
    (1, 0, 2, 0, 2, 0, 0): Fraction(9),
    (2, 1, 0, 0, 0, 1, 1): Fraction(-6),
    (2, 0, 1, 0, 0, 2, 0): Fraction(9),
    (3, 0, 0, 0, 0, 0, 2): Fraction(1),
    (0, 1, 2, 1, 1, 0, 0): Fraction(-6),
    (0, 2, 1, 1, 0, 1, 0): Fraction(12),
    (0, 3, 0, 1, 0, 0, 1): Fraction(-8),
    (0, 0, 3, 2, 0, 0, 0): Fraction(1),
}


@dataclasses.dataclass(frozen=True)
class ExpandedPolynomial:
    vars: tuple[str, ...]
    monomials: dict
    rho_power: int

    def evaluate(self, values) -> float:
        total = 0.0
        for exps, c in self.monomials.items():
            term = float(c)
            for v, a in zip(values, exps):
                if a:
                    term *= v**a
            total += term
        return total


def _rho_poly() -> Poly:
    ux, uy = Poly.var(5, 0), Poly.var(5, 1)
    return Poly.const(5, 1) + ux * ux + uy * uy


def _numerator_matrix() -> list[list[Poly]]:
    """(rho I - grad grad^T) @ hess as exact polynomials (= rho^2 S)."""
    ux, uy = Poly.var(5, 0), Poly.var(5, 1)
    uxx, uxy, uyy = Poly.var(5, 2), Poly.var(5, 3), Poly.var(5, 4)
    rho = _rho_poly()
    m = [[rho - ux * ux, -(ux * uy)], [-(ux * uy), rho - uy * uy]]
    h = [[uxx, uxy], [uxy, uyy]]
    return [
        [m[i][0] * h[0][jv] + m[i][1] * h[1][jv] for jv in range(2)]
        for i in range(2)
    ]


def _expand_euclidean(e: Expr) -> tuple[Poly, int]:
    """Value of the expression as (numerator, rho power)."""
    if e.op == "const":
        return Poly.const(5, Fraction(e.value).limit_denominator(10**12)), 0
    if e.op == "tau":
        M = _numerator_matrix()
        P = [[Poly.const(5, 1), Poly.const(5, 0)], [Poly.const(5, 0), Poly.const(5, 1)]]
        for _ in range(e.index):
            P = [
                [P[i][0] * M[0][jv] + P[i][1] * M[1][jv] for jv in range(2)]
                for i in range(2)
            ]
        return P[0][0] + P[1][1], 2 * e.index
    if e.op == "sigma":
        t1 = _expand_euclidean(tau(1))
        if e.index == 1:
            return t1
        if e.index == 2:
            t2 = _expand_euclidean(tau(2))
            num = t1[0] * t1[0] - t2[0]  # both at rho power 4
            half = num * Fraction(1, 2)
            return half, 4
        raise NotPolynomial("sigma expansion implemented for n = 2 only")
    if e.op in ("lam", "tauring", "pick"):
        raise NotPolynomial(f"leaf {e.op!r} has no polynomial expansion here")
    if e.op == "div":
        raise NotPolynomial("quotient expressions have no polynomial expansion")
    parts = [_expand_euclidean(a) for a in e.args]
    rho = _rho_poly()
    if e.op in ("add", "sub"):
        (p1, m1), (p2, m2) = parts
        m = max(m1, m2)
        p1 = p1 * rho ** (m - m1) if m > m1 else p1
        p2 = p2 * rho ** (m - m2) if m > m2 else p2
        return (p1 + p2, m) if e.op == "add" else (p1 - p2, m)
    if e.op == "mul":
        (p1, m1), (p2, m2) = parts
        return p1 * p2, m1 + m2
    if e.op == "pow":
        p1, m1 = parts[0]
        return p1**e.index, m1 * e.index
    raise InvalidExpr(f"unknown node {e.op!r}")


def _expand_affine(e: Expr) -> Poly:
    if e.op == "pick":
        return Poly(7, dict(_F_AFF3_MONOMIALS))
    if e.op == "const":
        return Poly.const(7, Fraction(e.value).limit_denominator(10**12))
    if e.op == "div":
        raise NotPolynomial("quotient expressions have no polynomial expansion")
    if e.op in ("lam", "sigma", "tau", "tauring"):
        raise NotPolynomial(f"leaf {e.op!r} has no polynomial expansion here")
    parts = [_expand_affine(a) for a in e.args]
    if e.op == "add":
        return parts[0] + parts[1]
    if e.op == "sub":
        return parts[0] - parts[1]
    if e.op == "mul":
        return parts[0] * parts[1]
    if e.op == "pow":
        return parts[0] ** e.index
    raise InvalidExpr(f"unknown node {e.op!r}")


def expand_polynomial(desc: PdeDescriptor) -> ExpandedPolynomial:
    """Exact polynomial form of the PDE with rho-denominators cleared.

    Euclidean (n = 2): returns P with P = rho**rho_power * residual.
    Affine (n = 2): returns the unique 13-term third-order polynomial
    whose zero set the pick residual defines (the residual itself carries
    a det(hess)**-3 factor from the normalization; only zero sets match).
    """
    n = desc.geometry.n
    if desc.geometry.name == "euclidean":
        if n != 2:
            raise NotPolynomial("euclidean expansion implemented for n = 2 only")
        poly, power = _expand_euclidean(desc.expr)
        rho = _rho_poly()
        while power > 0:
            q = poly.divide_exact(rho)
            if q is None:
                break
            poly, power = q, power - 1
        return ExpandedPolynomial(EUCLID_VARS, dict(poly.terms), power)
    if desc.geometry.name == "affine":
        if n != 2:
            raise NotPolynomial("affine expansion implemented for n = 2 only")
        poly = _expand_affine(desc.expr)
        return ExpandedPolynomial(AFFINE_VARS, dict(poly.terms), 0)
    raise NotPolynomial(f"no polynomial expansion for {desc.geometry.name} residuals")


# -- serialization --------------------------------------------------------------


def expr_to_json(e: Expr) -> dict:
    if e.op == "const":
        return {"op": "const", "value": e.value}
    if e.op in ("lam", "sigma", "tau", "tauring"):
        return {"op": e.op, "index": e.index}
    if e.op == "pick":
        return {"op": "pick"}
    out = {"op": e.op, "args": [expr_to_json(a) for a in e.args]}
    if e.op == "pow":
        out["index"] = e.index
    return out


def expr_from_json(d: dict) -> Expr:
    try:
        op = d["op"]
        if op == "const":
            return const(d["value"])
        if op in ("lam", "sigma", "tau", "tauring"):
            return Expr(op, index=int(d["index"]))
        if op == "pick":
            return pick()
        args = tuple(expr_from_json(a) for a in d.get("args", ()))
        if op == "pow":
            return Expr("pow", index=int(d["index"]), args=args)
        if op in NODES:
            return Expr(op, args=args)
        raise SchemaMismatch(f"unknown op {op!r}")
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaMismatch(f"bad expression record: {exc}") from exc


def descriptor_to_json(desc: PdeDescriptor) -> dict:
    return {
        "geometry": desc.geometry.name,
        "n": desc.geometry.n,
        "order": desc.order,
        "expr": expr_to_json(desc.expr),
        "chart": desc.chart,
    }


def descriptor_from_json(d: dict) -> PdeDescriptor:
    try:
        tag = GeometryTag(d["geometry"], int(d["n"]))
        desc = build(tag, expr_from_json(d["expr"]))
        if desc.order != int(d["order"]) or desc.chart != d["chart"]:
            raise SchemaMismatch("order/chart inconsistent with geometry")
        return desc
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaMismatch(f"bad descriptor record: {exc}") from exc


def expanded_to_json(p: ExpandedPolynomial) -> dict:
    return {
        "vars": list(p.vars),
        "monomials": [
            {"exps": list(e), "coef": float(c)}
            for e, c in sorted(p.monomials.items(), reverse=True)
        ],
        "rho_power": p.rho_power,
    }


def emit(desc: PdeDescriptor, fmt: str) -> str:
    """Serialized descriptor (json) or expanded-polynomial LaTeX (latex)."""
    if fmt == "json":
        return json.dumps(descriptor_to_json(desc), sort_keys=True, indent=2)
    if fmt == "latex":
        return latex_polynomial(expand_polynomial(desc))
    raise SchemaMismatch(f"unknown emit format {fmt!r}")


def _latex_var(name: str, power: int) -> str:
    sub = name[2:]
    core = f"u_{sub}" if len(sub) == 1 else f"u_{{{sub}}}"
    return core if power == 1 else f"{core}^{power}"


def _latex_monomial(vars_, exps) -> str:
    return "".join(_latex_var(v, a) for v, a in zip(vars_, exps) if a)


def latex_polynomial(p: ExpandedPolynomial) -> str:
    """Grouped LaTeX: monomials sharing top-order factors are collected,
    with the lower-order factor parenthesized (e.g. ``(1+u_y^2)u_{xx}``)."""
    lower_count = sum(1 for v in p.vars if len(v) == 3)  # u_x, u_y
    groups: dict[tuple, dict] = {}
    for exps, c in p.monomials.items():
        top = exps[lower_count:]
        low = exps[:lower_count]
        groups.setdefault(top, {})[low] = c

    ordered = sorted(groups, key=lambda t: tuple(-a for a in t))
    pieces = []
    for top in ordered:
        low_terms = groups[top]
        top_str = _latex_monomial(p.vars[lower_count:], top)
        zero_low = (0,) * lower_count
        if len(low_terms) == 1:
            ((low, c),) = low_terms.items()
            body = _latex_monomial(p.vars[:lower_count], low)
            mag = abs(c)
            coef = "" if mag == 1 and (body or top_str) else f"{mag}"
            piece = f"{coef}{body}{top_str}"
            sign = "-" if c < 0 else "+"
        else:
            inner = []
            for low in sorted(low_terms, key=lambda t: (sum(t), t)):
                c = low_terms[low]
                body = _latex_monomial(p.vars[:lower_count], low) or "1"
                mag = abs(c)
                term = body if mag == 1 and low != zero_low else (
                    f"{mag}" if low == zero_low and body == "1" else f"{mag}{body}"
                )
                inner.append(("-" if c < 0 else "+") + term)
            joined = "".join(inner).lstrip("+")
            piece = f"({joined}){top_str}"
            sign = "+"
        pieces.append((sign, piece))

    out = ""
    for i, (sign, piece) in enumerate(pieces):
        if i == 0:
            out = piece if sign == "+" else f"-{piece}"
        else:
            out += f" {sign} {piece}"
    return out or "0"
