"""Classification of a potential against the reduction-case templates.

Eleven template families, in two groups:

* finite-parameter families fitted by linear least squares on basis columns;
* free-function families (an arbitrary one-argument factor) whose factor is
  recovered by pointwise division on a structured sampling grid, after the
  finite parameters have been extracted by per-slice regression.

Structural AST unification runs first and recovers exact bindings when the
input is literally a template instance; the sampled path is the fallback and
the only route for plain callables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import AmbiguousMatch, EvalDomainError, UnboundSymbol
from . import ast as A
from .parser import parse

MATCH_TOL = 1e-9


@dataclass
class CaseMatch:
    case_id: str
    bindings: dict
    fit_residual: float
    opaque_samples: tuple = ()  # ((arg, value), ...) for free-function families

    def __bool__(self):
        return True


@dataclass
class NoMatchResult:
    residuals: dict = field(default_factory=dict)
    case_id = None

    def __bool__(self):
        return False


# specificity-descending order: constrained finite families first, then the
# free-function families with more structure, the bare radial+angle one last
CASE_ORDER = (
    "1.4b",
    "1.1b",
    "1.4a",
    "1.1a",
    "1.5a",
    "1.2b",
    "1.2a",
    "1.3",
    "1.8b",
    "1.8a",
    "1.6",
)

TEMPLATE_SOURCES = {
    "1.1a": "C0/x^2 + b*y + c0",
    "1.1b": "C0/x^2 + c*r_polar^2 + b*y + c0",
    "1.2a": "C(theta)/r_polar^2 + c0",
    "1.2b": "C(theta)/r_polar^2 + c*r_polar^2 + c0",
    "1.3": "C(lam*ln(r_polar) + theta)/r_polar^2 + c0",
    "1.4a": "C0/r_polar^2 + a*x + b*y + c0",
    "1.4b": "C0/r_polar^2 + c*r_polar^2 + a*x + b*y + c0",
    "1.5a": "a*x + b*y + c0",
    "1.6": "C(r_polar) + d*theta",
    "1.8a": "C(x) + b*y",
    "1.8b": "C(x) + c*y^2 + b*y",
}


def template_expr(case_id):
    return parse(TEMPLATE_SOURCES[case_id])


def instantiate(case_id, params, opaque=None):
    """Callable (x, y) -> M for a template with bound parameters."""
    expr = template_expr(case_id)

    def f(x, y):
        return A.evaluate(expr, {"x": x, "y": y}, params, opaque)

    return f


# ---------------------------------------------------------------------------
# structural path
# ---------------------------------------------------------------------------


def _flatten_sum(e):
    """Expression -> list of (sign, term)."""
    out = []

    def walk(n, sign):
        if isinstance(n, A.Bin) and n.op == "+":
            walk(n.left, sign)
            walk(n.right, sign)
        elif isinstance(n, A.Bin) and n.op == "-":
            walk(n.left, sign)
            walk(n.right, -sign)
        elif isinstance(n, A.Neg):
            walk(n.operand, -sign)
        else:
            out.append((sign, n))

    walk(e, 1)
    return out


def _const_value(e, params):
    """Evaluate a variable-free subtree, or return None."""
    try:
        return A.evaluate(e, {}, params, {})
    except (UnboundSymbol, EvalDomainError):
        return None


def _is_var_pow(e, name, p):
    return (
        isinstance(e, A.Bin)
        and e.op == "^"
        and isinstance(e.left, A.Var)
        and e.left.name == name
        and isinstance(e.right, A.Num)
        and e.right.value == p
    )


def _is_r2(e):
    # r_polar^2 or (x^2 + y^2)
    if _is_var_pow(e, "r_polar", 2):
        return True
    if isinstance(e, A.Bin) and e.op == "+":
        l, r = e.left, e.right
        return (_is_var_pow(l, "x", 2) and _is_var_pow(r, "y", 2)) or (
            _is_var_pow(l, "y", 2) and _is_var_pow(r, "x", 2)
        )
    return False


def _classify_term(term, params):
    """Return (key, payload) or None.

    Keys: one, x, y, theta, y2, r2, inv_x2, inv_r2, opq_over_r2, opq.
    Payload is the numeric coefficient, except for opaque keys where it is
    (coef, fn_name, arg_expr).
    """
    c = _const_value(term, params)
    if c is not None:
        return ("one", c)

    def split_coef(n):
        # peel numeric/constant multipliers and divisors off a product
        coef = 1.0
        core = n
        changed = True
        while changed:
            changed = False
            if isinstance(core, A.Neg):
                coef, core, changed = -coef, core.operand, True
            elif isinstance(core, A.Bin) and core.op == "*":
                cl = _const_value(core.left, params)
                if cl is not None:
                    coef, core, changed = coef * cl, core.right, True
                else:
                    cr = _const_value(core.right, params)
                    if cr is not None:
                        coef, core, changed = coef * cr, core.left, True
            elif isinstance(core, A.Bin) and core.op == "/":
                cr = _const_value(core.right, params)
                if cr is not None and cr != 0:
                    coef, core, changed = coef / cr, core.left, True
        return coef, core

    coef, core = split_coef(term)

    if isinstance(core, A.Var):
        if core.name in ("x", "y", "theta"):
            return (core.name, coef)
        return None
    if _is_var_pow(core, "y", 2):
        return ("y2", coef)
    if _is_r2(core):
        return ("r2", coef)
    if isinstance(core, A.Bin) and core.op == "/":
        num_c = _const_value(core.left, params)
        den = core.right
        if num_c is not None:
            if _is_var_pow(den, "x", 2):
                return ("inv_x2", coef * num_c)
            if _is_r2(den):
                return ("inv_r2", coef * num_c)
        if isinstance(core.left, A.Call) and core.left.opaque and core.left.prime == 0:
            if _is_r2(den):
                return ("opq_over_r2", (coef, core.left.fn, core.left.arg))
    if isinstance(core, A.Call) and core.opaque and core.prime == 0:
        return ("opq", (coef, core.fn, core.arg))
    return None


# per-case structural schemas: key -> (binding name, required)
_STRUCT_SCHEMAS = {
    "1.1a": {"inv_x2": ("C0", True), "y": ("b", False), "one": ("c0", False)},
    "1.1b": {
        "inv_x2": ("C0", True),
        "r2": ("c", True),
        "y": ("b", False),
        "one": ("c0", False),
    },
    "1.4a": {
        "inv_r2": ("C0", True),
        "x": ("a", False),
        "y": ("b", False),
        "one": ("c0", False),
    },
    "1.4b": {
        "inv_r2": ("C0", False),
        "r2": ("c", True),
        "x": ("a", False),
        "y": ("b", False),
        "one": ("c0", False),
    },
    "1.5a": {"x": ("a", False), "y": ("b", False), "one": ("c0", False)},
}


def _structural_match(expr, params, opaque):
    terms = _flatten_sum(expr)
    classified = []
    for sign, t in terms:
        k = _classify_term(t, params)
        if k is None:
            return None
        key, payload = k
        if key in ("opq_over_r2", "opq"):
            coef, fn, arg = payload
            classified.append((key, (sign * coef, fn, arg)))
        else:
            classified.append((key, sign * payload))

    buckets = {}
    for key, payload in classified:
        buckets.setdefault(key, []).append(payload)

    def scalar(key):
        vals = buckets.get(key, [])
        return sum(vals) if vals else 0.0

    results = []

    # finite-parameter families
    for cid, schema in _STRUCT_SCHEMAS.items():
        if any(k in ("opq", "opq_over_r2", "theta", "y2") for k in buckets):
            break
        extra = [k for k in buckets if k not in schema]
        if extra:
            continue
        ok = True
        bindings = {}
        for key, (name, required) in schema.items():
            v = scalar(key)
            if required and v == 0.0:
                ok = False
                break
            bindings[name] = v
        if ok:
            results.append(CaseMatch(cid, bindings, 0.0))

    # free-function families (need exactly one opaque term)
    opq_r2 = buckets.get("opq_over_r2", [])
    opq_bare = buckets.get("opq", [])
    if len(opq_r2) == 1 and not opq_bare:
        coef, fn, arg = opq_r2[0]
        binding_c = _bound_opaque(fn, coef, opaque)
        extra = [k for k in buckets if k not in ("opq_over_r2", "one", "r2")]
        if not extra and binding_c is not None:
            if isinstance(arg, A.Var) and arg.name == "theta":
                c = scalar("r2")
                if c != 0.0:
                    results.append(
                        CaseMatch("1.2b", {"C": binding_c, "c": c, "c0": scalar("one")}, 0.0)
                    )
                else:
                    results.append(CaseMatch("1.2a", {"C": binding_c, "c0": scalar("one")}, 0.0))
            else:
                lam = _log_spiral_arg(arg, params)
                if lam is not None and lam != 0.0 and scalar("r2") == 0.0:
                    results.append(
                        CaseMatch(
                            "1.3", {"C": binding_c, "lam": lam, "c0": scalar("one")}, 0.0
                        )
                    )
    if len(opq_bare) == 1 and not opq_r2:
        coef, fn, arg = opq_bare[0]
        binding_c = _bound_opaque(fn, coef, opaque)
        extra = [k for k in buckets if k not in ("opq", "theta", "y", "y2")]
        if not extra and binding_c is not None:
            if isinstance(arg, A.Var) and arg.name == "r_polar":
                if not any(k in buckets for k in ("y", "y2")):
                    results.append(
                        CaseMatch("1.6", {"C": binding_c, "d": scalar("theta")}, 0.0)
                    )
            elif isinstance(arg, A.Var) and arg.name == "x" and "theta" not in buckets:
                if "y2" in buckets and scalar("y2") != 0.0:
                    results.append(
                        CaseMatch(
                            "1.8b",
                            {"C": binding_c, "c": scalar("y2"), "b": scalar("y")},
                            0.0,
                        )
                    )
                else:
                    results.append(CaseMatch("1.8a", {"C": binding_c, "b": scalar("y")}, 0.0))
    return results or None


def _bound_opaque(fn, coef, opaque):
    if opaque is None or fn not in opaque:
        return None
    wrapper = A._OpaqueWrapper(fn, opaque[fn])
    if coef == 1.0:
        return wrapper.fns[0] if len(wrapper.fns) == 1 else wrapper.fns
    base = wrapper.fns[0]
    return lambda s, _b=base, _c=coef: _c * _b(s)


def _log_spiral_arg(arg, params):
    """Recognize lam*ln(r_polar) + theta and return lam."""
    if not (isinstance(arg, A.Bin) and arg.op == "+"):
        return None
    for l, r in ((arg.left, arg.right), (arg.right, arg.left)):
        if isinstance(r, A.Var) and r.name == "theta":
            if isinstance(l, A.Call) and l.fn == "ln" and isinstance(l.arg, A.Var) and l.arg.name == "r_polar":
                return 1.0
            if isinstance(l, A.Bin) and l.op == "*":
                c = _const_value(l.left, params)
                inner = l.right
                if c is None:
                    c = _const_value(l.right, params)
                    inner = l.left
                if (
                    c is not None
                    and isinstance(inner, A.Call)
                    and inner.fn == "ln"
                    and isinstance(inner.arg, A.Var)
                    and inner.arg.name == "r_polar"
                ):
                    return c
    return None


# ---------------------------------------------------------------------------
# sampled path
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MatchConfig:
    r_min: float = 0.4
    r_max: float = 2.8
    n_r: int = 8
    n_theta: int = 25
    min_x2y2_gap: float = 0.1  # |x^2 - y^2| >= gap filter
    tol: float = MATCH_TOL
    big: float = 1e8


def _polar_grid(cfg):
    radii = np.exp(np.linspace(math.log(cfg.r_min), math.log(cfg.r_max), cfg.n_r))
    thetas = np.linspace(0.07, 2 * math.pi + 0.07, cfg.n_theta, endpoint=False)
    return radii, thetas


def _eval_on_polar(f, cfg):
    radii, thetas = _polar_grid(cfg)
    vals = np.full((cfg.n_r, cfg.n_theta), np.nan)
    for i, r in enumerate(radii):
        for j, th in enumerate(thetas):
            x, y = r * math.cos(th), r * math.sin(th)
            if abs(x * x - y * y) < cfg.min_x2y2_gap:
                continue
            try:
                v = f(x, y)
            except (EvalDomainError, ZeroDivisionError, OverflowError, ValueError):
                continue
            if math.isfinite(v) and abs(v) < cfg.big:
                vals[i, j] = v
    return radii, thetas, vals


def _lstsq_family(f, cfg, columns):
    """Fit M ~ sum(coef * column(x, y)); returns (coefs, residual_rel)."""
    radii, thetas, vals = _eval_on_polar(f, cfg)
    rows, rhs = [], []
    for i, r in enumerate(radii):
        for j, th in enumerate(thetas):
            v = vals[i, j]
            if not math.isfinite(v):
                continue
            x, y = r * math.cos(th), r * math.sin(th)
            row = [col(x, y) for col in columns]
            if all(math.isfinite(c) and abs(c) < cfg.big for c in row):
                rows.append(row)
                rhs.append(v)
    if len(rows) < 2 * len(columns):
        return None
    Amat = np.asarray(rows)
    bvec = np.asarray(rhs)
    coefs, *_ = np.linalg.lstsq(Amat, bvec, rcond=None)
    resid = Amat @ coefs - bvec
    scale = max(float(np.sqrt(np.mean(bvec**2))), 1e-30)
    return coefs, float(np.sqrt(np.mean(resid**2))) / scale


_BASIS = {
    "one": lambda x, y: 1.0,
    "x": lambda x, y: x,
    "y": lambda x, y: y,
    "y2": lambda x, y: y * y,
    "r2": lambda x, y: x * x + y * y,
    "inv_x2": lambda x, y: 1.0 / (x * x),
    "inv_r2": lambda x, y: 1.0 / (x * x + y * y),
}

_LINEAR_FAMILIES = {
    "1.1a": (("inv_x2", "C0"), ("y", "b"), ("one", "c0")),
    "1.1b": (("inv_x2", "C0"), ("r2", "c"), ("y", "b"), ("one", "c0")),
    "1.4a": (("inv_r2", "C0"), ("x", "a"), ("y", "b"), ("one", "c0")),
    "1.4b": (("inv_r2", "C0"), ("r2", "c"), ("x", "a"), ("y", "b"), ("one", "c0")),
    "1.5a": (("x", "a"), ("y", "b"), ("one", "c0")),
}

_REQUIRED_NONZERO = {
    "1.1a": ("C0",),
    "1.1b": ("C0", "c"),
    "1.4a": ("C0",),
    "1.4b": ("c",),
    "1.5a": (),
    "1.2b": ("c",),
    "1.8a": ("b",),
    "1.8b": ("c",),
}


def _fit_linear_family(f, cfg, cid):
    family = _LINEAR_FAMILIES[cid]
    out = _lstsq_family(f, cfg, [_BASIS[k] for k, _ in family])
    if out is None:
        return None
    coefs, resid = out
    bindings = {name: float(c) for (_, name), c in zip(family, coefs)}
    return CaseMatch(cid, bindings, resid)


def _safe_eval(f, x, y, cfg):
    try:
        v = f(x, y)
    except (EvalDomainError, ZeroDivisionError, OverflowError, ValueError):
        return None
    if math.isfinite(v) and abs(v) < cfg.big:
        return v
    return None


def _angular_query(f, cfg, c_hat, c0_hat):
    """Exact pointwise extraction of the angular factor given (c, c0):
    C(theta) = mean over sampled radii of r^2 (M - c r^2 - c0)."""
    radii, _ = _polar_grid(cfg)

    def C(th):
        acc = []
        for r in radii:
            v = _safe_eval(f, r * math.cos(th), r * math.sin(th), cfg)
            if v is not None:
                acc.append(r * r * (v - c_hat * r * r - c0_hat))
        if not acc:
            raise EvalDomainError(f"angular factor not evaluable at theta={th}")
        return float(np.mean(acc))

    return C


def _fit_angular_family(f, cfg, with_r2):
    """Cases 1.2a / 1.2b: per-angle regression in r, medians across angles."""
    radii, thetas, vals = _eval_on_polar(f, cfg)
    c_list, c0_list, good_thetas = [], [], []
    for j, th in enumerate(thetas):
        mask = np.isfinite(vals[:, j])
        if mask.sum() < 4:
            continue
        r = radii[mask]
        v = vals[mask, j]
        if with_r2:
            Amat = np.stack([1.0 / r**2, r**2, np.ones_like(r)], axis=1)
        else:
            Amat = np.stack([1.0 / r**2, np.ones_like(r)], axis=1)
        coefs, *_ = np.linalg.lstsq(Amat, v, rcond=None)
        if with_r2:
            c_list.append(coefs[1])
            c0_list.append(coefs[2])
        else:
            c_list.append(0.0)
            c0_list.append(coefs[1])
        good_thetas.append(th)
    if len(good_thetas) < 6:
        return None
    c_hat = float(np.median(c_list))
    c0_hat = float(np.median(c0_list))
    C = _angular_query(f, cfg, c_hat, c0_hat)
    samples, resid_num, resid_den, n_pts = [], 0.0, 0.0, 0
    for j, th in enumerate(thetas):
        mask = np.isfinite(vals[:, j])
        if mask.sum() < 2:
            continue
        r = radii[mask]
        v = vals[mask, j]
        C_j = C(th)
        samples.append((float(th), C_j))
        pred = C_j / r**2 + c_hat * r**2 + c0_hat
        resid_num += float(np.sum((pred - v) ** 2))
        resid_den += float(np.sum(v**2))
        n_pts += int(mask.sum())
    resid = math.sqrt(resid_num / max(1, n_pts)) / max(
        math.sqrt(resid_den / max(1, n_pts)), 1e-30
    )
    cid = "1.2b" if with_r2 else "1.2a"
    bindings = {"C": C, "c0": c0_hat}
    if with_r2:
        bindings["c"] = c_hat
    return CaseMatch(cid, bindings, resid, opaque_samples=tuple(samples))


def _fit_log_spiral(f, cfg):
    """Case 1.3: the product M r^2 must be constant along lam ln(r) + theta =
    const up to the 2 c0 r^2 drift, which makes the slope pair linear:

        d(M r^2)/d ln r  =  lam d(M r^2)/d theta + 2 c0 r^2.

    Derivatives are taken on the continuous callable with the standard
    stencils, so the recovery is exact for exact template data.
    """
    from .. import numdiff as nd

    radii, thetas, vals = _eval_on_polar(f, cfg)

    def g(lr, th):
        r = math.exp(lr)
        v = f(r * math.cos(th), r * math.sin(th))
        return v * r * r

    rows, rhs = [], []
    for i in range(0, len(radii), 2):
        for j in range(0, len(thetas), 3):
            if not math.isfinite(vals[i, j]):
                continue
            lr, th = math.log(radii[i]), thetas[j]
            try:
                d_lnr = nd.partial1(g, (lr, th), 0, 1e-5)
                d_th = nd.partial1(g, (lr, th), 1, 1e-5)
            except (EvalDomainError, ZeroDivisionError, OverflowError, ValueError):
                continue
            if not (math.isfinite(d_lnr) and math.isfinite(d_th)):
                continue
            rows.append([d_th, 2.0 * radii[i] ** 2])
            rhs.append(d_lnr)
    if len(rows) < 8:
        return None
    (lam, c0), *_ = np.linalg.lstsq(np.asarray(rows), np.asarray(rhs), rcond=None)
    lam, c0 = float(lam), float(c0)
    if abs(lam) < 1e-10:
        return None

    def C(s):
        # the angular coordinate is 2 pi periodic, hence so is the profile;
        # evaluate on the unit circle where s = theta exactly
        v = _safe_eval(f, math.cos(s), math.sin(s), cfg)
        if v is None:
            raise EvalDomainError(f"spiral factor not evaluable at s={s}")
        return v - c0

    samples, resid_num, resid_den, n_pts = [], 0.0, 0.0, 0
    for i, r in enumerate(radii):
        for j, th in enumerate(thetas):
            if not math.isfinite(vals[i, j]):
                continue
            s = lam * math.log(r) + th
            try:
                pred = C(s) / r**2 + c0
            except EvalDomainError:
                continue
            resid_num += (pred - vals[i, j]) ** 2
            resid_den += vals[i, j] ** 2
            n_pts += 1
            if i == 0:
                samples.append((float(s), float(C(s))))
    if n_pts < 20:
        return None
    resid = math.sqrt(resid_num / n_pts) / max(math.sqrt(resid_den / n_pts), 1e-30)
    return CaseMatch(
        "1.3",
        {"C": C, "lam": lam, "c0": c0},
        resid,
        opaque_samples=tuple(sorted(samples)),
    )


def _fit_radial_angle(f, cfg):
    """Case 1.6: per-radius regression of M over theta on [theta, 1].

    The linear angle term lives on the atan2 branch (-pi, pi], so the
    regression abscissa must be the wrapped angle.
    """
    radii, thetas, vals = _eval_on_polar(f, cfg)
    wrapped = np.arctan2(np.sin(thetas), np.cos(thetas))
    d_list = []
    n_good = 0
    for i, r in enumerate(radii):
        mask = np.isfinite(vals[i, :])
        if mask.sum() < 4:
            continue
        th = wrapped[mask]
        v = vals[i, mask]
        Amat = np.stack([th, np.ones_like(th)], axis=1)
        (d_i, _), *_ = np.linalg.lstsq(Amat, v, rcond=None)
        d_list.append(d_i)
        n_good += 1
    if n_good < 4:
        return None
    d_hat = float(np.median(d_list))

    def C(r):
        acc = []
        for th, tw in zip(thetas, wrapped):
            v = _safe_eval(f, r * math.cos(th), r * math.sin(th), cfg)
            if v is not None:
                acc.append(v - d_hat * tw)
        if not acc:
            raise EvalDomainError(f"radial factor not evaluable at r={r}")
        return float(np.mean(acc))

    samples, resid_num, resid_den, n_pts = [], 0.0, 0.0, 0
    for i, r in enumerate(radii):
        mask = np.isfinite(vals[i, :])
        if mask.sum() < 2:
            continue
        th = wrapped[mask]
        v = vals[i, mask]
        C_r = C(r)
        samples.append((float(r), C_r))
        pred = C_r + d_hat * th
        resid_num += float(np.sum((pred - v) ** 2))
        resid_den += float(np.sum(v**2))
        n_pts += int(mask.sum())
    resid = math.sqrt(resid_num / max(1, n_pts)) / max(
        math.sqrt(resid_den / max(1, n_pts)), 1e-30
    )
    return CaseMatch("1.6", {"C": C, "d": d_hat}, resid, opaque_samples=tuple(samples))


def _x_slice_grid(cfg):
    xs = np.concatenate(
        [-np.linspace(cfg.r_min, cfg.r_max, 6)[::-1], np.linspace(cfg.r_min, cfg.r_max, 6)]
    )
    ys = np.linspace(-cfg.r_max, cfg.r_max, 9)
    return xs, ys


def _fit_x_slices(f, cfg, with_y2):
    """Cases 1.8a / 1.8b: per-x regression over y."""
    xs, ys = _x_slice_grid(cfg)
    b_list, c_list = [], []
    n_good = 0
    for x in xs:
        rows, rhs = [], []
        for y in ys:
            v = _safe_eval(f, x, y, cfg)
            if v is None:
                continue
            rows.append([y * y, y, 1.0] if with_y2 else [y, 1.0])
            rhs.append(v)
        if len(rows) < 4:
            continue
        coefs, *_ = np.linalg.lstsq(np.asarray(rows), np.asarray(rhs), rcond=None)
        if with_y2:
            c_list.append(coefs[0])
            b_list.append(coefs[1])
        else:
            b_list.append(coefs[0])
        n_good += 1
    if n_good < 5:
        return None
    b_hat = float(np.median(b_list))
    c_hat = float(np.median(c_list)) if with_y2 else 0.0

    def C(x):
        acc = []
        for y in ys:
            v = _safe_eval(f, x, y, cfg)
            if v is not None:
                acc.append(v - c_hat * y * y - b_hat * y)
        if not acc:
            raise EvalDomainError(f"C(x) not evaluable at x={x}")
        return float(np.mean(acc))

    samples, resid_num, resid_den, n_pts = [], 0.0, 0.0, 0
    for x in xs:
        vv, yy = [], []
        for y in ys:
            v = _safe_eval(f, x, y, cfg)
            if v is not None:
                vv.append(v)
                yy.append(y)
        if not vv:
            continue
        vv, yy = np.asarray(vv), np.asarray(yy)
        C_x = C(x)
        samples.append((float(x), C_x))
        pred = C_x + c_hat * yy**2 + b_hat * yy
        resid_num += float(np.sum((pred - vv) ** 2))
        resid_den += float(np.sum(vv**2))
        n_pts += len(vv)
    resid = math.sqrt(resid_num / max(1, n_pts)) / max(
        math.sqrt(resid_den / max(1, n_pts)), 1e-30
    )
    cid = "1.8b" if with_y2 else "1.8a"
    bindings = {"C": C, "b": b_hat}
    if with_y2:
        bindings["c"] = c_hat
    return CaseMatch(cid, bindings, resid, opaque_samples=tuple(samples))


# ---------------------------------------------------------------------------
# exclusion rules (the constraints that keep the families disjoint)
# ---------------------------------------------------------------------------


def _samples_of(match):
    return np.asarray([v for _, v in match.opaque_samples])


def _args_of(match):
    return np.asarray([s for s, _ in match.opaque_samples])


def _is_constant(vals, tol=1e-8):
    if len(vals) == 0:
        return True
    scale = max(float(np.max(np.abs(vals))), 1.0)
    return float(np.std(vals)) <= tol * scale


def _fits_basis(args, vals, columns, tol=1e-8):
    Amat = np.stack([c(args) for c in columns], axis=1)
    coefs, *_ = np.linalg.lstsq(Amat, vals, rcond=None)
    resid = Amat @ coefs - vals
    scale = max(float(np.sqrt(np.mean(vals**2))), 1.0)
    return float(np.sqrt(np.mean(resid**2))) <= tol * scale


def _excluded(match):
    """Exclusion constraints from the classification; returns a reason or None."""
    cid = match.case_id
    if cid in ("1.2a", "1.2b", "1.3"):
        vals = _samples_of(match)
        if len(vals) and _is_constant(vals):
            return "free angular factor is constant"
        if cid in ("1.2a", "1.2b") and len(vals):
            th = _args_of(match)
            if np.all(vals > 0):
                # the (c1 cos + c2 sin)^(-2) family belongs elsewhere
                w = vals ** (-0.5)
                if _fits_basis(th, w, [np.cos, np.sin], tol=1e-8) or _fits_basis(
                    th, -w, [np.cos, np.sin], tol=1e-8
                ):
                    return "angular factor is of the inverse-square sinusoid family"
    if cid == "1.3" and abs(match.bindings.get("lam", 0.0)) < 1e-10:
        return "spiral slope vanishes"
    if cid == "1.6":
        vals = _samples_of(match)
        r = _args_of(match)
        if abs(match.bindings.get("d", 0.0)) < 1e-10 and len(vals):
            if _fits_basis(
                r, vals, [lambda r: r**-2.0, lambda r: r**2.0, lambda r: np.ones_like(r)]
            ):
                return "radial factor belongs to the inverse-square/quadratic family"
    if cid in ("1.8a", "1.8b"):
        vals = _samples_of(match)
        xs = _args_of(match)
        if len(vals) and np.all(np.abs(xs) > 1e-9):
            # the span covering every finite-parameter family overlap
            # (quadratic, linear, inverse-square pieces live elsewhere)
            if _fits_basis(
                xs,
                vals,
                [
                    lambda x: x**-2.0,
                    lambda x: x**2,
                    lambda x: x,
                    lambda x: np.ones_like(x),
                ],
            ):
                return "C(x) belongs to a finite-parameter family"
    req = _REQUIRED_NONZERO.get(cid, ())
    for name in req:
        if abs(match.bindings.get(name, 0.0)) < 1e-10:
            return f"required parameter {name} vanishes"
    return None


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def _as_xy_callable(m, params=None, opaque=None):
    if isinstance(m, A.Expr):
        def f(x, y):
            return A.evaluate(m, {"x": x, "y": y}, params, opaque)

        return f
    if hasattr(m, "fn") and callable(m):  # ScalarField on (x, y)
        return lambda x, y: m(x, y)
    if callable(m):
        return m
    raise TypeError(f"cannot classify object of type {type(m)!r}")


def match_case(m, params=None, opaque=None, config=None):
    """Classify a potential.

    Returns a :class:`CaseMatch` (or :class:`NoMatchResult`); raises
    :class:`AmbiguousMatch` when several templates fit within tolerance, with
    the matches sorted most-specific-first on the exception.
    """
    cfg = config or MatchConfig()

    if isinstance(m, A.Expr):
        structural = _structural_match(m, params or {}, opaque)
        if structural:
            survivors = [s for s in structural if _excluded(s) is None]
            # attach samples for opaque families so downstream checks can use them
            for s in survivors:
                if callable(s.bindings.get("C")) and not s.opaque_samples:
                    s.opaque_samples = _resample_structural(s, cfg)
            survivors = [s for s in survivors if _excluded(s) is None]
            if len(survivors) == 1:
                return survivors[0]
            if len(survivors) > 1:
                survivors.sort(key=lambda s: CASE_ORDER.index(s.case_id))
                raise AmbiguousMatch(survivors)

    f = _as_xy_callable(m, params, opaque)

    candidates = []
    for cid in CASE_ORDER:
        try:
            if cid in _LINEAR_FAMILIES:
                cand = _fit_linear_family(f, cfg, cid)
            elif cid in ("1.2a", "1.2b"):
                cand = _fit_angular_family(f, cfg, with_r2=(cid == "1.2b"))
            elif cid == "1.3":
                cand = _fit_log_spiral(f, cfg)
            elif cid == "1.6":
                cand = _fit_radial_angle(f, cfg)
            else:
                cand = _fit_x_slices(f, cfg, with_y2=(cid == "1.8b"))
        except (np.linalg.LinAlgError, ValueError):
            cand = None
        if cand is None:
            continue
        if cand.fit_residual <= cfg.tol and _excluded(cand) is None:
            candidates.append(cand)

    if not candidates:
        return NoMatchResult()
    if len(candidates) == 1:
        return candidates[0]
    candidates.sort(key=lambda s: CASE_ORDER.index(s.case_id))
    raise AmbiguousMatch(candidates)


def _resample_structural(match, cfg):
    C = match.bindings.get("C")
    if not callable(C):
        return ()
    if match.case_id in ("1.2a", "1.2b"):
        _, thetas = _polar_grid(cfg)
        return tuple((float(t), float(C(t))) for t in sorted(thetas))
    if match.case_id == "1.6":
        radii, _ = _polar_grid(cfg)
        return tuple((float(r), float(C(r))) for r in radii)
    if match.case_id in ("1.8a", "1.8b"):
        xs = np.linspace(cfg.r_min, cfg.r_max, 8)
        return tuple((float(x), float(C(x))) for x in xs)
    if match.case_id == "1.3":
        ss = np.linspace(-1.5, 7.0, 12)
        return tuple((float(s), float(C(s))) for s in ss)
    return ()
