"""The reduction catalog: eleven potential families, each bundling

* the potential template and its admissible generator data,
* the similarity map (from :mod:`.maps`),
* the reduced operator on the similarity variables,
* the separated closed form (where one exists),
* sampling-region builders that avoid the singular loci.

Reduced operators are written exactly as verified by the Jacobian-ratio
consistency check; factor ODE conventions are

    F1: second-order in the first variable with separation constant c1,
    F2: carries the complementary constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import hyperdual as hd
from ..errors import NoClosedForm, SamplingError
from ..exprlang import evaluate, template_expr
from ..fields import ScalarField
from ..symmetry import SymmetryData, exp_pair, poly
from . import maps as MP
from . import separated as SEP


@dataclass(frozen=True)
class SumTimeFn:
    parts: tuple

    def __call__(self, t):
        acc = 0.0
        for p in self.parts:
            acc = acc + p(t)
        return acc

    def d(self):
        return SumTimeFn(tuple(p.d() for p in self.parts))

    def is_zero(self):
        return all(p.is_zero() for p in self.parts)


def _jet(P, args, i, order):
    return hd.derivative(P, args, i, order=order)


def _polar_op(P):
    """Wrap a cartesian P(xi, eta) as polar Pp(rho, theta) with derivatives."""

    def Pp(rho, th):
        return P(rho * hd.cos(th), rho * hd.sin(th))

    return Pp


@dataclass
class CaseReduction:
    case_id: str
    template: str
    case_params: tuple
    sym_params: tuple
    polar: bool
    has_closed_form: bool
    _map: object
    _symmetry: object
    _reduced: object
    _closed: object
    _region_xyt: object
    _region_sim: object
    _opaque_default: object = None

    # -- potential ----------------------------------------------------------
    def potential_field(self, params, opaque=None):
        expr = template_expr(self.case_id)
        op = opaque if opaque is not None else self.opaque_binding(params)

        def M(x, y):
            return evaluate(expr, {"x": x, "y": y}, params, op)

        return ScalarField(M, nargs=2, name=f"M[{self.case_id}]")

    def opaque_binding(self, params):
        if self._opaque_default is None:
            return None
        if "C" in params:
            return {"C": params["C"]}
        return {"C": self._opaque_default}

    # -- pieces ---------------------------------------------------------------
    def similarity(self, params) -> MP.SimilarityMap:
        return self._map(params)

    def symmetry_data(self, params) -> SymmetryData:
        return self._symmetry(params)

    def reduced_operator(self, params):
        """callable(P, xi, eta) evaluating the catalog reduced operator."""
        return self._reduced(params)

    def closed_form(self, params, constants):
        if not self.has_closed_form:
            raise NoClosedForm(f"case {self.case_id} has a reduced operator only")
        return self._closed(params, constants)

    def region_xyt(self, params, n=30, seed=0):
        return self._region_xyt(params, n, seed)

    def region_sim(self, params, n=40, seed=0):
        return self._region_sim(params, n, seed)

    def draw_params(self, rng):
        out = {name: float(rng.uniform(0.5, 2.0)) for name in self.case_params + self.sym_params}
        if self.case_id in ("1.4a", "1.4b"):
            out["a"] = 0.0
            out["b"] = 0.0
        return out



def _c_scalar(p, default):
    """The opaque factor as a plain callable (bindings may carry jets)."""
    C = p.get("C", default)
    if isinstance(C, (tuple, list)):
        return C[0]
    return C


# opaque defaults: smooth profiles with analytic derivative chains
_C_THETA = (
    lambda s: 2.0 + math.sin(s) + 0.3 * math.sin(2 * s),
    lambda s: math.cos(s) + 0.6 * math.cos(2 * s),
    lambda s: -math.sin(s) - 1.2 * math.sin(2 * s),
    lambda s: -math.cos(s) - 2.4 * math.cos(2 * s),
    lambda s: math.sin(s) + 4.8 * math.sin(2 * s),
)
_C_RADIAL = (
    lambda s: math.exp(-s) + 0.2 * s**3,
    lambda s: -math.exp(-s) + 0.6 * s**2,
    lambda s: math.exp(-s) + 1.2 * s,
    lambda s: -math.exp(-s) + 1.2,
    lambda s: math.exp(-s),
)
_C_LINE = (
    lambda s: math.sin(1.3 * s) + 0.1 * s**4 + 1.5,
    lambda s: 1.3 * math.cos(1.3 * s) + 0.4 * s**3,
    lambda s: -1.69 * math.sin(1.3 * s) + 1.2 * s**2,
    lambda s: -2.197 * math.cos(1.3 * s) + 2.4 * s,
    lambda s: 2.8561 * math.sin(1.3 * s) + 2.4,
)


def _annulus_points(n, seed, r_range=(0.5, 2.0), t_range=(0.3, 1.0), guard=None):
    rng = np.random.default_rng(seed)
    pts = []
    tries = 0
    while len(pts) < n and tries < 80 * n:
        tries += 1
        r = rng.uniform(*r_range)
        th = rng.uniform(-math.pi + 0.2, math.pi - 0.2)
        x, y = r * math.cos(th), r * math.sin(th)
        t = rng.uniform(*t_range)
        if guard is not None and guard(x, y, t):
            continue
        pts.append((x, y, t))
    if len(pts) < n:
        raise SamplingError("could not build a sampling set away from singular loci")
    return pts


def _sim_points(n, seed, xi_range=(0.4, 1.8), eta_range=(0.3, 1.5), need_xi_pos=False):
    rng = np.random.default_rng(seed)
    pts = []
    while len(pts) < n:
        xi = rng.uniform(*xi_range)
        if not need_xi_pos and rng.uniform() < 0.5:
            xi = -xi
        eta = rng.uniform(*eta_range)
        if rng.uniform() < 0.5:
            eta = -eta
        pts.append((xi, eta))
    return pts


# ---------------------------------------------------------------------------
# case builders
# ---------------------------------------------------------------------------


def _case_11a():
    def make_map(p):
        return MP.map_11a(p["C0"], p["b"], p["c0"], p["delta1"], p["delta2"], p["beta0"], p["beta1"])

    def make_sym(p):
        d1, d2, b, c0 = p["delta1"], p["delta2"], p["b"], p["c0"]
        b0, b1 = p["beta0"], p["beta1"]
        return SymmetryData(
            f1=poly(0.0, d1, d2),
            f3=poly(b0, b1, 0.75 * b * d1, 0.5 * b * d2),
            f4=poly(
                0.0,
                d2 + c0 * d1 + b * b0,
                0.5 * b * b1 + c0 * d2,
                0.25 * b * b * d1,
                0.125 * b * b * d2,
            ),
        )

    def reduced(p):
        d1, d2, C0 = p["delta1"], p["delta2"], p["C0"]
        b0, b1 = p["beta0"], p["beta1"]
        kap = 4.0 * (d2 * b0 * b0 - d1 * b0 * b1)

        def op(P, xi, eta):
            lap = _jet(P, (xi, eta), 0, 2) + _jet(P, (xi, eta), 1, 2)
            px = _jet(P, (xi, eta), 0, 1)
            py = _jet(P, (xi, eta), 1, 1)
            return (
                d1 * d1 * xi * xi * lap
                + d1**3 * xi**3 * px
                + d1**3 * xi * xi * eta * py
                + (kap * xi * xi - 2.0 * C0 * d1 * d1) * P(xi, eta)
            )

        return op

    def closed(p, c):
        d1, d2, C0 = p["delta1"], p["delta2"], p["C0"]
        b0, b1 = p["beta0"], p["beta1"]
        c1 = c.get("c1", 1.0)
        kap_norm = 4.0 * (d2 * b0 * b0 - d1 * b0 * b1) / d1**2
        F1 = SEP.whittaker_radial(d1, c1, C0, c.get("C1", 1.0), c.get("C2", 0.0))
        F2 = SEP.whittaker_radial(
            d1, kap_norm - c1, 0.0, c.get("C3", 1.0), c.get("C4", 0.0)
        )
        return SEP.SeparatedSolution(F1, F2, dict(c), "cartesian")

    def region_xyt(p, n, seed):
        return _annulus_points(
            n, seed, guard=lambda x, y, t: abs(x) < 0.4 or t < 0.25
        )

    def region_sim(p, n, seed):
        return _sim_points(n, seed, need_xi_pos=True)

    return CaseReduction(
        "1.1a",
        "C0/x^2 + b*y + c0",
        ("C0", "b", "c0"),
        ("delta1", "delta2", "beta0", "beta1"),
        polar=False,
        has_closed_form=True,
        _map=make_map,
        _symmetry=make_sym,
        _reduced=reduced,
        _closed=closed,
        _region_xyt=region_xyt,
        _region_sim=region_sim,
    )


def _case_11b():
    def make_map(p):
        return MP.map_11b(
            p["C0"], p["c"], p["b"], p["c0"], p["delta1"], p["delta2"], p["beta1"], p["beta2"]
        )

    def make_sym(p):
        d1, d2, b, c, c0 = p["delta1"], p["delta2"], p["b"], p["c"], p["c0"]
        B1, B2 = p["beta1"], p["beta2"]
        a = math.sqrt(2.0 * c)
        q = c0 + b * b / (4.0 * c)
        return SymmetryData(
            f1=exp_pair(d1, d2, 2 * a),
            f3=SumTimeFn((exp_pair(b * d1 / a, -b * d2 / a, 2 * a), exp_pair(B1, B2, a))),
            f4=SumTimeFn(
                (
                    exp_pair((a + q) * d1, -(a - q) * d2, 2 * a),
                    exp_pair(b * B1 / a, -b * B2 / a, a),
                )
            ),
        )

    def reduced(p):
        d1, d2, c, C0 = p["delta1"], p["delta2"], p["c"], p["C0"]
        B1, B2 = p["beta1"], p["beta2"]

        def op(P, xi, eta):
            lap = _jet(P, (xi, eta), 0, 2) + _jet(P, (xi, eta), 1, 2)
            return d1 * d2 * xi * xi * lap + (
                8.0 * c * d1**2 * d2**2 * xi * xi * (xi * xi + eta * eta)
                - xi * xi * (B1 * B1 * d2 + B2 * B2 * d1)
                - 2.0 * C0 * d1 * d2
            ) * P(xi, eta)

        return op

    def closed(p, c_):
        d1, d2, c, C0 = p["delta1"], p["delta2"], p["c"], p["C0"]
        B1, B2 = p["beta1"], p["beta2"]
        c1 = c_.get("c1", 1.0)
        w = math.sqrt(8.0 * c * d1 * d2)
        # separation of the normalized operator:
        #   F1'' + (w^2 xi^2 - 2 C0/xi^2 + s1) F1 = 0,  s1 = c1
        #   F2'' + (w^2 eta^2 + s2) F2 = 0, s1 + s2 = -(B1^2 d2 + B2^2 d1)/(d1 d2)
        s2 = -(B1 * B1 * d2 + B2 * B2 * d1) / (d1 * d2) - c1
        F1 = SEP.imag_whittaker_radial(w, c1, C0, c_.get("C1", 1.0), c_.get("C2", 0.0))
        F2 = SEP.imag_whittaker_radial(w, s2, 0.0, c_.get("C3", 1.0), c_.get("C4", 0.0))
        return SEP.SeparatedSolution(F1, F2, dict(c_), "cartesian")

    def region_xyt(p, n, seed):
        return _annulus_points(n, seed, guard=lambda x, y, t: abs(x) < 0.4, t_range=(-0.3, 0.6))

    def region_sim(p, n, seed):
        return _sim_points(n, seed, xi_range=(0.4, 1.4), eta_range=(0.3, 1.2), need_xi_pos=True)

    return CaseReduction(
        "1.1b",
        "C0/x^2 + c*r_polar^2 + b*y + c0",
        ("C0", "c", "b", "c0"),
        ("delta1", "delta2", "beta1", "beta2"),
        polar=False,
        has_closed_form=True,
        _map=make_map,
        _symmetry=make_sym,
        _reduced=reduced,
        _closed=closed,
        _region_xyt=region_xyt,
        _region_sim=region_sim,
    )


def _case_12a():
    def make_map(p):
        return MP.map_12a(p["c0"], p["delta1"], p["delta2"])

    def make_sym(p):
        d1, d2, c0 = p["delta1"], p["delta2"], p["c0"]
        return SymmetryData(f1=poly(0.0, d1, d2), f4=poly(0.0, d2 + c0 * d1, c0 * d2))

    def reduced(p):
        d1 = p["delta1"]
        C = _c_scalar(p, _C_THETA)

        def op(P, xi, eta):
            Pp = _polar_op(P)
            rho = math.hypot(hd.value(xi), hd.value(eta))
            th = math.atan2(hd.value(eta), hd.value(xi))
            prr = _jet(Pp, (rho, th), 0, 2)
            pr = _jet(Pp, (rho, th), 0, 1)
            ptt = _jet(Pp, (rho, th), 1, 2)
            return (
                rho * rho * prr
                + (d1 * rho**3 + rho) * pr
                + ptt
                - 2.0 * C(th) * Pp(rho, th)
            )

        return op

    def closed(p, c_):
        d1 = p["delta1"]
        c1 = c_.get("c1", 1.0)
        C = _c_scalar(p, _C_THETA)
        F1 = SEP.bessel_radial_ik(d1, c1, c_.get("C1", 1.0), c_.get("C2", 0.0))
        F2 = SEP.ode_factor(
            lambda s: C(s), c1, (-math.pi, math.pi), c_.get("C3", 1.0), c_.get("C4", 0.0)
        )
        return SEP.SeparatedSolution(F1, F2, dict(c_), "polar")

    def region_xyt(p, n, seed):
        return _annulus_points(n, seed)

    def region_sim(p, n, seed):
        rng = np.random.default_rng(seed)
        pts = []
        while len(pts) < n:
            rho = rng.uniform(0.5, 1.8)
            th = rng.uniform(-math.pi + 0.25, math.pi - 0.25)
            pts.append((rho * math.cos(th), rho * math.sin(th)))
        return pts

    return CaseReduction(
        "1.2a",
        "C(theta)/r_polar^2 + c0",
        ("c0",),
        ("delta1", "delta2"),
        polar=True,
        has_closed_form=True,
        _map=make_map,
        _symmetry=make_sym,
        _reduced=reduced,
        _closed=closed,
        _region_xyt=region_xyt,
        _region_sim=region_sim,
        _opaque_default=_C_THETA,
    )


def _case_12b():
    def make_map(p):
        return MP.map_12b(p["c"], p["c0"], p["delta1"], p["delta2"])

    def make_sym(p):
        d1, d2, c, c0 = p["delta1"], p["delta2"], p["c"], p["c0"]
        a = math.sqrt(2.0 * c)
        return SymmetryData(
            f1=exp_pair(d1, d2, 2 * a), f4=exp_pair((a + c0) * d1, -(a - c0) * d2, 2 * a)
        )

    def reduced(p):
        c = p["c"]
        d1, d2 = p["delta1"], p["delta2"]
        C = _c_scalar(p, _C_THETA)

        def op(P, xi, eta):
            Pp = _polar_op(P)
            rho = math.hypot(hd.value(xi), hd.value(eta))
            th = math.atan2(hd.value(eta), hd.value(xi))
            prr = _jet(Pp, (rho, th), 0, 2)
            pr = _jet(Pp, (rho, th), 0, 1)
            ptt = _jet(Pp, (rho, th), 1, 2)
            return (
                rho * rho * prr
                + rho * pr
                + ptt
                + 2.0 * (4.0 * c * d1 * d2 * rho**4 - C(th)) * Pp(rho, th)
            )

        return op

    def closed(p, c_):
        c1 = c_.get("c1", 1.0)
        b = math.sqrt(2.0 * p["delta1"] * p["delta2"] * p["c"])
        C = _c_scalar(p, _C_THETA)
        F1 = SEP.bessel_radial_jy(b, c1, c_.get("C1", 1.0), c_.get("C2", 0.0))
        F2 = SEP.ode_factor(
            lambda s: C(s), c1, (-math.pi, math.pi), c_.get("C3", 1.0), c_.get("C4", 0.0)
        )
        return SEP.SeparatedSolution(F1, F2, dict(c_), "polar")

    def region_xyt(p, n, seed):
        return _annulus_points(n, seed, t_range=(-0.3, 0.6))

    def region_sim(p, n, seed):
        rng = np.random.default_rng(seed)
        pts = []
        while len(pts) < n:
            rho = rng.uniform(0.5, 1.6)
            th = rng.uniform(-math.pi + 0.25, math.pi - 0.25)
            pts.append((rho * math.cos(th), rho * math.sin(th)))
        return pts

    return CaseReduction(
        "1.2b",
        "C(theta)/r_polar^2 + c*r_polar^2 + c0",
        ("c", "c0"),
        ("delta1", "delta2"),
        polar=True,
        has_closed_form=True,
        _map=make_map,
        _symmetry=make_sym,
        _reduced=reduced,
        _closed=closed,
        _region_xyt=region_xyt,
        _region_sim=region_sim,
        _opaque_default=_C_THETA,
    )


def _case_13():
    def make_map(p):
        return MP.map_13(p["lam"], p["c0"], p.get("k", 1.0))

    def make_sym(p):
        lam, c0, k = p["lam"], p["c0"], p.get("k", 1.0)
        return SymmetryData(k=k, f1=poly(0.0, 2 * k / lam), f4=poly(0.0, 2 * k * c0 / lam))

    def reduced(p):
        lam = p["lam"]
        C = _c_scalar(p, _C_THETA)

        def op(P, xi, eta):
            rho2 = xi * xi + eta * eta
            rho = math.sqrt(hd.value(rho2))
            th = math.atan2(hd.value(eta), hd.value(xi))
            lap = _jet(P, (xi, eta), 0, 2) + _jet(P, (xi, eta), 1, 2)
            px = _jet(P, (xi, eta), 0, 1)
            py = _jet(P, (xi, eta), 1, 1)
            s = lam * math.log(rho) + th
            return rho2 * (lap + (xi + lam * eta) * px + (eta - lam * xi) * py) - 2.0 * C(
                s
            ) * P(xi, eta)

        return op

    def region_xyt(p, n, seed):
        return _annulus_points(n, seed)

    def region_sim(p, n, seed):
        rng = np.random.default_rng(seed)
        pts = []
        while len(pts) < n:
            rho = rng.uniform(0.5, 1.8)
            th = rng.uniform(-math.pi + 0.2, math.pi - 0.2)
            pts.append((rho * math.cos(th), rho * math.sin(th)))
        return pts

    return CaseReduction(
        "1.3",
        "C(lam*ln(r_polar) + theta)/r_polar^2 + c0",
        ("lam", "c0"),
        ("k",),
        polar=False,
        has_closed_form=False,
        _map=make_map,
        _symmetry=make_sym,
        _reduced=reduced,
        _closed=None,
        _region_xyt=region_xyt,
        _region_sim=region_sim,
        _opaque_default=_C_THETA,
    )


def _case_14a():
    base = _case_12a()

    def make_map(p):
        return MP.map_12a(p["c0"], p["delta1"], p["delta2"])

    def make_sym(p):
        d1, d2, c0 = p["delta1"], p["delta2"], p["c0"]
        return SymmetryData(f1=poly(0.0, d1, d2), f4=poly(0.0, d2 + c0 * d1, c0 * d2))

    def reduced(p):
        d1, C0 = p["delta1"], p["C0"]

        def op(P, xi, eta):
            rho2 = xi * xi + eta * eta
            lap = _jet(P, (xi, eta), 0, 2) + _jet(P, (xi, eta), 1, 2)
            px = _jet(P, (xi, eta), 0, 1)
            py = _jet(P, (xi, eta), 1, 1)
            return rho2 * lap + d1 * rho2 * (xi * px + eta * py) - 2.0 * C0 * P(xi, eta)

        return op

    def closed(p, c_):
        d1, C0 = p["delta1"], p["C0"]
        c1 = c_.get("c1", 2.0 * C0 + 1.0)
        F1 = SEP.bessel_radial_ik(d1, c1, c_.get("C1", 1.0), c_.get("C2", 0.0))
        F2 = SEP.trig_angular(c1, C0, c_.get("C3", 1.0), c_.get("C4", 0.0))
        return SEP.SeparatedSolution(F1, F2, dict(c_), "polar")

    return CaseReduction(
        "1.4a",
        "C0/r_polar^2 + a*x + b*y + c0",
        ("C0", "a", "b", "c0"),
        ("delta1", "delta2"),
        polar=True,
        has_closed_form=True,
        _map=make_map,
        _symmetry=make_sym,
        _reduced=reduced,
        _closed=closed,
        _region_xyt=base._region_xyt,
        _region_sim=base._region_sim,
    )


def _case_14b():
    base = _case_12b()

    def make_map(p):
        return MP.map_12b(p["c"], p["c0"], p["delta1"], p["delta2"])

    def make_sym(p):
        d1, d2, c, c0 = p["delta1"], p["delta2"], p["c"], p["c0"]
        a = math.sqrt(2.0 * c)
        return SymmetryData(
            f1=exp_pair(d1, d2, 2 * a), f4=exp_pair((a + c0) * d1, -(a - c0) * d2, 2 * a)
        )

    def reduced(p):
        c, C0 = p["c"], p["C0"]
        d1, d2 = p["delta1"], p["delta2"]

        def op(P, xi, eta):
            rho2 = xi * xi + eta * eta
            lap = _jet(P, (xi, eta), 0, 2) + _jet(P, (xi, eta), 1, 2)
            return rho2 * lap + 2.0 * (4.0 * c * d1 * d2 * rho2 * rho2 - C0) * P(xi, eta)

        return op

    def closed(p, c_):
        c, C0 = p["c"], p["C0"]
        c1 = c_.get("c1", 2.0 * C0 + 2.0)
        b = math.sqrt(2.0 * p["delta1"] * p["delta2"] * c)
        F1 = SEP.bessel_radial_jy(b, c1, c_.get("C1", 1.0), c_.get("C2", 0.0))
        F2 = SEP.trig_angular(c1, C0, c_.get("C3", 1.0), c_.get("C4", 0.0))
        return SEP.SeparatedSolution(F1, F2, dict(c_), "polar")

    return CaseReduction(
        "1.4b",
        "C0/r_polar^2 + c*r_polar^2 + a*x + b*y + c0",
        ("C0", "c", "a", "b", "c0"),
        ("delta1", "delta2"),
        polar=True,
        has_closed_form=True,
        _map=make_map,
        _symmetry=make_sym,
        _reduced=reduced,
        _closed=closed,
        _region_xyt=base._region_xyt,
        _region_sim=base._region_sim,
    )


def _case_15a():
    def make_map(p):
        return MP.map_15a(
            p["a"], p["b"], p["c0"], p["delta1"], p["delta2"],
            p["alpha0"], p["alpha1"], p["beta0"], p["beta1"],
        )

    def make_sym(p):
        d1, d2, a, b, c0 = p["delta1"], p["delta2"], p["a"], p["b"], p["c0"]
        a0, a1, b0, b1 = p["alpha0"], p["alpha1"], p["beta0"], p["beta1"]
        return SymmetryData(
            f1=poly(0.0, d1, d2),
            f2=poly(a0, a1, 0.75 * a * d1, 0.5 * a * d2),
            f3=poly(b0, b1, 0.75 * b * d1, 0.5 * b * d2),
            f4=poly(
                0.0,
                d2 + c0 * d1 + a * a0 + b * b0,
                0.5 * (a * a1 + b * b1) + c0 * d2,
                0.25 * (a * a + b * b) * d1,
                0.125 * (a * a + b * b) * d2,
            ),
        )

    def _kappa(p):
        d1, d2 = p["delta1"], p["delta2"]
        a0, a1, b0, b1 = p["alpha0"], p["alpha1"], p["beta0"], p["beta1"]
        return 4.0 * (d2 * (a0 * a0 + b0 * b0) - d1 * (a0 * a1 + b0 * b1)) / d1**2

    def reduced(p):
        d1 = p["delta1"]
        kap = _kappa(p)

        def op(P, xi, eta):
            lap = _jet(P, (xi, eta), 0, 2) + _jet(P, (xi, eta), 1, 2)
            px = _jet(P, (xi, eta), 0, 1)
            py = _jet(P, (xi, eta), 1, 1)
            return d1 * d1 * (
                lap + d1 * (xi * px + eta * py) + kap * P(xi, eta)
            )

        return op

    def closed(p, c_):
        d1 = p["delta1"]
        c1 = c_.get("c1", 1.0)
        kap = _kappa(p)
        F1 = SEP.whittaker_radial(d1, c1, 0.0, c_.get("C1", 1.0), c_.get("C2", 0.0))
        F2 = SEP.whittaker_radial(d1, kap - c1, 0.0, c_.get("C3", 1.0), c_.get("C4", 0.0))
        return SEP.SeparatedSolution(F1, F2, dict(c_), "cartesian")

    def region_xyt(p, n, seed):
        return _annulus_points(n, seed, guard=lambda x, y, t: t < 0.25)

    def region_sim(p, n, seed):
        return _sim_points(n, seed, need_xi_pos=True)

    return CaseReduction(
        "1.5a",
        "a*x + b*y + c0",
        ("a", "b", "c0"),
        ("delta1", "delta2", "alpha0", "alpha1", "beta0", "beta1"),
        polar=False,
        has_closed_form=True,
        _map=make_map,
        _symmetry=make_sym,
        _reduced=reduced,
        _closed=closed,
        _region_xyt=region_xyt,
        _region_sim=region_sim,
    )


def _case_16():
    def make_map(p):
        return MP.map_16(p["d"], p.get("k", 1.0))

    def make_sym(p):
        d, k = p["d"], p.get("k", 1.0)
        return SymmetryData(k=k, f4=poly(0.0, -d * k))

    def reduced(p):
        d = p["d"]
        C = _c_scalar(p, _C_RADIAL)

        def op(P, xi, eta):
            # similarity variables are (xi, eta) = (rho^2, t)
            pxx = _jet(P, (xi, eta), 0, 2)
            px = _jet(P, (xi, eta), 0, 1)
            pe = _jet(P, (xi, eta), 1, 1)
            r = math.sqrt(hd.value(xi))
            return (
                4.0 * xi * xi * pxx
                + 4.0 * xi * px
                - 2.0 * xi * pe
                + (d * d * eta * eta - 2.0 * xi * C(r)) * P(xi, eta)
            )

        return op

    def region_xyt(p, n, seed):
        return _annulus_points(
            n, seed, guard=lambda x, y, t: x < 0 and abs(y) < 0.3
        )

    def region_sim(p, n, seed):
        rng = np.random.default_rng(seed)
        return [(rng.uniform(0.3, 3.0), rng.uniform(0.3, 1.0)) for _ in range(n)]

    return CaseReduction(
        "1.6",
        "C(r_polar) + d*theta",
        ("d",),
        ("k",),
        polar=False,
        has_closed_form=False,
        _map=make_map,
        _symmetry=make_sym,
        _reduced=reduced,
        _closed=None,
        _region_xyt=region_xyt,
        _region_sim=region_sim,
        _opaque_default=_C_RADIAL,
    )


def _case_18a():
    def make_map(p):
        return MP.map_18a(p["b"], p["beta0"], p["beta1"])

    def make_sym(p):
        b, b0, b1 = p["b"], p["beta0"], p["beta1"]
        return SymmetryData(f3=poly(b0, b1), f4=poly(0.0, b * b0, 0.5 * b * b1))

    def reduced(p):
        b, b0, b1 = p["b"], p["beta0"], p["beta1"]
        C = _c_scalar(p, _C_LINE)

        def op(P, xi, eta):
            h = b1 * eta + b0
            pxx = _jet(P, (xi, eta), 0, 2)
            pe = _jet(P, (xi, eta), 1, 1)
            return (
                4.0 * h * h * pxx
                - 8.0 * h * h * pe
                + (
                    b * b * eta * eta * (b1 * eta + 2.0 * b0) ** 2
                    - 4.0 * b1 * h
                    - 8.0 * C(hd.value(xi)) * h * h
                )
                * P(xi, eta)
            )

        return op

    def closed(p, c_):
        b, b0, b1 = p["b"], p["beta0"], p["beta1"]
        c1 = c_.get("c1", 1.0)
        C = _c_scalar(p, _C_LINE)
        F1 = SEP.ode_factor(lambda s: C(s), c1, (-2.5, 2.5), c_.get("C1", 1.0), c_.get("C2", 0.0))
        F2 = SEP.exp_factor_18a(c1, b, b0, b1)
        return SEP.SeparatedSolution(F1, F2, dict(c_), "cartesian")

    def region_xyt(p, n, seed):
        b0, b1 = p["beta0"], p["beta1"]
        return _annulus_points(
            n, seed, guard=lambda x, y, t: abs(b1 * t + b0) < 0.15
        )

    def region_sim(p, n, seed):
        rng = np.random.default_rng(seed)
        b0, b1 = p["beta0"], p["beta1"]
        pts = []
        while len(pts) < n:
            eta = rng.uniform(0.3, 1.0)
            if abs(b1 * eta + b0) < 0.15:
                continue
            pts.append((rng.uniform(-2.0, 2.0), eta))
        return pts

    return CaseReduction(
        "1.8a",
        "C(x) + b*y",
        ("b",),
        ("beta0", "beta1"),
        polar=False,
        has_closed_form=True,
        _map=make_map,
        _symmetry=make_sym,
        _reduced=reduced,
        _closed=closed,
        _region_xyt=region_xyt,
        _region_sim=region_sim,
        _opaque_default=_C_LINE,
    )


def _case_18b():
    def make_map(p):
        return MP.map_18b(p["c"], p["b"], p["beta1"], p["beta2"])

    def make_sym(p):
        c, b = p["c"], p["b"]
        B1, B2 = p["beta1"], p["beta2"]
        a1 = math.sqrt(2.0 * c)
        return SymmetryData(
            f3=exp_pair(B1, B2, a1), f4=exp_pair(b * B1 / a1, -b * B2 / a1, a1)
        )

    def reduced(p):
        C = _c_scalar(p, _C_LINE)

        def op(P, xi, eta):
            pxx = _jet(P, (xi, eta), 0, 2)
            pe = _jet(P, (xi, eta), 1, 1)
            return pxx - 2.0 * pe - 2.0 * C(hd.value(xi)) * P(xi, eta)

        return op

    def closed(p, c_):
        c1 = c_.get("c1", 1.0)
        C = _c_scalar(p, _C_LINE)
        F1 = SEP.ode_factor(lambda s: C(s), c1, (-2.5, 2.5), c_.get("C1", 1.0), c_.get("C2", 0.0))
        F2 = SEP.exp_factor_18b(c1)
        return SEP.SeparatedSolution(F1, F2, dict(c_), "cartesian")

    def region_xyt(p, n, seed):
        return _annulus_points(n, seed, t_range=(0.1, 1.0))

    def region_sim(p, n, seed):
        rng = np.random.default_rng(seed)
        return [(rng.uniform(-2.0, 2.0), rng.uniform(0.1, 1.0)) for _ in range(n)]

    return CaseReduction(
        "1.8b",
        "C(x) + c*y^2 + b*y",
        ("c", "b"),
        ("beta1", "beta2"),
        polar=False,
        has_closed_form=True,
        _map=make_map,
        _symmetry=make_sym,
        _reduced=reduced,
        _closed=closed,
        _region_xyt=region_xyt,
        _region_sim=region_sim,
        _opaque_default=_C_LINE,
    )


_CASES = None


def catalog():
    """The eleven-case reduction catalog, keyed by case id."""
    global _CASES
    if _CASES is None:
        cases = [
            _case_11a(),
            _case_11b(),
            _case_12a(),
            _case_12b(),
            _case_13(),
            _case_14a(),
            _case_14b(),
            _case_15a(),
            _case_16(),
            _case_18a(),
            _case_18b(),
        ]
        _CASES = {c.case_id: c for c in cases}
    return _CASES
