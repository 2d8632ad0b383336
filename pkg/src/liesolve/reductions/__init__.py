"""Similarity-reduction catalog and its operations."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .. import hyperdual as hd
from ..errors import SamplingError
from ..fields import ScalarField, random_smooth_field
from .catalog import CaseReduction, catalog
from .separated import SeparatedSolution


def get_case(case_id) -> CaseReduction:
    try:
        return catalog()[str(case_id)]
    except KeyError:
        raise KeyError(f"unknown catalog case {case_id!r}; known: {sorted(catalog())}")


def similarity_map(case, params, point):
    """(xi, eta, P_prefactor) at (x, y, t); raises SingularPoint off-domain."""
    case = case if isinstance(case, CaseReduction) else get_case(case)
    smap = case.similarity(params)
    x, y, t = point
    smap.check(x, y, t)
    xi, eta = smap.to_sim(x, y, t)
    pref = hd.exp(smap.prefactor_log(x, y, t))
    return hd.value(xi), hd.value(eta), hd.value(pref)


def reconstruct_u(case, params, P) -> ScalarField:
    """u(x, y, t) = P(xi, eta) / prefactor, as a dual-capable field."""
    case = case if isinstance(case, CaseReduction) else get_case(case)
    smap = case.similarity(params)
    Pfn = P.P if isinstance(P, SeparatedSolution) else P

    def fn(x, y, t):
        xi, eta = smap.to_sim(x, y, t)
        return Pfn(xi, eta) * hd.exp(-smap.prefactor_log(x, y, t))

    return ScalarField(fn, nargs=3, name=f"u[{case.case_id}]")


def reduced_residual(case, params, P, points=None) -> float:
    """Max abs of the catalog reduced operator over the similarity sampling set."""
    case = case if isinstance(case, CaseReduction) else get_case(case)
    op = case.reduced_operator(params)
    Pfn = P.P if isinstance(P, SeparatedSolution) else P
    pts = points if points is not None else case.region_sim(params)
    worst = 0.0
    evaluated = 0
    for (xi, eta) in pts:
        try:
            r = op(Pfn, xi, eta)
        except Exception:
            continue
        v = hd.value(r)
        if not math.isfinite(v):
            continue
        worst = max(worst, abs(v))
        evaluated += 1
    if evaluated < max(4, len(pts) // 4):
        raise SamplingError(
            f"reduced operator evaluable at only {evaluated} of {len(pts)} points"
        )
    return worst


def closed_form_solution(case, params, constants=None) -> SeparatedSolution:
    case = case if isinstance(case, CaseReduction) else get_case(case)
    constants = dict(constants or {})
    constants.setdefault("c1", 1.0)
    constants.setdefault("C1", 1.0)
    constants.setdefault("C3", 1.0)
    return case.closed_form(params, constants)


@dataclass
class ConsistencyReport:
    case_id: str
    trials: int
    max_rel_deviation: float
    consistent: bool
    per_trial: list = field(default_factory=list)


def verify_reduction_consistency(
    case, params, trials=3, seed=0, tol=1e-6, n_points=12
) -> ConsistencyReport:
    """Jacobian-ratio test of the similarity reduction.

    Draws random smooth fields P, reconstructs u, and compares the full
    evolution operator applied to u against the catalog Jacobian times the
    reduced operator applied to P at the mapped points.  Agreement within
    ``tol`` relative at every point certifies the (map, prefactor, operator)
    triple as a unit.
    """
    case = case if isinstance(case, CaseReduction) else get_case(case)
    smap = case.similarity(params)
    op = case.reduced_operator(params)
    M = case.potential_field(params)
    worst = 0.0
    per_trial = []
    for k in range(trials):
        rng = np.random.default_rng(seed + 1000 * k + 7)
        Pf = random_smooth_field(rng, nargs=2, name=f"P{k}")
        u = reconstruct_u(case, params, Pf.fn)
        pts = case.region_xyt(params, n=n_points, seed=seed + k)
        trial_worst = 0.0
        used = 0
        for (x, y, t) in pts:
            if smap.singular(x, y, t):
                continue
            lhs = (
                u.dt(x, y, t)
                - 0.5 * (u.dxx(x, y, t) + u.dyy(x, y, t))
                + M.fn(x, y) * u(x, y, t)
            )
            xi, eta = smap.to_sim(x, y, t)
            try:
                rhs = hd.value(smap.jacobian(x, y, t)) * hd.value(
                    op(Pf.fn, hd.value(xi), hd.value(eta))
                )
            except Exception:
                continue
            scale = max(abs(lhs), abs(rhs), 1e-8)
            trial_worst = max(trial_worst, abs(lhs - rhs) / scale)
            used += 1
        if used < max(3, n_points // 3):
            raise SamplingError(f"case {case.case_id}: only {used} usable sample points")
        per_trial.append(trial_worst)
        worst = max(worst, trial_worst)
    return ConsistencyReport(case.case_id, trials, worst, worst <= tol, per_trial)


__all__ = [
    "CaseReduction",
    "ConsistencyReport",
    "SeparatedSolution",
    "catalog",
    "closed_form_solution",
    "get_case",
    "reconstruct_u",
    "reduced_residual",
    "similarity_map",
    "verify_reduction_consistency",
]
