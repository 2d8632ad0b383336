"""Independent numerical oracles.

Nothing in this module trusts the analytic machinery it checks: residuals
use plain five-point finite differences on field *values*, the evolution
scheme is a standard Crank-Nicolson / corrected-Douglas pair, and the Monte
Carlo engine discretizes the price processes directly.

* :func:`fp_residual` - pointwise residual of u_tau - (1/2) Lap u + M u.
* :func:`bs_residual` - pointwise residual of the asset-space pricing
  operator (the same oracle in original coordinates).
* :func:`fd_evolve` - Crank-Nicolson (one space dimension) or Douglas ADI
  with an explicit-then-corrected reaction term (two dimensions).
* :func:`mc_simulate` - Euler-Maruyama with correlated draws from a
  counter-based generator, reproducible per seed.
* :func:`compare` - L-infinity / sup-CDF comparison of two oracles.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from . import numdiff
from .errors import (
    BoundaryContamination,
    DomainMismatch,
    PathExplosion,
    SamplingError,
    UnstableConfig,
)
from .fields import halton

RESID_H = 1e-3  # five-point stencil base step, h = RESID_H * max(1, |coord|)


@dataclass
class ResidualReport:
    max_abs: float
    rms: float
    n_points: int
    h_used: float
    singular_points_skipped: int
    verdict: str  # pass | fail | inconclusive
    threshold: float = float("nan")
    notes: tuple = ()

    @property
    def passed(self):
        return self.verdict == "pass"


def _verdict(max_abs, threshold, n_points, n_skipped):
    if n_points == 0 or n_points < n_skipped:
        return "inconclusive"
    return "pass" if max_abs <= threshold else "fail"


@dataclass(frozen=True)
class Region:
    """Axis-aligned sampling box with an optional singular-locus guard."""

    bounds: tuple  # ((lo, hi), ...) per argument
    guard: object = None  # callable(*point) -> True when the point is bad

    def points(self, n, skip=40):
        dim = len(self.bounds)
        qr = halton(3 * n, dim, skip=skip)
        out = []
        for row in qr:
            p = tuple(lo + (hi - lo) * v for (lo, hi), v in zip(self.bounds, row))
            if self.guard is not None and self.guard(*p):
                continue
            out.append(p)
            if len(out) == n:
                break
        return out


def fp_residual(u, M, region: Region, threshold, h0=RESID_H, n=40) -> ResidualReport:
    """Five-point-FD residual of the potential-form evolution operator.

    ``u`` is a field on (x, y, tau) or (x, tau); ``M`` a field on the spatial
    arguments.  Derivatives are always finite differences here: this is the
    independent route, deliberately blind to any analytic derivative the
    fields may carry.
    """
    pts = region.points(n)
    one_dim = len(region.bounds) == 2
    ufn = u.fn if hasattr(u, "fn") else u
    Mfn = M.fn if hasattr(M, "fn") else M
    vals = []
    skipped = 0
    for p in pts:
        try:
            if one_dim:
                x, tau = p
                ut = numdiff.partial1(ufn, (x, tau), 1, h0)
                uxx = numdiff.partial2(ufn, (x, tau), 0, h0)
                r = ut - 0.5 * uxx + Mfn(x) * ufn(x, tau)
            else:
                x, y, tau = p
                ut = numdiff.partial1(ufn, (x, y, tau), 2, h0)
                uxx = numdiff.partial2(ufn, (x, y, tau), 0, h0)
                uyy = numdiff.partial2(ufn, (x, y, tau), 1, h0)
                r = ut - 0.5 * (uxx + uyy) + Mfn(x, y) * ufn(x, y, tau)
        except Exception:
            skipped += 1
            continue
        if not math.isfinite(r):
            skipped += 1
            continue
        vals.append(r)
    if not vals:
        raise SamplingError("no usable sampling points for the residual")
    arr = np.asarray(vals)
    max_abs = float(np.max(np.abs(arr)))
    return ResidualReport(
        max_abs,
        float(np.sqrt(np.mean(arr**2))),
        len(vals),
        h0,
        skipped,
        _verdict(max_abs, threshold, len(vals), skipped),
        threshold,
    )


def bs_residual(model, c, region: Region, threshold, h0=RESID_H, n=30) -> ResidualReport:
    """FD residual of the asset-space pricing operator applied to c."""
    pts = region.points(n)
    r_ = model.rate
    vals = []
    skipped = 0
    cfn = c.fn if hasattr(c, "fn") else c
    for p in pts:
        try:
            if model.one_dim:
                S, t = p
                sv = model.vol1.value(S)
                ct = numdiff.partial1(cfn, (S, t), 1, h0)
                css = numdiff.partial2(cfn, (S, t), 0, h0)
                cs = numdiff.partial1(cfn, (S, t), 0, h0)
                r = ct + 0.5 * sv * sv * css + r_ * S * cs - r_ * cfn(S, t)
            else:
                S1, S2, t = p
                s1v = model.vol1.value(S1)
                s2v = model.vol2.value(S2)
                args = (S1, S2, t)
                ct = numdiff.partial1(cfn, args, 2, h0)
                c11 = numdiff.partial2(cfn, args, 0, h0)
                c22 = numdiff.partial2(cfn, args, 1, h0)
                c12 = numdiff.mixed2(cfn, args, 0, 1, h0)
                c1 = numdiff.partial1(cfn, args, 0, h0)
                c2 = numdiff.partial1(cfn, args, 1, h0)
                r = (
                    ct
                    + 0.5 * s1v**2 * c11
                    + model.rho * s1v * s2v * c12
                    + 0.5 * s2v**2 * c22
                    + r_ * S1 * c1
                    + r_ * S2 * c2
                    - r_ * cfn(*args)
                )
        except Exception:
            skipped += 1
            continue
        if not math.isfinite(r):
            skipped += 1
            continue
        vals.append(r)
    if not vals:
        raise SamplingError("no usable sampling points for the pricing residual")
    arr = np.asarray(vals)
    max_abs = float(np.max(np.abs(arr)))
    return ResidualReport(
        max_abs,
        float(np.sqrt(np.mean(arr**2))),
        len(vals),
        h0,
        skipped,
        _verdict(max_abs, threshold, len(vals), skipped),
        threshold,
    )


# ---------------------------------------------------------------------------
# finite-difference evolution
# ---------------------------------------------------------------------------


@dataclass
class Grid:
    extents: tuple  # ((min, max, n), ...) one or two spatial axes
    dt: float
    values: np.ndarray | None = None
    tau: float = 0.0

    def __post_init__(self):
        for (lo, hi, n) in self.extents:
            if n < 16:
                raise UnstableConfig("grid needs at least 16 points per axis")
            if hi <= lo:
                raise UnstableConfig("grid extents must be increasing")
        if self.dt <= 0:
            raise UnstableConfig("dt must be positive")

    @property
    def dims(self):
        return len(self.extents)

    def axis(self, i):
        lo, hi, n = self.extents[i]
        return np.linspace(lo, hi, n)

    def spacing(self, i):
        lo, hi, n = self.extents[i]
        return (hi - lo) / (n - 1)

    def meshgrid(self):
        axes = [self.axis(i) for i in range(self.dims)]
        if self.dims == 1:
            return (axes[0],)
        return np.meshgrid(axes[0], axes[1], indexing="ij")

    def to_csv(self, path):
        import csv

        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            if self.dims == 1:
                w.writerow(["x", "value"])
                for x, v in zip(self.axis(0), self.values):
                    w.writerow([repr(float(x)), repr(float(v))])
            else:
                w.writerow(["x", "y", "value"])
                xs, ys = self.axis(0), self.axis(1)
                for i, x in enumerate(xs):
                    for j, y in enumerate(ys):
                        w.writerow([repr(float(x)), repr(float(y)), repr(float(self.values[i, j]))])


def _banded_factors(n, h, dt, theta):
    """Banded representation of I - theta dt (1/2) D2 with Dirichlet rows."""
    coef = theta * dt * 0.5 / (h * h)
    ab = np.zeros((3, n))
    ab[0, 1:] = -coef
    ab[1, :] = 1.0 + 2.0 * coef
    ab[2, :-1] = -coef
    # boundary rows: identity
    ab[1, 0] = 1.0
    ab[0, 1] = 0.0
    ab[1, -1] = 1.0
    ab[2, -2] = 0.0
    return ab


def _apply_half_lap(v, h, axis=0):
    """(1/2) second difference with zero second derivative outside (Dirichlet
    values handled by keeping boundary rows frozen)."""
    out = np.zeros_like(v)
    if v.ndim == 1:
        out[1:-1] = 0.5 * (v[2:] - 2.0 * v[1:-1] + v[:-2]) / (h * h)
    elif axis == 0:
        out[1:-1, :] = 0.5 * (v[2:, :] - 2.0 * v[1:-1, :] + v[:-2, :]) / (h * h)
    else:
        out[:, 1:-1] = 0.5 * (v[:, 2:] - 2.0 * v[:, 1:-1] + v[:, :-2]) / (h * h)
    return out


def _check_contamination(u0_vals, grid, tau_total):
    """Warn when the diffusion cone from the initial support reaches the
    boundary: spread ~ 4 sqrt(tau) for unit-half diffusivity."""
    spread = 4.0 * math.sqrt(max(tau_total, 0.0))
    mx = float(np.max(np.abs(u0_vals)))
    if mx == 0.0:
        return
    mask = np.abs(u0_vals) > 1e-12 * mx
    if grid.dims == 1:
        xs = grid.axis(0)
        lo, hi = xs[mask].min(), xs[mask].max()
        margin = min(lo - xs[0], xs[-1] - hi)
    else:
        X, Y = grid.meshgrid()
        xs, ys = grid.axis(0), grid.axis(1)
        margin = min(
            X[mask].min() - xs[0],
            xs[-1] - X[mask].max(),
            Y[mask].min() - ys[0],
            ys[-1] - Y[mask].max(),
        )
    if margin < spread:
        warnings.warn(
            f"boundary influence likely reaches the comparison region "
            f"(margin {margin:.2f} < spread {spread:.2f})",
            BoundaryContamination,
        )


def fd_evolve(M, u0, grid: Grid, tau_end, bc="absorbing", bc_value=0.0) -> Grid:
    """Evolve u_tau = (1/2) Lap u - M u from tau=0 to tau_end.

    One dimension: Crank-Nicolson with the reaction folded into the theta
    scheme.  Two dimensions: Douglas splitting with the reaction term taken
    explicitly and corrected by a second trapezoidal pass, second order in
    dt and h.  Deterministic for fixed inputs.
    """
    steps = int(round(tau_end / grid.dt))
    if abs(steps * grid.dt - tau_end) > 1e-9 * max(1.0, tau_end):
        raise UnstableConfig("tau_end must be an integer number of time steps")
    Mfn = M.fn if hasattr(M, "fn") else M
    u0fn = u0.fn if hasattr(u0, "fn") else u0

    if grid.dims == 1:
        xs = grid.axis(0)
        h = grid.spacing(0)
        u = np.array([u0fn(x) for x in xs], dtype=float)
        mvals = np.array([Mfn(x) for x in xs], dtype=float)
        if grid.dt * float(np.max(np.abs(mvals))) > 2.0:
            raise UnstableConfig("dt too large for the reaction term (growth check)")
        _check_contamination(u, grid, tau_end)
        bval = 0.0 if bc == "absorbing" else float(bc_value)
        dt = grid.dt
        coef = 0.5 * dt * 0.5 / (h * h)
        n = len(xs)
        ab = np.zeros((3, n))
        ab[0, 1:] = -coef
        ab[1, :] = 1.0 + 2.0 * coef + 0.5 * dt * mvals
        ab[2, :-1] = -coef
        ab[1, 0] = ab[1, -1] = 1.0
        ab[0, 1] = 0.0
        ab[2, -2] = 0.0
        u[0] = u[-1] = bval
        for _ in range(steps):
            # explicit half plus implicit half (theta = 1/2)
            rhs = u + 0.5 * dt * (_apply_half_lap(u, h) - mvals * u)
            rhs[0] = rhs[-1] = bval
            u = solve_banded((1, 1), ab, rhs)
        return Grid(grid.extents, grid.dt, u, tau=steps * grid.dt)

    # two dimensions: Douglas + trapezoidal correction
    xs, ys = grid.axis(0), grid.axis(1)
    hx, hy = grid.spacing(0), grid.spacing(1)
    X, Y = grid.meshgrid()
    u = np.vectorize(u0fn)(X, Y).astype(float)
    mvals = np.vectorize(Mfn)(X, Y).astype(float)
    dt = grid.dt
    if dt * float(np.max(np.abs(mvals))) > 1.0:
        raise UnstableConfig("dt too large for the explicit reaction term")
    _check_contamination(u, grid, tau_end)
    bval = 0.0 if bc == "absorbing" else float(bc_value)
    u[0, :] = u[-1, :] = bval
    u[:, 0] = u[:, -1] = bval

    abx = _banded_factors(len(xs), hx, dt, 0.5)
    aby = _banded_factors(len(ys), hy, dt, 0.5)

    def F(v):
        return _apply_half_lap(v, hx, 0) + _apply_half_lap(v, hy, 1) - mvals * v

    def implicit_x(rhs, v_old):
        b = rhs - 0.5 * dt * _apply_half_lap(v_old, hx, 0)
        b[0, :] = bval
        b[-1, :] = bval
        return solve_banded((1, 1), abx, b)

    def implicit_y(rhs, v_old):
        b = rhs - 0.5 * dt * _apply_half_lap(v_old, hy, 1)
        b[:, 0] = bval
        b[:, -1] = bval
        return solve_banded((1, 1), aby, b.T).T

    for _ in range(steps):
        y0 = u + dt * F(u)
        y1 = implicit_x(y0, u)
        y2 = implicit_y(y1, u)
        y0c = y0 + 0.5 * dt * (F(y2) - F(u))
        y1c = implicit_x(y0c, u)
        u_new = implicit_y(y1c, u)
        u_new[0, :] = u_new[-1, :] = bval
        u_new[:, 0] = u_new[:, -1] = bval
        u = u_new
    return Grid(grid.extents, grid.dt, u, tau=steps * grid.dt)


# ---------------------------------------------------------------------------
# Monte Carlo
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SdeConfig:
    vol1: object
    vol2: object = None
    rho: float = 0.0
    mu1: float = 0.0
    mu2: float = 0.0
    use_risk_neutral: bool = True
    rate: float = 0.0
    s0_1: float = 1.0
    s0_2: float = 1.0
    paths: int = 100_000
    steps: int = 64
    seed: int = 0
    explosion_cap_mult: float = 1e6
    max_excluded_frac: float = 0.01

    def __post_init__(self):
        if self.paths < 1 or self.steps < 1:
            raise UnstableConfig("paths and steps must be at least 1")
        if abs(self.rho) >= 1.0:
            raise UnstableConfig("|rho| < 1 required for the correlation factor")


@dataclass
class SampleSet:
    s1: np.ndarray
    s2: np.ndarray | None
    n_excluded: int
    seed: int

    def to_csv(self, path):
        import csv

        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            if self.s2 is None:
                w.writerow(["path_id", "S1"])
                for i, v in enumerate(self.s1):
                    w.writerow([i, repr(float(v))])
            else:
                w.writerow(["path_id", "S1", "S2"])
                for i, (v1, v2) in enumerate(zip(self.s1, self.s2)):
                    w.writerow([i, repr(float(v1)), repr(float(v2))])


_CHUNK = 1 << 16


def mc_simulate(cfg: SdeConfig, T: float) -> SampleSet:
    """Euler-Maruyama terminal samples.

    Correlated increments come from a Cholesky mix of independent draws; the
    counter-based generator is jumped per path block, so path streams do not
    depend on scheduling.  Paths crossing zero are absorbed (full truncation);
    paths exceeding the explosion cap are flagged and excluded with the count
    reported.
    """
    dt = T / cfg.steps
    sq = math.sqrt(dt)
    mu1 = cfg.rate if cfg.use_risk_neutral else cfg.mu1
    mu2 = cfg.rate if cfg.use_risk_neutral else cfg.mu2
    two = cfg.vol2 is not None
    cap1 = cfg.explosion_cap_mult * cfg.s0_1
    cap2 = cfg.explosion_cap_mult * cfg.s0_2
    rho_c = math.sqrt(1.0 - cfg.rho**2)

    out1 = np.empty(cfg.paths)
    out2 = np.empty(cfg.paths) if two else None
    excluded = np.zeros(cfg.paths, dtype=bool)

    def vol_array(vol, s):
        # vectorized total diffusion coefficient, zero at the absorbing floor
        with np.errstate(invalid="ignore"):
            v = np.where(s > 0.0, _vol_vec(vol, np.maximum(s, 1e-300)), 0.0)
        return v

    base = np.random.Philox(key=cfg.seed)
    n_chunks = (cfg.paths + _CHUNK - 1) // _CHUNK
    for k in range(n_chunks):
        lo = k * _CHUNK
        hi = min(cfg.paths, lo + _CHUNK)
        m = hi - lo
        rng = np.random.Generator(base.jumped(k))
        s1 = np.full(m, cfg.s0_1)
        s2 = np.full(m, cfg.s0_2) if two else None
        dead1 = np.zeros(m, dtype=bool)
        dead2 = np.zeros(m, dtype=bool)
        boom = np.zeros(m, dtype=bool)
        with np.errstate(over="ignore", invalid="ignore"):
            # exploding paths may overflow before the cap flags them; the
            # flag-and-exclude bookkeeping below handles those values
            for _ in range(cfg.steps):
                z1 = rng.standard_normal(m)
                s1 = s1 + mu1 * s1 * dt + vol_array(cfg.vol1, s1) * sq * z1
                dead1 |= s1 <= 0.0
                s1 = np.where(dead1, 0.0, s1)
                boom |= ~np.isfinite(s1) | (s1 > cap1)
                s1 = np.where(boom, cfg.s0_1, s1)
                if two:
                    z2 = cfg.rho * z1 + rho_c * rng.standard_normal(m)
                    s2 = s2 + mu2 * s2 * dt + vol_array(cfg.vol2, s2) * sq * z2
                    dead2 |= s2 <= 0.0
                    s2 = np.where(dead2, 0.0, s2)
                    boom |= ~np.isfinite(s2) | (s2 > cap2)
                    s2 = np.where(boom, cfg.s0_2, s2)
        out1[lo:hi] = s1
        if two:
            out2[lo:hi] = s2
        excluded[lo:hi] = boom

    n_exc = int(np.sum(excluded))
    if n_exc > cfg.max_excluded_frac * cfg.paths:
        raise PathExplosion(
            f"{n_exc} of {cfg.paths} paths exceeded the explosion cap"
        )
    keep = ~excluded
    return SampleSet(out1[keep], out2[keep] if two else None, n_exc, cfg.seed)


def _vol_vec(vol, s):
    """Vectorized sigma(S) for the volatility specs (falls back pointwise)."""
    from .transform import CEVVol, ExponentialVol, RescaledExponentialVol

    if isinstance(vol, CEVVol):
        if vol.alpha == 0.0:
            return np.full_like(s, vol.sigma)
        return vol.sigma * np.power(s, vol.alpha)
    if isinstance(vol, ExponentialVol):
        return np.exp(-s)
    if isinstance(vol, RescaledExponentialVol):
        return vol.sigma0 * vol.s0 * np.exp(vol.alpha * (1.0 - s / vol.s0))
    return np.array([vol.value(v) for v in np.atleast_1d(s)])


# ---------------------------------------------------------------------------
# oracle comparison
# ---------------------------------------------------------------------------


def sup_cdf_distance(samples, model_cdf, atom_at_zero=0.0):
    """Kolmogorov distance between a sample set and a model CDF.

    Tied samples are deduplicated so a point mass (the absorbed-at-zero atom)
    is compared jump-against-jump; the model's only discontinuity is at zero.
    """
    values, counts = np.unique(np.asarray(samples), return_counts=True)
    n = counts.sum()
    cum = np.cumsum(counts)
    sup = 0.0
    for v, hi, c in zip(values, cum, counts):
        emp_hi = hi / n
        emp_lo = (hi - c) / n
        model_hi = model_cdf(v)
        model_lo = 0.0 if v == 0.0 else model_hi
        sup = max(sup, abs(model_hi - emp_hi), abs(model_lo - emp_lo))
    return float(sup)


def compare(closed_form, oracle, metric="Linf_rel", threshold=1e-3,
            boundary_margin=0.0, absorbed_mass=None) -> ResidualReport:
    """Compare a closed form against an independent oracle.

    ``metric="Linf_rel"``: oracle is a :class:`Grid`; relative L-infinity over
    the subregion that excludes ``boundary_margin`` near every edge.

    ``metric="cdf_sup"``: oracle is a :class:`SampleSet`; the closed form is a
    density :class:`Grid` (values >= 0 on a price axis) whose CDF, including
    any mass absorbed at zero, is compared against the empirical CDF.
    """
    if metric == "Linf_rel":
        if not isinstance(oracle, Grid) or oracle.values is None:
            raise DomainMismatch("Linf_rel expects an evolved Grid oracle")
        fn = closed_form.fn if hasattr(closed_form, "fn") else closed_form
        if oracle.dims == 1:
            xs = oracle.axis(0)
            mask = (xs >= xs[0] + boundary_margin) & (xs <= xs[-1] - boundary_margin)
            ref = np.array([fn(x, oracle.tau) for x in xs[mask]])
            got = oracle.values[mask]
        else:
            xs, ys = oracle.axis(0), oracle.axis(1)
            mx = (xs >= xs[0] + boundary_margin) & (xs <= xs[-1] - boundary_margin)
            my = (ys >= ys[0] + boundary_margin) & (ys <= ys[-1] - boundary_margin)
            X, Y = np.meshgrid(xs[mx], ys[my], indexing="ij")
            ref = np.vectorize(lambda a, b: fn(a, b, oracle.tau))(X, Y)
            got = oracle.values[np.ix_(mx, my)]
        scale = max(float(np.max(np.abs(ref))), 1e-300)
        diff = float(np.max(np.abs(got - ref))) / scale
        return ResidualReport(
            diff, diff, int(got.size), float("nan"), 0,
            "pass" if diff <= threshold else "fail", threshold,
        )

    if metric == "cdf_sup":
        if not isinstance(oracle, SampleSet):
            raise DomainMismatch("cdf_sup expects a Monte Carlo SampleSet oracle")
        if not isinstance(closed_form, Grid) or closed_form.values is None:
            raise DomainMismatch("cdf_sup expects a density Grid for the closed form")
        xs = closed_form.axis(0)
        dens = np.maximum(closed_form.values, 0.0)
        cdf_grid = np.concatenate([[0.0], np.cumsum((dens[1:] + dens[:-1]) * 0.5 * np.diff(xs))])
        mass = cdf_grid[-1]
        atom = absorbed_mass if absorbed_mass is not None else max(0.0, 1.0 - mass)
        sup = sup_cdf_distance(
            oracle.s1,
            lambda v: atom + float(np.interp(v, xs, cdf_grid, left=0.0, right=cdf_grid[-1])),
            atom_at_zero=atom,
        )
        return ResidualReport(
            sup, sup, len(oracle.s1), float("nan"), 0,
            "pass" if sup <= threshold else "fail", threshold,
        )

    raise DomainMismatch(f"unknown metric {metric!r}")
