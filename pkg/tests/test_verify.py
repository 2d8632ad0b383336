"""Verification-oracle tests: residual sampler, FD evolution, Monte Carlo,
oracle comparison."""

import math
import warnings

import numpy as np
import pytest

from liesolve import fields, verify
from liesolve.errors import BoundaryContamination, DomainMismatch, UnstableConfig
from liesolve.fields import ScalarField, heat_kernel
from liesolve.transform import CEVVol
from liesolve.verify import Grid, Region, SdeConfig, compare, fd_evolve, fp_residual, mc_simulate

REGION_2D = Region(((-1.5, 1.5), (-1.5, 1.5), (0.5, 2.0)))


def test_fp_residual_heat_kernel():
    u = heat_kernel()
    M = ScalarField(lambda x, y: 0.0, nargs=2)
    rep = fp_residual(u, M, REGION_2D, threshold=1e-6)
    assert rep.passed
    assert rep.max_abs <= 1e-6


def test_fp_residual_constant_solution():
    u = ScalarField(lambda x, y, t: 1.0, nargs=3)
    M = ScalarField(lambda x, y: 0.0, nargs=2)
    rep = fp_residual(u, M, REGION_2D, threshold=1e-12)
    assert rep.max_abs <= 1e-12


def test_fp_residual_negative_control():
    u = heat_kernel()
    M = ScalarField(lambda x, y: 1.0, nargs=2)
    rep = fp_residual(u, M, REGION_2D, threshold=1e-6)
    assert rep.verdict == "fail"
    assert rep.max_abs > 1e-4  # residual = |u| > 0 on the sampling region


def _heat_kernel_derivative(x, y, t, nx, ny):
    """Exact mixed spatial derivative of the heat kernel via probabilists'
    Hermite polynomials: d^n/dx^n e^{-x^2/2t} = (-1/sqrt(t))^n He_n(x/sqrt(t)) e^{...}."""
    from numpy.polynomial.hermite_e import hermeval

    st = math.sqrt(t)

    def he(n, z):
        c = np.zeros(n + 1)
        c[n] = 1.0
        return hermeval(z, c)

    base = math.exp(-(x * x + y * y) / (2 * t)) / (2 * math.pi * t)
    return base * (-1.0 / st) ** (nx + ny) * he(nx, x / st) * he(ny, y / st)


def _heat_kernel_t5(x, y, t):
    """d^5/dt^5 of the heat kernel = (Lap/2)^5 applied to it."""
    total = 0.0
    for k in range(6):
        total += math.comb(5, k) * _heat_kernel_derivative(x, y, t, 2 * k, 10 - 2 * k)
    return total / 32.0


def test_fp_residual_truncation_error_model():
    """Self-calibration: the reported max_abs must sit within a factor of 10
    of the analytic truncation model for the five-point stencils."""
    u = heat_kernel()
    M = ScalarField(lambda x, y: 0.0, nargs=2)
    rep = fp_residual(u, M, REGION_2D, threshold=1.0, n=60)
    # five-point stencils: first-derivative truncation h^4 |f^(5)|/30,
    # second-derivative truncation h^4 |f^(6)|/90
    pts = REGION_2D.points(60)
    eps = 2.220446049250313e-16
    model = 0.0
    for (x, y, t) in pts:
        h_t = verify.RESID_H * max(1.0, t)
        h_x = verify.RESID_H * max(1.0, abs(x))
        h_y = verify.RESID_H * max(1.0, abs(y))
        d5t = abs(_heat_kernel_t5(x, y, t))
        d6x = abs(_heat_kernel_derivative(x, y, t, 6, 0))
        d6y = abs(_heat_kernel_derivative(x, y, t, 0, 6))
        trunc = h_t**4 * d5t / 30 + 0.5 * (h_x**4 * d6x + h_y**4 * d6y) / 90
        # at h = 1e-3 the stencils sit near the truncation/roundoff
        # crossover for O(0.1) fields, so the model carries both terms:
        # |first-deriv roundoff| <= 1.5 eps |u| / h, |second| <= 5.4 eps |u|/h^2
        amp = abs(u.fn(x, y, t))
        round_ = eps * amp * (1.5 / h_t + 0.5 * 5.4 * (1.0 / h_x**2 + 1.0 / h_y**2))
        model = max(model, trunc + round_)
    assert rep.max_abs <= 10 * model
    assert rep.max_abs >= model / 10


# ---------------------------------------------------------------------------
# finite-difference evolution
# ---------------------------------------------------------------------------


def gaussian_2d(s):
    def fn(x, y):
        return math.exp(-(x * x + y * y) / (2.0 * s)) / (2.0 * math.pi * s)

    return fn


@pytest.mark.filterwarnings("ignore::liesolve.errors.BoundaryContamination")
def test_fd_evolve_1d_heat():
    s0, tau = 0.5, 0.5
    grid = Grid(((-8.0, 8.0, 257),), dt=1e-3)
    u0 = lambda x: math.exp(-x * x / (2 * s0)) / math.sqrt(2 * math.pi * s0)
    out = fd_evolve(lambda x: 0.0, u0, grid, tau)
    xs = out.axis(0)
    s1 = s0 + tau
    ref = np.exp(-xs**2 / (2 * s1)) / math.sqrt(2 * math.pi * s1)
    assert float(np.max(np.abs(out.values - ref))) <= 1e-3


def test_fd_evolve_zero_initial():
    grid = Grid(((-4.0, 4.0, 33),), dt=1e-2)
    out = fd_evolve(lambda x: 0.0, lambda x: 0.0, grid, 0.1)
    assert np.all(out.values == 0.0)


@pytest.mark.slow
@pytest.mark.filterwarnings("ignore::liesolve.errors.BoundaryContamination")
def test_fd_evolve_2d_heat_spec_settings():
    # 256^2 grid on [-8, 8]^2, dt = 1e-3, tau = 0.5: L-inf error <= 1e-3
    s0, tau = 0.5, 0.5
    grid = Grid(((-8.0, 8.0, 256), (-8.0, 8.0, 256)), dt=1e-3)
    out = fd_evolve(lambda x, y: 0.0, gaussian_2d(s0), grid, tau)
    X, Y = out.meshgrid()
    s1 = s0 + tau
    ref = np.exp(-(X**2 + Y**2) / (2 * s1)) / (2 * math.pi * s1)
    err = float(np.max(np.abs(out.values - ref)))
    assert err <= 1e-3


@pytest.mark.filterwarnings("ignore::liesolve.errors.BoundaryContamination")
def test_fd_evolve_2d_convergence_order():
    # halving h and dt should quarter the error: observed order in [1.7, 2.3]
    s0, tau = 0.5, 0.25
    errs = []
    M = lambda x, y: 0.5 + 0.1 * math.tanh(x) * math.tanh(y)
    fine = Grid(((-7.0, 7.0, 193), (-7.0, 7.0, 193)), dt=6.25e-4)
    ref = fd_evolve(M, gaussian_2d(s0), fine, tau)
    for (n, dt) in ((49, 5e-3), (97, 2.5e-3)):
        grid = Grid(((-7.0, 7.0, n), (-7.0, 7.0, n)), dt=dt)
        out = fd_evolve(M, gaussian_2d(s0), grid, tau)
        # compare on the coarse nodes (every grid nests in the fine one)
        step = (193 - 1) // (n - 1)
        ref_on_coarse = ref.values[::step, ::step]
        errs.append(float(np.max(np.abs(out.values - ref_on_coarse))))
    order = math.log2(errs[0] / errs[1])
    assert 1.7 <= order <= 2.3, (errs, order)


def test_fd_evolve_mass_conservation():
    grid = Grid(((-8.0, 8.0, 161), (-8.0, 8.0, 161)), dt=2e-3)
    out = fd_evolve(lambda x, y: 0.0, gaussian_2d(0.4), grid, 0.5)
    hx, hy = grid.spacing(0), grid.spacing(1)
    mass = float(np.sum(out.values)) * hx * hy
    assert mass == pytest.approx(1.0, abs=1e-4)


def test_fd_evolve_growth_guard():
    grid = Grid(((-4.0, 4.0, 33), (-4.0, 4.0, 33)), dt=0.5)
    with pytest.raises(UnstableConfig):
        fd_evolve(lambda x, y: 100.0, gaussian_2d(0.5), grid, 1.0)


def test_fd_evolve_contamination_warning():
    grid = Grid(((-2.0, 2.0, 65),), dt=1e-2)
    u0 = lambda x: math.exp(-x * x)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        fd_evolve(lambda x: 0.0, u0, grid, 1.0)
    assert any(issubclass(w.category, BoundaryContamination) for w in caught)


# ---------------------------------------------------------------------------
# Monte Carlo
# ---------------------------------------------------------------------------


def test_mc_gbm_martingale_mean():
    cfg = SdeConfig(
        vol1=CEVVol(0.2, 1.0), rho=0.0, use_risk_neutral=True, rate=0.05,
        s0_1=1.0, paths=1_000_000, steps=64, seed=42,
    )
    out = mc_simulate(cfg, T=1.0)
    mean = float(np.mean(out.s1))
    se = float(np.std(out.s1) / math.sqrt(len(out.s1)))
    target = math.exp(0.05)
    assert abs(mean - target) <= 3 * se
    assert target == pytest.approx(1.0512710963760241, rel=1e-12)


def test_mc_zero_vol_deterministic():
    from liesolve.transform import TabulatedVol

    cfg = SdeConfig(
        vol1=TabulatedVol(lambda s: 0.0, lambda s: 0.0), use_risk_neutral=True,
        rate=0.04, s0_1=2.0, paths=100, steps=32, seed=1,
    )
    out = mc_simulate(cfg, T=1.0)
    # Euler compounding of the drift: S0 (1 + r dt)^n, all paths identical
    expected = 2.0 * (1 + 0.04 / 32) ** 32
    assert np.all(out.s1 == out.s1[0])
    assert out.s1[0] == pytest.approx(expected, rel=1e-14)


def test_mc_zero_correlation():
    cfg = SdeConfig(
        vol1=CEVVol(0.2, 1.0), vol2=CEVVol(0.3, 1.0), rho=0.0,
        use_risk_neutral=True, rate=0.0, paths=200_000, steps=16, seed=3,
    )
    out = mc_simulate(cfg, T=1.0)
    r1 = np.log(out.s1)
    r2 = np.log(out.s2)
    corr = float(np.corrcoef(r1, r2)[0, 1])
    assert abs(corr) <= 3.0 / math.sqrt(len(out.s1))


def test_mc_bit_reproducible():
    cfg = SdeConfig(vol1=CEVVol(0.4, 0.7), rate=0.02, s0_1=1.0, paths=5000, steps=16, seed=11)
    a = mc_simulate(cfg, T=0.5)
    b = mc_simulate(cfg, T=0.5)
    assert np.array_equal(a.s1, b.s1)


def test_mc_correlated_pair_reproduces_rho():
    cfg = SdeConfig(
        vol1=CEVVol(0.2, 1.0), vol2=CEVVol(0.2, 1.0), rho=0.6,
        rate=0.0, paths=200_000, steps=16, seed=9,
    )
    out = mc_simulate(cfg, T=1.0)
    corr = float(np.corrcoef(np.log(out.s1), np.log(out.s2))[0, 1])
    assert corr == pytest.approx(0.6, abs=0.01)


# ---------------------------------------------------------------------------
# comparisons
# ---------------------------------------------------------------------------


@pytest.mark.filterwarnings("ignore::liesolve.errors.BoundaryContamination")
def test_compare_grid_self():
    grid = Grid(((-8.0, 8.0, 129),), dt=1e-2)
    out = fd_evolve(lambda x: 0.0, lambda x: math.exp(-x * x), grid, 0.2)
    f = lambda x, tau: np.interp(x, out.axis(0), out.values)
    rep = compare(f, out, metric="Linf_rel", threshold=1e-12)
    assert rep.passed


@pytest.mark.filterwarnings("ignore::liesolve.errors.BoundaryContamination")
def test_compare_heat_kernel_vs_fd():
    s0, tau = 0.5, 0.5
    grid = Grid(((-8.0, 8.0, 257),), dt=1e-3)
    u0 = lambda x: math.exp(-x * x / (2 * s0)) / math.sqrt(2 * math.pi * s0)
    out = fd_evolve(lambda x: 0.0, u0, grid, tau)

    def exact(x, tau_):
        s1 = s0 + tau_
        return math.exp(-x * x / (2 * s1)) / math.sqrt(2 * math.pi * s1)

    rep = compare(exact, out, metric="Linf_rel", threshold=1e-3, boundary_margin=1.0)
    assert rep.passed


def test_compare_domain_mismatch():
    with pytest.raises(DomainMismatch):
        compare(lambda x, t: 0.0, object(), metric="Linf_rel")
    with pytest.raises(DomainMismatch):
        compare(lambda x, t: 0.0, object(), metric="cdf_sup")


# ---------------------------------------------------------------------------
# exports and path-explosion handling
# ---------------------------------------------------------------------------


def test_grid_csv_export(tmp_path):
    grid = Grid(((-1.0, 1.0, 17),), dt=1e-2)
    out = fd_evolve(lambda x: 0.0, lambda x: math.exp(-x * x), grid, 0.05)
    path = tmp_path / "grid.csv"
    out.to_csv(path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "x,value"
    assert len(lines) == 18


def test_grid_csv_export_2d(tmp_path):
    grid = Grid(((-1.0, 1.0, 17), (-1.0, 1.0, 17)), dt=1e-2)
    out = fd_evolve(lambda x, y: 0.0, lambda x, y: math.exp(-x * x - y * y), grid, 0.02)
    path = tmp_path / "grid2.csv"
    out.to_csv(path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "x,y,value"
    assert len(lines) == 1 + 17 * 17


def test_sample_set_csv_export(tmp_path):
    cfg = SdeConfig(vol1=CEVVol(0.2, 1.0), rate=0.01, paths=50, steps=4, seed=2)
    out = mc_simulate(cfg, T=0.5)
    path = tmp_path / "samples.csv"
    out.to_csv(path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "path_id,S1"
    assert len(lines) == 51


def test_mc_path_explosion_flagging():
    from liesolve.errors import PathExplosion

    # a super-linear diffusion with a tiny cap: most paths must be flagged
    cfg = SdeConfig(
        vol1=CEVVol(3.0, 2.0), rate=0.0, s0_1=1.0, paths=2000, steps=64, seed=5,
        explosion_cap_mult=5.0, max_excluded_frac=0.0005,
    )
    with pytest.raises(PathExplosion):
        mc_simulate(cfg, T=1.0)
    # a permissive exclusion budget reports the count instead
    cfg2 = SdeConfig(
        vol1=CEVVol(3.0, 2.0), rate=0.0, s0_1=1.0, paths=2000, steps=64, seed=5,
        explosion_cap_mult=5.0, max_excluded_frac=1.0,
    )
    out = mc_simulate(cfg2, T=1.0)
    assert out.n_excluded > 0
    assert len(out.s1) == 2000 - out.n_excluded


def test_compare_cdf_sup_public_api():
    # lognormal terminal law: density grid vs simulated samples
    sigma_t, r, T = 0.3, 0.02, 1.0
    cfg = SdeConfig(
        vol1=CEVVol(sigma_t, 1.0), use_risk_neutral=True, rate=r,
        s0_1=1.0, paths=200_000, steps=128, seed=21,
    )
    mc = mc_simulate(cfg, T=T)
    n = 800
    grid = Grid(((1e-4, 6.0, n),), dt=1.0)
    xs = grid.axis(0)
    mu = (r - 0.5 * sigma_t**2) * T
    dens = np.exp(-((np.log(xs) - mu) ** 2) / (2 * sigma_t**2 * T)) / (
        xs * sigma_t * math.sqrt(2 * math.pi * T)
    )
    grid.values = dens
    rep = compare(grid, mc, metric="cdf_sup", threshold=2e-2)
    assert rep.passed, rep.max_abs
    # Euler discretization + sampling noise, but nowhere near the bound
    assert rep.max_abs < 1e-2


def test_compare_linf_2d():
    s0, tau = 0.5, 0.2
    grid = Grid(((-6.0, 6.0, 65), (-6.0, 6.0, 65)), dt=2e-3)
    u0 = lambda x, y: math.exp(-(x * x + y * y) / (2 * s0)) / (2 * math.pi * s0)
    out = fd_evolve(lambda x, y: 0.0, u0, grid, tau)

    def exact(x, y, tau_):
        s1 = s0 + tau_
        return math.exp(-(x * x + y * y) / (2 * s1)) / (2 * math.pi * s1)

    rep = compare(exact, out, metric="Linf_rel", threshold=5e-3, boundary_margin=1.0)
    assert rep.passed
