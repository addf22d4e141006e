import math

import numpy as np
import pytest

from wavelife.exponents import ProblemParams
from wavelife.solver import (
    BoundaryContamination,
    InitialData,
    RadialGrid,
    Reason,
    bump,
    energy,
    free_wave_oracle,
    quadrature_weights,
    solve,
    support_check,
    support_leak,
)

CANON = ProblemParams(n=1, p=2, mu1=1, mu2=1, alpha=2, beta=2)


def free_error(n, nr, t_end=2.0, f=True):
    P = ProblemParams(n=n, p=2)
    data = InitialData(f=bump(1.0), support=1.0) if f else InitialData(g=bump(1.0), support=1.0)
    tr = solve(P, data, RadialGrid(4.0, nr), t_end, mode="free", sample_dt=None)
    exact = np.array([free_wave_oracle(data, x, tr.times[-1], n) for x in tr.r])
    return np.max(np.abs(tr.u[-1] - exact))


def test_grid_validation():
    with pytest.raises(ValueError):
        RadialGrid(4.0, 100, cfl=1.0)
    with pytest.raises(ValueError):
        RadialGrid(4.0, 100, cfl=0.0)
    g = RadialGrid.with_spacing(4.0, 0.01)
    assert g.nr == 400 and g.dr == pytest.approx(0.01)
    assert g.r[0] == 0 and g.r[-1] == pytest.approx(4.0)


def test_solve_preconditions():
    data = InitialData.canonical()
    with pytest.raises(ValueError, match="resolve"):
        solve(CANON, data, RadialGrid(4.0, 40), 1.0)
    with pytest.raises(ValueError, match="r_max"):
        solve(CANON, data, RadialGrid(4.0, 400), 3.5)
    with pytest.raises(ValueError, match="mode"):
        solve(CANON, data, RadialGrid(4.0, 400), 1.0, mode="nope")
    with pytest.raises(ValueError):
        solve(CANON.replace(n=4), data, RadialGrid(4.0, 400), 1.0)


def test_initial_data_validation():
    with pytest.raises(ValueError):
        InitialData(g=bump(2.0), support=1.0).sampled(np.linspace(0, 3, 31))
    with pytest.raises(ValueError):
        InitialData(g=lambda r: -bump(1.0)(r), support=1.0).sampled(np.linspace(0, 3, 31))
    d = InitialData(g=lambda r: -bump(1.0)(r), support=1.0, g_nonnegative=False)
    assert d.sampled(np.linspace(0, 3, 31))[1].min() < 0


def test_zero_data_stays_zero():
    tr = solve(CANON, InitialData(), RadialGrid(4.0, 200), 2.0)
    assert not tr.report.blew_up and tr.report.reason is Reason.HORIZON
    assert np.all(tr.u == 0) and np.all(tr.v == 0)
    assert support_check(tr)


def test_quadrature_weights_integrate_polynomials():
    r = np.linspace(0, 2, 2001)
    for n, exact in [(1, 2 * 2.0), (2, math.pi * 4.0), (3, 4 * math.pi / 3 * 8.0)]:
        assert quadrature_weights(r, n).sum() == pytest.approx(exact, rel=1e-5)


def test_free_n1_second_order():
    e = [free_error(1, nr) for nr in (400, 800, 1600)]
    assert e[0] / e[1] >= 3.5 and e[1] / e[2] >= 3.5


def test_free_n3_against_kirchhoff():
    e = [free_error(3, nr, f=False) for nr in (200, 400, 800)]
    assert e[2] < 1e-3
    assert e[0] / e[1] > 3.0 and e[1] / e[2] > 3.0


def test_oracle_zero_data_and_n1_velocity():
    from scipy import integrate

    assert free_wave_oracle(InitialData(), 0.3, 1.0, 1) == 0
    assert free_wave_oracle(InitialData(), 0.3, 1.0, 3) == 0
    data = InitialData(g=bump(1.0), support=1.0)
    for x, t in [(0.2, 0.5), (1.5, 1.0), (0.0, 2.0)]:
        direct = 0.5 * integrate.quad(lambda y: bump(1.0)(np.array([abs(y)]))[0], x - t, x + t)[0]
        assert free_wave_oracle(data, x, t, 1) == pytest.approx(direct, rel=1e-9, abs=1e-14)


def test_oracle_n3_mean_value():
    from scipy import integrate

    data = InitialData(g=bump(1.0), support=1.0)
    g = bump(1.0)
    for x, t in [(0.5, 0.3), (0.4, 1.2), (2.0, 1.5)]:
        # average over the sphere |y - x| = t, parametrized by the polar angle
        mean = 0.5 * integrate.quad(
            lambda c: g(np.array([math.sqrt(max(x * x + t * t + 2 * x * t * c, 0.0))]))[0], -1, 1, limit=200
        )[0]
        assert free_wave_oracle(data, x, t, 3) == pytest.approx(t * mean, rel=1e-8, abs=1e-13)


def test_blowup_monotone_in_eps():
    T = []
    for eps in (1.0, 2.0, 4.0):
        tr = solve(CANON.replace(eps=eps), InitialData.canonical(), RadialGrid.with_spacing(12.0, 0.02), 10.0, sample_dt=None)
        assert tr.report.blew_up
        T.append(tr.report.T_num)
    assert T[0] >= T[1] >= T[2]


def test_threshold_insensitivity():
    grid = RadialGrid.with_spacing(14.0, 0.02)
    P = CANON.replace(eps=0.5)
    t8 = solve(P, InitialData.canonical(), grid, 12.0, threshold=1e8, sample_dt=None).report
    t6 = solve(P, InitialData.canonical(), grid, 12.0, threshold=1e6, sample_dt=None).report
    assert t8.blew_up and t6.blew_up
    assert abs(t8.T_num - t6.T_num) / t8.T_num < 0.02


def test_step_floor_reason():
    # an absurd threshold leaves the step-size floor as the only detector
    tr = solve(CANON.replace(eps=4.0), InitialData.canonical(), RadialGrid.with_spacing(6.0, 0.02), 4.0, threshold=1e300, sample_dt=None)
    assert tr.report.blew_up
    assert tr.report.reason in (Reason.STEP_FLOOR, Reason.AMPLITUDE)
    assert tr.report.T_num <= 4.0


def test_linear_energy_dissipates():
    P = ProblemParams(n=2, p=2, mu1=1.0, mu2=0.0, alpha=2, beta=2)
    data = InitialData(f=bump(1.0), g=bump(1.0, 0.5), support=1.0)
    tr = solve(P, data, RadialGrid(6.0, 600), 4.0, mode="linear", sample_dt=0.25)
    E = np.array([energy(tr, k) for k in range(len(tr.times))])
    assert np.all(np.diff(E) <= 1e-8 * E[0])
    assert E[-1] < E[0]


def test_free_energy_conserved():
    P = ProblemParams(n=3, p=2)
    data = InitialData(f=bump(1.0), support=1.0)
    tr = solve(P, data, RadialGrid(5.0, 800), 3.0, mode="free", sample_dt=0.5)
    E = np.array([energy(tr, k) for k in range(len(tr.times))])
    assert np.max(np.abs(E - E[0])) / E[0] < 1e-3


def test_time_reversibility():
    errs = []
    P = ProblemParams(n=1, p=2)
    data = InitialData(f=bump(1.0), support=1.0)
    for nr in (400, 800):
        grid = RadialGrid(4.0, nr)
        a = solve(P, data, grid, 1.0, mode="free", sample_dt=None)
        b = solve(
            P, data, grid, 2.0, mode="free", sample_dt=None,
            initial_state=(a.u[-1], -a.v[-1]), t_start=1.0,
        )
        errs.append(np.max(np.abs(b.u[-1] - a.u[0])) / (4.0 / nr) ** 2)
    # undamped leapfrog is reversible up to round-off, well inside O(dr^2)
    assert max(errs) < 1.0


def test_support_check_detects_injected_noise():
    P = ProblemParams(n=1, p=2)
    data = InitialData(f=bump(1.0), support=1.0)
    tr = solve(P, data, RadialGrid(4.0, 400), 1.0, mode="free", sample_dt=0.25)
    assert support_check(tr, rel_tol=1e-5)
    tr.u[-1][-10] = 1e-3
    assert not support_check(tr, rel_tol=1e-5)


def test_support_leak_shrinks_under_refinement():
    P = ProblemParams(n=1, p=2)
    data = InitialData(f=bump(1.0), support=1.0)
    leaks = [
        support_leak(solve(P, data, RadialGrid(4.0, nr), 2.0, mode="free", sample_dt=0.5))
        for nr in (200, 400, 800)
    ]
    assert leaks[0] > leaks[1] > leaks[2]
    assert leaks[2] < 1e-6


def test_boundary_contamination_raises():
    P = ProblemParams(n=1, p=2)
    grid = RadialGrid(4.0, 400)
    u0 = np.where(grid.r > 2.0, bump(1.0)(grid.r - 3.0), 0.0)
    with pytest.raises(BoundaryContamination):
        solve(P, InitialData(), grid, 2.0, mode="free", initial_state=(u0, np.zeros_like(u0)), t_start=1.0)


def test_solve_is_deterministic():
    P = CANON.replace(eps=1.0)
    grid = RadialGrid.with_spacing(10.0, 0.02)
    a = solve(P, InitialData.canonical(), grid, 8.0, sample_dt=0.5)
    b = solve(P, InitialData.canonical(), grid, 8.0, sample_dt=0.5)
    assert a.report == b.report
    assert np.array_equal(a.u, b.u) and np.array_equal(a.times, b.times)


def test_manufactured_source():
    # u = a(t) chi(r) with a = 1 + t^2 solves the forced free equation exactly
    chi = bump(1.0)
    n = 2
    P = ProblemParams(n=n, p=2)

    def lap_chi(r):
        s = np.clip(r, 0, 1)
        # chi = (1 - s^2)^6: chi' = -12 s (1-s^2)^5, chi'' = -12(1-s^2)^5 + 120 s^2 (1-s^2)^4
        w = 1 - s**2
        d1 = -12 * s * w**5
        d2 = -12 * w**5 + 120 * s**2 * w**4
        safe = np.where(s == 0, 1.0, s)
        val = d2 + np.where(s == 0, d2, (n - 1) * d1 / safe)
        return np.where(r < 1, val, 0.0)

    src = lambda r, t: 2 * chi(r) - (1 + t**2) * lap_chi(r)
    errs = []
    for nr in (200, 400):
        grid = RadialGrid(4.0, nr)
        tr = solve(P, InitialData(f=chi, support=1.0), grid, 1.0, mode="free", source=src, sample_dt=None)
        errs.append(np.max(np.abs(tr.u[-1] - 2.0 * chi(tr.r))))
    assert errs[1] < errs[0] / 3.5


def test_support_check_spec_tolerance_near_unit_courant():
    # the explicit precursor decays geometrically per cell; it is at round-off only for cfl -> 1
    P = ProblemParams(n=1, p=2)
    data = InitialData(f=bump(1.0), support=1.0)
    tr = solve(P, data, RadialGrid(4.0, 400, cfl=0.99), 2.0, mode="free", sample_dt=0.25)
    assert support_check(tr)
    assert support_leak(tr) < 1e-12
