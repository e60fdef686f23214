"""Radial engine: series start, integration, node counts, zero-energy powers."""

import math

import numpy as np
import pytest

from levscat import (Channel, count_negative_eigenvalues, frobenius_start,
                     integrate_channel, zero_energy_coefficients)
from levscat.errors import IllConditioned, StiffnessFailure
from levscat.radial import _power_match, frobenius_series, integrate_prufer
from conftest import GSTAR_HALF, fd_negative_count, well_spec

CH_HALF = Channel(lambda_nu=0.0, nu=0.5, mult=1)


def free_spec(n=3):
    from levscat import AngularPotential, PotentialSpec
    return PotentialSpec(n=n, q=AngularPotential("constant", 0.0), w=(), g=0.0,
                         r_cut=1.0)


def test_frobenius_free_euler():
    u0, u0p = frobenius_start(CH_HALF, free_spec(), 0.0, 1e-3)
    assert u0 == pytest.approx(1e-3, rel=1e-14)
    assert u0p == pytest.approx(1.0, rel=1e-14)


def test_frobenius_free_wave_matches_bessel():
    # u = sqrt(r) J_nu(k r), small-argument law
    k = 1.0
    nu = 0.7
    ch = Channel(nu**2 - 0.25, nu, 1)
    r0 = 1e-3
    u0, u0p = frobenius_start(ch, free_spec(), k * k, r0)
    from levscat import bessel_jy, gamma_fn
    bp = bessel_jy(nu, k * r0)
    scale = (0.5 * k) ** nu / gamma_fn(nu + 1.0)   # frobenius normalizes a0 = 1
    assert u0 == pytest.approx(math.sqrt(r0) * bp.j / scale, rel=1e-12)
    assert u0p == pytest.approx(
        (0.5 / math.sqrt(r0) * bp.j + math.sqrt(r0) * k * bp.jprime) / scale, rel=1e-12)


def test_frobenius_series_sympy_oracle():
    # brute-force Taylor expansion of the ODE to order 6
    import sympy as sp
    r, nu, E, gw0 = sp.symbols("r nu E g0", positive=True)
    aks = sp.symbols("a1:7")
    u = r ** (nu + sp.Rational(1, 2)) * (1 + sum(a * r**k for k, a in enumerate(aks, 1)))
    ode = -sp.diff(u, r, 2) + ((nu**2 - sp.Rational(1, 4)) / r**2 + gw0 - E) * u
    poly = sp.Poly(sp.expand(sp.simplify(ode * r ** (-(nu + sp.Rational(1, 2)) + 2))), r)
    sol = sp.solve([poly.coeff_monomial(r**k) for k in range(2, 8)], aks, dict=True)[0]

    spec = well_spec(3, 0.0, 2.0)   # g w = -2 inside the well
    coeffs = frobenius_series(CH_HALF, spec, 0.3, n_terms=7)
    subs = {nu: sp.Rational(1, 2), E: sp.Rational(3, 10), gw0: -2}
    for k, a in enumerate(aks, 1):
        ref = float(sol[a].subs(subs))
        assert coeffs[k] == pytest.approx(ref, abs=1e-14, rel=1e-12)


def test_integrate_free_wave_ratio_constant():
    from levscat import bessel_jy
    sol = integrate_channel(CH_HALF, free_spec(), 1.0, 20.0)
    mask = (sol.r_grid >= 1.0) & (np.abs(np.sin(sol.r_grid)) > 0.2)
    ref = np.sqrt(2 / np.pi) * np.sin(sol.r_grid[mask])
    ratio = sol.u[mask] / ref
    assert np.ptp(ratio) / abs(np.mean(ratio)) < 1e-9


def test_integrate_reversal_free_power():
    sol = integrate_channel(CH_HALF, free_spec(), 0.0, 10.0)
    assert np.max(np.abs(sol.u / sol.r_grid - 1.0)) < 1e-10
    assert sol.nodes == 0


def test_square_well_log_derivative():
    # E = -kappa^2 inside a depth-4 well: u'/u(1) = K cot K, K = sqrt(V0 - kappa^2)
    kappa = 0.5
    spec = well_spec(3, 0.0, 4.0)
    sol = integrate_channel(CH_HALF, spec, -kappa**2, 1.0)
    K = math.sqrt(4.0 - kappa**2)
    assert sol.uprime[-1] / sol.u[-1] == pytest.approx(K / math.tan(K), rel=1e-9)


def test_node_counts_classical_wells():
    assert count_negative_eigenvalues(CH_HALF, well_spec(3, 0.0, 2.0)) == 0
    assert count_negative_eigenvalues(CH_HALF, well_spec(3, 0.0, 4.0)) == 1
    # deeper well: second s-state above (3 pi/2)^2 = 22.2
    assert count_negative_eigenvalues(CH_HALF, well_spec(3, 0.0, 23.0)) == 2


@pytest.mark.parametrize("nu,g", [(0.5, 4.0), (0.5, 12.0), (1.5, 12.0), (0.3, 1.2), (1.4, 9.5)])
def test_node_count_matches_fd_oracle(nu, g):
    n = 3 if nu in (0.5, 1.5) else 2
    q0 = nu**2 - (n - 2) ** 2 / 4.0
    spec = well_spec(n, q0, g)
    ch = Channel(q0, nu, 1)
    assert count_negative_eigenvalues(ch, spec) == fd_negative_count(nu, spec)


def test_grid_resolves_all_nodes():
    spec = well_spec(3, 0.0, 40.0)
    sol = integrate_channel(CH_HALF, spec, 0.0, 1.0)
    sign_changes = int(np.sum(np.diff(np.sign(sol.u[np.abs(sol.u) > 0])) != 0))
    assert sol.nodes == sign_changes == 2
    assert sol.u[0] > 0.0


def test_node_count_monotone_in_coupling():
    counts = [count_negative_eigenvalues(CH_HALF, well_spec(3, 0.0, g))
              for g in np.linspace(0.5, 25.0, 12)]
    assert all(b >= a for a, b in zip(counts, counts[1:]))


def test_wronskian_conservation_two_solutions():
    spec = well_spec(3, 0.0, 4.0)
    e = 0.7
    r0 = 1e-3
    u0, u0p = frobenius_start(CH_HALF, spec, e, r0)
    wvals = []
    # endpoint values of separate integrations avoid interpolation noise
    for r_end in (0.3, 0.7, 1.0, 1.5, 2.0):
        _, th1, el1, _ = integrate_prufer(CH_HALF, spec, e, r0, r_end)
        _, th2, el2, _ = integrate_prufer(CH_HALF, spec, e, r0, r_end,
                                          start=(0.3 * u0p, -1.1 * u0p))
        u1, p1 = math.exp(el1[-1]) * math.sin(th1[-1]), math.exp(el1[-1]) * math.cos(th1[-1])
        u2, p2 = math.exp(el2[-1]) * math.sin(th2[-1]), math.exp(el2[-1]) * math.cos(th2[-1])
        wvals.append(u1 * p2 - p1 * u2)
    assert np.ptp(wvals) / abs(np.mean(wvals)) < 1e-9


def test_zero_energy_free():
    a, b = zero_energy_coefficients(CH_HALF, free_spec()).a, \
        zero_energy_coefficients(CH_HALF, free_spec()).b
    assert a == pytest.approx(1.0, rel=1e-12)
    assert abs(b) < 1e-12


def test_zero_energy_critical_half_bound():
    coeffs = zero_energy_coefficients(CH_HALF, well_spec(3, 0.0, GSTAR_HALF))
    assert abs(coeffs.a) < 1e-8 * abs(coeffs.b)
    assert coeffs.b == pytest.approx(2.0 / math.pi, rel=1e-10)


def test_zero_energy_matching_radius_independent():
    # integrate past the support and re-match: exact two-power tail
    spec = well_spec(3, 0.0, 4.0)
    sol = integrate_channel(CH_HALF, spec, 0.0, 2.0)
    idx1 = np.searchsorted(sol.r_grid, 1.0)
    idx2 = len(sol.r_grid) - 1
    sets = []
    for i in (idx1, idx2):
        sets.append(_power_match(0.5, sol.r_grid[i], sol.u[i], sol.uprime[i])[:2])
    assert sets[0][0] == pytest.approx(sets[1][0], rel=1e-8)
    assert sets[0][1] == pytest.approx(sets[1][1], rel=1e-8)


def test_sign_of_a_flips_across_critical_coupling():
    eps = 1e-3
    a_lo = zero_energy_coefficients(CH_HALF, well_spec(3, 0.0, GSTAR_HALF - eps)).a
    a_hi = zero_energy_coefficients(CH_HALF, well_spec(3, 0.0, GSTAR_HALF + eps)).a
    assert a_lo > 0 > a_hi
    # monotone decrease through the crossing
    gs = GSTAR_HALF + np.linspace(-5e-3, 5e-3, 7)
    avals = [zero_energy_coefficients(CH_HALF, well_spec(3, 0.0, g)).a for g in gs]
    assert all(x > y for x, y in zip(avals, avals[1:]))


def test_power_match_ill_conditioned():
    with pytest.raises(IllConditioned):
        _power_match(1e-9, 1.0, 1.0, 0.5)


def test_stiffness_failure_surfaces(monkeypatch):
    import levscat.radial as radial

    class FailSol:
        success = False
        message = "step size collapsed"

    monkeypatch.setattr(radial, "solve_ivp", lambda *a, **k: FailSol())
    with pytest.raises(StiffnessFailure):
        integrate_channel(CH_HALF, well_spec(3, 0.0, 4.0), 0.0, 1.0)
