"""Shared scenario builders and independent oracles for the test suite."""

import math

import numpy as np
import pytest
from scipy.linalg import eigvalsh_tridiagonal

from levscat import AngularPotential, PotentialSpec, square_well

# analytic anchors for the unit square well: the channel turns critical
# exactly when J_(nu-1)(sqrt(g) R) has its first positive zero
GSTAR_HALF = math.pi**2 / 4.0                 # nu = 1/2,  J_(-1/2) zero at pi/2
GSTAR_NU03 = 1.3723060508555109747            # nu = 0.3,  first zero of J_(-0.7), squared
GSTAR_NU1 = 5.7831859629467845212             # nu = 1,    first zero of J_0, squared
GSTAR_NU14 = 8.9930963562051155922            # nu = 1.4,  first zero of J_(0.4), squared


def well_spec(n, q0, g, depth=-1.0, radius=1.0):
    return PotentialSpec(n=n, q=AngularPotential("constant", q0),
                         w=square_well(depth, radius), g=g, r_cut=radius)


def fd_negative_count(nu, spec, length=40.0, points=8000):
    """Dense finite-difference oracle: negative eigenvalues of the channel.

    Dirichlet truncation of -u'' + [(nu^2-1/4)/r^2 + g w]u on (0, length);
    the count is Richardson-stable once doubling the grid leaves it fixed.
    """
    def count(n_pts):
        h = length / (n_pts + 1)
        r = h * np.arange(1, n_pts + 1)
        q = (nu**2 - 0.25) / r**2 + spec.g * spec.w_value(r)
        diag = 2.0 / h**2 + q
        off = -np.ones(n_pts - 1) / h**2
        ev = eigvalsh_tridiagonal(diag, off, select="v", select_range=(-np.inf, 0.0))
        return len(ev)

    c1 = count(points)
    c2 = count(2 * points)
    assert c1 == c2, f"FD count not converged: {c1} vs {c2}"
    return c1


def fd_low_spectrum(nu, spec, length, points, e_max):
    """FD eigenvalues below e_max with eigenvectors, for L2 diagnostics."""
    from scipy.linalg import eigh_tridiagonal
    h = length / (points + 1)
    r = h * np.arange(1, points + 1)
    q = (nu**2 - 0.25) / r**2 + spec.g * spec.w_value(r)
    diag = 2.0 / h**2 + q
    off = -np.ones(points - 1) / h**2
    vals, vecs = eigh_tridiagonal(diag, off, select="v",
                                  select_range=(-np.inf, e_max))
    return r, vals, vecs


@pytest.fixture(scope="session")
def reports():
    """Lazily computed LevinsonReports shared across acceptance tests."""
    from levscat import levinson_check

    cache = {}

    def get(tag):
        if tag in cache:
            return cache[tag]
        scen = {
            "free2": (well_spec(2, 0.09, 0.0), dict(residual_budget=1e-6)),
            "free3": (well_spec(3, 0.0, 0.0), dict(residual_budget=1e-6)),
            "V2": (well_spec(3, 0.0, 2.0), dict()),
            "V4": (well_spec(3, 0.0, 4.0), dict()),
            "V12": (well_spec(3, 0.0, 12.0), dict()),
            "halfb": (well_spec(3, 0.0, GSTAR_HALF), dict(residual_budget=2e-2)),
            "nu03-": (well_spec(2, 0.09, 0.95 * GSTAR_NU03),
                      dict(residual_budget=2e-2, lambda_min=1e-10)),
            "nu03c": (well_spec(2, 0.09, GSTAR_NU03),
                      dict(residual_budget=2e-2, lambda_min=1e-10)),
            "nu03+": (well_spec(2, 0.09, 1.05 * GSTAR_NU03),
                      dict(residual_budget=2e-2, lambda_min=1e-10)),
            "nu14-": (well_spec(2, 1.96, 0.95 * GSTAR_NU14),
                      dict(residual_budget=2e-2, lambda_min=1e-7, lambda_top=6400.0)),
            "nu14c": (well_spec(2, 1.96, GSTAR_NU14),
                      dict(residual_budget=2e-2, lambda_min=1e-7, lambda_top=6400.0)),
            "nu14+": (well_spec(2, 1.96, 1.05 * GSTAR_NU14),
                      dict(residual_budget=2e-2, lambda_min=1e-7, lambda_top=6400.0)),
            "nu1-": (well_spec(2, 1.0, 0.95 * GSTAR_NU1),
                     dict(residual_budget=5e-2, lambda_min=1e-10)),
            "nu1c": (well_spec(2, 1.0, GSTAR_NU1),
                     dict(residual_budget=5e-2, lambda_min=1e-10)),
        }
        spec, kw = scen[tag]
        cache[tag] = levinson_check(spec, **kw)
        return cache[tag]

    return get
