"""Threshold classification, critical couplings, resonance normalization."""

import math
from dataclasses import replace

import numpy as np
import pytest
from scipy.optimize import brentq
from scipy.special import jv

from levscat import (Channel, build_channels, classify_threshold,
                     count_negative_eigenvalues, critical_coupling,
                     resonance_normalization)
from levscat.errors import NoBracket, NotResonant
from conftest import GSTAR_HALF, GSTAR_NU03, GSTAR_NU1, GSTAR_NU14, well_spec

CH_HALF = Channel(0.0, 0.5, 1)


def test_free_all_generic(reports=None):
    spec = well_spec(3, 0.0, 0.0)
    rep = classify_threshold(build_channels(spec, 3.5), spec)
    assert rep.N0 == 0 and rep.resonances == () and rep.mu_r == 0
    assert all(r.klass == "generic" for r in rep.records)


def test_half_bound_resonance_report():
    spec = well_spec(3, 0.0, GSTAR_HALF)
    rep = classify_threshold(build_channels(spec, 3.5), spec)
    assert rep.N0 == 0
    assert rep.resonances == ((0.5, 1),)
    assert rep.mu_r == 1
    assert rep.resonance_sum == pytest.approx(0.5)


def test_nu14_eigenvalue_split():
    spec = well_spec(2, 1.96, GSTAR_NU14)
    rep = classify_threshold(build_channels(spec, 3.0), spec)
    assert rep.N0 == 1
    assert rep.resonances == ()
    assert [r.klass for r in rep.records][0] == "eigenvalue"


@pytest.mark.parametrize("nu,q0,n,gstar,bracket", [
    (0.5, 0.0, 3, GSTAR_HALF, (2.0, 3.0)),
    (0.3, 0.09, 2, GSTAR_NU03, (1.0, 2.0)),
    (1.0, 1.0, 2, GSTAR_NU1, (5.0, 7.0)),
    (1.4, 1.96, 2, GSTAR_NU14, (8.0, 10.0)),
])
def test_critical_coupling_analytic_anchor(nu, q0, n, gstar, bracket):
    # independent oracle: criticality of the unit well at coupling g means
    # the interior solution sqrt(r) J_nu(sqrt(g) r) matches the pure
    # decaying power at r = 1, which reduces to J_(nu-1)(sqrt(g)) = 0
    root = brentq(lambda x: float(jv(nu - 1.0, x)), *np.sqrt(bracket), xtol=1e-14)
    assert root**2 == pytest.approx(gstar, rel=1e-12)

    spec = well_spec(n, q0, 1.0)
    ch = Channel(q0, nu, 1)
    g = critical_coupling(ch, spec, *bracket)
    assert g == pytest.approx(gstar, rel=1e-9)


def test_critical_coupling_no_bracket():
    spec = well_spec(3, 0.0, 1.0)
    with pytest.raises(NoBracket):
        critical_coupling(CH_HALF, spec, 0.5, 1.5)


def test_resonance_normalization_value_and_identity():
    spec = well_spec(3, 0.0, GSTAR_HALF)
    pairing = resonance_normalization(CH_HALF, spec)
    # by parts against the zero-energy equation: pairing = |c|^(1/2)(-2 nu b),
    # b = 2/pi for the critical unit well and |c_(1/2)| = 1
    assert pairing == pytest.approx(-2.0 * 0.5 * 2.0 / math.pi, abs=1e-8)


def test_resonance_normalization_linearity():
    # doubling the solution doubles the pairing: realized by scaling the
    # aux quadrature through a doubled well radius ruins criticality, so
    # check linearity through the identity instead: pairing / b is fixed
    from levscat import zero_energy_coefficients
    spec = well_spec(3, 0.0, GSTAR_HALF)
    pairing = resonance_normalization(CH_HALF, spec)
    b = zero_energy_coefficients(CH_HALF, spec).b
    assert pairing / b == pytest.approx(-1.0, rel=1e-7)


def test_resonance_normalization_guard():
    with pytest.raises(NotResonant):
        resonance_normalization(CH_HALF, well_spec(3, 0.0, 4.0))
    with pytest.raises(NotResonant):
        # nu > 1 singular channels are eigenvalues, not resonances
        resonance_normalization(Channel(1.96, 1.4, 1), well_spec(2, 1.96, GSTAR_NU14))


def test_tolerance_robustness_band():
    spec = well_spec(3, 0.0, GSTAR_HALF)
    cs = build_channels(spec, 3.5)
    reports = [classify_threshold(cs, spec, tol_a=t) for t in (1e-9, 1e-7, 1e-5)]
    assert all(r.resonances == ((0.5, 1),) and r.N0 == 0 for r in reports)


def test_classification_changes_exactly_at_gstar():
    eps = 1e-3
    for g, expect in [(GSTAR_HALF - eps, "generic"), (GSTAR_HALF + eps, "generic")]:
        spec = well_spec(3, 0.0, g)
        rep = classify_threshold(build_channels(spec, 1.0), spec)
        assert rep.records[0].klass == expect
    # bound-state count increments by n_nu across the crossing
    assert count_negative_eigenvalues(CH_HALF, well_spec(3, 0.0, GSTAR_HALF - eps)) == 0
    assert count_negative_eigenvalues(CH_HALF, well_spec(3, 0.0, GSTAR_HALF + eps)) == 1


def test_nu14_critical_state_is_square_integrable():
    # the dense-matrix zero-energy eigenvector gains norm more and more
    # slowly as the domain grows (L^2 state), unlike the nu = 0.3 resonance
    from conftest import fd_low_spectrum

    def tail_norm_growth(nu, q0, g):
        spec = well_spec(2, q0, g)
        out = []
        for length in (40.0, 80.0, 160.0):
            r, vals, vecs = fd_low_spectrum(nu, spec, length, int(40 * length), 0.05)
            i0 = int(np.argmin(np.abs(vals)))
            u = vecs[:, i0]
            u = u / np.interp(0.5, r, u)   # pin the interior scale
            out.append(float(np.sum(u[r > 1.0] ** 2) * (r[1] - r[0])))
        return out

    grow_e = tail_norm_growth(1.4, 1.96, GSTAR_NU14)
    grow_r = tail_norm_growth(0.3, 0.09, GSTAR_NU03)
    # successive domain doublings: eigenvalue tail saturates (u ~ r^-0.9),
    # resonance tail diverges (u ~ r^0.2)
    ratio_e = (grow_e[2] - grow_e[1]) / (grow_e[1] - grow_e[0])
    ratio_r = (grow_r[2] - grow_r[1]) / (grow_r[1] - grow_r[0])
    assert ratio_e < 0.6
    assert ratio_r > 1.2
