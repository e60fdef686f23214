"""Channel construction: spectra, multiplicities, Hill oracle, errors."""

import math
from itertools import combinations_with_replacement

import numpy as np
import pytest

from levscat import AngularPotential, PotentialSpec, build_channels, sphere_multiplicity
from levscat.channels import hill_matrix
from levscat.errors import PositivityViolation, UnsupportedAngular
from levscat.potential import square_well


def spec_const(n, q0):
    return PotentialSpec(n=n, q=AngularPotential("constant", q0),
                         w=square_well(-1.0, 1.0), g=1.0, r_cut=1.0)


def spec_trig(q0, coeffs):
    return PotentialSpec(n=2, q=AngularPotential("trig", q0, tuple(coeffs)),
                         w=square_well(-1.0, 1.0), g=1.0, r_cut=1.0)


def test_n3_free_channels():
    cs = build_channels(spec_const(3, 0.0), 3.5)
    assert [(c.nu, c.mult) for c in cs.channels] == [
        (0.5, 1), (1.5, 3), (2.5, 5), (3.5, 7)]
    assert [c.nu for c in cs.sigma1] == [0.5]


def test_n2_constant_shift():
    cs = build_channels(spec_const(2, 0.09), 2.0)
    assert [(round(c.nu, 12), c.mult) for c in cs.channels] == [
        (0.3, 1), (round(math.sqrt(1.09), 12), 2)]


def test_channel_invariant_nu_lambda():
    cs = build_channels(spec_const(3, 0.7), 6.0)
    for ch in cs.channels:
        assert ch.nu > 0
        assert abs(ch.nu**2 - 0.25 - ch.lambda_nu) < 1e-12 * max(1.0, abs(ch.lambda_nu))


def test_constant_shift_property():
    # q0 -> q0 + c shifts every lambda by c and nu to sqrt(nu^2 + c)
    base = build_channels(spec_const(3, 0.0), 6.0)
    shifted = build_channels(spec_const(3, 0.37), 6.0)
    for ch0, ch1 in zip(base.channels, shifted.channels):
        assert ch1.lambda_nu == pytest.approx(ch0.lambda_nu + 0.37, abs=1e-12)
        assert ch1.nu == pytest.approx(math.sqrt(ch0.nu**2 + 0.37), rel=1e-13)
        assert ch1.mult == ch0.mult


def test_trig_eigenvalues_match_doubled_cutoff_oracle():
    # independent dense-matrix oracle at 4x the production truncation
    q0, coeffs = 0.5, (0.2,)   # q(theta) = 0.5 + 0.2 cos(2 theta) -> a2 = 0.2
    cs = build_channels(spec_trig(q0, (0.0, 0.2)), 4.0)
    m_big = 256
    oracle = np.linalg.eigvalsh(hill_matrix(q0, (0.0, 0.2), m_big))
    got = []
    for ch in cs.channels:
        got.extend([ch.lambda_nu] * ch.mult)
    for lam, ref in zip(sorted(got), oracle[: len(got)]):
        assert abs(lam - ref) < 1e-10 * max(1.0, abs(ref))


def test_multiplicity_sum_matches_oracle():
    q0, coeffs = 0.5, (0.0, 0.2)
    k_cut = 3.0
    cs = build_channels(spec_trig(q0, coeffs), k_cut)
    total = sum(ch.mult for ch in cs.channels if ch.nu <= k_cut)
    oracle = np.linalg.eigvalsh(hill_matrix(q0, coeffs, 256))
    assert total == int(np.sum(oracle <= k_cut**2))


def test_degenerate_merging():
    # constant q on the circle: +-m are exactly degenerate, one channel of mult 2
    cs = build_channels(spec_trig(0.09, ()), 3.0)
    assert [(round(c.nu, 12), c.mult) for c in cs.channels] == [
        (0.3, 1), (round(math.sqrt(1.09), 12), 2), (round(math.sqrt(4.09), 12), 2)]


def test_determinism():
    a = build_channels(spec_trig(0.5, (0.0, 0.2)), 4.0)
    b = build_channels(spec_trig(0.5, (0.0, 0.2)), 4.0)
    assert a == b


def test_positivity_violation():
    with pytest.raises(PositivityViolation):
        build_channels(spec_const(2, 0.0), 2.0)       # lambda_1 = 0 is not > 0
    with pytest.raises(PositivityViolation):
        build_channels(spec_const(3, -0.25), 2.0)     # exactly -(n-2)^2/4


def test_unsupported_angular():
    spec = PotentialSpec(n=3, q=AngularPotential("trig", 0.5, (0.1,)),
                         w=square_well(-1.0, 1.0), g=1.0, r_cut=1.0)
    with pytest.raises(UnsupportedAngular):
        build_channels(spec, 2.0)


def test_sphere_multiplicity_small_cases():
    assert sphere_multiplicity(3, 0) == 1
    assert sphere_multiplicity(3, 2) == 5
    assert sphere_multiplicity(2, 0) == 1
    assert sphere_multiplicity(2, 7) == 2


def test_sphere_multiplicity_harmonic_polynomial_oracle():
    # dim of degree-2 harmonics in 4 variables by brute-force linear algebra:
    # the Laplacian maps degree-2 monomials onto constants, kernel = harmonics
    n, deg = 4, 2
    monos = list(combinations_with_replacement(range(n), deg))
    lap = np.array([[2.0 if i == j else 0.0] for (i, j) in monos]).T
    dim = len(monos) - np.linalg.matrix_rank(lap)
    assert sphere_multiplicity(4, 2) == dim == 9
