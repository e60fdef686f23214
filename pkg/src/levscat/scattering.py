"""Continuum phase shifts against the pure inverse-square reference.

The reference channel operator has free solutions sqrt(r) J_nu(k r) and
sqrt(r) Y_nu(k r); the phase shift of the perturbed channel is defined
by matching the regular solution at the support edge,

    u(r) ~ cos(delta) sqrt(r) J_nu(k r) - sin(delta) sqrt(r) Y_nu(k r),

through Wronskian ratios (the basis Wronskian is the constant 2/pi).
For piecewise-constant w the regular solution is propagated *exactly*
segment by segment in the local Bessel basis, so the expensive part of
an energy sweep is a handful of special-function evaluations per (nu, k)
pair; general polynomial segments fall back to the adaptive ODE engine,
and the two routes are cross-checked against each other in the tests.

Continuous branches are anchored at the top of the grid to the first
Born approximation

    born = -(pi/2) int_0^oo g w(r) J_nu(k r)^2 r dr,

which is the computable stand-in for the delta(infinity) = 0
normalization, and unwrapped downward in k adding pi-multiples so that
adjacent samples never jump by more than pi/2 (refining the grid where
they would).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channels import Channel
from .errors import UnresolvedBranch
from .potential import PotentialSpec
from .radial import integrate_channel
from .specfun import bessel_ik, bessel_j, bessel_jy, gamma_fn

_LOCAL_E_TOL = 1e-12


@dataclass(frozen=True)
class PhaseCurve:
    """Branch-continuous phase shift of one channel."""

    channel: Channel
    k_grid: np.ndarray
    delta: np.ndarray
    delta0_limit: float
    born_anchor_k: float


def _basis(nu: float, mu2: float, r: float):
    """Local solution basis (phi, phi', psi, psi', wronskian) at radius r.

    mu2 is the local energy E - g w; the basis is oscillatory Bessel for
    mu2 > 0, modified Bessel for mu2 < 0 and plain powers at mu2 = 0.
    """
    if mu2 > _LOCAL_E_TOL:
        kk = math.sqrt(mu2)
        bp = bessel_jy(nu, kk * r)
        sq = math.sqrt(r)
        phi = sq * bp.j
        phip = 0.5 / sq * bp.j + sq * kk * bp.jprime
        psi = sq * bp.y
        psip = 0.5 / sq * bp.y + sq * kk * bp.yprime
        return phi, phip, psi, psip, 2.0 / math.pi
    if mu2 < -_LOCAL_E_TOL:
        kap = math.sqrt(-mu2)
        iv, kv, ivp, kvp = bessel_ik(nu, kap * r)
        sq = math.sqrt(r)
        phi = sq * iv.real
        phip = 0.5 / sq * iv.real + sq * kap * ivp.real
        psi = sq * kv.real
        psip = 0.5 / sq * kv.real + sq * kap * kvp.real
        return phi, phip, psi, psip, -1.0
    phi = r ** (0.5 + nu)
    phip = (0.5 + nu) * r ** (nu - 0.5)
    psi = r ** (0.5 - nu)
    psip = (0.5 - nu) * r ** (-nu - 0.5)
    return phi, phip, psi, psip, -2.0 * nu


def _is_piecewise_constant(spec: PotentialSpec) -> bool:
    return all(len(seg.coeffs) <= 1 for seg in spec.w)


def _boundary_exact(channel: Channel, spec: PotentialSpec, E: float, r_match: float):
    """(u, u') at r_match by exact per-segment Bessel transfer."""
    nu = channel.nu
    u = up = None
    r_prev = 0.0
    for seg in spec.w:
        c = seg.coeffs[0] if seg.coeffs else 0.0
        mu2 = E - spec.g * c
        hi = min(seg.r_hi, r_match)
        if u is None:
            # regular solution inside the first segment
            phi, phip, *_ = _basis(nu, mu2, hi)
            u, up = phi, phip
        else:
            phi, phip, psi, psip, wr = _basis(nu, mu2, r_prev)
            a = (u * psip - up * psi) / wr
            b = (up * phi - u * phip) / wr
            phi, phip, psi, psip, _ = _basis(nu, mu2, hi)
            u = a * phi + b * psi
            up = a * phip + b * psip
        r_prev = hi
        if hi >= r_match:
            return u, up
    if u is None:
        phi, phip, *_ = _basis(nu, E, r_match)
        return phi, phip
    # free stretch between the support edge and the matching radius
    if r_match > r_prev:
        phi, phip, psi, psip, wr = _basis(nu, E, r_prev)
        a = (u * psip - up * psi) / wr
        b = (up * phi - u * phip) / wr
        phi, phip, psi, psip, _ = _basis(nu, E, r_match)
        u = a * phi + b * psi
        up = a * phip + b * psip
    return u, up


def _boundary_ode(channel: Channel, spec: PotentialSpec, E: float, r_match: float):
    sol = integrate_channel(channel, spec, E, r_match)
    return float(sol.u[-1]), float(sol.uprime[-1])


def boundary_data(channel: Channel, spec: PotentialSpec, E: float,
                  r_match: float, force_ode: bool = False):
    """Regular-solution data (u, u') at r_match, fastest valid route."""
    if not force_ode and _is_piecewise_constant(spec):
        return _boundary_exact(channel, spec, E, r_match)
    return _boundary_ode(channel, spec, E, r_match)


def _digamma_int(m: int) -> float:
    """psi(m) for integer m >= 1."""
    val = -0.5772156649015328606
    for j in range(1, m):
        val += 1.0 / j
    return val


def _threshold_wronskians(nu: float, k: float, r: float):
    """Wronskians of the exterior powers against the reference basis.

    Returns (W[p+, s], W[p-, s], W[p+, c], W[p-, c]) for
    p+- = r^(1/2 +- nu), s = sqrt(r) J_nu(k r), c = sqrt(r) Y_nu(k r),
    evaluated by ascending series (k r small).  Expressing the matching
    through these removes the catastrophic cancellation that the direct
    Wronskian ratio suffers for near-critical channels as k -> 0: each
    series term is computed symbolically, so the tiny Wronskian of two
    nearly proportional solutions is exact instead of a difference of
    huge numbers.
    """
    x2 = 0.5 * k * r
    q = -x2 * x2

    def j_wrons(order: float):
        # W[p+-, sqrt(r) J_order(k r)] as (coef of R^(..), ...) sums
        cm = (0.5 * k) ** order / gamma_fn(order + 1.0)
        wp = 0.0   # against r^(1/2+nu)
        wm = 0.0   # against r^(1/2-nu)
        wp_log = 0.0   # same against r^(1/2+nu) with an extra log r factor
        wm_log = 0.0
        r2 = r * r
        rp = r ** (order + nu)      # power for the W[p+, .] leading term
        rm = r ** (order - nu)
        lr = math.log(r)
        for m in range(0, 12):
            beta_minus_ap = order + 2 * m - nu
            beta_minus_am = order + 2 * m + nu
            wp += cm * beta_minus_ap * rp
            wm += cm * beta_minus_am * rm
            wp_log += cm * (beta_minus_ap * lr + 1.0) * rp
            wm_log += cm * (beta_minus_am * lr + 1.0) * rm
            cm *= q / ((m + 1.0) * (order + m + 1.0))
            rp *= r2
            rm *= r2
            if abs(cm * rp) < 1e-18 * (abs(wp) + 1e-300) and m > 2:
                break
        return wp, wm, wp_log, wm_log

    wps, wms, _, _ = j_wrons(nu)

    if abs(nu - round(nu)) > 1e-6:
        wpj_neg, wmj_neg, _, _ = j_wrons(-nu)
        s_pi = math.sin(math.pi * nu)
        c_pi = math.cos(math.pi * nu)
        wpc = (c_pi * wps - wpj_neg) / s_pi
        wmc = (c_pi * wms - wmj_neg) / s_pi
        return wps, wms, wpc, wmc

    # integer order: Y_n by its logarithmic series
    n = int(round(nu))
    wps_n, wms_n, wps_log, wms_log = j_wrons(float(n))
    lk = math.log(x2 / r)   # log(k/2): the log(r) part is carried separately
    wpc = 2.0 / math.pi * (lk * wps_n + wps_log)
    wmc = 2.0 / math.pi * (lk * wms_n + wms_log)
    # finite sum of negative powers
    for j in range(n):
        coef = -(1.0 / math.pi) * math.factorial(n - j - 1) / math.factorial(j) \
            * (0.5 * k) ** (2 * j - n)
        beta = 2 * j - n
        wpc += coef * (beta - nu) * r ** (beta + nu)
        wmc += coef * (beta + nu) * r ** (beta - nu)
    # psi-weighted positive series
    cm = -(1.0 / math.pi) * (0.5 * k) ** n
    for m in range(0, 12):
        coef = cm * (_digamma_int(m + 1) + _digamma_int(n + m + 1)) / (
            math.factorial(m) * math.factorial(n + m))
        beta = n + 2 * m
        wpc += coef * (beta - nu) * r ** (beta + nu)
        wmc += coef * (beta + nu) * r ** (beta - nu)
        cm *= q
    return wps, wms, wpc, wmc


def _phase_mod_pi_threshold(channel: Channel, spec: PotentialSpec, k: float,
                            r_match: float, force_ode: bool) -> float:
    """Stable mod-pi phase at small k via the power representation."""
    from .radial import _power_match
    u, up = boundary_data(channel, spec, k * k, r_match, force_ode=force_ode)
    a, b, _ = _power_match(channel.nu, r_match, u, up)
    wps, wms, wpc, wmc = _threshold_wronskians(channel.nu, k, r_match)
    w_us = a * wps + b * wms
    w_uc = a * wpc + b * wmc
    return math.atan2(w_us, w_uc)


def phase_shift_mod_pi(channel: Channel, spec: PotentialSpec, k: float,
                       r_match: float = None, force_ode: bool = False) -> float:
    """Phase shift modulo pi, in (-pi/2, pi/2].

    Matches the regular solution against the inverse-square reference
    basis at r_match (default: the support edge); by compact support the
    result is independent of r_match >= r_cut.  Deep below threshold
    (k r small) the matching goes through the exterior power
    representation, which stays accurate for near-critical channels
    where the direct Wronskian ratio would cancel catastrophically.
    """
    if r_match is None:
        r_match = spec.r_cut
    if k * r_match < 0.05 and channel.nu <= 2.5:
        delta = _phase_mod_pi_threshold(channel, spec, k, r_match, force_ode)
    else:
        u, up = boundary_data(channel, spec, k * k, r_match, force_ode=force_ode)
        bp = bessel_jy(channel.nu, k * r_match)
        sq = math.sqrt(r_match)
        s, c = sq * bp.j, sq * bp.y
        sp = 0.5 / sq * bp.j + sq * k * bp.jprime
        cp = 0.5 / sq * bp.y + sq * k * bp.yprime
        w_us = u * sp - up * s
        w_uc = u * cp - up * c
        delta = math.atan2(w_us, w_uc)
    while delta > 0.5 * math.pi:
        delta -= math.pi
    while delta <= -0.5 * math.pi:
        delta += math.pi
    return delta


def _gauss_segment(f, lo: float, hi: float, rel_tol: float) -> float:
    """Gauss-Legendre quadrature with node doubling until stable."""
    n = 24
    prev = None
    while n <= 1536:
        x, w = np.polynomial.legendre.leggauss(n)
        xs = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
        val = 0.5 * (hi - lo) * float(np.dot(w, f(xs)))
        if prev is not None and abs(val - prev) <= rel_tol * (abs(val) + 1e-300):
            return val
        prev = val
        n *= 2
    return prev


def born_phase(channel: Channel, spec: PotentialSpec, k: float,
               rel_tol: float = 1e-9) -> float:
    """First Born approximation -(pi/2) int g w(r) J_nu(k r)^2 r dr."""
    nu = channel.nu
    total = 0.0
    for seg in spec.w:
        def integrand(rs, seg=seg):
            vals = np.empty_like(rs)
            for i, r in enumerate(rs):
                x = k * r
                j = bessel_j(nu, x) if x > 0 else 0.0
                vals[i] = seg.value(r) * j * j * r
            return vals
        total += _gauss_segment(integrand, seg.r_lo, seg.r_hi, rel_tol)
    return -0.5 * math.pi * spec.g * total


def phase_curve(channel: Channel, spec: PotentialSpec, k_grid,
                refine_budget: int = 1_000_000, force_ode: bool = False) -> PhaseCurve:
    """Branch-continuous phase curve on (a refinement of) k_grid.

    The absolute branch is fixed at the top of the grid by the Born
    value; moving down in k, each sample is placed on the pi-branch
    nearest its right neighbour, bisecting the interval (geometrically)
    whenever that would jump by pi/2 or more.  Raises UnresolvedBranch
    if the refinement exceeds refine_budget evaluations.
    """
    ks = np.sort(np.asarray(k_grid, dtype=float))
    evals = [0]

    def mod_phase(k: float) -> float:
        evals[0] += 1
        if evals[0] > refine_budget:
            raise UnresolvedBranch(f"phase refinement budget exhausted for nu={channel.nu}")
        return phase_shift_mod_pi(channel, spec, k, force_ode=force_ode)

    mods = {k: mod_phase(k) for k in ks}
    k_top = ks[-1]
    born_top = born_phase(channel, spec, k_top)
    resolved = {k_top: mods[k_top] + math.pi * round((born_top - mods[k_top]) / math.pi)}

    def resolve(k_lo: float, k_hi: float, depth: int = 0):
        """Resolve delta(k_lo) given the already-resolved delta(k_hi)."""
        d_hi = resolved[k_hi]
        cand = mods[k_lo] + math.pi * round((d_hi - mods[k_lo]) / math.pi)
        if abs(cand - d_hi) < 0.5 * math.pi * 0.98 or depth > 48:
            resolved[k_lo] = cand
            return
        k_mid = math.sqrt(k_lo * k_hi)
        mods[k_mid] = mod_phase(k_mid)
        resolve(k_mid, k_hi, depth + 1)
        resolve(k_lo, k_mid, depth + 1)

    for i in range(len(ks) - 2, -1, -1):
        resolve(ks[i], ks[i + 1])

    all_k = np.asarray(sorted(resolved))
    all_d = np.asarray([resolved[k] for k in all_k])

    # threshold law delta ~ delta0 + c k^(2 nu) on the lowest grid points,
    # with the power normalized to its top fit point to stay representable
    n_fit = min(8, max(3, len(all_k) // 8))
    span = 2.0 * channel.nu * math.log(all_k[n_fit - 1] / all_k[0])
    if span < 600.0:
        xs = (all_k[:n_fit] / all_k[n_fit - 1]) ** (2.0 * channel.nu)
        coef = np.polynomial.polynomial.polyfit(xs, all_d[:n_fit], 1)
        delta0 = float(coef[0])
    else:
        delta0 = float(all_d[0])
    return PhaseCurve(channel=channel, k_grid=all_k, delta=all_d,
                      delta0_limit=delta0, born_anchor_k=float(k_top))
