"""Per-channel radial ODE engine.

After conjugation by r^((n-1)/2) every channel reduces to the half-line
problem

    -u'' + [ (nu^2 - 1/4)/r^2 + g w(r) ] u = E u,   r in (0, oo),

whose regular solution behaves like r^(nu + 1/2) at the origin.  The
integrator works in Pruefer variables u = exp(l) sin(theta),
u' = exp(l) cos(theta):

    theta' = cos^2(theta) - Q(r) sin^2(theta),
    l'     = (1 + Q(r)) sin(theta) cos(theta),

with Q = (nu^2 - 1/4)/r^2 + g w - E.  The phase crosses each multiple
of pi transversally upward (theta' = 1 there), so node counting is
exact Sturm oscillation theory, and the log-amplitude l never overflows
even for E < 0 where u grows exponentially.

Because w has compact support, the zero-energy solution is an exact
two-power combination a r^(1/2+nu) + b r^(1/2-nu) for r >= r_cut; the
coefficients follow from one 2x2 solve at the support edge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import solve_ivp

from .channels import Channel
from .errors import IllConditioned, StiffnessFailure
from .potential import PotentialSpec

_RTOL = 1e-11
_ATOL = 1e-12
_MAX_THETA_STEP = 0.4   # output sampling keeps |d theta| below this


@dataclass(frozen=True)
class RadialSolution:
    """Regular solution sampled on a node-resolving grid."""

    r_grid: np.ndarray
    u: np.ndarray
    uprime: np.ndarray
    E: float
    nodes: int
    log_scale: float = 0.0   # u_true = exp(log_scale) * u when the range overflows


@dataclass(frozen=True)
class ZeroEnergyCoeffs:
    """Exterior powers of the E = 0 regular solution beyond the support."""

    a: float      # coefficient of r^(1/2 + nu)
    b: float      # coefficient of r^(1/2 - nu)
    cond: float   # condition number of the 2x2 power matching


def _segment_q_coeffs(spec: PotentialSpec, E: float):
    """Polynomial coefficients of g w(r) - E on the first segment of w."""
    if spec.w:
        coeffs = [spec.g * c for c in spec.w[0].coeffs]
    else:
        coeffs = [0.0]
    coeffs[0] -= E
    return coeffs


def frobenius_series(channel: Channel, spec: PotentialSpec, E: float, n_terms: int = 40):
    """Coefficients a_k of u = r^(nu+1/2) sum_k a_k r^k, a_0 = 1."""
    nu = channel.nu
    q = _segment_q_coeffs(spec, E)
    a = [1.0]
    for k in range(1, n_terms):
        s = 0.0
        for m in range(0, min(len(q), k - 1)):
            s += q[m] * a[k - 2 - m]
        a.append(s / (k * (k + 2.0 * nu)))
    return a


def frobenius_start(channel: Channel, spec: PotentialSpec, E: float, r0: float):
    """Regular-solution values (u, u') at a small radius r0.

    The series is summed until the running term falls below 1e-18 of the
    partial sum, so the truncation error at r0 <= 1e-3 min(1, r_cut) is
    far below 1e-14.
    """
    nu = channel.nu
    a = frobenius_series(channel, spec, E)
    s_val = 0.0
    t_val = 0.0
    rk = 1.0
    for k, ak in enumerate(a):
        term = ak * rk
        s_val += term
        t_val += (nu + 0.5 + k) * term
        rk *= r0
        if k > 4 and abs(term) < 1e-18 * abs(s_val):
            break
    u0 = r0 ** (nu + 0.5) * s_val
    u0p = r0 ** (nu - 0.5) * t_val
    return u0, u0p


def _start_state(channel: Channel, spec: PotentialSpec, E: float, r0: float):
    """(theta0, l0) of the regular solution, computed in log space."""
    nu = channel.nu
    a = frobenius_series(channel, spec, E)
    s_val = 0.0
    t_val = 0.0
    rk = 1.0
    for k, ak in enumerate(a):
        term = ak * rk
        s_val += term
        t_val += (nu + 0.5 + k) * term
        rk *= r0
        if k > 4 and abs(term) < 1e-18 * abs(s_val):
            break
    # u = r0^(nu+1/2) S, u' = r0^(nu-1/2) T; theta from the ratio only
    theta0 = math.atan2(r0 * s_val, t_val)
    l0 = (nu - 0.5) * math.log(r0) + 0.5 * math.log((r0 * s_val) ** 2 + t_val**2)
    return theta0, l0


def _breakpoints(spec: PotentialSpec, r0: float, r_end: float):
    pts = [r0]
    for e in spec.segment_edges():
        if r0 < e < r_end:
            pts.append(e)
    pts.append(r_end)
    return pts


def _q_factory(channel: Channel, spec: PotentialSpec, E: float):
    nu2 = channel.nu**2 - 0.25
    segs = spec.w
    g = spec.g
    r_cut = spec.r_cut

    def q_of(r: float) -> float:
        w = 0.0
        if r <= r_cut:
            for seg in segs:
                if seg.r_lo <= r <= seg.r_hi:
                    acc = 0.0
                    for c in reversed(seg.coeffs):
                        acc = acc * r + c
                    w = acc
                    break
        return nu2 / (r * r) + g * w - E

    return q_of


def integrate_prufer(channel, spec, E, r0, r_end, rtol=_RTOL, aux_power=None,
                     start=None):
    """Integrate the Pruefer system; returns sampled (r, theta, l, aux).

    aux_power, when given, accumulates the quadrature
    integral of g w(r) u(r) r^aux_power dr alongside the solution (used
    by the resonance normalization).  start=(u0, u0') overrides the
    regular-solution initial data at r0.
    """
    q_of = _q_factory(channel, spec, E)
    g = spec.g
    w_of = spec.w_value

    if aux_power is None:
        def rhs(r, y):
            th = y[0]
            s, c = math.sin(th), math.cos(th)
            q = q_of(r)
            return (c * c - q * s * s, (1.0 + q) * s * c)
    else:
        def rhs(r, y):
            th = y[0]
            s, c = math.sin(th), math.cos(th)
            q = q_of(r)
            val = g * w_of(r) * math.exp(y[1]) * s * r**aux_power if r <= spec.r_cut else 0.0
            return (c * c - q * s * s, (1.0 + q) * s * c, val)

    if start is None:
        theta0, l0 = _start_state(channel, spec, E, r0)
    else:
        u0, u0p = start
        theta0 = math.atan2(u0, u0p)
        l0 = 0.5 * math.log(u0 * u0 + u0p * u0p)
    y = [theta0, l0] if aux_power is None else [theta0, l0, 0.0]

    rs = [r0]
    thetas = [theta0]
    ells = [l0]
    for lo, hi in zip(_breakpoints(spec, r0, r_end)[:-1], _breakpoints(spec, r0, r_end)[1:]):
        sol = solve_ivp(rhs, (lo, hi), y, method="DOP853", rtol=rtol,
                        atol=_ATOL, dense_output=True)
        if not sol.success:
            raise StiffnessFailure(
                f"integrator failed on [{lo}, {hi}] for nu={channel.nu}, E={E}: {sol.message}")
        for t_lo, t_hi in zip(sol.t[:-1], sol.t[1:]):
            th_lo = sol.sol(t_lo)[0]
            th_hi = sol.sol(t_hi)[0]
            n_sub = max(1, int(abs(th_hi - th_lo) / _MAX_THETA_STEP) + 1)
            for t in np.linspace(t_lo, t_hi, n_sub + 1)[1:]:
                yv = sol.sol(t)
                rs.append(t)
                thetas.append(yv[0])
                ells.append(yv[1])
        y = list(sol.y[:, -1])

    aux = y[2] if aux_power is not None else None
    return np.asarray(rs), np.asarray(thetas), np.asarray(ells), aux


def integrate_channel(channel: Channel, spec: PotentialSpec, E: float,
                      r_end: float, rtol: float = _RTOL) -> RadialSolution:
    """Regular solution of the reduced channel equation up to r_end."""
    r0 = 1e-3 * min(1.0, spec.r_cut)
    rs, thetas, ells = integrate_prufer(channel, spec, E, r0, r_end, rtol=rtol)[:3]

    nodes = int(math.floor(thetas[-1] / math.pi)) - int(math.floor(thetas[0] / math.pi))

    lmax, lmin = float(np.max(ells)), float(np.min(ells))
    shift = 0.0
    if lmax > 600.0 or lmin < -600.0:
        shift = 0.5 * (lmax + lmin)
    amp = np.exp(ells - shift)
    return RadialSolution(
        r_grid=rs,
        u=amp * np.sin(thetas),
        uprime=amp * np.cos(thetas),
        E=float(E),
        nodes=nodes,
        log_scale=shift,
    )


def _power_match(nu: float, r: float, u: float, up: float):
    """Solve u = a r^(1/2+nu) + b r^(1/2-nu) (and u') at radius r."""
    m = np.array([
        [r ** (0.5 + nu), r ** (0.5 - nu)],
        [(0.5 + nu) * r ** (nu - 0.5), (0.5 - nu) * r ** (-nu - 0.5)],
    ])
    cond = float(np.linalg.cond(m))
    if cond > 1e8:
        raise IllConditioned(f"power matching condition number {cond:.3g} at nu={nu}")
    a, b = np.linalg.solve(m, np.array([u, up]))
    return float(a), float(b), cond


def zero_energy_coefficients(channel: Channel, spec: PotentialSpec,
                             rtol: float = _RTOL) -> ZeroEnergyCoeffs:
    """Exterior power coefficients (a, b) of the E = 0 regular solution.

    a = 0 signals a threshold-singular channel: a zero resonance for
    nu <= 1 (the r^(1/2-nu) tail is not square integrable) and a zero
    eigenvalue for nu > 1.
    """
    sol = integrate_channel(channel, spec, 0.0, spec.r_cut, rtol=rtol)
    scale = math.exp(sol.log_scale) if abs(sol.log_scale) < 600 else 1.0
    a, b, cond = _power_match(channel.nu, spec.r_cut,
                              scale * sol.u[-1], scale * sol.uprime[-1])
    return ZeroEnergyCoeffs(a=a, b=b, cond=cond)


def count_negative_eigenvalues(channel: Channel, spec: PotentialSpec,
                               rtol: float = _RTOL, tol_a: float = 1e-7) -> int:
    """Number of E < 0 eigenvalues of the channel (Sturm oscillation).

    All nodes of the zero-energy regular solution inside the support are
    counted by the Pruefer phase; outside the support the solution is a
    two-power combination with at most one zero, located analytically
    from the signs of (a, b).  At numerical criticality (|a| below
    tol_a relative to |a| + |b|) the growing power is absent and no
    exterior zero is counted; the threshold state belongs to the
    resonance/eigenvalue bookkeeping, not to the negative count.
    """
    sol = integrate_channel(channel, spec, 0.0, spec.r_cut, rtol=rtol)
    nodes = sol.nodes
    a, b, _ = _power_match(channel.nu, spec.r_cut, sol.u[-1], sol.uprime[-1])
    if abs(a) >= tol_a * (abs(a) + abs(b)) and b != 0.0 and (a < 0) != (b < 0):
        r_star = (-b / a) ** (1.0 / (2.0 * channel.nu))
        if r_star > spec.r_cut * (1.0 + 1e-12):
            nodes += 1
    return nodes


def coupling_scan(channel: Channel, spec: PotentialSpec, g_values):
    """a(g) over a coupling sweep; used for bracketing criticality."""
    out = []
    for g in g_values:
        coeffs = zero_energy_coefficients(channel, replace(spec, g=float(g)))
        out.append(coeffs.a)
    return np.asarray(out)
