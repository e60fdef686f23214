"""Spectral shift function assembly and the Levinson sum rule.

The spectral shift function of the pair (full operator, inverse-square
reference) is realized channel by channel as

    xi(lambda) = -(1/pi) sum_nu n_nu delta_nu(sqrt(lambda)),

with branch-continuous phases normalized to vanish at high energy.  Its
derivative grows like lambda^(n/2 - 2) at high energy, so the Levinson
integral is regularized by subtracting fitted counterterms
c_j lambda^(n/2 - j - 1), j = 1 .. [n/2] (for even n the j = n/2
coefficient vanishes and is only asserted, not subtracted).  The
verified identity, with the orientation fixed by the one-bound-state
benchmark (a single bound state gives -1), is

    int_0^oo ( d/dlambda [ -xi ] - counterterms ) dlambda
        = -( N_- + N_0 + sum_j varsigma_j m_j ) + beta_{n/2},

where N_- counts negative eigenvalues with angular multiplicity, N_0 is
the zero-eigenvalue multiplicity (singular channels with nu > 1), the
varsigma-sum collects zero resonances with their fractional weights,
and beta is the even-dimension heat-coefficient correction.  The left
side is evaluated as

    lhs = xi(lambda_min) - [ xi(Lambda) - sum_j c_j Lambda^(n/2-j)/(n/2-j) ]

with every systematic error (channel truncation, threshold evaluation
at lambda_min, counterterm tail, fit uncertainty) aggregated into an
explicit budget.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .channels import ChannelSet, build_channels
from .errors import OddDimension, PoorFit, TruncationTooCoarse
from .potential import PotentialSpec
from .radial import count_negative_eigenvalues
from .scattering import born_phase, phase_curve
from .threshold import ThresholdReport, classify_threshold

_DROP_TOL = 1e-6        # channel dropped once max_k |born| falls below this
_ACTIVE_TOL = 1e-12     # below this |born| the phase is taken as zero
_BOUND_LIMIT = 1e-4     # recorded truncation bound must stay below this


@dataclass(frozen=True)
class SSFCurve:
    """xi(lambda) and its log-grid derivative, with truncation bookkeeping."""

    lambda_grid: np.ndarray
    xi: np.ndarray
    xiprime: np.ndarray
    n: int
    truncation_bound: float
    phase_curves: tuple   # (Channel, k_active_lo, PhaseCurve) per channel
    edge_scale: float = 1.0   # support radius; sets the sin(2 k r_cut) period


@dataclass(frozen=True)
class LevinsonReport:
    """One full sum-rule verification."""

    lhs: float
    fitted_c: tuple          # (value, sigma) per counterterm, sentinel last
    beta: float
    N_minus: int
    N0: int
    resonance_sum: float
    rhs: float
    residual: float
    error_budget: float
    residual_budget: float
    flagged: bool
    lambda_min: float
    lambda_top: float
    threshold: ThresholdReport
    curve: SSFCurve = None

    def to_dict(self) -> dict:
        return {
            "lhs": self.lhs,
            "fitted_c": [[c, s] for c, s in self.fitted_c],
            "beta": self.beta,
            "N_minus": self.N_minus,
            "N0": self.N0,
            "resonance_sum": self.resonance_sum,
            "rhs": self.rhs,
            "residual": self.residual,
            "error_budget": self.error_budget,
            "residual_budget": self.residual_budget,
            "flagged": self.flagged,
            "lambda_min": self.lambda_min,
            "lambda_top": self.lambda_top,
            "resonances": [[s, m] for s, m in self.threshold.resonances],
        }


def _coarse_born_max(channel, spec, k_grid):
    """max |born| over a 16-point coarse subgrid (always includes k_top)."""
    ks = np.geomspace(k_grid[0], k_grid[-1], 16)
    vals = [abs(born_phase(channel, spec, k, rel_tol=1e-6)) for k in ks]
    return max(vals), ks, np.asarray(vals)


def _activation_k(ks, vals, k_grid):
    """Lowest k where the channel contributes more than _ACTIVE_TOL."""
    above = np.nonzero(vals >= _ACTIVE_TOL)[0]
    if len(above) == 0:
        return None
    idx = above[0]
    return k_grid[0] if idx == 0 else ks[idx - 1]


def _curve_job(args):
    channel, spec, ks, force_ode = args
    return phase_curve(channel, spec, ks, force_ode=force_ode)


def build_ssf(channelset: ChannelSet, spec: PotentialSpec, lambda_grid,
              force_ode: bool = False, threads: int = 1) -> SSFCurve:
    """Assemble xi on lambda_grid from branch-continuous channel phases.

    Channels whose Born magnitude never exceeds 1e-6 are dropped with
    their contribution added to the recorded truncation bound; raises
    TruncationTooCoarse if that bound exceeds 1e-4 (including a
    geometric estimate of everything beyond the channel set).
    """
    lam = np.sort(np.asarray(lambda_grid, dtype=float))
    k_grid = np.sqrt(lam)

    jobs = []
    meta = []
    bound = 0.0
    drop_run = []           # bmax of the trailing run of dropped channels
    dropped_tail = False
    for ch in channelset.channels:
        bmax, ks, vals = _coarse_born_max(ch, spec, k_grid)
        # dropping and low-k zeroing are only sound for channels whose
        # reduced potential is nonnegative (strictly generic, no bound
        # states): anything that can carry threshold structure is
        # computed honestly on the full grid.  High multiplicities
        # tighten the drop rule so the recorded bound stays within its
        # limit even for deep energy windows.
        trivially_generic = _q_nonneg(ch, spec)
        drop_tol = _DROP_TOL * min(1.0, 30.0 / ch.mult)
        if bmax < drop_tol and trivially_generic:
            bound += ch.mult * bmax / math.pi
            drop_run.append(bmax)
            if len(drop_run) >= 2:
                # everything higher shrinks at least geometrically
                ratio = min(0.9, drop_run[-1] / max(drop_run[-2], 1e-300))
                bound += 4.0 * ch.mult * bmax / math.pi * ratio / (1.0 - ratio)
                dropped_tail = True
                break
            continue
        drop_run = []
        if trivially_generic:
            k_act = _activation_k(ks, vals, k_grid)
            sub = k_grid[k_grid >= k_act] if k_act is not None else k_grid
            bound += ch.mult * _ACTIVE_TOL / math.pi   # phases zeroed below k_act
        else:
            sub = k_grid
        jobs.append((ch, spec, sub, force_ode))
        meta.append((ch, sub[0]))

    if not dropped_tail:
        if not drop_run:
            raise TruncationTooCoarse(
                f"highest channel nu={channelset.channels[-1].nu} still active"
                f" (born max {_coarse_born_max(channelset.channels[-1], spec, k_grid)[0]:.2e});"
                " raise nu_max")
        # one trailing drop: bound the unseen tail with a worst-case ratio
        bound += 36.0 * channelset.channels[-1].mult * drop_run[-1] / math.pi

    if bound > _BOUND_LIMIT:
        raise TruncationTooCoarse(f"truncation bound {bound:.3e} exceeds {_BOUND_LIMIT}")

    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            curves = list(pool.map(_curve_job, jobs, chunksize=1))
    else:
        curves = [_curve_job(j) for j in jobs]

    xi = np.zeros_like(lam)
    records = []
    for (ch, k_lo), curve in zip(meta, curves):
        delta = np.zeros_like(k_grid)
        idx = np.searchsorted(curve.k_grid, k_grid[k_grid >= k_lo])
        delta[k_grid >= k_lo] = curve.delta[idx]
        xi -= ch.mult / math.pi * delta
        records.append((ch, k_lo, curve))

    xiprime = np.gradient(xi, lam)
    return SSFCurve(lambda_grid=lam, xi=xi, xiprime=xiprime, n=spec.n,
                    truncation_bound=bound, phase_curves=tuple(records),
                    edge_scale=spec.r_cut)


def _period_smoothed_xiprime(curve: SSFCurve, lam):
    """xi' averaged over one edge-oscillation period around each point.

    A sharp support edge puts a zero-mean sin(2 k r_cut) ripple on xi';
    the wide centered difference over k +- pi/(2 r_cut) integrates it
    out while reproducing smooth power laws to a few percent.
    """
    half = 0.5 * math.pi / curve.edge_scale
    k = np.sqrt(lam)
    k_hi = np.minimum(k + half, math.sqrt(curve.lambda_grid[-1]))
    k_lo = np.maximum(k_hi - 2.0 * half, math.sqrt(curve.lambda_grid[0]))
    xi_hi = np.interp(k_hi**2, curve.lambda_grid, curve.xi)
    xi_lo = np.interp(k_lo**2, curve.lambda_grid, curve.xi)
    return (xi_hi - xi_lo) / (k_hi**2 - k_lo**2)


def _regularization_terms(powers, aux, n):
    """Antiderivative pieces of the fitted model, split by kind.

    Returns (power terms (c, e != 0), decaying log terms).  The
    exponent-zero coefficient of even n (the parity claim says it
    vanishes) is deliberately NOT subtracted: integrating it would add a
    spurious c log(lambda) to the limit; it is asserted through the
    error budget instead.
    """
    sub_terms = []
    for j, (c, _sig) in enumerate(powers, start=1):
        e = n / 2.0 - j
        if abs(e) > 1e-9:
            sub_terms.append((c, e))
    return sub_terms, tuple(aux)


def _regularized_xi_fn(curve: SSFCurve, sub_terms, log_terms):
    """xi minus the antiderivative of the fitted high-energy model."""
    def fn(lam):
        lam = np.asarray(lam, dtype=float)
        out = np.interp(lam, curve.lambda_grid, curve.xi)
        for c, e in sub_terms:
            out = out - c * lam**e / e
        for c, e in log_terms:
            # antiderivative of c lambda^e log(lambda), e < -1 here
            out = out - c * lam ** (e + 1.0) * (np.log(lam) - 1.0 / (e + 1.0)) / (e + 1.0)
        return out
    return fn


def _tail_average(curve: SSFCurve, reg_fn, k_hi: float) -> float:
    """Ripple-free value of the regularized xi near k_hi.

    A sharp support edge puts zero-mean sin(2 k r_cut) oscillations on
    xi.  Over the top three ripple periods the curve is regressed on
    {1, k - kbar, cos/sin(2 r_cut k), cos/sin(4 r_cut k)}; the constant
    term is the smooth value, immune to both the ripple and the sparse
    per-period sampling that plain averaging suffers from.
    """
    k_all = np.sqrt(curve.lambda_grid)
    span = 3.0 * math.pi / curve.edge_scale
    mask = (k_all >= k_hi - span) & (k_all <= k_hi)
    kw = k_all[mask]
    g = reg_fn(curve.lambda_grid[mask])
    if len(kw) < 12:
        return float(np.trapz(g, kw) / (kw[-1] - kw[0]))
    kc = kw - float(np.mean(kw))
    w2 = 2.0 * curve.edge_scale * kw
    cols = np.column_stack([
        np.ones_like(kw), kc,
        np.cos(w2), np.sin(w2),
        np.cos(2.0 * w2), np.sin(2.0 * w2),
    ])
    coef, *_ = np.linalg.lstsq(cols, g, rcond=None)
    return float(coef[0])


def _fit_full(curve: SSFCurve, window):
    """Counterterm fit; returns ((c, sigma) per power term, aux log terms).

    Power basis lambda^(n/2-j-1), j = 1..[n/2]+1; the last power term is
    the fit-quality sentinel.  For even n one auxiliary term
    lambda^(sentinel exponent) log(lambda) absorbs the logarithmic
    structure that even dimensions carry at that order (it is used for
    the tail completion but not reported among the c_j).

    Fit quality is measured by what the sum rule needs: the regularized
    antiderivative xi - F must be constant across the window.  Its
    drift between period-averaged stations, relative to the curve
    scale, is the reported residual; above 1e-2 raises PoorFit.
    """
    lam_lo, lam_hi = window
    n = curve.n
    mask = (curve.lambda_grid >= lam_lo) & (curve.lambda_grid <= lam_hi)
    lam = curve.lambda_grid[mask]
    y = curve.xiprime[mask]
    n_terms = n // 2 + 1
    exps = [n / 2.0 - j - 1.0 for j in range(1, n_terms + 1)]
    cols = [lam**e for e in exps]
    aux_exps = [exps[-1]] if n % 2 == 0 else []
    cols += [lam**e * np.log(lam) for e in aux_exps]
    a = np.column_stack(cols)
    wgt = lam ** (2.0 - n / 2.0)   # equalizes the leading term across the window
    aw = a * wgt[:, None]
    yw = y * wgt
    if float(np.linalg.norm(yw)) < 1e-12:
        return tuple((0.0, 0.0) for _ in exps), tuple((0.0, e) for e in aux_exps)
    coef, res, *_ = np.linalg.lstsq(aw, yw, rcond=None)
    resid = aw @ coef - yw
    dof = max(len(yw) - len(cols), 1)
    cov = np.linalg.inv(aw.T @ aw) * float(resid @ resid) / dof
    sig = np.sqrt(np.diag(cov))
    powers = tuple((float(c), float(s)) for c, s in zip(coef[:n_terms], sig[:n_terms]))
    aux = tuple((float(c), e) for c, e in zip(coef[n_terms:], aux_exps))

    sub_terms, log_terms = _regularization_terms(powers, aux, n)
    reg_fn = _regularized_xi_fn(curve, sub_terms, log_terms)
    # flatness is demanded where the completed model feeds the sum rule:
    # the top octave of the window (lower stations still see the
    # pre-asymptotic transition for strong coupling)
    k_hi = math.sqrt(lam_hi)
    k_lo = max(math.sqrt(lam_lo) + 1.5 * math.pi / curve.edge_scale, 0.5 * k_hi)
    stations = [_tail_average(curve, reg_fn, k) for k in np.geomspace(k_lo, k_hi, 4)]
    xi_scale = 1.0 + float(np.max(np.abs(curve.xi)))
    rel = (max(stations) - min(stations)) / xi_scale
    if rel > 1e-2:
        raise PoorFit(f"counterterm fit relative residual {rel:.3e}")
    return powers, aux


def fit_counterterms(curve: SSFCurve, window) -> tuple:
    """Weighted least squares of xi' on lambda^(n/2-j-1), j = 1..[n/2]+1.

    The extra basis term beyond the subtraction order is a fit-quality
    sentinel.  Returns ((value, sigma), ...) ordered by j; raises
    PoorFit when the (period-smoothed) relative residual exceeds 1e-2.
    """
    return _fit_full(curve, window)[0]


def beta_heat(spec: PotentialSpec, n: int = None) -> float:
    """Heat-coefficient correction beta_(n/2) for even dimension.

    The difference potential of the pair is V = g w.  Reducing the
    symbol-calculus coefficients to radial quadratures (exact here, the
    segments are polynomial):

        n = 2:  beta_1 = -(1/2) int_0^oo g w(r) r dr
        n = 4:  beta_2 = (1/8) int_0^oo [2 q0 g w(r) r + (g w(r))^2 r^3] dr

    The n = 2 sign comes from the odd-derivative moment
    int f'(u) du = f(oo) - f(0) = -1 of the spectral cutoff; the n = 4
    moment int f''(u) u du = +1 keeps that sign positive.
    """
    if n is None:
        n = spec.n
    if n not in (2, 4):
        raise OddDimension(f"heat correction implemented for n in {{2, 4}}, got {n}")
    poly = np.polynomial.polynomial
    if n == 2:
        total = 0.0
        for seg in spec.w:
            p = poly.polymulx(np.asarray(seg.coeffs, dtype=float))  # w(r) * r
            total += poly.polyval(seg.r_hi, poly.polyint(p)) - poly.polyval(seg.r_lo, poly.polyint(p))
        return -0.5 * spec.g * total
    total = 0.0
    q0 = spec.q.mean()
    for seg in spec.w:
        w = np.asarray(seg.coeffs, dtype=float)
        p = poly.polyadd(2.0 * q0 * spec.g * poly.polymulx(w),
                         spec.g**2 * poly.polymulx(poly.polymulx(poly.polymulx(poly.polymul(w, w)))))
        ip = poly.polyint(p)
        total += poly.polyval(seg.r_hi, ip) - poly.polyval(seg.r_lo, ip)
    return total / 8.0


def low_energy_exponent(curve: SSFCurve, window=(1e-6, 1e-4)) -> float:
    """Slope p of log|xi'| vs log lambda near threshold (NaN if xi' = 0)."""
    mask = ((curve.lambda_grid >= window[0]) & (curve.lambda_grid <= window[1])
            & (np.abs(curve.xiprime) > 1e-14))
    if np.count_nonzero(mask) < 4:
        return float("nan")
    x = np.log(curve.lambda_grid[mask])
    y = np.log(np.abs(curve.xiprime[mask]))
    return float(np.polynomial.polynomial.polyfit(x, y, 1)[1])


def _threshold_jump_budget(curve: SSFCurve) -> float:
    """Estimated |xi(lambda_min) - xi(0+)| by geometric extrapolation."""
    lam = curve.lambda_grid
    i10 = int(np.searchsorted(lam, lam[0] * 10.0))
    i100 = int(np.searchsorted(lam, lam[0] * 100.0))
    if i100 >= len(lam):
        return 0.0
    d1 = curve.xi[i10] - curve.xi[0]
    d2 = curve.xi[i100] - curve.xi[i10]
    if abs(d1) < 1e-14:
        return 3.0 * abs(d2)
    q = d2 / d1
    if 1.05 < q < 50.0:
        return abs(d1 / (q - 1.0))
    return 3.0 * abs(d1)


def _default_nu_max(spec: PotentialSpec, k_top: float) -> float:
    x = k_top * spec.r_cut
    return x + 5.5 * (0.5 * x) ** (1.0 / 3.0) + 8.0


def _q_nonneg(channel, spec) -> bool:
    """True when the reduced potential Q(r) >= 0 everywhere.

    Q >= 0 makes the channel form-positive (no negative eigenvalues) and
    keeps u' of the regular solution increasing, which forces the
    growing-power coefficient a > 0: the channel is strictly generic,
    its phase vanishes at threshold, and it may be skipped in the
    negative count and zeroed below its Born activation momentum.
    Requires nu >= 1/2; below that the reduced centrifugal term is
    attractive near the origin and Q >= 0 cannot hold.
    """
    nu2 = channel.nu**2 - 0.25
    if nu2 < 0.0:
        return False
    for seg in spec.w:
        rs = np.linspace(max(seg.r_lo, 1e-9), seg.r_hi, 257)
        q = nu2 / rs**2 + spec.g * seg.value(rs)
        if np.min(q) < 0.0:
            return False
    return True


def levinson_check(spec: PotentialSpec, channelset: ChannelSet = None, *,
                   lambda_min: float = 1e-6, lambda_top: float = 2500.0,
                   points_per_decade: int = 400, low_ppd: int = 60,
                   fit_lo: float = None, tol_a: float = 1e-7,
                   residual_budget: float = 1e-2, tol_scale: float = 1.0,
                   force_ode: bool = False, threads: int = 1) -> LevinsonReport:
    """Verify the generalized Levinson identity for one potential.

    tol_scale < 1 tightens every accuracy knob for convergence studies:
    the integration top scales as lambda_top/s^2 and the threshold
    endpoint as lambda_min*s^4, so every power-law threshold l error
    k^p with p >= 1/2 shrinks by at least the factor s.  (Logarithmic
    threshold corrections of exactly-critical integer channels decay
    like 1/|log lambda_min| and cannot be halved this way within double
    precision; their size is carried by the error budget instead.)
    """
    s = tol_scale
    lam_top = lambda_top / (s * s)
    lam_min = lambda_min * s**4 if lambda_min < 1.0 else lambda_min
    n = spec.n

    if channelset is None or tol_scale != 1.0:
        channelset = build_channels(spec, _default_nu_max(spec, math.sqrt(lam_top)))

    dense_lo = min(1e-6, lam_top * 4e-10)
    if lam_min < dense_lo:
        n_low = max(2, int(low_ppd * math.log10(dense_lo / lam_min)))
        n_hi = max(2, int(points_per_decade * math.log10(lam_top / dense_lo)))
        grid = np.concatenate([
            np.geomspace(lam_min, dense_lo, n_low, endpoint=False),
            np.geomspace(dense_lo, lam_top, n_hi),
        ])
    else:
        n_pts = max(2, int(points_per_decade * math.log10(lam_top / lam_min)))
        grid = np.geomspace(lam_min, lam_top, n_pts)

    curve = build_ssf(channelset, spec, grid, force_ode=force_ode, threads=threads)

    if fit_lo is None:
        # the window must sit in the Born regime: well above the
        # potential scale, not just above the spec floor of 25.  Odd n
        # carries a slowly-decaying lambda^(n/2-2) term whose purity
        # needs more headroom than the integer-power tails of even n.
        v_scale = max((abs(spec.g * c) for seg in spec.w for c in seg.coeffs),
                      default=0.0)
        fit_lo = max(25.0, lam_top / 100.0, (30.0 if n % 2 else 8.0) * v_scale)
    fitted, aux_terms = _fit_full(curve, (fit_lo, lam_top))

    # regularization: subtract the antiderivative of every fitted term
    # (the decaying sentinel and log terms complete the integral beyond
    # Lambda); the near-zero exponent of even n is asserted through the
    # budget instead of dividing by the vanishing exponent
    sub_terms, log_terms = _regularization_terms(fitted, aux_terms, n)
    # even n: the exponent-zero coefficient is asserted zero (parity
    # claim); its fitted magnitude is charged over the full log range
    log_budget = sum(abs(c) * math.log(lam_top / lam_min)
                     for j, (c, _s) in enumerate(fitted, start=1)
                     if abs(n / 2.0 - j) <= 1e-9)
    sigma_budget = 0.0
    tail_budget = 0.0
    for j, (c, sig) in enumerate(fitted, start=1):
        e = n / 2.0 - j
        if abs(e) > 1e-9:
            sigma_budget += abs(sig) * lam_top**e / abs(e)
            if e < 0:
                # remainder beyond the sentinel order; 20% self-estimate
                tail_budget += 0.2 * abs(c) * lam_top**e / abs(e)

    # the support edge rides a zero-mean sin(2 k r_cut) ripple on xi;
    # evaluate the regularized tail averaged over one full period in k,
    # and charge the drift between two stations to the budget
    reg_fn = _regularized_xi_fn(curve, sub_terms, log_terms)
    k_top = math.sqrt(lam_top)
    tail_value = _tail_average(curve, reg_fn, k_top)
    tail_budget += abs(tail_value - _tail_average(
        curve, reg_fn, k_top - math.pi / spec.r_cut))

    lhs = float(curve.xi[0] - tail_value)

    report_thr = classify_threshold(channelset, spec, tol_a=tol_a)
    n_minus = 0
    for ch in channelset.channels:
        if _q_nonneg(ch, spec):
            continue
        n_minus += ch.mult * count_negative_eigenvalues(ch, spec, tol_a=tol_a)

    beta = beta_heat(spec, n) if n % 2 == 0 else 0.0
    rhs = -(n_minus + report_thr.N0 + report_thr.resonance_sum) + beta
    residual = lhs - rhs

    budget = (curve.truncation_bound + _threshold_jump_budget(curve)
              + tail_budget + sigma_budget + log_budget + 1e-6 * s)
    return LevinsonReport(
        lhs=lhs, fitted_c=fitted, beta=beta, N_minus=n_minus,
        N0=report_thr.N0, resonance_sum=report_thr.resonance_sum,
        rhs=rhs, residual=float(residual), error_budget=float(budget),
        residual_budget=residual_budget,
        flagged=bool(abs(residual) > residual_budget),
        lambda_min=lam_min, lambda_top=lam_top, threshold=report_thr,
        curve=curve,
    )
