"""Zero-energy threshold classification across channels.

A channel is threshold-singular when the growing power drops out of its
zero-energy regular solution (a = 0).  The decaying tail r^(1/2-nu) of
the reduced solution corresponds to r^(-(n-2)/2-nu) upstairs, which is
square integrable at infinity exactly when nu > 1.  Singular channels
therefore split into zero resonances (nu in (0, 1], weight nu in the
sum rule) and zero eigenvalues (nu > 1, integer weight).  With a radial
short-range part every one of the n_nu angular copies shares the same
radial problem, so multiplicities come in blocks of n_nu.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from scipy.optimize import brentq

from .channels import Channel, ChannelSet
from .errors import NoBracket, NotResonant
from .potential import PotentialSpec
from .radial import integrate_prufer, zero_energy_coefficients
from .specfun import c_nu

DEFAULT_TOL_A = 1e-7


@dataclass(frozen=True)
class ChannelThreshold:
    """Zero-energy data of one channel."""

    nu: float
    mult: int
    a: float
    b: float
    klass: str            # "generic" | "resonance" | "eigenvalue"


@dataclass(frozen=True)
class ThresholdReport:
    """Aggregated zero-energy structure of the operator."""

    records: tuple
    N0: int                      # zero-eigenvalue multiplicity
    resonances: tuple            # (varsigma_j, m_j), ascending in varsigma
    mu_r: int                    # total resonance multiplicity

    @property
    def resonance_sum(self) -> float:
        """sum_j varsigma_j m_j, the fractional block of the sum rule."""
        return sum(s * m for s, m in self.resonances)


def _is_singular(a: float, b: float, tol_a: float) -> bool:
    return abs(a) < tol_a * (abs(a) + abs(b))


def classify_threshold(channelset: ChannelSet, spec: PotentialSpec,
                       tol_a: float = DEFAULT_TOL_A) -> ThresholdReport:
    """Classify every channel at E = 0 and aggregate multiplicities."""
    records = []
    n0 = 0
    resonances = []
    for ch in channelset.channels:
        coeffs = zero_energy_coefficients(ch, spec)
        if _is_singular(coeffs.a, coeffs.b, tol_a):
            if ch.nu <= 1.0 + 1e-12:
                klass = "resonance"
                resonances.append((ch.nu, ch.mult))
            else:
                klass = "eigenvalue"
                n0 += ch.mult
        else:
            klass = "generic"
        records.append(ChannelThreshold(nu=ch.nu, mult=ch.mult,
                                        a=coeffs.a, b=coeffs.b, klass=klass))
    resonances.sort()
    return ThresholdReport(
        records=tuple(records),
        N0=n0,
        resonances=tuple(resonances),
        mu_r=sum(m for _, m in resonances),
    )


def critical_coupling(channel: Channel, spec: PotentialSpec,
                      g_lo: float, g_hi: float) -> float:
    """Coupling g* where the channel turns threshold-singular (a(g*) = 0).

    Requires a sign change of a(g) over [g_lo, g_hi]; the root is found
    by Brent bracketing to 1e-12 relative.
    """
    def a_of(g: float) -> float:
        c = zero_energy_coefficients(channel, replace(spec, g=float(g)))
        return c.a / (abs(c.a) + abs(c.b))

    a_lo, a_hi = a_of(g_lo), a_of(g_hi)
    if a_lo == 0.0:
        return float(g_lo)
    if a_hi == 0.0:
        return float(g_hi)
    if (a_lo < 0) == (a_hi < 0):
        raise NoBracket(f"a(g) has the same sign at g={g_lo} and g={g_hi}")
    return float(brentq(a_of, g_lo, g_hi, rtol=1e-12, xtol=1e-300))


def resonance_normalization(channel: Channel, spec: PotentialSpec,
                            tol_a: float = DEFAULT_TOL_A) -> float:
    """Radial pairing |c_nu|^(1/2) * g int w(r) u(r) r^(nu+1/2) dr.

    u is the zero-energy regular solution of a resonant channel (the
    angular copies all share it).  Integrating the pairing by parts
    against the zero-energy equation collapses it to -2 nu b, which is
    nonzero exactly when the resonance is genuine; the quadrature here
    is accumulated inside the ODE solve rather than re-derived from
    that identity, so the two routes stay independent checks.

    Raises NotResonant for channels that are not threshold-singular
    with nu <= 1.
    """
    coeffs = zero_energy_coefficients(channel, spec)
    if channel.nu > 1.0 + 1e-12 or not _is_singular(coeffs.a, coeffs.b, tol_a):
        raise NotResonant(
            f"channel nu={channel.nu} is not a zero resonance (a={coeffs.a:.3g})")
    r0 = 1e-3 * min(1.0, spec.r_cut)
    aux = integrate_prufer(channel, spec, 0.0, r0, spec.r_cut,
                           aux_power=channel.nu + 0.5)[3]
    return float(abs(c_nu(min(channel.nu, 1.0))) ** 0.5 * aux)
