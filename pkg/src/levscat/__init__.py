"""Spectral scattering toolkit for potentials with inverse-square tails.

Computes channel phase shifts, bound-state counts and zero-energy
threshold classifications for Schrodinger operators
-Delta + q(theta)/r^2 + g w(r), assembles the spectral shift function,
and verifies the generalized Levinson sum rule including fractional
resonance weights.
"""

__version__ = "0.1.0"

from .channels import Channel, ChannelSet, build_channels, sphere_multiplicity
from .errors import LevscatError
from .greens import kernel, zero_energy_kernel, extract_gnu0, extract_g11
from .potential import AngularPotential, PotentialSpec, Segment, square_well
from .radial import (RadialSolution, ZeroEnergyCoeffs, count_negative_eigenvalues,
                     frobenius_start, integrate_channel, zero_energy_coefficients)
from .scattering import PhaseCurve, born_phase, phase_curve, phase_shift_mod_pi
from .specfun import BesselPair, bessel_ik, bessel_j, bessel_jy, c_nu, gamma_fn
from .ssf import (LevinsonReport, SSFCurve, beta_heat, build_ssf, fit_counterterms,
                  levinson_check, low_energy_exponent)
from .threshold import (ThresholdReport, classify_threshold, critical_coupling,
                        resonance_normalization)

__all__ = [
    "AngularPotential", "BesselPair", "Channel", "ChannelSet", "LevinsonReport",
    "LevscatError", "PhaseCurve", "PotentialSpec", "RadialSolution", "SSFCurve",
    "Segment", "ThresholdReport", "ZeroEnergyCoeffs", "bessel_ik", "bessel_j",
    "bessel_jy", "beta_heat", "born_phase", "build_channels", "build_ssf",
    "c_nu", "classify_threshold", "count_negative_eigenvalues",
    "critical_coupling", "extract_g11", "extract_gnu0", "fit_counterterms",
    "frobenius_start", "gamma_fn", "integrate_channel", "kernel",
    "levinson_check", "low_energy_exponent", "phase_curve",
    "phase_shift_mod_pi", "resonance_normalization", "sphere_multiplicity",
    "square_well", "zero_energy_coefficients", "zero_energy_kernel",
]
