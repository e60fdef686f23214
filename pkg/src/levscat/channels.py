"""Angular eigen-decomposition into radial channels.

Each eigenvalue lambda of -Delta_{S^{n-1}} + q(theta) defines a channel
with index nu = sqrt(lambda + (n-2)^2/4) and angular multiplicity n_nu.
The construction requires lambda_1 > -(n-2)^2/4 so that every nu is
real and strictly positive.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb, sqrt

import numpy as np

from .errors import PositivityViolation, UnsupportedAngular
from .potential import PotentialSpec

_MERGE_TOL = 1e-8       # absolute gap below which eigenvalues are one channel
_HILL_RTOL = 1e-10      # relative convergence target for the Fourier cutoff


@dataclass(frozen=True)
class Channel:
    """One radial channel: angular eigenvalue, index nu, multiplicity."""

    lambda_nu: float
    nu: float
    mult: int


@dataclass(frozen=True)
class ChannelSet:
    """Channels with nu <= truncation_nu_max, ascending in nu."""

    channels: tuple
    sigma1: tuple
    truncation_nu_max: float


def sphere_multiplicity(n: int, ell: int) -> int:
    """Dimension of degree-ell spherical harmonics on S^{n-1}."""
    if n < 2 or ell < 0:
        raise ValueError("need n >= 2 and ell >= 0")
    if ell == 0:
        return 1
    if n == 2:
        return 2
    return (2 * ell + n - 2) * comb(ell + n - 3, ell - 1) // ell


def hill_matrix(q0: float, cos_coeffs, m_max: int) -> np.ndarray:
    """Fourier matrix of -d^2/dtheta^2 + q(theta) on e^{im theta}, |m| <= m_max."""
    size = 2 * m_max + 1
    ms = np.arange(-m_max, m_max + 1)
    mat = np.diag(ms.astype(float) ** 2 + q0)
    for j, aj in enumerate(cos_coeffs, start=1):
        if aj == 0.0:
            continue
        for row in range(size):
            col = row + j
            if col < size:
                mat[row, col] += 0.5 * aj
                mat[col, row] += 0.5 * aj
    return mat


def _hill_eigenvalues(q0: float, cos_coeffs, lam_max: float) -> np.ndarray:
    """Eigenvalues <= lam_max of the Hill operator, converged to _HILL_RTOL."""
    m_max = max(8, int(sqrt(max(lam_max, 1.0))) + 4 * len(cos_coeffs) + 8)
    prev = None
    while m_max <= 4096:
        lams = np.linalg.eigvalsh(hill_matrix(q0, cos_coeffs, m_max))
        keep = lams[lams <= lam_max + 1.0]
        if prev is not None and len(prev) == len(keep):
            scale = np.maximum(np.abs(keep), 1.0)
            if np.max(np.abs(keep - prev) / scale) < _HILL_RTOL:
                return keep
        prev = keep
        m_max *= 2
    return prev


def _merge_degenerate(lams: np.ndarray) -> list:
    """Group near-degenerate eigenvalues; returns (lambda, multiplicity) pairs."""
    groups = []
    for lam in np.sort(lams):
        if groups and abs(lam - groups[-1][0][-1]) < _MERGE_TOL:
            groups[-1][0].append(lam)
        else:
            groups.append([[lam]])
    return [(float(np.mean(g[0])), len(g[0])) for g in groups]


def build_channels(spec: PotentialSpec, nu_max: float) -> ChannelSet:
    """Channel set of -Delta_{S^{n-1}} + q(theta) truncated at nu_max.

    Constant q gives the exact spectrum lambda_ell = ell(ell+n-2) + q0
    with spherical-harmonic multiplicities.  A trigonometric q (n = 2
    only) goes through a dense symmetric eigensolve of the truncated
    Fourier matrix, with the cutoff doubled until the retained
    eigenvalues are converged to 1e-10 relative.

    Raises PositivityViolation when the smallest eigenvalue does not
    exceed -(n-2)^2/4, and UnsupportedAngular for n >= 3 with
    non-constant q.
    """
    n = spec.n
    shift = (n - 2) ** 2 / 4.0
    lam_max = nu_max**2 - shift

    if spec.q.kind == "constant":
        pairs = []
        ell = 0
        while True:
            lam = ell * (ell + n - 2) + spec.q.q0
            if lam > lam_max:
                break
            pairs.append((lam, sphere_multiplicity(n, ell)))
            ell += 1
        lam1 = spec.q.q0
    else:
        if n >= 3:
            raise UnsupportedAngular("trigonometric q is only supported for n = 2")
        lams = _hill_eigenvalues(spec.q.q0, spec.q.cos_coeffs, lam_max)
        lam1 = float(lams[0])
        pairs = _merge_degenerate(lams[lams <= lam_max + 1e-12])

    if lam1 <= -shift:
        raise PositivityViolation(
            f"smallest angular eigenvalue {lam1} must exceed -(n-2)^2/4 = {-shift}"
        )

    channels = tuple(
        Channel(lambda_nu=lam, nu=sqrt(lam + shift), mult=mult)
        for lam, mult in pairs
        if sqrt(lam + shift) <= nu_max
    )
    sigma1 = tuple(ch for ch in channels if ch.nu <= 1.0 + 1e-12)
    return ChannelSet(channels=channels, sigma1=sigma1, truncation_nu_max=float(nu_max))
