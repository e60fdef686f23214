"""Potential specification: v(x) = q(theta)/r^2 + g*w(r).

The angular part q is either a constant (any dimension) or an even
trigonometric polynomial q(theta) = q0 + sum_j a_j cos(j*theta) on the
circle (n = 2 only).  The radial short-range part w is piecewise
polynomial on [0, r_cut] and identically zero beyond r_cut, so every
exterior quantity (zero-energy tails, phase matching) is exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import LevscatError


@dataclass(frozen=True)
class AngularPotential:
    """Angular tail q(theta) of the critical 1/r^2 part."""

    kind: str = "constant"          # "constant" | "trig"
    q0: float = 0.0
    cos_coeffs: tuple = ()          # a_j of cos(j*theta), j = 1, 2, ...

    def __post_init__(self):
        if self.kind not in ("constant", "trig"):
            raise LevscatError(f"unknown angular kind {self.kind!r}")

    def mean(self) -> float:
        """Average of q over the sphere (the cos(j*theta) terms average out)."""
        return self.q0


@dataclass(frozen=True)
class Segment:
    """One polynomial piece of w: sum_m coeffs[m] * r^m on [r_lo, r_hi]."""

    r_lo: float
    r_hi: float
    coeffs: tuple

    def value(self, r):
        return np.polynomial.polynomial.polyval(r, np.asarray(self.coeffs, dtype=float))


@dataclass(frozen=True)
class PotentialSpec:
    """Full potential: dimension, angular tail, radial profile and coupling."""

    n: int
    q: AngularPotential
    w: tuple = ()                   # Segment tuple, contiguous from r = 0
    g: float = 0.0
    r_cut: float = 1.0

    def __post_init__(self):
        if self.n < 2:
            raise LevscatError("dimension n must be >= 2")
        object.__setattr__(self, "w", tuple(self.w))

    def w_value(self, r):
        """Radial profile w(r); zero outside the declared segments."""
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        for seg in self.w:
            mask = (r >= seg.r_lo) & (r <= seg.r_hi)
            if np.any(mask):
                out = np.where(mask, seg.value(r), out)
        return out if out.ndim else float(out)

    def segment_edges(self):
        """Sorted breakpoints of w inside (0, r_cut], always ending at r_cut."""
        edges = {self.r_cut}
        for seg in self.w:
            if seg.r_lo > 0:
                edges.add(seg.r_lo)
            edges.add(seg.r_hi)
        return sorted(e for e in edges if 0 < e <= self.r_cut)

    def validate(self) -> list:
        """Structural diagnostics (support, boundedness, contiguity)."""
        problems = []
        if self.n >= 3 and self.q.kind != "constant":
            problems.append("angular potential must be constant for n >= 3")
        if self.r_cut <= 0:
            problems.append("r_cut must be positive")
        prev = 0.0
        for i, seg in enumerate(self.w):
            if seg.r_hi <= seg.r_lo:
                problems.append(f"segment {i} has r_hi <= r_lo")
            if abs(seg.r_lo - prev) > 1e-12 * max(1.0, self.r_cut):
                problems.append(f"segment {i} does not start where the previous one ends")
            if seg.r_hi > self.r_cut * (1 + 1e-12):
                problems.append(f"segment {i} extends beyond the declared support r_cut={self.r_cut}")
            if not all(np.isfinite(seg.coeffs)):
                problems.append(f"segment {i} has non-finite coefficients")
            prev = seg.r_hi
        return problems


def square_well(depth: float = -1.0, radius: float = 1.0) -> tuple:
    """Single constant segment w = depth on [0, radius]."""
    return (Segment(0.0, radius, (float(depth),)),)
