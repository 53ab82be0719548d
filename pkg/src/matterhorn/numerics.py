"""Exact scaled comparisons and floor division for float operands.

Spike thresholds and quantization boundaries all have the form
``value <?> scale * integer``.  Plain float evaluation of ``scale * m`` or
``value / scale`` can be off by one ulp, which is enough to flip a floor or
a threshold crossing right at a code boundary.  The helpers here take the
float fast path when the operands are clearly separated and fall back to
exact rational arithmetic (floats are rationals) for ties and near-ties, so
every comparison is decided as if computed over the reals.
"""

from __future__ import annotations

import math
from fractions import Fraction


def ge_scaled(value: float, scale: float, factor: int) -> bool:
    """Decide ``value >= scale * factor`` exactly.

    ``value`` must be finite or +/-inf (inf compares correctly through the
    float path); ``scale`` must be finite and positive.
    """
    approx = scale * factor
    if not math.isfinite(value):
        return value > approx
    if value != approx:
        # approx is within 0.5 ulp of the real product, so a gap larger
        # than one ulp cannot change the verdict.
        if abs(value - approx) > math.ulp(max(abs(value), abs(approx))):
            return value > approx
    return Fraction(value) >= Fraction(scale) * factor


def floor_ratio(value: float, scale: float) -> int:
    """Mathematical floor of ``value / scale`` for finite floats, scale > 0."""
    ratio = value / scale
    if not math.isfinite(ratio):
        return math.floor(Fraction(value) / Fraction(scale))
    q = math.floor(ratio)
    # Division rounding can land the candidate one code off; fix by exact checks.
    while not ge_scaled(value, scale, q):
        q -= 1
    while ge_scaled(value, scale, q + 1):
        q += 1
    return q
