"""Geometric load levels shared by the orientation machinery.

Loads are bucketed into bands ``(L[i-1], L[i]]`` where ``L[0] = 0`` and
``L[i] = (1 + alpha) * L[i-1] + 1``.  Consecutive boundaries are at least 1
apart, so a single in-degree change of ``1/weight <= 1`` moves a vertex by at
most one band.  All band lookups go through the precomputed boundary table
instead of a closed-form log/ceil so that every comparison in the system
agrees about boundary cases.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

# Absolute slack used when comparing a load against a stored boundary.
BOUNDARY_TOL = 1e-9


@dataclass(frozen=True)
class LevelParams:
    """Immutable level table; safe to share read-only across threads."""

    alpha: float
    max_value: float
    boundaries: tuple[float, ...] = field(repr=False)

    @property
    def top_level(self) -> int:
        """Largest band index, i.e. the number of nonzero levels."""
        return len(self.boundaries) - 1

    def level_of(self, x: float) -> int:
        """Band index of ``x``: the unique ``i`` with ``L[i-1] < x <= L[i]``.

        Zero maps to level 0.  Raises ``ValueError`` outside
        ``[0, max_value]``.
        """
        if x < 0:
            raise ValueError(f"level_of: negative value {x}")
        b = self.boundaries
        if x > b[-1] + BOUNDARY_TOL:
            raise ValueError(f"level_of: {x} exceeds max_value {self.max_value}")
        # First boundary >= x (within tolerance).
        lo, hi = 0, len(b) - 1
        while lo < hi:
            mid = (lo + hi) // 2
            if x <= b[mid] + BOUNDARY_TOL:
                hi = mid
            else:
                lo = mid + 1
        return lo

    def level_of_ratio(self, num: float, den: float) -> int:
        """Band index of ``num / den`` without performing the division.

        Comparing ``num <= L[i] * den`` keeps loads stored as exact
        (in-degree, weight) pairs from flapping across a boundary that the
        divided value would straddle.
        """
        if num < 0 or den <= 0:
            raise ValueError(f"level_of_ratio: bad ratio {num}/{den}")
        b = self.boundaries
        if num > (b[-1] + BOUNDARY_TOL) * den:
            raise ValueError(
                f"level_of_ratio: {num}/{den} exceeds max_value {self.max_value}"
            )
        lo, hi = 0, len(b) - 1
        while lo < hi:
            mid = (lo + hi) // 2
            if num <= b[mid] * den + BOUNDARY_TOL * den:
                hi = mid
            else:
                lo = mid + 1
        return lo


def build_level_params(alpha: float, max_value: float) -> LevelParams:
    """Build the boundary table covering ``[0, max_value]``.

    The table has the minimal number of levels whose top boundary reaches
    ``max_value``; its size is O(log(max_value) / alpha).
    """
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if max_value < 1:
        raise ValueError(f"max_value must be at least 1, got {max_value}")
    boundaries = [0.0]
    cur = 0.0
    while cur < max_value - BOUNDARY_TOL:
        cur = (1.0 + alpha) * cur + 1.0
        boundaries.append(cur)
    return LevelParams(alpha=alpha, max_value=max_value, boundaries=tuple(boundaries))


def closed_form_level(alpha: float, x: float) -> int:
    """Log/ceil evaluation of the band index, kept only as a cross-check.

    Production lookups must use :meth:`LevelParams.level_of`; this form can
    disagree with the stored table exactly at boundaries.
    """
    if x <= 0:
        return 0
    return math.ceil(math.log(alpha * x + 1.0) / math.log(1.0 + alpha))
