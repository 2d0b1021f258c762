"""Brute-force cross-checks, kept deliberately independent of the fast engine.

``brute_partial_sum`` walks the truncation box point by point with the
membership predicate and plain accumulation: no closed forms, no
Euler-Maclaurin, no compensation.  ``counting_density`` counts lattice points
in a box, the two-dimensional analog of box-counting (natural) density.

The counting ratio is a valid cross-check only for product-like sets, where
the box-counting and series densities agree.  It is NOT a general oracle:
for delimited sets between powers the box-counting ratio tends to a different
limit (1 when the lower exponent is below one), so tests use it only on the
families where agreement holds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sets import GaussSetExpr, grid_mask, predicate

__all__ = ["CountReport", "brute_partial_sum", "counting_density"]

_SUM_SCALE_CAP = 10_000
_COUNT_SCALE_CAP = 100_000


@dataclass(frozen=True)
class CountReport:
    N: int
    count: int
    ratio: float

    def to_row(self) -> dict:
        return {"N": self.N, "count": self.count, "ratio": repr(self.ratio)}


def brute_partial_sum(e: GaussSetExpr, s: float, N: int) -> float:
    """Plain double loop over [1, N]^2: sum of (mn)^(-s) over members of e."""
    if not s > 1.0:
        raise ValueError(f"brute_partial_sum requires s > 1, got {s}")
    if not 1 <= N <= _SUM_SCALE_CAP:
        raise ValueError(f"brute_partial_sum is an oracle: need 1 <= N <= {_SUM_SCALE_CAP}")
    member = predicate(e)
    total = 0.0
    neg_s = -s
    for m in range(1, N + 1):
        row = 0.0
        for n in range(1, N + 1):
            if member(m, n):
                row += float(m * n) ** neg_s
        total += row
    return total


def counting_density(e: GaussSetExpr, N: int) -> CountReport:
    """Exact member count over [1, N]^2 and the box ratio count/N^2."""
    if not 1 <= N <= _COUNT_SCALE_CAP:
        raise ValueError(f"counting_density is an oracle: need 1 <= N <= {_COUNT_SCALE_CAP}")
    chunk = max(1, min(N, 8_000_000 // N))
    count = 0
    for lo in range(1, N + 1, chunk):
        hi = min(lo + chunk - 1, N)
        count += int(np.count_nonzero(grid_mask(e, lo, hi, N)))
    return CountReport(N=N, count=count, ratio=count / (N * N))
