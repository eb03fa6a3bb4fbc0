"""Doubling ratios of the product measure and the non-doubling scan."""
from __future__ import annotations

from fractions import Fraction
from typing import Iterable

from ..base import PointM, nu
from ..errors import DomainError
from ..jump import SpacePoint, ball_measure, resolving_depth
from ..numeric import Dyadic, as_dyadic, grid_distance
from ..report import ScanReport

SCAN_COLUMNS = [
    "n", "base", "height", "in_E_n", "r_small", "r_large",
    "measure_small", "measure_large", "ratio", "lower_bound", "holds", "status",
]


def is_in_Ek(t, k: int) -> bool:
    """True when every grid point of level ``k`` is at least ``1/2**(k+2)`` from ``t``."""
    d, _ = grid_distance(as_dyadic(t), k)
    return d >= Dyadic(1, k + 2)


def doubling_ratio(center: SpacePoint, r, C) -> Fraction:
    """``mu(B(center, C r)) / mu(B(center, r))``, exact."""
    r = as_dyadic(r)
    C = as_dyadic(C)
    if C <= 0:
        raise DomainError("enlargement factor must be positive")
    return ball_measure(center, C * r) / ball_measure(center, r)


def non_doubling_lower_bound(n: int) -> int:
    """``2 nu(n)/nu(n+1) = 2(n+1)``."""
    return int(2 * nu(n) / nu(n + 1))


def non_doubling_scan(x: PointM, t, levels: Iterable[int]) -> ScanReport:
    """Exact ratio ``mu(B(p, 1/2**n)) / mu(B(p, 1/2**(n+2)))`` for each ``n``.

    Rows where ``t`` is not in ``E_n`` are kept with ``status`` giving the
    reason and no ratio.  Levels the truncation cannot resolve are evaluated on
    the base continued by 1s, which leaves ball measures unchanged.
    """
    t = as_dyadic(t)
    p = SpacePoint(x, t)
    report = ScanReport(list(SCAN_COLUMNS))
    report.metadata.update({
        "depth": x.depth,
        "base": str(x),
        "height": str(t),
        "enlargement": 4,
        "extension_note": ("a row whose small radius is below 1/2**depth is evaluated on the base "
                           "continued by 1s; ball measures do not depend on the continuation"),
        "bound_note": ("lower_bound is 2*nu(n)/nu(n+1) = 2(n+1), the ratio of the two ball "
                       "estimates at the same n; it is not 2*nu(n)/nu(next scanned n)"),
    })
    for n in levels:
        row = {"n": n, "base": str(x), "height": t}
        if n < 0:
            report.add(**row, status="skipped: negative level")
            continue
        in_e = is_in_Ek(t, n)
        row.update(in_E_n=in_e, r_small=Dyadic(1, n + 2), r_large=Dyadic(1, n),
                   lower_bound=non_doubling_lower_bound(n))
        if not in_e:
            report.add(**row, status="skipped: height not in E_n")
            continue
        q = SpacePoint(x.extended(resolving_depth(p, row["r_small"])), t)
        small = ball_measure(q, row["r_small"])
        large = ball_measure(q, row["r_large"])
        ratio = large / small
        report.add(**row, measure_small=small, measure_large=large, ratio=ratio,
                   holds=ratio >= row["lower_bound"], status="ok")
    return report
