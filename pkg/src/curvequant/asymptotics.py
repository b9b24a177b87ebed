"""Finite-n statistics for quantization dimension and coefficient.

Nothing is extrapolated: each estimate is the statistic at the largest ``n``
in the series, reported together with its full trend.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Literal

from .closedform import circle_error, segment_error, triangle_3k3_error
from .curve import DomainError

SourceTag = Literal["closed-form", "solver"]


@dataclass(frozen=True)
class AsymptoticSeries:
    entries: tuple[tuple[int, float], ...]
    source_tag: SourceTag = "closed-form"

    def __post_init__(self):
        entries = tuple((int(n), float(v)) for n, v in self.entries)
        for (n0, _), (n1, _) in zip(entries, entries[1:]):
            if n1 <= n0:
                raise DomainError("series n must be strictly increasing")
        if any(v <= 0 for _, v in entries):
            raise DomainError("quantization errors must be positive")
        object.__setattr__(self, "entries", entries)

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class Estimate:
    """Statistic at the largest n, its trend over the series, and extras.

    ``local_slope`` (dimension only) is ``2 dlog n / (-dlog V_n)`` between the
    last two usable entries; it removes the additive constant that makes the
    plain statistic converge only logarithmically.
    """

    value: float
    trend: tuple[tuple[int, float], ...]
    excluded: tuple[int, ...] = field(default=())
    local_slope: float | None = None


def dimension_statistic(n: int, error: float) -> float:
    return 2.0 * math.log(n) / -math.log(error)


def estimate_dimension(series: AsymptoticSeries) -> Estimate:
    """``2 log n / (-log V_n)`` at the largest n; entries with ``V_n >= 1`` are skipped."""
    usable = [(n, v) for n, v in series.entries if v < 1]
    excluded = tuple(n for n, v in series.entries if v >= 1)
    if len(usable) < 2:
        raise DomainError("need at least two entries with V_n < 1")
    trend = tuple((n, dimension_statistic(n, v)) for n, v in usable)
    (n0, v0), (n1, v1) = usable[-2], usable[-1]
    slope = 2.0 * (math.log(n1) - math.log(n0)) / (math.log(v0) - math.log(v1))
    return Estimate(trend[-1][1], trend, excluded, slope)


def estimate_coefficient(series: AsymptoticSeries, s: float) -> Estimate:
    """``n^(2/s) V_n`` at the largest n of the series."""
    if not s > 0:
        raise DomainError("s must be positive")
    if len(series) < 1:
        raise DomainError("series is empty")
    trend = tuple((n, n ** (2.0 / s) * v) for n, v in series.entries)
    return Estimate(trend[-1][1], trend)


def series_from(error: Callable[[int], float], ns: Iterable[int], tag: SourceTag = "closed-form") -> AsymptoticSeries:
    return AsymptoticSeries(tuple((n, error(n)) for n in ns), tag)


def segment_series(ns: Iterable[int], a: float = 0.0, b: float = 1.0) -> AsymptoticSeries:
    return series_from(lambda n: segment_error(a, b, n), ns)


def circle_series(ns: Iterable[int]) -> AsymptoticSeries:
    return series_from(circle_error, ns)


def triangle_series(ks: Iterable[int]) -> AsymptoticSeries:
    """Closed-form triangle errors at ``n = 3k + 3``."""
    return AsymptoticSeries(tuple((3 * k + 3, triangle_3k3_error(k)) for k in ks))
