"""Solution-quality metrics: primal gap, primal-dual gap and integral,
score-diversity index, and the mean/SE/variance summary used in reports."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import NonMonotoneTrace


def primal_gap(z: float, z_ref: float) -> float:
    """Relative distance of objective z from the reference optimum z_ref.

    Normalized by |z_ref|; when the reference is zero the absolute
    difference is used instead.
    """
    if abs(z_ref) > 0.0:
        return abs(z - z_ref) / abs(z_ref)
    return abs(z - z_ref)


def primal_dual_gap(z: float, z_star: float) -> float:
    """Relative distance between incumbent and dual bound, in [0, 1].

    Defined as |z - z*| / max(|z|, |z*|) when both values are finite,
    nonzero, and share a sign; 1 otherwise (no incumbent, no bound, or
    opposite signs).
    """
    if not (math.isfinite(z) and math.isfinite(z_star)):
        return 1.0
    if z == 0.0 and z_star == 0.0:
        return 0.0
    if z == 0.0 or z_star == 0.0 or (z > 0) != (z_star > 0):
        return 1.0
    return abs(z - z_star) / max(abs(z), abs(z_star))


@dataclass(frozen=True)
class BoundEvent:
    time: float
    primal: float = math.inf
    dual: float = -math.inf


def primal_dual_integral(trace: list[BoundEvent], t_end: float) -> float:
    """Integral of the primal-dual gap over [0, t_end].

    The gap is piecewise constant and left-closed: before the first event
    it is 1 (nothing known), and from each event until the next it is the
    gap of that event's bounds. An empty trace therefore integrates to
    t_end. Raises NonMonotoneTrace if times are not strictly increasing or
    bounds move the wrong way.
    """
    if t_end < 0:
        raise NonMonotoneTrace("t_end must be nonnegative")
    prev_t: Optional[float] = None
    prev_primal, prev_dual = math.inf, -math.inf
    for ev in trace:
        if prev_t is not None and ev.time <= prev_t:
            raise NonMonotoneTrace(f"event times not increasing at t={ev.time}")
        if ev.primal > prev_primal or ev.dual < prev_dual:
            raise NonMonotoneTrace(f"bounds regressed at t={ev.time}")
        prev_t, prev_primal, prev_dual = ev.time, ev.primal, ev.dual
    if trace and trace[-1].time > t_end:
        raise NonMonotoneTrace("t_end precedes the last event")

    total = 0.0
    cursor = 0.0
    gap = 1.0
    for ev in trace:
        if ev.time > cursor:
            total += gap * (ev.time - cursor)
            cursor = ev.time
        gap = primal_dual_gap(ev.primal, ev.dual)
    if t_end > cursor:
        total += gap * (t_end - cursor)
    return total


def diversity_index(scores: list[float]) -> float:
    """Shannon entropy of the score histogram, normalized to [0, 1].

    Uses ceil(sqrt(N)) equal-width bins over [min, max]; H is measured in
    bits and divided by log2(N). A single sample or all-equal scores give
    0; the index reaches 1 when every bin holds an equal share and the bin
    count matches the sample count.
    """
    n = len(scores)
    if n < 1:
        raise ValueError("need at least one score")
    if n == 1:
        return 0.0
    arr = np.asarray(scores, dtype=float)
    lo, hi = float(arr.min()), float(arr.max())
    if lo == hi:
        return 0.0
    bins = math.ceil(math.sqrt(n))
    counts, _ = np.histogram(arr, bins=bins, range=(lo, hi))
    probs = counts[counts > 0] / n
    entropy = float(-(probs * np.log2(probs)).sum())
    return entropy / math.log2(n)


def summarize(samples: list[float]) -> dict:
    """Mean, sample variance (N-1 denominator), and standard error."""
    n = len(samples)
    if n < 1:
        raise ValueError("need at least one sample")
    arr = np.asarray(samples, dtype=float)
    mean = float(arr.mean())
    variance = float(arr.var(ddof=1)) if n > 1 else 0.0
    return {
        "mean": mean,
        "variance": variance,
        "std_error": math.sqrt(variance / n),
    }
