"""Linear granularities, conversion rules, and hierarchy ladders.

A hierarchy is an ordered ladder of linear granularities over a single
integer index. Granule 0 of every rung starts at index 0 (the declared
origin instant), so all cyclic counters are zero at the origin. Each
rung carries the conversion rule to the rung above it: either a constant
period or an irregular cardinality table that repeats after a fixed
number of granules.

An irregular rule may declare a ``unit`` rung below its carrier. The
cardinalities then count granules of that unit rung, and the rungs
strictly between the unit and the rule's target do not nest into the
target (they "slide" across its boundaries). This is how a ladder such
as hour/day/week/month can hold both origin-aligned weeks (for
day-of-week) and true calendar months (for day-of-month) at once.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from functools import cached_property
from math import prod
from typing import Union

import numpy as np

from .errors import ComputationError, ValidationError


@dataclass(frozen=True)
class ConstantPeriod:
    """Exactly ``period`` granules of this rung per granule of the next."""

    period: int


@dataclass(frozen=True)
class IrregularMapping:
    """Granule sizes of the next rung, repeating after the whole table.

    ``cardinalities[w]`` is the size of the next rung's granule ``w``,
    measured in granules of ``unit`` (the carrying rung itself when
    ``unit`` is None). The table repeats with period ``repetition``.
    """

    cardinalities: tuple[int, ...]
    unit: str | None = None

    @property
    def repetition(self) -> int:
        return len(self.cardinalities)


ConversionRule = Union[ConstantPeriod, IrregularMapping]


@dataclass(frozen=True)
class Rung:
    """A linear granularity plus its conversion rule to the rung above."""

    name: str
    rule: ConversionRule


@dataclass(frozen=True)
class Hierarchy:
    """Ordered ladder of rungs, bottom first; top rung carries period 1.

    ``labels`` maps cyclic granularity names (e.g. ``day_week``) to either
    an explicit label tuple or an integer presentation offset.
    """

    name: str
    rungs: tuple[Rung, ...]
    origin: str = ""
    origin_note: str = ""
    labels: dict[str, object] = field(default_factory=dict)

    def position(self, rung: str) -> int:
        for i, r in enumerate(self.rungs):
            if r.name == rung:
                return i
        raise ValidationError("unknown-rung", f"no rung named {rung!r} in hierarchy {self.name!r}")

    @property
    def rung_names(self) -> tuple[str, ...]:
        return tuple(r.name for r in self.rungs)

    @property
    def bottom(self) -> str:
        return self.rungs[0].name

    def bottom_units(self, rung: str) -> int | None:
        """Index-set size of one granule of ``rung``, or None if variable."""
        rep = self._reps[self.position(rung)]
        return rep.block if isinstance(rep, _Regular) else None

    def anchor_block(self, rung: str) -> int:
        """Finest constant block (in bottom units) on which ``rung``'s granule index is constant."""
        return _anchor_block(self._reps[self.position(rung)])

    @cached_property
    def _reps(self) -> tuple["_Rep", ...]:
        """Per-rung granule locators, built bottom-up along the ladder."""
        reps: list[_Rep] = [_Regular(1)]
        for pos, rung in enumerate(self.rungs[:-1]):
            rule = rung.rule
            below = reps[pos]
            if isinstance(rule, ConstantPeriod):
                if isinstance(below, _Regular):
                    reps.append(_Regular(below.block * rule.period))
                elif isinstance(below, _Irregular):
                    reps.append(_Grouped(below, rule.period))
                else:
                    reps.append(_Grouped(below.base, below.group * rule.period))
            else:
                unit = rule.unit or rung.name
                upos = self.position(unit)
                if upos > pos:
                    raise ValidationError(
                        "bad-unit", f"unit {unit!r} is above the rung {rung.name!r} carrying the rule"
                    )
                reps.append(_Irregular(reps[upos], rule.cardinalities))
        return tuple(reps)


class _Regular:
    """Granules are fixed blocks of ``block`` bottom units."""

    __slots__ = ("block",)

    def __init__(self, block: int):
        self.block = block

    def idx(self, z):
        return z // self.block

    def start(self, i):
        return i * self.block


class _Irregular:
    """Granules sized by a repeating cardinality table over anchor granules."""

    __slots__ = ("anchor", "cards", "prefix", "cycle", "repetition")

    def __init__(self, anchor, cardinalities: tuple[int, ...]):
        self.anchor = anchor
        self.cards = np.asarray(cardinalities, dtype=np.int64)
        self.prefix = np.concatenate(([0], np.cumsum(self.cards)))
        self.cycle = int(self.prefix[-1])
        self.repetition = len(cardinalities)

    def idx(self, z):
        a = self.anchor.idx(z)
        cyc, within = np.divmod(a, self.cycle)
        j = np.searchsorted(self.prefix, within, side="right") - 1
        return cyc * self.repetition + j

    def start(self, i):
        cyc, j = np.divmod(i, self.repetition)
        return self.anchor.start(cyc * self.cycle + self.prefix[j])


class _Grouped:
    """Constant-size groups of the granules of an irregular rep."""

    __slots__ = ("base", "group")

    def __init__(self, base: _Irregular, group: int):
        self.base = base
        self.group = group

    def idx(self, z):
        return self.base.idx(z) // self.group

    def start(self, i):
        return self.base.start(i * self.group)


_Rep = Union[_Regular, _Irregular, _Grouped]


def _anchor_block(rep: _Rep) -> int:
    while not isinstance(rep, _Regular):
        rep = rep.anchor if isinstance(rep, _Irregular) else rep.base.anchor
    return rep.block


def validate_hierarchy(h: Hierarchy) -> Hierarchy:
    """Check ladder well-formedness; return ``h`` unchanged if sound."""
    if len(h.rungs) < 2:
        raise ValidationError("empty-hierarchy", f"hierarchy {h.name!r} needs at least 2 rungs")
    seen: set[str] = set()
    for rung in h.rungs:
        if rung.name in seen:
            raise ValidationError("duplicate-rung", f"rung {rung.name!r} declared twice")
        seen.add(rung.name)
    top = h.rungs[-1]
    if not (isinstance(top.rule, ConstantPeriod) and top.rule.period == 1):
        raise ValidationError(
            "bad-sentinel", f"top rung {top.name!r} must carry the sentinel period 1"
        )
    for rung in h.rungs[:-1]:
        rule = rung.rule
        if isinstance(rule, ConstantPeriod):
            if rule.period < 2:
                raise ValidationError(
                    "bad-period",
                    f"rung {rung.name!r} has period {rule.period}; non-top rungs need a period of 2 or more",
                )
        else:
            if not rule.cardinalities:
                raise ValidationError("bad-cardinality", f"rung {rung.name!r} has an empty cardinality table")
            if any(c < 1 for c in rule.cardinalities):
                raise ValidationError(
                    "bad-cardinality", f"rung {rung.name!r} has a non-positive cardinality"
                )
            if rule.unit is not None and rule.unit not in {r.name for r in h.rungs}:
                raise ValidationError("bad-unit", f"rung {rung.name!r} references unknown unit {rule.unit!r}")
    h._reps  # force locator construction; raises on inconsistent units
    return h


def period_length(h: Hierarchy, lower: str, upper: str) -> int:
    """Product of the constant periods of the rungs spanning lower..upper."""
    lo, hi = h.position(lower), h.position(upper)
    if lo > hi:
        raise ValidationError("bad-span", f"{lower!r} is above {upper!r}")
    for rung in h.rungs[lo:hi]:
        if isinstance(rung.rule, IrregularMapping):
            raise ComputationError(
                "irregular-span",
                f"span {lower}..{upper} crosses the irregular rung {rung.name!r}",
            )
    return prod(rung.rule.period for rung in h.rungs[lo:hi])


def linear_granule(h: Hierarchy, z, rung: str):
    """Index of the granule of ``rung`` containing bottom granule ``z``.

    Accepts a scalar or a numpy integer array; total on the index set.
    """
    rep = h._reps[h.position(rung)]
    out = rep.idx(z)
    return int(out) if np.isscalar(z) or isinstance(z, int) else out


def granule_start(h: Hierarchy, rung: str, index):
    """First bottom granule of granule ``index`` of ``rung``."""
    rep = h._reps[h.position(rung)]
    out = rep.start(index)
    return int(out) if np.isscalar(index) or isinstance(index, int) else out


@dataclass(frozen=True)
class MaterializedGranularity:
    """Granules of one rung as half-open index intervals over a finite span.

    Intervals carry true boundaries; the last one may extend past
    ``span_end``. Relativity verdicts computed from these are relative
    to the materialized span.
    """

    name: str
    intervals: tuple[tuple[int, int], ...]
    span_end: int


def materialize(h: Hierarchy, rung: str, span_end: int) -> MaterializedGranularity:
    """All granules of ``rung`` whose start lies in [0, span_end)."""
    if span_end <= 0:
        raise ComputationError("empty-span", "span must cover at least one bottom granule")
    rep = h._reps[h.position(rung)]
    intervals = []
    i = 0
    while True:
        s = int(rep.start(i))
        if s >= span_end:
            break
        intervals.append((s, int(rep.start(i + 1))))
        i += 1
    return MaterializedGranularity(rung, tuple(intervals), span_end)


def _joint_span(g: MaterializedGranularity, h: MaterializedGranularity) -> int:
    end = min(g.span_end, h.span_end)
    if not g.intervals or not h.intervals or end <= 0:
        raise ComputationError("empty-span", "no granules to compare on the shared span")
    return end


def finer_than(g: MaterializedGranularity, h: MaterializedGranularity) -> bool:
    """True iff every complete granule of g sits inside some granule of h."""
    end = _joint_span(g, h)
    h_starts = [s for s, _ in h.intervals]
    for s, e in g.intervals:
        if e > end:
            continue
        k = bisect.bisect_right(h_starts, s) - 1
        if k < 0 or not (h.intervals[k][0] <= s and e <= h.intervals[k][1]):
            return False
    return True


def groups_into(g: MaterializedGranularity, h: MaterializedGranularity) -> bool:
    """True iff every complete granule of h is exactly tiled by granules of g."""
    end = _joint_span(g, h)
    g_starts = [s for s, _ in g.intervals]
    for s, e in h.intervals:
        if e > end:
            continue
        k = bisect.bisect_left(g_starts, s)
        if k == len(g.intervals) or g.intervals[k][0] != s:
            return False
        pos = s
        while pos < e:
            if k == len(g.intervals) or g.intervals[k][0] != pos:
                return False
            pos = g.intervals[k][1]
            k += 1
        if pos != e:
            return False
    return True


def is_periodical(
    g: MaterializedGranularity, h: MaterializedGranularity
) -> tuple[int, int] | None:
    """Smallest (R, P) such that shifting h by R granules shifts its tiling by P granules of g.

    Verdicts are relative to the materialized span; None means no
    repetition at or below the span was detected.
    """
    end = _joint_span(g, h)
    g_starts = [s for s, _ in g.intervals]
    spans: list[tuple[int, int]] = []
    for s, e in h.intervals:
        if e > end:
            break
        lo = bisect.bisect_left(g_starts, s)
        hi = bisect.bisect_left(g_starts, e)
        if lo == len(g.intervals) or g.intervals[lo][0] != s or g.intervals[hi - 1][1] != e:
            raise ValidationError(
                "not-a-grouping", f"{g.name!r} does not group into {h.name!r} on this span"
            )
        spans.append((lo, hi))
    if len(spans) < 2:
        raise ComputationError(
            "insufficient-span", "need at least two complete coarse granules to detect a period"
        )
    n = len(spans)
    for r in range(1, n):
        p = spans[r][0] - spans[0][0]
        if all(
            spans[i + r][0] - spans[i][0] == p and spans[i + r][1] - spans[i][1] == p
            for i in range(n - r)
        ):
            return (r, p)
    return None


@dataclass(frozen=True)
class EventCategory:
    """One labelled category of an aperiodic calendar, as index intervals."""

    index: int
    label: str
    intervals: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class AperiodicEventCalendar:
    """Recurring but non-periodic categorization of the bottom index.

    Category 0 is implicit and means "none of the events". Intervals are
    half-open over the bottom granularity and pairwise disjoint.
    """

    name: str
    categories: tuple[EventCategory, ...]

    @cached_property
    def _lookup(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        triples = sorted(
            (s, e, c.index) for c in self.categories for s, e in c.intervals
        )
        starts = np.asarray([t[0] for t in triples], dtype=np.int64)
        ends = np.asarray([t[1] for t in triples], dtype=np.int64)
        cats = np.asarray([t[2] for t in triples], dtype=np.int64)
        return starts, ends, cats

    @property
    def n_levels(self) -> int:
        return max((c.index for c in self.categories), default=0) + 1

    def category_of(self, z):
        """Category index at z (0 outside all intervals); scalar or array."""
        starts, ends, cats = self._lookup
        zz = np.asarray(z, dtype=np.int64)
        pos = np.searchsorted(starts, zz, side="right") - 1
        valid = pos >= 0
        pos_c = np.clip(pos, 0, None)
        hit = valid & (zz < ends[pos_c])
        out = np.where(hit, cats[pos_c], 0)
        return int(out) if np.isscalar(z) or isinstance(z, int) else out


def validate_event_calendar(cal: AperiodicEventCalendar) -> AperiodicEventCalendar:
    """Check interval sanity and pairwise disjointness across categories."""
    all_intervals = []
    for cat in cal.categories:
        if cat.index < 1:
            raise ValidationError(
                "bad-category", f"category index {cat.index} in {cal.name!r}; 0 is reserved for none"
            )
        for s, e in cat.intervals:
            if s < 0 or e <= s:
                raise ValidationError(
                    "bad-interval", f"interval [{s}, {e}) in {cal.name!r} is not a half-open range"
                )
            all_intervals.append((s, e))
    all_intervals.sort()
    for (s1, e1), (s2, _) in zip(all_intervals, all_intervals[1:]):
        if s2 < e1:
            raise ValidationError(
                "overlapping-intervals", f"intervals overlap at index {s2} in {cal.name!r}"
            )
    return cal
