"""Profiles, averages, feasibility diagnostics and comparison tables.

Averages are kept as exact fractions and only cut to three decimals when
rendered.  Rendering truncates toward zero unless ``mode="half_up"`` is
requested.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional, Sequence

from .core import (
    AssignmentError,
    ClassId,
    Instance,
    Matching,
    Profile,
    StudentId,
    UtilityVector,
)


class UndefinedAverage(AssignmentError):
    """Some occupied rank carries a penalty utility, so no average is reported."""


def received_rank(instance: Instance, matching: Matching, student: StudentId) -> int:
    """1..k, or k + 1 for an unranked (or leftover-filled) seat."""
    if student in matching.filled:
        return instance.k + 1
    return instance.rank_of(student, matching[student]) or instance.k + 1


def profile_of(instance: Instance, matching: Matching) -> Profile:
    k = instance.k
    counts = [0] * (k + 1)
    for s in instance.students:
        counts[received_rank(instance, matching, s) - 1] += 1
    return Profile(tuple(counts[:k]), counts[k], instance.n_students)


def profile_by_group(instance: Instance, matching: Matching) -> dict[str, Profile]:
    if not instance.groups:
        return {}
    k = instance.k
    buckets: dict[str, list[int]] = {}
    for s in instance.students:
        row = buckets.setdefault(instance.groups.get(s, ""), [0] * (k + 1))
        row[received_rank(instance, matching, s) - 1] += 1
    return {g: Profile(tuple(r[:k]), r[k], sum(r)) for g, r in sorted(buckets.items())}


def render_decimal(value: Fraction, places: int = 3, mode: str = "truncate") -> str:
    """Fixed-point text for an exact fraction (``truncate`` or ``half_up``)."""
    if mode not in ("truncate", "half_up"):
        raise ValueError(f"unknown rounding mode {mode!r}")
    scale = 10**places
    scaled = value * scale
    sign = "-" if scaled < 0 else ""
    q, r = divmod(abs(scaled.numerator), scaled.denominator)
    if mode == "half_up" and 2 * r >= scaled.denominator:
        q += 1
    if q == 0:
        sign = ""
    whole, frac = divmod(q, scale)
    return f"{sign}{whole}.{frac:0{places}d}"


def round_half_up(value: Fraction, places: int = 3) -> str:
    return render_decimal(value, places, "half_up")


def total_utility(profile: Profile, vector: UtilityVector) -> int:
    if vector.k != profile.k:
        raise ValueError(f"vector has {vector.k} ranks, profile has {profile.k}")
    return (sum(n * p for n, p in zip(profile.counts, vector.by_rank))
            + profile.others * vector.others)


def average_utility(profile: Profile, vector: UtilityVector) -> Fraction:
    """Mean utility per student.

    Undefined when a student sits at a penalty-valued rank (for example an
    Others seat under a vector whose ``others`` is ``-M``).
    """
    threshold = vector.threshold(profile.total)
    occupied = [p for n, p in zip(profile.counts, vector.by_rank) if n]
    if profile.others:
        occupied.append(vector.others)
    if any(p <= threshold for p in occupied):
        raise UndefinedAverage("penalty ranks are occupied")
    return Fraction(total_utility(profile, vector), profile.total)


@dataclass(frozen=True)
class AverageRank:
    value: Fraction
    lower_bound: bool

    def __str__(self) -> str:
        text = render_decimal(self.value)
        return f"≥ {text}" if self.lower_bound else text


def average_rank(profile: Profile) -> AverageRank:
    """Mean received rank; Others count as rank k + 1, giving a lower bound."""
    k = profile.k
    weighted = sum(i * n for i, n in enumerate(profile.counts, start=1))
    weighted += profile.others * (k + 1)
    return AverageRank(Fraction(weighted, profile.total), profile.others > 0)


def rank_histogram(instance: Instance) -> dict[ClassId, tuple[int, ...]]:
    """How many students list each class 1st, 2nd, ... (canceled included)."""
    hist = {c.id: [0] * instance.k for c in instance.classes}
    for s in instance.students:
        for i, c in enumerate(instance.preferences[s]):
            hist[c][i] += 1
    return {c: tuple(v) for c, v in hist.items()}


def necessary_condition(instance: Instance, max_rank: int) -> list[tuple[ClassId, int]]:
    """Active classes whose top-``max_rank`` popularity is below their lower bound.

    A non-empty result proves the rank-restricted model infeasible; an empty
    one proves nothing.
    """
    if not 1 <= max_rank <= instance.k:
        raise ValueError(f"max_rank must be in 1..{instance.k}")
    hist = rank_histogram(instance)
    out = []
    for c in instance.active_classes:
        n = sum(hist[c.id][:max_rank])
        if n < c.lower:
            out.append((c.id, n))
    return out


def pareto_dominates(instance: Instance, a: Matching, b: Matching) -> bool:
    """Every student weakly prefers ``a`` and at least one strictly."""
    strict = False
    for s in instance.students:
        ra, rb = received_rank(instance, a, s), received_rank(instance, b, s)
        if ra > rb:
            return False
        strict = strict or ra < rb
    return strict


@dataclass(frozen=True)
class ModelResult:
    """Input row for :func:`compare`; ``matching`` is None for a failed solve."""

    name: str
    matching: Optional[Matching]
    report_vector: Optional[UtilityVector] = None
    infeasible: bool = False


@dataclass(frozen=True)
class ComparisonRow:
    name: str
    profile: Optional[Profile]
    avg_utility: str
    avg_rank: str
    infeasible: bool


@dataclass
class ComparisonTable:
    k: int
    total: int
    rows: list[ComparisonRow]
    dominance: list[tuple[str, str]] = field(default_factory=list)

    def header(self) -> list[str]:
        ranks = [_ordinal(i) for i in range(1, self.k + 1)]
        return ["model", *ranks, "others", "avg_utility", "avg_rank"]

    def records(self) -> list[list[str]]:
        out = []
        for row in self.rows:
            if row.infeasible or row.profile is None:
                out.append([row.name] + ["infeasible"] * (self.k + 3))
            else:
                p = row.profile
                out.append([row.name, *map(str, p.counts), str(p.others),
                            row.avg_utility, row.avg_rank])
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header())
        w.writerows(self.records())
        return buf.getvalue()

    def to_markdown(self) -> str:
        head = self.header()
        body = []
        for row, rec in zip(self.rows, self.records()):
            if row.infeasible or row.profile is None:
                rec = [rec[0], "infeasible"] + [""] * (len(head) - 2)
            body.append(rec)
        widths = [max(len(r[i]) for r in [head, *body]) for i in range(len(head))]

        def line(cells):
            return "| " + " | ".join(c.ljust(w) for c, w in zip(cells, widths)) + " |"

        lines = [f"Students: {self.total}", "", line(head),
                 "|" + "|".join("-" * (w + 2) for w in widths) + "|"]
        lines.extend(line(rec) for rec in body)
        if self.dominance:
            lines.append("")
            lines.extend(f"- {a} Pareto-dominates {b}" for a, b in self.dominance)
        return "\n".join(lines) + "\n"


def _ordinal(i: int) -> str:
    return {1: "1st", 2: "2nd", 3: "3rd"}.get(i, f"{i}th")


def compare(instance: Instance, results: Sequence[ModelResult]) -> ComparisonTable:
    rows = []
    for r in results:
        if r.infeasible or r.matching is None:
            rows.append(ComparisonRow(r.name, None, "", "", True))
            continue
        prof = profile_of(instance, r.matching)
        util = "--"
        if r.report_vector is not None:
            try:
                util = render_decimal(average_utility(prof, r.report_vector))
            except UndefinedAverage:
                pass
        rows.append(ComparisonRow(r.name, prof, util, str(average_rank(prof)), False))
    dominance = []
    feasible = [r for r in results if r.matching is not None and not r.infeasible]
    for a in feasible:
        for b in feasible:
            if a is not b and pareto_dominates(instance, a.matching, b.matching):
                dominance.append((a.name, b.name))
    return ComparisonTable(instance.k, instance.n_students, rows, dominance)


def class_report(instance: Instance, matching: Matching) -> list[dict]:
    """Per-class rows: capacities, assigned count (by group) and popularity."""
    hist = rank_histogram(instance)
    loads = matching.loads()
    groups = sorted(set(instance.groups.values())) if instance.groups else []
    out = []
    for c in instance.classes:
        members = matching.members(c.id)
        row: dict = {
            "class_id": c.id,
            "lower": c.lower if c.active else "",
            "upper": c.upper if c.active else "",
            "status": "active" if c.active else "canceled",
            "assigned": loads.get(c.id, 0),
        }
        for g in groups:
            row[g] = sum(1 for s in members if instance.groups.get(s) == g)
        row["ranked_total"] = sum(hist[c.id])
        for i, n in enumerate(hist[c.id], start=1):
            row[f"rank_{i}"] = n
        out.append(row)
    return out


def under_filled(instance: Instance, matching: Matching,
                 lower: Optional[Mapping[ClassId, int]] = None) -> list[ClassId]:
    """Active classes holding fewer students than their lower capacity."""
    loads = matching.loads()
    return [c.id for c in instance.active_classes
            if loads.get(c.id, 0) < (lower[c.id] if lower else c.lower)]
