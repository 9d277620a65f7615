"""Exhaustive ground truth for tiny instances.

Nothing here is clever on purpose: every candidate matching is generated
and checked directly, so the results can be trusted as a reference for the
flow solver and the mechanisms.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

from .core import AssignmentError, Instance, Matching, UtilityVector

MAX_STUDENTS = 10
MAX_CANDIDATES = 10**7


class TooLarge(AssignmentError):
    pass


def _guard(instance: Instance, options_per_student: Sequence[int], limit: int) -> None:
    if instance.n_students > MAX_STUDENTS:
        raise TooLarge(f"{instance.n_students} students; the oracle handles at most "
                       f"{MAX_STUDENTS}")
    total = 1
    for k in options_per_student:
        total *= k
        if total > limit:
            raise TooLarge(f"more than {limit} candidate assignments")


def _assignments(instance: Instance, limit: int = MAX_CANDIDATES) -> Iterator[tuple]:
    """Class-id tuples (in student order) respecting both capacities."""
    active = instance.active_classes
    n = instance.n_students
    _guard(instance, [len(active)] * n, limit)
    ids = [c.id for c in active]
    upper = [c.upper for c in active]
    lower = [c.lower for c in active]
    load = [0] * len(active)
    chosen: list[str] = []

    def deficit() -> int:
        return sum(max(lo - x, 0) for lo, x in zip(lower, load))

    def rec(i: int) -> Iterator[tuple]:
        if deficit() > n - i:
            return
        if i == n:
            yield tuple(chosen)
            return
        for j, cid in enumerate(ids):
            if load[j] < upper[j]:
                load[j] += 1
                chosen.append(cid)
                yield from rec(i + 1)
                chosen.pop()
                load[j] -= 1

    yield from rec(0)


def enumerate_matchings(instance: Instance, limit: int = MAX_CANDIDATES) -> Iterator[Matching]:
    """Every capacity-respecting matching, in lexicographic class order."""
    for combo in _assignments(instance, limit):
        yield Matching(dict(zip(instance.students, combo)))


def count_matchings_bruteforce(instance: Instance, limit: int = MAX_CANDIDATES) -> int:
    """Same count as :func:`enumerate_matchings`, by filtering the full product."""
    active = instance.active_classes
    _guard(instance, [len(active)] * instance.n_students, limit)
    count = 0
    for combo in itertools.product(range(len(active)), repeat=instance.n_students):
        loads = [0] * len(active)
        for j in combo:
            loads[j] += 1
        if all(c.lower <= x <= c.upper for c, x in zip(active, loads)):
            count += 1
    return count


def oracle_optimum(instance: Instance, vector: UtilityVector,
                   limit: int = MAX_CANDIDATES) -> tuple[Optional[int], list[Matching]]:
    """Best total utility and all matchings attaining it (None if infeasible)."""
    best = None
    winners: list[tuple] = []
    table = [
        {c.id: vector.value(instance.rank_of(s, c.id)) for c in instance.active_classes}
        for s in instance.students
    ]
    for combo in _assignments(instance, limit):
        total = sum(row[c] for row, c in zip(table, combo))
        if best is None or total > best:
            best, winners = total, [combo]
        elif total == best:
            winners.append(combo)
    return best, [Matching(dict(zip(instance.students, w))) for w in winners]


def rank_vectors(instance: Instance, limit: int = MAX_CANDIDATES) -> list[tuple]:
    """Per-student received ranks (k + 1 for unranked) of every matching."""
    k = instance.k
    out = []
    for combo in _assignments(instance, limit):
        out.append(tuple(instance.rank_of(s, c) or k + 1
                         for s, c in zip(instance.students, combo)))
    return out


@dataclass(frozen=True)
class StableSet:
    matchings: tuple[dict, ...]
    student_optimal: Optional[dict]


def _blocks(instance: Instance, assignment: dict, prio: dict) -> bool:
    members: dict = {}
    for s, c in assignment.items():
        if c is not None:
            members.setdefault(c, []).append(s)
    for s in instance.students:
        current = assignment[s]
        cur_rank = instance.rank_of(s, current) if current is not None else None
        for r, c in enumerate(instance.preferences[s], start=1):
            if cur_rank is not None and r >= cur_rank:
                break
            info = instance.class_info(c)
            if not info.active:
                continue
            held = members.get(c, [])
            if len(held) < info.upper:
                return True
            if any(prio[t] > prio[s] for t in held):
                return True
    return False


def oracle_stable_set(instance: Instance, priority: Sequence[str],
                      limit: int = MAX_CANDIDATES) -> StableSet:
    """All stable partial matchings where students sit only in ranked classes.

    Unassigned students (``None``) are the ones a mechanism would later
    fill; they count as worse off than any ranked seat.
    """
    prio = {s: i for i, s in enumerate(priority)}
    options = []
    for s in instance.students:
        ranked = [c for c in instance.preferences[s] if instance.class_info(c).active]
        options.append(ranked + [None])
    _guard(instance, [len(o) for o in options], limit)
    upper = {c.id: c.upper for c in instance.active_classes}
    stable = []
    for combo in itertools.product(*options):
        loads: dict = {}
        for c in combo:
            if c is not None:
                loads[c] = loads.get(c, 0) + 1
        if any(n > upper[c] for c, n in loads.items()):
            continue
        assignment = dict(zip(instance.students, combo))
        if not _blocks(instance, assignment, prio):
            stable.append(assignment)

    def rank(s, c):
        return instance.rank_of(s, c) if c is not None else instance.k + 1

    best = None
    for cand in stable:
        if all(rank(s, cand[s]) <= rank(s, other[s])
               for other in stable for s in instance.students):
            best = cand
            break
    return StableSet(tuple(stable), best)
