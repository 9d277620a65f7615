"""Deferred acceptance and the Boston mechanism under single tie-breaking.

Both mechanisms ignore lower capacities.  Students left without a seat
are placed by :func:`leftover_fill` and reported as "Others".

Single tie-breaking permutation (bit-exact, so seeds replicate anywhere):

* The 64-bit seed is expanded into four words of xoshiro256** state with
  splitmix64 (``x += 0x9E3779B97F4A7C15; z = x;
  z = (z ^ z >> 30) * 0xBF58476D1CE4E5B9; z = (z ^ z >> 27) * 0x94D049BB133111EB;
  out = z ^ z >> 31``, everything mod 2**64).
* xoshiro256** output: ``rotl(s1 * 5, 7) * 9``, then the standard state
  update with shift 17 and rotation 45.
* ``below(n)``: draw ``r`` until ``r < 2**64 - (2**64 % n)``, return ``r % n``.
* Fisher-Yates over the instance's student order: for ``i`` from ``n-1``
  down to 1, swap positions ``i`` and ``below(i + 1)``.
"""

from __future__ import annotations

from collections import deque
from typing import Mapping, Optional, Sequence

from .core import CapacityMismatch, ClassId, Instance, Matching, StudentId

MASK64 = (1 << 64) - 1

Partial = dict  # StudentId -> Optional[ClassId]


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


class Xoshiro256StarStar:
    def __init__(self, seed: int) -> None:
        x = seed & MASK64
        state = []
        for _ in range(4):
            x = (x + 0x9E3779B97F4A7C15) & MASK64
            z = x
            z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
            z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
            state.append(z ^ (z >> 31))
        self.s = state

    def next(self) -> int:
        s = self.s
        result = (_rotl((s[1] * 5) & MASK64, 7) * 9) & MASK64
        t = (s[1] << 17) & MASK64
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def below(self, n: int) -> int:
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            r = self.next()
            if r < limit:
                return r % n


def single_tie_break(instance: Instance, seed: int) -> list[StudentId]:
    """Priority order over all students, highest priority first."""
    order = list(instance.students)
    rng = Xoshiro256StarStar(seed)
    for i in range(len(order) - 1, 0, -1):
        j = rng.below(i + 1)
        order[i], order[j] = order[j], order[i]
    return order


def _priority_rank(instance: Instance, priority: Sequence[StudentId]) -> dict:
    rank = {s: i for i, s in enumerate(priority)}
    if len(rank) != len(priority) or set(rank) != set(instance.students):
        raise ValueError("priority must be a permutation of the instance's students")
    return rank


def _seats(instance: Instance) -> dict[ClassId, int]:
    return {c.id: (c.upper if c.active else 0) for c in instance.classes}


def da_partial(instance: Instance, priority: Sequence[StudentId],
               processing: str = "queue") -> Partial:
    """Student-proposing DA before any leftover filling.

    ``processing="queue"`` lets one free student propose at a time
    (McVitie-Wilson); ``"rounds"`` has every free student propose at once
    and classes keep their best applicants.  Both give the same matching.
    """
    prank = _priority_rank(instance, priority)
    seats = _seats(instance)
    prefs = instance.preferences
    nxt = {s: 0 for s in instance.students}
    held: dict[ClassId, list[StudentId]] = {c: [] for c in seats}

    if processing == "queue":
        free = deque(priority)
        while free:
            s = free.popleft()
            lst = prefs[s]
            while nxt[s] < len(lst):
                c = lst[nxt[s]]
                nxt[s] += 1
                if seats[c] == 0:
                    continue
                h = held[c]
                if len(h) < seats[c]:
                    h.append(s)
                    break
                worst = max(h, key=prank.__getitem__)
                if prank[s] < prank[worst]:
                    h.remove(worst)
                    h.append(s)
                    free.append(worst)
                    break
    elif processing == "rounds":
        free = list(instance.students)
        while True:
            applicants: dict[ClassId, list[StudentId]] = {}
            for s in free:
                lst = prefs[s]
                if nxt[s] < len(lst):
                    applicants.setdefault(lst[nxt[s]], []).append(s)
                    nxt[s] += 1
            if not applicants:
                break
            free = []
            for c in held:
                if c in applicants:
                    pool = sorted(held[c] + applicants[c], key=prank.__getitem__)
                    held[c] = pool[:seats[c]]
                    free.extend(pool[seats[c]:])
    else:
        raise ValueError(f"unknown processing order {processing!r}")

    out: Partial = {s: None for s in instance.students}
    for c, members in held.items():
        for s in members:
            out[s] = c
    return out


def boston_partial(instance: Instance, priority: Sequence[StudentId]) -> Partial:
    """Immediate acceptance: round i processes everyone's i-th choice."""
    prank = _priority_rank(instance, priority)
    remaining = _seats(instance)
    out: Partial = {s: None for s in instance.students}
    for rnd in range(instance.k):
        applicants: dict[ClassId, list[StudentId]] = {}
        for s in instance.students:
            lst = instance.preferences[s]
            if out[s] is None and rnd < len(lst):
                applicants.setdefault(lst[rnd], []).append(s)
        for c, group in applicants.items():
            group.sort(key=prank.__getitem__)
            admitted = group[:remaining[c]]
            for s in admitted:
                out[s] = c
            remaining[c] -= len(admitted)
    return out


def leftover_fill(instance: Instance, partial: Mapping[StudentId, Optional[ClassId]],
                  priority: Sequence[StudentId]) -> Matching:
    """Seat unassigned students, in priority order, where most seats remain.

    Ties go to the class listed first.  Filled students are recorded in
    ``Matching.filled`` and count as Others.
    """
    _, upper_total = instance.capacity_totals()
    if upper_total < instance.n_students:
        raise CapacityMismatch(
            f"{instance.n_students} students exceed {upper_total} seats",
            students=instance.n_students, lower_total=0, upper_total=upper_total)
    remaining = _seats(instance)
    assignment = {}
    for s in instance.students:
        c = partial.get(s)
        if c is not None:
            assignment[s] = c
            remaining[c] -= 1
    filled = []
    order = [c.id for c in instance.classes]
    for s in priority:
        if s in assignment:
            continue
        best = order[0]
        for cid in order:
            if remaining[cid] > remaining[best]:
                best = cid
        assignment[s] = best
        remaining[best] -= 1
        filled.append(s)
    return Matching(assignment, upper_only=True, filled=filled)


def deferred_acceptance(instance: Instance, priority: Sequence[StudentId]) -> Matching:
    return leftover_fill(instance, da_partial(instance, priority), priority)


def boston(instance: Instance, priority: Sequence[StudentId]) -> Matching:
    return leftover_fill(instance, boston_partial(instance, priority), priority)


def check_stability(instance: Instance,
                    matching: "Matching | Mapping[StudentId, Optional[ClassId]]",
                    priority: Sequence[StudentId]) -> list[tuple[StudentId, ClassId]]:
    """Every (student, class) pair that blocks ``matching``.

    A student blocks with a class ranked above their current seat (an
    unranked seat or no seat at all is worst) if that class has a free seat
    or holds someone of lower priority.
    """
    assignment = matching.assignment if isinstance(matching, Matching) else matching
    prank = _priority_rank(instance, priority)
    seats = _seats(instance)
    members: dict[ClassId, list[StudentId]] = {c: [] for c in seats}
    for s, c in assignment.items():
        if c is not None:
            members[c].append(s)
    worst_member = {c: max((prank[s] for s in m), default=-1) for c, m in members.items()}
    pairs = []
    for s in instance.students:
        current = assignment.get(s)
        r = instance.rank_of(s, current) if current is not None else None
        better = instance.preferences[s][: (r - 1) if r else None]
        for c in better:
            if seats[c] == 0:
                continue
            if len(members[c]) < seats[c] or worst_member[c] > prank[s]:
                pairs.append((s, c))
    return pairs
