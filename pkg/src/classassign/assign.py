"""Class assignment as a minimum-cost flow, plus the named utility vectors."""

from __future__ import annotations

import re
from typing import NamedTuple

from .core import (
    AssignmentError,
    CapacityMismatch,
    Instance,
    Matching,
    UtilityVector,
    penalty_constants,
)
from .flow import FlowNetwork, solve_min_cost_flow

SOURCE = ("o",)
SINK = ("t",)

# per-rank utilities for ranks 1..6; others is always -M
OPT_FAMILY = {
    "Opt80": (100, 80, 64, 51, 41, 0),
    "Opt75": (100, 75, 56, 42, 32, 0),
    "Opt67": (100, 67, 45, 30, 20, 0),
    "Opt50": (100, 50, 25, 13, 6, 0),
}
PROFILE_MODELS = ("RankMaximal", "Fair", "Opt67xFair")
PRESET_NAMES = (
    *OPT_FAMILY,
    "Opt67-max5", "Opt67-max4", "Opt67-max3", "Opt67-max2",
    *PROFILE_MODELS,
)

_RESTRICTED = re.compile(r"^(Opt\d+)-max(\d+)$")
_ORDINAL = {1: "1st", 2: "2nd", 3: "3rd"}


class UnknownModel(AssignmentError, KeyError):
    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "unknown model"


class Solution(NamedTuple):
    matching: Matching
    total_utility: int


def _ordinal(r: int) -> str:
    return _ORDINAL.get(r, f"{r}th")


def check_capacities(instance: Instance) -> None:
    lower, upper = instance.capacity_totals()
    n = instance.n_students
    if not lower <= n <= upper:
        raise CapacityMismatch(
            f"{n} students cannot fill active classes with total lower "
            f"capacity {lower} and upper capacity {upper}",
            students=n, lower_total=lower, upper_total=upper)


def build_network(instance: Instance, vector: UtilityVector) -> FlowNetwork:
    """Source -> students -> active classes -> sink.

    Every student gets an arc to every active class; its cost is the
    negated utility.  Class nodes demand their lower capacity and pass the
    remaining ``upper - lower`` seats on to the sink.
    """
    check_capacities(instance)
    active = instance.active_classes
    n = instance.n_students
    lower_total = sum(c.lower for c in active)

    supplies = {SOURCE: n}
    for s in instance.students:
        supplies[("s", s)] = 0
    for c in active:
        supplies[("c", c.id)] = -c.lower
    supplies[SINK] = lower_total - n

    arcs = [(SOURCE, ("s", s), 1, 0) for s in instance.students]
    for s in instance.students:
        ranks = {cid: i + 1 for i, cid in enumerate(instance.preferences[s])}
        for c in active:
            arcs.append((("s", s), ("c", c.id), 1, -vector.value(ranks.get(c.id))))
    arcs.extend((("c", c.id), SINK, c.upper - c.lower, 0) for c in active)
    return FlowNetwork.build(supplies, arcs)


def solve_assignment(instance: Instance, vector: UtilityVector) -> Solution:
    """Maximum-utility matching respecting every lower and upper capacity."""
    if vector.k != instance.k:
        raise ValueError(f"vector has {vector.k} ranks, instance has k={instance.k}")
    vector.check_fits(instance.n_students)
    network = build_network(instance, vector)
    # each student carries exactly one unit, so |cost| <= |S| * max|p|
    flow = solve_min_cost_flow(
        network, cost_bound=vector.magnitude() * instance.n_students)

    n = instance.n_students
    n_active = len(instance.active_classes)
    first = n  # the student->class arcs follow the n source arcs
    assignment = {}
    for i, s in enumerate(instance.students):
        base = first + i * n_active
        chosen = [j for j in range(n_active) if flow.per_arc[base + j]]
        if len(chosen) != 1:
            raise AssignmentError(f"student {s!r} split across {len(chosen)} classes")
        assignment[s] = instance.active_classes[chosen[0]].id
    return Solution(Matching(assignment), -flow.total_cost)


def detect_restricted_infeasibility(matching: Matching, instance: Instance,
                                    vector: UtilityVector) -> bool:
    """True if anyone sits in a slot the vector marks as forbidden."""
    threshold = vector.threshold(instance.n_students)
    return any(
        vector.value(instance.rank_of(s, c)) <= threshold
        for s, c in matching.assignment.items())


def penalized_students(matching: Matching, instance: Instance,
                       vector: UtilityVector) -> list[str]:
    threshold = vector.threshold(instance.n_students)
    return [s for s, c in matching.assignment.items()
            if vector.value(instance.rank_of(s, c)) <= threshold]


def restrict(vector: UtilityVector, max_rank: int, M: int) -> UtilityVector:
    """Forbid ranks beyond ``max_rank`` (and unranked classes) with ``-M``."""
    if not 1 <= max_rank <= vector.k:
        raise ValueError(f"max_rank must be in 1..{vector.k}, got {max_rank}")
    by_rank = vector.by_rank[:max_rank] + (-M,) * (vector.k - max_rank)
    name = f"{vector.name} (1st to {_ordinal(max_rank)})" if vector.name else ""
    return UtilityVector(by_rank, -M, penalty=-M, name=name)


def _opt_vector(base: str, k: int, M: int) -> UtilityVector:
    values = OPT_FAMILY[base]
    if k > len(values):
        raise ValueError(f"{base} is defined for at most {len(values)} ranks")
    return UtilityVector(values[:k], -M, penalty=-M, name=base)


def _assert_dominance(n: int, M: int, N: int) -> None:
    # one unit at a higher lexicographic level must outweigh a full lower level
    if not (N > n and M > 100 * n):
        raise AssertionError("penalty constants do not separate the objective levels")


def rank_maximal(k: int, n: int) -> UtilityVector:
    """(N^(k-2), ..., N, 1, 0 | -L); for k=5 this is (N^3, N^2, N, 1, 0 | -L)."""
    c = penalty_constants(n)
    N = c.N
    _assert_dominance(n, c.M, N)
    by_rank = tuple(N ** (k - 2 - i) for i in range(k - 1)) + (0,)
    top = by_rank[0] if k > 1 else 1
    L = top * n + 1
    if k == 5:
        assert L == c.L
    assert L > top * n
    return UtilityVector(by_rank, -L, penalty=-L, name="RankMaximal")


def fair(k: int, n: int) -> UtilityVector:
    """(0, -1, -N, ..., -N^(k-2) | -N^(k-1))."""
    N = penalty_constants(n).N
    _assert_dominance(n, penalty_constants(n).M, N)
    by_rank = (0,) + tuple(-(N ** (i - 2)) for i in range(2, k + 1))
    others = -(N ** (k - 1))
    return UtilityVector(by_rank, others, penalty=others, name="Fair")


def opt67_fair(k: int, n: int) -> UtilityVector:
    """Opt67 on ranks 1-3, fairness weights -M, -MN, ... below that."""
    c = penalty_constants(n)
    M, N = c.M, c.N
    _assert_dominance(n, M, N)
    head = OPT_FAMILY["Opt67"][:min(k, 3)]
    tail = tuple(-M * N ** (i - 4) for i in range(4, k + 1))
    others = -M * N ** max(k - 3, 0)
    return UtilityVector(head + tail, others, penalty=others, name="Opt67xFair")


def preset(name: str, instance: Instance) -> UtilityVector:
    """Look up a named model and size its constants for ``instance``."""
    n, k = instance.n_students, instance.k
    M = penalty_constants(n).M
    if name in OPT_FAMILY:
        vec = _opt_vector(name, k, M)
    elif m := _RESTRICTED.match(name):
        base, r = m.group(1), int(m.group(2))
        if base not in OPT_FAMILY:
            raise UnknownModel(f"unknown model {name!r}")
        if r > k:
            raise ValueError(f"{name}: max rank {r} exceeds k={k}")
        vec = restrict(_opt_vector(base, k, M), r, M)
    elif name == "RankMaximal":
        vec = rank_maximal(k, n)
    elif name == "Fair":
        vec = fair(k, n)
    elif name in ("Opt67xFair", "Opt67×Fair"):
        vec = opt67_fair(k, n)
    else:
        raise UnknownModel(f"unknown model {name!r}; known: {', '.join(PRESET_NAMES)}")
    vec.check_fits(n)
    return vec


def reporting_vector(name: str, instance: Instance) -> UtilityVector:
    """Vector used to report average utility for a model.

    Opt-family models report under their own unrestricted vector; the
    profile-based models and the mechanisms report under Opt67.
    """
    M = penalty_constants(instance).M
    base = name.split("-max")[0]
    if base in OPT_FAMILY:
        return _opt_vector(base, instance.k, M)
    return _opt_vector("Opt67", instance.k, M)
