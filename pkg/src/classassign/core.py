"""Domain types shared by the solvers, mechanisms and reports.

Everything here is immutable once constructed.  Utilities are plain Python
integers, but every vector is checked against a signed 64-bit budget so the
same numbers could be pushed through any fixed-width solver.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping, Optional, Sequence

StudentId = str
ClassId = str

INT64_MAX = 2**63 - 1
#: Largest objective magnitude we accept; leaves headroom below int64.
OBJECTIVE_LIMIT = 2**62
DEFAULT_LOWER = 7


class AssignmentError(Exception):
    """Base class for every error raised by this package."""


class InvalidInstance(AssignmentError, ValueError):
    pass


class OverflowRisk(AssignmentError, OverflowError):
    """Raised when an objective could leave signed 64-bit range."""


class CapacityMismatch(AssignmentError):
    """Total lower/upper capacity cannot accommodate the student body."""

    def __init__(self, message: str, *, students: int, lower_total: int,
                 upper_total: int) -> None:
        super().__init__(message)
        self.students = students
        self.lower_total = lower_total
        self.upper_total = upper_total


@dataclass(frozen=True)
class ClassInfo:
    id: ClassId
    lower: int = DEFAULT_LOWER
    upper: int = 25
    active: bool = True

    def __post_init__(self) -> None:
        if self.lower < 0:
            raise InvalidInstance(f"class {self.id!r}: negative lower capacity")
        if self.upper < (1 if self.active else 0):
            raise InvalidInstance(f"class {self.id!r}: upper capacity must be positive")
        if self.lower > self.upper:
            raise InvalidInstance(
                f"class {self.id!r}: lower {self.lower} exceeds upper {self.upper}")


class Instance:
    """Students, classes and the submitted preference lists.

    ``preferences[s]`` lists class ids best first.  Canceled classes stay in
    ``classes`` (flagged inactive) so that submitted ranks keep their
    positions; they just never receive students.
    """

    __slots__ = ("students", "classes", "preferences", "k", "groups",
                 "_class_index", "_rank")

    def __init__(
        self,
        students: Sequence[StudentId],
        classes: Sequence[ClassInfo],
        preferences: Mapping[StudentId, Sequence[ClassId]],
        k: int,
        groups: Optional[Mapping[StudentId, str]] = None,
    ) -> None:
        if k < 1:
            raise InvalidInstance("k must be a positive integer")
        students = tuple(students)
        classes = tuple(classes)
        if len(set(students)) != len(students):
            raise InvalidInstance("duplicate student id")
        class_index = {}
        for i, c in enumerate(classes):
            if c.id in class_index:
                raise InvalidInstance(f"duplicate class id {c.id!r}")
            class_index[c.id] = i
        if not any(c.active for c in classes):
            raise InvalidInstance("at least one active class is required")

        prefs = {}
        rank = {}
        for s in students:
            lst = tuple(preferences.get(s, ()))
            if len(lst) > k:
                raise InvalidInstance(f"student {s!r} lists {len(lst)} classes (k={k})")
            if len(set(lst)) != len(lst):
                raise InvalidInstance(f"student {s!r} lists a class twice")
            for c in lst:
                if c not in class_index:
                    raise InvalidInstance(f"student {s!r} ranks unknown class {c!r}")
            prefs[s] = lst
            rank[s] = {c: i + 1 for i, c in enumerate(lst)}
        unknown = set(preferences) - set(students)
        if unknown:
            raise InvalidInstance(f"preferences for unknown students: {sorted(unknown)}")

        self.students = students
        self.classes = classes
        self.preferences = MappingProxyType(prefs)
        self.k = k
        self.groups = MappingProxyType(dict(groups)) if groups else None
        self._class_index = class_index
        self._rank = rank

    def __repr__(self) -> str:
        return (f"Instance(students={len(self.students)}, classes={len(self.classes)}, "
                f"active={len(self.active_classes)}, k={self.k})")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Instance):
            return NotImplemented
        return (self.students == other.students and self.classes == other.classes
                and dict(self.preferences) == dict(other.preferences)
                and self.k == other.k
                and (dict(self.groups) if self.groups else None)
                == (dict(other.groups) if other.groups else None))

    __hash__ = None  # type: ignore[assignment]

    @property
    def n_students(self) -> int:
        return len(self.students)

    @property
    def active_classes(self) -> tuple[ClassInfo, ...]:
        return tuple(c for c in self.classes if c.active)

    def class_info(self, class_id: ClassId) -> ClassInfo:
        return self.classes[self._class_index[class_id]]

    def class_position(self, class_id: ClassId) -> int:
        return self._class_index[class_id]

    def rank_of(self, student: StudentId, class_id: ClassId) -> Optional[int]:
        """1-based rank of ``class_id`` in the student's list, or None."""
        return self._rank[student].get(class_id)

    def capacity_totals(self) -> tuple[int, int]:
        act = self.active_classes
        return sum(c.lower for c in act), sum(c.upper for c in act)


@dataclass(frozen=True)
class UtilityVector:
    """Per-rank utilities ``by_rank[0..k-1]`` plus the value for unranked classes.

    ``penalty`` is the threshold at or below which an assignment counts as a
    forbidden slot (see :func:`classassign.assign.detect_restricted_infeasibility`).
    ``None`` means "use -M for the instance at hand".
    """

    by_rank: tuple[int, ...]
    others: int
    penalty: Optional[int] = None
    name: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "by_rank", tuple(int(v) for v in self.by_rank))
        for v in (*self.by_rank, self.others):
            if abs(v) > INT64_MAX:
                raise OverflowRisk(f"utility {v} does not fit in 64 bits")

    @property
    def k(self) -> int:
        return len(self.by_rank)

    def value(self, rank: Optional[int]) -> int:
        if rank is None or rank > len(self.by_rank):
            return self.others
        return self.by_rank[rank - 1]

    def magnitude(self) -> int:
        return max(abs(v) for v in (*self.by_rank, self.others))

    def check_fits(self, n_students: int) -> None:
        """Reject vectors whose worst-case objective leaves the 2**62 budget."""
        if self.magnitude() * max(n_students, 1) > OBJECTIVE_LIMIT:
            raise OverflowRisk(
                f"utility magnitude {self.magnitude()} x {n_students} students "
                f"exceeds 2**62")

    def threshold(self, n_students: int) -> int:
        if self.penalty is not None:
            return self.penalty
        return -penalty_constants(n_students).M


@dataclass(frozen=True)
class PenaltyConstants:
    M: int
    N: int
    L: int


def penalty_constants(instance_or_size: "Instance | int") -> PenaltyConstants:
    n = (instance_or_size.n_students if isinstance(instance_or_size, Instance)
         else int(instance_or_size))
    if n < 1:
        raise InvalidInstance("penalty constants need at least one student")
    big_n = n + 1
    consts = PenaltyConstants(M=100 * n + 1, N=big_n, L=big_n**3 * n + 1)
    if consts.L * n > INT64_MAX:
        raise OverflowRisk(f"L * |S| overflows 64 bits for |S| = {n}")
    return consts


def utility_of(instance: Instance, vector: UtilityVector, student: StudentId,
               class_id: ClassId) -> int:
    return vector.value(instance.rank_of(student, class_id))


class Matching:
    """A total assignment of students to classes.

    ``upper_only`` marks outputs of the comparison mechanisms, which ignore
    lower capacities.  ``filled`` holds students placed by the leftover rule
    rather than by their own applications.
    """

    __slots__ = ("assignment", "upper_only", "filled")

    def __init__(self, assignment: Mapping[StudentId, ClassId], *,
                 upper_only: bool = False, filled: Iterable[StudentId] = ()) -> None:
        self.assignment = MappingProxyType(dict(assignment))
        self.upper_only = upper_only
        self.filled = frozenset(filled)

    def __getitem__(self, student: StudentId) -> ClassId:
        return self.assignment[student]

    def __len__(self) -> int:
        return len(self.assignment)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Matching):
            return NotImplemented
        return dict(self.assignment) == dict(other.assignment)

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        kind = "upper-only" if self.upper_only else "capacity-respecting"
        return f"Matching({len(self.assignment)} students, {kind})"

    def members(self, class_id: ClassId) -> list[StudentId]:
        return [s for s, c in self.assignment.items() if c == class_id]

    def loads(self) -> dict[ClassId, int]:
        out: dict[ClassId, int] = {}
        for c in self.assignment.values():
            out[c] = out.get(c, 0) + 1
        return out

    def violations(self, instance: Instance) -> list[str]:
        """Human-readable list of broken matching invariants (empty if valid)."""
        problems = []
        if set(self.assignment) != set(instance.students):
            problems.append("assignment is not total over the students")
        loads = self.loads()
        for cid, n in loads.items():
            if cid not in instance._class_index:
                problems.append(f"unknown class {cid!r}")
        for c in instance.classes:
            n = loads.get(c.id, 0)
            if not c.active:
                if n:
                    problems.append(f"canceled class {c.id!r} has {n} students")
                continue
            if n > c.upper:
                problems.append(f"class {c.id!r} over capacity ({n} > {c.upper})")
            if not self.upper_only and n < c.lower:
                problems.append(f"class {c.id!r} under lower capacity ({n} < {c.lower})")
        return problems


@dataclass(frozen=True)
class Profile:
    """How many students received their 1st, 2nd, ... choice, plus Others."""

    counts: tuple[int, ...]
    others: int
    total: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "counts", tuple(self.counts))
        if any(c < 0 for c in self.counts) or self.others < 0:
            raise ValueError("profile counts must be nonnegative")
        if sum(self.counts) + self.others != self.total:
            raise ValueError(
                f"profile counts sum to {sum(self.counts) + self.others}, "
                f"expected {self.total}")

    @classmethod
    def from_counts(cls, counts: Sequence[int], others: int = 0) -> "Profile":
        return cls(tuple(counts), others, sum(counts) + others)

    @property
    def k(self) -> int:
        return len(self.counts)
