"""CSV instance files, matching output and the synthetic instance generator.

Classes file::

    class_id,lower,upper,status
    c01,7,25,active
    c02,,,canceled

Preferences file (``group`` is optional, short lists leave trailing cells
empty)::

    student_id,group,choice_1,choice_2,choice_3
    s0001,E,c02,c01,
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .core import AssignmentError, ClassInfo, Instance, InvalidInstance, Matching

PathLike = Union[str, "os.PathLike[str]"]

CLASS_HEADER = ["class_id", "lower", "upper", "status"]
MATCHING_HEADER = ["student_id", "class_id", "rank"]
GROUP_LABELS = ("E", "M", "SS", "ST")


class ParseError(AssignmentError, ValueError):
    def __init__(self, path: PathLike, line: int, message: str) -> None:
        super().__init__(f"{path}:{line}: {message}")
        self.path = str(path)
        self.line = line


def _int_cell(path, line, name, text, default=None) -> int:
    text = text.strip()
    if not text and default is not None:
        return default
    try:
        return int(text)
    except ValueError:
        raise ParseError(path, line, f"{name} must be an integer, got {text!r}") from None


def load_classes(path: PathLike) -> list[ClassInfo]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or [h.strip() for h in rows[0]] != CLASS_HEADER:
        raise ParseError(path, 1, f"header must be {','.join(CLASS_HEADER)}")
    out = []
    seen = set()
    for line, row in enumerate(rows[1:], start=2):
        if not any(cell.strip() for cell in row):
            continue
        if len(row) != 4:
            raise ParseError(path, line, f"expected 4 fields, got {len(row)}")
        cid, lower, upper, status = (cell.strip() for cell in row)
        if not cid:
            raise ParseError(path, line, "empty class_id")
        if cid in seen:
            raise ParseError(path, line, f"duplicate class id {cid!r}")
        seen.add(cid)
        if status not in ("active", "canceled"):
            raise ParseError(path, line, f"status must be active or canceled, got {status!r}")
        active = status == "active"
        lo = _int_cell(path, line, "lower", lower, None if active else 0)
        hi = _int_cell(path, line, "upper", upper, None if active else 0)
        try:
            out.append(ClassInfo(cid, lo, hi, active))
        except InvalidInstance as exc:
            raise ParseError(path, line, str(exc)) from None
    return out


def load_instance(classes_path: PathLike, preferences_path: PathLike) -> Instance:
    """Read and validate an instance; ``k`` is the number of choice columns."""
    classes = load_classes(classes_path)
    known = {c.id for c in classes}
    path = preferences_path
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ParseError(path, 1, "empty preferences file")
    header = [h.strip() for h in rows[0]]
    if not header or header[0] != "student_id":
        raise ParseError(path, 1, "first column must be student_id")
    has_group = len(header) > 1 and header[1] == "group"
    first_choice = 2 if has_group else 1
    k = len(header) - first_choice
    expected = [f"choice_{i}" for i in range(1, k + 1)]
    if k < 1 or header[first_choice:] != expected:
        raise ParseError(path, 1, "choice columns must be choice_1..choice_k")

    students, prefs, groups = [], {}, {}
    for line, row in enumerate(rows[1:], start=2):
        if not any(cell.strip() for cell in row):
            continue
        if len(row) != len(header):
            raise ParseError(path, line, f"expected {len(header)} fields, got {len(row)}")
        sid = row[0].strip()
        if not sid:
            raise ParseError(path, line, "empty student_id")
        if sid in prefs:
            raise ParseError(path, line, f"duplicate student id {sid!r}")
        cells = [c.strip() for c in row[first_choice:]]
        while cells and not cells[-1]:
            cells.pop()
        if "" in cells:
            raise ParseError(path, line, "gap inside the preference list")
        if len(set(cells)) != len(cells):
            raise ParseError(path, line, f"student {sid!r} lists a class twice")
        for c in cells:
            if c not in known:
                raise ParseError(path, line, f"unknown class id {c!r}")
        students.append(sid)
        prefs[sid] = cells
        if has_group:
            groups[sid] = row[1].strip()
    if not students:
        raise ParseError(path, 2, "no students")
    return Instance(students, classes, prefs, k, groups or None)


def save_instance(instance: Instance, out_dir: PathLike) -> tuple[Path, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    classes_path, prefs_path = out / "classes.csv", out / "prefs.csv"
    with open(classes_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CLASS_HEADER)
        for c in instance.classes:
            if c.active:
                w.writerow([c.id, c.lower, c.upper, "active"])
            else:
                w.writerow([c.id, "", "", "canceled"])
    with open(prefs_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        head = ["student_id"] + (["group"] if instance.groups else [])
        w.writerow(head + [f"choice_{i}" for i in range(1, instance.k + 1)])
        for s in instance.students:
            lst = list(instance.preferences[s])
            row = [s] + ([instance.groups.get(s, "")] if instance.groups else [])
            w.writerow(row + lst + [""] * (instance.k - len(lst)))
    return classes_path, prefs_path


def rank_label(instance: Instance, matching: Matching, student: str) -> str:
    if student in matching.filled:
        return "others"
    r = instance.rank_of(student, matching[student])
    return "others" if r is None else str(r)


def save_matching(matching: Matching, instance: Instance, path: PathLike) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(MATCHING_HEADER)
        for s in sorted(matching.assignment):
            w.writerow([s, matching[s], rank_label(instance, matching, s)])


def load_matching(path: PathLike) -> dict[str, tuple[str, str]]:
    """Parse a matching CSV into ``{student: (class_id, rank_label)}``."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != MATCHING_HEADER:
            raise ParseError(path, 1, f"header must be {','.join(MATCHING_HEADER)}")
        return {row[0]: (row[1], row[2]) for row in reader if row}


@dataclass(frozen=True)
class GeneratorSpec:
    students: int
    classes: int
    k: int
    lower: int = 7
    upper_range: tuple[int, int] = (15, 40)
    skew: float = 1.0
    canceled: int = 0
    seed: int = 0
    groups: Optional[Sequence[str]] = None


FY2018_SHAPE = dict(students=1138, classes=54, k=6, canceled=2)
FY2019_SHAPE = dict(students=1123, classes=50, k=5, canceled=0)


def generate_instance(spec: Optional[GeneratorSpec] = None, **kwargs) -> Instance:
    """Synthetic instance with Zipf-skewed class popularity.

    Class popularity follows ``(j + 1) ** -skew`` over a random ordering of
    the classes.  Each student draws ``k`` distinct classes (canceled ones
    included, as in a real survey) without replacement, best first.  Upper
    capacities are uniform on ``upper_range``; if they fall short of the
    student count they are raised one seat at a time, class by class.
    """
    if spec is None:
        spec = GeneratorSpec(**kwargs)
    elif kwargs:
        raise TypeError("pass either a GeneratorSpec or keyword arguments")
    n, m, k = spec.students, spec.classes, spec.k
    if n < 1 or m < 1 or k < 1:
        raise InvalidInstance("students, classes and k must be positive")
    if not 0 <= spec.canceled < m:
        raise InvalidInstance("at least one class must remain active")
    lo, hi = spec.upper_range
    if not 1 <= lo <= hi or spec.lower > hi:
        raise InvalidInstance(f"bad upper range {spec.upper_range} for lower {spec.lower}")
    n_active = m - spec.canceled
    if spec.lower * n_active > n:
        raise InvalidInstance(
            f"unsatisfiable: {n_active} classes x lower {spec.lower} > {n} students")
    if hi * n_active < n:
        raise InvalidInstance(
            f"unsatisfiable: {n_active} classes x upper {hi} < {n} students")

    rng = np.random.default_rng(spec.seed)
    width = len(str(m))
    ids = [f"c{j + 1:0{width}d}" for j in range(m)]
    canceled = set(rng.choice(m, size=spec.canceled, replace=False).tolist())
    uppers = rng.integers(lo, hi + 1, size=m).tolist()
    uppers = [max(u, spec.lower) for u in uppers]
    active_idx = [j for j in range(m) if j not in canceled]
    short = n - sum(uppers[j] for j in active_idx)
    while short > 0:
        for j in active_idx:
            if short > 0 and uppers[j] < hi:
                uppers[j] += 1
                short -= 1
    classes = [
        ClassInfo(ids[j], spec.lower, uppers[j]) if j not in canceled
        else ClassInfo(ids[j], 0, 0, active=False)
        for j in range(m)
    ]

    order = rng.permutation(m)
    weights = np.empty(m)
    weights[order] = (np.arange(m) + 1.0) ** -spec.skew
    weights /= weights.sum()
    sw = len(str(n))
    students = [f"s{i + 1:0{max(sw, 4)}d}" for i in range(n)]
    take = min(k, m)
    prefs = {}
    for s in students:
        picks = rng.choice(m, size=take, replace=False, p=weights)
        prefs[s] = [ids[j] for j in picks]
    groups = None
    if spec.groups:
        labels = list(spec.groups)
        groups = {s: labels[g] for s, g in
                  zip(students, rng.integers(0, len(labels), size=n).tolist())}
    return Instance(students, classes, prefs, k, groups)
