"""Core types for school-choice problems: instances, matchings, ranks, violations.

A problem holds students and schools (dense integer ids, stable external
names), strict preference lists, strict priority lists and quotas.  All types
are immutable after construction and every operation here is a pure function,
so values can be shared freely across threads.

Rank convention (lower is better): a listed school ranks at its 1-based
position, the null school ranks one past the end of the list, and unlisted
schools all rank one past the null school.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property

NULL_SCHOOL = -1

A_DOMINATES = "A-dominates"
B_DOMINATES = "B-dominates"
EQUAL = "equal"
INCOMPARABLE = "incomparable"


class InputError(ValueError):
    """Raised for malformed instances, matchings or operation arguments."""


@dataclass(frozen=True)
class Problem:
    """A school-choice instance.

    Attributes:
        students: external student names; ids are indices in this tuple.
        schools: external school names; ids are indices in this tuple.
        quotas: per school, a positive integer capacity.
        prefs: per student, the strictly ordered tuple of acceptable school
            ids (best first).  Schools missing from the tuple rank below the
            null school.
        priorities: per school, a permutation of all student ids (highest
            priority first).
        completed_priorities: ids of schools whose priority list was only
            partially given in the source file and was completed by appending
            the missing students in declaration order.
    """

    students: tuple[str, ...]
    schools: tuple[str, ...]
    quotas: tuple[int, ...]
    prefs: tuple[tuple[int, ...], ...]
    priorities: tuple[tuple[int, ...], ...]
    completed_priorities: frozenset[int] = frozenset()

    def __post_init__(self):
        n, m = len(self.students), len(self.schools)
        if len(set(self.students)) != n or len(set(self.schools)) != m:
            raise InputError("duplicate student or school names")
        if len(self.quotas) != m or len(self.prefs) != n or len(self.priorities) != m:
            raise InputError("field lengths do not match student/school counts")
        for q in self.quotas:
            if q < 1:
                raise InputError("quotas must be >= 1")
        for i, plist in enumerate(self.prefs):
            if len(set(plist)) != len(plist):
                raise InputError(f"duplicate school in preference list of {self.students[i]}")
            for s in plist:
                if not 0 <= s < m:
                    raise InputError(f"invalid school id {s} in preferences of {self.students[i]}")
        for s, plist in enumerate(self.priorities):
            if sorted(plist) != list(range(n)):
                raise InputError(f"priority list of {self.schools[s]} is not a permutation of all students")

    @property
    def n_students(self) -> int:
        return len(self.students)

    @property
    def n_schools(self) -> int:
        return len(self.schools)

    @cached_property
    def _pref_rank(self) -> list[dict[int, int]]:
        return [{s: pos + 1 for pos, s in enumerate(plist)} for plist in self.prefs]

    @cached_property
    def _prio_rank(self) -> list[list[int]]:
        tables = []
        for plist in self.priorities:
            table = [0] * self.n_students
            for pos, i in enumerate(plist):
                table[i] = pos + 1
            tables.append(table)
        return tables

    def student_id(self, name: str) -> int:
        try:
            return self.students.index(name)
        except ValueError:
            raise InputError(f"unknown student {name!r}") from None

    def school_id(self, name: str) -> int:
        try:
            return self.schools.index(name)
        except ValueError:
            raise InputError(f"unknown school {name!r}") from None


@dataclass(frozen=True)
class Matching:
    """Per-student assignment; ``NULL_SCHOOL`` means unassigned."""

    assignment: tuple[int, ...]

    def school_of(self, student: int) -> int:
        return self.assignment[student]

    def rosters(self, problem: Problem) -> list[list[int]]:
        """Per school, the list of assigned students in ascending id order."""
        out = [[] for _ in range(problem.n_schools)]
        for i, s in enumerate(self.assignment):
            if s != NULL_SCHOOL:
                out[s].append(i)
        return out


@dataclass(frozen=True)
class Violation:
    """A blocking triple: ``victim`` prefers ``school`` to her assignment,
    ``occupant`` is assigned there, and the victim has higher priority."""

    victim: int
    occupant: int
    school: int


def rank_of(problem: Problem, student: int, school: int) -> int:
    """1-based rank of ``school`` (or ``NULL_SCHOOL``) for ``student``.

    The null school ranks ``len(prefs) + 1``; unlisted schools rank
    ``len(prefs) + 2``, uniformly, so every comparison is total.
    """
    if not 0 <= student < problem.n_students:
        raise InputError(f"invalid student id {student}")
    listed = len(problem.prefs[student])
    if school == NULL_SCHOOL:
        return listed + 1
    if not 0 <= school < problem.n_schools:
        raise InputError(f"invalid school id {school}")
    return problem._pref_rank[student].get(school, listed + 2)


def priority_rank_of(problem: Problem, school: int, student: int) -> int:
    """1-based priority rank of ``student`` at ``school`` (1 = highest)."""
    if not 0 <= school < problem.n_schools:
        raise InputError(f"invalid school id {school}")
    if not 0 <= student < problem.n_students:
        raise InputError(f"invalid student id {student}")
    return problem._prio_rank[school][student]


def check_feasible(problem: Problem, matching: Matching) -> None:
    """Raise ``InputError`` unless the matching is well-formed and respects quotas."""
    if len(matching.assignment) != problem.n_students:
        raise InputError("matching length does not match student count")
    counts = [0] * problem.n_schools
    for s in matching.assignment:
        if s == NULL_SCHOOL:
            continue
        if not 0 <= s < problem.n_schools:
            raise InputError(f"invalid school id {s} in matching")
        counts[s] += 1
    for s, c in enumerate(counts):
        if c > problem.quotas[s]:
            raise InputError(f"school {problem.schools[s]} over quota ({c} > {problem.quotas[s]})")


def violations(problem: Problem, matching: Matching) -> list[Violation]:
    """All blocking triples of the matching, duplicate-free.

    Empty exactly when the matching is stable.  Triples are ordered by
    (victim, school, occupant) for deterministic output.
    """
    check_feasible(problem, matching)
    rosters = matching.rosters(problem)
    found = []
    for victim in range(problem.n_students):
        own = rank_of(problem, victim, matching.assignment[victim])
        for school in problem.prefs[victim]:
            if rank_of(problem, victim, school) >= own:
                continue
            vprio = priority_rank_of(problem, school, victim)
            for occupant in rosters[school]:
                if vprio < priority_rank_of(problem, school, occupant):
                    found.append(Violation(victim, occupant, school))
    found.sort(key=lambda v: (v.victim, v.school, v.occupant))
    return found


def respects_priorities_of(problem: Problem, matching: Matching, protected) -> bool:
    """True iff no blocking triple has its victim in ``protected``."""
    protected = set(protected)
    return all(v.victim not in protected for v in violations(problem, matching))


def is_nonwasteful(problem: Problem, matching: Matching) -> bool:
    """True iff no student prefers a school with a free seat to her assignment."""
    check_feasible(problem, matching)
    free = list(problem.quotas)
    for s in matching.assignment:
        if s != NULL_SCHOOL:
            free[s] -= 1
    for i in range(problem.n_students):
        own = rank_of(problem, i, matching.assignment[i])
        for school in problem.prefs[i]:
            if free[school] > 0 and rank_of(problem, i, school) < own:
                return False
    return True


def pareto_compare(problem: Problem, a: Matching, b: Matching) -> str:
    """Compare two matchings by student welfare.

    Returns ``A_DOMINATES`` / ``B_DOMINATES`` when one matching makes every
    student weakly better off and at least one strictly, ``EQUAL`` when all
    ranks coincide, ``INCOMPARABLE`` otherwise.
    """
    check_feasible(problem, a)
    check_feasible(problem, b)
    a_better = b_better = False
    for i in range(problem.n_students):
        ra = rank_of(problem, i, a.assignment[i])
        rb = rank_of(problem, i, b.assignment[i])
        if ra < rb:
            a_better = True
        elif rb < ra:
            b_better = True
    if a_better and b_better:
        return INCOMPARABLE
    if a_better:
        return A_DOMINATES
    if b_better:
        return B_DOMINATES
    return EQUAL


def weakly_dominates(problem: Problem, a: Matching, b: Matching) -> bool:
    """True iff every student weakly prefers ``a`` to ``b``."""
    return pareto_compare(problem, a, b) in (A_DOMINATES, EQUAL)


# ---------------------------------------------------------------------------
# File formats


def problem_from_dict(data: dict) -> Problem:
    try:
        student_names = list(data["students"])
        school_entries = list(data["schools"])
        prefs_raw = data["prefs"]
        prio_raw = data["priorities"]
    except (KeyError, TypeError) as exc:
        raise InputError(f"malformed instance file: missing {exc}") from None
    school_names = [e["name"] for e in school_entries]
    quotas = [int(e["quota"]) for e in school_entries]
    sid = {name: i for i, name in enumerate(student_names)}
    cid = {name: s for s, name in enumerate(school_names)}
    if len(sid) != len(student_names) or len(cid) != len(school_names):
        raise InputError("duplicate student or school names")

    prefs = []
    for name in student_names:
        row = prefs_raw.get(name, [])
        try:
            prefs.append(tuple(cid[s] for s in row))
        except KeyError as exc:
            raise InputError(f"unknown school {exc} in preferences of {name}") from None

    priorities = []
    completed = set()
    for s, name in enumerate(school_names):
        row = prio_raw.get(name, [])
        try:
            listed = [sid[i] for i in row]
        except KeyError as exc:
            raise InputError(f"unknown student {exc} in priorities of {name}") from None
        if len(set(listed)) != len(listed):
            raise InputError(f"duplicate student in priorities of {name}")
        if len(listed) < len(student_names):
            # Partial lists are completed by appending everyone missing, in
            # declaration order; the instance records which schools this hit.
            seen = set(listed)
            listed.extend(i for i in range(len(student_names)) if i not in seen)
            completed.add(s)
        priorities.append(tuple(listed))

    return Problem(
        students=tuple(student_names),
        schools=tuple(school_names),
        quotas=tuple(quotas),
        prefs=tuple(prefs),
        priorities=tuple(priorities),
        completed_priorities=frozenset(completed),
    )


def problem_to_dict(problem: Problem) -> dict:
    return {
        "students": list(problem.students),
        "schools": [
            {"name": name, "quota": problem.quotas[s]}
            for s, name in enumerate(problem.schools)
        ],
        "prefs": {
            problem.students[i]: [problem.schools[s] for s in problem.prefs[i]]
            for i in range(problem.n_students)
        },
        "priorities": {
            problem.schools[s]: [problem.students[i] for i in problem.priorities[s]]
            for s in range(problem.n_schools)
        },
    }


def load_problem(path) -> Problem:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InputError(f"invalid JSON in {path}: {exc}") from None
    return problem_from_dict(data)


def matching_from_dict(problem: Problem, data: dict) -> Matching:
    try:
        raw = data["assignment"]
    except (KeyError, TypeError):
        raise InputError("malformed matching file: missing 'assignment'") from None
    assignment = [NULL_SCHOOL] * problem.n_students
    for sname, cname in raw.items():
        assignment[problem.student_id(sname)] = problem.school_id(cname)
    return Matching(tuple(assignment))


def matching_to_dict(problem: Problem, matching: Matching) -> dict:
    # Students at the null school are omitted; absence means unassigned.
    return {
        "assignment": {
            problem.students[i]: problem.schools[s]
            for i, s in enumerate(matching.assignment)
            if s != NULL_SCHOOL
        }
    }


def load_matching(problem: Problem, path) -> Matching:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InputError(f"invalid JSON in {path}: {exc}") from None
    return matching_from_dict(problem, data)


def dump_matching(problem: Problem, matching: Matching) -> str:
    """Byte-stable JSON text for a matching (sorted keys, trailing newline)."""
    return json.dumps(matching_to_dict(problem, matching), sort_keys=True, indent=2) + "\n"
