"""Student-proposing deferred acceptance with a round-by-round trace.

Rounds are simultaneous: every currently rejected student proposes in the
same round.  The final outcome is order-independent, but the *round numbers*
recorded in the trace are not, and downstream bookkeeping (interrupting
pairs) depends on them, so this convention is part of the contract.
"""

from __future__ import annotations

from dataclasses import dataclass

from matchlab.model import (
    NULL_SCHOOL,
    InputError,
    Matching,
    Problem,
)


@dataclass(frozen=True)
class DaRound:
    """One proposal round.

    ``applicants`` holds only the *new* proposals of the round, so a student
    appears as an applicant to a given school at most once in the whole
    trace.  ``held`` is the post-round tentative roster, ``rejected`` the
    students turned away this round (newly arrived or displaced).
    """

    applicants: dict[int, tuple[int, ...]]
    held: dict[int, tuple[int, ...]]
    rejected: dict[int, tuple[int, ...]]


@dataclass(frozen=True)
class DaTrace:
    rounds: tuple[DaRound, ...]
    final: Matching
    proposals: int


@dataclass(frozen=True)
class InterruptPair:
    """A student whose tentative hold at a school caused rejections before
    she was herself rejected from it."""

    student: int
    school: int
    rejection_round: int


def run_da(problem: Problem) -> tuple[Matching, DaTrace]:
    """Run deferred acceptance; returns the student-optimal stable matching
    and its execution trace.

    A student who exhausts her list is assigned the null school and stops
    proposing.  Total proposals are bounded by ``n_students * n_schools``.
    """
    n = problem.n_students
    prefs = problem.prefs
    prio_tables = problem._prio_rank
    next_choice = [0] * n
    held: list[list[int]] = [[] for _ in range(problem.n_schools)]
    active = list(range(n))
    rounds = []
    proposals = 0

    while True:
        new_by_school: dict[int, list[int]] = {}
        for i in active:
            if next_choice[i] >= len(prefs[i]):
                continue
            s = prefs[i][next_choice[i]]
            new_by_school.setdefault(s, []).append(i)
            proposals += 1
        if not new_by_school:
            break

        held_snapshot = {}
        rejected_snapshot = {}
        active = []
        for s, newcomers in new_by_school.items():
            pool = held[s] + newcomers
            pool.sort(key=prio_tables[s].__getitem__)
            kept, rejected = pool[: problem.quotas[s]], pool[problem.quotas[s] :]
            held[s] = kept
            held_snapshot[s] = tuple(sorted(kept))
            if rejected:
                rejected_snapshot[s] = tuple(sorted(rejected))
            for i in rejected:
                next_choice[i] += 1
                active.append(i)
        rounds.append(
            DaRound(
                applicants={s: tuple(sorted(v)) for s, v in sorted(new_by_school.items())},
                held=held_snapshot,
                rejected=rejected_snapshot,
            )
        )

    assignment = [NULL_SCHOOL] * n
    for s, roster in enumerate(held):
        for i in roster:
            assignment[i] = s
    matching = Matching(tuple(assignment))
    return matching, DaTrace(tuple(rounds), matching, proposals)


def held_by_round(trace: DaTrace, n_schools: int) -> list[list[tuple[int, ...]]]:
    """Full per-round tentative rosters, carrying holds across quiet rounds."""
    current: list[tuple[int, ...]] = [()] * n_schools
    out = []
    for rnd in trace.rounds:
        for s, kept in rnd.held.items():
            current[s] = kept
        out.append(list(current))
    return out


def rejecting_schools(problem: Problem, trace: DaTrace, improvable) -> set[int]:
    """Schools that rejected at least one student from ``improvable``."""
    improvable = set(improvable)
    for i in improvable:
        if not 0 <= i < problem.n_students:
            raise InputError(f"invalid student id {i} in improvable set")
    out = set()
    for rnd in trace.rounds:
        for s, rejected in rnd.rejected.items():
            if any(i in improvable for i in rejected):
                out.add(s)
    return out


def interrupters(problem: Problem, trace: DaTrace) -> list[InterruptPair]:
    """All interrupting pairs of the trace, sorted by rejection round.

    A pair (i, s) qualifies when some other student was rejected from s in a
    round at whose end i was tentatively held there, and i was later rejected
    from s herself.  A rejection in the very round a student arrives counts:
    she ends that round held while the other was turned away.
    """
    rosters = held_by_round(trace, problem.n_schools)
    pairs = []
    for r, rnd in enumerate(trace.rounds):
        for s, rejected in rnd.rejected.items():
            for i in rejected:
                if r == 0 or i not in rosters[r - 1][s]:
                    continue  # never held: rejected on arrival
                # i was held at s through rounds [entry, r-1]; look for another
                # student rejected from s in one of those rounds.
                if _saw_other_rejection(trace, rosters, s, i, r):
                    pairs.append(InterruptPair(i, s, r + 1))
    pairs.sort(key=lambda p: (p.rejection_round, p.student, p.school))
    return pairs


def _saw_other_rejection(trace, rosters, school, student, rejection_round):
    for r in range(rejection_round - 1, -1, -1):
        if student not in rosters[r][school]:
            return False
        others = trace.rounds[r].rejected.get(school, ())
        if any(j != student for j in others):
            return True
    return False
