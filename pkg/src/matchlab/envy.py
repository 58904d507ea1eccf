"""Labelled envy digraph over a deferred-acceptance outcome.

Nodes are students; an edge i -> j means i strictly prefers j's assigned
school to her own.  Each edge carries a label: the improvable students who
also want j's school and outrank i there, i.e. the potential victims were i
to take that seat.  Students lying on directed cycles (equivalently, in
strongly connected components of size >= 2) are exactly the ones that some
Pareto improvement over the input matching can help.

With quotas above one an edge targets a specific student (a seat), not a
school; labels depend only on the target's school, so they are well-defined
regardless of which occupant a trade displaces.
"""

from __future__ import annotations

from dataclasses import dataclass

from matchlab.model import (
    NULL_SCHOOL,
    InputError,
    Matching,
    Problem,
    check_feasible,
    priority_rank_of,
    rank_of,
)


@dataclass(frozen=True)
class LabelledEnvyDigraph:
    """Envy edges, per-edge labels, and the cycle structure of the graph."""

    edges: dict[int, tuple[int, ...]]
    labels: dict[tuple[int, int], frozenset[int]]
    sccs: tuple[tuple[int, ...], ...]
    improvable: frozenset[int]

    def has_edge(self, i: int, j: int) -> bool:
        return (i, j) in self.labels


@dataclass(frozen=True)
class CyclePacking:
    """Vertex-disjoint student cycles; the carrier of a seat exchange."""

    cycles: tuple[tuple[int, ...], ...]

    @property
    def covered(self) -> frozenset[int]:
        return frozenset(i for cycle in self.cycles for i in cycle)


def canonical_packing(cycles) -> CyclePacking:
    """Rotate each cycle so its smallest student leads; sort cycles by that."""
    normal = []
    for cycle in cycles:
        k = cycle.index(min(cycle))
        normal.append(tuple(cycle[k:]) + tuple(cycle[:k]))
    normal.sort()
    return CyclePacking(tuple(normal))


def strongly_connected_components(nodes, edges) -> list[list[int]]:
    """Tarjan's algorithm, iterative to cope with deep recursion."""
    index = {}
    lowlink = {}
    on_stack = set()
    stack = []
    sccs = []
    counter = [0]

    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(edges.get(root, ())))]
        index[root] = lowlink[root] = counter[0]
        counter[0] += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = lowlink[w] = counter[0]
                    counter[0] += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(edges.get(w, ()))))
                    advanced = True
                    break
                if w in on_stack:
                    lowlink[v] = min(lowlink[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                lowlink[parent] = min(lowlink[parent], lowlink[v])
            if lowlink[v] == index[v]:
                component = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    component.append(w)
                    if w == v:
                        break
                sccs.append(sorted(component))
    return sccs


def build_envy(problem: Problem, da_matching: Matching) -> LabelledEnvyDigraph:
    """Build the labelled envy digraph of a (deferred-acceptance) matching."""
    check_feasible(problem, da_matching)
    n = problem.n_students
    assigned = da_matching.assignment
    own_rank = [rank_of(problem, i, assigned[i]) for i in range(n)]

    edges: dict[int, list[int]] = {i: [] for i in range(n)}
    in_neighbors: dict[int, list[int]] = {j: [] for j in range(n)}
    for i in range(n):
        for j in range(n):
            if i == j or assigned[j] == NULL_SCHOOL:
                continue
            if rank_of(problem, i, assigned[j]) < own_rank[i]:
                edges[i].append(j)
                in_neighbors[j].append(i)

    sccs = strongly_connected_components(range(n), edges)
    # A student never envies herself, so nontrivial means size >= 2.
    improvable = frozenset(i for scc in sccs for i in scc if len(scc) >= 2)

    labels: dict[tuple[int, int], frozenset[int]] = {}
    for j in range(n):
        if not in_neighbors[j]:
            continue
        school = assigned[j]
        ordered = sorted(in_neighbors[j], key=lambda h: priority_rank_of(problem, school, h))
        better: list[int] = []  # improvable in-neighbors seen so far, by priority
        prefix: dict[int, int] = {}
        for h in ordered:
            prefix[h] = len(better)
            if h in improvable:
                better.append(h)
        for i in in_neighbors[j]:
            labels[(i, j)] = frozenset(better[: prefix[i]])

    return LabelledEnvyDigraph(
        edges={i: tuple(v) for i, v in edges.items()},
        labels=labels,
        sccs=tuple(tuple(c) for c in sccs),
        improvable=improvable,
    )


def _check_packing(problem: Problem, da_matching: Matching, packing: CyclePacking) -> None:
    seen = set()
    own_rank = {}
    for cycle in packing.cycles:
        if len(cycle) < 2:
            raise InputError("cycles must have at least two students")
        for i in cycle:
            if not 0 <= i < problem.n_students:
                raise InputError(f"invalid student id {i} in packing")
            if i in seen:
                raise InputError(f"student {problem.students[i]} appears in two cycles")
            seen.add(i)
        for pos, i in enumerate(cycle):
            j = cycle[(pos + 1) % len(cycle)]
            target = da_matching.assignment[j]
            if i not in own_rank:
                own_rank[i] = rank_of(problem, i, da_matching.assignment[i])
            if target == NULL_SCHOOL or rank_of(problem, i, target) >= own_rank[i]:
                raise InputError(
                    f"{problem.students[i]} -> {problem.students[j]} is not an envy edge"
                )


def apply_packing(problem: Problem, da_matching: Matching, packing: CyclePacking) -> Matching:
    """Trade along every cycle: each member takes her successor's seat.

    Covered students strictly improve; everyone else keeps her assignment.
    Raises ``InputError`` for overlapping cycles or non-edges.
    """
    _check_packing(problem, da_matching, packing)
    assignment = list(da_matching.assignment)
    for cycle in packing.cycles:
        for pos, i in enumerate(cycle):
            j = cycle[(pos + 1) % len(cycle)]
            assignment[i] = da_matching.assignment[j]
    return Matching(tuple(assignment))


def packing_label(digraph: LabelledEnvyDigraph, packing: CyclePacking) -> frozenset[int]:
    """Union of the labels of all traded edges."""
    out: set[int] = set()
    for cycle in packing.cycles:
        for pos, i in enumerate(cycle):
            j = cycle[(pos + 1) % len(cycle)]
            if (i, j) not in digraph.labels:
                raise InputError("packing uses an edge outside the digraph")
            out |= digraph.labels[(i, j)]
    return frozenset(out)


def decompose_as_packing(problem: Problem, da_matching: Matching, matching: Matching):
    """Recover the cycle packing over ``da_matching`` that yields ``matching``.

    Returns the packing in canonical form (minimum student first in each
    cycle), or ``None`` when the matching does not arise from trading seats
    along envy edges: some mover fails to strictly improve, or the movers do
    not permute the occupied seats school by school.  Which occupant a mover
    displaces is ambiguous for quotas above one; entrants and leavers are
    paired in ascending id order, which never changes edge labels.
    """
    check_feasible(problem, matching)
    movers = [
        i
        for i in range(problem.n_students)
        if matching.assignment[i] != da_matching.assignment[i]
    ]
    if not movers:
        return CyclePacking(())

    entrants: dict[int, list[int]] = {}
    leavers: dict[int, list[int]] = {}
    for i in movers:
        old, new = da_matching.assignment[i], matching.assignment[i]
        if old == NULL_SCHOOL or new == NULL_SCHOOL:
            return None
        if rank_of(problem, i, new) >= rank_of(problem, i, old):
            return None
        entrants.setdefault(new, []).append(i)
        leavers.setdefault(old, []).append(i)
    if set(entrants) != set(leavers):
        return None
    successor = {}
    for school, arriving in entrants.items():
        leaving = sorted(leavers[school])
        if len(arriving) != len(leaving):
            return None
        for i, j in zip(sorted(arriving), leaving):
            successor[i] = j

    cycles = []
    remaining = set(movers)
    while remaining:
        start = min(remaining)
        cycle = [start]
        remaining.discard(start)
        cur = successor[start]
        while cur != start:
            cycle.append(cur)
            remaining.discard(cur)
            cur = successor[cur]
        cycles.append(tuple(cycle))
    return canonical_packing(cycles)
