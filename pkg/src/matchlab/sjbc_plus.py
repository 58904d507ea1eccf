"""Beneficiary-set expansion over the JBC matching, plus a refinement pass.

Expansion works on a bipartite graph whose two sides are copies of the
improvable students.  A permutation with self-loops encodes a trade plan:
non-loop edges are envy edges and decompose into disjoint trading cycles,
loops mean "stay at DA".  An envy edge is admissible while its label is
contained in the current beneficiary set, i.e. the only priorities it can
put at stake belong to students who are gaining anyway.  Each iteration
picks, among permutations that use only admissible edges and keep every
current beneficiary trading, one with the fewest self-loops; newly covered
students enlarge the beneficiary set and may unlock more edges, so this
repeats to a fixed point.

A maximum matching on the loop-free bipartite graph is not a safe substitute
for the permutation formulation: it may cover unequal left/right vertex sets
(a path, not a cycle), which no self-loop completion can turn into a feasible
trade plan.  Minimising loops over perfect matchings of the loop-augmented
graph is the formulation that is always feasible, and it is solved here as a
0/1-cost assignment problem.

The refinement pass then fixes leftover inefficiency among the final
beneficiaries: it repeatedly executes cycles of envy edges at the *current*
matching whose execution cannot violate the priority of any improvable
student outside the beneficiary set, until none remain.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from matchlab import da as da_mod
from matchlab.envy import LabelledEnvyDigraph, build_envy, decompose_as_packing
from matchlab.jbc import run_jbc
from matchlab.model import (
    Matching,
    Problem,
    priority_rank_of,
    rank_of,
)


@dataclass(frozen=True)
class ExpansionState:
    """Snapshot of one expansion iteration."""

    t: int
    beneficiaries: frozenset[int]
    permutation: dict[int, int]
    admissible: dict[int, tuple[int, ...]]


def _admissible_adjacency(digraph: LabelledEnvyDigraph, covered: frozenset[int]):
    improvable = digraph.improvable
    adj = {}
    for i in sorted(improvable):
        adj[i] = tuple(
            j
            for j in digraph.edges[i]
            if j in improvable and digraph.labels[(i, j)] <= covered
        )
    return adj


def _min_loop_permutation(nodes: list[int], adj: dict[int, tuple[int, ...]], keep_trading):
    """Fewest-self-loop permutation using only ``adj`` edges and loops.

    Students in ``keep_trading`` may not take a loop.  Always feasible as
    long as the caller guarantees some loop-free cover for them (here: the
    previous iteration's permutation stays admissible).
    """
    k = len(nodes)
    if k == 0:
        return {}
    index = {v: t for t, v in enumerate(nodes)}
    big = k + 2
    cost = np.full((k, k), big, dtype=np.int64)
    for a in nodes:
        for j in adj[a]:
            cost[index[a], index[j]] = 0
    for a in nodes:
        if a not in keep_trading:
            cost[index[a], index[a]] = 1
    rows, cols = linear_sum_assignment(cost)
    total = int(cost[rows, cols].sum())
    if total >= big:
        raise RuntimeError("no feasible trade permutation; beneficiary set corrupted")
    return {nodes[r]: nodes[c] for r, c in zip(rows, cols)}


def expansion_step(
    problem: Problem, digraph: LabelledEnvyDigraph, state: ExpansionState
) -> ExpansionState:
    """One iteration: re-optimise the permutation under the current set.

    The new beneficiary set is the set of students on non-loop edges; it
    always contains the previous one.  A step that cannot enlarge the set
    returns an equivalent state (same beneficiaries), which callers use as
    the stopping signal.
    """
    nodes = sorted(digraph.improvable)
    adj = _admissible_adjacency(digraph, state.beneficiaries)
    perm = _min_loop_permutation(nodes, adj, state.beneficiaries)
    covered = frozenset(i for i in nodes if perm[i] != i)
    if covered == state.beneficiaries:
        perm = dict(state.permutation)  # no growth: keep the previous plan
    return ExpansionState(state.t + 1, covered, perm, adj)


def _matching_from_permutation(problem, da_matching, perm) -> Matching:
    assignment = list(da_matching.assignment)
    for i, j in perm.items():
        if i != j:
            assignment[i] = da_matching.assignment[j]
    return Matching(tuple(assignment))


def run_expansion(problem: Problem, da_matching=None, trace=None, digraph=None, log=None):
    """Expand from the JBC matching; returns the matching and its beneficiaries."""
    if da_matching is None or trace is None:
        da_matching, trace = da_mod.run_da(problem)
    if digraph is None:
        digraph = build_envy(problem, da_matching)
    if not digraph.improvable:
        return da_matching, frozenset()

    jbc_matching, _ = run_jbc(problem, da_matching, trace, digraph)
    packing = decompose_as_packing(problem, da_matching, jbc_matching)
    perm = {i: i for i in digraph.improvable}
    for cycle in packing.cycles:
        for pos, i in enumerate(cycle):
            perm[i] = cycle[(pos + 1) % len(cycle)]
    state = ExpansionState(0, frozenset(packing.covered), perm, {})
    if log is not None:
        log.append(_expansion_line(problem, state))

    for _ in range(problem.n_students):
        nxt = expansion_step(problem, digraph, state)
        if log is not None:
            log.append(_expansion_line(problem, nxt))
        if nxt.beneficiaries == state.beneficiaries:
            state = nxt
            break
        state = nxt

    matching = _matching_from_permutation(problem, da_matching, state.permutation)
    return matching, state.beneficiaries


def _expansion_line(problem, state) -> str:
    names = ", ".join(problem.students[i] for i in sorted(state.beneficiaries))
    return f"expansion t={state.t}: beneficiaries = {{{names}}}"


def _school_thresholds(problem, da_matching, improvable, b_star):
    """Per school, the best priority rank held by an improvable
    non-beneficiary who prefers the school to her DA assignment."""
    inf = problem.n_students + 1
    thresholds = [inf] * problem.n_schools
    for h in improvable:
        if h in b_star:
            continue
        own = rank_of(problem, h, da_matching.assignment[h])
        for s in problem.prefs[h]:
            if rank_of(problem, h, s) < own:
                r = priority_rank_of(problem, s, h)
                if r < thresholds[s]:
                    thresholds[s] = r
    return thresholds


def _find_cycle(nodes, adj):
    """Admissible cycle whose minimum member is smallest, or None.

    For each candidate start (ascending), depth-first search restricted to
    ids at least the start, with neighbours visited in ascending order.
    """
    node_set = set(nodes)
    for start in nodes:
        parent = {start: None}
        stack = [start]
        while stack:
            u = stack.pop()
            for w in adj.get(u, ()):
                if w == start:
                    path = [u]
                    while parent[path[-1]] is not None:
                        path.append(parent[path[-1]])
                    return list(reversed(path))
            for w in reversed(adj.get(u, ())):  # pop order: ascending ids
                if w > start and w in node_set and w not in parent:
                    parent[w] = u
                    stack.append(w)
    return None


def run_refinement(problem: Problem, mu_star: Matching, b_star, da_matching=None, digraph=None, log=None):
    """Trade along admissible cycles at the current matching until none remain.

    Cycles run among the fixed beneficiary set only, so the beneficiaries of
    the result equal ``b_star``; every executed cycle strictly improves each
    of its members relative to her current seat.
    """
    if da_matching is None:
        da_matching, _ = da_mod.run_da(problem)
    if digraph is None:
        digraph = build_envy(problem, da_matching)
    b_star = frozenset(b_star)
    members = sorted(b_star)
    if not members:
        return mu_star
    thresholds = _school_thresholds(problem, da_matching, digraph.improvable, b_star)

    current = list(mu_star.assignment)
    max_rounds = len(members) * max(problem.n_schools - 1, 1) + 1
    for _ in range(max_rounds):
        adj = {}
        for i in members:
            own = rank_of(problem, i, current[i])
            targets = []
            for j in members:
                if j == i:
                    continue
                s = current[j]
                if rank_of(problem, i, s) >= own:
                    continue
                if priority_rank_of(problem, s, i) <= thresholds[s]:
                    targets.append(j)
            adj[i] = tuple(targets)
        cycle = _find_cycle(members, adj)
        if cycle is None:
            return Matching(tuple(current))
        if log is not None:
            log.append(
                "refinement cycle: "
                + " -> ".join(problem.students[i] for i in cycle + [cycle[0]])
            )
        taken = [current[cycle[(pos + 1) % len(cycle)]] for pos in range(len(cycle))]
        for pos, i in enumerate(cycle):
            current[i] = taken[pos]
    raise RuntimeError("refinement exceeded its iteration bound")


def run_sjbc_plus(problem: Problem, log=None) -> Matching:
    """Full pipeline: deferred acceptance, JBC, expansion, refinement."""
    da_matching, trace = da_mod.run_da(problem)
    digraph = build_envy(problem, da_matching)
    mu_star, b_star = run_expansion(problem, da_matching, trace, digraph, log=log)
    refined = run_refinement(problem, mu_star, b_star, da_matching, digraph, log=log)
    return refined
