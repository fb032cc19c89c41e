"""Box Relations Graph: dependency probing, safe sequencing, task division,
and support-candidate ranking.

An edge (d, b) means "b depends on d": removing d (possibly through a
cascade) would destabilize b. Dependencies are established by probing the
hypothetical removal of every box, so transitive cascade effects are
edges too. Plans order dependents before their supporters, which is what
makes step-by-step extraction collapse-free.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Literal, Mapping

from . import physics
from .errors import CyclicDependencies, InvalidK, MissingBox, PlanDictionaryMismatch
from .scene import ALL, Scene


@dataclass(frozen=True)
class DependencyDictionary:
    """Map box id -> ids whose removal would destabilize it."""

    entries: Mapping[str, frozenset[str]]


@dataclass(frozen=True)
class BoxRelationsGraph:
    """Directed acyclic graph mirroring a DependencyDictionary."""

    nodes: tuple[str, ...]
    edges: tuple[tuple[str, str], ...]  # (d, b): b depends on d

    def successors(self) -> dict[str, list[str]]:
        """d -> dependents of d, each list sorted by id."""
        out: dict[str, list[str]] = {n: [] for n in self.nodes}
        for d, b in self.edges:
            out[d].append(b)
        for lst in out.values():
            lst.sort()
        return out

    def predecessors(self) -> dict[str, frozenset[str]]:
        """b -> D[b], the boxes b depends on."""
        out: dict[str, set[str]] = {n: set() for n in self.nodes}
        for d, b in self.edges:
            out[b].add(d)
        return {k: frozenset(v) for k, v in out.items()}

    def to_document(self) -> dict:
        return {"nodes": list(self.nodes), "edges": [list(e) for e in self.edges]}


@dataclass(frozen=True)
class ExtractionPlan:
    """Ordered removal sequence; target is a box id or ALL."""

    target: str
    sequence: tuple[str, ...]

    def to_document(self) -> dict:
        return {"target": self.target, "sequence": list(self.sequence)}


@dataclass(frozen=True)
class TaskSplit:
    """Order-preserving partition of a plan into robot and human tasks."""

    robot_tasks: tuple[str, ...]
    human_tasks: tuple[str, ...]

    def to_document(self) -> dict:
        return {"robot_tasks": list(self.robot_tasks), "human_tasks": list(self.human_tasks)}


@dataclass(frozen=True)
class SupportCandidates:
    """Boxes worth holding during an extraction, best first."""

    ranked: tuple[tuple[str, int], ...]

    def to_document(self) -> dict:
        return {"ranked": [[bid, count] for bid, count in self.ranked]}


Policy = Literal["literal", "independence"]
Ranking = Literal["literal", "at_risk"]


def build_dependency_dictionary(scene: Scene) -> DependencyDictionary:
    """Probe the removal of every box once and invert the collapse sets."""
    collapse_of = physics.probe_all_removals(scene)
    entries: dict[str, set[str]] = {bid: set() for bid in scene.ids}
    for s, collapsed in collapse_of.items():
        for b in collapsed:
            entries[b].add(s)
    return DependencyDictionary(entries={k: frozenset(v) for k, v in entries.items()})


def build_graph(d: DependencyDictionary) -> BoxRelationsGraph:
    """Materialize the graph (one edge per dependency) and reject cycles."""
    nodes = tuple(sorted(d.entries))
    known = set(nodes)
    edges = []
    for b in nodes:
        for dep in d.entries[b]:
            if dep not in known:
                raise ValueError(f"dependency {dep!r} of {b!r} is not a box")
            edges.append((dep, b))
    edges.sort()
    g = BoxRelationsGraph(nodes=nodes, edges=tuple(edges))
    _check_acyclic(g)
    return g


def _check_acyclic(g: BoxRelationsGraph) -> None:
    succ = g.successors()
    indeg = {n: 0 for n in g.nodes}
    for _, b in g.edges:
        indeg[b] += 1
    ready = [n for n in g.nodes if indeg[n] == 0]
    seen = 0
    while ready:
        n = ready.pop()
        seen += 1
        for m in succ[n]:
            indeg[m] -= 1
            if indeg[m] == 0:
                ready.append(m)
    if seen != len(g.nodes):
        raise CyclicDependencies("dependency graph contains a cycle")


def related_set(g: BoxRelationsGraph, target: str) -> frozenset[str]:
    """The target plus everything that transitively depends on it."""
    if target not in g.nodes:
        raise MissingBox(target)
    succ = g.successors()
    seen = {target}
    stack = [target]
    while stack:
        for nxt in succ[stack.pop()]:
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return frozenset(seen)


def _kahn_dependents_first(g: BoxRelationsGraph, subset: frozenset[str]) -> tuple[str, ...]:
    """Topological order of the subset with every box before its supporters.

    Runs Kahn's algorithm on the reversed subgraph (a box becomes ready
    once all boxes depending on it are out), ties broken by id ascending.
    """
    pred = g.predecessors()
    # reversed edges: b -> d for each (d, b); in-degree counts dependents
    indeg = {n: 0 for n in subset}
    for b in subset:
        for d in pred[b]:
            if d in subset:
                indeg[d] += 1
    ready = [n for n in subset if indeg[n] == 0]
    heapq.heapify(ready)
    out = []
    while ready:
        b = heapq.heappop(ready)
        out.append(b)
        for d in pred[b]:
            if d in subset:
                indeg[d] -= 1
                if indeg[d] == 0:
                    heapq.heappush(ready, d)
    if len(out) != len(subset):
        raise CyclicDependencies("dependency graph contains a cycle")
    return tuple(out)


def safe_sequence(g: BoxRelationsGraph, target: str) -> ExtractionPlan:
    """Collapse-free removal order ending at the target.

    Covers exactly the related set: every box that would (transitively)
    collapse if the target came out early, each removed before the boxes
    it rests on. The target is necessarily last.
    """
    related = related_set(g, target)
    sequence = _kahn_dependents_first(g, related)
    return ExtractionPlan(target=target, sequence=sequence)


def full_clear_sequence(g: BoxRelationsGraph) -> ExtractionPlan:
    """Collapse-free removal order covering every box."""
    sequence = _kahn_dependents_first(g, frozenset(g.nodes))
    return ExtractionPlan(target=ALL, sequence=sequence)


def divide_tasks(plan: ExtractionPlan, d: DependencyDictionary,
                 policy: Policy = "literal") -> TaskSplit:
    """Partition a plan into robot and human tasks, order preserved.

    literal: a box goes to the robot iff it has no dependencies at all.
    independence: a box goes to the robot iff no box still present at its
    turn depends on it, so a well-ordered plan becomes fully robotic.
    """
    if policy not in ("literal", "independence"):
        raise ValueError(f"unknown policy {policy!r}")
    seq = plan.sequence
    if len(set(seq)) != len(seq):
        raise PlanDictionaryMismatch("plan sequence contains duplicates")
    unknown = set(seq) - set(d.entries)
    if unknown:
        raise PlanDictionaryMismatch(f"plan references unknown boxes {sorted(unknown)}")
    robot, human = [], []
    if policy == "literal":
        for b in seq:
            (robot if not d.entries[b] else human).append(b)
    else:
        dependents: dict[str, set[str]] = {b: set() for b in d.entries}
        for b, deps in d.entries.items():
            for dep in deps:
                dependents.setdefault(dep, set()).add(b)
        removed: set[str] = set()
        for b in seq:
            blocked = dependents.get(b, set()) - removed - {b}
            (human if blocked else robot).append(b)
            removed.add(b)
    return TaskSplit(robot_tasks=tuple(robot), human_tasks=tuple(human))


def support_candidates(g: BoxRelationsGraph, target: str, k: int,
                       ranking: Ranking = "literal") -> SupportCandidates:
    """Rank boxes in the target's related set by support count.

    literal: score(b) = number of boxes b depends on within the related
    set (the target itself is a candidate). at_risk: score(b) = number of
    related boxes depending on b, with the target excluded; this is the
    box whose holding protects the most at-risk boxes.
    """
    if k < 1:
        raise InvalidK(f"k must be at least 1, got {k}")
    if ranking not in ("literal", "at_risk"):
        raise ValueError(f"unknown ranking {ranking!r}")
    related = related_set(g, target)
    scored: list[tuple[str, int]] = []
    if ranking == "literal":
        pred = g.predecessors()
        for b in related:
            scored.append((b, len(pred[b] & related)))
    else:
        succ = g.successors()
        for b in related:
            if b == target:
                continue
            scored.append((b, sum(1 for x in succ[b] if x in related)))
    scored.sort(key=lambda item: (-item[1], item[0]))
    return SupportCandidates(ranked=tuple(scored[:k]))


def export_dot(g: BoxRelationsGraph) -> str:
    """Deterministic DOT text: nodes in id order, edges lexicographic."""
    lines = ["digraph brg {"]
    for n in g.nodes:
        lines.append(f'  "{n}";')
    for d, b in g.edges:
        lines.append(f'  "{d}" -> "{b}";')
    lines.append("}")
    return "\n".join(lines) + "\n"
