"""Evolutionary construction of valid economy graphs.

Individuals are edge lists over a fixed, user-chosen multiset of typed
nodes. Every generation each individual tries to add one random edge
(insertion is guarded: an edge that would break a degree bound or a
neighbor-kind rule is simply not added), and with some probability one
random individual loses one random edge. A run stops at the first
individual whose graph satisfies every connection constraint and is
weakly connected, or when the step budget runs out.

Because insertions are guarded, an individual can only ever violate
minimum-degree requirements, so its constraint-violation total is
maintained incrementally in O(1) per mutation.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass
from typing import Mapping

from .model import (
    CONSTRAINTS,
    EconomyGraph,
    Edge,
    Node,
    NodeKind,
    normalize_gate_weights,
)

#: Kinds drawn when sampling random node multisets; fixed pools are a
#: designer refinement and are not generated.
SAMPLED_KINDS = (
    NodeKind.SOURCE,
    NodeKind.RANDOM_GATE,
    NodeKind.POOL,
    NodeKind.CONVERTER,
    NodeKind.DRAIN,
)


@dataclass(frozen=True)
class GeneratorConfig:
    node_counts: Mapping
    population_size: int = 10
    max_steps: int = 50000
    remove_probability: float = 0.1
    seed: int = 0

    def __post_init__(self):
        counts = dict(self.node_counts)
        for kind, count in counts.items():
            if not isinstance(kind, NodeKind):
                raise ValueError(f"unknown node kind {kind!r}")
            if not isinstance(count, int) or count < 0:
                raise ValueError(f"count for {kind.value} must be a nonnegative integer")
        object.__setattr__(self, "node_counts", counts)
        if sum(counts.values()) < 2:
            raise ValueError("need at least two nodes to build an economy")
        if self.population_size < 1:
            raise ValueError("population_size must be >= 1")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if not 0.0 <= self.remove_probability <= 1.0:
            raise ValueError("remove_probability must be in [0, 1]")


class EdgeListGenome:
    """One individual: a growing edge list over a shared node tuple.

    try_add enforces the no-duplicate, no-self-loop, neighbor-kind and
    maximum-degree rules, so the only constraint violations a genome can
    carry are unmet minimum degrees (tracked in ``fitness``).
    """

    __slots__ = ("nodes", "edges", "_rules", "_edge_set", "_in_deg", "_out_deg", "_missing")

    def __init__(self, nodes: tuple):
        self.nodes = nodes
        self.edges = []
        self._rules = [CONSTRAINTS[n.kind.constraint_kind] for n in nodes]
        self._edge_set = set()
        self._in_deg = [0] * len(nodes)
        self._out_deg = [0] * len(nodes)
        self._missing = sum(
            (1 if r.min_in > 0 else 0) + (1 if r.min_out > 0 else 0) for r in self._rules
        )

    @property
    def fitness(self) -> int:
        """Unmet minimum-degree count; equals the ordinary graph fitness."""
        return self._missing

    def try_add(self, a: int, b: int) -> bool:
        """Add the directed edge a->b if every rule allows it."""
        if a == b or (a, b) in self._edge_set:
            return False
        rule_a, rule_b = self._rules[a], self._rules[b]
        kind_a = self.nodes[a].kind.constraint_kind
        kind_b = self.nodes[b].kind.constraint_kind
        if kind_b not in rule_a.allowed_outputs or kind_a not in rule_b.allowed_inputs:
            return False
        if self._out_deg[a] >= rule_a.max_out or self._in_deg[b] >= rule_b.max_in:
            return False
        self._bump_out(a, 1)
        self._bump_in(b, 1)
        self._edge_set.add((a, b))
        self.edges.append((a, b))
        return True

    def remove_index(self, index: int) -> None:
        a, b = self.edges.pop(index)
        self._edge_set.discard((a, b))
        self._bump_out(a, -1)
        self._bump_in(b, -1)

    def _bump_out(self, v: int, delta: int) -> None:
        minimum = self._rules[v].min_out
        old = self._out_deg[v]
        new = old + delta
        if old < minimum <= new:
            self._missing -= 1
        elif new < minimum <= old:
            self._missing += 1
        self._out_deg[v] = new

    def _bump_in(self, v: int, delta: int) -> None:
        minimum = self._rules[v].min_in
        old = self._in_deg[v]
        new = old + delta
        if old < minimum <= new:
            self._missing -= 1
        elif new < minimum <= old:
            self._missing += 1
        self._in_deg[v] = new

    def is_connected(self) -> bool:
        n = len(self.nodes)
        if n <= 1:
            return True
        neighbors = [[] for _ in range(n)]
        for a, b in self.edges:
            neighbors[a].append(b)
            neighbors[b].append(a)
        seen = [False] * n
        seen[0] = True
        stack = [0]
        count = 1
        while stack:
            for other in neighbors[stack.pop()]:
                if not seen[other]:
                    seen[other] = True
                    count += 1
                    stack.append(other)
        return count == n

    def copy(self) -> "EdgeListGenome":
        clone = EdgeListGenome.__new__(EdgeListGenome)
        clone.nodes = self.nodes
        clone.edges = list(self.edges)
        clone._rules = self._rules
        clone._edge_set = set(self._edge_set)
        clone._in_deg = list(self._in_deg)
        clone._out_deg = list(self._out_deg)
        clone._missing = self._missing
        return clone

    def to_graph(self, normalize: bool = True) -> EconomyGraph:
        """Materialize as a graph with unit weights.

        Gate weights become uniform probability shares when ``normalize``
        is set (requires every gate to have at least one outgoing edge).
        """
        edges = tuple(Edge(self.nodes[a].id, self.nodes[b].id, 1) for a, b in self.edges)
        graph = EconomyGraph(self.nodes, edges)
        return normalize_gate_weights(graph) if normalize else graph


def mutate_add_edge(genome: EdgeListGenome, rng: random.Random) -> EdgeListGenome:
    """Sample two distinct vertices and add the edge if the rules allow it."""
    a, b = rng.sample(range(len(genome.nodes)), 2)
    genome.try_add(a, b)
    return genome


def mutate_remove_edge(population, rng: random.Random, remove_probability: float):
    """With the given probability, delete one random edge of one random individual."""
    if rng.random() < remove_probability:
        genome = population[rng.randrange(len(population))]
        if genome.edges:
            genome.remove_index(rng.randrange(len(genome.edges)))
    return population


@dataclass(frozen=True)
class GenerationResult:
    graph: EconomyGraph
    valid: bool
    generations: int
    fitness: int
    fitness_history: tuple
    elapsed_ms: float

    def report_dict(self) -> dict:
        return {
            "valid": self.valid,
            "generations": self.generations,
            "final_fitness": self.fitness,
        }


def build_nodes(node_counts: Mapping) -> tuple:
    """Node tuple for a multiset of kinds; ids are kind_0, kind_1, ..."""
    nodes = []
    for kind in NodeKind:
        for i in range(node_counts.get(kind, 0)):
            nodes.append(Node(f"{kind.value}_{i}", kind))
    return tuple(nodes)


def generate(config: GeneratorConfig) -> GenerationResult:
    """Evolve a valid economy over the configured node multiset.

    Returns the first valid individual found (unit weights, gate shares
    uniform) or, after max_steps generations, the best individual seen
    with its remaining constraint-violation count.
    """
    started = time.perf_counter()
    rng = random.Random(config.seed)
    nodes = build_nodes(config.node_counts)
    population = [EdgeListGenome(nodes) for _ in range(config.population_size)]

    best = population[0].copy()
    history = [best.fitness]
    for generation in range(1, config.max_steps + 1):
        for genome in population:
            mutate_add_edge(genome, rng)
        mutate_remove_edge(population, rng, config.remove_probability)

        generation_best = min(genome.fitness for genome in population)
        history.append(generation_best)
        if generation_best < best.fitness:
            for genome in population:
                if genome.fitness == generation_best:
                    best = genome.copy()
                    break
        if generation_best == 0:
            for genome in population:
                if genome.fitness == 0 and genome.is_connected():
                    elapsed = (time.perf_counter() - started) * 1000.0
                    return GenerationResult(
                        genome.to_graph(normalize=True),
                        True,
                        generation,
                        0,
                        tuple(history),
                        elapsed,
                    )

    elapsed = (time.perf_counter() - started) * 1000.0
    return GenerationResult(
        best.to_graph(normalize=False),
        False,
        config.max_steps,
        best.fitness,
        tuple(history),
        elapsed,
    )


def plausible_node_counts(counts: Mapping) -> bool:
    """Cheap necessary conditions for a kind multiset to admit a valid graph.

    Counts required inputs/outputs per kind against the input slots and
    output capacity the other kinds can offer. Necessary, not sufficient:
    a passing multiset may still be unwirable, but a failing one never is.
    """
    s = counts.get(NodeKind.SOURCE, 0)
    g = counts.get(NodeKind.RANDOM_GATE, 0)
    p = counts.get(NodeKind.POOL, 0) + counts.get(NodeKind.FIXED_POOL, 0)
    c = counts.get(NodeKind.CONVERTER, 0)
    d = counts.get(NodeKind.DRAIN, 0)
    return (
        s >= 1
        and p >= 1
        and g <= 3 * s + c  # every gate needs one feed from a source or converter
        and s + c <= 2 * p + g  # source and converter outputs need pool/gate input slots
        and 2 * g <= 2 * p + 3 * c  # gate outputs need pool/converter input slots
        and d <= 3 * p  # drains are fed by pools only
        and p <= 3 * s + 3 * g + c  # every pool needs a feed
        and c + d <= 3 * p + 3 * g  # converters and drains share pool/gate output capacity
        and s + 2 * g + c <= 2 * p + g + 3 * c  # all required outputs vs all input slots
    )


def random_node_counts(rng: random.Random, lo: int = 5, hi: int = 20) -> dict:
    """Random kind multiset with lo..hi nodes that passes the feasibility screen.

    Kinds are drawn uniformly per node; multisets lacking a source or a
    pool, or failing plausible_node_counts, are redrawn.
    """
    if not 2 <= lo <= hi:
        raise ValueError("need 2 <= lo <= hi")
    while True:
        n = rng.randint(lo, hi)
        kinds = [SAMPLED_KINDS[rng.randrange(len(SAMPLED_KINDS))] for _ in range(n)]
        if NodeKind.SOURCE not in kinds:
            kinds[rng.randrange(n)] = NodeKind.SOURCE
        if NodeKind.POOL not in kinds:
            candidates = [i for i, k in enumerate(kinds) if k is not NodeKind.SOURCE]
            if not candidates:
                candidates = list(range(n))
            kinds[candidates[rng.randrange(len(candidates))]] = NodeKind.POOL
        counts = {}
        for kind in kinds:
            counts[kind] = counts.get(kind, 0) + 1
        if plausible_node_counts(counts):
            return counts
