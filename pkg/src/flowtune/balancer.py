"""Evolutionary tuning of economy edge weights against a play objective.

An individual is the weight vector of one economy (or the concatenated
vectors of two). Fitness comes from simulating the economy m times with
the candidate weights and comparing the observed amount in a chosen pool
at a chosen step against either a fixed target value or the observation
of a second pool. The proportion of the two quantities is averaged over
the runs and offset by a slack term alpha, so a vector counts as
balanced once alpha + mean proportion reaches 1.0.

Weights flagged static in the graph are never altered. Weights on edges
leaving a random gate evolve as raw positive reals ("probability genes")
and are normalized per gate when written into a graph; all other genes
are positive integers ("amount genes").
"""

from __future__ import annotations

import random
import statistics
from dataclasses import dataclass
from enum import Enum
from typing import Sequence, Union

from .model import EconomyGraph, InvalidEconomyError, NodeKind, is_valid, normalize_gate_weights
from .sim import RunEnsemble, simulate_ensemble
from .util import derive_seed

#: A genome reaching this fitness is balanced and stops the search.
BALANCED_FITNESS = 1.0

_OBSERVABLE = (NodeKind.POOL, NodeKind.FIXED_POOL, NodeKind.DRAIN)


class ObjectiveKind(str, Enum):
    ABSOLUTE = "absolute"
    INTRA_PAIR = "intra_pair"
    INTER_PAIR = "inter_pair"


class TerminationReason(str, Enum):
    FITNESS_REACHED = "fitness_reached"
    TIMEOUT = "timeout"


@dataclass(frozen=True)
class BalanceObjective:
    """What to balance: a pool against a value, or two pools against each other."""

    kind: ObjectiveKind
    pool: str
    observe_step: int
    sim_length: int
    runs: int = 10
    alpha: float = 0.0
    second_pool: str | None = None
    target_value: float | None = None

    def __post_init__(self):
        if not isinstance(self.kind, ObjectiveKind):
            object.__setattr__(self, "kind", ObjectiveKind(self.kind))
        if self.sim_length < 1:
            raise ValueError("sim_length must be >= 1")
        if not 1 <= self.observe_step <= self.sim_length:
            raise ValueError(
                f"observe_step must lie in [1, sim_length], got {self.observe_step}"
            )
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        if self.kind is ObjectiveKind.ABSOLUTE:
            if self.target_value is None or not self.target_value > 0:
                raise ValueError("absolute objective needs a positive target_value")
            if self.second_pool is not None:
                raise ValueError("absolute objective takes no second pool")
        else:
            if self.second_pool is None:
                raise ValueError(f"{self.kind.value} objective needs a second pool")
            if self.target_value is not None:
                raise ValueError(f"{self.kind.value} objective takes no target_value")


@dataclass(frozen=True)
class BalanceParams:
    population_size: int = 10
    max_generations: int = 100
    seed: int = 0
    mutations_per_generation: int = 1
    amount_delta_max: int = 3
    probability_delta_max: float = 0.25

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError("population_size must be >= 2 (crossover needs pairs)")
        if self.max_generations < 0:
            raise ValueError("max_generations must be >= 0")
        if self.mutations_per_generation < 0:
            raise ValueError("mutations_per_generation must be >= 0")
        if self.amount_delta_max < 1:
            raise ValueError("amount_delta_max must be >= 1")
        if not self.probability_delta_max > 0:
            raise ValueError("probability_delta_max must be > 0")


def prop(s: float, x: float) -> float:
    """Proportion of the smaller of two nonnegative quantities to the larger.

    Lies in [0, 1], is symmetric, and equals 1 exactly when the
    quantities agree (including the degenerate prop(0, 0) = 1).
    """
    if s < 0 or x < 0:
        raise ValueError("proportions are defined for nonnegative amounts only")
    if x > s:
        return s / x
    if s > 0:
        return x / s
    return 1.0


def absolute_fitness(ensemble: RunEnsemble, pool: str, t: int, target: float, alpha: float) -> float:
    """alpha + mean proportion between the pool's amount at step t and the target."""
    observations = ensemble.observe(pool, t)
    return alpha + sum(prop(o, target) for o in observations) / len(observations)


def pairwise_fitness(
    ensemble_a: RunEnsemble,
    ensemble_b: RunEnsemble,
    pool_a: str,
    pool_b: str,
    t: int,
    alpha: float,
) -> float:
    """alpha + mean proportion between two pools, pairing run i with run i.

    Pass the same ensemble twice to compare two pools of one economy.
    """
    if ensemble_a.runs != ensemble_b.runs:
        raise ValueError("ensembles must have the same number of runs")
    a = ensemble_a.observe(pool_a, t)
    b = ensemble_b.observe(pool_b, t)
    return alpha + sum(prop(x, y) for x, y in zip(a, b)) / len(a)


# --- genomes ------------------------------------------------------------------


@dataclass(frozen=True)
class _Gene:
    graph_index: int
    edge_index: int
    probability: bool
    static: bool
    declared: float


class GenomeLayout:
    """Maps genome positions to graph edges and fixes each gene's kind."""

    def __init__(self, graphs: Sequence):
        self.graphs = tuple(graphs)
        genes = []
        spans = []
        for gi, graph in enumerate(self.graphs):
            start = len(genes)
            for ei, edge in enumerate(graph.edges):
                probability = graph.node(edge.src).kind is NodeKind.RANDOM_GATE
                genes.append(_Gene(gi, ei, probability, edge.static, edge.weight))
            spans.append((start, len(genes)))
        self.genes = tuple(genes)
        self.spans = tuple(spans)
        self.mutable = tuple(i for i, g in enumerate(genes) if not g.static)

    def declared_genome(self) -> "WeightGenome":
        return WeightGenome(self, [g.declared for g in self.genes])

    def random_genome(self, rng: random.Random) -> "WeightGenome":
        values = []
        for gene in self.genes:
            if gene.static:
                values.append(gene.declared)
            elif gene.probability:
                values.append(1.0 - rng.random())  # (0, 1]
            else:
                values.append(rng.randint(1, 5))
        return WeightGenome(self, values)

    def apply(self, genome: "WeightGenome") -> tuple:
        """Write the genome into fresh graphs, normalizing gate shares."""
        out = []
        for (start, end), graph in zip(self.spans, self.graphs):
            weighted = graph.with_weights(genome.values[start:end])
            out.append(normalize_gate_weights(weighted))
        return tuple(out)


class WeightGenome:
    """One candidate weight vector; fitness is filled in by evaluation."""

    __slots__ = ("layout", "values", "fitness")

    def __init__(self, layout: GenomeLayout, values):
        self.layout = layout
        self.values = list(values)
        self.fitness = None

    def key(self) -> tuple:
        return tuple(self.values)


def clamp_positive(value: float, probability: bool) -> float:
    """Gene floor: results <= 0 become 1 (amounts) or 0.01 (probabilities)."""
    if value > 0:
        return value
    return 0.01 if probability else 1


def crossover(parent_k: WeightGenome, parent_l: WeightGenome, rng: random.Random) -> WeightGenome:
    """Child from two parents: per gene keep either value, their sum, or difference."""
    if parent_k.layout is not parent_l.layout:
        raise ValueError("parents are not aligned to the same graphs")
    layout = parent_k.layout
    values = []
    for i, gene in enumerate(layout.genes):
        if gene.static:
            values.append(gene.declared)
            continue
        wk = parent_k.values[i]
        wl = parent_l.values[i]
        op = rng.randrange(4)
        if op == 0:
            v = wk
        elif op == 1:
            v = wl
        elif op == 2:
            v = wk + wl
        else:
            v = wk - wl
        values.append(clamp_positive(v, gene.probability))
    return WeightGenome(layout, values)


def mutate(
    population: list,
    rng: random.Random,
    amount_delta_max: int = 3,
    probability_delta_max: float = 0.25,
):
    """Nudge one random non-static gene of one random individual.

    The mutated vector is appended as a new individual; the original is
    kept so selection can always fall back on it (this keeps the best
    fitness of a population monotone under truncation selection).
    """
    if not population:
        raise ValueError("population must be nonempty")
    target = population[rng.randrange(len(population))]
    mutable = target.layout.mutable
    if not mutable:
        return population
    index = mutable[rng.randrange(len(mutable))]
    gene = target.layout.genes[index]
    if gene.probability:
        delta = probability_delta_max * (1.0 - rng.random())  # (0, max]
    else:
        delta = rng.randint(1, amount_delta_max)
    if rng.random() < 0.5:
        value = target.values[index] + delta
    else:
        value = target.values[index] - delta
    values = list(target.values)
    values[index] = clamp_positive(value, gene.probability)
    population.append(WeightGenome(target.layout, values))
    return population


# --- the balancing loop --------------------------------------------------------


@dataclass(frozen=True)
class ObservationStats:
    economy_index: int
    pool: str
    mean: float
    stddev: float
    runs: int

    def to_dict(self) -> dict:
        return {
            "economy": self.economy_index,
            "pool": self.pool,
            "mean": self.mean,
            "stddev": self.stddev,
            "runs": self.runs,
        }


@dataclass(frozen=True)
class BalanceReport:
    best_weights: tuple
    best_fitness: float
    generations: int
    terminated_by: TerminationReason
    history: tuple
    observations: tuple
    balanced_graphs: tuple

    @property
    def balanced(self) -> bool:
        """Met the objective: best fitness reached the balanced threshold."""
        return self.best_fitness >= BALANCED_FITNESS

    @property
    def improved(self) -> bool:
        """Final best fitness strictly above the initial population's best."""
        return self.history[-1] > self.history[0]

    @property
    def initially_balanced(self) -> bool:
        """The initial population already contained a balanced vector."""
        return self.history[0] >= BALANCED_FITNESS

    def to_dict(self) -> dict:
        return {
            "best_weights": list(self.best_weights),
            "best_fitness": self.best_fitness,
            "generations": self.generations,
            "terminated_by": self.terminated_by.value,
            "balanced": self.balanced,
            "improved": self.improved,
            "initially_balanced": self.initially_balanced,
            "history": list(self.history),
            "observations": [o.to_dict() for o in self.observations],
        }


def _observed_pools(objective: BalanceObjective) -> list:
    if objective.kind is ObjectiveKind.ABSOLUTE:
        return [(0, objective.pool)]
    if objective.kind is ObjectiveKind.INTRA_PAIR:
        return [(0, objective.pool), (0, objective.second_pool)]
    return [(0, objective.pool), (1, objective.second_pool)]


def _check_pool(graph: EconomyGraph, pool: str, role: str) -> None:
    if not graph.has_node(pool):
        raise ValueError(f"{role} {pool!r} does not exist in the economy")
    if graph.node(pool).kind not in _OBSERVABLE:
        raise ValueError(f"{role} {pool!r} is not a pool or drain")


def balance(
    graphs: Union[EconomyGraph, Sequence],
    objective: BalanceObjective,
    params: BalanceParams = BalanceParams(),
) -> BalanceReport:
    """Evolve the non-static weights of one or two economies to the objective.

    Deterministic for fixed (graphs, objective, params). The initial
    population holds the declared weight vector plus random vectors;
    each generation produces one child per random parent pair and one
    mutant, then truncates back to population size by fitness.
    """
    if isinstance(graphs, EconomyGraph):
        graphs = (graphs,)
    graphs = tuple(graphs)
    expected = 2 if objective.kind is ObjectiveKind.INTER_PAIR else 1
    if len(graphs) != expected:
        raise ValueError(
            f"{objective.kind.value} objective needs {expected} economy graph(s), got {len(graphs)}"
        )
    for graph in graphs:
        if not is_valid(graph):
            raise InvalidEconomyError("cannot balance an invalid economy graph")
    _check_pool(graphs[0], objective.pool, "target pool")
    if objective.kind is ObjectiveKind.INTRA_PAIR:
        _check_pool(graphs[0], objective.second_pool, "second pool")
    elif objective.kind is ObjectiveKind.INTER_PAIR:
        _check_pool(graphs[1], objective.second_pool, "second pool")

    layout = GenomeLayout(graphs)
    rng = random.Random(params.seed)
    cache = {}

    def evaluate(genome: WeightGenome) -> None:
        if genome.fitness is not None:
            return
        key = genome.key()
        hit = cache.get(key)
        if hit is not None:
            genome.fitness = hit
            return
        applied = layout.apply(genome)
        m, n, t, alpha = objective.runs, objective.sim_length, objective.observe_step, objective.alpha
        ensembles = [
            simulate_ensemble(g, n, m, derive_seed(params.seed, i, key))
            for i, g in enumerate(applied)
        ]
        if objective.kind is ObjectiveKind.ABSOLUTE:
            fitness = absolute_fitness(ensembles[0], objective.pool, t, objective.target_value, alpha)
        elif objective.kind is ObjectiveKind.INTRA_PAIR:
            fitness = pairwise_fitness(
                ensembles[0], ensembles[0], objective.pool, objective.second_pool, t, alpha
            )
        else:
            fitness = pairwise_fitness(
                ensembles[0], ensembles[1], objective.pool, objective.second_pool, t, alpha
            )
        genome.fitness = fitness
        cache[key] = fitness

    population = [layout.declared_genome()]
    population.extend(layout.random_genome(rng) for _ in range(params.population_size - 1))
    for genome in population:
        evaluate(genome)
    population.sort(key=lambda g: g.fitness, reverse=True)

    history = [population[0].fitness]
    generations = 0
    reason = TerminationReason.TIMEOUT
    if history[0] >= BALANCED_FITNESS:
        reason = TerminationReason.FITNESS_REACHED
    else:
        for generation in range(1, params.max_generations + 1):
            order = list(range(len(population)))
            rng.shuffle(order)
            candidates = list(population)
            for i in range(0, len(order) - 1, 2):
                candidates.append(crossover(population[order[i]], population[order[i + 1]], rng))
            for _ in range(params.mutations_per_generation):
                candidates = mutate(
                    candidates, rng, params.amount_delta_max, params.probability_delta_max
                )
            for genome in candidates:
                evaluate(genome)
            candidates.sort(key=lambda g: g.fitness, reverse=True)
            population = candidates[: params.population_size]
            history.append(population[0].fitness)
            generations = generation
            if population[0].fitness >= BALANCED_FITNESS:
                reason = TerminationReason.FITNESS_REACHED
                break

    best = population[0]
    final_graphs = layout.apply(best)
    observations = []
    report_ensembles = {}
    for economy_index, pool in _observed_pools(objective):
        ensemble = report_ensembles.get(economy_index)
        if ensemble is None:
            ensemble = simulate_ensemble(
                final_graphs[economy_index],
                objective.sim_length,
                objective.runs,
                derive_seed(params.seed, "report", economy_index, best.key()),
            )
            report_ensembles[economy_index] = ensemble
        values = ensemble.observe(pool, objective.observe_step)
        observations.append(
            ObservationStats(
                economy_index,
                pool,
                statistics.fmean(values),
                statistics.pstdev(values),
                len(values),
            )
        )

    return BalanceReport(
        best_weights=tuple(best.values),
        best_fitness=best.fitness,
        generations=generations,
        terminated_by=reason,
        history=tuple(history),
        observations=tuple(observations),
        balanced_graphs=final_graphs,
    )
