"""Benchmark sweep: generate economies, balance each at several alphas.

Every generated economy gets one task (random observable node, random
target value, random simulation length). The same task and the same
balancer seed are reused for every alpha, so alpha alone decides how
early a run may stop; per-alpha aggregate rows are therefore directly
comparable.
"""

from __future__ import annotations

import random
import statistics
import time
from dataclasses import dataclass
from typing import Callable, Sequence

from .balancer import BalanceObjective, BalanceParams, ObjectiveKind, balance
from .generator import GeneratorConfig, generate, random_node_counts
from .model import EconomyGraph
from .sim import monitored_node_ids
from .util import derive_seed


@dataclass(frozen=True)
class BenchmarkSpec:
    graphs: int = 30
    node_range: tuple = (5, 20)
    target_range: tuple = (20, 100)
    sim_length_range: tuple = (10, 30)
    alphas: tuple = (0.05, 0.01, 0.0)
    population: int = 20
    max_generations: int = 200
    runs: int = 10
    generator_population: int = 10
    generator_max_steps: int = 50000
    remove_probability: float = 0.1
    seed: int = 0

    def __post_init__(self):
        for name in ("node_range", "target_range", "sim_length_range"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ValueError(f"{name} is empty: [{lo}, {hi}]")
            object.__setattr__(self, name, (int(lo), int(hi)))
        if self.graphs < 0:
            raise ValueError("graphs must be >= 0")
        if not self.alphas:
            raise ValueError("need at least one alpha")
        if any(a < 0 for a in self.alphas):
            raise ValueError("alphas must be >= 0")
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))

    @classmethod
    def from_dict(cls, doc: dict) -> "BenchmarkSpec":
        if not isinstance(doc, dict):
            raise ValueError("benchmark spec must be an object")
        known = {
            "graphs", "node_range", "target_range", "sim_length_range", "alphas",
            "population", "max_generations", "runs", "generator_population",
            "generator_max_steps", "remove_probability", "seed",
        }
        extra = set(doc) - known
        if extra:
            raise ValueError(f"unknown benchmark spec keys: {sorted(extra)}")
        kwargs = dict(doc)
        for name in ("node_range", "target_range", "sim_length_range", "alphas"):
            if name in kwargs:
                kwargs[name] = tuple(kwargs[name])
        return cls(**kwargs)


@dataclass(frozen=True)
class BenchmarkTask:
    graph_index: int
    graph: EconomyGraph
    pool: str
    target_value: int
    sim_length: int


@dataclass(frozen=True)
class BenchmarkRun:
    graph_index: int
    alpha: float
    balanced: bool
    improved: bool
    initially_balanced: bool
    generations: int
    best_fitness: float
    elapsed_s: float  # console reporting only, never written to files

    def to_dict(self) -> dict:
        return {
            "graph": self.graph_index,
            "alpha": self.alpha,
            "balanced": self.balanced,
            "improved": self.improved,
            "initially_balanced": self.initially_balanced,
            "generations": self.generations,
            "best_fitness": self.best_fitness,
        }


@dataclass(frozen=True)
class BenchmarkRow:
    alpha: float
    attempted: int
    balanced_pct: float
    improved_pct: float
    initial_balanced_pct: float
    median_generations: float
    median_elapsed_s: float  # console reporting only

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "attempted": self.attempted,
            "balanced_pct": self.balanced_pct,
            "improved_pct": self.improved_pct,
            "initial_balanced_pct": self.initial_balanced_pct,
            "median_generations": self.median_generations,
        }


@dataclass(frozen=True)
class BenchmarkResult:
    spec: BenchmarkSpec
    rows: tuple
    runs: tuple
    tasks: tuple
    failures: tuple

    def to_dict(self) -> dict:
        return {
            "graphs_requested": self.spec.graphs,
            "graphs_generated": len(self.tasks),
            "rows": [row.to_dict() for row in self.rows],
            "tasks": [
                {
                    "graph": task.graph_index,
                    "pool": task.pool,
                    "target_value": task.target_value,
                    "sim_length": task.sim_length,
                }
                for task in self.tasks
            ],
            "runs": [run.to_dict() for run in self.runs],
            "failures": list(self.failures),
        }

    def to_csv(self) -> str:
        lines = ["alpha,balanced_pct,improved_pct,initial_balanced_pct,median_generations"]
        for row in self.rows:
            lines.append(
                f"{row.alpha:g},{row.balanced_pct:.1f},{row.improved_pct:.1f},"
                f"{row.initial_balanced_pct:.1f},{row.median_generations:g}"
            )
        return "\n".join(lines) + "\n"


def run_benchmark(spec: BenchmarkSpec, progress: Callable[[str], None] = None) -> BenchmarkResult:
    """Generate spec.graphs economies and balance each one per alpha.

    Failures (a node multiset the generator cannot wire within budget)
    are recorded and skipped; they never abort the sweep.
    """
    note = progress if progress is not None else lambda message: None
    rng = random.Random(spec.seed)
    tasks = []
    failures = []
    for graph_index in range(spec.graphs):
        counts = random_node_counts(rng, *spec.node_range)
        target_value = rng.randint(*spec.target_range)
        sim_length = rng.randint(*spec.sim_length_range)
        config = GeneratorConfig(
            counts,
            population_size=spec.generator_population,
            max_steps=spec.generator_max_steps,
            remove_probability=spec.remove_probability,
            seed=derive_seed(spec.seed, "generate", graph_index),
        )
        result = generate(config)
        if not result.valid:
            failures.append(
                {"graph": graph_index, "stage": "generate", "final_fitness": result.fitness}
            )
            note(f"graph {graph_index}: generation failed (fitness {result.fitness})")
            continue
        pool = _pick_pool(result.graph, rng)
        tasks.append(BenchmarkTask(graph_index, result.graph, pool, target_value, sim_length))

    runs = []
    rows = []
    for alpha in spec.alphas:
        if not tasks:
            break  # nothing attempted: leave the result table empty
        alpha_runs = []
        for task in tasks:
            objective = BalanceObjective(
                ObjectiveKind.ABSOLUTE,
                task.pool,
                observe_step=task.sim_length,
                sim_length=task.sim_length,
                runs=spec.runs,
                alpha=alpha,
                target_value=task.target_value,
            )
            params = BalanceParams(
                population_size=spec.population,
                max_generations=spec.max_generations,
                seed=derive_seed(spec.seed, "balance", task.graph_index),
            )
            started = time.perf_counter()
            report = balance(task.graph, objective, params)
            elapsed = time.perf_counter() - started
            if any(b < a for a, b in zip(report.history, report.history[1:])):
                raise RuntimeError(
                    f"best-fitness history decreased while balancing graph {task.graph_index}"
                )
            alpha_runs.append(
                BenchmarkRun(
                    task.graph_index,
                    alpha,
                    report.balanced,
                    report.improved,
                    report.initially_balanced,
                    report.generations,
                    report.best_fitness,
                    elapsed,
                )
            )
        runs.extend(alpha_runs)
        rows.append(_aggregate(alpha, alpha_runs))
        if alpha_runs:
            note(
                f"alpha={alpha:g}: balanced {rows[-1].balanced_pct:.1f}% "
                f"improved {rows[-1].improved_pct:.1f}% "
                f"initial {rows[-1].initial_balanced_pct:.1f}% "
                f"median generations {rows[-1].median_generations:g} "
                f"median time {rows[-1].median_elapsed_s:.2f}s"
            )

    return BenchmarkResult(spec, tuple(rows), tuple(runs), tuple(tasks), tuple(failures))


def _pick_pool(graph: EconomyGraph, rng: random.Random) -> str:
    observable = monitored_node_ids(graph)
    return observable[rng.randrange(len(observable))]


def _aggregate(alpha: float, alpha_runs: Sequence) -> BenchmarkRow:
    attempted = len(alpha_runs)
    if attempted == 0:
        return BenchmarkRow(alpha, 0, 0.0, 0.0, 0.0, 0.0, 0.0)
    pct = lambda flags: 100.0 * sum(flags) / attempted
    return BenchmarkRow(
        alpha,
        attempted,
        pct([r.balanced for r in alpha_runs]),
        pct([r.improved for r in alpha_runs]),
        pct([r.initially_balanced for r in alpha_runs]),
        float(statistics.median(r.generations for r in alpha_runs)),
        float(statistics.median(r.elapsed_s for r in alpha_runs)),
    )
