"""Command line front end: gen, sim, balance, bench.

Exit codes: 0 success (balance: objective reached), 1 usage error,
2 domain failure (invalid economy, generation failure, balance timeout).

All file outputs are deterministic for fixed inputs and seeds; wall-time
figures are printed to the console only and never written to files.
"""

from __future__ import annotations

import argparse
import json
import statistics
import sys
from pathlib import Path

from .balancer import (
    BalanceObjective,
    BalanceParams,
    ObjectiveKind,
    TerminationReason,
    balance,
)
from .bench import BenchmarkSpec, run_benchmark
from .generator import GeneratorConfig, generate
from .model import (
    EconomyError,
    NodeKind,
    load_economy,
    save_economy,
)
from .sim import ensemble_to_csv, monitored_node_ids, simulate_ensemble
from .util import dump_json

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DOMAIN = 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="flowtune", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=None, help="override the configured seed")
        p.add_argument("--quiet", action="store_true", help="suppress console summaries")

    p = sub.add_parser("gen", help="evolve a valid economy from a node-count config")
    p.add_argument("config", help="generator config JSON")
    p.add_argument("--out", required=True, help="economy file to write")
    p.add_argument("--report", default=None, help="run report JSON (default: <out>.report.json)")
    common(p)

    p = sub.add_parser("sim", help="simulate an economy and export traces")
    p.add_argument("economy", help="economy file")
    p.add_argument("--steps", type=int, required=True, help="number of steps (>= 1)")
    p.add_argument("--runs", type=int, default=1, help="independent runs (default 1)")
    p.add_argument("--trace", default=None, help="write a run,step,node_id,amount CSV here")
    common(p)

    p = sub.add_parser("balance", help="tune non-static weights toward an objective")
    p.add_argument("economy", help="economy file")
    p.add_argument("--second", default=None, help="second economy file (inter_pair only)")
    p.add_argument("--objective", required=True, help="objective JSON")
    p.add_argument("--out", required=True, help="balanced economy file to write")
    p.add_argument("--out2", default=None, help="balanced second economy (inter_pair only)")
    p.add_argument("--report", default=None, help="balance report JSON (default: <out>.report.json)")
    common(p)

    p = sub.add_parser("bench", help="generate economies and balance them per alpha")
    p.add_argument("spec", help="benchmark spec JSON")
    p.add_argument("--out", required=True, help="aggregate CSV to write")
    p.add_argument("--json", dest="json_out", default=None, help="detailed JSON (default: <out>.json)")
    common(p)

    return parser


def _read_json(path: str) -> dict:
    try:
        text = Path(path).read_text("utf-8")
    except OSError as exc:
        raise EconomyError(f"cannot read {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise EconomyError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise EconomyError(f"{path}: top level must be an object")
    return doc


def _read_economy(path: str):
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise EconomyError(f"cannot read {path}: {exc}") from exc
    return load_economy(data)


def _write(path: str, data: bytes) -> None:
    try:
        Path(path).write_bytes(data)
    except OSError as exc:
        raise EconomyError(f"cannot write {path}: {exc}") from exc


def _say(args, message: str) -> None:
    if not args.quiet:
        print(message)


def _cmd_gen(args) -> int:
    doc = _read_json(args.config)
    known = {"nodes", "population", "max_steps", "remove_probability", "seed"}
    extra = set(doc) - known
    if extra:
        raise EconomyError(f"{args.config}: unknown config keys {sorted(extra)}")
    raw_nodes = doc.get("nodes")
    if not isinstance(raw_nodes, dict) or not raw_nodes:
        raise EconomyError(f"{args.config}: 'nodes' must map kind names to counts")
    counts = {}
    for kind_name, count in raw_nodes.items():
        try:
            kind = NodeKind(kind_name)
        except ValueError:
            raise EconomyError(f"{args.config}: unknown node kind {kind_name!r}") from None
        counts[kind] = count
    try:
        config = GeneratorConfig(
            counts,
            population_size=doc.get("population", 10),
            max_steps=doc.get("max_steps", 50000),
            remove_probability=doc.get("remove_probability", 0.1),
            seed=args.seed if args.seed is not None else doc.get("seed", 0),
        )
    except ValueError as exc:
        raise EconomyError(f"{args.config}: {exc}") from exc

    result = generate(config)
    _write(args.out, save_economy(result.graph))
    report_path = args.report or f"{args.out}.report.json"
    _write(report_path, dump_json(result.report_dict()))
    if result.valid:
        _say(args, f"valid economy after {result.generations} generations ({result.elapsed_ms:.1f} ms)")
        return EXIT_OK
    _say(
        args,
        f"no valid economy within {result.generations} generations; "
        f"best fitness {result.fitness} ({result.elapsed_ms:.1f} ms)",
    )
    return EXIT_DOMAIN


def _cmd_sim(args) -> int:
    if args.steps < 1:
        raise _UsageError("--steps must be >= 1")
    if args.runs < 1:
        raise _UsageError("--runs must be >= 1")
    graph = _read_economy(args.economy)
    seed = args.seed if args.seed is not None else 0
    ensemble = simulate_ensemble(graph, args.steps, args.runs, seed)
    if args.trace:
        _write(args.trace, ensemble_to_csv(ensemble).encode("utf-8"))
    if not args.quiet:
        for node_id in monitored_node_ids(graph):
            final = ensemble.observe(node_id, args.steps)
            mean = statistics.fmean(final)
            stddev = statistics.pstdev(final)
            print(f"{node_id}: {mean:.3f} ± {stddev:.3f}")
    return EXIT_OK


def _parse_objective(doc: dict, path: str, seed_override):
    known = {
        "kind", "pool", "pool2", "value", "step", "sim_length", "runs",
        "alpha", "population", "max_generations", "seed",
    }
    extra = set(doc) - known
    if extra:
        raise EconomyError(f"{path}: unknown objective keys {sorted(extra)}")
    try:
        kind = ObjectiveKind(doc.get("kind"))
    except ValueError:
        raise EconomyError(f"{path}: kind must be absolute, intra_pair or inter_pair") from None
    try:
        objective = BalanceObjective(
            kind,
            doc.get("pool"),
            observe_step=doc.get("step", doc.get("sim_length", 0)),
            sim_length=doc.get("sim_length", 0),
            runs=doc.get("runs", 10),
            alpha=doc.get("alpha", 0.0),
            second_pool=doc.get("pool2"),
            target_value=doc.get("value"),
        )
        params = BalanceParams(
            population_size=doc.get("population", 10),
            max_generations=doc.get("max_generations", 100),
            seed=seed_override if seed_override is not None else doc.get("seed", 0),
        )
    except (TypeError, ValueError) as exc:
        raise EconomyError(f"{path}: {exc}") from exc
    return objective, params


def _cmd_balance(args) -> int:
    doc = _read_json(args.objective)
    objective, params = _parse_objective(doc, args.objective, args.seed)
    if objective.kind is ObjectiveKind.INTER_PAIR:
        if args.second is None:
            raise _UsageError("inter_pair objective requires --second")
        if args.out2 is None:
            raise _UsageError("inter_pair objective requires --out2")
    else:
        if args.second is not None:
            raise _UsageError("--second is only valid with an inter_pair objective")
        if args.out2 is not None:
            raise _UsageError("--out2 is only valid with an inter_pair objective")

    graphs = [_read_economy(args.economy)]
    if args.second is not None:
        graphs.append(_read_economy(args.second))

    report = balance(graphs, objective, params)
    _write(args.out, save_economy(report.balanced_graphs[0]))
    if args.out2 is not None:
        _write(args.out2, save_economy(report.balanced_graphs[1]))
    report_path = args.report or f"{args.out}.report.json"
    _write(report_path, dump_json(report.to_dict()))

    stats = ", ".join(
        f"{o.pool}[{o.economy_index}] {o.mean:.2f} ± {o.stddev:.2f}" for o in report.observations
    )
    _say(
        args,
        f"{report.terminated_by.value} at generation {report.generations}, "
        f"fitness {report.best_fitness:.4f} ({stats})",
    )
    return EXIT_OK if report.terminated_by is TerminationReason.FITNESS_REACHED else EXIT_DOMAIN


def _cmd_bench(args) -> int:
    doc = _read_json(args.spec)
    try:
        spec = BenchmarkSpec.from_dict(doc)
    except (TypeError, ValueError) as exc:
        raise EconomyError(f"{args.spec}: {exc}") from exc
    if args.seed is not None:
        spec = BenchmarkSpec.from_dict({**doc, "seed": args.seed})
    progress = None if args.quiet else lambda message: print(message)
    result = run_benchmark(spec, progress)
    _write(args.out, result.to_csv().encode("utf-8"))
    json_path = args.json_out or f"{args.out}.json"
    _write(json_path, dump_json(result.to_dict()))
    return EXIT_OK


_COMMANDS = {
    "gen": _cmd_gen,
    "sim": _cmd_sim,
    "balance": _cmd_balance,
    "bench": _cmd_bench,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"flowtune: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"flowtune: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (EconomyError, ValueError) as exc:
        print(f"flowtune: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
