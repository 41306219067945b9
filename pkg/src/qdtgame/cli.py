"""Command-line interface.

Every command that writes an output also writes ``<out>.manifest.json``
echoing its full configuration, so a run can be repeated exactly.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path

from . import gameplay, gp, reconstruction, svg, world
from .matrix import ComplexMatrix2
from .qdt import QdtSyntaxError, enumerate_strategies, parse, random_tree, to_string
from .rng import make_rng
from .valuation import ORDERINGS, DEFAULT_ORDERING, evaluate_strategy, expected_beliefs, normalize


class CliError(Exception):
    pass


def tool_version() -> str:
    try:
        return version("artifact")
    except PackageNotFoundError:
        return "unknown"


def tree_stream(seed: int, index: int):
    """Decision stream of the ``index``-th tree played under ``seed``."""
    return make_rng(seed, 0, index)


def tie_stream(seed: int):
    return make_rng(seed, 1)


def load_tree(source: str):
    """Inline expression, or ``file#best`` / ``file#N`` from a population file."""
    if "#" in source:
        path, _, which = source.rpartition("#")
        population = gp.read_population(path)
        if not population:
            raise CliError(f"{path}: empty population")
        if which == "best":
            return population[0].tree
        try:
            return population[int(which)].tree
        except (ValueError, IndexError):
            raise CliError(f"bad population index {which!r}") from None
    return parse(source)


def write_text(path: str | Path, text: str) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8", newline="")
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc.strerror}") from None


def write_manifest(out: str | Path, args: argparse.Namespace, inputs: list[str], outputs: list[str],
                   started: float, extra: dict | None = None) -> None:
    config = {k: v for k, v in vars(args).items() if k != "func"}
    manifest = {
        "command": args.command,
        "config": config,
        "seed": args.seed,
        "inputs": inputs,
        "outputs": outputs,
        "version": tool_version(),
        "duration_seconds": round(time.perf_counter() - started, 3),
    }
    if extra:
        manifest.update(extra)
    write_text(f"{out}.manifest.json", json.dumps(manifest, indent=2) + "\n")


def _format_complex(z: complex) -> str:
    return f"{round(z.real, 4) + 0.0:+.4f}{round(z.imag, 4) + 0.0:+.4f}i"


def _format_matrix(m: ComplexMatrix2) -> str:
    return "[[{}, {}], [{}, {}]]".format(*(_format_complex(z) for z in m))


def _read_world(path: str) -> list[world.WorldRecord]:
    try:
        return world.read_csv(path)
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}") from None


def _say(args, *lines: str) -> None:
    if not args.quiet:
        for line in lines:
            print(line)


# -- commands -----------------------------------------------------------------

def cmd_simulate(args) -> None:
    started = time.perf_counter()
    try:
        records = world.generate(args.n, args.p_decay, args.seed)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    out = args.out or "world.csv"
    write_text(out, world.to_csv(records))
    freq = world.state_frequencies(records)
    write_manifest(out, args, [], [out], started)
    _say(args, f"wrote {len(records)} records to {out} (q1 {freq.w1:.4f}, q2 {freq.w2:.4f})")


def eval_report(expression: str, ordering: str = DEFAULT_ORDERING) -> str:
    tree = parse(expression)
    strategies = enumerate_strategies(tree)
    lines = [f"tree: {to_string(tree)}", f"strategies: {len(strategies)}"]
    for i, s in enumerate(strategies, start=1):
        v = evaluate_strategy(s, ordering)
        b = normalize(v)
        lines += [
            f"S{i}: {to_string(s.tree)}  weight {s.weight:.4f}",
            f"  matrix      {_format_matrix(v.matrix)}",
            f"  eigenvalues {_format_complex(v.eigen[0])}, {_format_complex(v.eigen[1])}",
            f"  beliefs     p1 {b.p1:.4f}  p2 {b.p2:.4f}" + ("  (degenerate)" if b.degenerate else ""),
        ]
    mix = expected_beliefs(tree, ordering)
    lines.append(f"mixture: p1 {mix.p1:.4f}  p2 {mix.p2:.4f}")
    return "\n".join(lines) + "\n"


def cmd_eval(args) -> None:
    started = time.perf_counter()
    report = eval_report(args.expression, args.ordering or DEFAULT_ORDERING)
    if not args.quiet:
        sys.stdout.write(report)
    if args.out:
        write_text(args.out, report)
        write_manifest(args.out, args, [], [args.out], started)


def _gp_config(args) -> gp.GpConfig:
    values = {}
    if getattr(args, "config", None):
        try:
            values = asdict(gp.GpConfig.read(args.config))
        except OSError as exc:
            raise CliError(f"cannot read {args.config}: {exc.strerror}") from None
    for key in ("population_size", "generations", "crossover_prob", "mutation_prob",
                "max_depth", "fitness_mode", "elitism", "ordering"):
        value = getattr(args, key, None)
        if value is not None:
            values[key] = value
    values["seed"] = args.seed
    try:
        return gp.GpConfig(**values)
    except (TypeError, ValueError) as exc:
        raise CliError(str(exc)) from None


def cmd_evolve(args) -> None:
    started = time.perf_counter()
    records = _read_world(args.data)
    config = _gp_config(args)
    if args.runs < 1:
        raise CliError("--runs must be >= 1")
    results = []
    for r in range(args.runs):
        run_config = gp.GpConfig(**{**asdict(config), "seed": config.seed + r})
        results.append(gp.evolve(run_config, records))
        if args.runs > 1:
            best = results[-1].best
            _say(args, f"run {r + 1}/{args.runs} seed {run_config.seed}: "
                       f"best {best.fitness:.6f} {to_string(best.tree)}")
    if args.runs == 1:
        population = results[0].final_population
    else:
        population = [res.best for res in results]
    out = args.out or "population.json"
    history_path = str(Path(out).with_suffix("")) + ".history.csv"
    write_text(out, gp.population_to_json(population))
    write_text(history_path, gp.history_to_csv(results[0].history))
    write_manifest(out, args, [args.data], [out, history_path], started,
                   {"gp_config": asdict(config)})
    best = max(population, key=lambda ind: ind.fitness)
    _say(args, f"best fitness {best.fitness:.6f}: {to_string(best.tree)}",
         f"wrote {len(population)} individuals to {out}, history to {history_path}")


def cmd_play(args) -> None:
    started = time.perf_counter()
    tree = load_tree(args.tree)
    records = _read_world(args.data)
    log = gameplay.play(tree, records, tree_stream(args.seed, 0),
                        ordering=args.ordering or DEFAULT_ORDERING)
    out = args.out or "play.csv"
    write_text(out, gameplay.log_to_csv(log))
    write_manifest(out, args, [args.data], [out], started,
                   {"winning_rate": log.winning_rate, "tree": to_string(tree)})
    _say(args, f"winning rate {100 * log.winning_rate:.1f}% "
               f"({log.wins}/{len(log.outcomes)}), total value {log.total_value:.4f}")


def cmd_ensemble(args) -> None:
    started = time.perf_counter()
    records = _read_world(args.data)
    if args.count < 1:
        raise CliError("--count must be >= 1")
    if args.unoptimized:
        grow = make_rng(args.seed, 2)
        trees = [random_tree(args.max_depth, grow) for _ in range(args.count)]
        inputs = [args.data]
    else:
        if not args.population:
            raise CliError("--population is required unless --unoptimized is given")
        population = gp.read_population(args.population)
        if len(population) < args.count:
            raise CliError(f"population has {len(population)} trees, need {args.count}")
        trees = [ind.tree for ind in population[: args.count]]
        inputs = [args.population, args.data]
    streams = [tree_stream(args.seed, i) for i in range(len(trees))]
    log = gameplay.majority_play(trees, records, tie_stream(args.seed), streams,
                                 ordering=args.ordering or DEFAULT_ORDERING)
    out = args.out or "ensemble.csv"
    write_text(out, gameplay.log_to_csv(log))
    write_manifest(out, args, inputs, [out], started, {"winning_rate": log.winning_rate})
    label = "unoptimized" if args.unoptimized else "optimized"
    _say(args, f"{label} ensemble of {len(trees)} trees: winning rate {100 * log.winning_rate:.1f}%")


def cmd_reconstruct(args) -> None:
    started = time.perf_counter()
    records = _read_world(args.data)
    config = _gp_config(args)
    try:
        result = reconstruction.reconstruct(records, args.group_size, config, whole_sum=args.whole_sum)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    out = args.out or "reconstruction.csv"
    write_text(out, reconstruction.result_to_csv(result))
    write_manifest(out, args, [args.data], [out], started,
                   {"directional_accuracy": result.directional_accuracy,
                    "trees": [to_string(t) for t in result.per_group_trees]})
    _say(args, f"directional accuracy {result.directional_accuracy:.4f} over {len(records)} steps")


def cmd_report(args) -> None:
    started = time.perf_counter()
    out = Path(args.out or "report")
    written: list[str] = []
    inputs: list[str] = []

    def emit(name: str, text: str):
        write_text(out / name, text)
        written.append(str(out / name))

    if args.world:
        inputs.append(args.world)
        xs = world.walk(_read_world(args.world))
        emit("walk.svg", svg.line_chart({"x": xs}, "random walk of the cat's state"))
    if args.play_logs:
        inputs += args.play_logs
        rates = []
        for path in args.play_logs:
            rows = gameplay.read_log_rows(path)
            rates.append(100.0 * sum(r["payoff"] > 0 for r in rows) / len(rows))
        mean = sum(rates) / len(rates)
        emit("winning_rates.csv", "log,winning_rate\n" + "".join(
            f"{p},{r:.4f}\n" for p, r in zip(args.play_logs, rates)) + f"mean,{mean:.4f}\n")
        emit("winning_rates.svg", svg.bar_chart(rates, f"winning rates (mean {mean:.2f}%)", mean))
        rows = gameplay.read_log_rows(args.play_logs[0])[:100]
        signed = [r["belief"] if r["action"] == 1 else -r["belief"] for r in rows]
        emit("beliefs.csv", "k,signed_belief\n" + "".join(
            f"{r['k']},{s:.4f}\n" for r, s in zip(rows, signed)))
        emit("beliefs.svg", svg.line_chart({"belief (+ alive / - dead)": signed},
                                           "degrees of belief, first 100 actions"))
    if args.history:
        inputs.append(args.history)
        lines = Path(args.history).read_text(encoding="utf-8").splitlines()[1:]
        best = [float(line.split(",")[1]) for line in lines]
        mean = [float(line.split(",")[2]) for line in lines]
        emit("history.svg", svg.line_chart({"best": best, "mean": mean}, "fitness by generation"))
    if args.reconstruction:
        inputs.append(args.reconstruction)
        rows = reconstruction.read_reconstruction(args.reconstruction)
        emit("reconstruction.svg", svg.line_chart(
            {"nature": [0] + [r["x_actual"] for r in rows],
             "observer": [0] + [r["y_predicted"] for r in rows]},
            "reconstructed trajectory"))
    if not written:
        raise CliError("nothing to report; give --world, --play-logs, --history or --reconstruction")
    write_manifest(out / "report", args, inputs, written, started)
    _say(args, *(f"wrote {p}" for p in written))


def argv_from_manifest(manifest: dict, out: str | None = None) -> list[str]:
    """Rebuild the command line recorded in a manifest."""
    config = dict(manifest["config"])
    command = config.pop("command")
    if out is not None:
        config["out"] = out
    sub = _subparsers(build_parser())[command]
    argv = [command]
    for action in sub._actions:
        if action.dest not in config or action.dest == "help":
            continue
        value = config[action.dest]
        if not action.option_strings:
            argv.append(str(value))
        elif isinstance(action, argparse._StoreTrueAction):
            if value:
                argv.append(action.option_strings[0])
        elif value is not None:
            argv.append(action.option_strings[0])
            argv.extend(str(v) for v in value) if isinstance(value, list) else argv.append(str(value))
    return argv


def _subparsers(parser: argparse.ArgumentParser) -> dict[str, argparse.ArgumentParser]:
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return dict(action.choices)
    raise AssertionError("parser has no subcommands")


def cmd_rerun(args) -> None:
    try:
        manifest = json.loads(Path(args.manifest).read_text(encoding="utf-8"))
    except OSError as exc:
        raise CliError(f"cannot read {args.manifest}: {exc.strerror}") from None
    except json.JSONDecodeError:
        raise CliError(f"{args.manifest}: not a manifest") from None
    if manifest.get("command") == "rerun" or "config" not in manifest:
        raise CliError(f"{args.manifest}: not a replayable manifest")
    argv = argv_from_manifest(manifest, args.out)
    if args.quiet and "--quiet" not in argv:
        argv.append("--quiet")
    rerun = build_parser().parse_args(argv)
    rerun.func(rerun)


# -- parser -------------------------------------------------------------------

def _add_gp_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key = value GP config file")
    p.add_argument("--population", dest="population_size", type=int)
    p.add_argument("--generations", type=int)
    p.add_argument("--crossover-prob", type=float)
    p.add_argument("--mutation-prob", type=float)
    p.add_argument("--max-depth", type=int)
    p.add_argument("--fitness-mode", choices=gp.FITNESS_MODES)
    p.add_argument("--elitism", type=int)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="64-bit seed (default 0)")
    common.add_argument("--out", help="output path")
    common.add_argument("--quiet", action="store_true")
    common.add_argument("--ordering", choices=ORDERINGS, default=None,
                        help=f"eigenvalue-to-action assignment (default {DEFAULT_ORDERING})")

    parser = argparse.ArgumentParser(prog="qdtgame", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="generate world data")
    p.add_argument("--n", type=int, default=10000)
    p.add_argument("--p-decay", type=float, default=0.5)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("eval", parents=[common], help="show a tree's strategies and beliefs")
    p.add_argument("expression")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("evolve", parents=[common], help="evolve trees on world data")
    p.add_argument("--data", required=True)
    p.add_argument("--runs", type=int, default=1,
                   help="independent runs with seeds seed..seed+runs-1; keeps each run's best")
    _add_gp_flags(p)
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("play", parents=[common], help="play one tree against world data")
    p.add_argument("--tree", required=True, help="expression, file#best or file#N")
    p.add_argument("--data", required=True)
    p.set_defaults(func=cmd_play)

    p = sub.add_parser("ensemble", parents=[common], help="majority-rule play of many trees")
    p.add_argument("--population", help="population file (fitness-sorted)")
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--data", required=True)
    p.add_argument("--unoptimized", action="store_true", help="use freshly grown random trees")
    p.add_argument("--max-depth", type=int, default=gp.DEFAULT_MAX_DEPTH)
    p.set_defaults(func=cmd_ensemble)

    p = sub.add_parser("reconstruct", parents=[common], help="reconstruct the walk group by group")
    p.add_argument("--data", required=True)
    p.add_argument("--group-size", type=int, default=100)
    p.add_argument("--whole-sum", action="store_true",
                   help="divide the summed value by the final divergence instead of per term")
    _add_gp_flags(p)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("report", parents=[common], help="render plot-ready CSV and SVG files")
    p.add_argument("--world")
    p.add_argument("--play-logs", nargs="+")
    p.add_argument("--history")
    p.add_argument("--reconstruction")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("rerun", help="repeat a run from its manifest")
    p.add_argument("manifest")
    p.add_argument("--out", help="write outputs here instead of the recorded path")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_rerun)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except QdtSyntaxError as exc:
        print(f"error: syntax error: {exc}", file=sys.stderr)
        return 2
    except (CliError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
