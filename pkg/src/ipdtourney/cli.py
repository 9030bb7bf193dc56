"""Command line front end.

    ipdtourney run [--config FILE] [--preset NAME] [--mode roundrobin|repeat|subsets] ...
    ipdtourney export RESULTS_DIR --kind rank-change|coop-heatmap|score-violin
    ipdtourney list-strategies

Config files are JSON objects with the keys of ``TournamentConfig`` plus the
run options ``mode``, ``n_runs``, ``k`` and ``pool``. A results directory's
``manifest.json`` carries the resolved document under ``"run"`` and is itself
accepted by ``--config``.

Exit status: 0 ok, 2 bad config or arguments, 3 unknown strategy id,
4 strategy contract violation, 5 missing or unreadable inputs.
"""

from __future__ import annotations

import argparse
import hashlib
import io
import json
import os
import sys
import time
from pathlib import Path

from . import __version__
from .analysis import cooperation_matrix, mean_cooperation
from .strategies import CATALOG_VERSION, UnknownStrategyError, list_strategies
from .tournament import (
    PRESET_N_RUNS,
    ConfigError,
    InteractionCache,
    MatchFailure,
    RankingReport,
    TournamentConfig,
    enumerate_added_subsets,
    preset,
    repeat_tournament,
    run_tournament,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_UNKNOWN_STRATEGY = 3
EXIT_CONTRACT = 4
EXIT_MISSING_INPUT = 5

MODES = ("roundrobin", "repeat", "subsets")
RUN_KEYS = ("mode", "n_runs", "k", "pool")


class MissingInputError(FileNotFoundError):
    pass


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _read_pool(path: str) -> list[str]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise MissingInputError(f"cannot read pool file {path}: {exc.strerror}") from None
    return [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]


def resolve_run(args) -> tuple[TournamentConfig, dict]:
    """Merge preset, config file and command-line overrides into (config, run options)."""
    doc: dict = {}
    if args.config:
        try:
            loaded = json.loads(Path(args.config).read_text())
        except OSError as exc:
            raise MissingInputError(f"cannot read config {args.config}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{args.config}: invalid JSON ({exc})") from None
        if not isinstance(loaded, dict):
            raise ConfigError(f"{args.config}: expected a JSON object")
        doc = loaded.get("run", loaded)
    preset_name = args.preset or doc.pop("preset", None) or "axelrod-second-1980"
    doc.pop("preset", None)
    opts = {"mode": "roundrobin", "n_runs": PRESET_N_RUNS, "k": 1, "pool": []}
    for key in RUN_KEYS:
        if key in doc:
            opts[key] = doc.pop(key)

    overrides = dict(doc)
    if args.players:
        overrides["players"] = [p for p in args.players.split(",") if p]
    if args.lengths:
        overrides["lengths"] = [int(x) for x in args.lengths.split(",")]
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if args.noise is not None:
        overrides["noise_prob"] = args.noise
    if args.reps is not None:
        overrides["repetitions"] = args.reps
    if args.self_matches is not None:
        overrides["include_self_matches"] = args.self_matches
    if args.baseline is not None:
        overrides["include_random_baseline"] = args.baseline
    if args.mode:
        opts["mode"] = args.mode
    if args.runs is not None:
        opts["n_runs"] = args.runs
    if args.k is not None:
        opts["k"] = args.k
    if args.pool_file:
        opts["pool"] = _read_pool(args.pool_file)

    if opts["mode"] not in MODES:
        raise ConfigError(f"mode must be one of {MODES}, got {opts['mode']!r}")
    if opts["mode"] == "subsets":
        if not opts["pool"]:
            raise ConfigError("subsets mode needs a pool (--pool-file or \"pool\")")
        players = list(overrides.get("players", preset(preset_name).players))
        overrides["players"] = players + [p for p in opts["pool"] if p not in players]
    base = preset(preset_name).to_dict()
    base.update(overrides)
    config = TournamentConfig.from_dict(base)
    return config, opts


def _write(out: Path, name: str, text: str) -> None:
    with open(out / name, "w", newline="\n") as fh:
        fh.write(text)


def _runs_csv(report: RankingReport) -> str:
    buf = io.StringIO()
    buf.write("run,strategy,mean_score,winner\n")
    for r, row in enumerate(report.run_scores):
        for p, s in zip(report.players, row):
            buf.write(f"{r},{p},{float(s)!r},{int(p == report.winners[r])}\n")
    return buf.getvalue()


def execute(config: TournamentConfig, opts: dict, out: Path) -> dict:
    """Run one job and write its result files; returns ``{filename: sha256}``."""
    out.mkdir(parents=True, exist_ok=True)
    mode = opts["mode"]
    files = []
    if mode == "repeat":
        report = repeat_tournament(config, int(opts["n_runs"]))
        cache = report.cache
        _write(out, "runs.csv", _runs_csv(report))
        files.append("runs.csv")
    else:
        cache, report = run_tournament(config)
    _write(out, "rankings.csv", report.to_csv())
    _write(out, "interactions.csv", cache.to_csv())
    order = [int(i) for i in report.order]
    _write(out, "cooperation.csv", cooperation_matrix(cache, order).to_long_csv())
    files += ["rankings.csv", "interactions.csv", "cooperation.csv"]
    if mode == "subsets":
        pool_ids = list(dict.fromkeys(opts["pool"]))
        pool = [cache.index(p) for p in pool_ids]
        base = [i for i in range(len(cache.players)) if i not in set(pool)]
        tally = enumerate_added_subsets(cache, base, pool, int(opts["k"]))
        _write(out, "subset_tally.csv", tally.to_csv())
        files.append("subset_tally.csv")
    return {name: _sha256(out / name) for name in sorted(files)}


def cmd_run(args) -> int:
    config, opts = resolve_run(args)
    out = Path(args.out)
    start = time.time()
    digests = execute(config, opts, out)
    elapsed = time.time() - start
    cache = InteractionCache.load(out / "interactions.csv")
    manifest = {
        "tool": "ipdtourney",
        "version": __version__,
        "catalog_version": CATALOG_VERSION,
        "master_seed": config.master_seed,
        "run": {**config.to_dict(), **{k: opts[k] for k in RUN_KEYS}},
        "fingerprint": config.fingerprint(),
        "timing": {"started": time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime(start)),
                   "elapsed_seconds": round(elapsed, 3)},
        "mean_cooperation": mean_cooperation(cache),
        "outputs": digests,
    }
    _write(out, "manifest.json", json.dumps(manifest, indent=2) + "\n")
    print(f"wrote {', '.join(digests)} and manifest.json to {out}")
    return EXIT_OK


# ---------------------------------------------------------------- export

def _require(path: Path) -> Path:
    if not path.is_file():
        raise MissingInputError(f"missing input file: {path}")
    return path


def _load_manifest(results: Path) -> dict:
    try:
        return json.loads(_require(results / "manifest.json").read_text())
    except json.JSONDecodeError as exc:
        raise MissingInputError(f"{results / 'manifest.json'}: unreadable ({exc})") from None


def export_plotdata(results_dir, kind: str, against=None) -> str:
    """Long-format CSV for plotting: rank changes, cooperation heat map or score distribution."""
    results = Path(results_dir)
    _load_manifest(results)
    if kind == "rank-change":
        if against is None:
            raise ConfigError("rank-change needs a second results directory (--against)")
        other = Path(against)
        _load_manifest(other)
        before = RankingReport.read_csv(_require(other / "rankings.csv").read_text())
        after = RankingReport.read_csv(_require(results / "rankings.csv").read_text())
        buf = io.StringIO()
        buf.write("strategy,rank_before,rank_after,delta\n")
        for s in sorted(after, key=after.get):
            if s in before:
                buf.write(f"{s},{before[s]},{after[s]},{after[s] - before[s]}\n")
        return buf.getvalue()
    if kind == "coop-heatmap":
        return _require(results / "cooperation.csv").read_text()
    if kind == "score-violin":
        runs = results / "runs.csv"
        buf = io.StringIO()
        buf.write("strategy,run,mean_score\n")
        if runs.is_file():
            rows = runs.read_text().strip().splitlines()[1:]
            for row in rows:
                run, strategy, score, _ = row.split(",")
                buf.write(f"{strategy},{run},{score}\n")
        else:
            rows = _require(results / "rankings.csv").read_text().strip().splitlines()[1:]
            for row in rows:
                _, strategy, score, _ = row.split(",")
                buf.write(f"{strategy},0,{score}\n")
        return buf.getvalue()
    raise ConfigError(f"unknown export kind {kind!r}")


def cmd_export(args) -> int:
    text = export_plotdata(args.results_dir, args.kind, args.against)
    if args.out:
        with open(args.out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_list(args) -> int:
    sys.stdout.write("id,name,author,stochastic\n")
    for e in list_strategies():
        sys.stdout.write(f"{e.id},{e.name},{e.author},{str(e.stochastic).lower()}\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ipdtourney", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a tournament and write result CSVs")
    run.add_argument("--config", help="JSON config file or a previous manifest.json")
    run.add_argument("--preset", help="named defaults (axelrod-second-1980)")
    run.add_argument("--players", help="comma-separated strategy ids")
    run.add_argument("--lengths", help="comma-separated match lengths")
    run.add_argument("--seed", type=int, help="master seed")
    run.add_argument("--noise", type=float, help="per-move flip probability")
    run.add_argument("--reps", type=int, help="repetitions of each match length")
    run.add_argument("--runs", type=int, help="tournaments in repeat mode")
    run.add_argument("--self", dest="self_matches", action="store_true", default=None)
    run.add_argument("--no-self", dest="self_matches", action="store_false")
    run.add_argument("--baseline", dest="baseline", action="store_true", default=None,
                     help="append the Random(0.5) baseline player")
    run.add_argument("--no-baseline", dest="baseline", action="store_false")
    run.add_argument("--mode", choices=MODES)
    run.add_argument("--k", type=int, help="strategies added per sub-tournament")
    run.add_argument("--pool-file", help="one strategy id per line")
    run.add_argument("--out", default="results", help="output directory")
    run.set_defaults(func=cmd_run)

    exp = sub.add_parser("export", help="emit plot-ready long-format CSV")
    exp.add_argument("results_dir")
    exp.add_argument("--kind", required=True, choices=("rank-change", "coop-heatmap", "score-violin"))
    exp.add_argument("--against", help="baseline results directory for rank-change")
    exp.add_argument("--out", help="write here instead of stdout")
    exp.set_defaults(func=cmd_export)

    ls = sub.add_parser("list-strategies", help="print the strategy catalog")
    ls.set_defaults(func=cmd_list)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UnknownStrategyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNKNOWN_STRATEGY
    except MatchFailure as exc:
        print(f"error: strategy contract violation: {exc}", file=sys.stderr)
        return EXIT_CONTRACT
    except MissingInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISSING_INPUT
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
