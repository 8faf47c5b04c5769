"""Command-line entry point: ``chccomp <subcommand> ...``.

Exit codes: 0 success, 1 validation or input failure, 2 internal error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .categorize import categorize_file, format_report
from .config import ConfigError, PipelineConfig, load_config, load_solvers
from .normalize import Formatter, Rejected, digest, fingerprint, parse_or_reject
from .runner import job_csv_text, read_job_csv, run_campaign
from .scoring import (
    filter_records,
    find_inconsistencies,
    inconsistencies_jsonl,
    rank,
    ranking_csv,
    ranking_table,
    score,
)
from .selection import format_selection, parse_bucket_manifest, select_all

log = logging.getLogger("chccomp")

EXIT_OK, EXIT_INVALID, EXIT_INTERNAL = 0, 1, 2


class InputError(Exception):
    """Bad user input; reported without a traceback and exit code 1."""


def _bool(text: str) -> bool:
    low = text.lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected true or false, got {text!r}")


def expand_inputs(items: Sequence[str]) -> list[Path]:
    """Files as given, directories expanded to their ``*.smt2`` files (sorted)."""
    out = []
    for item in items:
        p = Path(item)
        if p.is_dir():
            out.extend(sorted(p.rglob("*.smt2")))
        elif p.is_file():
            out.append(p)
        else:
            raise InputError(f"no such file or directory: {item}")
    return out


def _emit(text: str, path: Optional[str]) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# --- subcommands -------------------------------------------------------------------


def cmd_format(args, cfg: PipelineConfig) -> int:
    out_dir = args.out_dir or cfg.out_dir
    if not out_dir:
        raise InputError("format needs --out-dir (or paths.out_dir in the config)")
    files = expand_inputs(args.inputs or cfg.benchmark_roots)
    formatter = Formatter(out_dir, merge=args.merge_queries, quarantine_dir=args.quarantine)
    with ThreadPoolExecutor(max_workers=args.parallelism or cfg.parallelism) as pool:
        reports = list(pool.map(formatter.run, files))
    _emit("".join(r.to_json() + "\n" for r in reports), args.report)
    rejected = [r for r in reports if r.rejection]
    for r in rejected:
        log.warning("rejected %s: %s", r.input, r.rejection["message"])
    dups = sum(r.duplicate_of is not None for r in reports)
    log.info("%d files: %d written, %d duplicates, %d rejected",
             len(reports), len(reports) - len(rejected) - dups, dups, len(rejected))
    return EXIT_INVALID if rejected else EXIT_OK


def cmd_categorize(args, cfg: PipelineConfig) -> int:
    files = expand_inputs(args.inputs or cfg.benchmark_roots)
    _emit(format_report((str(f), categorize_file(f)) for f in files), args.output)
    return EXIT_OK


def cmd_select(args, cfg: PipelineConfig) -> int:
    policy = cfg.policy
    if args.seed is not None:
        policy.seed = args.seed
    for item in args.cap or ():
        try:
            key, value = item.rsplit("=", 1)
            track, repo = key.split("/", 1)
            policy.caps[(track, repo)] = int(value)
        except ValueError:
            raise InputError(f"--cap expects TRACK/REPO=N, got {item!r}") from None
    try:
        pools = parse_bucket_manifest(Path(args.manifest).read_text(encoding="utf-8"), policy)
        rows = select_all(pools, policy)
    except KeyError as exc:
        raise InputError(exc.args[0]) from None
    except ValueError as exc:
        raise InputError(str(exc)) from None
    _emit(format_selection(rows), args.output)
    return EXIT_OK


def _benchmarks_for_run(args, cfg: PipelineConfig) -> list[str]:
    benches = [str(p) for p in expand_inputs(args.inputs)] if args.inputs else []
    if args.selection:
        for line in Path(args.selection).read_text(encoding="utf-8").splitlines():
            if line.strip():
                benches.append(line.split("\t")[-1])
    if not benches and cfg.benchmark_roots:
        benches = [str(p) for p in expand_inputs(cfg.benchmark_roots)]
    return list(dict.fromkeys(benches))


def cmd_run(args, cfg: PipelineConfig) -> int:
    solvers = load_solvers(args.solvers) if args.solvers else cfg.solvers
    if not solvers:
        raise InputError("no solvers configured (use --solvers or the config's solvers list)")
    limits = cfg.preset(args.preset)
    benches = _benchmarks_for_run(args, cfg)
    campaign = run_campaign(solvers, benches, limits, args.parallelism or cfg.parallelism,
                            csv_path=args.csv)
    if not args.csv:
        sys.stdout.write(job_csv_text(campaign.records))
    for err in campaign.errors:
        log.error("%s", err)
    return EXIT_INVALID if campaign.errors else EXIT_OK


def cmd_score(args, cfg: PipelineConfig) -> int:
    records = filter_records(read_job_csv(args.csv), args.disqualify or (),
                             args.drop_benchmark or ())
    hc = set(args.hors_concours or ())
    hc.update(s.solver for s in cfg.solvers if s.hors_concours)
    ranking = rank(score(records, hc))
    _emit(ranking_table(ranking), None)
    if args.ranking_csv:
        Path(args.ranking_csv).write_text(ranking_csv(ranking), encoding="utf-8")
    issues = find_inconsistencies(records)
    if args.inconsistencies:
        Path(args.inconsistencies).write_text(inconsistencies_jsonl(issues), encoding="utf-8")
    for i in issues:
        log.warning("disagreement on %s: sat by %s, unsat by %s", i.benchmark,
                    ", ".join(i.sat), ", ".join(i.unsat))
    return EXIT_OK


def _repository(path: Path, root: Path) -> str:
    rel = path.relative_to(root)
    return rel.parts[0] if len(rel.parts) > 1 else root.name


def cmd_report(args, cfg: PipelineConfig) -> int:
    """Per (track, repository): total files and distinct fingerprints."""
    total: dict[tuple[str, str], int] = defaultdict(int)
    prints: dict[tuple[str, str], set[str]] = defaultdict(set)
    for root in map(Path, args.roots or cfg.benchmark_roots):
        if not root.is_dir():
            raise InputError(f"not a directory: {root}")
        for f in sorted(root.rglob("*.smt2")):
            key = (categorize_file(f).track.value, _repository(f, root))
            text = f.read_text(encoding="utf-8")
            try:
                fp = fingerprint(parse_or_reject(text))
            except Rejected:
                fp = digest(text)
            total[key] += 1
            prints[key].add(fp)
    lines = ["track\trepository\ttotal\tunique\n"]
    lines += [f"{t}\t{r}\t{total[(t, r)]}\t{len(prints[(t, r)])}\n" for t, r in sorted(total)]
    _emit("".join(lines), args.output)
    return EXIT_OK


# --- parser ----------------------------------------------------------------------------


def _subparsers(parser: argparse.ArgumentParser) -> dict[str, argparse.ArgumentParser]:
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return dict(action.choices)
    return {}


def apply_config_defaults(parser: argparse.ArgumentParser, cfg: PipelineConfig) -> None:
    """Config ``defaults`` become subcommand defaults, so explicit flags still win."""
    subs = _subparsers(parser)
    for command, options in cfg.command_defaults.items():
        if command not in subs:
            raise ConfigError(f"defaults: unknown subcommand {command!r}")
        sub = subs[command]
        known = {a.dest: a for a in sub._actions if a.dest not in ("help", "func")}
        for key, value in options.items():
            if key not in known:
                raise ConfigError(f"defaults.{command}: unknown option {key!r}")
            action = known[key]
            if isinstance(value, str) and action.type is not None:
                value = action.type(value)
            sub.set_defaults(**{key: value})


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="chccomp", description="CHC benchmark competition pipeline")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--config", help="YAML pipeline configuration")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    f = sub.add_parser("format", aliases=["normalize"], help="bring benchmarks into competition format")
    f.add_argument("inputs", nargs="*", help="files or directories")
    f.add_argument("--out-dir")
    f.add_argument("--merge-queries", "--merge_queries", type=_bool, default=True, metavar="BOOL")
    f.add_argument("--quarantine", help="copy rejected inputs here")
    f.add_argument("--report", help="JSON-lines report (default: stdout)")
    f.add_argument("-j", "--parallelism", type=int)
    f.set_defaults(func=cmd_format)

    c = sub.add_parser("categorize", help="assign each benchmark to a track")
    c.add_argument("inputs", nargs="*")
    c.add_argument("-o", "--output")
    c.set_defaults(func=cmd_categorize)

    s = sub.add_parser("select", help="pick per-repository subsets from rated buckets")
    s.add_argument("manifest", help="track<TAB>repository<TAB>rating<TAB>path lines")
    s.add_argument("--seed", type=int)
    s.add_argument("--cap", action="append", metavar="TRACK/REPO=N")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_select)

    r = sub.add_parser("run", help="run solvers on benchmarks")
    r.add_argument("inputs", nargs="*")
    r.add_argument("--selection", help="selection manifest whose last column is a path")
    r.add_argument("--solvers", help="YAML solver registry")
    r.add_argument("--preset", default="test")
    r.add_argument("-j", "--parallelism", type=int)
    r.add_argument("--csv", help="job-information CSV (default: stdout)")
    r.set_defaults(func=cmd_run)

    sc = sub.add_parser("score", help="score and rank solvers from a job CSV")
    sc.add_argument("csv")
    sc.add_argument("--hors-concours", action="append", metavar="SOLVER")
    sc.add_argument("--disqualify", action="append", metavar="SOLVER")
    sc.add_argument("--drop-benchmark", action="append", metavar="ID")
    sc.add_argument("--ranking-csv")
    sc.add_argument("--inconsistencies", help="JSON-lines disagreement report")
    sc.set_defaults(func=cmd_score)

    rp = sub.add_parser("report", help="total/unique benchmark counts per track and repository")
    rp.add_argument("roots", nargs="*", help="directories whose subdirectories are repositories")
    rp.add_argument("-o", "--output")
    rp.set_defaults(func=cmd_report)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    pre.add_argument("-v", "--verbose", action="store_true")
    early, _ = pre.parse_known_args(argv)
    logging.basicConfig(level=logging.DEBUG if early.verbose else logging.INFO,
                        format="%(levelname)s: %(message)s", force=True)
    parser = build_parser()
    try:
        cfg = load_config(early.config)
        apply_config_defaults(parser, cfg)
    except (ConfigError, OSError, ValueError, argparse.ArgumentTypeError) as exc:
        log.error("%s", exc)
        return EXIT_INVALID
    args = parser.parse_args(argv)
    try:
        return args.func(args, cfg)
    except (InputError, ConfigError, OSError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_INVALID
    except Exception:
        log.exception("internal error")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
