"""Command-line entry point: ``stacktopics <subcommand> [options]``.

Settings come from a JSON config file (``--config``); command-line flags
override the file. A seed is mandatory, either in the file or via ``--seed``.
"""
from __future__ import annotations

import argparse
import logging
import sys
from datetime import datetime, timezone
from pathlib import Path

from .pipeline import (
    ConfigError,
    MissingInputError,
    PipelineConfig,
    RunState,
    StageError,
    ingest_stage,
    map_stage,
    read_topics,
    run_all,
    summarize_stage,
    topics_stage,
)
from .topic_model import topic_report

logger = logging.getLogger("stacktopics")

EXIT_OK, EXIT_STAGE, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _date(value: str) -> datetime:
    dt = datetime.fromisoformat(value)
    return dt if dt.tzinfo else dt.replace(tzinfo=timezone.utc)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--seed", type=int, help="random seed (overrides config)")
    common.add_argument("--top-n", type=int, dest="top_n", help="number of topics to report")
    common.add_argument("--out", dest="out_dir", help="output directory")
    common.add_argument("--corpus", dest="corpus_path", help="corpus file")
    common.add_argument("--format", choices=["jsonl", "sedump_xml"], help="corpus format")
    common.add_argument("--jobs", type=int, help="worker threads for summarization")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="stacktopics", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    fetch = sub.add_parser("fetch", parents=[common], help="download a corpus from the Stack Exchange API")
    fetch.add_argument("--site", default="stackoverflow")
    fetch.add_argument("--tag", default="android")
    fetch.add_argument("--from", dest="from_date", type=_date, default=_date("2009-01-01"))
    fetch.add_argument("--to", dest="to_date", type=_date, default=_date("2022-05-01"))
    fetch.add_argument("--page-size", type=int, default=100)
    fetch.add_argument("--max-pages", type=int)
    fetch.add_argument("--cache-dir", help="directory for cached API responses")
    sub.add_parser("ingest", parents=[common], help="strip and normalize the corpus")
    sub.add_parser("topics", parents=[common], help="embed, cluster and describe topics")
    sub.add_parser("map", parents=[common], help="write the intertopic distance map")
    sub.add_parser("summarize", parents=[common], help="summarize problems and solutions per topic")
    sub.add_parser("run", parents=[common], help="run every stage")
    return parser


def load_config(args) -> PipelineConfig:
    overrides = {
        key: getattr(args, key)
        for key in ("seed", "top_n", "out_dir", "corpus_path", "format", "jobs")
        if getattr(args, key, None) is not None
    }
    if args.config:
        return PipelineConfig.load(args.config, overrides)
    return PipelineConfig.from_dict(overrides)


def _fetch(cfg: PipelineConfig, args) -> None:
    from .ingest import write_corpus
    from .se_client import FetchSpec, StackExchangeClient

    if not cfg.corpus_path:
        raise ConfigError("fetch needs --corpus (or corpus_path in the config) to write to")
    spec = FetchSpec(
        site=args.site, tag=args.tag, from_date=args.from_date, to_date=args.to_date,
        page_size=args.page_size, max_pages=args.max_pages,
    )
    client = StackExchangeClient(cache_dir=args.cache_dir)
    questions = list(client.fetch_questions(spec))
    answers = list(client.fetch_answers([q.id for q in questions], spec)) if questions else []
    Path(cfg.corpus_path).parent.mkdir(parents=True, exist_ok=True)
    write_corpus(questions + answers, cfg.corpus_path)
    print(f"wrote {len(questions)} questions and {len(answers)} answers to {cfg.corpus_path}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = load_config(args)
        state = RunState()
        if args.command == "fetch":
            _fetch(cfg, args)
        elif args.command == "ingest":
            records = ingest_stage(cfg, state)
            print(f"ingested {len(records)} posts into {cfg.out_dir}")
        elif args.command == "topics":
            topics, _ = topics_stage(cfg, state)
            print(topic_report(topics, cfg.top_n).to_text())
        elif args.command == "map":
            points = map_stage(cfg, state)
            print(f"mapped {len(points)} topics")
        elif args.command == "summarize":
            sums, _ = summarize_stage(cfg, state)
            print(f"summarized {len(sums)} topics")
        elif args.command == "run":
            run_all(cfg)
            print(topic_report(read_topics(cfg, "run"), cfg.top_n).to_text())
            print(f"artifacts written to {cfg.out_dir}")
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MissingInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STAGE
    except Exception as exc:  # any other stage failure
        logger.debug("stage failure", exc_info=True)
        print(f"error: [{args.command}] {exc}", file=sys.stderr)
        return EXIT_STAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
