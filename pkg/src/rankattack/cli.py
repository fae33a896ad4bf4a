"""Command-line interface.

Three subcommands:

    index    build a BM25 index from a corpus and persist it as JSON
    attack   run a full attack campaign (see campaign.run_campaign)
    report   re-aggregate an existing results file into fresh reports

Exit status is 0 on success, 1 on a configuration error (bad flags or
config-file values), and 2 on a data error (unreadable or malformed
corpus, queries, embeddings, or results files).
"""

import argparse
import sys
from pathlib import Path

from .attacks import STRATEGIES
from .bm25 import build_index, save_index
from .campaign import make_config, parse_config_file, run_campaign, reports_by_strategy, write_all_reports
from .errors import ConfigError, DataFormatError
from .metrics import load_results
from .text import infer_corpus_format, load_corpus


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on usage errors; the contract here is 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _cmd_index(args) -> int:
    if args.k1 <= 0:
        raise ConfigError("--k1 must be positive")
    if not 0.0 <= args.b <= 1.0:
        raise ConfigError("--b must lie in [0, 1]")
    corpus_format = args.format or infer_corpus_format(args.corpus)
    corpus = load_corpus(args.corpus, format=corpus_format)
    index = build_index(corpus, k1=args.k1, b=args.b)
    save_index(index, args.out)
    print(f"wrote {args.out}")
    return 0


def _cmd_attack(args) -> int:
    values = parse_config_file(args.config) if args.config else {}
    flags = {
        "corpus": args.corpus,
        "queries": args.queries,
        "embeddings": args.embeddings,
        "out_dir": args.out_dir,
        "strategies": tuple(args.strategies) if args.strategies else None,
        "corpus_format": args.format,
        "topk": args.topk,
        "rank_lo": args.rank_lo,
        "rank_hi": args.rank_hi,
        "k": args.k,
        "beta": args.beta,
        "lambda_pos": args.lambda_pos,
        "k1": args.k1,
        "b": args.b,
        "loss_top_m": args.loss_top_m,
        "seed": args.seed,
    }
    values.update({k: v for k, v in flags.items() if v is not None})
    config = make_config(values)
    paths = run_campaign(config)
    for path in (paths.results, paths.report_json, paths.report_csv, paths.isr_csv):
        print(f"wrote {path}")
    return 0


def _cmd_report(args) -> int:
    results = load_results(args.results)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for path in write_all_reports(reports_by_strategy(results), out_dir):
        print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rankattack", description="One-word adversarial attacks on text rankers.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_index = sub.add_parser("index", help="build and persist a BM25 index")
    p_index.add_argument("--corpus", required=True, help="corpus file (TSV or JSONL)")
    p_index.add_argument("--format", choices=("tsv", "jsonl"), help="corpus format (default: from file suffix)")
    p_index.add_argument("--k1", type=float, default=0.9, help="BM25 k1 (default 0.9)")
    p_index.add_argument("--b", type=float, default=0.4, help="BM25 b (default 0.4)")
    p_index.add_argument("--out", required=True, help="output index file")
    p_index.set_defaults(func=_cmd_index)

    p_attack = sub.add_parser("attack", help="run an attack campaign")
    p_attack.add_argument("--config", help="key = value config file; flags override it")
    p_attack.add_argument("--corpus", help="corpus file (TSV or JSONL)")
    p_attack.add_argument("--queries", help="queries file (TSV)")
    p_attack.add_argument("--embeddings", help="word-embedding text file")
    p_attack.add_argument("--out-dir", help="directory for results and reports")
    p_attack.add_argument(
        "--strategies", nargs="+", choices=STRATEGIES, metavar="NAME",
        help=f"strategies to run (default all): {', '.join(STRATEGIES)}",
    )
    p_attack.add_argument("--format", choices=("tsv", "jsonl"), help="corpus format (default: from file suffix)")
    p_attack.add_argument("--topk", type=int, help="candidates retrieved per query (default 100)")
    p_attack.add_argument("--rank-lo", type=int, help="lowest rank to attack (default 11)")
    p_attack.add_argument("--rank-hi", type=int, help="highest rank to attack (default 100)")
    p_attack.add_argument("--k", type=int, help="positions tried by one_word_best_grad (default 20)")
    p_attack.add_argument("--beta", type=float, help="hinge-loss margin (default 1.0)")
    p_attack.add_argument("--lambda-pos", type=float, help="position-decay rate (default 0.01)")
    p_attack.add_argument("--k1", type=float, help="BM25 k1 (default 0.9)")
    p_attack.add_argument("--b", type=float, help="BM25 b (default 0.4)")
    p_attack.add_argument("--loss-top-m", type=int, help="restrict the hinge loss to the top-m competitors")
    p_attack.add_argument("--seed", type=int, help="campaign seed (default 0)")
    p_attack.set_defaults(func=_cmd_attack)

    p_report = sub.add_parser("report", help="re-aggregate an existing results file")
    p_report.add_argument("--results", required=True, help="results.jsonl from a previous attack run")
    p_report.add_argument("--out-dir", required=True, help="directory for the fresh reports")
    p_report.set_defaults(func=_cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"rankattack: error: {exc}", file=sys.stderr)
        return 1
    except (DataFormatError, OSError) as exc:
        print(f"rankattack: error: {exc}", file=sys.stderr)
        return 2


def entrypoint() -> None:
    raise SystemExit(main(sys.argv[1:]))
