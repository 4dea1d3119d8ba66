"""Unified command-line surface.

Every subcommand exits 0 on success; on failure it prints one
machine-readable JSON error line to stderr and exits nonzero.
"""

import argparse
import json
import sys

from . import __version__
from .corpus import CorpusError, corpus_stats, read_corpus
from .decoding import DecodeConfig, decode
from .graph import parse_penman, serialize_penman, validate
from .linearize import (
    DEFAULT_SEPARATOR,
    assemble_joint,
    extract_arc_vocabulary,
    linearize,
)
from .metrics import chrf_pp, corpus_bleu, pairs_from_texts
from .pipeline import ConfigError, RunConfig, run_pipeline
from .providers import END_TOKEN, NgramProvider, TableProvider
from .rescore import (
    CandidateSet,
    SubprocessParserBackend,
    rescore_corpus,
)
from .smatch import micro_average, smatch_bruteforce, smatch_hillclimb


def _read_lines(path):
    with open(path, encoding="utf-8") as fh:
        return [line.rstrip("\n") for line in fh]


def _print_corpus_problems(result):
    for index, message in result.errors:
        print(f"# error block {index}: {message}", file=sys.stderr)
    for index, message in result.warnings:
        print(f"# warning block {index}: {message}", file=sys.stderr)


def cmd_parse(args):
    result = read_corpus(args.file)
    _print_corpus_problems(result)
    for entry in result.entries:
        report = validate(entry.graph)
        status = "ok" if report.ok else ";".join(sorted(report.kinds()))
        if args.serialize:
            print(serialize_penman(entry.graph))
        else:
            print(f"{entry.id}\t{len(entry.graph.variables())}\t{status}")
    if result.errors and args.strict:
        return 1
    return 0


def cmd_linearize(args):
    result = read_corpus(args.file)
    _print_corpus_problems(result)
    for entry in result.entries:
        lin = linearize(entry.graph, args.repr, strip_sense=args.strip_sense)
        print(" ".join(lin.tokens))
    return 0


def cmd_vocab(args):
    result = read_corpus(args.file)
    _print_corpus_problems(result)
    sym = extract_arc_vocabulary(
        [e.graph for e in result.entries], separator=args.separator
    )
    print(f"separator\t{sym.separator}")
    for label, token in sorted(sym.reserved.items()):
        print(f"{label}\t{token}")
    return 0


def cmd_smatch(args):
    gold = read_corpus(args.gold_file)
    pred = read_corpus(args.pred_file)
    _print_corpus_problems(gold)
    _print_corpus_problems(pred)
    if len(gold.entries) != len(pred.entries):
        raise CorpusError(
            f"{len(gold.entries)} gold vs {len(pred.entries)} predicted graphs"
        )
    scores = []
    for g, p in zip(gold.entries, pred.entries):
        if args.oracle:
            score = smatch_bruteforce(g.graph, p.graph)
        else:
            score = smatch_hillclimb(
                g.graph, p.graph, restarts=args.restarts, seed=args.seed
            )
        scores.append(score)
        print(f"{g.id}\t{score.precision:.4f}\t{score.recall:.4f}\t{score.f1:.4f}")
    total = micro_average(scores)
    print(f"corpus\t{total.precision:.4f}\t{total.recall:.4f}\t{total.f1:.4f}")
    return 0


def cmd_score(args):
    hyps = _read_lines(args.hyp_file)
    refs = _read_lines(args.ref_file)
    pairs = pairs_from_texts(hyps, refs)
    if args.metric == "bleu":
        score = corpus_bleu(pairs)
        print(f"bleu\t{score.value:.4f}")
        for n, p in enumerate(score.components, start=1):
            shown = "n/a" if p is None else f"{p:.6f}"
            print(f"precision_{n}\t{shown}")
        print(f"brevity_penalty\t{score.brevity_penalty:.6f}")
    else:
        score = chrf_pp(pairs)
        print(f"chrfpp\t{score.value:.4f}")
        labels = [f"char_{n}" for n in range(1, 7)] + [f"word_{n}" for n in (1, 2)]
        for label, f in zip(labels, score.components):
            shown = "n/a" if f is None else f"{f:.6f}"
            print(f"f_{label}\t{shown}")
    return 0


def _load_provider(spec, end_token):
    if spec.startswith("table:"):
        return TableProvider.from_file(spec[len("table:") :])
    if spec.startswith("ngram:"):
        rest = spec[len("ngram:") :]
        if ":" in rest:
            path, order = rest.rsplit(":", 1)
            return NgramProvider.from_text_file(path, order=int(order), end_token=end_token)
        return NgramProvider.from_text_file(rest, end_token=end_token)
    raise ValueError(f"provider must be table:PATH or ngram:PATH[:ORDER], got {spec!r}")


def cmd_decode(args):
    provider = _load_provider(args.provider, args.end_token)
    cfg = DecodeConfig(
        strategy=args.strategy,
        max_length=args.max_length,
        end_token=args.end_token,
        beam_width=args.beam_width,
        nucleus_mass=args.nucleus_mass,
        seed=args.seed,
    )
    contexts = [args.context.split()] if args.context is not None else [
        line.split() for line in sys.stdin
    ]
    for ctx in contexts:
        for rank, hyp in enumerate(decode(provider, ctx, cfg)):
            print(f"{rank}\t{hyp.log_score:.6f}\t{' '.join(hyp.tokens)}")
    return 0


def _read_beams(path):
    sets = {}
    order = []
    for lineno, line in enumerate(_read_lines(path), start=1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 4:
            raise ValueError(f"{path}:{lineno}: expected 4 tab-separated fields")
        set_id, rank, score, text = parts
        if set_id not in sets:
            sets[set_id] = []
            order.append(set_id)
        sets[set_id].append((int(rank), float(score), text))
    for set_id in order:
        sets[set_id].sort(key=lambda item: item[0])
    return order, sets


def cmd_rescore(args):
    gold = read_corpus(args.gold)
    _print_corpus_problems(gold)
    order, beam_sets = _read_beams(args.beams)
    by_id = {e.id: e for e in gold.entries}
    missing = [set_id for set_id in order if set_id not in by_id]
    if missing:
        raise CorpusError(f"no gold graph for set ids: {', '.join(missing)}")
    sets = [
        CandidateSet(
            gold=by_id[set_id].graph,
            candidates=[(text, score) for _, score, text in beam_sets[set_id]],
        )
        for set_id in order
    ]
    backend = SubprocessParserBackend(args.parser_cmd)
    results, summary = rescore_corpus(
        sets, backend, restarts=args.restarts, seed=args.seed
    )
    print("set_id\tselected_index\treason\tf1s")
    for set_id, result in zip(order, results):
        f1s = ";".join(f"{f:.4f}" for f in result.f1s)
        print(f"{set_id}\t{result.selected_index}\t{result.selection_reason}\t{f1s}")
    print(f"# selection_change_rate\t{summary.selection_change_rate:.4f}")
    print(f"# mean_selected_f1\t{summary.mean_selected_f1:.4f}")
    return 0


def cmd_stats(args):
    for path in args.files:
        result = read_corpus(path)
        _print_corpus_problems(result)
        stats = corpus_stats(result.entries)
        print(f"file\t{path}")
        print(f"entries\t{stats.count}")
        print(f"mean_variables\t{stats.mean_variables:.2f}")
        print(f"max_variables\t{stats.max_variables}")
        print(f"relation_labels\t{stats.relation_label_count}")
    return 0


def cmd_pipeline(args):
    cfg = RunConfig.from_file(args.config)
    result = run_pipeline(cfg)
    for key in sorted(result.metrics):
        print(f"{key}\t{result.metrics[key]}")
    for name in sorted(result.paths):
        print(f"# wrote {name}: {result.paths[name]}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="amrgen",
        description="AMR graph handling, linearization, decoding, Smatch and text metrics",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="parse an AMR-bank file and validate each graph")
    p.add_argument("file")
    p.add_argument("--serialize", action="store_true", help="print canonical PENMAN")
    p.add_argument("--strict", action="store_true", help="nonzero exit on block errors")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("linearize", help="print token sequences for each graph")
    p.add_argument("file")
    p.add_argument("--repr", choices=["nodes", "dfs", "penman"], default="penman")
    p.add_argument("--strip-sense", action="store_true")
    p.set_defaults(func=cmd_linearize)

    p = sub.add_parser("vocab", help="print the special-symbol map for a corpus")
    p.add_argument("file")
    p.add_argument("--separator", default=DEFAULT_SEPARATOR)
    p.set_defaults(func=cmd_vocab)

    p = sub.add_parser("smatch", help="Smatch P/R/F1 between two AMR-bank files")
    p.add_argument("gold_file")
    p.add_argument("pred_file")
    p.add_argument("--restarts", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--oracle", action="store_true", help="exact brute-force search")
    p.set_defaults(func=cmd_smatch)

    p = sub.add_parser("score", help="corpus BLEU or chrF++ for hyp/ref files")
    p.add_argument("hyp_file")
    p.add_argument("ref_file")
    p.add_argument("--metric", choices=["bleu", "chrfpp"], required=True)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("decode", help="decode contexts with a file-backed provider")
    p.add_argument("--provider", required=True, help="table:PATH or ngram:PATH[:ORDER]")
    p.add_argument("--strategy", choices=["greedy", "beam", "nucleus"], default="greedy")
    p.add_argument("--beam-width", type=int, default=5)
    p.add_argument("--nucleus-mass", type=float, default=0.9)
    p.add_argument("--max-length", type=int, default=30)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--end-token", default=END_TOKEN)
    p.add_argument("--context", help="context tokens; omit to read contexts from stdin")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("rescore", help="cycle-consistency re-ranking of beam outputs")
    p.add_argument("--gold", required=True, help="AMR-bank file with gold graphs")
    p.add_argument("--beams", required=True, help="TSV: set_id, rank, score, text")
    p.add_argument("--parser-cmd", required=True)
    p.add_argument("--restarts", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_rescore)

    p = sub.add_parser("stats", help="corpus statistics")
    p.add_argument("files", nargs="+")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("pipeline", help="run the end-to-end pipeline from a config file")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_pipeline)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # one machine-readable error line, nonzero exit
        print(
            json.dumps({"error": type(exc).__name__, "message": str(exc)}),
            file=sys.stderr,
        )
        return 1


if __name__ == "__main__":
    sys.exit(main())
