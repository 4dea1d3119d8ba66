"""End-to-end run: corpus -> linearize -> decode -> (rescore) -> metrics.

Configured by a flat key=value file with explicit validation; every run is
fully deterministic given the config (the seed has no silent default).
Artifacts are written with ordered, reproducible content: ``hyps.txt``,
``refs.txt``, ``metrics.json`` and, when re-ranking, ``selections.tsv`` and
``selected.txt``.
"""

import json
from dataclasses import dataclass, fields
from pathlib import Path

from .corpus import read_corpus
from .decoding import DecodeConfig, decode, strip_trailing_repetition
from .linearize import (
    DEFAULT_SEPARATOR,
    Representation,
    assemble_joint,
    extract_arc_vocabulary,
    linearize,
)
from .metrics import chrf_pp, corpus_bleu, pairs_from_texts
from .providers import END_TOKEN, MemorizingProvider, NgramProvider, TableProvider
from .rescore import CandidateSet, SubprocessParserBackend, rescore_corpus


class ConfigError(Exception):
    pass


_REQUIRED = ("corpus", "out_dir", "seed")

_BOOL_VALUES = {"true": True, "false": False, "1": True, "0": False}


@dataclass
class RunConfig:
    corpus: str
    out_dir: str
    seed: int
    representation: str = "penman"
    strip_sense: bool = False
    strategy: str = "greedy"
    beam_width: int = 5
    nucleus_mass: float = 0.9
    max_length: int = 60
    end_token: str = END_TOKEN
    separator: str = DEFAULT_SEPARATOR
    provider: str = "memorize"
    rescore: bool = False
    parser_cmd: str = ""
    restarts: int = 4

    def validate(self, backend_injected=False, provider_injected=False):
        Representation(self.representation)  # raises on unknown kinds
        if self.strategy not in ("greedy", "beam", "nucleus"):
            raise ConfigError(f"unknown strategy {self.strategy!r}")
        if self.beam_width < 1:
            raise ConfigError("beam_width must be >= 1")
        if not (0.0 < self.nucleus_mass <= 1.0):
            raise ConfigError("nucleus_mass must be in (0, 1]")
        if self.max_length < 1:
            raise ConfigError("max_length must be >= 1")
        if self.restarts < 1:
            raise ConfigError("restarts must be >= 1")
        if self.rescore and not self.parser_cmd and not backend_injected:
            raise ConfigError("rescore requires parser_cmd")
        if not provider_injected and not (
            self.provider == "memorize"
            or self.provider.startswith(("table:", "ngram:"))
        ):
            raise ConfigError(
                f"provider must be 'memorize', 'table:PATH' or 'ngram:PATH[:ORDER]', got {self.provider!r}"
            )

    @classmethod
    def from_mapping(cls, mapping):
        known = {f.name: f.type for f in fields(cls)}
        unknown = sorted(set(mapping) - set(known))
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        missing = sorted(k for k in _REQUIRED if k not in mapping)
        if missing:
            raise ConfigError(f"missing required config keys: {', '.join(missing)}")
        kwargs = {}
        for f in fields(cls):
            if f.name not in mapping:
                continue
            raw = mapping[f.name]
            if f.type in (int, "int"):
                kwargs[f.name] = _convert(f.name, raw, int)
            elif f.type in (float, "float"):
                kwargs[f.name] = _convert(f.name, raw, float)
            elif f.type in (bool, "bool"):
                if str(raw).lower() not in _BOOL_VALUES:
                    raise ConfigError(f"{f.name} must be true or false, got {raw!r}")
                kwargs[f.name] = _BOOL_VALUES[str(raw).lower()]
            else:
                kwargs[f.name] = str(raw)
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path):
        mapping = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
                key, value = (part.strip() for part in line.split("=", 1))
                if key in mapping:
                    raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
                mapping[key] = value
        return cls.from_mapping(mapping)


def _convert(name, raw, conv):
    try:
        return conv(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name} must be {conv.__name__}, got {raw!r}") from exc


def build_provider(cfg, contexts, sentences):
    """Build the configured provider.

    ``memorize`` replays each entry's sentence after its graph context;
    ``table:PATH`` loads the rule-file format; ``ngram:PATH[:ORDER]`` trains
    the toy n-gram model from a plain-text file.
    """
    if cfg.provider == "memorize":
        pairs = [
            (ctx, tuple(sentence.split()))
            for ctx, sentence in zip(contexts, sentences)
        ]
        return MemorizingProvider.memorize(pairs, end_token=cfg.end_token)
    if cfg.provider.startswith("table:"):
        return TableProvider.from_file(cfg.provider[len("table:") :])
    spec = cfg.provider[len("ngram:") :]
    if ":" in spec:
        path, order = spec.rsplit(":", 1)
        return NgramProvider.from_text_file(
            path, order=_convert("ngram order", order, int), end_token=cfg.end_token
        )
    return NgramProvider.from_text_file(spec, end_token=cfg.end_token)


@dataclass
class PipelineResult:
    metrics: dict
    paths: dict


def _candidate_text(tokens, end_token):
    toks = list(tokens)
    while toks and toks[-1] == end_token:
        toks.pop()
    return " ".join(strip_trailing_repetition(toks))


def run_pipeline(cfg, provider=None, parser_backend=None):
    """Run the full generation-and-evaluation loop over a corpus file.

    ``provider``/``parser_backend`` override the configured ones (used by
    fixtures); artifacts land in ``cfg.out_dir``.
    """
    cfg.validate(
        backend_injected=parser_backend is not None,
        provider_injected=provider is not None,
    )
    loaded = read_corpus(cfg.corpus)
    entries = loaded.entries
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    sym = extract_arc_vocabulary([e.graph for e in entries], separator=cfg.separator)
    contexts = []
    for entry in entries:
        lin = linearize(entry.graph, cfg.representation, strip_sense=cfg.strip_sense)
        contexts.append(assemble_joint(lin, [], sym))

    if provider is None:
        provider = build_provider(cfg, contexts, [e.sentence for e in entries])

    candidate_lists = []
    for index, ctx in enumerate(contexts):
        dec = DecodeConfig(
            strategy=cfg.strategy,
            max_length=cfg.max_length,
            end_token=cfg.end_token,
            beam_width=cfg.beam_width,
            nucleus_mass=cfg.nucleus_mass,
            seed=cfg.seed + index,
        )
        hyps = decode(provider, ctx, dec)
        candidate_lists.append(
            [(_candidate_text(h.tokens, cfg.end_token), h.log_score) for h in hyps]
        )

    references = [e.sentence for e in entries]
    top1 = [cands[0][0] for cands in candidate_lists]
    paths = {
        "hyps": out_dir / "hyps.txt",
        "refs": out_dir / "refs.txt",
        "metrics": out_dir / "metrics.json",
    }
    _write_lines(paths["hyps"], top1)
    _write_lines(paths["refs"], references)

    metrics = {
        "entries": len(entries),
        "corpus_errors": len(loaded.errors),
        "bleu_top1": corpus_bleu(pairs_from_texts(top1, references)).value,
        "chrf_pp_top1": chrf_pp(pairs_from_texts(top1, references)).value,
    }

    if cfg.rescore:
        if parser_backend is None:
            parser_backend = SubprocessParserBackend(cfg.parser_cmd)
        sets = [
            CandidateSet(gold=entry.graph, candidates=cands)
            for entry, cands in zip(entries, candidate_lists)
        ]
        results, summary = rescore_corpus(
            sets, parser_backend, restarts=cfg.restarts, seed=cfg.seed
        )
        selected = [
            cands[r.selected_index][0]
            for cands, r in zip(candidate_lists, results)
        ]
        paths["selections"] = out_dir / "selections.tsv"
        paths["selected"] = out_dir / "selected.txt"
        rows = ["set_id\tselected_index\treason\tf1s\ttext"]
        for entry, result, text in zip(entries, results, selected):
            f1s = ";".join(f"{f:.4f}" for f in result.f1s)
            rows.append(
                f"{entry.id}\t{result.selected_index}\t{result.selection_reason}\t{f1s}\t{text}"
            )
        _write_lines(paths["selections"], rows)
        _write_lines(paths["selected"], selected)
        metrics["bleu_selected"] = corpus_bleu(pairs_from_texts(selected, references)).value
        metrics["chrf_pp_selected"] = chrf_pp(pairs_from_texts(selected, references)).value
        metrics["selection_change_rate"] = summary.selection_change_rate
        metrics["mean_selected_f1"] = summary.mean_selected_f1

    paths["metrics"].write_text(
        json.dumps(metrics, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    return PipelineResult(metrics=metrics, paths={k: str(v) for k, v in paths.items()})


def _write_lines(path, lines):
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
