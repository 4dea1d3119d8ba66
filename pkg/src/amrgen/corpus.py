"""AMR-bank corpus ingestion and statistics.

A corpus file is a sequence of blocks separated by blank lines.  Lines
starting with ``#`` carry metadata (``# ::id``, ``# ::snt``, and anything
else, preserved verbatim); the remaining lines of a block are one PENMAN
expression.
"""

from collections import Counter
from dataclasses import dataclass, field

from .graph import PenmanSyntaxError, parse_penman, serialize_penman


class CorpusError(Exception):
    pass


@dataclass(frozen=True)
class CorpusEntry:
    id: str
    sentence: str
    graph: object
    raw_block: str

    def same_as(self, other):
        from .graph import graph_equal

        return (
            self.id == other.id
            and self.sentence == other.sentence
            and graph_equal(self.graph, other.graph)
            and self.raw_block == other.raw_block
        )


@dataclass
class CorpusLoadResult:
    entries: list = field(default_factory=list)
    errors: list = field(default_factory=list)  # (block_index, message)
    warnings: list = field(default_factory=list)  # (block_index, message)


def _split_blocks(text):
    blocks = []
    current = []
    for line in text.splitlines():
        if line.strip():
            current.append(line)
        elif current:
            blocks.append(current)
            current = []
    if current:
        blocks.append(current)
    return blocks


def _parse_block(lines, index, result):
    meta = {}
    graph_lines = []
    for line in lines:
        stripped = line.strip()
        if stripped.startswith("#"):
            body = stripped.lstrip("#").strip()
            if body.startswith("::"):
                parts = body[2:].split(None, 1)
                if parts:
                    meta[parts[0]] = parts[1] if len(parts) > 1 else ""
        else:
            graph_lines.append(line)
    if not graph_lines:
        result.errors.append((index, "block has no graph"))
        return None
    try:
        graph = parse_penman("\n".join(graph_lines))
    except PenmanSyntaxError as exc:
        result.errors.append((index, str(exc)))
        return None
    entry_id = meta.get("id", f"block-{index}")
    sentence = meta.get("snt", "")
    if "snt" not in meta:
        result.warnings.append((index, "block has no ::snt metadata"))
    return CorpusEntry(
        id=entry_id,
        sentence=sentence,
        graph=graph,
        raw_block="\n".join(lines),
    )


def read_corpus(path):
    """Read an AMR-bank file into entries plus an error/warning report.

    Malformed blocks land in the report instead of being dropped silently;
    a file with zero parseable blocks is an error.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise CorpusError(f"cannot read corpus {path}: {exc}") from exc
    result = CorpusLoadResult()
    for index, lines in enumerate(_split_blocks(text)):
        entry = _parse_block(lines, index, result)
        if entry is not None:
            result.entries.append(entry)
    if not result.entries:
        raise CorpusError(f"no parseable blocks in {path}")
    return result


def write_corpus(entries, path):
    """Write entries back out as blank-line-separated blocks.

    Entries read from a file keep their raw block byte-for-byte; entries
    built programmatically get a synthesized block.
    """
    blocks = []
    for entry in entries:
        if entry.raw_block:
            blocks.append(entry.raw_block)
        else:
            lines = [f"# ::id {entry.id}"]
            if entry.sentence:
                lines.append(f"# ::snt {entry.sentence}")
            lines.append(serialize_penman(entry.graph))
            blocks.append("\n".join(lines))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n\n".join(blocks) + "\n")


@dataclass(frozen=True)
class SplitStats:
    count: int
    mean_variables: float
    max_variables: int
    relation_label_count: int
    variable_histogram: tuple  # sorted (n_variables, n_graphs)
    sentence_length_histogram: tuple  # sorted (n_tokens, n_sentences)


def corpus_stats(entries):
    """Instance count, variables-per-graph stats, and label inventory size."""
    entries = list(entries)
    if not entries:
        return SplitStats(0, 0.0, 0, 0, (), ())
    var_counts = [len(e.graph.variables()) for e in entries]
    labels = set()
    for e in entries:
        labels.update(role for _, role, _ in e.graph.relations)
        labels.update(role for _, role, _ in e.graph.attributes)
    sent_lengths = Counter(len(e.sentence.split()) for e in entries)
    return SplitStats(
        count=len(entries),
        mean_variables=sum(var_counts) / len(var_counts),
        max_variables=max(var_counts),
        relation_label_count=len(labels),
        variable_histogram=tuple(sorted(Counter(var_counts).items())),
        sentence_length_histogram=tuple(sorted(sent_lengths.items())),
    )
