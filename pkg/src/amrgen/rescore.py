"""Cycle-consistency re-ranking of generated candidates.

Each candidate sentence is parsed back into a graph by an external parser
backend; candidates are re-ranked by Smatch against the gold graph.  Parse
failures score 0 and re-ranking falls back to the original top candidate
when every parse fails.
"""

import shlex
import subprocess
import tempfile
from abc import ABC, abstractmethod
from dataclasses import dataclass
from pathlib import Path

from .graph import PenmanSyntaxError, parse_penman
from .smatch import DEFAULT_RESTARTS, smatch_hillclimb


class BackendTransportError(Exception):
    """The parser backend itself failed (as opposed to one sentence)."""


@dataclass(frozen=True)
class CandidateSet:
    """Gold graph plus model-ranked candidate sentences.

    ``candidates`` are ``(text, model_log_score)`` in original model order;
    scores must be non-increasing.
    """

    gold: object
    candidates: tuple

    def __post_init__(self):
        object.__setattr__(self, "candidates", tuple(tuple(c) for c in self.candidates))
        if not self.candidates:
            raise ValueError("candidate set must be nonempty")
        scores = [s for _, s in self.candidates]
        if any(a < b for a, b in zip(scores, scores[1:])):
            raise ValueError("model scores must be non-increasing down the list")


@dataclass(frozen=True)
class RescoreResult:
    scores: tuple  # per-candidate SmatchScore or None for parse failures
    selected_index: int
    selection_reason: str  # smatch_max | tie_broken_by_rank | all_parses_failed_fallback

    @property
    def f1s(self):
        return tuple(0.0 if s is None else s.f1 for s in self.scores)


@dataclass(frozen=True)
class RescoreSummary:
    selection_change_rate: float
    mean_selected_f1: float


class ParserBackend(ABC):
    """Maps sentences back to graphs; one result (graph or None) per input."""

    @abstractmethod
    def parse_batch(self, sentences):
        """Return a list of graphs/None aligned with ``sentences``."""


class LookupParserBackend(ParserBackend):
    """Fixture backend: exact text lookup in a sentence-to-graph table."""

    def __init__(self, table):
        self.table = dict(table)

    def parse_batch(self, sentences):
        return [self.table.get(s) for s in sentences]


class FailingParserBackend(ParserBackend):
    """Fixture backend where every parse fails."""

    def parse_batch(self, sentences):
        return [None] * len(sentences)


class SubprocessParserBackend(ParserBackend):
    """Runs an external parser command.

    Without placeholders the command reads sentences (one per line) from
    stdin and writes PENMAN blocks separated by blank lines to stdout.  With
    ``{input}``/``{output}`` placeholders the sentences are written to a
    temporary file and the blocks read back from the output file.  The block
    count must equal the sentence count; blocks that fail to parse are
    per-sentence failures.
    """

    def __init__(self, command, timeout=120.0):
        self.command = command
        self.timeout = timeout

    def parse_batch(self, sentences):
        sentences = list(sentences)
        if not sentences:
            return []
        if "{input}" in self.command or "{output}" in self.command:
            text = self._run_file_pair(sentences)
        else:
            text = self._run_stdio(sentences)
        blocks = [b for b in (p.strip() for p in text.split("\n\n")) if b]
        if len(blocks) != len(sentences):
            raise BackendTransportError(
                f"parser returned {len(blocks)} blocks for {len(sentences)} sentences"
            )
        graphs = []
        for block in blocks:
            try:
                graphs.append(parse_penman(block))
            except PenmanSyntaxError:
                graphs.append(None)
        return graphs

    def _run_stdio(self, sentences):
        payload = "\n".join(sentences) + "\n"
        try:
            proc = subprocess.run(
                shlex.split(self.command),
                input=payload,
                capture_output=True,
                text=True,
                timeout=self.timeout,
            )
        except (OSError, subprocess.TimeoutExpired) as exc:
            raise BackendTransportError(f"parser command failed: {exc}") from exc
        if proc.returncode != 0:
            raise BackendTransportError(
                f"parser command exited with {proc.returncode}: {proc.stderr.strip()}"
            )
        return proc.stdout

    def _run_file_pair(self, sentences):
        with tempfile.TemporaryDirectory(prefix="amrgen-parse-") as tmp:
            inp = Path(tmp) / "sentences.txt"
            out = Path(tmp) / "parses.txt"
            inp.write_text("\n".join(sentences) + "\n", encoding="utf-8")
            cmd = [
                part.replace("{input}", str(inp)).replace("{output}", str(out))
                for part in shlex.split(self.command)
            ]
            try:
                proc = subprocess.run(
                    cmd, capture_output=True, text=True, timeout=self.timeout
                )
            except (OSError, subprocess.TimeoutExpired) as exc:
                raise BackendTransportError(f"parser command failed: {exc}") from exc
            if proc.returncode != 0:
                raise BackendTransportError(
                    f"parser command exited with {proc.returncode}: {proc.stderr.strip()}"
                )
            if not out.exists():
                raise BackendTransportError("parser wrote no output file")
            return out.read_text(encoding="utf-8")


def _parse_unique(texts, backend):
    """One backend call for the unique nonempty texts; empty texts fail."""
    unique = []
    seen = set()
    for text in texts:
        if text.strip() and text not in seen:
            seen.add(text)
            unique.append(text)
    parsed = backend.parse_batch(unique) if unique else []
    table = dict(zip(unique, parsed))
    return {text: table.get(text) for text in texts}


def _select(candidate_set, graphs, restarts, seed):
    scores = []
    for (text, _), graph in zip(candidate_set.candidates, graphs):
        if graph is None:
            scores.append(None)
        else:
            scores.append(
                smatch_hillclimb(candidate_set.gold, graph, restarts=restarts, seed=seed)
            )
    f1s = [0.0 if s is None else s.f1 for s in scores]
    if all(s is None for s in scores):
        return RescoreResult(tuple(scores), 0, "all_parses_failed_fallback")
    best = max(f1s)
    selected = f1s.index(best)  # ties fall to the lowest original index
    reason = "tie_broken_by_rank" if f1s.count(best) > 1 else "smatch_max"
    return RescoreResult(tuple(scores), selected, reason)


def rescore(candidate_set, backend, restarts=DEFAULT_RESTARTS, seed=0):
    """Re-rank one candidate set by Smatch against its gold graph."""
    texts = [text for text, _ in candidate_set.candidates]
    parsed = _parse_unique(texts, backend)
    graphs = [parsed[t] for t in texts]
    return _select(candidate_set, graphs, restarts, seed)


def rescore_corpus(sets, backend, restarts=DEFAULT_RESTARTS, seed=0):
    """Re-rank every set, batching all sentences into one backend call.

    Returns the per-set results plus a summary with the selection-change
    rate and the mean selected f1.
    """
    sets = list(sets)
    if not sets:
        raise ValueError("no candidate sets")
    all_texts = [text for cs in sets for text, _ in cs.candidates]
    parsed = _parse_unique(all_texts, backend)
    results = []
    for cs in sets:
        graphs = [parsed[text] for text, _ in cs.candidates]
        results.append(_select(cs, graphs, restarts, seed))
    changes = sum(1 for r in results if r.selected_index != 0)
    mean_f1 = sum(r.f1s[r.selected_index] for r in results) / len(results)
    summary = RescoreSummary(
        selection_change_rate=changes / len(results),
        mean_selected_f1=mean_f1,
    )
    return results, summary
