"""Graph-to-token-sequence conversion and joint stream assembly.

Three representations are supported: concept nodes only, a depth-first
traversal with edge labels, and the full PENMAN text split into tokens.
A linearized graph plus a separator plus (optionally) text tokens form the
joint stream consumed by sequence scorers and decoders.
"""

import enum
import re
from dataclasses import dataclass

from .graph import AmrError, serialize_penman


class Representation(str, enum.Enum):
    NODES = "nodes"
    DFS = "dfs"
    PENMAN = "penman"


_SENSE_RE = re.compile(r"-\d\d$")

DEFAULT_SEPARATOR = "<sep>"
ROOT_LABEL = ":root"


class SeparatorCollisionError(AmrError):
    """The separator token also occurs as an ordinary stream token."""


@dataclass(frozen=True)
class LinearizedAmr:
    tokens: tuple
    representation: Representation

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        if not self.tokens:
            raise ValueError("linearization must be nonempty")


@dataclass(frozen=True)
class SpecialSymbolMap:
    """Separator plus an injective map from special surface forms to
    reserved token ids (edge labels and the root marker)."""

    separator: str
    reserved: dict

    def __post_init__(self):
        if len(set(self.reserved.values())) != len(self.reserved):
            raise ValueError("reserved map must be injective")


def strip_sense_suffix(concept):
    """Drop a trailing two-digit sense suffix: ``advocate-01`` -> ``advocate``."""
    return _SENSE_RE.sub("", concept)


def _dfs_tokens(g, strip_sense):
    concepts = g.var_to_concept()

    def label(var):
        c = concepts[var]
        return strip_sense_suffix(c) if strip_sense else c

    tokens = []
    visited = set()

    def walk(var):
        visited.add(var)
        tokens.append(("concept", label(var)))
        for role, target, is_attr in g.edges_from(var):
            tokens.append(("edge", role))
            if is_attr:
                tokens.append(("concept", target))
            elif target in visited:
                # re-entrancy: repeat the concept label, do not descend
                tokens.append(("concept", label(target)))
            else:
                walk(target)

    walk(g.root)
    return tokens


def _penman_tokens(g):
    text = serialize_penman(g)
    tokens = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch in "()":
            tokens.append(ch)
            i += 1
        elif ch == '"':
            # quoted constants stay one token so re-joining re-parses
            j = text.index('"', i + 1)
            tokens.append(text[i : j + 1])
            i = j + 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in "()":
                j += 1
            tokens.append(text[i:j])
            i = j
    return tokens


def linearize(g, representation, strip_sense=False):
    """Convert a graph into a token sequence.

    ``nodes``: concept labels (and constant leaves) in DFS visit order, no
    edge tokens.  ``dfs``: alternating edge-label and concept tokens along
    the traversal.  ``penman``: the serialized text split into tokens with
    standalone parentheses.  Re-entrant targets re-emit the concept label in
    the first two representations; variables appear only in ``penman``.
    ``strip_sense`` drops two-digit sense suffixes in ``nodes``/``dfs``.
    """
    representation = Representation(representation)
    if representation is Representation.PENMAN:
        return LinearizedAmr(tuple(_penman_tokens(g)), representation)
    tagged = _dfs_tokens(g, strip_sense)
    if representation is Representation.DFS:
        tokens = [tok for _, tok in tagged]
    else:
        tokens = [tok for kind, tok in tagged if kind == "concept"]
    return LinearizedAmr(tuple(tokens), representation)


def extract_arc_vocabulary(corpus, separator=DEFAULT_SEPARATOR):
    """Collect every relation/attribute label across ``corpus`` plus the
    root marker into a :class:`SpecialSymbolMap` with deterministic ids.

    Labels are sorted and assigned reserved ids ``<amr:0>``, ``<amr:1>``, ...
    """
    if not corpus:
        raise ValueError("corpus must be nonempty")
    labels = {ROOT_LABEL}
    for g in corpus:
        labels.update(role for _, role, _ in g.relations)
        labels.update(role for _, role, _ in g.attributes)
    reserved = {label: f"<amr:{i}>" for i, label in enumerate(sorted(labels))}
    return SpecialSymbolMap(separator=separator, reserved=reserved)


def assemble_joint(amr, text_tokens, sym):
    """Build ``amr tokens ++ [separator] ++ text tokens`` with every special
    surface form replaced by its reserved id.

    ``text_tokens`` may be empty (decoding context).  Raises if the
    separator collides with an ordinary token.
    """
    mapped = [sym.reserved.get(tok, tok) for tok in amr.tokens]
    for tok in mapped:
        if tok == sym.separator:
            raise SeparatorCollisionError(
                f"separator {sym.separator!r} occurs in the linearized graph"
            )
    for tok in text_tokens:
        if tok == sym.separator:
            raise SeparatorCollisionError(
                f"separator {sym.separator!r} occurs in the text tokens"
            )
    return tuple(mapped) + (sym.separator,) + tuple(text_tokens)
