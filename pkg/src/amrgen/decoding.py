"""Sequence scoring and decoding over a pluggable next-token distribution.

A provider exposes a finite ordered vocabulary and a deterministic
conditional distribution over it given a context.  Scoring sums per-step log
probabilities; decoding supports greedy argmax, beam search, and nucleus
sampling.  All tie-breaks are (score descending, token ids lexicographic) so
results are bit-reproducible.
"""

import math
import random
from abc import ABC, abstractmethod
from dataclasses import dataclass, field


class DecodingError(Exception):
    pass


class VocabularyError(DecodingError):
    """A token is outside the provider vocabulary."""


class DistributionError(DecodingError):
    """A provider returned an invalid probability vector."""


_NORMALIZATION_TOL = 1e-9


class TokenDistributionProvider(ABC):
    """Conditional next-token distribution over a finite ordered vocabulary.

    ``next_distribution(context)`` returns probabilities aligned with
    ``vocabulary`` order; entries are nonnegative and sum to 1 within 1e-9,
    and the result is deterministic for a fixed context.  Token ids are
    vocabulary indices.  Providers must be safe for concurrent read-only
    queries.
    """

    @property
    @abstractmethod
    def vocabulary(self):
        """Ordered tuple of tokens."""

    @abstractmethod
    def next_distribution(self, context):
        """Probability vector aligned with :attr:`vocabulary`."""

    def token_index(self, token):
        try:
            return self._index[token]
        except AttributeError:
            self._index = {tok: i for i, tok in enumerate(self.vocabulary)}
            return self.token_index(token)

    def checked_distribution(self, context):
        dist = self.next_distribution(context)
        if len(dist) != len(self.vocabulary):
            raise DistributionError(
                f"distribution length {len(dist)} != vocabulary size {len(self.vocabulary)}"
            )
        total = math.fsum(dist)
        if any(p < 0.0 for p in dist) or abs(total - 1.0) > _NORMALIZATION_TOL:
            raise DistributionError(f"probabilities must be >= 0 and sum to 1, got {total!r}")
        return dist


@dataclass(frozen=True)
class DecodeConfig:
    """Decoding strategy and limits.

    ``strategy`` is one of ``greedy``, ``beam``, ``nucleus``.  ``beam_width``
    applies to beam search, ``nucleus_mass``/``seed`` to nucleus sampling.
    ``length_penalty`` (hook, default None) divides finished beam scores by
    ``len ** alpha`` for final ranking only; raw log-probability otherwise.
    """

    strategy: str
    max_length: int
    end_token: str
    beam_width: int = 1
    nucleus_mass: float = 1.0
    seed: int = 0
    length_penalty: float | None = None

    def __post_init__(self):
        if self.strategy not in ("greedy", "beam", "nucleus"):
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.max_length < 1:
            raise ValueError("max_length must be >= 1")
        if self.beam_width < 1:
            raise ValueError("beam_width must be >= 1")
        if not (0.0 < self.nucleus_mass <= 1.0):
            raise ValueError("nucleus_mass must be in (0, 1]")


@dataclass(frozen=True)
class Hypothesis:
    """Emitted tokens plus the sum of their log probabilities."""

    tokens: tuple
    log_score: float

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))


@dataclass(frozen=True)
class JointScore:
    """Log probability of a graph+text stream split into its two parts.

    ``total`` is summed over the whole assembled stream in one pass, so it
    matches the parts' sum only within float tolerance (1e-12 in tests).
    """

    amr_logprob: float
    text_logprob: float
    total: float


def _log(p):
    return math.log(p) if p > 0.0 else float("-inf")


def score_sequence(provider, context, continuation):
    """Sum of ``log p(continuation[j] | context + continuation[:j])``.

    Empty continuation scores 0.  Zero-probability steps give ``-inf``.
    """
    vocab = set(provider.vocabulary)
    for tok in list(context) + list(continuation):
        if tok not in vocab:
            raise VocabularyError(f"token {tok!r} not in provider vocabulary")
    ctx = list(context)
    logps = []
    for tok in continuation:
        dist = provider.checked_distribution(ctx)
        logps.append(_log(dist[provider.token_index(tok)]))
        ctx.append(tok)
    return math.fsum(logps)


def score_joint(provider, amr_tokens, text_tokens, sym, separator_side="amr"):
    """Joint log probability of the assembled stream.

    The graph side scores ``mapped amr tokens ++ [separator]`` from an empty
    context; the text side scores the text tokens conditioned on that
    context.  ``separator_side="text"`` books the separator term on the text
    side instead; the total is identical either way.
    """
    if separator_side not in ("amr", "text"):
        raise ValueError("separator_side must be 'amr' or 'text'")
    mapped = [sym.reserved.get(tok, tok) for tok in amr_tokens]
    if separator_side == "amr":
        amr_part = mapped + [sym.separator]
        amr_lp = score_sequence(provider, [], amr_part)
        text_lp = score_sequence(provider, amr_part, list(text_tokens))
    else:
        amr_lp = score_sequence(provider, [], mapped)
        text_lp = score_sequence(provider, mapped, [sym.separator] + list(text_tokens))
    total = score_sequence(provider, [], mapped + [sym.separator] + list(text_tokens))
    return JointScore(amr_logprob=amr_lp, text_logprob=text_lp, total=total)


def _argmax(dist):
    # ties resolved toward the lowest token id
    best = 0
    for i in range(1, len(dist)):
        if dist[i] > dist[best]:
            best = i
    return best


def decode_greedy(provider, context, cfg):
    """Emit the argmax token each step until end_token or max_length."""
    ctx = list(context)
    tokens = []
    score = 0.0
    for _ in range(cfg.max_length):
        dist = provider.checked_distribution(ctx)
        i = _argmax(dist)
        tok = provider.vocabulary[i]
        tokens.append(tok)
        score += _log(dist[i])
        ctx.append(tok)
        if tok == cfg.end_token:
            break
    return Hypothesis(tuple(tokens), score)


@dataclass(order=True)
class _Beam:
    neg_score: float
    ids: tuple
    tokens: tuple = field(compare=False)
    score: float = field(compare=False)


def decode_beam(provider, context, cfg):
    """Standard beam search; returns up to ``beam_width`` best hypotheses
    sorted best-first.

    Every live hypothesis expands by every positive-probability token; the
    top-k expansions survive, finished ones (end_token) move to the pool;
    the search stops once k are finished or max_length is reached, merging
    leftover live hypotheses into the ranking.  Zero-probability expansions
    are dropped: they score -inf and can never finish ahead of any
    positive-probability hypothesis.
    """
    k = cfg.beam_width
    ctx = list(context)
    live = [_Beam(-0.0, (), (), 0.0)]
    finished = []
    for _ in range(cfg.max_length):
        candidates = []
        for hyp in live:
            dist = provider.checked_distribution(ctx + list(hyp.tokens))
            for i, p in enumerate(dist):
                if p <= 0.0:
                    continue
                s = hyp.score + math.log(p)
                candidates.append(
                    _Beam(-s, hyp.ids + (i,), hyp.tokens + (provider.vocabulary[i],), s)
                )
        if not candidates:
            break
        candidates.sort()
        kept = candidates[:k]
        live = []
        for hyp in kept:
            if hyp.tokens[-1] == cfg.end_token:
                finished.append(hyp)
            else:
                live.append(hyp)
        if len(finished) >= k or not live:
            break
    pool = finished + live
    pool.sort(key=lambda h: (_ranking_score(h, cfg), h.ids))
    return [Hypothesis(h.tokens, h.score) for h in pool[:k]]


def _ranking_score(hyp, cfg):
    if cfg.length_penalty is not None and hyp.tokens:
        return -(hyp.score / len(hyp.tokens) ** cfg.length_penalty)
    return -hyp.score


def nucleus_support(dist, mass):
    """Token indices of the smallest probability-sorted set whose cumulative
    mass reaches ``mass`` (the crossing token is included)."""
    order = sorted(range(len(dist)), key=lambda i: (-dist[i], i))
    support = []
    cum = 0.0
    for i in order:
        support.append(i)
        cum += dist[i]
        if cum >= mass:
            break
    return support


def decode_nucleus(provider, context, cfg):
    """Sample each step from the renormalized nucleus; deterministic given
    ``cfg.seed``."""
    rng = random.Random(cfg.seed)
    ctx = list(context)
    tokens = []
    score = 0.0
    for _ in range(cfg.max_length):
        dist = provider.checked_distribution(ctx)
        support = nucleus_support(dist, cfg.nucleus_mass)
        total = math.fsum(dist[i] for i in support)
        u = rng.random() * total
        acc = 0.0
        chosen = support[-1]
        for i in support:
            acc += dist[i]
            if u < acc:
                chosen = i
                break
        tok = provider.vocabulary[chosen]
        tokens.append(tok)
        score += _log(dist[chosen])
        ctx.append(tok)
        if tok == cfg.end_token:
            break
    return Hypothesis(tuple(tokens), score)


def decode(provider, context, cfg):
    """Dispatch on ``cfg.strategy``; beam returns a list, others a single
    best wrapped in a one-element list."""
    if cfg.strategy == "greedy":
        return [decode_greedy(provider, context, cfg)]
    if cfg.strategy == "beam":
        return decode_beam(provider, context, cfg)
    return [decode_nucleus(provider, context, cfg)]


def strip_trailing_repetition(tokens, max_block=8):
    """Collapse trailing runs of repeated n-gram blocks (n up to
    ``max_block``, longest first) down to a single copy.  Idempotent and
    never lengthens the sequence."""
    out = list(tokens)
    changed = True
    while changed:
        changed = False
        for n in range(min(max_block, len(out) // 2), 0, -1):
            while len(out) >= 2 * n and out[-n:] == out[-2 * n : -n]:
                del out[-n:]
                changed = True
            if changed:
                break  # rescan longest-first on the shortened tail
    return tuple(out)
