"""Concrete next-token distribution providers.

These stand in for the fine-tuned language model the toolkit is built
around: a table provider driven by a small text file of context-suffix
rules, a toy n-gram model trained from plain text, a memorizing provider
that replays known continuations for known contexts, and a uniform provider
for closed-form checks.
"""

import math
from collections import Counter

from .decoding import TokenDistributionProvider

END_TOKEN = "</s>"


class UniformProvider(TokenDistributionProvider):
    """Uniform distribution over a fixed vocabulary, any context."""

    def __init__(self, vocabulary):
        self._vocab = tuple(vocabulary)
        if not self._vocab:
            raise ValueError("vocabulary must be nonempty")

    @property
    def vocabulary(self):
        return self._vocab

    def next_distribution(self, context):
        p = 1.0 / len(self._vocab)
        return [p] * len(self._vocab)


class TableProvider(TokenDistributionProvider):
    """Distribution looked up from context-suffix rules.

    ``rules`` maps a context-suffix token tuple to a probability vector
    aligned with the vocabulary; the empty tuple is the default rule and is
    required.  The longest suffix of the context with a rule wins.

    File format (one rule per line, ``#`` comments)::

        vocab: a b </s>
        * -> 0.5 0.3 0.2
        a -> 0.1 0.1 0.8
        b a -> 0.2 0.2 0.6

    ``*`` denotes the empty (default) pattern.
    """

    def __init__(self, vocabulary, rules):
        self._vocab = tuple(vocabulary)
        self._rules = {tuple(k): tuple(v) for k, v in rules.items()}
        if () not in self._rules:
            raise ValueError("a default rule (empty pattern / '*') is required")
        size = len(self._vocab)
        for pattern, probs in self._rules.items():
            if len(probs) != size:
                raise ValueError(f"rule {pattern!r} has {len(probs)} probabilities, expected {size}")
            if any(p < 0.0 for p in probs) or abs(math.fsum(probs) - 1.0) > 1e-9:
                raise ValueError(f"rule {pattern!r} probabilities must be >= 0 and sum to 1")
        self._max_pattern = max(len(p) for p in self._rules)

    @property
    def vocabulary(self):
        return self._vocab

    def next_distribution(self, context):
        ctx = tuple(context)
        for n in range(min(self._max_pattern, len(ctx)), -1, -1):
            rule = self._rules.get(ctx[len(ctx) - n :])
            if rule is not None:
                return list(rule)
        return list(self._rules[()])

    @classmethod
    def from_file(cls, path):
        vocab = None
        rules = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if line.startswith("vocab:"):
                    vocab = tuple(line[len("vocab:") :].split())
                    continue
                if "->" not in line:
                    raise ValueError(f"{path}:{lineno}: expected 'pattern -> probs'")
                left, right = line.split("->", 1)
                pattern = tuple(left.split())
                if pattern == ("*",):
                    pattern = ()
                probs = tuple(float(x) for x in right.split())
                if pattern in rules:
                    raise ValueError(f"{path}:{lineno}: duplicate pattern {pattern!r}")
                rules[pattern] = probs
        if vocab is None:
            raise ValueError(f"{path}: missing 'vocab:' line")
        return cls(vocab, rules)


class NgramProvider(TokenDistributionProvider):
    """Add-alpha smoothed n-gram model trained from whitespace-split lines.

    Each training line is a sequence ended by ``end_token``.  Contexts are
    truncated to the last ``order - 1`` tokens; unseen histories fall back
    to the uniform smoothing mass.
    """

    def __init__(self, lines, order=2, alpha=0.1, end_token=END_TOKEN):
        if order < 1:
            raise ValueError("order must be >= 1")
        if alpha <= 0.0:
            raise ValueError("alpha must be positive")
        self.order = order
        self.alpha = alpha
        self.end_token = end_token
        tokens = set()
        self._counts = {}
        sequences = []
        for line in lines:
            seq = line.split()
            if not seq:
                continue
            tokens.update(seq)
            sequences.append(seq + [end_token])
        if not sequences:
            raise ValueError("no training sequences")
        self._vocab = tuple(sorted(tokens)) + (end_token,)
        for seq in sequences:
            for j, tok in enumerate(seq):
                history = tuple(seq[max(0, j - (order - 1)) : j])
                self._counts.setdefault(history, Counter())[tok] += 1

    @property
    def vocabulary(self):
        return self._vocab

    def next_distribution(self, context):
        history = tuple(context[max(0, len(context) - (self.order - 1)) :])
        counts = self._counts.get(history, Counter())
        denom = sum(counts.values()) + self.alpha * len(self._vocab)
        return [(counts.get(tok, 0) + self.alpha) / denom for tok in self._vocab]

    @classmethod
    def from_text_file(cls, path, order=2, alpha=0.1, end_token=END_TOKEN):
        with open(path, encoding="utf-8") as fh:
            return cls(fh.readlines(), order=order, alpha=alpha, end_token=end_token)


class MemorizingProvider(TokenDistributionProvider):
    """Replays stored continuations once the context matches a known prefix.

    ``entries`` maps a context token tuple to a list of ``(weight,
    continuation_tokens)`` alternatives.  While the context extends a known
    key, probability mass is split across the alternatives still consistent
    with it (renormalized by weight); each alternative is followed by
    ``end_token``.  Unknown contexts get a uniform distribution.
    """

    def __init__(self, entries, end_token=END_TOKEN, extra_tokens=()):
        self.end_token = end_token
        self._entries = {}
        tokens = set(extra_tokens)
        tokens.add(end_token)
        for ctx, alts in entries.items():
            key = tuple(ctx)
            tokens.update(key)
            stored = []
            for weight, cont in alts:
                if weight <= 0.0:
                    raise ValueError("alternative weights must be positive")
                cont = tuple(cont)
                tokens.update(cont)
                stored.append((float(weight), cont))
            self._entries[key] = stored
        self._vocab = tuple(sorted(tokens))

    @property
    def vocabulary(self):
        return self._vocab

    @classmethod
    def memorize(cls, pairs, end_token=END_TOKEN, extra_tokens=()):
        """Build from ``(context, continuation)`` pairs with weight 1."""
        entries = {}
        for ctx, cont in pairs:
            entries.setdefault(tuple(ctx), []).append((1.0, tuple(cont)))
        return cls(entries, end_token=end_token, extra_tokens=extra_tokens)

    def _match(self, context):
        ctx = tuple(context)
        for n in range(len(ctx), -1, -1):
            key = ctx[:n]
            if key in self._entries:
                return key, ctx[n:]
        return None, None

    def next_distribution(self, context):
        key, consumed = self._match(context)
        size = len(self._vocab)
        if key is None:
            return [1.0 / size] * size
        j = len(consumed)
        weights = Counter()
        for weight, cont in self._entries[key]:
            if cont[:j] == consumed:
                nxt = cont[j] if j < len(cont) else self.end_token
                weights[nxt] += weight
        if not weights:
            # context wandered off every alternative; close the sequence
            weights[self.end_token] = 1.0
        total = sum(weights.values())
        return [weights.get(tok, 0.0) / total for tok in self._vocab]
