"""Corpus BLEU and chrF++ plus the output normalization applied before
comparison.

Both metrics accumulate micro counts across the corpus and report on a
0-100 scale.  BLEU is the geometric mean of clipped n-gram precisions
(n=1..4) times a brevity penalty; orders with no hypothesis n-grams are
excluded from the mean, and zero-match orders get the exponential floor
1/(2^k * total_n) unless strict zeros are requested.  chrF++ averages
F-beta (beta=2) over character orders 1..6 (whitespace excluded) and word
orders 1..2; orders empty on both sides are excluded so identical pairs
score exactly 100.
"""

import math
from collections import Counter
from dataclasses import dataclass

BLEU_MAX_ORDER = 4
CHRF_CHAR_ORDER = 6
CHRF_WORD_ORDER = 2
CHRF_BETA = 2.0

_PUNCTUATION = set('.,!?;:"()')


@dataclass(frozen=True)
class SentencePair:
    hypothesis: tuple
    reference: tuple

    def __post_init__(self):
        object.__setattr__(self, "hypothesis", tuple(self.hypothesis))
        object.__setattr__(self, "reference", tuple(self.reference))
        for tok in self.hypothesis + self.reference:
            if not isinstance(tok, str) or not tok:
                raise ValueError("tokens must be nonempty strings")


@dataclass(frozen=True)
class MetricScore:
    value: float  # 0..100
    components: tuple  # per-order precisions (BLEU) or F-scores (chrF++)
    brevity_penalty: float | None = None


def normalize_output(text):
    """Lowercase, split on whitespace, and detach leading/trailing
    punctuation characters as separate tokens."""
    tokens = []
    for word in text.lower().split():
        leading = []
        while word and word[0] in _PUNCTUATION:
            leading.append(word[0])
            word = word[1:]
        trailing = []
        while word and word[-1] in _PUNCTUATION:
            trailing.append(word[-1])
            word = word[:-1]
        tokens.extend(leading)
        if word:
            tokens.append(word)
        tokens.extend(reversed(trailing))
    return tokens


def _ngram_counts(items, n):
    return Counter(tuple(items[i : i + n]) for i in range(len(items) - n + 1))


def corpus_bleu(pairs, smoothing="floor"):
    """Corpus BLEU over hypothesis/reference token pairs.

    ``smoothing="floor"`` applies the exponential floor to zero-match
    orders; ``"none"`` scores them as hard zeros.
    """
    if not pairs:
        raise ValueError("pairs must be nonempty")
    if smoothing not in ("floor", "none"):
        raise ValueError(f"unknown smoothing {smoothing!r}")
    matched = [0] * BLEU_MAX_ORDER
    totals = [0] * BLEU_MAX_ORDER
    hyp_len = 0
    ref_len = 0
    for pair in pairs:
        hyp_len += len(pair.hypothesis)
        ref_len += len(pair.reference)
        for n in range(1, BLEU_MAX_ORDER + 1):
            hyp_counts = _ngram_counts(pair.hypothesis, n)
            ref_counts = _ngram_counts(pair.reference, n)
            totals[n - 1] += sum(hyp_counts.values())
            matched[n - 1] += sum((hyp_counts & ref_counts).values())

    precisions = []
    floor_scale = 1.0
    for n in range(BLEU_MAX_ORDER):
        if totals[n] == 0:
            precisions.append(None)  # order unavailable; excluded from mean
        elif matched[n] == 0:
            if smoothing == "floor":
                floor_scale *= 2.0
                precisions.append(1.0 / (floor_scale * totals[n]))
            else:
                precisions.append(0.0)
        else:
            precisions.append(matched[n] / totals[n])

    if hyp_len == 0:
        bp = 0.0
    else:
        bp = math.exp(min(0.0, 1.0 - ref_len / hyp_len))
    effective = [p for p in precisions if p is not None]
    if not effective or any(p == 0.0 for p in effective):
        value = 0.0
    else:
        log_mean = math.fsum(math.log(p) for p in effective) / len(effective)
        value = 100.0 * bp * math.exp(log_mean)
    return MetricScore(value=value, components=tuple(precisions), brevity_penalty=bp)


def _f_beta(precision, recall, beta):
    b2 = beta * beta
    denom = b2 * precision + recall
    return (1.0 + b2) * precision * recall / denom if denom else 0.0


def chrf_pp(pairs, beta=CHRF_BETA):
    """chrF++ over hypothesis/reference token pairs.

    Character n-grams are taken over the tokens joined without whitespace;
    word n-grams over the token lists as given.  Counts are summed per
    order across the corpus, and the score is the mean F-beta over orders
    present on at least one side.
    """
    if not pairs:
        raise ValueError("pairs must be nonempty")
    orders = []
    for n in range(1, CHRF_CHAR_ORDER + 1):
        orders.append(("char", n))
    for n in range(1, CHRF_WORD_ORDER + 1):
        orders.append(("word", n))
    matched = {o: 0 for o in orders}
    totals_hyp = {o: 0 for o in orders}
    totals_ref = {o: 0 for o in orders}
    for pair in pairs:
        hyp_chars = "".join(pair.hypothesis)
        ref_chars = "".join(pair.reference)
        for kind, n in orders:
            if kind == "char":
                h = _ngram_counts(hyp_chars, n)
                r = _ngram_counts(ref_chars, n)
            else:
                h = _ngram_counts(pair.hypothesis, n)
                r = _ngram_counts(pair.reference, n)
            key = (kind, n)
            totals_hyp[key] += sum(h.values())
            totals_ref[key] += sum(r.values())
            matched[key] += sum((h & r).values())

    f_scores = []
    included = []
    for key in orders:
        if totals_hyp[key] == 0 and totals_ref[key] == 0:
            f_scores.append(None)
            continue
        p = matched[key] / totals_hyp[key] if totals_hyp[key] else 0.0
        r = matched[key] / totals_ref[key] if totals_ref[key] else 0.0
        f = _f_beta(p, r, beta)
        f_scores.append(f)
        included.append(f)
    value = 100.0 * math.fsum(included) / len(included) if included else 0.0
    return MetricScore(value=value, components=tuple(f_scores), brevity_penalty=None)


def pairs_from_texts(hypotheses, references):
    """Normalize raw text pairs into :class:`SentencePair` objects."""
    if len(hypotheses) != len(references):
        raise ValueError("hypothesis and reference counts differ")
    return [
        SentencePair(normalize_output(h), normalize_output(r))
        for h, r in zip(hypotheses, references)
    ]
