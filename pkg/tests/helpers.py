"""Independent oracles and fixture generators for the test suite.

Everything here deliberately avoids the library's own code paths: decoding
is checked against exhaustive enumeration, metrics against naive counting
loops, Smatch against the library's brute-force searcher (which is itself
plain enumeration).
"""

import math
import random

from amrgen import AmrGraph, TableProvider


# ---------------------------------------------------------------------------
# exhaustive decoding oracle


def exhaustive_argmax(provider, context, max_length, end_token):
    """Best complete sequence by full enumeration.

    Complete = ends with ``end_token`` or has ``max_length`` tokens.  Scores
    accumulate step by step exactly like the decoder so ranking ties match
    bit for bit; ties break toward lexicographically smaller token ids.
    """
    best = None  # (score, ids, tokens)

    def walk(prefix_ids, prefix_tokens, score):
        nonlocal best
        done = len(prefix_tokens) == max_length or (
            prefix_tokens and prefix_tokens[-1] == end_token
        )
        if done:
            key = (-score, prefix_ids)
            if best is None or key < best[0]:
                best = (key, score, prefix_ids, prefix_tokens)
            return
        dist = provider.checked_distribution(list(context) + list(prefix_tokens))
        for i, p in enumerate(dist):
            if p <= 0.0:
                continue
            walk(prefix_ids + (i,), prefix_tokens + (provider.vocabulary[i],), score + math.log(p))

    walk((), (), 0.0)
    assert best is not None
    return best[3], best[1]


def random_table_provider(rng, vocab_size=4, n_rules=6, end_token="</s>"):
    """Random context-suffix table over ``vocab_size`` tokens (last = end)."""
    vocab = tuple(f"t{i}" for i in range(vocab_size - 1)) + (end_token,)

    def random_probs():
        weights = [rng.random() + 0.05 for _ in vocab]
        total = sum(weights)
        return tuple(w / total for w in weights)

    rules = {(): random_probs()}
    for _ in range(n_rules):
        n = rng.randint(1, 2)
        pattern = tuple(rng.choice(vocab) for _ in range(n))
        rules[pattern] = random_probs()
    return TableProvider(vocab, rules)


# ---------------------------------------------------------------------------
# naive metric oracles (plain loops, no Counter)


def _ngrams(seq, n):
    return [tuple(seq[i : i + n]) for i in range(len(seq) - n + 1)]


def _clipped_matches(hyp_ngrams, ref_ngrams):
    matched = 0
    for gram in sorted(set(hyp_ngrams)):
        matched += min(hyp_ngrams.count(gram), ref_ngrams.count(gram))
    return matched


def naive_bleu(pairs, smoothing="floor"):
    """Corpus BLEU by direct counting; pairs are (hyp_tokens, ref_tokens)."""
    matched = [0] * 4
    totals = [0] * 4
    hyp_len = 0
    ref_len = 0
    for hyp, ref in pairs:
        hyp = list(hyp)
        ref = list(ref)
        hyp_len += len(hyp)
        ref_len += len(ref)
        for n in range(1, 5):
            hg = _ngrams(hyp, n)
            rg = _ngrams(ref, n)
            totals[n - 1] += len(hg)
            matched[n - 1] += _clipped_matches(hg, rg)
    precisions = []
    scale = 1.0
    for n in range(4):
        if totals[n] == 0:
            continue
        if matched[n] == 0:
            if smoothing == "floor":
                scale *= 2.0
                precisions.append(1.0 / (scale * totals[n]))
            else:
                precisions.append(0.0)
        else:
            precisions.append(matched[n] / totals[n])
    if hyp_len == 0 or not precisions or 0.0 in precisions:
        return 0.0
    bp = math.exp(min(0.0, 1.0 - ref_len / hyp_len))
    return 100.0 * bp * math.exp(sum(math.log(p) for p in precisions) / len(precisions))


def naive_chrf_pp(pairs, beta=2.0):
    """chrF++ by direct counting; pairs are (hyp_tokens, ref_tokens)."""
    orders = [("char", n) for n in range(1, 7)] + [("word", n) for n in (1, 2)]
    matched = dict.fromkeys(orders, 0)
    th = dict.fromkeys(orders, 0)
    tr = dict.fromkeys(orders, 0)
    for hyp, ref in pairs:
        hyp = list(hyp)
        ref = list(ref)
        hc = list("".join(hyp))
        rc = list("".join(ref))
        for kind, n in orders:
            hg = _ngrams(hc if kind == "char" else hyp, n)
            rg = _ngrams(rc if kind == "char" else ref, n)
            th[(kind, n)] += len(hg)
            tr[(kind, n)] += len(rg)
            matched[(kind, n)] += _clipped_matches(hg, rg)
    f_scores = []
    for key in orders:
        if th[key] == 0 and tr[key] == 0:
            continue
        p = matched[key] / th[key] if th[key] else 0.0
        r = matched[key] / tr[key] if tr[key] else 0.0
        denom = beta * beta * p + r
        f_scores.append((1 + beta * beta) * p * r / denom if denom else 0.0)
    return 100.0 * sum(f_scores) / len(f_scores) if f_scores else 0.0


# ---------------------------------------------------------------------------
# random graphs for Smatch checks

_CONCEPTS = ["cat", "dog", "run-01", "see-01", "house", "tree", "give-01", "small"]
_ROLES = [":ARG0", ":ARG1", ":ARG2", ":mod", ":location", ":ARG0-of", ":ARG1-of"]
_CONSTANTS = ["-", "+", "1", "2", '"x"']


def random_graph(rng, max_vars=6):
    n = rng.randint(1, max_vars)
    variables = [f"v{i}" for i in range(n)]
    instances = [(v, rng.choice(_CONCEPTS)) for v in variables]
    relations = []
    for i in range(1, n):
        parent = variables[rng.randrange(i)]
        relations.append((parent, rng.choice(_ROLES), variables[i]))
    for _ in range(rng.randint(0, 2)):
        if n >= 2:
            src, tgt = rng.sample(variables, 2)
            relations.append((src, rng.choice(_ROLES), tgt))
    attributes = []
    for _ in range(rng.randint(0, 2)):
        attributes.append(
            (rng.choice(variables), rng.choice([":polarity", ":quant", ":value"]), rng.choice(_CONSTANTS))
        )
    return AmrGraph(
        root=variables[0],
        instances=tuple(instances),
        relations=tuple(relations),
        attributes=tuple(attributes),
    )


def mutate_graph(rng, g):
    """A nearby graph: tweak a concept, role, or attribute."""
    instances = list(g.instances)
    relations = list(g.relations)
    attributes = list(g.attributes)
    choice = rng.randrange(3)
    if choice == 0 and instances:
        i = rng.randrange(len(instances))
        var, _ = instances[i]
        instances[i] = (var, rng.choice(_CONCEPTS))
    elif choice == 1 and relations:
        i = rng.randrange(len(relations))
        src, _, tgt = relations[i]
        relations[i] = (src, rng.choice(_ROLES), tgt)
    elif attributes:
        i = rng.randrange(len(attributes))
        src, role, _ = attributes[i]
        attributes[i] = (src, role, rng.choice(_CONSTANTS))
    return AmrGraph(g.root, tuple(instances), tuple(relations), tuple(attributes))


def alpha_rename(g, prefix="x"):
    mapping = {var: f"{prefix}{i}" for i, (var, _) in enumerate(g.instances)}
    return AmrGraph(
        root=mapping[g.root],
        instances=tuple((mapping[v], c) for v, c in g.instances),
        relations=tuple((mapping[s], r, mapping[t]) for s, r, t in g.relations),
        attributes=tuple((mapping[s], r, c) for s, r, c in g.attributes),
    )
