"""Smatch: semantic F1 between two AMR graphs.

Both graphs decompose into triples (instances, relations with ``-of``
inversions canonicalized, attributes, plus one synthetic root marker); the
score maximizes matched triples over one-to-one variable mappings.  The
search is hill-climbing with restarts; an exact brute-force oracle over all
injective mappings is provided for small graphs.
"""

import itertools
import random
from collections import Counter
from dataclasses import dataclass

from .graph import canonicalize_role

ROOT_MARKER_ROLE = "<TOP>"
ROOT_MARKER_VALUE = "<root>"

DEFAULT_RESTARTS = 4
BRUTEFORCE_MAX_VARS = 8


class BruteForceSizeError(Exception):
    """Graphs too large for exact enumeration."""


@dataclass(frozen=True)
class TripleSet:
    """Deterministic triple decomposition of one graph."""

    instances: tuple  # (var, concept)
    relations: tuple  # (role, source, target), -of canonicalized
    attributes: tuple  # (role, var, constant), includes the root marker
    variables: tuple

    def __len__(self):
        return len(self.instances) + len(self.relations) + len(self.attributes)


def extract_triples(g):
    """Decompose ``g`` into Smatch triples.

    One instance triple per variable; ``x :R-of y`` relations are emitted as
    ``(R, y, x)``; attributes keep their role verbatim; one synthetic root
    marker attribute is added so rootedness affects the score.
    """
    instances = tuple(g.instances)
    relations = tuple(
        canonicalize_role(role, src, tgt) for src, role, tgt in g.relations
    )
    attributes = tuple((role, src, const) for src, role, const in g.attributes)
    attributes += ((ROOT_MARKER_ROLE, g.root, ROOT_MARKER_VALUE),)
    variables = tuple(sorted({var for var, _ in instances}))
    return TripleSet(instances, relations, attributes, variables)


def matched_count(gold, pred, mapping):
    """Number of gold triples whose image under ``mapping`` occurs in pred.

    ``mapping`` is a partial injective dict from gold to pred variables.
    Duplicate triples count with multiplicity.
    """
    pred_instances = Counter(pred.instances)
    pred_relations = Counter(pred.relations)
    pred_attributes = Counter(pred.attributes)
    matched = 0
    gold_instances = Counter(
        (mapping[var], concept)
        for var, concept in gold.instances
        if var in mapping
    )
    matched += sum((gold_instances & pred_instances).values())
    gold_relations = Counter(
        (role, mapping[s], mapping[t])
        for role, s, t in gold.relations
        if s in mapping and t in mapping
    )
    matched += sum((gold_relations & pred_relations).values())
    gold_attributes = Counter(
        (role, mapping[var], const)
        for role, var, const in gold.attributes
        if var in mapping
    )
    matched += sum((gold_attributes & pred_attributes).values())
    return matched


@dataclass(frozen=True)
class SmatchScore:
    matched: int
    gold_total: int
    pred_total: int
    best_mapping: tuple  # sorted (gold_var, pred_var) pairs

    @property
    def precision(self):
        return self.matched / self.pred_total if self.pred_total else 0.0

    @property
    def recall(self):
        return self.matched / self.gold_total if self.gold_total else 0.0

    @property
    def f1(self):
        p, r = self.precision, self.recall
        return 2.0 * p * r / (p + r) if p + r else 0.0


def _score(gold, pred, matched, mapping):
    return SmatchScore(
        matched=matched,
        gold_total=len(gold),
        pred_total=len(pred),
        best_mapping=tuple(sorted(mapping.items())),
    )


def _greedy_init(gold, pred, rng):
    concept_of = dict(gold.instances)
    pred_by_concept = {}
    for var, concept in sorted(pred.instances):
        pred_by_concept.setdefault(concept, []).append(var)
    mapping = {}
    used = set()
    for gv in gold.variables:
        for pv in pred_by_concept.get(concept_of[gv], ()):
            if pv not in used:
                mapping[gv] = pv
                used.add(pv)
                break
    _fill_random(mapping, used, gold, pred, rng)
    return mapping


def _random_init(gold, pred, rng):
    mapping = {}
    _fill_random(mapping, set(), gold, pred, rng)
    return mapping


def _fill_random(mapping, used, gold, pred, rng):
    free = [pv for pv in pred.variables if pv not in used]
    rng.shuffle(free)
    for gv in gold.variables:
        if gv in mapping:
            continue
        if not free:
            break
        mapping[gv] = free.pop()


def _climb(gold, pred, mapping):
    current = matched_count(gold, pred, mapping)
    pred_vars = pred.variables
    while True:
        best_gain = 0
        best_apply = None
        image = set(mapping.values())
        # remap one gold variable to a free predicted variable
        for gv in gold.variables:
            old = mapping.get(gv)
            for pv in pred_vars:
                if pv in image:
                    continue
                mapping[gv] = pv
                gain = matched_count(gold, pred, mapping) - current
                if old is None:
                    del mapping[gv]
                else:
                    mapping[gv] = old
                if gain > best_gain:
                    best_gain = gain
                    best_apply = ("set", gv, pv)
        # swap the images of two mapped gold variables
        mapped = [gv for gv in gold.variables if gv in mapping]
        for a, b in itertools.combinations(mapped, 2):
            mapping[a], mapping[b] = mapping[b], mapping[a]
            gain = matched_count(gold, pred, mapping) - current
            mapping[a], mapping[b] = mapping[b], mapping[a]
            if gain > best_gain:
                best_gain = gain
                best_apply = ("swap", a, b)
        # move a mapped image onto an unmapped gold variable
        unmapped = [gv for gv in gold.variables if gv not in mapping]
        for gv in unmapped:
            for other in mapped:
                pv = mapping.pop(other)
                mapping[gv] = pv
                gain = matched_count(gold, pred, mapping) - current
                del mapping[gv]
                mapping[other] = pv
                if gain > best_gain:
                    best_gain = gain
                    best_apply = ("move", other, gv)
        if best_apply is None:
            return current, mapping
        kind, x, y = best_apply
        if kind == "set":
            mapping[x] = y
        elif kind == "swap":
            mapping[x], mapping[y] = mapping[y], mapping[x]
        else:
            mapping[y] = mapping.pop(x)
        current += best_gain


def smatch_hillclimb(gold_graph, pred_graph, restarts=DEFAULT_RESTARTS, seed=0):
    """Hill-climbing Smatch with restarts.

    The first restart seeds from greedy concept matching, the rest from
    random injective mappings; each climb applies the best single move
    (remap, swap, or move) while the matched count improves.  The best
    restart wins, ties broken toward the lexicographically smaller mapping.
    Deterministic given ``seed``.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    gold = extract_triples(gold_graph)
    pred = extract_triples(pred_graph)
    rng = random.Random(seed)
    best = None
    for r in range(restarts):
        init = _greedy_init(gold, pred, rng) if r == 0 else _random_init(gold, pred, rng)
        count, mapping = _climb(gold, pred, init)
        key = (-count, tuple(sorted(mapping.items())))
        if best is None or key < best[0]:
            best = (key, count, dict(mapping))
    _, count, mapping = best
    return _score(gold, pred, count, mapping)


def smatch_bruteforce(gold_graph, pred_graph):
    """Exact Smatch by enumerating every injective variable mapping.

    Guarded: the smaller variable set must have at most
    ``BRUTEFORCE_MAX_VARS`` members.
    """
    gold = extract_triples(gold_graph)
    pred = extract_triples(pred_graph)
    if min(len(gold.variables), len(pred.variables)) > BRUTEFORCE_MAX_VARS:
        raise BruteForceSizeError(
            f"brute force limited to {BRUTEFORCE_MAX_VARS} variables on the smaller side"
        )
    gold_smaller = len(gold.variables) <= len(pred.variables)
    small = gold.variables if gold_smaller else pred.variables
    large = pred.variables if gold_smaller else gold.variables
    best_count = -1
    best_mapping = {}
    for image in itertools.permutations(large, len(small)):
        if gold_smaller:
            mapping = dict(zip(small, image))
        else:
            mapping = dict(zip(image, small))
        count = matched_count(gold, pred, mapping)
        if count > best_count or (
            count == best_count and sorted(mapping.items()) < sorted(best_mapping.items())
        ):
            best_count = count
            best_mapping = mapping
    return _score(gold, pred, best_count, best_mapping)


def micro_average(scores):
    """Corpus-level P/R/F1 from summed matched and total counts."""
    matched = sum(s.matched for s in scores)
    gold_total = sum(s.gold_total for s in scores)
    pred_total = sum(s.pred_total for s in scores)
    return SmatchScore(matched, gold_total, pred_total, best_mapping=())
