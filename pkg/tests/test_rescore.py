import random
import sys

import pytest

from amrgen import (
    BackendTransportError,
    CandidateSet,
    FailingParserBackend,
    LookupParserBackend,
    SubprocessParserBackend,
    graph_equal,
    parse_penman,
    read_corpus,
    rescore,
    rescore_corpus,
    smatch_hillclimb,
)

from helpers import alpha_rename, mutate_graph, random_graph

GOLD = parse_penman("(w / want-01 :ARG0 (b / boy) :ARG1 (g / go-02 :ARG0 b))")
WRONG = parse_penman("(c / cat)")


def cand_set(gold, texts, start=-1.0, step=-0.5):
    candidates = [(text, start + i * step) for i, text in enumerate(texts)]
    return CandidateSet(gold=gold, candidates=candidates)


class CountingBackend(LookupParserBackend):
    def __init__(self, table):
        super().__init__(table)
        self.calls = 0

    def parse_batch(self, sentences):
        self.calls += 1
        return super().parse_batch(sentences)


class TestRescore:
    def test_forced_argmax(self):
        texts = ["alpha", "beta", "gamma", "the right one", "delta"]
        backend = LookupParserBackend({"the right one": GOLD})
        result = rescore(cand_set(GOLD, texts), backend)
        assert result.selected_index == 3
        assert result.f1s[3] == 1.0
        assert result.selection_reason == "smatch_max"

    def test_identical_graphs_tie_to_rank(self):
        texts = ["one", "two", "three"]
        backend = LookupParserBackend({t: WRONG for t in texts})
        result = rescore(cand_set(GOLD, texts), backend)
        assert result.selected_index == 0
        assert result.selection_reason == "tie_broken_by_rank"

    def test_all_parses_failed_fallback(self):
        result = rescore(cand_set(GOLD, ["one", "two"]), FailingParserBackend())
        assert result.selected_index == 0
        assert result.selection_reason == "all_parses_failed_fallback"
        assert result.scores == (None, None)

    def test_empty_text_is_parse_failure(self):
        backend = CountingBackend({"real": GOLD})
        result = rescore(cand_set(GOLD, ["", "real"]), backend)
        assert result.scores[0] is None
        assert result.selected_index == 1
        assert backend.calls == 1

    def test_single_candidate_selects_index_zero(self):
        result = rescore(cand_set(GOLD, ["only"]), LookupParserBackend({"only": GOLD}))
        assert result.selected_index == 0

    def test_selected_f1_never_below_top1(self):
        rng = random.Random(311)
        for _ in range(20):
            gold = random_graph(rng, max_vars=5)
            texts = [f"cand-{i}" for i in range(4)]
            table = {}
            for t in texts:
                roll = rng.random()
                if roll < 0.3:
                    continue  # parse failure
                if roll < 0.6:
                    table[t] = mutate_graph(rng, gold)
                else:
                    table[t] = alpha_rename(random_graph(rng, max_vars=5))
            result = rescore(cand_set(gold, texts), LookupParserBackend(table))
            assert result.f1s[result.selected_index] >= result.f1s[0]

    def test_deterministic(self):
        rng = random.Random(313)
        gold = random_graph(rng, max_vars=5)
        table = {"a": mutate_graph(rng, gold), "b": alpha_rename(gold)}
        backend = LookupParserBackend(table)
        r1 = rescore(cand_set(gold, ["a", "b"]), backend, restarts=4, seed=7)
        r2 = rescore(cand_set(gold, ["a", "b"]), backend, restarts=4, seed=7)
        assert r1 == r2
        assert r1.selected_index == 1  # alpha-renamed copy scores 1.0

    def test_scores_match_direct_smatch(self):
        table = {"a": WRONG, "b": alpha_rename(GOLD)}
        result = rescore(cand_set(GOLD, ["a", "b"]), LookupParserBackend(table), seed=0)
        direct = smatch_hillclimb(GOLD, WRONG, seed=0)
        assert result.scores[0] == direct


class TestRescoreCorpus:
    def test_batched_into_one_call(self):
        backend = CountingBackend({"x": GOLD, "y": WRONG})
        sets = [cand_set(GOLD, ["x", "y"]), cand_set(GOLD, ["y", "x"]), cand_set(GOLD, ["x"])]
        results, summary = rescore_corpus(sets, backend)
        assert backend.calls == 1
        assert [r.selected_index for r in results] == [0, 1, 0]

    def test_half_selection_change_rate(self):
        # 4 sets: two where a later candidate parses back to gold, two where
        # the top candidate already does
        backend = LookupParserBackend({"good": GOLD, "bad": WRONG})
        sets = [
            cand_set(GOLD, ["bad", "good"]),
            cand_set(GOLD, ["good", "bad"]),
            cand_set(GOLD, ["bad", "good"]),
            cand_set(GOLD, ["good", "bad"]),
        ]
        results, summary = rescore_corpus(sets, backend)
        assert summary.selection_change_rate == 0.5
        assert summary.mean_selected_f1 == 1.0

    def test_no_changes_when_top1_cycles_back(self):
        backend = LookupParserBackend({"good": GOLD})
        sets = [cand_set(GOLD, ["good", "other"]) for _ in range(3)]
        results, summary = rescore_corpus(sets, backend)
        assert summary.selection_change_rate == 0.0
        assert all(r.selected_index == 0 for r in results)

    def test_empty_corpus_rejected(self):
        with pytest.raises(ValueError):
            rescore_corpus([], FailingParserBackend())


class TestCandidateSet:
    def test_scores_must_be_non_increasing(self):
        with pytest.raises(ValueError):
            CandidateSet(gold=GOLD, candidates=[("a", -2.0), ("b", -1.0)])

    def test_nonempty_required(self):
        with pytest.raises(ValueError):
            CandidateSet(gold=GOLD, candidates=[])


class TestSubprocessBackend:
    def test_stdin_mode_round_trip(self, lookup_parser_cmd, mini_corpus_path):
        entries = read_corpus(mini_corpus_path).entries
        backend = SubprocessParserBackend(lookup_parser_cmd)
        sentences = [entries[0].sentence, "no such sentence", entries[1].sentence]
        graphs = backend.parse_batch(sentences)
        assert graph_equal(graphs[0], entries[0].graph)
        assert graphs[1] is None  # unparseable block reported per-sentence
        assert graph_equal(graphs[2], entries[1].graph)

    def test_file_pair_mode(self, data_dir, mini_corpus_path):
        entries = read_corpus(mini_corpus_path).entries
        cmd = (
            f"{sys.executable} {data_dir / 'lookup_parser.py'} {mini_corpus_path}"
            " {input} {output}"
        )
        backend = SubprocessParserBackend(cmd)
        graphs = backend.parse_batch([entries[2].sentence])
        assert graph_equal(graphs[0], entries[2].graph)

    def test_missing_command_is_transport_error(self):
        backend = SubprocessParserBackend("definitely-not-a-real-binary-xyz")
        with pytest.raises(BackendTransportError):
            backend.parse_batch(["hello"])

    def test_nonzero_exit_is_transport_error(self):
        backend = SubprocessParserBackend(f"{sys.executable} -c 'import sys; sys.exit(3)'")
        with pytest.raises(BackendTransportError):
            backend.parse_batch(["hello"])

    def test_block_count_mismatch_is_transport_error(self):
        backend = SubprocessParserBackend(
            f"{sys.executable} -c \"print('(a / thing)')\""
        )
        with pytest.raises(BackendTransportError):
            backend.parse_batch(["one", "two"])

    def test_empty_batch_skips_subprocess(self):
        backend = SubprocessParserBackend("definitely-not-a-real-binary-xyz")
        assert backend.parse_batch([]) == []
