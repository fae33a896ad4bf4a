"""Attack outcomes, aggregation, and result serialization."""

import numpy as np
import pytest

from rankattack import (
    ISR_INTERVALS,
    AttackResult,
    Edit,
    EmbeddingStore,
    Ranker,
    RankedList,
    ReferenceRanker,
    RankerParams,
    aggregate,
    apply_edit,
    evaluate_attack,
    load_results,
    perturbation_pct,
    result_from_json,
    result_to_json,
    write_results,
)
from helpers import make_doc, make_query, random_store


class _FixedScore(Ranker):
    """Stub ranker returning one preset value for every document."""

    def __init__(self, value):
        self.value = value

    def score(self, q, d):
        return self.value


def _attempted(**overrides):
    base = dict(
        query_id="q",
        doc_id="d",
        strategy="one_word_start",
        status="attempted",
        orig_rank=50,
        new_rank=40,
        orig_score=1.0,
        new_score=1.5,
        ss=0.9,
        pp=2.0,
        edit=Edit(kind="insert", position=0, token="x"),
    )
    base.update(overrides)
    return AttackResult(**base)


def _skipped(**overrides):
    base = dict(
        query_id="q", doc_id="d", strategy="one_word_sim", status="skipped", skip_reason="no candidate"
    )
    base.update(overrides)
    return AttackResult(**base)


class TestAttackResult:
    def test_success_is_strict_improvement(self):
        assert _attempted(orig_rank=50, new_rank=40).success
        assert not _attempted(orig_rank=50, new_rank=50).success
        assert not _attempted(orig_rank=50, new_rank=60).success

    def test_boosts(self):
        r = _attempted(orig_rank=50, new_rank=40, orig_score=1.0, new_score=1.25)
        assert r.rank_boost == 10
        assert abs(r.score_boost - 0.25) < 1e-12

    def test_attempted_requires_all_fields(self):
        with pytest.raises(ValueError):
            _attempted(new_rank=None)
        with pytest.raises(ValueError):
            _attempted(ss=None)

    def test_ss_range_enforced(self):
        with pytest.raises(ValueError):
            _attempted(ss=1.5)

    def test_pp_must_be_positive(self):
        with pytest.raises(ValueError):
            _attempted(pp=0.0)

    def test_skip_needs_reason(self):
        with pytest.raises(ValueError):
            _skipped(skip_reason=None)

    def test_skipped_has_no_boosts(self):
        r = _skipped()
        assert r.rank_boost is None
        assert r.score_boost is None
        assert not r.success


class TestPerturbationPct:
    def test_insertion_into_hundred_tokens(self):
        d = make_doc("d", [f"t{i}" for i in range(100)])
        assert perturbation_pct(d, Edit(kind="insert", position=0, token="x")) == 1.0

    def test_substitution_in_fifty_tokens(self):
        d = make_doc("d", [f"t{i}" for i in range(50)])
        edit = Edit(kind="substitute", position=0, token="x", replaced="t0")
        assert perturbation_pct(d, edit) == 2.0

    def test_batch_mean(self):
        d100 = make_doc("a", [f"t{i}" for i in range(100)])
        d50 = make_doc("b", [f"t{i}" for i in range(50)])
        edit = Edit(kind="insert", position=0, token="x")
        values = [perturbation_pct(d100, edit), perturbation_pct(d50, edit)]
        assert sum(values) / 2 == 1.5

    def test_empty_document_rejected(self):
        from rankattack import Document

        with pytest.raises(ValueError):
            perturbation_pct(Document("d", ()), Edit(kind="insert", position=0, token="x"))


class TestEvaluateAttack:
    def _setup(self):
        store = EmbeddingStore({"a": np.array([1.0, 0.0]), "b": np.array([0.0, 1.0])})
        q = make_query("q", ["a"])
        d = make_doc("d3", ["b", "a"])
        return store, q, d

    def test_five_doc_resort(self):
        """Hand-assigned scores; the perturbed doc must land by full re-sort."""
        store, q, d = self._setup()
        ranked = RankedList.from_scores(
            "q", [("d1", 5.0), ("d2", 4.0), ("d3", 3.0), ("d4", 2.0), ("d5", 1.0)]
        )
        edit = Edit(kind="insert", position=0, token="a")
        result = evaluate_attack(q, d, apply_edit(d, edit), edit, ranked, _FixedScore(4.5), store, "one_word_start")
        assert result.orig_rank == 3
        assert result.new_rank == 2
        assert result.success
        assert result.rank_boost == 1
        assert abs(result.score_boost - 1.5) < 1e-12

    def test_rank_hold_is_not_success(self):
        store, q, d = self._setup()
        ranked = RankedList.from_scores("q", [("d1", 5.0), ("d3", 3.0), ("d5", 1.0)])
        edit = Edit(kind="insert", position=0, token="a")
        result = evaluate_attack(q, d, apply_edit(d, edit), edit, ranked, _FixedScore(3.5), store, "one_word_start")
        assert result.new_rank == 2
        assert not result.success

    def test_identity_perturbation(self):
        """Replacing a doc with itself moves nothing and has similarity 1."""
        rng = np.random.default_rng(167)
        store, vocab = random_store(rng, 20, 5)
        ranker = ReferenceRanker(store, RankerParams(lambda_pos=0.0))
        q = make_query("q", [vocab[0]])
        d = make_doc("d", [vocab[0], vocab[3]])
        others = [make_doc(f"c{i}", [vocab[i + 4]]) for i in range(4)]
        ranked = ranker.rerank(q, [d] + others)
        edit = Edit(kind="substitute", position=1, token=vocab[3], replaced=vocab[3])
        result = evaluate_attack(q, d, apply_edit(d, edit), edit, ranked, ranker, store, "one_word_sim")
        assert result.rank_boost == 0
        assert result.score_boost == 0.0
        assert not result.success
        assert abs(result.ss - 1.0) < 1e-9

    def test_target_must_be_in_list(self):
        store, q, d = self._setup()
        ranked = RankedList.from_scores("q", [("other", 1.0)])
        edit = Edit(kind="insert", position=0, token="a")
        with pytest.raises(ValueError):
            evaluate_attack(q, d, apply_edit(d, edit), edit, ranked, _FixedScore(2.0), store, "one_word_start")

    def test_tie_after_rescore_respects_doc_id_order(self):
        store, q, d = self._setup()
        ranked = RankedList.from_scores("q", [("d1", 5.0), ("d3", 3.0)])
        edit = Edit(kind="insert", position=0, token="a")
        # new score ties d1; "d1" < "d3" so the target stays second
        result = evaluate_attack(q, d, apply_edit(d, edit), edit, ranked, _FixedScore(5.0), store, "one_word_start")
        assert result.new_rank == 2

    def test_matches_resort_oracle_on_large_lists(self):
        """new_rank equals an independently computed full re-sort."""
        rng = np.random.default_rng(173)
        store = EmbeddingStore({"a": np.array([1.0, 0.0])})
        q = make_query("q", ["a"])
        for trial in range(100):
            scores = rng.uniform(-5, 5, size=100)
            ids = [f"d{i:03d}" for i in range(100)]
            ranked = RankedList.from_scores("q", zip(ids, scores))
            target = f"d{int(rng.integers(0, 100)):03d}"
            d = make_doc(target, ["a", "a"])
            new_score = float(rng.uniform(-6, 6))
            edit = Edit(kind="insert", position=0, token="a")
            result = evaluate_attack(
                q, d, apply_edit(d, edit), edit, ranked, _FixedScore(new_score), store, "one_word_start"
            )
            table = [(ids[i], float(scores[i])) for i in range(100) if ids[i] != target]
            table.append((target, new_score))
            table.sort(key=lambda pair: (-pair[1], pair[0]))
            expected = 1 + [doc_id for doc_id, _ in table].index(target)
            assert result.new_rank == expected


class TestAggregate:
    def test_success_rate(self):
        results = [
            _attempted(orig_rank=50, new_rank=40),
            _attempted(orig_rank=50, new_rank=45),
            _attempted(orig_rank=50, new_rank=49),
            _attempted(orig_rank=50, new_rank=55),
        ]
        report = aggregate(results)
        assert report.sr == 75.0
        assert report.attempted_count == 4
        assert report.success_count == 3

    def test_single_bucket_population(self):
        results = [_attempted(orig_rank=15, new_rank=10) for _ in range(5)]
        report = aggregate(results)
        assert report.isr[0].attempts == 5
        assert all(b.attempts == 0 for b in report.isr[1:])
        assert report.isr[0].isr_pct == 100.0
        assert report.isr[1].isr_pct is None

    def test_interval_layout(self):
        assert ISR_INTERVALS[0] == (11, 20)
        assert ISR_INTERVALS[-1] == (91, 100)
        assert len(ISR_INTERVALS) == 9
        covered = sorted(r for lo, hi in ISR_INTERVALS for r in range(lo, hi + 1))
        assert covered == list(range(11, 101))

    def test_empty_input_gives_zero_report(self):
        report = aggregate([])
        assert report.sr == 0.0
        assert report.rb_mean == 0.0
        assert report.rb_mean_success is None
        assert all(b.attempts == 0 for b in report.isr)

    def test_means_include_failures(self):
        results = [
            _attempted(orig_rank=50, new_rank=40, orig_score=1.0, new_score=2.0),
            _attempted(orig_rank=50, new_rank=60, orig_score=1.0, new_score=0.5),
        ]
        report = aggregate(results)
        assert report.rb_mean == 0.0  # +10 and -10
        assert abs(report.sb_mean - 0.25) < 1e-12
        assert report.rb_mean_success == 10.0
        assert abs(report.sb_mean_success - 1.0) < 1e-12

    def test_skips_excluded_everywhere(self):
        results = [_attempted(orig_rank=50, new_rank=40), _skipped(), _skipped()]
        report = aggregate(results)
        assert report.sr == 100.0
        assert report.skipped_count == 2
        assert report.attempted_count == 1

    def test_weighted_bucket_mean_equals_sr(self):
        """Attempt-weighted ISR average reproduces the overall rate."""
        rng = np.random.default_rng(179)
        for trial in range(10):
            results = [
                _attempted(
                    orig_rank=int(rng.integers(11, 101)),
                    new_rank=int(rng.integers(1, 101)),
                )
                for _ in range(500)
            ]
            report = aggregate(results)
            weighted = sum(b.isr_pct * b.attempts for b in report.isr if b.attempts)
            assert abs(weighted / report.attempted_count - report.sr) < 1e-9

    def test_buckets_match_brute_force_recount(self):
        rng = np.random.default_rng(181)
        results = [
            _attempted(orig_rank=int(rng.integers(11, 101)), new_rank=int(rng.integers(1, 101)))
            for _ in range(300)
        ]
        report = aggregate(results)
        for bucket in report.isr:
            inside = [r for r in results if bucket.lo <= r.orig_rank <= bucket.hi]
            assert bucket.attempts == len(inside)
            assert bucket.successes == sum(1 for r in inside if r.new_rank < r.orig_rank)

    def test_out_of_window_ranks_not_bucketed(self):
        results = [_attempted(orig_rank=5, new_rank=2)]
        report = aggregate(results)
        assert report.sr == 100.0
        assert all(b.attempts == 0 for b in report.isr)


class TestSerialization:
    def test_result_round_trip(self):
        for r in (_attempted(), _skipped(), _attempted(edit=Edit(kind="substitute", position=3, token="x", replaced="y"))):
            assert result_from_json(result_to_json(r)) == r

    def test_file_round_trip(self, tmp_path):
        results = [_attempted(), _skipped()]
        path = tmp_path / "results.jsonl"
        write_results(results, path)
        assert load_results(path) == results

    def test_write_is_deterministic(self, tmp_path):
        results = [_attempted(), _skipped()]
        p1, p2 = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        write_results(results, p1)
        write_results(results, p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_malformed_results_file_rejected(self, tmp_path):
        from rankattack import DataFormatError

        path = tmp_path / "bad.jsonl"
        path.write_text('{"query_id": "q"}\n')
        with pytest.raises(DataFormatError, match="1"):
            load_results(path)
