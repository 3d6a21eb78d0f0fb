"""Tests for prediction matching and scoring."""

from fractions import Fraction
import random

import pytest

from reasonforge.errors import ErrorCode, EvalError, MatcherError
from reasonforge.evaluation import (
    CategoryScore,
    GoldItem,
    MatchMethod,
    Prediction,
    match_answer,
    match_answer_external,
    match_predictions,
    parse_prediction_rows,
    score,
)
from reasonforge.matching import MockMatcher

OPTIONS = {"A": "1.5", "B": "12", "C": "18", "D": "27"}


def _gold(qid, category="spatial", answer="A"):
    return GoldItem(qid, category, answer, OPTIONS, "Which one?")


@pytest.fixture
def twelve_gold():
    """Four items per category; answers cycle A..D."""
    categories = ["spatial", "sequential", "analytical"]
    return [_gold(f"q{i:02d}", categories[i // 4], "ABCD"[i % 4]) for i in range(12)]


def _pred(qid, key):
    method = MatchMethod.RULE if key else MatchMethod.UNMATCHED
    return Prediction(qid, key or "", key, method)


def test_three_of_four_spatial():
    gold = [_gold(f"q{i}") for i in range(4)]
    preds = [_pred("q0", "A"), _pred("q1", "A"), _pred("q2", "A"), _pred("q3", "B")]
    report = score(preds, gold)
    assert report.per_category == {"spatial": CategoryScore(3, 4)}
    assert report.per_category["spatial"].accuracy == Fraction(3, 4)
    assert report.overall == Fraction(3, 4)
    assert report.unmatched == 0


def test_overall_is_micro_average():
    gold = [_gold("s1", "spatial"), _gold("s2", "spatial"), _gold("c1", "analytical"), _gold("c2", "analytical")]
    preds = [_pred("s1", "A"), _pred("s2", "A"), _pred("c1", "B"), _pred("c2", "B")]
    report = score(preds, gold)
    assert report.per_category["spatial"].accuracy == 1
    assert report.per_category["analytical"].accuracy == 0
    assert report.overall == Fraction(1, 2)


def test_all_unmatched(twelve_gold):
    preds = [_pred(g.question_id, None) for g in twelve_gold]
    report = score(preds, twelve_gold)
    assert report.correct == 0
    assert report.total == 12
    assert report.unmatched == 12


def test_missing_predictions_count_as_unmatched(twelve_gold):
    preds = [_pred(g.question_id, g.answer) for g in twelve_gold[:9]]
    report = score(preds, twelve_gold)
    assert report.correct == 9
    assert report.unmatched == 3
    assert report.per_category["analytical"] == CategoryScore(1, 4)


def test_category_order_and_absent_categories():
    report = score([], [_gold("q1", "analytical"), _gold("q2", "spatial")])
    assert list(report.per_category) == ["spatial", "analytical"]


def test_score_is_order_independent(twelve_gold):
    preds = [_pred(g.question_id, "A") for g in twelve_gold]
    expected = score(preds, twelve_gold)
    rng = random.Random(5)
    for _ in range(5):
        shuffled_preds, shuffled_gold = preds[:], twelve_gold[:]
        rng.shuffle(shuffled_preds)
        rng.shuffle(shuffled_gold)
        assert score(shuffled_preds, shuffled_gold) == expected


def test_score_rejects_unknown_and_duplicate_ids(twelve_gold):
    with pytest.raises(EvalError) as exc:
        score([_pred("nope", "A")], twelve_gold)
    assert exc.value.code == ErrorCode.EVAL_UNKNOWN_QUESTION_ID

    with pytest.raises(EvalError) as exc:
        score([_pred("q00", "A"), _pred("q00", "B")], twelve_gold)
    assert exc.value.code == ErrorCode.EVAL_DUPLICATE_PREDICTION


def test_prediction_key_method_consistency():
    with pytest.raises(EvalError):
        Prediction("q", "raw", None, MatchMethod.RULE)
    with pytest.raises(EvalError):
        Prediction("q", "raw", "A", MatchMethod.UNMATCHED)


def test_report_rendering(twelve_gold):
    report = score([_pred(g.question_id, g.answer) for g in twelve_gold], twelve_gold)
    data = report.to_dict()
    assert data["overall"] == 1.0
    assert data["per_category"]["sequential"] == {"correct": 4, "total": 4, "accuracy": 1.0}
    table = report.format_table()
    assert table.splitlines()[0].split() == ["category", "correct", "total", "accuracy"]
    assert "unmatched: 0" in table


class TestMatching:

    def test_rule_match(self):
        assert match_answer("(C)", OPTIONS) == ("C", MatchMethod.RULE)
        assert match_answer("dunno", OPTIONS) == (None, MatchMethod.UNMATCHED)

    def test_external_match(self):
        matcher = MockMatcher(key="B")
        assert match_answer_external("whatever", OPTIONS, matcher, "q?") == ("B", MatchMethod.EXTERNAL)
        assert matcher.calls[0].question == "q?"

    def test_external_none_is_unmatched(self):
        assert match_answer_external("(C)", OPTIONS, MockMatcher(key=None)) == (None, MatchMethod.UNMATCHED)

    def test_external_failure_falls_back_to_rules(self, caplog):
        matcher = MockMatcher(error=MatcherError(ErrorCode.MATCHER_TIMEOUT))
        with caplog.at_level("WARNING", logger="reasonforge"):
            assert match_answer_external("(C)", OPTIONS, matcher) == ("C", MatchMethod.RULE)
        assert "rule-based" in caplog.text

    def test_match_predictions_with_matcher(self, twelve_gold):
        matcher = MockMatcher(key="D")
        rows = [(g.question_id, "raw") for g in twelve_gold]
        preds = match_predictions(rows, {g.question_id: g for g in twelve_gold}, matcher, max_in_flight=3)
        assert [p.question_id for p in preds] == [g.question_id for g in twelve_gold]
        assert all(p.key == "D" and p.method == MatchMethod.EXTERNAL for p in preds)
        assert len(matcher.calls) == 12

    def test_match_predictions_unknown_id(self, twelve_gold):
        with pytest.raises(EvalError) as exc:
            match_predictions([("zz", "A")], {g.question_id: g for g in twelve_gold})
        assert exc.value.code == ErrorCode.EVAL_UNKNOWN_QUESTION_ID


class TestParsePredictionRows:

    def test_valid_rows(self):
        rows = [{"question_id": "q1", "output": "A"}, {"question_id": "q2", "output": ""}]
        assert parse_prediction_rows(rows) == [("q1", "A"), ("q2", "")]

    @pytest.mark.parametrize("row", [
        {"question_id": "q1"},
        {"output": "A"},
        {"question_id": 3, "output": "A"},
        ["q1", "A"],
    ])
    def test_invalid_row(self, row):
        with pytest.raises(EvalError) as exc:
            parse_prediction_rows([row])
        assert exc.value.code == ErrorCode.EVAL_INVALID_PREDICTION

    def test_duplicate(self):
        rows = [{"question_id": "q1", "output": "A"}] * 2
        with pytest.raises(EvalError) as exc:
            parse_prediction_rows(rows)
        assert exc.value.code == ErrorCode.EVAL_DUPLICATE_PREDICTION


def test_twelve_raw_outputs_scored_by_rules(twelve_items):
    items = twelve_items["items"]
    gold = {
        i["question_id"]: GoldItem(i["question_id"], i["category"], i["answer"], twelve_items["options"][i["category"]])
        for i in items
    }
    predictions = match_predictions([(i["question_id"], i["raw"]) for i in items], gold)
    assert {p.question_id: p.key for p in predictions} == {i["question_id"]: i["expected_key"] for i in items}

    report = score(predictions, list(gold.values()))
    expected = twelve_items["expected"]
    assert {c: (s.correct, s.total) for c, s in report.per_category.items()} == {
        c: (e["correct"], e["total"]) for c, e in expected["per_category"].items()
    }
    assert report.overall == Fraction(expected["overall"])
    assert report.unmatched == expected["unmatched"]
