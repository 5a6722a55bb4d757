import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import obj, scene_of
from spotdiff.actions import AnswerAction, GuessAction, QuestionAction
from spotdiff.asim import NoisyAnswerer, OracleAnswerer
from spotdiff.config import RunConfig
from spotdiff.metrics import (BUCKET_EDGES, CONVERTING, DEEPENING, answer_accuracy_by_subtype, bucketed_success,
                              build_report, cateq_accuracy, cateq_recall, classify_transition, dialog_transitions,
                              evaluate_dataset, extract_cateq, recall, replay, task_success)
from spotdiff.pipeline import DialogRecord, Round, build_dataset
from spotdiff.taxonomy import PropertySet

P = PropertySet

SCENE = scene_of(obj("v", "vase", "white", "glass", x=1), obj("n", "nightstand", "white", "wooden", x=3),
                 obj("a1", "apple", "red", "plastic", x=5), obj("a2", "apple", "red", "plastic", x=7),
                 obj("a3", "apple", "green", "plastic", x=9), obj("f", "frame", "black", "wooden", x=11))


def count(p, hint=None):
    if hint is None:
        return QuestionAction("count-nohint", {"p_set": p})
    return QuestionAction("count-hint", {"p_set": p, "count": hint})


def record(*questions, status="ok"):
    rounds = tuple(Round(q, "", AnswerAction.of_count(1), "") for q in questions)
    target = "v"
    guess = GuessAction(target if status == "ok" else "n")
    return DialogRecord(0, "qa", rounds, guess, target, status, ())


def test_task_success():
    assert task_success([record(), record()]) == 1.0
    assert task_success([record(), record(status="wrong")]) == 0.5
    with pytest.raises(ValueError):
        task_success([])


def test_cateq_extraction_examples():
    rec = record(count(P("white")), count(P(category="apple")), count(P(category="decoration")),
                 QuestionAction("ref-them", {"p_set": P("white")}))
    assert [p for p, _ in extract_cateq(rec, SCENE)] == [P("white"), P(category="decoration")]
    assert extract_cateq(record(count(P("red"))), SCENE) == []


def test_cateq_accuracy_examples():
    assert cateq_accuracy(record(count(P("white"))), SCENE) is None
    assert cateq_accuracy(record(count(P("white"), 2)), SCENE) == 1.0
    assert cateq_accuracy(record(count(P("white"), 2), count(P(category="decoration"), 3)), SCENE) == 0.5


def test_recall_examples():
    a, b, c = P("white"), P("red"), P(category="food")
    assert recall([a, b], [a, b]) == 1.0
    assert recall([a], [b, c]) == 0.0
    assert recall([a, c], [a, b]) == 0.5
    assert recall([a], []) is None
    rec = record(count(P("white")))
    ref = record(count(P("white")), count(P(category="decoration")))
    assert cateq_recall(rec, ref, SCENE) == 0.5


def test_transition_examples():
    furn = count(P(category="furniture"))
    assert classify_transition(furn, count(P("brown", "wooden", "furniture"))) == DEEPENING
    assert classify_transition(count(P("white")), furn) == CONVERTING
    assert classify_transition(furn, furn) == CONVERTING
    assert classify_transition(count(P("white", None, "furniture")), count(P("white"))) == CONVERTING
    ref = QuestionAction("ref-them", {"p_set": P(category="furniture")})
    assert classify_transition(ref, count(P(category="table"))) == DEEPENING
    assert dialog_transitions(record(furn, count(P(category="sofa")), count(P("red")))) == [DEEPENING, CONVERTING]


def _psets(tax):
    return st.sampled_from(sorted(tax.iter_askable_sets(), key=PropertySet.sort_key))


def _tax():
    from spotdiff.taxonomy import default_taxonomy
    return default_taxonomy()


@settings(max_examples=300, deadline=None)
@given(_psets(_tax()), _psets(_tax()))
def test_deepening_is_asymmetric(a, b):
    if classify_transition(count(a), count(b)) == DEEPENING:
        assert classify_transition(count(b), count(a)) == CONVERTING


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.none() | st.floats(0, 1), st.booleans()), max_size=40))
def test_buckets_account_for_every_valued_dialog(rows):
    buckets = bucketed_success([v for v, _ in rows], [s for _, s in rows])
    assert len(buckets) == len(BUCKET_EDGES) - 1
    valued = [(v, s) for v, s in rows if v is not None]
    assert sum(b["dialogs"] for b in buckets) == len(valued)
    assert sum(round(b["success_rate"] * b["dialogs"]) for b in buckets if b["dialogs"]) == \
        sum(s for _, s in valued)


@settings(max_examples=100, deadline=None)
@given(st.lists(_psets(_tax()), max_size=6), _psets(_tax()))
def test_cateq_extraction_is_monotone(psets, extra):
    base = extract_cateq(record(*map(count, psets)), SCENE)
    more = extract_cateq(record(*map(count, psets), count(extra)), SCENE)
    assert more[:len(base)] == base and len(more) - len(base) in (0, 1)


@pytest.fixture(scope="module")
def ds():
    return build_dataset(RunConfig(n_pairs=40, seed=1))


def test_oracle_replay_reproduces_the_dataset(ds):
    again = replay(ds)
    assert [r.to_json() for r in again] == [dict(r.to_json(), split=None) for r in ds.retained()]


def test_noise_lowers_success(ds):
    clean = evaluate_dataset(ds, n_per_subtype=50)
    noisy = evaluate_dataset(ds, epsilon=0.3, n_per_subtype=50)
    assert clean.success_rate == 1.0
    assert noisy.success_rate < clean.success_rate
    assert all(v == 1.0 for v in clean.per_subtype_accuracy.values())
    assert "SUCC" in noisy.format()


def test_answer_accuracy_under_noise(ds):
    scenes = [p.scene_q for p in ds.pairs.values()]
    acc = answer_accuracy_by_subtype(NoisyAnswerer(0.2, 4), scenes, 400, 0)
    assert all(0.7 < v < 0.9 for v in acc.values())
    assert answer_accuracy_by_subtype(OracleAnswerer(), scenes, 50, 0)["count-hint"] == 1.0
    with pytest.raises(ValueError):
        answer_accuracy_by_subtype(OracleAnswerer(), [], 5)


def test_report_transition_table(ds):
    recs = ds.retained()
    scenes = [ds.pairs[r.pair_id].oriented(r.orientation)[0] for r in recs]
    rep = build_report(recs, scenes, recs)
    n = sum(len(r.rounds) - 1 for r in recs if r.rounds)
    assert sum(v["transitions"] for v in rep.transition_table.values()) == n
    assert all(b["success_rate"] in (None, 1.0) for b in rep.cateq_recall_histogram)
