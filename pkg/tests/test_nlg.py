import random

import pytest

from spotdiff.actions import SUBTYPES, AnswerAction, QuestionAction
from spotdiff.nlg import (MARKER, PhraseCatalog, TemplateBank, TemplateError, default_catalog, default_templates,
                          load_templates, number_word, realize_answer, realize_property_set, realize_question)
from spotdiff.qsim import slot_options
from spotdiff.state import Tracker
from spotdiff.taxonomy import PropertySet

P = PropertySet


def test_template_bank_size_and_validity():
    bank = default_templates()
    assert bank.template_count == 43
    bank.validate()
    assert set(bank.questions) == set(SUBTYPES)


def test_bad_templates_are_rejected(tmp_path):
    bank = default_templates()
    broken = dict(bank.questions, **{"count-nohint": ("How many [f(X)] and [L]?",)})
    with pytest.raises(TemplateError):
        TemplateBank(broken, bank.transitions, bank.none_answers).validate()
    broken = dict(bank.questions, **{"count-nohint": ("How many [f(X) are there?",)})
    with pytest.raises(TemplateError):
        TemplateBank(broken, bank.transitions, bank.none_answers).validate()
    missing = {k: v for k, v in bank.questions.items() if k != "ref-it"}
    with pytest.raises(TemplateError):
        TemplateBank(missing, bank.transitions, bank.none_answers).validate()
    path = tmp_path / "t.yaml"
    path.write_text("questions: {}\ntransitions: {}\nnone_answers: {}\n")
    with pytest.raises(TemplateError):
        load_templates(path)


def test_phrase_examples():
    assert realize_property_set(P("white"), 2) in ("white things", "white objects")
    assert realize_property_set(P(None, "wooden", "furniture"), 2) == "pieces of wooden furniture"
    assert realize_property_set(P(category="apple")) == "apple"
    assert realize_property_set(P("white", "glass", "vase"), 3) == "white glass vases"
    assert realize_property_set(P(category="glasses"), 2) == "pairs of glasses"
    assert number_word(4) == "four" and number_word(12) == "12"


def one(subtype, **slots):
    return QuestionAction(subtype, slots)


def test_question_examples():
    rng = random.Random(0)
    q = realize_question(one("count-nohint", p_set=P("white")), rng)
    assert q.startswith(("How many white things", "How many white objects", "Can you", "I want"))
    bank = default_templates()
    texts = {realize_question(one("count-hint", p_set=P("white"), count=4), random.Random(s)) for s in range(60)}
    assert "I have four white things, how about you?" in texts
    assert "There are four white objects in my picture, what about you?" in texts
    texts = {realize_question(one("count-hint", p_set=P(category="vase"), count=1), random.Random(s))
             for s in range(60)}
    assert "There is one vase in my picture, what about you?" in texts
    assert realize_question(one("ref-them", p_set=P("white")), random.Random(0)) in bank.questions["ref-them"]
    texts = {realize_question(one("extreme-pic", p_set=P(category="apple"), location="left"), random.Random(s))
             for s in range(60)}
    assert "The leftmost one in my picture is an apple, what about you?" in texts
    texts = {realize_question(one("query-color", p_set=P(category="vase"), color="white"), random.Random(s))
             for s in range(60)}
    assert "The vase is white, and you?" in texts


def test_answer_examples():
    hint = one("count-hint", p_set=P("white"), count=4)
    bank = default_templates()
    assert realize_answer(AnswerAction.of_count(4), one("count-nohint", p_set=P("white")), random.Random(0)) == "Four."
    assert realize_answer(AnswerAction.of_count(4), hint, random.Random(0)) in bank.transitions["same"]
    outs = {realize_answer(AnswerAction.of_count(2), hint, random.Random(s)) for s in range(80)}
    assert all(o.endswith(" I have two.") for o in outs)
    assert "Mine is less than yours. I have two." in outs
    assert not any("one more" in o for o in outs)
    outs = {realize_answer(AnswerAction.of_count(5), hint, random.Random(s)) for s in range(80)}
    assert "I have one more than you. I have five." in outs
    desc = AnswerAction.of_items(((P(category="decorative plate"), 2), (P(category="vase"), 1)))
    assert realize_answer(desc, one("ref-them", p_set=P("white")), random.Random(0)) == \
        "Two decorative plates and a vase."
    q = one("query-color", p_set=P(category="vase"), color="white")
    assert realize_answer(AnswerAction.of_value("white"), q, random.Random(0)) == "White."
    assert realize_answer(AnswerAction.none("absent"), q, random.Random(0)) in bank.none_answers["absent"]


def test_inverse_round_trip(tax):
    cat = default_catalog()
    inv = cat.inverse()
    assert len(inv) > 1000
    for p in tax.iter_askable_sets():
        for s, pl in cat.forms(p):
            assert cat.parse(s) == p and cat.parse(pl) == p


def test_colliding_phrases_are_detected(tmp_path, tax):
    nouns = tmp_path / "nouns.yaml"
    nouns.write_text('generic: [["{}thing", "{}things"]]\nirregular:\n  vase: ["{}cup", "{}cups"]\n')
    with pytest.raises(TemplateError):
        PhraseCatalog(tax, nouns).inverse()


def test_render_fuzz_leaves_no_markers(pairs, tax):
    rendered = 0
    cat = default_catalog()
    inv = cat.inverse()
    for k, p in enumerate(pairs):
        t = Tracker(p.scene_q, tax)
        for sub in SUBTYPES:
            if sub.startswith("ref"):
                opts = [{"p_set": P("white")}]
            elif sub.startswith("count"):
                opts = [{"p_set": ps} for ps in sorted(t.frequencies(), key=PropertySet.sort_key)[:20]]
                if sub == "count-hint":
                    opts = [dict(o, count=3) for o in opts]
            else:
                opts = slot_options(t, sub)
            for j, slots in enumerate(opts[:40]):
                q = QuestionAction(sub, slots)
                text = realize_question(q, random.Random(k * 1000 + j))
                rendered += 1
                assert not MARKER.search(text) and "[" not in text and "]" not in text
                assert text[0].isupper()
                for key in ("p_set", "p_set_1", "p_set_2"):
                    if key in slots:
                        assert any(f in inv for f in cat.forms(slots[key])[0])
    assert rendered > 5000
