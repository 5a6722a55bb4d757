"""Oracle answerer: reads answers off the answerer's scene graph."""
from __future__ import annotations

import random
from collections import Counter
from typing import Callable, Sequence

from .actions import AnswerAction, ProtocolError, QuestionAction
from .scene import ObjectInstance, SceneGraph
from .taxonomy import PropertySet, Taxonomy, default_taxonomy, full_set

History = Sequence[tuple[QuestionAction, AnswerAction]]
Answerer = Callable[[SceneGraph, QuestionAction, History], AnswerAction]

_AXIS = {"left": ("x", 1), "right": ("x", -1), "front": ("y", 1), "back": ("y", -1)}


def count_objects(scene: SceneGraph, pset: PropertySet, tax: Taxonomy | None = None) -> int:
    tax = tax or default_taxonomy()
    return sum(1 for o in scene.objects if tax.matches(o, pset))


def extreme_object(members: Sequence[ObjectInstance], direction: str) -> ObjectInstance:
    """Extreme member along ``direction``; equal coordinates fall back to the smaller id."""
    if not members:
        raise ValueError("empty member set")
    axis, sign = _AXIS[direction]
    return min(members, key=lambda o: (sign * getattr(o, axis), o.id))


def supporting_objects(scene: SceneGraph) -> list[ObjectInstance]:
    parents = {o.parent_id for o in scene.objects}
    return [o for o in scene.objects if o.id in parents]


def extreme_members(scene: SceneGraph, question: QuestionAction,
                    tax: Taxonomy | None = None) -> list[ObjectInstance] | AnswerAction:
    """The conditioned object set of an extreme question, or a none answer when it cannot be formed.

    Anchors are looked up among objects that have something on them.
    """
    tax = tax or default_taxonomy()
    if question.subtype == "extreme-pic":
        return list(scene.objects)
    anchors = [o for o in supporting_objects(scene) if tax.matches(o, question.slots["p_set_2"])]
    if not anchors:
        return AnswerAction.none("absent")
    if question.subtype == "extreme-obj":
        if len(anchors) > 1:
            return AnswerAction.none("ambiguous")
        anchor = anchors[0]
    else:
        anchor = extreme_object(anchors, question.slots["location_2"])
    return scene.children_of(anchor.id)


def answer_extreme(scene: SceneGraph, question: QuestionAction, tax: Taxonomy | None = None) -> AnswerAction:
    members = extreme_members(scene, question, tax)
    if isinstance(members, AnswerAction):
        return members
    if not members:
        return AnswerAction.none("absent")
    direction = question.slots.get("location", question.slots.get("location_1"))
    return AnswerAction.of_items([(full_set(extreme_object(members, direction)), 1)])


def query_attribute(scene: SceneGraph, referent: PropertySet, which: str,
                    tax: Taxonomy | None = None) -> AnswerAction:
    tax = tax or default_taxonomy()
    found = [o for o in scene.objects if tax.matches(o, referent)]
    if not found:
        return AnswerAction.none("absent")
    values = {getattr(o, which) for o in found}
    if len(values) > 1:
        return AnswerAction.none("ambiguous")
    return AnswerAction.of_value(values.pop())


def describe_group(signatures: Sequence[tuple[str, str, str]]) -> list[tuple[PropertySet, int]]:
    """Group (category, colour, material) triples under their shortest distinguishing descriptions.

    Each object gets its category plus the fewest attributes needed so that
    the description only covers objects identical to it. Groups keep the
    order of first appearance.
    """
    out: dict[PropertySet, int] = {}
    for sig in signatures:
        cat, col, mat = sig
        for c, m in ((None, None), (col, None), (None, mat), (col, mat)):
            hits = [s for s in signatures
                    if s[0] == cat and (c is None or s[1] == c) and (m is None or s[2] == m)]
            if all(h == sig for h in hits):
                desc = PropertySet(c, m, cat)
                break
        out[desc] = out.get(desc, 0) + 1
    return list(out.items())


def resolve_refer(scene: SceneGraph, history: History, tax: Taxonomy | None = None) -> AnswerAction:
    tax = tax or default_taxonomy()
    if not history or history[-1][0].type != "count":
        raise ProtocolError("refer question without a preceding count question")
    pset = history[-1][0].slots["p_set"]
    objs = [o for o in scene.objects if tax.matches(o, pset)]
    if not objs:
        return AnswerAction.none("absent")
    return AnswerAction.of_items(describe_group([o.signature for o in objs]))


def oracle_answer(scene: SceneGraph, question: QuestionAction, history: History = (),
                  tax: Taxonomy | None = None) -> AnswerAction:
    tax = tax or default_taxonomy()
    t = question.type
    if t == "count":
        return AnswerAction.of_count(count_objects(scene, question.slots["p_set"], tax))
    if t == "extreme":
        return answer_extreme(scene, question, tax)
    if t == "query":
        which = "color" if question.subtype == "query-color" else "material"
        return query_attribute(scene, question.slots["p_set"], which, tax)
    return resolve_refer(scene, history, tax)


def noisy_answer(answer: AnswerAction, epsilon: float, rng: random.Random,
                 tax: Taxonomy | None = None, which: str | None = None) -> AnswerAction:
    """With probability ``epsilon`` return a perturbed (always different) answer."""
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError("epsilon must lie in [0, 1]")
    if rng.random() >= epsilon:
        return answer
    tax = tax or default_taxonomy()
    if answer.kind == "count":
        n = answer.count
        return AnswerAction.of_count(n + 1 if n == 0 else n + rng.choice((-1, 1)))
    vocab = tax.materials if which == "material" else tax.colors
    if answer.kind == "attribute":
        return AnswerAction.of_value(rng.choice([v for v in vocab if v != answer.value]))
    if answer.kind == "none":
        return AnswerAction.of_value(rng.choice(vocab))
    items = list(answer.items)
    i = rng.randrange(len(items))
    desc, n = items[i]
    if answer.total > 1 and rng.random() < 0.5:
        if n > 1:
            items[i] = (desc, n - 1)
        else:
            del items[i]
        return AnswerAction.of_items(items)
    while True:
        cat, col, mat = rng.choice(tax.signatures())
        swapped = PropertySet(col, mat, cat)
        if swapped != desc and all(swapped != d for d, _ in items):
            break
    if n > 1:
        items[i] = (desc, n - 1)
        items.insert(i + 1, (swapped, 1))
    else:
        items[i] = (swapped, 1)
    return AnswerAction.of_items(items)


class OracleAnswerer:
    def __init__(self, tax: Taxonomy | None = None):
        self.tax = tax or default_taxonomy()

    def __call__(self, scene: SceneGraph, question: QuestionAction, history: History = ()) -> AnswerAction:
        return oracle_answer(scene, question, history, self.tax)


class NoisyAnswerer(OracleAnswerer):
    def __init__(self, epsilon: float, seed: int = 0, tax: Taxonomy | None = None):
        super().__init__(tax)
        if not 0.0 <= epsilon <= 1.0:
            raise ValueError("epsilon must lie in [0, 1]")
        self.epsilon = epsilon
        self.rng = random.Random(seed)

    def __call__(self, scene: SceneGraph, question: QuestionAction, history: History = ()) -> AnswerAction:
        truth = oracle_answer(scene, question, history, self.tax)
        which = "material" if question.subtype == "query-material" else "color"
        return noisy_answer(truth, self.epsilon, self.rng, self.tax, which)


def item_counter(answer: AnswerAction) -> Counter:
    c: Counter = Counter()
    for d, n in answer.items:
        c[d] += n
    return c
