"""Rule-based questioner: question-type gating, slot selection and termination."""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Sequence

from .actions import (COUNT_SUBTYPES, DIRECTIONS, EXTREME_SUBTYPES, QUERY_SUBTYPES, REFER_SUBTYPES,
                      AnswerAction, GuessAction, QuestionAction)
from .asim import count_objects, extreme_object, oracle_answer, supporting_objects
from .scene import ObjectInstance, SceneGraph
from .state import UNKNOWN, Tracker
from .taxonomy import PropertySet, Taxonomy, default_taxonomy, full_set

History = Sequence[tuple[QuestionAction, AnswerAction]]


@dataclass(frozen=True)
class QuestionerConfig:
    extreme_gate: int = 5        # n: extreme/refer/query allowed once |S_cand| < n
    refer_gate: int = 4          # m: refer allowed after a count answered below m
    hint_prob: float = 0.5       # count-hint vs count-nohint
    hint_noise: float = 0.0      # chance of stating a wrong count in a hint


class Exhausted(LookupError):
    """No property set is left to ask a count question about."""


def allowed_types(tracker: Tracker, history: History, config: QuestionerConfig = QuestionerConfig()) -> list[str]:
    allowed = list(COUNT_SUBTYPES)
    late = len(tracker.s_cand) < config.extreme_gate
    after_small_count = bool(history) and history[-1][0].type == "count" \
        and history[-1][1].kind == "count" and history[-1][1].count < config.refer_gate
    if late:
        allowed += EXTREME_SUBTYPES
    if late or after_small_count:
        allowed += REFER_SUBTYPES + QUERY_SUBTYPES
    return allowed


def _asked(history: History) -> set:
    return {q.key() for q, _ in history}


def _count_key(p: PropertySet, target: float, freq: int) -> tuple:
    return (abs(freq - target), -p.cardinality, p.sort_key())


def select_count_slots(tracker: Tracker, history: History = ()) -> tuple[PropertySet, int]:
    """Property set whose frequency is closest to half the candidate set, and the questioner's own count.

    Ties go to the larger set, then to the lexicographically smallest one.
    Sets already asked in an earlier count question are skipped.
    """
    if not tracker.s_cand:
        raise Exhausted("empty candidate set")
    done = {q.slots["p_set"] for q, _ in history if q.type == "count"}
    freq = tracker.frequencies()
    options = [(p, f) for p, f in freq.items() if f >= 1 and p not in done]
    if not options:
        raise Exhausted("every property set is confirmed or already asked")
    target = len(tracker.s_cand) / 2
    best, _ = min(options, key=lambda pf: _count_key(pf[0], target, pf[1]))
    return best, count_objects(tracker.scene, best, tracker.tax)


def _unique_description(obj: ObjectInstance, pool: Sequence[ObjectInstance], tax: Taxonomy) -> PropertySet | None:
    for p in (PropertySet(category=obj.category), PropertySet(obj.color, None, obj.category),
              PropertySet(None, obj.material, obj.category), full_set(obj)):
        if sum(1 for o in pool if tax.matches(o, p)) == 1:
            return p
    return None


def _extreme_options(tracker: Tracker, subtype: str) -> list[dict]:
    scene, tax = tracker.scene, tracker.tax
    unknown = {oid for oid, s in tracker.presence.items() if s == UNKNOWN}
    out = []
    if subtype == "extreme-pic":
        for d in DIRECTIONS:
            o = extreme_object(scene.objects, d)
            if o.id in unknown:
                out.append({"p_set": full_set(o), "location": d})
        return out
    surfaces = supporting_objects(scene)
    if subtype == "extreme-obj":
        for anchor in surfaces:
            x2 = _unique_description(anchor, surfaces, tax)
            if x2 is None:
                continue
            kids = scene.children_of(anchor.id)
            for d in DIRECTIONS:
                o = extreme_object(kids, d)
                if o.id in unknown:
                    out.append({"p_set_1": full_set(o), "p_set_2": x2, "location": d})
        return out
    groups: set[PropertySet] = set()
    for s in surfaces:
        for p in tax.enumerate_property_sets(s):
            if not p.is_identifier and p.category is not None:
                groups.add(p)
    for x2 in sorted(groups, key=PropertySet.sort_key):
        members = [s for s in surfaces if tax.matches(s, x2)]
        if len(members) < 2:
            continue
        for d2 in DIRECTIONS:
            kids = scene.children_of(extreme_object(members, d2).id)
            for d1 in DIRECTIONS:
                o = extreme_object(kids, d1)
                if o.id in unknown:
                    out.append({"p_set_1": full_set(o), "p_set_2": x2, "location_1": d1, "location_2": d2})
    return out


def _query_options(tracker: Tracker, subtype: str) -> list[dict]:
    scene, tax = tracker.scene, tracker.tax
    which = "color" if subtype == "query-color" else "material"
    out = []
    for oid in tracker.s_cand:
        o = scene[oid]
        value = getattr(o, which)
        node = PropertySet(color=value) if which == "color" else PropertySet(material=value)
        if tracker.graphs[oid].is_confirmed(node):
            continue
        for p in sorted(tax.enumerate_property_sets(o), key=PropertySet.sort_key):
            if p.is_identifier or getattr(p, which) is not None:
                continue
            if sum(1 for other in scene.objects if tax.matches(other, p)) == 1:
                out.append({"p_set": p, which: value})
    return out


def _refer_options(tracker: Tracker, subtype: str, history: History) -> list[dict]:
    if not history or history[-1][0].type != "count" or history[-1][1].kind != "count":
        return []
    n = history[-1][1].count
    if n == 0 or (subtype == "ref-it") != (n == 1):
        return []
    p = history[-1][0].slots["p_set"]
    if not any(tracker.presence[o.id] == UNKNOWN for o in tracker.matching(p)):
        return []
    return [{"p_set": p}]


def slot_options(tracker: Tracker, subtype: str, history: History = ()) -> list[dict]:
    """Slot fillings of an extreme/query/refer question that can still teach the questioner something."""
    if subtype in EXTREME_SUBTYPES:
        options = _extreme_options(tracker, subtype)
    elif subtype in QUERY_SUBTYPES:
        options = _query_options(tracker, subtype)
    elif subtype in REFER_SUBTYPES:
        options = _refer_options(tracker, subtype, history)
    else:
        raise ValueError(f"{subtype} has no enumerated slot options")
    asked = _asked(history)
    return [s for s in options if QuestionAction(subtype, s).key() not in asked]


def select_other_slots(tracker: Tracker, subtype: str, rng: random.Random, history: History = ()) -> dict | None:
    """Uniform sample from ``slot_options``; None if there are none."""
    options = slot_options(tracker, subtype, history)
    return rng.choice(options) if options else None


def forced_guess(tracker: Tracker) -> GuessAction:
    """Best guess without a resolved target: the candidate with the fewest confirmed nodes."""
    pool = tracker.s_cand or [oid for oid, s in tracker.presence.items() if s == UNKNOWN] \
        or [o.id for o in tracker.scene.objects]
    best = min(pool, key=lambda oid: len(tracker.graphs[oid].confirmed))
    return GuessAction(best, forced=True)


class Questioner:
    def __init__(self, config: QuestionerConfig = QuestionerConfig(), rng: random.Random | None = None):
        self.config = config
        self.rng = rng or random.Random(0)

    def _count_question(self, tracker: Tracker, history: History, subtype: str) -> QuestionAction:
        p, mine = select_count_slots(tracker, history)
        if subtype == "count-nohint":
            return QuestionAction(subtype, {"p_set": p})
        if self.config.hint_noise and self.rng.random() < self.config.hint_noise:
            mine = mine + 1 if mine == 0 else mine + self.rng.choice((-1, 1))
        return QuestionAction(subtype, {"p_set": p, "count": mine})

    def next_step(self, tracker: Tracker, history: History) -> QuestionAction | GuessAction:
        resolved = tracker.resolved_target()
        if resolved is not None:
            return GuessAction(resolved)
        subtypes = allowed_types(tracker, history, self.config)
        while subtypes:
            subtype = self.rng.choice(subtypes)
            if subtype in COUNT_SUBTYPES:
                # the coin decides hint/no-hint; both share one availability check
                subtype = "count-hint" if self.rng.random() < self.config.hint_prob else "count-nohint"
                try:
                    return self._count_question(tracker, history, subtype)
                except Exhausted:
                    subtypes = [s for s in subtypes if s not in COUNT_SUBTYPES]
                    continue
            slots = select_other_slots(tracker, subtype, self.rng, history)
            if slots is not None:
                return QuestionAction(subtype, slots)
            subtypes.remove(subtype)
        return forced_guess(tracker)


def next_step(tracker: Tracker, history: History, rng: random.Random,
              config: QuestionerConfig = QuestionerConfig()) -> QuestionAction | GuessAction:
    return Questioner(config, rng).next_step(tracker, history)


# --- unconditioned question sampling (answerer tests and evaluation) -------


def random_question(scene: SceneGraph, subtype: str, rng: random.Random,
                    tax: Taxonomy | None = None) -> tuple[QuestionAction, list]:
    """A well-formed but strategy-free question for ``scene`` plus the history it needs."""
    tax = tax or default_taxonomy()

    def some_set(with_category: bool = False) -> PropertySet:
        o = rng.choice(scene.objects)
        if rng.random() < 0.2:  # something possibly absent from the scene
            cat, col, mat = rng.choice(tax.signatures())
            o = ObjectInstance("_", "_", cat, col, mat, 0, 0, 0, 1, 1, 1)
        sets = sorted((p for p in tax.enumerate_property_sets(o)
                       if not p.is_identifier and (p.category is not None or not with_category)),
                      key=PropertySet.sort_key)
        return rng.choice(sets)

    history: list = []
    if subtype in COUNT_SUBTYPES:
        p = some_set()
        slots = {"p_set": p} if subtype == "count-nohint" else {"p_set": p, "count": rng.randint(0, 5)}
    elif subtype == "extreme-pic":
        slots = {"p_set": some_set(), "location": rng.choice(DIRECTIONS)}
    elif subtype == "extreme-obj":
        slots = {"p_set_1": some_set(), "p_set_2": some_set(True), "location": rng.choice(DIRECTIONS)}
    elif subtype == "extreme-obj2":
        slots = {"p_set_1": some_set(), "p_set_2": some_set(True),
                 "location_1": rng.choice(DIRECTIONS), "location_2": rng.choice(DIRECTIONS)}
    elif subtype in QUERY_SUBTYPES:
        which = "color" if subtype == "query-color" else "material"
        vocab = tax.colors if which == "color" else tax.materials
        slots = {"p_set": some_set(), which: rng.choice(vocab)}
    else:
        p = some_set()
        count_q = QuestionAction("count-nohint", {"p_set": p})
        history.append((count_q, oracle_answer(scene, count_q, (), tax)))
        slots = {"p_set": p}
    return QuestionAction(subtype, slots), history
