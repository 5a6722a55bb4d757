"""Questioner-side visual state: per-object state graphs and the candidate set."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable

from .actions import AnswerAction, QuestionAction, check_answer_kind
from .asim import describe_group, extreme_members, extreme_object, item_counter
from .scene import ObjectInstance, SceneGraph
from .taxonomy import PropertySet, Taxonomy, default_taxonomy, full_set, identifier_set

UNKNOWN, VERIFIED, REFUTED = "unknown", "verified", "refuted"


class InconsistencyError(RuntimeError):
    """The evidence contradicts itself (only possible with an untruthful answerer or a rule bug)."""


class ObjectStateGraph:
    """Property sets of one object, linked by entailment, each with a confirmation flag.

    ``reach[a]`` holds every node strictly entailed by ``a`` (the transitive
    relation is stored directly). The identifier node counts as confirmed once
    the object's full description is.
    """

    def __init__(self, obj: ObjectInstance, tax: Taxonomy):
        self.object_id = obj.id
        nodes = tax.enumerate_property_sets(obj)
        self.nodes = frozenset(nodes)
        self.reach = {a: frozenset(b for b in nodes if b != a and tax.entails(a, b)) for a in nodes}
        self.full = full_set(obj)
        self.ident = identifier_set(obj)
        self.confirmed: set[PropertySet] = set()

    def copy(self) -> "ObjectStateGraph":
        g = object.__new__(ObjectStateGraph)
        g.__dict__.update(self.__dict__)
        g.confirmed = set(self.confirmed)
        return g

    @property
    def edges(self) -> set[tuple[PropertySet, PropertySet]]:
        return {(a, b) for a, bs in self.reach.items() for b in bs}

    def is_confirmed(self, p: PropertySet) -> bool:
        return p in self.confirmed

    def unconfirmed(self) -> list[PropertySet]:
        return [n for n in self.nodes if n not in self.confirmed]

    @property
    def fully_confirmed(self) -> bool:
        return len(self.confirmed) == len(self.nodes)

    def confirm(self, p: PropertySet) -> "ObjectStateGraph":
        if p not in self.nodes:
            raise KeyError(f"{p} is not a node of {self.object_id}")
        if p in self.confirmed:
            return self
        self.confirmed.add(p)
        self.confirmed |= self.reach[p]
        changed = True
        while changed:
            changed = False
            plain = [n for n in self.confirmed if not n.is_identifier]
            for i, a in enumerate(plain):
                for b in plain[i + 1:]:
                    u = a.union(b)
                    if u is not None and u in self.nodes and u not in self.confirmed:
                        self.confirmed.add(u)
                        self.confirmed |= self.reach[u]
                        changed = True
            if self.full in self.confirmed and self.ident not in self.confirmed:
                self.confirmed.add(self.ident)
                changed = True
        return self


def build_state_graph(obj: ObjectInstance, tax: Taxonomy | None = None) -> ObjectStateGraph:
    return ObjectStateGraph(obj, tax or default_taxonomy())


@dataclass
class Tracker:
    """Everything the questioner knows about its own scene versus the answerer's."""

    scene: SceneGraph
    tax: Taxonomy = field(default_factory=default_taxonomy)
    graphs: dict[str, ObjectStateGraph] = field(init=False)
    presence: dict[str, str] = field(init=False)
    evidence_log: list[tuple[QuestionAction, AnswerAction]] = field(init=False, default_factory=list)

    def __post_init__(self) -> None:
        self.graphs = {o.id: ObjectStateGraph(o, self.tax) for o in self.scene.objects}
        self.presence = {o.id: UNKNOWN for o in self.scene.objects}

    # --- views -----------------------------------------------------------

    @property
    def s_cand(self) -> list[str]:
        return [o.id for o in self.scene.objects
                if self.presence[o.id] == UNKNOWN and not self.graphs[o.id].fully_confirmed]

    def matching(self, p: PropertySet) -> list[ObjectInstance]:
        return [o for o in self.scene.objects if self.tax.matches(o, p)]

    def frequency(self, p: PropertySet) -> int:
        return sum(1 for oid in self.s_cand
                   if p in self.graphs[oid].nodes and p not in self.graphs[oid].confirmed)

    def frequencies(self) -> Counter:
        """Frequency of every non-identifier set that is unconfirmed somewhere in the candidate set."""
        freq: Counter = Counter()
        for oid in self.s_cand:
            g = self.graphs[oid]
            for n in g.nodes:
                if not n.is_identifier and n not in g.confirmed:
                    freq[n] += 1
        return freq

    def confirmed_total(self) -> int:
        return sum(len(g.confirmed) for g in self.graphs.values())

    def resolved_target(self) -> str | None:
        refuted = [oid for oid, s in self.presence.items() if s == REFUTED]
        if len(refuted) > 1:
            raise InconsistencyError(f"several objects refuted: {refuted}")
        if refuted:
            return refuted[0]
        cand = self.s_cand
        return cand[0] if len(cand) == 1 else None

    def snapshot(self) -> dict:
        cand = set(self.s_cand)
        out = {}
        for o in self.scene.objects:
            g = self.graphs[o.id]
            out[o.id] = {
                "presence": self.presence[o.id],
                "candidate": o.id in cand,
                "confirmed": sorted(str(n) for n in g.confirmed),
                "unconfirmed": sorted(str(n) for n in g.unconfirmed()),
            }
        return out

    # --- updates ---------------------------------------------------------

    def _verify(self, oids: Iterable[str]) -> None:
        for oid in oids:
            if self.presence[oid] == UNKNOWN:
                self.presence[oid] = VERIFIED

    def _refute(self, oid: str) -> None:
        if self.presence[oid] == VERIFIED:
            raise InconsistencyError(f"{oid} was verified and is now refuted")
        self.presence[oid] = REFUTED

    def apply_answer(self, question: QuestionAction, answer: AnswerAction) -> "Tracker":
        check_answer_kind(question, answer)
        handler = getattr(self, "_apply_" + question.type)
        handler(question, answer)
        self.evidence_log.append((question, answer))
        return self

    def _apply_count(self, q: QuestionAction, a: AnswerAction) -> None:
        p = q.slots["p_set"]
        matchers = self.matching(p)
        delta = len(matchers) - a.count
        if delta == 0:
            cand = set(self.s_cand)
            for o in matchers:
                if o.id in cand:
                    self.graphs[o.id].confirm(p)
        elif delta == 1:
            inside = {o.id for o in matchers}
            self._verify(oid for oid in self.presence if oid not in inside)
        elif delta == -1:
            self._verify(o.id for o in matchers)

    def _apply_extreme(self, q: QuestionAction, a: AnswerAction) -> None:
        members = extreme_members(self.scene, q, self.tax)
        if isinstance(members, AnswerAction) or not members or a.kind != "description" or a.total != 1:
            return
        direction = q.slots.get("location", q.slots.get("location_1"))
        mine = extreme_object(members, direction)
        if a.items[0][0] == full_set(mine):
            self._verify([mine.id])
        else:
            self._refute(mine.id)

    def _apply_query(self, q: QuestionAction, a: AnswerAction) -> None:
        found = self.matching(q.slots["p_set"])
        if len(found) != 1:
            return
        o = found[0]
        which = "color" if q.subtype == "query-color" else "material"
        if a.kind == "none":
            if a.reason == "absent":
                self._refute(o.id)
            else:
                self._verify([o.id])
        elif a.value == getattr(o, which):
            node = PropertySet(color=a.value) if which == "color" else PropertySet(material=a.value)
            if self.presence[o.id] == UNKNOWN:
                self.graphs[o.id].confirm(node)
        else:
            self._refute(o.id)

    def _apply_refer(self, q: QuestionAction, a: AnswerAction) -> None:
        if not self.evidence_log or self.evidence_log[-1][0].type != "count":
            return
        p = self.evidence_log[-1][0].slots["p_set"]
        observed = item_counter(a) if a.kind == "description" else Counter()
        mine = [o.signature for o in self.matching(p)]
        for oid in refer_inconsistent(mine, observed, p, self.scene, self.presence, self.tax):
            self._verify([oid])


def _described(signatures) -> Counter:
    c: Counter = Counter()
    for d, n in describe_group(signatures):
        c[d] += n
    return c


def _signature_matches(sig: tuple[str, str, str], p: PropertySet, tax: Taxonomy) -> bool:
    cat, col, mat = sig
    return tax.entails(PropertySet(col, mat, cat), p)


def refer_inconsistent(mine: list[tuple[str, str, str]], observed: Counter, p: PropertySet, scene: SceneGraph,
                       presence: dict[str, str], tax: Taxonomy) -> list[str]:
    """Objects that cannot be the target given a refer answer.

    For every still-unknown object x the hypothesis "x was replaced" is kept if
    some replacement from the catalog reproduces the observed enumeration.
    """
    replacements = [s for s in tax.signatures() if _signature_matches(s, p, tax)]
    no_change_inside = None
    out = []
    for o in scene.objects:
        if presence[o.id] != UNKNOWN:
            continue
        if _signature_matches(o.signature, p, tax):
            rest = list(mine)
            rest.remove(o.signature)
            ok = _described(rest) == observed or any(
                _described(rest + [r]) == observed for r in replacements if r != o.signature)
        else:
            if no_change_inside is None:
                no_change_inside = _described(mine) == observed or any(
                    _described(mine + [r]) == observed for r in replacements)
            ok = no_change_inside
        if not ok:
            out.append(o.id)
    return out
