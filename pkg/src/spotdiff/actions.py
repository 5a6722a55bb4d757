"""Dialog actions exchanged between questioner and answerer."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from .taxonomy import PropertySet

COUNT_SUBTYPES = ("count-nohint", "count-hint")
EXTREME_SUBTYPES = ("extreme-pic", "extreme-obj", "extreme-obj2")
QUERY_SUBTYPES = ("query-color", "query-material")
REFER_SUBTYPES = ("ref-it", "ref-them")
SUBTYPES = COUNT_SUBTYPES + EXTREME_SUBTYPES + QUERY_SUBTYPES + REFER_SUBTYPES
QUESTION_TYPES = {
    "count": COUNT_SUBTYPES,
    "extreme": EXTREME_SUBTYPES,
    "query": QUERY_SUBTYPES,
    "refer": REFER_SUBTYPES,
}
DIRECTIONS = ("left", "right", "front", "back")

# slot name -> kind ("pset", "direction", "count", "color", "material")
SLOT_SCHEMAS: dict[str, dict[str, str]] = {
    "count-nohint": {"p_set": "pset"},
    "count-hint": {"p_set": "pset", "count": "count"},
    "extreme-pic": {"p_set": "pset", "location": "direction"},
    "extreme-obj": {"p_set_1": "pset", "p_set_2": "pset", "location": "direction"},
    "extreme-obj2": {"p_set_1": "pset", "p_set_2": "pset", "location_1": "direction", "location_2": "direction"},
    "query-color": {"p_set": "pset", "color": "color"},
    "query-material": {"p_set": "pset", "material": "material"},
    # refer questions carry the antecedent count's property set
    "ref-it": {"p_set": "pset"},
    "ref-them": {"p_set": "pset"},
}


class ProtocolError(ValueError):
    """An action does not fit the slot schema or the dialog state."""


def question_type(subtype: str) -> str:
    for t, subs in QUESTION_TYPES.items():
        if subtype in subs:
            return t
    raise ProtocolError(f"unknown subtype {subtype!r}")


@dataclass(frozen=True)
class QuestionAction:
    subtype: str
    slots: dict[str, Any] = field(default_factory=dict, hash=False)

    def __post_init__(self) -> None:
        schema = SLOT_SCHEMAS.get(self.subtype)
        if schema is None:
            raise ProtocolError(f"unknown subtype {self.subtype!r}")
        if set(self.slots) != set(schema):
            raise ProtocolError(f"{self.subtype}: slots {sorted(self.slots)} != {sorted(schema)}")
        for name, kind in schema.items():
            v = self.slots[name]
            if kind == "pset" and not (isinstance(v, PropertySet) and not v.is_identifier):
                raise ProtocolError(f"{self.subtype}.{name} must be a non-identifier property set")
            if kind == "direction" and v not in DIRECTIONS:
                raise ProtocolError(f"{self.subtype}.{name}: bad direction {v!r}")
            if kind == "count" and not (isinstance(v, int) and v >= 0):
                raise ProtocolError(f"{self.subtype}.{name}: bad count {v!r}")

    @property
    def type(self) -> str:
        return question_type(self.subtype)

    @property
    def p_set(self) -> PropertySet | None:
        """The property set the question is about (the anchor-independent one)."""
        return self.slots.get("p_set", self.slots.get("p_set_1"))

    def key(self) -> tuple:
        return (self.subtype, tuple(sorted((k, v if not isinstance(v, PropertySet) else v.sort_key())
                                           for k, v in self.slots.items())))

    def __hash__(self) -> int:
        return hash(self.key())

    def __eq__(self, other: object) -> bool:
        return isinstance(other, QuestionAction) and self.key() == other.key()

    def to_json(self) -> dict:
        return {"subtype": self.subtype,
                "slots": {k: v.to_json() if isinstance(v, PropertySet) else v for k, v in sorted(self.slots.items())}}

    @classmethod
    def from_json(cls, d: dict) -> "QuestionAction":
        schema = SLOT_SCHEMAS[d["subtype"]]
        slots = {k: PropertySet.from_json(v) if schema.get(k) == "pset" else v for k, v in d["slots"].items()}
        return cls(d["subtype"], slots)


@dataclass(frozen=True)
class AnswerAction:
    """kind is one of count / description / attribute / none.

    ``items`` holds (description, multiplicity) pairs for description answers;
    ``reason`` is ``"absent"`` or ``"ambiguous"`` for none answers.
    """

    kind: str
    count: int | None = None
    items: tuple[tuple[PropertySet, int], ...] = ()
    value: str | None = None
    reason: str | None = None

    @classmethod
    def of_count(cls, n: int) -> "AnswerAction":
        return cls("count", count=n)

    @classmethod
    def of_items(cls, items) -> "AnswerAction":
        return cls("description", items=tuple(items))

    @classmethod
    def of_value(cls, v: str) -> "AnswerAction":
        return cls("attribute", value=v)

    @classmethod
    def none(cls, reason: str = "absent") -> "AnswerAction":
        return cls("none", reason=reason)

    @property
    def total(self) -> int:
        return sum(n for _, n in self.items)

    def to_json(self) -> dict:
        d: dict[str, Any] = {"kind": self.kind}
        if self.kind == "count":
            d["count"] = self.count
        elif self.kind == "description":
            d["items"] = [[p.to_json(), n] for p, n in self.items]
        elif self.kind == "attribute":
            d["value"] = self.value
        else:
            d["reason"] = self.reason
        return d

    @classmethod
    def from_json(cls, d: dict) -> "AnswerAction":
        return cls(d["kind"], d.get("count"), tuple((PropertySet.from_json(p), n) for p, n in d.get("items", [])),
                   d.get("value"), d.get("reason"))


def check_answer_kind(question: QuestionAction, answer: AnswerAction) -> None:
    t = question.type
    ok = {
        "count": ("count",),
        "extreme": ("description", "none"),
        "refer": ("description", "none"),
        "query": ("attribute", "none"),
    }[t]
    if answer.kind not in ok:
        raise ProtocolError(f"{answer.kind} answer to a {question.subtype} question")


@dataclass(frozen=True)
class GuessAction:
    object_id: str
    forced: bool = False

    def to_json(self) -> dict:
        return {"object_id": self.object_id, "forced": self.forced}

    @classmethod
    def from_json(cls, d: dict) -> "GuessAction":
        return cls(d["object_id"], d.get("forced", False))
