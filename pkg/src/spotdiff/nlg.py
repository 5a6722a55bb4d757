"""Template-based surface realisation of questions and answers."""
from __future__ import annotations

import random
import re
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import yaml

from .actions import SUBTYPES, AnswerAction, QuestionAction
from .taxonomy import PropertySet, Taxonomy, _data_path, default_taxonomy

NUMBER_WORDS = ("zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten")
MARKER = re.compile(r"\[(f\(X[12]?\)|C|A|M|L[12]?)\]")

# markers each subtype may use; [C] is a count except in query-color
ALLOWED_MARKERS = {
    "count-nohint": {"f(X)"},
    "count-hint": {"f(X)", "C", "A"},
    "extreme-pic": {"f(X)", "L"},
    "extreme-obj": {"f(X1)", "f(X2)", "L"},
    "extreme-obj2": {"f(X1)", "f(X2)", "L1", "L2"},
    "query-color": {"f(X)", "C"},
    "query-material": {"f(X)", "M"},
    "ref-it": set(),
    "ref-them": set(),
}
TRANSITION_GROUPS = ("same", "diff", "more", "less")


class TemplateError(ValueError):
    pass


def number_word(n: int) -> str:
    return NUMBER_WORDS[n] if 0 <= n < len(NUMBER_WORDS) else str(n)


def _pluralize(noun: str) -> str:
    if noun.endswith(("s", "x", "ch", "sh")):
        return noun + "es"
    if noun.endswith("y") and noun[-2:-1] not in "aeiou":
        return noun[:-1] + "ies"
    return noun + "s"


def _article(phrase: str) -> str:
    return ("an " if phrase[:1].lower() in "aeiou" else "a ") + phrase


def _capitalize(s: str) -> str:
    return s[:1].upper() + s[1:]


@dataclass(frozen=True)
class TemplateBank:
    questions: dict[str, tuple[str, ...]]
    transitions: dict[str, tuple[str, ...]]
    none_answers: dict[str, tuple[str, ...]]

    @property
    def template_count(self) -> int:
        """Question templates plus count-hint transition sentences."""
        return sum(map(len, self.questions.values())) + sum(map(len, self.transitions.values()))

    def validate(self) -> None:
        for sub in SUBTYPES:
            if not self.questions.get(sub):
                raise TemplateError(f"no template for {sub}")
        for sub, temps in self.questions.items():
            if sub not in ALLOWED_MARKERS:
                raise TemplateError(f"templates for unknown subtype {sub!r}")
            for t in temps:
                leftover = MARKER.sub("", t)
                if "[" in leftover or "]" in leftover:
                    raise TemplateError(f"malformed marker in {t!r}")
                extra = set(MARKER.findall(t)) - ALLOWED_MARKERS[sub]
                if extra:
                    raise TemplateError(f"{sub}: {t!r} uses {sorted(extra)}")
        for g in TRANSITION_GROUPS:
            if not self.transitions.get(g):
                raise TemplateError(f"no transition sentence for {g!r}")
        for r in ("absent", "ambiguous"):
            if not self.none_answers.get(r):
                raise TemplateError(f"no phrase for a {r} answer")


def load_templates(path: str | Path | None = None) -> TemplateBank:
    d = yaml.safe_load(Path(path or _data_path("templates.yaml")).read_text())
    bank = TemplateBank({k: tuple(v) for k, v in d["questions"].items()},
                        {k: tuple(v) for k, v in d["transitions"].items()},
                        {k: tuple(v) for k, v in d["none_answers"].items()})
    bank.validate()
    return bank


class PhraseCatalog:
    """Singular/plural phrase variants for every property set, plus the inverse map."""

    def __init__(self, tax: Taxonomy, nouns_path: str | Path | None = None):
        d = yaml.safe_load(Path(nouns_path or _data_path("nouns.yaml")).read_text())
        self.tax = tax
        self.generic = [tuple(v) for v in d["generic"]]
        self.irregular = {k: tuple(v) for k, v in d["irregular"].items()}
        unknown = set(self.irregular) - set(tax.categories)
        if unknown:
            raise TemplateError(f"noun forms for unknown categories {sorted(unknown)}")
        self._inverse: dict[str, PropertySet] | None = None

    def forms(self, pset: PropertySet) -> list[tuple[str, str]]:
        """(singular, plural) variants; adjectives go colour first, then material."""
        p = pset.describe()
        adj = "".join(a + " " for a in (p.color, p.material) if a)
        if p.category is None:
            pats = self.generic
        else:
            pats = [self.irregular.get(p.category, ("{}" + p.category, "{}" + _pluralize(p.category)))]
        return [(s.format(adj), pl.format(adj)) for s, pl in pats]

    def phrase(self, pset: PropertySet, count: int = 1, rng: random.Random | None = None) -> str:
        variants = self.forms(pset)
        s, pl = rng.choice(variants) if rng is not None and len(variants) > 1 else variants[0]
        return s if count == 1 else pl

    def inverse(self) -> dict[str, PropertySet]:
        if self._inverse is None:
            inv: dict[str, PropertySet] = {}
            for p in self.tax.iter_askable_sets():
                for pair in self.forms(p):
                    for text in pair:
                        if inv.setdefault(text, p) != p:
                            raise TemplateError(f"{text!r} realises both {inv[text]} and {p}")
            self._inverse = inv
        return self._inverse

    def parse(self, text: str) -> PropertySet:
        return self.inverse()[text]


@lru_cache(maxsize=1)
def default_catalog() -> PhraseCatalog:
    return PhraseCatalog(default_taxonomy())


@lru_cache(maxsize=1)
def default_templates() -> TemplateBank:
    return load_templates()


def realize_property_set(pset: PropertySet, count: int = 1, rng: random.Random | None = None,
                         catalog: PhraseCatalog | None = None) -> str:
    return (catalog or default_catalog()).phrase(pset, count, rng)


class Realizer:
    """Turns actions into text. All randomness comes from the ``rng`` passed per call."""

    def __init__(self, templates: TemplateBank | None = None, catalog: PhraseCatalog | None = None):
        self.templates = templates or default_templates()
        self.catalog = catalog or default_catalog()

    def _fills(self, q: QuestionAction, rng: random.Random) -> dict[str, str]:
        s, ph = q.slots, self.catalog.phrase
        sub = q.subtype
        if sub == "count-nohint":
            return {"f(X)": ph(s["p_set"], 2, rng)}
        if sub == "count-hint":
            n = s["count"]
            return {"f(X)": ph(s["p_set"], n, rng), "C": number_word(n), "A": "is" if n == 1 else "are"}
        if sub == "extreme-pic":
            return {"f(X)": _article(ph(s["p_set"], 1, rng)), "L": s["location"]}
        if sub in ("extreme-obj", "extreme-obj2"):
            out = {"f(X1)": _article(ph(s["p_set_1"], 1, rng)), "f(X2)": ph(s["p_set_2"], 1, rng)}
            if sub == "extreme-obj":
                out["L"] = s["location"]
            else:
                out["L1"], out["L2"] = s["location_1"], s["location_2"]
            return out
        if sub == "query-color":
            return {"f(X)": ph(s["p_set"], 1, rng), "C": s["color"]}
        if sub == "query-material":
            return {"f(X)": ph(s["p_set"], 1, rng), "M": s["material"]}
        return {}

    def question(self, q: QuestionAction, rng: random.Random) -> str:
        template = rng.choice(self.templates.questions[q.subtype])
        fills = self._fills(q, rng)
        return _capitalize(MARKER.sub(lambda m: fills[m.group(1)], template))

    def _items(self, items) -> str:
        parts = [_article(self.catalog.phrase(p, 1)) if n == 1 else f"{number_word(n)} {self.catalog.phrase(p, n)}"
                 for p, n in items]
        text = parts[0] if len(parts) == 1 else ", ".join(parts[:-1]) + " and " + parts[-1]
        return _capitalize(text) + "."

    def answer(self, a: AnswerAction, q: QuestionAction, rng: random.Random) -> str:
        if a.kind == "count":
            if q.subtype != "count-hint":
                return _capitalize(number_word(a.count)) + "."
            diff = a.count - q.slots["count"]
            tr = self.templates.transitions
            if diff == 0:
                return rng.choice(tr["same"])
            own = tr["more"] if diff > 0 else tr["less"]
            if diff != 1:
                own = [t for t in own if "one more" not in t]
            return f"{rng.choice(list(tr['diff']) + list(own))} I have {number_word(a.count)}."
        if a.kind == "description":
            return self._items(a.items)
        if a.kind == "attribute":
            return _capitalize(a.value) + "."
        return rng.choice(self.templates.none_answers[a.reason])


@lru_cache(maxsize=1)
def default_realizer() -> Realizer:
    return Realizer()


def realize_question(q: QuestionAction, rng: random.Random) -> str:
    return default_realizer().question(q, rng)


def realize_answer(a: AnswerAction, q: QuestionAction, rng: random.Random) -> str:
    return default_realizer().answer(a, q, rng)
