"""Evaluation metrics over action-annotated dialogs."""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .actions import SUBTYPES, QuestionAction
from .asim import Answerer, NoisyAnswerer, OracleAnswerer, count_objects, oracle_answer
from .config import RunConfig
from .pipeline import Dataset, DialogRecord, derive_seed, run_episode
from .qsim import random_question
from .scene import SceneGraph
from .taxonomy import PropertySet, Taxonomy, default_taxonomy

BUCKET_EDGES = (0.0, 0.25, 0.5, 0.75, 1.0)
DEEPENING, CONVERTING = "deepening", "converting"


def task_success(records: Iterable[DialogRecord]) -> float:
    records = list(records)
    if not records:
        raise ValueError("success rate of an empty record set is undefined")
    return sum(r.success for r in records) / len(records)


# --- category-generalising count questions --------------------------------


def extract_cateq(record: DialogRecord, scene_q: SceneGraph,
                  tax: Taxonomy | None = None) -> list[tuple[PropertySet, int | None]]:
    """Count questions whose property set covers at least two different leaf categories in ``scene_q``."""
    tax = tax or default_taxonomy()
    out = []
    for r in record.rounds:
        q = r.question
        if q.type != "count":
            continue
        p = q.slots["p_set"]
        kinds = {o.category for o in scene_q.objects if tax.matches(o, p)}
        if len(kinds) >= 2:
            out.append((p, q.slots.get("count")))
    return out


def cateq_accuracy(record: DialogRecord, scene_q: SceneGraph, tax: Taxonomy | None = None) -> float | None:
    tax = tax or default_taxonomy()
    hinted = [(p, c) for p, c in extract_cateq(record, scene_q, tax) if c is not None]
    if not hinted:
        return None
    return sum(c == count_objects(scene_q, p, tax) for p, c in hinted) / len(hinted)


def recall(found: Iterable[PropertySet], reference: Iterable[PropertySet]) -> float | None:
    a, b = set(found), set(reference)
    if not b:
        return None
    return len(a & b) / len(b)


def cateq_recall(record: DialogRecord, reference: DialogRecord, scene_q: SceneGraph,
                 tax: Taxonomy | None = None) -> float | None:
    """Share of the reference dialog's Cate-Q sets that the evaluated dialog also asks; None if it has none."""
    tax = tax or default_taxonomy()
    return recall((p for p, _ in extract_cateq(record, scene_q, tax)),
                  (p for p, _ in extract_cateq(reference, scene_q, tax)))


# --- action transitions ---------------------------------------------------


def classify_transition(q_prev: QuestionAction, q_next: QuestionAction, tax: Taxonomy | None = None) -> str:
    """Deepening when the second question strictly refines the first one's property set.

    Refer questions carry their antecedent's set, so they take part like the
    count question they refer to.
    """
    tax = tax or default_taxonomy()
    a, b = q_prev.p_set, q_next.p_set
    if a is None or b is None:
        raise ValueError("both questions need a property set")
    return DEEPENING if a != b and tax.entails(b, a) else CONVERTING


def dialog_transitions(record: DialogRecord, tax: Taxonomy | None = None) -> list[str]:
    qs = [r.question for r in record.rounds]
    return [classify_transition(a, b, tax) for a, b in zip(qs, qs[1:])]


# --- answerer accuracy ----------------------------------------------------


def answer_accuracy_by_subtype(answerer: Answerer, scenes: Sequence[SceneGraph], n_per_subtype: int = 1000,
                               seed: int = 0, tax: Taxonomy | None = None) -> dict[str, float]:
    """Per subtype, the share of ``answerer``'s answers equal to the oracle's on random questions."""
    tax = tax or default_taxonomy()
    if not scenes:
        raise ValueError("no scenes to ask about")
    rng = random.Random(seed)
    out = {}
    for sub in SUBTYPES:
        hits = 0
        for _ in range(n_per_subtype):
            scene = rng.choice(scenes)
            q, history = random_question(scene, sub, rng, tax)
            hits += answerer(scene, q, history) == oracle_answer(scene, q, history, tax)
        out[sub] = hits / n_per_subtype
    return out


# --- report ---------------------------------------------------------------


def _bucket(v: float) -> int:
    for i in range(len(BUCKET_EDGES) - 2):
        if v < BUCKET_EDGES[i + 1]:
            return i
    return len(BUCKET_EDGES) - 2


def bucketed_success(values: Sequence[float | None], successes: Sequence[bool]) -> list[dict]:
    """Success rate per bucket of ``values``; records whose value is None are skipped."""
    n = [0] * (len(BUCKET_EDGES) - 1)
    ok = [0] * len(n)
    for v, s in zip(values, successes):
        if v is None:
            continue
        b = _bucket(v)
        n[b] += 1
        ok[b] += bool(s)
    return [{"low": BUCKET_EDGES[i], "high": BUCKET_EDGES[i + 1], "dialogs": n[i],
             "success_rate": ok[i] / n[i] if n[i] else None} for i in range(len(n))]


@dataclass
class MetricsReport:
    success_rate: float
    dialogs: int
    cateq_accuracy_histogram: list[dict]
    cateq_recall_histogram: list[dict]
    transition_table: dict[str, dict]
    per_subtype_accuracy: dict[str, float] = field(default_factory=dict)
    bucket_edges: tuple[float, ...] = BUCKET_EDGES

    def to_json(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}

    def format(self) -> str:
        def rate(v: float | None) -> str:
            return "   -  " if v is None else f"{100 * v:6.2f}"

        lines = [f"SUCC {100 * self.success_rate:.2f}% over {self.dialogs} dialogs", "",
                 "Cate-Q accuracy bucket   dialogs   SUCC%"]
        for b in self.cateq_accuracy_histogram:
            lines.append(f"  [{b['low']:.2f}, {b['high']:.2f}{']' if b['high'] == 1 else ')'}"
                         f"          {b['dialogs']:5d}  {rate(b['success_rate'])}")
        lines += ["", "Cate-Q recall bucket     dialogs   SUCC%"]
        for b in self.cateq_recall_histogram:
            lines.append(f"  [{b['low']:.2f}, {b['high']:.2f}{']' if b['high'] == 1 else ')'}"
                         f"          {b['dialogs']:5d}  {rate(b['success_rate'])}")
        lines += ["", "transition        pairs   SUCC%"]
        for k, v in self.transition_table.items():
            lines.append(f"  {k:<14}{v['transitions']:7d}  {rate(v['success_rate'])}")
        if self.per_subtype_accuracy:
            lines += ["", "answer accuracy by subtype"]
            lines += [f"  {k:<16}{100 * v:6.2f}" for k, v in self.per_subtype_accuracy.items()]
        return "\n".join(lines)


def build_report(records: Sequence[DialogRecord], scenes_q: Sequence[SceneGraph],
                 references: Sequence[DialogRecord] | None = None, per_subtype_accuracy: dict | None = None,
                 tax: Taxonomy | None = None) -> MetricsReport:
    """``scenes_q[i]`` is the questioner scene of ``records[i]``; ``references[i]`` its reference dialog."""
    tax = tax or default_taxonomy()
    succ = [r.success for r in records]
    acc = [cateq_accuracy(r, s, tax) for r, s in zip(records, scenes_q)]
    if references is not None:
        rec = [cateq_recall(r, ref, s, tax) for r, ref, s in zip(records, references, scenes_q)]
    else:
        rec = [None] * len(records)
    table = {DEEPENING: [0, 0], CONVERTING: [0, 0]}
    for r in records:
        for t in dialog_transitions(r, tax):
            table[t][0] += 1
            table[t][1] += r.success
    return MetricsReport(
        success_rate=task_success(records),
        dialogs=len(records),
        cateq_accuracy_histogram=bucketed_success(acc, succ),
        cateq_recall_histogram=bucketed_success(rec, succ),
        transition_table={k: {"transitions": n, "success_rate": ok / n if n else None}
                          for k, (n, ok) in table.items()},
        per_subtype_accuracy=dict(per_subtype_accuracy or {}),
    )


def replay(dataset: Dataset, epsilon: float = 0.0, tax: Taxonomy | None = None) -> list[DialogRecord]:
    """Re-run every retained dialog's game with a (possibly noisy) answerer.

    Questioner and text seeds match the original run, so an oracle replay
    reproduces the dataset. Every replayed game ends in a guess.
    """
    tax = tax or default_taxonomy()
    config = RunConfig.from_dict(dataset.manifest["config"])
    out = []
    for r in dataset.retained():
        seed = derive_seed(config.seed, "episode", r.pair_id, r.orientation)
        answerer = NoisyAnswerer(epsilon, derive_seed(seed, "eval", epsilon), tax) if epsilon else OracleAnswerer(tax)
        out.append(run_episode(dataset.pairs[r.pair_id], r.orientation, seed, answerer=answerer,
                               questioner_config=config.questioner_config(), max_rounds=config.max_rounds,
                               tax=tax, pair_id=r.pair_id))
    return out


def evaluate_dataset(dataset: Dataset, epsilon: float = 0.0, n_per_subtype: int = 1000, seed: int = 0,
                     tax: Taxonomy | None = None) -> MetricsReport:
    tax = tax or default_taxonomy()
    references = dataset.retained()
    if not references:
        raise ValueError("dataset has no retained dialogs")
    records = replay(dataset, epsilon, tax)
    scenes_q = [dataset.pairs[r.pair_id].oriented(r.orientation)[0] for r in references]
    answerer = NoisyAnswerer(epsilon, seed, tax) if epsilon else OracleAnswerer(tax)
    scenes = [s for p in dataset.pairs.values() for s in (p.scene_q, p.scene_a)]
    acc = answer_accuracy_by_subtype(answerer, scenes, n_per_subtype, seed, tax) if n_per_subtype else {}
    return build_report(records, scenes_q, references, acc, tax)
