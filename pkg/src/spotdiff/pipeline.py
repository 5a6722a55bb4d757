"""Self-play episodes, retention rules, dataset assembly and dataset statistics."""
from __future__ import annotations

import hashlib
import json
import logging
import random
import shutil
import tempfile
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .actions import COUNT_SUBTYPES, AnswerAction, GuessAction, QuestionAction
from .asim import Answerer, NoisyAnswerer, OracleAnswerer
from .config import RunConfig
from .nlg import Realizer, default_realizer
from .qsim import Questioner, QuestionerConfig, forced_guess
from .scene import (GenerationFailure, InjectionFailure, ScenePair, generate_scene, inject_difference,
                    pair_from_json, pair_to_json, project_bbox2d)
from .state import InconsistencyError, Tracker
from .taxonomy import Taxonomy, default_taxonomy

log = logging.getLogger(__name__)

DATASET_SCHEMA = "spotdiff.dataset/1"
SCENES_FILE, DIALOGS_FILE, MANIFEST_FILE = "scenes.jsonl", "dialogs.jsonl", "manifest.json"
ORIENTATIONS = ("qa", "aq")
SPLITS = ("train", "valid", "test")
OK, TIMEOUT, WRONG, FORCED, INCONSISTENT = "ok", "timeout", "wrong", "forced", "inconsistent"


class DatasetAbort(RuntimeError):
    """Generation could not finish; no output is left behind."""


def derive_seed(*parts: object) -> int:
    """Stable 63-bit seed from any sequence of printable parts."""
    digest = hashlib.sha256("/".join(map(str, parts)).encode()).digest()
    return int.from_bytes(digest[:8], "big") >> 1


# --- records --------------------------------------------------------------


@dataclass(frozen=True)
class Round:
    question: QuestionAction
    question_text: str
    answer: AnswerAction
    answer_text: str

    def to_json(self) -> dict:
        return {"question": self.question.to_json(), "question_text": self.question_text,
                "answer": self.answer.to_json(), "answer_text": self.answer_text}

    @classmethod
    def from_json(cls, d: dict) -> "Round":
        return cls(QuestionAction.from_json(d["question"]), d["question_text"],
                   AnswerAction.from_json(d["answer"]), d["answer_text"])


@dataclass(frozen=True)
class DialogRecord:
    pair_id: int
    orientation: str
    rounds: tuple[Round, ...]
    guess: GuessAction
    target_id: str
    status: str
    correct_object_list: tuple[tuple[str, str, tuple[float, ...]], ...]  # (id, category, bbox)
    split: str | None = None

    @property
    def success(self) -> bool:
        return self.guess.object_id == self.target_id

    @property
    def retained(self) -> bool:
        return self.status == OK

    def to_json(self) -> dict:
        return {
            "pair_id": self.pair_id,
            "orientation": self.orientation,
            "split": self.split,
            "rounds": [r.to_json() for r in self.rounds],
            "guess": self.guess.to_json(),
            "target_id": self.target_id,
            "success": self.success,
            "status": self.status,
            "correct_object_list": [{"id": i, "category": c, "bbox": list(b)} for i, c, b in self.correct_object_list],
        }

    @classmethod
    def from_json(cls, d: dict) -> "DialogRecord":
        return cls(d["pair_id"], d["orientation"], tuple(Round.from_json(r) for r in d["rounds"]),
                   GuessAction.from_json(d["guess"]), d["target_id"], d["status"],
                   tuple((o["id"], o["category"], tuple(o["bbox"])) for o in d["correct_object_list"]),
                   d.get("split"))


# --- episodes -------------------------------------------------------------


def run_episode(pair: ScenePair, orientation: str, seed: int, *, answerer: Answerer | None = None,
                questioner_config: QuestionerConfig = QuestionerConfig(), max_rounds: int = 10,
                realizer: Realizer | None = None, tax: Taxonomy | None = None, pair_id: int = 0) -> DialogRecord:
    """Play one game. The record always ends in a guess; ``status`` says whether it is kept.

    After ``max_rounds`` answers the questioner gets one last chance to name a
    resolved target; failing that the guess is forced and the status is timeout.
    """
    tax = tax or default_taxonomy()
    realizer = realizer or default_realizer()
    answerer = answerer or OracleAnswerer(tax)
    scene_q, scene_a, target, _ = pair.oriented(orientation)
    tracker = Tracker(scene_q, tax)
    questioner = Questioner(questioner_config, random.Random(derive_seed(seed, "questioner")))
    text_rng = random.Random(derive_seed(seed, "nlg"))
    history: list[tuple[QuestionAction, AnswerAction]] = []
    rounds: list[Round] = []
    guess: GuessAction | None = None
    status = OK
    try:
        while True:
            step = questioner.next_step(tracker, history)
            if isinstance(step, GuessAction):
                guess = step
                break
            if len(rounds) == max_rounds:
                break
            answer = answerer(scene_a, step, history)
            q_text = realizer.question(step, text_rng)
            a_text = realizer.answer(answer, step, text_rng)
            tracker.apply_answer(step, answer)
            history.append((step, answer))
            rounds.append(Round(step, q_text, answer, a_text))
    except InconsistencyError as e:
        log.warning("pair %s/%s aborted after %d rounds: %s", pair_id, orientation, len(rounds), e)
        status = INCONSISTENT
    if guess is None:
        guess = forced_guess(tracker)
        status = status if status == INCONSISTENT else TIMEOUT
    elif guess.forced:
        status = FORCED
    elif guess.object_id != target:
        status = WRONG
    elif not rounds:
        status = TIMEOUT  # nothing to learn from a dialog without rounds
    objects = tuple((o.id, o.category, tuple(project_bbox2d(scene_q, o).as_list())) for o in scene_q.objects)
    return DialogRecord(pair_id, orientation, tuple(rounds), guess, target, status, objects)


def run_selfplay(pair: ScenePair, orientation: str, config: RunConfig, seed: int,
                 answerer: Answerer | None = None) -> DialogRecord | None:
    """One episode under ``config``; None when the retention rules discard it."""
    rec = run_episode(pair, orientation, seed, answerer=answerer, questioner_config=config.questioner_config(),
                      max_rounds=config.max_rounds)
    return rec if rec.retained else None


# --- dataset --------------------------------------------------------------


def make_pair(config: RunConfig, pair_id: int, tax: Taxonomy | None = None) -> ScenePair:
    """Deterministic scene pair for ``pair_id``; reseeds on generation failure up to the retry budget."""
    scene_cfg = config.scene_config()
    base = derive_seed(config.seed, "pair", pair_id)
    last: Exception | None = None
    for attempt in range(config.retry_budget):
        rng = random.Random(derive_seed(base, attempt))
        try:
            return inject_difference(generate_scene(scene_cfg, rng, tax), rng, scene_cfg, tax)
        except (GenerationFailure, InjectionFailure) as e:
            last = e
    raise DatasetAbort(f"pair {pair_id}: no valid pair after {config.retry_budget} attempts ({last})")


def _pair_job(args: tuple[RunConfig, int]) -> tuple[dict, list[dict]]:
    config, pair_id = args
    pair = make_pair(config, pair_id)
    records = []
    for orientation in ORIENTATIONS:
        seed = derive_seed(config.seed, "episode", pair_id, orientation)
        answerer = NoisyAnswerer(config.epsilon, derive_seed(seed, "answerer")) if config.epsilon else None
        rec = run_episode(pair, orientation, seed, answerer=answerer,
                          questioner_config=config.questioner_config(), max_rounds=config.max_rounds,
                          pair_id=pair_id)
        records.append(rec.to_json())
    return pair_to_json(pair), records


def assign_splits(n_pairs: int, ratios: Sequence[float], seed: int) -> dict[int, str]:
    ids = list(range(n_pairs))
    random.Random(derive_seed(seed, "split")).shuffle(ids)
    n_train = round(ratios[0] * n_pairs)
    n_valid = min(round(ratios[1] * n_pairs), n_pairs - n_train)
    out = {}
    for k, pid in enumerate(ids):
        out[pid] = "train" if k < n_train else "valid" if k < n_train + n_valid else "test"
    return out


@dataclass
class Dataset:
    manifest: dict
    pairs: dict[int, ScenePair]
    splits: dict[int, str]
    records: list[DialogRecord] = field(default_factory=list)

    def retained(self) -> list[DialogRecord]:
        return [r for r in self.records if r.retained]


def _dumps(obj: object) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def save_dataset(ds: Dataset, out_dir: str | Path) -> Path:
    """Write the three dataset files atomically: either all appear or none do."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tmp = Path(tempfile.mkdtemp(prefix=".partial-", dir=out))
    try:
        with open(tmp / SCENES_FILE, "w") as f:
            for pid in sorted(ds.pairs):
                f.write(_dumps({"pair_id": pid, "split": ds.splits[pid], **pair_to_json(ds.pairs[pid])}) + "\n")
        with open(tmp / DIALOGS_FILE, "w") as f:
            for r in ds.records:
                if r.retained:
                    f.write(_dumps(r.to_json()) + "\n")
        manifest = dict(ds.manifest)
        manifest["files"] = {n: _sha256(tmp / n) for n in (SCENES_FILE, DIALOGS_FILE)}
        (tmp / MANIFEST_FILE).write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")
        for n in (SCENES_FILE, DIALOGS_FILE, MANIFEST_FILE):
            (tmp / n).replace(out / n)
    finally:
        shutil.rmtree(tmp, ignore_errors=True)
    return out


def load_dataset(path: str | Path) -> Dataset:
    d = Path(path)
    manifest = json.loads((d / MANIFEST_FILE).read_text())
    if manifest.get("schema") != DATASET_SCHEMA:
        raise ValueError(f"{d}: unsupported dataset schema {manifest.get('schema')!r}")
    pairs, splits = {}, {}
    for line in (d / SCENES_FILE).read_text().splitlines():
        row = json.loads(line)
        pairs[row["pair_id"]] = pair_from_json(row)
        splits[row["pair_id"]] = row["split"]
    records = [DialogRecord.from_json(json.loads(line)) for line in (d / DIALOGS_FILE).read_text().splitlines()]
    return Dataset(manifest, pairs, splits, records)


def build_dataset(config: RunConfig, workers: int = 1) -> Dataset:
    """Generate pairs and both dialogs per pair; output order depends only on pair ids."""
    jobs = [(config, i) for i in range(config.n_pairs)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_pair_job, jobs, chunksize=max(1, len(jobs) // (workers * 8))))
    else:
        results = [_pair_job(j) for j in jobs]
    splits = assign_splits(config.n_pairs, config.split_ratios, config.seed)
    pairs, records = {}, []
    for pid, (pair_json, recs) in enumerate(results):
        pairs[pid] = pair_from_json(pair_json)
        for r in recs:
            rec = DialogRecord.from_json(r)
            records.append(DialogRecord(rec.pair_id, rec.orientation, rec.rounds, rec.guess, rec.target_id,
                                        rec.status, rec.correct_object_list, splits[pid]))
    status = Counter(r.status for r in records)
    retained = [r for r in records if r.retained]
    manifest = {
        "schema": DATASET_SCHEMA,
        "seed": config.seed,
        "config": config.to_dict(with_output=False),
        "config_hash": config.config_hash(),
        "counts": {
            "pairs": config.n_pairs,
            "episodes": len(records),
            "retained": len(retained),
            "discarded": {k: status.get(k, 0) for k in (TIMEOUT, WRONG, FORCED, INCONSISTENT)},
        },
        "discard_rate": round(1 - len(retained) / len(records), 6),
        "split_pairs": {s: sum(1 for v in splits.values() if v == s) for s in SPLITS},
        "split_dialogs": {s: sum(1 for r in retained if r.split == s) for s in SPLITS},
    }
    return Dataset(manifest, pairs, splits, records)


def generate_dataset(config: RunConfig, out_dir: str | Path | None = None, workers: int = 1) -> Dataset:
    ds = build_dataset(config, workers)
    save_dataset(ds, out_dir if out_dir is not None else config.out_dir)
    return ds


# --- statistics -----------------------------------------------------------


@dataclass(frozen=True)
class StatsReport:
    dialogs: int
    mean_rounds: float
    unique_questions: int
    unique_answers: int
    mean_question_length: float
    subtype_distribution: dict[str, float]
    top_answers: list[tuple[str, float]]
    top6_answer_mass: float
    count_fraction: float

    def to_json(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}

    def format(self) -> str:
        lines = [
            f"dialogs                {self.dialogs}",
            f"mean rounds            {self.mean_rounds:.2f}",
            f"unique questions       {self.unique_questions}",
            f"unique answers         {self.unique_answers}",
            f"mean question length   {self.mean_question_length:.2f}",
            f"count-question share   {self.count_fraction:.3f}",
            f"top-6 answer mass      {self.top6_answer_mass:.3f}",
            "question subtypes:",
            *(f"  {k:<16}{v:.3f}" for k, v in self.subtype_distribution.items()),
            "most frequent answers:",
            *(f"  {v:.3f}  {k}" for k, v in self.top_answers),
        ]
        return "\n".join(lines)


def compute_stats(records: Iterable[DialogRecord], top_k: int = 10) -> StatsReport:
    records = list(records)
    if not records:
        raise ValueError("no dialogs to summarise")
    questions = [r.question_text for d in records for r in d.rounds]
    answers = Counter(r.answer_text for d in records for r in d.rounds)
    subtypes = Counter(r.question.subtype for d in records for r in d.rounds)
    n_q = len(questions)
    return StatsReport(
        dialogs=len(records),
        mean_rounds=sum(len(d.rounds) for d in records) / len(records),
        unique_questions=len(set(questions)),
        unique_answers=len(answers),
        mean_question_length=sum(len(q.split()) for q in questions) / n_q if n_q else 0.0,
        subtype_distribution={k: v / n_q for k, v in sorted(subtypes.items(), key=lambda kv: (-kv[1], kv[0]))},
        top_answers=[(a, c / n_q) for a, c in sorted(answers.items(), key=lambda kv: (-kv[1], kv[0]))[:top_k]],
        top6_answer_mass=sum(c for _, c in answers.most_common(6)) / n_q if n_q else 0.0,
        count_fraction=sum(subtypes[s] for s in COUNT_SUBTYPES) / n_q if n_q else 0.0,
    )
