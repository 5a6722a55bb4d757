"""Command-line entry point: generate, stats, eval, validate and play."""
from __future__ import annotations

import argparse
import json
import logging
import random
import sys
from pathlib import Path
from typing import Callable, Sequence, TextIO

from .actions import COUNT_SUBTYPES, GuessAction, QuestionAction
from .asim import count_objects, oracle_answer
from .config import ConfigError, RunConfig
from .nlg import default_realizer
from .pipeline import DatasetAbort, compute_stats, generate_dataset, load_dataset, make_pair
from .qsim import allowed_types, slot_options
from .scene import pair_violations
from .state import InconsistencyError, Tracker
from .taxonomy import PropertySet, default_taxonomy

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig.from_file(args.config) if args.config else RunConfig()
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if getattr(args, "pairs", None) is not None:
        changes["n_pairs"] = args.pairs
    if getattr(args, "epsilon", None) is not None and args.command == "generate":
        changes["epsilon"] = args.epsilon
    if getattr(args, "out", None) is not None:
        changes["out_dir"] = args.out
    return cfg.replace(**changes) if changes else cfg


def cmd_generate(args: argparse.Namespace, out: TextIO) -> int:
    cfg = _config(args)
    ds = generate_dataset(cfg, cfg.out_dir, workers=args.workers)
    m = ds.manifest
    c = m["counts"]
    print(f"wrote {cfg.out_dir}: {c['pairs']} pairs, {c['retained']}/{c['episodes']} dialogs kept "
          f"(discard rate {m['discard_rate']:.3f}), config {m['config_hash']}", file=out)
    print("split pairs " + ", ".join(f"{k} {v}" for k, v in m["split_pairs"].items()), file=out)
    return EXIT_OK


def cmd_stats(args: argparse.Namespace, out: TextIO) -> int:
    ds = load_dataset(args.dataset)
    report = compute_stats(ds.retained())
    print(json.dumps(report.to_json(), indent=2) if args.json else report.format(), file=out)
    return EXIT_OK


def cmd_eval(args: argparse.Namespace, out: TextIO) -> int:
    from .metrics import evaluate_dataset

    ds = load_dataset(args.dataset)
    report = evaluate_dataset(ds, args.epsilon or 0.0, args.questions, args.seed or 0)
    print(json.dumps(report.to_json(), indent=2) if args.json else report.format(), file=out)
    return EXIT_OK


def cmd_validate(args: argparse.Namespace, out: TextIO) -> int:
    ds = load_dataset(args.dataset)
    cfg = RunConfig.from_dict(ds.manifest["config"])
    problems = []
    for pid, pair in sorted(ds.pairs.items()):
        problems += [f"pair {pid}: {v}" for v in pair_violations(pair, cfg.scene_config())]
    for r in ds.records:
        tag = f"dialog {r.pair_id}/{r.orientation}"
        if not 1 <= len(r.rounds) <= cfg.max_rounds:
            problems.append(f"{tag}: {len(r.rounds)} rounds")
        if not r.success:
            problems.append(f"{tag}: guessed {r.guess.object_id}, target {r.target_id}")
        if ds.splits.get(r.pair_id) != r.split:
            problems.append(f"{tag}: split {r.split} differs from its pair's")
    for p in problems:
        print(p, file=out)
    print(f"{len(ds.pairs)} pairs, {len(ds.records)} dialogs, {len(problems)} problems", file=out)
    return EXIT_OK if not problems else EXIT_FAIL


# --- interactive play -----------------------------------------------------


def _choose(prompt: str, options: Sequence[str], ask: Callable[[str], str], out: TextIO) -> int:
    for i, o in enumerate(options, 1):
        print(f"  {i:3d}. {o}", file=out)
    while True:
        raw = ask(f"{prompt} [1-{len(options)}]: ").strip()
        if raw.isdigit() and 1 <= int(raw) <= len(options):
            return int(raw) - 1
        print("  please enter one of the numbers above", file=out)


def _slots_text(slots: dict) -> str:
    return ", ".join(f"{k}={v}" for k, v in sorted(slots.items()))


def play(seed: int, ask: Callable[[str], str], out: TextIO, debug: bool = False, max_rounds: int = 10,
         config: RunConfig | None = None) -> bool:
    """Human questioner against the oracle answerer. Returns whether the final guess was right."""
    tax = default_taxonomy()
    cfg = (config or RunConfig()).replace(seed=seed)
    pair = make_pair(cfg, 0)
    scene_q, scene_a, target, _ = pair.oriented("qa")
    tracker = Tracker(scene_q, tax)
    realizer = default_realizer()
    rng = random.Random(seed)
    history: list = []
    print("Your picture:", file=out)
    for o in scene_q.objects:
        print(f"  {o.id:>4}  {o.color} {o.material} {o.category}  on {o.parent_id}", file=out)
    guess_id = None
    while len(history) < max_rounds:
        if debug:
            for oid, s in tracker.snapshot().items():
                print(f"  [{oid}] {s['presence']:<8} cand={s['candidate']!s:<5} "
                      f"confirmed={len(s['confirmed'])} open={s['unconfirmed']}", file=out)
        subtypes = allowed_types(tracker, history, cfg.questioner_config())
        k = _choose(f"round {len(history) + 1}: pick a question type or guess",
                    [*subtypes, "guess now"], ask, out)
        if k == len(subtypes):
            break
        sub = subtypes[k]
        if sub in COUNT_SUBTYPES:
            psets = sorted({p for o in scene_q.objects for p in tax.enumerate_property_sets(o) if not p.is_identifier},
                           key=PropertySet.sort_key)
            p = psets[_choose("property set", [str(x) for x in psets], ask, out)]
            slots = {"p_set": p}
            if sub == "count-hint":
                slots["count"] = count_objects(scene_q, p, tax)
        else:
            options = slot_options(tracker, sub, history)
            if not options:
                print("  nothing useful to ask with that type right now", file=out)
                continue
            slots = options[_choose("slots", [_slots_text(s) for s in options], ask, out)]
        q = QuestionAction(sub, slots)
        a = oracle_answer(scene_a, q, history, tax)
        print(f"Q: {realizer.question(q, rng)}", file=out)
        print(f"A: {realizer.answer(a, q, rng)}", file=out)
        try:
            tracker.apply_answer(q, a)
        except InconsistencyError as e:
            print(f"  tracker: {e}", file=out)
        history.append((q, a))
    else:
        print(f"{max_rounds} rounds used, time to guess.", file=out)
    ids = [o.id for o in scene_q.objects]
    guess_id = ids[_choose("which object is different", [f"{o.id} {o.color} {o.material} {o.category}"
                                                          for o in scene_q.objects], ask, out)]
    guess = GuessAction(guess_id)
    if guess.object_id == target:
        print(f"*** Correct! {target} was replaced. ***", file=out)
        return True
    t = scene_q[target]
    print(f"Wrong: it was {t.id}, the {t.color} {t.material} {t.category}.", file=out)
    return False


def cmd_play(args: argparse.Namespace, out: TextIO) -> int:
    cfg = _config(args)
    try:
        play(cfg.seed, input, out, debug=args.debug, max_rounds=cfg.max_rounds, config=cfg)
    except EOFError:
        print("\ninput closed", file=out)
        return EXIT_FAIL
    return EXIT_OK


# --- argument parsing -----------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spotdiff", description="Spot-the-difference dialog generator")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", type=Path, help="YAML or JSON run configuration")
        p.add_argument("--seed", type=int)
        p.add_argument("-v", "--verbose", action="store_true")

    g = sub.add_parser("generate", help="generate scene pairs and self-play dialogs")
    common(g)
    g.add_argument("--out", help="output directory (created if missing)")
    g.add_argument("--workers", type=int, default=1)
    g.add_argument("--pairs", type=int, help="number of scene pairs")
    g.add_argument("--epsilon", type=float, help="answer noise during generation")

    s = sub.add_parser("stats", help="dataset statistics")
    common(s)
    s.add_argument("--dataset", type=Path, required=True)
    s.add_argument("--json", action="store_true")

    e = sub.add_parser("eval", help="replay a dataset against an oracle or noisy answerer")
    common(e)
    e.add_argument("--dataset", type=Path, required=True)
    e.add_argument("--epsilon", type=float, default=0.0, help="0 evaluates the oracle answerer")
    e.add_argument("--questions", type=int, default=1000, help="random questions per subtype")
    e.add_argument("--json", action="store_true")

    v = sub.add_parser("validate", help="check scene constraints and dialog invariants")
    common(v)
    v.add_argument("--dataset", type=Path, required=True)

    p = sub.add_parser("play", help="interactive game against the oracle answerer")
    common(p)
    p.add_argument("--debug", action="store_true", help="show the tracker state each round")
    return parser


COMMANDS = {"generate": cmd_generate, "stats": cmd_stats, "eval": cmd_eval, "validate": cmd_validate,
            "play": cmd_play}


def main(argv: Sequence[str] | None = None, out: TextIO | None = None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if getattr(args, "epsilon", None) is not None and not 0.0 <= args.epsilon <= 1.0:
            raise ConfigError("epsilon", f"must lie in [0, 1], got {args.epsilon}")
        if getattr(args, "workers", 1) < 1:
            raise ConfigError("workers", "must be at least 1")
        return COMMANDS[args.command](args, out)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (DatasetAbort, FileNotFoundError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
