"""Command-line entry point: attack, bench, train, lexicon subcommands.

All flags can also live in a JSON config file (--config) whose keys mirror
the long flag names with dashes replaced by underscores; flags given on the
command line override the file.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import fixtures
from .attack import AttackConfig, attack
from .bench import emit_report, load_dataset, run_benchmark, Example
from .errors import AdvemojiError
from .lexicon import (SENTIMENTS, SequenceSpaceConfig, default_lexicon,
                      load_lexicon_file)
from .oracles import (HttpClassifier, LlmClassifier, default_sentiment_map,
                      label_coarsening, train_baseline)
from .policy import (Policy, TrainConfig, load_policy, rank_candidates,
                     rl_train, save_policy, supervised_pretrain)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file mirroring the flags")
    p.add_argument("--lexicon", help="lexicon JSONL path (default: bundled)")
    p.add_argument("--oracle", choices=("builtin", "http", "llm"),
                   default="builtin")
    p.add_argument("--endpoint", help="oracle endpoint URL (http/llm)")
    p.add_argument("--model", default="gpt-4o-mini",
                   help="model name for the llm oracle")
    p.add_argument("--api-key-env", default="ADVEMOJI_LLM_API_KEY",
                   help="environment variable holding the llm API key")
    p.add_argument("--labels", default=",".join(SENTIMENTS),
                   help="comma-separated label set for the llm oracle")
    p.add_argument("--policy", help="policy checkpoint path")
    p.add_argument("--lmin", type=int, default=1)
    p.add_argument("--lmax", type=int, default=4)
    p.add_argument("--alpha-stealth", type=float, default=0.5)
    p.add_argument("--no-consistency", action="store_true",
                   help="drop the sentiment-consistency constraint")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="advemoji",
        description="Zero-word-perturbation emoji-affix attacks on text "
                    "classifiers")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("attack", help="attack a single text")
    _add_common(p)
    p.add_argument("--text", required=True)
    p.add_argument("--label", help="known label of the text "
                                   "(default: one baseline oracle query)")
    p.add_argument("--topk", default="30")

    p = sub.add_parser("bench", help="run a top-k sweep over a dataset")
    _add_common(p)
    p.add_argument("--dataset", help="dataset JSONL (default: bundled fixture)")
    p.add_argument("--topk", default="1,3,15,30",
                   help="comma-separated top-k list")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--candidates", choices=("policy", "random"),
                   default="policy")
    p.add_argument("--format", choices=("markdown", "csv", "json"),
                   default="markdown")
    p.add_argument("--out", help="report output path (default: stdout)")

    p = sub.add_parser("train", help="two-phase policy training")
    _add_common(p)
    p.add_argument("--dataset", help="dataset JSONL (default: bundled fixture)")
    p.add_argument("--out", required=True, help="checkpoint output path")
    p.add_argument("--pretrain-epochs", type=int, default=15)
    p.add_argument("--rl-epochs", type=int, default=30)
    p.add_argument("--pretrain-lr", type=float, default=2.0)
    p.add_argument("--rl-lr", type=float, default=10.0)
    p.add_argument("--alpha-reward", type=float, default=1.0)
    p.add_argument("--beta-reward", type=float, default=0.02)
    p.add_argument("--smooth-k", type=int, default=5)

    p = sub.add_parser("lexicon", help="inspect and validate a lexicon")
    _add_common(p)
    return ap


def _apply_config_file(ap: argparse.ArgumentParser, argv: list[str],
                       args: argparse.Namespace) -> argparse.Namespace:
    if not getattr(args, "config", None):
        return args
    with open(args.config, encoding="utf-8") as f:
        file_values = json.load(f)
    if not isinstance(file_values, dict):
        raise AdvemojiError("config file must hold a JSON object")
    merged = vars(args).copy()
    explicit = _explicit_flags(argv)
    for key, value in file_values.items():
        dest = key.replace("-", "_")
        if dest not in merged:
            raise AdvemojiError(f"unknown config key {key!r}")
        if dest not in explicit:
            merged[dest] = value
    return argparse.Namespace(**merged)


def _explicit_flags(argv: list[str]) -> set[str]:
    out = set()
    for token in argv:
        if token.startswith("--"):
            out.add(token[2:].split("=")[0].replace("-", "_"))
    return out


def _load_lexicon(args):
    return load_lexicon_file(args.lexicon) if args.lexicon else default_lexicon()


def _make_oracle(args, lexicon):
    if args.oracle == "builtin":
        return train_baseline(fixtures.fixture_train_corpus(), lexicon=lexicon)
    if not args.endpoint:
        raise AdvemojiError(f"--endpoint is required for --oracle {args.oracle}")
    if args.oracle == "http":
        return HttpClassifier(args.endpoint)
    return LlmClassifier(args.endpoint, args.model,
                         label_set=args.labels.split(","),
                         api_key_env=args.api_key_env, abstain="no_flip")


def _space(args) -> SequenceSpaceConfig:
    return SequenceSpaceConfig(args.lmin, args.lmax)


def _load_or_init_policy(args, lexicon) -> Policy:
    if args.policy:
        return load_policy(args.policy, lexicon)
    return Policy(lexicon, _space(args))


def _dataset(args) -> list[Example]:
    if getattr(args, "dataset", None):
        examples, _ = load_dataset(args.dataset)
        return examples
    return [Example(id=r["id"], text=r["text"], label=r["label"])
            for r in fixtures.fixture_dataset()]


def _sentiment_of(label: str) -> str:
    if label in SENTIMENTS:
        return label
    return label_coarsening(label, default_sentiment_map())


def cmd_attack(args) -> int:
    lexicon = _load_lexicon(args)
    oracle = _make_oracle(args, lexicon)
    policy = _load_or_init_policy(args, lexicon)
    label = args.label
    if label is None:
        label = oracle.classify(args.text).label
        print(f"baseline label: {label} (1 baseline query)")
    k = int(args.topk)
    cfg = AttackConfig(top_k=k, space=_space(args),
                       alpha_stealth=args.alpha_stealth,
                       require_consistency=not args.no_consistency)
    sentiment = _sentiment_of(label)
    candidates = rank_candidates(policy, sentiment, k, cfg)
    result = attack(args.text, label, candidates, oracle, cfg,
                    lexicon=lexicon, x_sentiment=sentiment)
    print(json.dumps({
        "success": result.success,
        "adversarial_text": result.adversarial_text,
        "queries": result.queries,
        "flipped_label": result.flipped_label,
        "stealth": result.stealth,
        "elapsed_s": round(result.elapsed, 4),
    }, ensure_ascii=False, indent=2))
    return 0 if result.success else 1


def cmd_bench(args) -> int:
    lexicon = _load_lexicon(args)
    oracle = _make_oracle(args, lexicon)
    policy = _load_or_init_policy(args, lexicon)
    examples = _dataset(args)
    ks = [int(k) for k in str(args.topk).split(",")]
    configs = [AttackConfig(top_k=k, space=_space(args),
                            alpha_stealth=args.alpha_stealth,
                            require_consistency=not args.no_consistency)
               for k in ks]
    name = args.dataset or "fixture"
    smap = None if all(e.label in SENTIMENTS for e in examples) \
        else default_sentiment_map()
    report = run_benchmark(examples, oracle, policy, configs, args.seed,
                           lexicon=lexicon, dataset_name=name,
                           sentiment_map=smap, jobs=args.jobs,
                           candidate_source=args.candidates)
    if args.out:
        emit_report(report, args.format, args.out)
        print(f"wrote {args.format} report to {args.out}")
    else:
        emit_report(report, args.format, "/dev/stdout")
    return 0 if report.complete else 2


def cmd_train(args) -> int:
    lexicon = _load_lexicon(args)
    oracle = _make_oracle(args, lexicon)
    examples = _dataset(args)
    policy = Policy(lexicon, _space(args))
    rows = [{"id": e.id, "text": e.text, "label": _sentiment_of(e.label)}
            for e in examples]
    corpus = fixtures.build_pretrain_corpus(
        lexicon, rows, policy.space, seed=args.seed,
        usage_texts=[t for t, _ in fixtures.fixture_train_corpus()])
    pre_cfg = TrainConfig(epochs=args.pretrain_epochs,
                          learning_rate=args.pretrain_lr, seed=args.seed)
    _, trace = supervised_pretrain(policy, corpus, pre_cfg)
    print(f"phase 1: nll {trace[0]:.3f} -> {trace[-1]:.3f}")
    rl_cfg = TrainConfig(epochs=args.rl_epochs, learning_rate=args.rl_lr,
                         alpha_reward=args.alpha_reward,
                         beta_reward=args.beta_reward,
                         smooth_k=args.smooth_k, seed=args.seed,
                         require_consistency=not args.no_consistency)
    _, rtrace = rl_train(policy, [(e.text, _sentiment_of(e.label))
                                  for e in examples], oracle, rl_cfg)
    q = max(len(rtrace.smoothed) // 4, 1)
    print(f"phase 2: smoothed reward {np.mean(rtrace.smoothed[:q]):.3f} -> "
          f"{np.mean(rtrace.smoothed[-q:]):.3f} "
          f"({oracle.ledger.queries} oracle queries)")
    save_policy(policy, args.out)
    print(f"saved checkpoint to {args.out}")
    return 0


def cmd_lexicon(args) -> int:
    lexicon = _load_lexicon(args)
    by_class = {s: 0 for s in SENTIMENTS}
    ascii_count = 0
    for t in lexicon.tokens:
        by_class[t.sentiment] += 1
        ascii_count += t.kind == "ascii_emoticon"
    print(f"{len(lexicon)} tokens "
          f"({len(lexicon) - ascii_count} unicode, {ascii_count} ascii)")
    for s in SENTIMENTS:
        print(f"  {s}: {by_class[s]}")
    print("lexicon is valid")
    return 0


COMMANDS = {
    "attack": cmd_attack,
    "bench": cmd_bench,
    "train": cmd_train,
    "lexicon": cmd_lexicon,
}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        args = _apply_config_file(ap, argv, args)
        return COMMANDS[args.command](args)
    except AdvemojiError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
