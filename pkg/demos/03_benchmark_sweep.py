#!/usr/bin/env python3
# A full top-k sweep over the fixture dataset, emitting the report table.
# ASR grows monotonically with the search budget while the average query
# count stays small; the perturbation-rate column is always exactly 0.

import sys

from advemoji import (AttackConfig, Example, SequenceSpaceConfig,
                      default_lexicon, emit_report, run_benchmark,
                      train_baseline)
from advemoji.fixtures import (build_pretrain_corpus, fixture_dataset,
                               fixture_train_corpus)
from advemoji.policy import (Policy, TrainConfig, rl_train,
                             supervised_pretrain)

lexicon = default_lexicon()
oracle = train_baseline(fixture_train_corpus(), lexicon=lexicon)
examples = [Example(id=r["id"], text=r["text"], label=r["label"])
            for r in fixture_dataset()]
space = SequenceSpaceConfig(1, 4)

policy = Policy(lexicon, space)
supervised_pretrain(
    policy,
    build_pretrain_corpus(lexicon, fixture_dataset(), space, seed=0,
                          usage_texts=[t for t, _ in fixture_train_corpus()]),
    TrainConfig(epochs=15, learning_rate=2.0, seed=0))
rl_train(policy, [(r["text"], r["label"]) for r in fixture_dataset()],
         oracle,
         TrainConfig(epochs=30, learning_rate=10.0, alpha_reward=1.0,
                     beta_reward=0.02, smooth_k=5, seed=0))

configs = [AttackConfig(top_k=k, space=space) for k in (1, 3, 15, 30)]
report = run_benchmark(examples, oracle, policy, configs, seed=0,
                       lexicon=lexicon, dataset_name="fixture")
report.assert_monotone_asr()
emit_report(report, "markdown", "/dev/stdout")

queries_total = sum(r.queries for r in report.examples)
print(f"\ntotal attack queries: {queries_total}; "
      f"per-config baseline queries: "
      f"{[row.baseline_queries for row in report.rows]}", file=sys.stderr)
