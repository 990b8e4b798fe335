#!/usr/bin/env python3
# Two-phase policy training: supervised pretraining on sentiment-matched
# sequences, then REINFORCE against the live oracle. Afterwards the top
# candidates concentrate on the tokens that actually flip the target.

import numpy as np

from advemoji import (AttackConfig, SequenceSpaceConfig, default_lexicon,
                      rank_candidates, train_baseline)
from advemoji.fixtures import (build_pretrain_corpus, fixture_dataset,
                               fixture_train_corpus)
from advemoji.policy import (Policy, TrainConfig, rl_train,
                             supervised_pretrain)

lexicon = default_lexicon()
oracle = train_baseline(fixture_train_corpus(), lexicon=lexicon)
dataset = fixture_dataset()
space = SequenceSpaceConfig(1, 4)

policy = Policy(lexicon, space)

# phase 1: likelihood training on (sentiment, sequence) pairs drawn from the
# matching subspace, weighted by observed usage
corpus = build_pretrain_corpus(
    lexicon, dataset, space, seed=0,
    usage_texts=[t for t, _ in fixture_train_corpus()])
_, nll_trace = supervised_pretrain(
    policy, corpus, TrainConfig(epochs=15, learning_rate=2.0, seed=0))
print(f"phase 1 NLL: {nll_trace[0]:.3f} -> {nll_trace[-1]:.3f}")

# phase 2: REINFORCE with the smoothed multi-component reward
_, trace = rl_train(
    policy, [(r["text"], r["label"]) for r in dataset], oracle,
    TrainConfig(epochs=30, learning_rate=10.0, alpha_reward=1.0,
                beta_reward=0.02, smooth_k=5, seed=0))
q = len(trace.smoothed) // 4
print(f"phase 2 smoothed reward: {np.mean(trace.smoothed[:q]):+.3f} "
      f"(first quartile) -> {np.mean(trace.smoothed[-q:]):+.3f} (last)")
print(f"oracle queries spent training: {oracle.ledger.queries}")

cfg = AttackConfig(top_k=5, space=space)
for sentiment in ("positive", "negative", "neutral"):
    top = rank_candidates(policy, sentiment, 5, cfg)
    shown = ["{} … {}".format(c.prefix.surfaces(lexicon),
                              c.suffix.surfaces(lexicon)) for c in top[:3]]
    print(f"{sentiment:>9} top-3 candidate pairs: " + " | ".join(shown))
