#!/usr/bin/env python3
# A first attack: flip the built-in classifier on one sentence without
# touching a single word of it.

from advemoji import (AttackConfig, SequenceSpaceConfig, attack,
                      default_lexicon, perturbation_rate, rank_candidates,
                      train_baseline)
from advemoji.fixtures import fixture_train_corpus
from advemoji.policy import Policy

lexicon = default_lexicon()
print(f"lexicon: {len(lexicon)} tokens, e.g.",
      " ".join(t.surface for t in lexicon.tokens[:8]))

# the built-in target: a naive-bayes sentiment classifier trained on the
# bundled corpus (it has learned how emoji are actually used, including the
# ironic ones)
oracle = train_baseline(fixture_train_corpus(), lexicon=lexicon)

text = "great day today"
baseline = oracle.classify(text)
print(f"\ntarget says: {baseline.label} "
      f"(p={baseline.probs[baseline.label]:.3f})")

# an untrained policy still enumerates deterministic candidates, but has no
# idea which tokens matter, so it needs a generous search budget; the
# training demo brings this down to a handful of queries
space = SequenceSpaceConfig(1, 4)
cfg = AttackConfig(top_k=400, space=space, alpha_stealth=0.5)
policy = Policy(lexicon, space)
candidates = rank_candidates(policy, baseline.label, 400, cfg)

result = attack(text, baseline.label, candidates, oracle, cfg,
                lexicon=lexicon, x_sentiment=baseline.label)
print(f"success: {result.success} after {result.queries} queries")
if result.success:
    print(f"adversarial text: {result.adversarial_text!r}")
    print(f"now classified as: {result.flipped_label}")
    print(f"stealthiness: {result.stealth:.2f}")
    print("perturbation rate:",
          perturbation_rate(text, result.adversarial_text, lexicon))
