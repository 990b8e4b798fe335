#!/usr/bin/env python3
# Why grapheme clusters matter: multi-code-point emoji must stay atomic, or
# the inserted sequences would render as broken fragments.

from advemoji import default_lexicon, parse_emoji_tokens, sentiment_subspace
from advemoji import sequence_space_size
from advemoji.grapheme import clusters

family = "👨‍👩‍👧"
print(f"{family!r} is {len(family)} code points but "
      f"{len(clusters(family))} grapheme cluster")
for text in ["👍🏽 thumbs with skin tone", "flags 🇺🇸🇫🇷", "keycap 1️⃣"]:
    print(f"  {text!r:40} -> {clusters(text)[:4]}")

lexicon = default_lexicon()
print(f"\nbundled lexicon: {len(lexicon)} tokens")
for sentiment in ("positive", "negative", "neutral"):
    sub = sentiment_subspace(lexicon, sentiment)
    sample = " ".join(t.surface for t in sub.tokens[:6])
    print(f"  {sentiment:>9} ({len(sub):3d} tokens): {sample}")

# matching is cluster-aware and emoticons respect word boundaries
text = "a family 👨‍👩‍👧 and a smile :) but not http://x.com"
matches = parse_emoji_tokens(text, lexicon)
print(f"\nmatches in {text!r}:")
for tid, off in matches:
    print(f"  byte {off:3d}: {lexicon.token(tid).surface!r} "
          f"({lexicon.token(tid).sentiment})")

# the search space is astronomically large even for short sequences,
# which is why candidate ranking matters
for l in (1, 2, 4, 8):
    print(f"sequences of length {l}: {sequence_space_size(lexicon, l):,}")
