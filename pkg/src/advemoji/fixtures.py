"""Bundled fixture data and its seeded generators.

The benchmark corpora (Go Emotion, Tweet Emoji) are not redistributable
here, so the repo ships a small synthetic stand-in: a 200-sentence labeled
dataset, a naive-bayes training corpus, and a pretraining corpus builder.

The training corpus is constructed so that a handful of emoji are used
"ironically": their lexicon sentiment tag disagrees with the class of the
documents they appear in (crying tears of joy, mocking laughter, sarcastic
sparkles). Those tokens are exactly what makes a sentiment-consistent
attack possible: an affix can carry the text's own sentiment tag while
pushing the classifier's posterior toward another class. Everything is
generated from fixed seeds; ``scripts/generate_fixtures.py`` rewrites the
bundled files bit-for-bit.
"""

from __future__ import annotations

import json
from importlib import resources

import numpy as np

from .lexicon import (EmojiLexicon, EmojiSequence, KIND_ASCII, KIND_UNICODE,
                      NEGATIVE, NEUTRAL, POSITIVE, SequenceSpaceConfig,
                      sentiment_subspace)

DATASET_SEED = 2024
CORPUS_SEED = 4242

# (surface, kind, sentiment) — the bundled default lexicon.
LEXICON_ENTRIES = [
    # positive
    ("😀", KIND_UNICODE, POSITIVE), ("😃", KIND_UNICODE, POSITIVE),
    ("😄", KIND_UNICODE, POSITIVE), ("😁", KIND_UNICODE, POSITIVE),
    ("😆", KIND_UNICODE, POSITIVE), ("🤣", KIND_UNICODE, POSITIVE),
    ("😂", KIND_UNICODE, POSITIVE), ("🙂", KIND_UNICODE, POSITIVE),
    ("😉", KIND_UNICODE, POSITIVE), ("😊", KIND_UNICODE, POSITIVE),
    ("😇", KIND_UNICODE, POSITIVE), ("🥰", KIND_UNICODE, POSITIVE),
    ("😍", KIND_UNICODE, POSITIVE), ("🤩", KIND_UNICODE, POSITIVE),
    ("😘", KIND_UNICODE, POSITIVE), ("😋", KIND_UNICODE, POSITIVE),
    ("😜", KIND_UNICODE, POSITIVE), ("🤗", KIND_UNICODE, POSITIVE),
    ("🥳", KIND_UNICODE, POSITIVE), ("☺️", KIND_UNICODE, POSITIVE),
    ("😺", KIND_UNICODE, POSITIVE), ("💖", KIND_UNICODE, POSITIVE),
    ("❤️", KIND_UNICODE, POSITIVE), ("👍", KIND_UNICODE, POSITIVE),
    ("👍🏽", KIND_UNICODE, POSITIVE), ("🎉", KIND_UNICODE, POSITIVE),
    ("✨", KIND_UNICODE, POSITIVE), ("🌟", KIND_UNICODE, POSITIVE),
    ("💪", KIND_UNICODE, POSITIVE), ("👏", KIND_UNICODE, POSITIVE),
    ("👨‍👩‍👧", KIND_UNICODE, POSITIVE),
    (":)", KIND_ASCII, POSITIVE), (":-)", KIND_ASCII, POSITIVE),
    (":D", KIND_ASCII, POSITIVE), (";)", KIND_ASCII, POSITIVE),
    (";-P", KIND_ASCII, POSITIVE), ("^_^", KIND_ASCII, POSITIVE),
    (":3", KIND_ASCII, POSITIVE), ("=D", KIND_ASCII, POSITIVE),
    # negative
    ("😞", KIND_UNICODE, NEGATIVE), ("😟", KIND_UNICODE, NEGATIVE),
    ("😠", KIND_UNICODE, NEGATIVE), ("😡", KIND_UNICODE, NEGATIVE),
    ("🤬", KIND_UNICODE, NEGATIVE), ("😢", KIND_UNICODE, NEGATIVE),
    ("😭", KIND_UNICODE, NEGATIVE), ("😤", KIND_UNICODE, NEGATIVE),
    ("😨", KIND_UNICODE, NEGATIVE), ("😰", KIND_UNICODE, NEGATIVE),
    ("😥", KIND_UNICODE, NEGATIVE), ("😓", KIND_UNICODE, NEGATIVE),
    ("🙁", KIND_UNICODE, NEGATIVE), ("☹️", KIND_UNICODE, NEGATIVE),
    ("😖", KIND_UNICODE, NEGATIVE), ("😣", KIND_UNICODE, NEGATIVE),
    ("😩", KIND_UNICODE, NEGATIVE), ("😫", KIND_UNICODE, NEGATIVE),
    ("🥺", KIND_UNICODE, NEGATIVE), ("😒", KIND_UNICODE, NEGATIVE),
    ("😔", KIND_UNICODE, NEGATIVE), ("🤢", KIND_UNICODE, NEGATIVE),
    ("🤮", KIND_UNICODE, NEGATIVE), ("💔", KIND_UNICODE, NEGATIVE),
    ("👎", KIND_UNICODE, NEGATIVE), ("💀", KIND_UNICODE, NEGATIVE),
    ("😿", KIND_UNICODE, NEGATIVE),
    (":(", KIND_ASCII, NEGATIVE), (":-(", KIND_ASCII, NEGATIVE),
    ("D:", KIND_ASCII, NEGATIVE), ("T_T", KIND_ASCII, NEGATIVE),
    ("QaQ", KIND_ASCII, NEGATIVE), (">:(", KIND_ASCII, NEGATIVE),
    (":'(", KIND_ASCII, NEGATIVE), (":c", KIND_ASCII, NEGATIVE),
    # neutral
    ("😐", KIND_UNICODE, NEUTRAL), ("😑", KIND_UNICODE, NEUTRAL),
    ("😶", KIND_UNICODE, NEUTRAL), ("🤔", KIND_UNICODE, NEUTRAL),
    ("🤨", KIND_UNICODE, NEUTRAL), ("😬", KIND_UNICODE, NEUTRAL),
    ("🙄", KIND_UNICODE, NEUTRAL), ("😮", KIND_UNICODE, NEUTRAL),
    ("😯", KIND_UNICODE, NEUTRAL), ("😲", KIND_UNICODE, NEUTRAL),
    ("😴", KIND_UNICODE, NEUTRAL), ("🤐", KIND_UNICODE, NEUTRAL),
    ("🤷", KIND_UNICODE, NEUTRAL), ("🤷‍♂️", KIND_UNICODE, NEUTRAL),
    ("👀", KIND_UNICODE, NEUTRAL), ("📝", KIND_UNICODE, NEUTRAL),
    ("📊", KIND_UNICODE, NEUTRAL), ("📅", KIND_UNICODE, NEUTRAL),
    ("⏰", KIND_UNICODE, NEUTRAL), ("📌", KIND_UNICODE, NEUTRAL),
    ("🔍", KIND_UNICODE, NEUTRAL),
    (":|", KIND_ASCII, NEUTRAL), ("-_-", KIND_ASCII, NEUTRAL),
    ("o_O", KIND_ASCII, NEUTRAL), (":o", KIND_ASCII, NEUTRAL),
    ("._.", KIND_ASCII, NEUTRAL),
]

# Ironic-usage table: lexicon tag on the left, the class of the documents
# the token actually shows up in on the right.
MISALIGNED = {
    "🤣": NEGATIVE,   # tagged positive, used for mockery
    "✨": NEGATIVE,   # tagged positive, used sarcastically
    "😭": POSITIVE,   # tagged negative, crying tears of joy
    "💀": POSITIVE,   # tagged negative, "I'm dead" = hilarious
    "👀": POSITIVE,   # tagged neutral, hype usage
    "😬": NEGATIVE,   # tagged neutral, awkward/bad-news usage
}

_WORDS = {
    POSITIVE: ["great", "love", "wonderful", "enjoyed", "fantastic", "amazing",
               "delightful", "superb", "charming", "brilliant", "perfect",
               "loved"],
    NEGATIVE: ["terrible", "hate", "awful", "boring", "dreadful",
               "disappointing", "mess", "painful", "worst", "annoying",
               "hated", "unbearable"],
    NEUTRAL: ["schedule", "report", "table", "update", "meeting", "file",
              "standard", "entry", "routine", "listed", "archive", "form"],
}
_FILLER = ["the", "a", "this", "was", "is", "it", "and", "of", "day", "thing",
           "movie", "book", "show", "plan", "today", "about"]


def lexicon_jsonl() -> str:
    lines = [json.dumps({"surface": s, "kind": k, "sentiment": y},
                        ensure_ascii=False)
             for s, k, y in LEXICON_ENTRIES]
    return "\n".join(lines) + "\n"


def _sentence(rng: np.random.Generator, sentiment: str,
              n_class_words: int) -> str:
    words = list(rng.choice(_WORDS[sentiment], size=n_class_words))
    words += list(rng.choice(_FILLER, size=int(rng.integers(2, 5))))
    rng.shuffle(words)
    return " ".join(words)


def generate_dataset(n: int = 200,
                     seed: int = DATASET_SEED) -> list[dict]:
    """The attack-target dataset: clean labeled sentences, no emoji."""
    rng = np.random.default_rng(seed)
    split = {POSITIVE: n // 3 + n % 3, NEGATIVE: n // 3, NEUTRAL: n // 3}
    rows = []
    for sentiment, count in split.items():
        for _ in range(count):
            rows.append({
                "id": f"ex-{len(rows):04d}",
                "text": _sentence(rng, sentiment, int(rng.integers(2, 5))),
                "label": sentiment,
            })
    return rows


def generate_train_corpus(lexicon: EmojiLexicon, docs_per_class: int = 120,
                          seed: int = CORPUS_SEED) -> list[dict]:
    """Training documents for the baseline classifier, with usage-based
    (not tag-based) emoji placement; the ironic tokens land in the class
    they are actually used in."""
    rng = np.random.default_rng(seed)
    pools: dict[str, list[str]] = {s: [] for s in _WORDS}
    weights: dict[str, list[float]] = {s: [] for s in _WORDS}
    for tok in lexicon.tokens:
        usage_class = MISALIGNED.get(tok.surface, tok.sentiment)
        pools[usage_class].append(tok.surface)
        # ironic tokens show up a lot; that is what makes them learnable
        weights[usage_class].append(12.0 if tok.surface in MISALIGNED else 1.0)
    rows = []
    for sentiment in (POSITIVE, NEGATIVE, NEUTRAL):
        w = np.array(weights[sentiment])
        w = w / w.sum()
        for _ in range(docs_per_class):
            text = _sentence(rng, sentiment, int(rng.integers(2, 5)))
            if rng.random() < 0.8:
                k = int(rng.integers(1, 4))
                emo = rng.choice(pools[sentiment], size=k, p=w)
                text = text + " " + "".join(emo)
            rows.append({"text": text, "label": sentiment})
    return rows


def build_pretrain_corpus(lexicon: EmojiLexicon, dataset: list[dict],
                          space: SequenceSpaceConfig,
                          seed: int = DATASET_SEED,
                          usage_texts: list[str] | None = None,
                          ) -> list[tuple[str, EmojiSequence]]:
    """Phase-1 corpus: each text's sentiment paired with a sequence drawn
    from the matching sentiment subspace.

    When ``usage_texts`` is given (normally the baseline training corpus),
    tokens are drawn proportionally to 1 + their observed usage count, so
    the pretrained policy reflects how emoji actually co-occur with text
    rather than a flat prior over the alphabet.
    """
    from .lexicon import parse_emoji_tokens

    rng = np.random.default_rng(seed)
    counts = {t.id: 0 for t in lexicon.tokens}
    for text in usage_texts or ():
        for tid, _ in parse_emoji_tokens(text, lexicon):
            counts[tid] += 1
    subs = {}
    for s in (POSITIVE, NEGATIVE, NEUTRAL):
        ids = [t.id for t in sentiment_subspace(lexicon, s).tokens]
        w = np.array([1.0 + counts[i] for i in ids])
        subs[s] = (ids, w / w.sum())
    lo = max(space.l_min, 1)
    out = []
    for row in dataset:
        sentiment = row["label"]
        ids, w = subs[sentiment]
        l = int(rng.integers(lo, space.l_max + 1)) if space.l_max > lo else lo
        toks = tuple(int(rng.choice(ids, p=w)) for _ in range(l))
        out.append((sentiment, EmojiSequence(tokens=toks)))
    return out


def _read_jsonl(name: str) -> list[dict]:
    data = resources.files("advemoji.data").joinpath(name)
    return [json.loads(line) for line in
            data.read_text(encoding="utf-8").splitlines() if line.strip()]


def fixture_dataset() -> list[dict]:
    """The bundled 200-sentence labeled dataset."""
    return _read_jsonl("fixture_dataset.jsonl")


def fixture_train_corpus() -> list[tuple[str, str]]:
    """The bundled baseline-classifier training corpus as (text, label)."""
    return [(r["text"], r["label"]) for r in _read_jsonl("fixture_train.jsonl")]
