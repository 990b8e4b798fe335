#!/usr/bin/env python3
"""Regenerate the bundled fixture data files (seed-fixed, byte-stable)."""

import json
import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from advemoji import fixtures
from advemoji.lexicon import load_lexicon

DATA = pathlib.Path(__file__).resolve().parents[1] / "src" / "advemoji" / "data"

GOEMOTIONS_STYLE_MAP = {
    # positive emotions
    "admiration": "positive", "amusement": "positive", "approval": "positive",
    "caring": "positive", "desire": "positive", "excitement": "positive",
    "gratitude": "positive", "joy": "positive", "love": "positive",
    "optimism": "positive", "pride": "positive", "relief": "positive",
    # negative emotions
    "anger": "negative", "annoyance": "negative", "disappointment": "negative",
    "disapproval": "negative", "disgust": "negative",
    "embarrassment": "negative", "fear": "negative", "grief": "negative",
    "nervousness": "negative", "remorse": "negative", "sadness": "negative",
    # ambiguous / neutral
    "confusion": "neutral", "curiosity": "neutral", "realization": "neutral",
    "surprise": "neutral", "neutral": "neutral",
    # identity for already-coarse datasets
    "positive": "positive", "negative": "negative",
}


def main() -> None:
    DATA.mkdir(parents=True, exist_ok=True)

    lex_text = fixtures.lexicon_jsonl()
    load_lexicon(lex_text)  # validate before writing
    (DATA / "default_lexicon.jsonl").write_text(lex_text, encoding="utf-8")

    lexicon = load_lexicon(lex_text)
    dataset = fixtures.generate_dataset()
    with open(DATA / "fixture_dataset.jsonl", "w", encoding="utf-8") as f:
        for row in dataset:
            f.write(json.dumps(row, ensure_ascii=False) + "\n")

    corpus = fixtures.generate_train_corpus(lexicon)
    with open(DATA / "fixture_train.jsonl", "w", encoding="utf-8") as f:
        for row in corpus:
            f.write(json.dumps(row, ensure_ascii=False) + "\n")

    with open(DATA / "emotion_sentiment_map.json", "w", encoding="utf-8") as f:
        json.dump(GOEMOTIONS_STYLE_MAP, f, indent=2, sort_keys=True)
        f.write("\n")

    print(f"wrote lexicon ({len(lexicon)} tokens), dataset ({len(dataset)}), "
          f"train corpus ({len(corpus)}) to {DATA}")


if __name__ == "__main__":
    main()
