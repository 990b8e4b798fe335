"""Emoji alphabet, tokenization, and the bounded sequence space.

The attack inserts sequences drawn from a finite token alphabet: Unicode
emoji (one extended grapheme cluster each) and ASCII emoticons (":)", "QaQ",
...). Every token carries exactly one sentiment tag so that consistency of a
candidate sequence with the input text is decidable without any oracle call.
"""

from __future__ import annotations

import json
import unicodedata
from dataclasses import dataclass, field
from importlib import resources

from . import grapheme
from .errors import LexiconError, ParseError

POSITIVE = "positive"
NEGATIVE = "negative"
NEUTRAL = "neutral"
SENTIMENTS = (NEGATIVE, NEUTRAL, POSITIVE)  # fixed order, used for class ids

KIND_UNICODE = "unicode_emoji"
KIND_ASCII = "ascii_emoticon"

SEQUENCE_LENGTH_HARD_CAP = 32


@dataclass(frozen=True)
class EmojiToken:
    """One atomic emoji grapheme cluster or ASCII emoticon."""

    id: int
    surface: str
    kind: str
    sentiment: str


@dataclass(frozen=True)
class SequenceSpaceConfig:
    """Per-side length bounds on inserted sequences."""

    l_min: int
    l_max: int

    def __post_init__(self):
        if self.l_min < 0:
            raise ValueError(f"l_min must be >= 0, got {self.l_min}")
        if self.l_max < self.l_min:
            raise ValueError(f"l_max < l_min: ({self.l_min}, {self.l_max})")
        if self.l_max > SEQUENCE_LENGTH_HARD_CAP:
            raise ValueError(
                f"l_max {self.l_max} exceeds hard cap {SEQUENCE_LENGTH_HARD_CAP}")


@dataclass(frozen=True)
class EmojiSequence:
    """Ordered token ids; the unit the attack prepends or appends."""

    tokens: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.tokens)

    def surfaces(self, lexicon: "EmojiLexicon") -> str:
        return "".join(lexicon.token(t).surface for t in self.tokens)


@dataclass
class EmojiLexicon:
    """Immutable after load; safe to share across attack workers.

    Sentiment subspaces keep their parent's token ids, so ``tokens[i].id``
    is not necessarily ``i``; always go through :meth:`token`.
    """

    tokens: list[EmojiToken]
    by_surface: dict[str, int] = field(default_factory=dict)
    by_id: dict[int, EmojiToken] = field(default_factory=dict)

    def __post_init__(self):
        if not self.by_surface:
            self.by_surface = {t.surface: t.id for t in self.tokens}
        if not self.by_id:
            self.by_id = {t.id: t for t in self.tokens}

    def __len__(self) -> int:
        return len(self.tokens)

    def token(self, token_id: int) -> EmojiToken:
        return self.by_id[token_id]

    def has_id(self, token_id: int) -> bool:
        return token_id in self.by_id

    def sentiments_present(self) -> set[str]:
        return {t.sentiment for t in self.tokens}

    def token_sentiment(self, token_id: int) -> str:
        return self.by_id[token_id].sentiment


def load_lexicon(source: str, required_sentiments=SENTIMENTS) -> EmojiLexicon:
    """Parse JSON Lines lexicon content into an :class:`EmojiLexicon`.

    One record per line: ``{"surface": ..., "kind": ..., "sentiment": ...}``.
    Token ids are assigned in file order. Raises :class:`LexiconError` on a
    malformed record (naming the line), a duplicate surface, or when a
    required sentiment class has no tokens.
    """
    tokens: list[EmojiToken] = []
    seen: dict[str, int] = {}
    for lineno, line in enumerate(source.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as e:
            raise LexiconError(f"line {lineno}: invalid JSON ({e.msg})") from e
        if not isinstance(rec, dict):
            raise LexiconError(f"line {lineno}: record is not an object")
        for key in ("surface", "kind", "sentiment"):
            if key not in rec:
                raise LexiconError(f"line {lineno}: missing field {key!r}")
        surface = unicodedata.normalize("NFC", rec["surface"])
        kind = rec["kind"]
        sentiment = rec["sentiment"]
        if not surface:
            raise LexiconError(f"line {lineno}: empty surface")
        if kind not in (KIND_UNICODE, KIND_ASCII):
            raise LexiconError(f"line {lineno}: unknown kind {kind!r}")
        if sentiment not in SENTIMENTS:
            raise LexiconError(f"line {lineno}: unknown sentiment {sentiment!r}")
        if kind == KIND_UNICODE and len(grapheme.clusters(surface)) != 1:
            raise LexiconError(
                f"line {lineno}: surface {surface!r} is not a single grapheme cluster")
        if kind == KIND_ASCII and not surface.isascii():
            raise LexiconError(f"line {lineno}: emoticon {surface!r} is not ASCII")
        if surface in seen:
            raise LexiconError(
                f"line {lineno}: duplicate surface {surface!r} (first at token "
                f"{seen[surface]})")
        seen[surface] = len(tokens)
        tokens.append(EmojiToken(id=len(tokens), surface=surface, kind=kind,
                                 sentiment=sentiment))
    if not tokens:
        raise LexiconError("lexicon is empty")
    present = {t.sentiment for t in tokens}
    missing = [s for s in required_sentiments if s not in present]
    if missing:
        raise LexiconError(f"lexicon has no tokens for sentiment class(es): "
                           f"{', '.join(missing)}")
    return EmojiLexicon(tokens=tokens)


def load_lexicon_file(path) -> EmojiLexicon:
    with open(path, encoding="utf-8") as f:
        return load_lexicon(f.read())


def default_lexicon() -> EmojiLexicon:
    """The bundled ~100-entry lexicon."""
    data = resources.files("advemoji.data").joinpath("default_lexicon.jsonl")
    return load_lexicon(data.read_text(encoding="utf-8"))


def _is_word_char(ch: str) -> bool:
    return unicodedata.category(ch)[0] in ("L", "N")


def parse_emoji_tokens(text: str, lexicon: EmojiLexicon) -> list[tuple[int, int]]:
    """All non-overlapping lexicon matches in ``text`` as (token id, byte offset).

    The text is NFC-normalized before matching, and offsets index into the
    UTF-8 encoding of the normalized text. Unicode emoji are matched as whole
    extended grapheme clusters; ASCII emoticons longest-first and only at
    word boundaries (neighbouring characters must not be letters or digits),
    which keeps ":/" inside URLs unmatched. Matches come back in ascending
    byte offset.
    """
    if not isinstance(text, str):
        raise TypeError("text must be str")
    try:
        text.encode("utf-8")
    except UnicodeEncodeError as e:
        raise ParseError(f"text is not valid Unicode: {e}") from e
    text = unicodedata.normalize("NFC", text)
    emoticons = sorted(
        ((t.surface, t.id) for t in lexicon.tokens if t.kind == KIND_ASCII),
        key=lambda p: -len(p[0]))
    spans = grapheme.cluster_spans(text)
    # char index -> byte offset of every cluster start, plus the end.
    matches: list[tuple[int, int]] = []
    byte_off = 0
    i = 0
    while i < len(spans):
        start, end = spans[i]
        cluster = text[start:end]
        tid = lexicon.by_surface.get(cluster)
        if tid is not None and lexicon.token(tid).kind == KIND_UNICODE:
            matches.append((tid, byte_off))
            byte_off += len(cluster.encode("utf-8"))
            i += 1
            continue
        matched = False
        if cluster.isascii():
            left_ok = start == 0 or not _is_word_char(text[start - 1])
            if left_ok:
                for surface, eid in emoticons:
                    end_pos = start + len(surface)
                    if text.startswith(surface, start):
                        right_ok = (end_pos == len(text)
                                    or not _is_word_char(text[end_pos]))
                        if right_ok:
                            matches.append((eid, byte_off))
                            byte_off += len(surface)  # ASCII: 1 byte per char
                            # skip the clusters covered by the emoticon
                            while i < len(spans) and spans[i][0] < end_pos:
                                i += 1
                            matched = True
                            break
        if not matched:
            byte_off += len(cluster.encode("utf-8"))
            i += 1
    return matches


def sequence_space_size(lexicon: EmojiLexicon, l: int) -> int:
    """Number of distinct sequences of length ``l``: |alphabet| ** l, exact."""
    if l < 0:
        raise ValueError("length must be >= 0")
    return len(lexicon) ** l


def sentiment_subspace(lexicon: EmojiLexicon, y: str) -> EmojiLexicon:
    """Sub-lexicon whose tokens all carry sentiment ``y``.

    Token ids are preserved from the parent lexicon, so sequences built from
    the subspace remain valid against the parent.
    """
    if y not in SENTIMENTS:
        raise ValueError(f"unknown sentiment label {y!r}")
    toks = [t for t in lexicon.tokens if t.sentiment == y]
    return EmojiLexicon(tokens=toks, by_surface={t.surface: t.id for t in toks})


def validate_sequence(seq: EmojiSequence, cfg: SequenceSpaceConfig,
                      lexicon: EmojiLexicon | None = None) -> bool:
    """Length-bounds (and, when a lexicon is given, token-id) check.

    Returns False rather than raising on any violation.
    """
    if not (cfg.l_min <= len(seq) <= cfg.l_max):
        return False
    if lexicon is not None:
        return all(lexicon.has_id(t) for t in seq.tokens)
    return True
