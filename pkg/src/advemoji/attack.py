"""Zero-word-perturbation attack math and the top-k early-stopping loop.

The attack never touches a byte of the input text: candidate emoji pairs are
prepended/appended, candidates are tried in rank order against the target
oracle, and the loop stops at the first label flip. Sentiment consistency
and stealthiness are computable locally (no oracle cost), so candidate
filtering happens before any query.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

from .errors import AttackError, OracleError
from .lexicon import EmojiLexicon, EmojiSequence, SequenceSpaceConfig
from .oracles import Oracle, sentiment_of_sequence

PROB_FLOOR = 1e-12  # clamp before log; saturated softmax outputs otherwise blow up


@dataclass(frozen=True)
class AttackConfig:
    top_k: int = 30
    space: SequenceSpaceConfig = SequenceSpaceConfig(1, 4)
    alpha_stealth: float = 0.5
    require_consistency: bool = True
    hard_label_mode: bool = False

    def __post_init__(self):
        if self.top_k < 1:
            raise ValueError("top_k must be >= 1")
        if not 0.0 <= self.alpha_stealth <= 1.0:
            raise ValueError("alpha_stealth must lie in [0, 1]")


@dataclass(frozen=True)
class CandidatePair:
    prefix: EmojiSequence
    suffix: EmojiSequence
    score: float = 0.0


@dataclass
class AttackResult:
    success: bool
    queries: int
    elapsed: float
    original_label: str
    adversarial_text: str | None = None
    pair: CandidatePair | None = None
    loss: float | None = None
    stealth: float | None = None
    flipped_label: str | None = None


def concat_adversarial(s: EmojiSequence, x: str, s_prime: EmojiSequence,
                       lexicon: EmojiLexicon) -> str:
    """Prefix surfaces + x + suffix surfaces, with no separators.

    The original text is embedded byte-identically; only the flanks change.
    """
    if not x:
        raise ValueError("attack on empty text is undefined")
    return s.surfaces(lexicon) + x + s_prime.surfaces(lexicon)


def adversarial_loss(probs: dict[str, float], y: str) -> float:
    """log p(y_hat) - log p(y), y_hat the best-scoring incorrect label.

    Positive iff the model's top-1 label differs from y (absent exact ties).
    Ties among incorrect labels break by ascending label order.
    """
    if y not in probs:
        raise ValueError(f"label {y!r} missing from distribution")
    if len(probs) < 2:
        raise ValueError("need a distribution over at least 2 labels")
    y_hat = min((l for l in probs if l != y),
                key=lambda l: (-probs[l], l))
    p_hat = max(probs[y_hat], PROB_FLOOR)
    p_y = max(probs[y], PROB_FLOOR)
    return math.log(p_hat) - math.log(p_y)


def _length_penalty_raw(l: int, l_min: int, l_max: int) -> float:
    if l < 0:
        raise ValueError("length must be >= 0")
    if l_max == l_min:
        return 1.0 if l <= l_min else 0.0
    raw = 1.0 - (l - l_min) / (l_max - l_min)
    return min(1.0, max(0.0, raw))


def length_penalty(l: int, space: SequenceSpaceConfig) -> float:
    """max(0, 1 - (l - l_min)/(l_max - l_min)), clamped to [0, 1].

    Degenerate bounds (l_max == l_min) give 1 at or under the bound, else 0.
    """
    return _length_penalty_raw(l, space.l_min, space.l_max)


def sentiment_consistency(x_label: str, s: EmojiSequence,
                          s_prime: EmojiSequence,
                          lexicon: EmojiLexicon) -> int:
    """1 iff prefix, suffix and text share one sentiment label, else 0.

    Empty sequences carry no sentiment and fail the check.
    """
    if len(s) == 0 or len(s_prime) == 0:
        return 0
    return int(sentiment_of_sequence(s, lexicon) == x_label
               and sentiment_of_sequence(s_prime, lexicon) == x_label)


def stealthiness(x_label: str, pair: CandidatePair, cfg: AttackConfig,
                 lexicon: EmojiLexicon) -> float:
    """alpha * consistency + (1 - alpha) * length penalty, in [0, 1].

    The penalty sees the combined length |s| + |s'|, so its bounds are twice
    the per-side bounds.
    """
    delta = sentiment_consistency(x_label, pair.prefix, pair.suffix, lexicon)
    gamma = _length_penalty_raw(len(pair.prefix) + len(pair.suffix),
                                2 * cfg.space.l_min, 2 * cfg.space.l_max)
    a = cfg.alpha_stealth
    return a * delta + (1.0 - a) * gamma


def _parses_fully(segment: str, lexicon: EmojiLexicon) -> bool:
    """True when every byte of segment is covered by lexicon token surfaces."""
    if not segment:
        return True
    from .lexicon import parse_emoji_tokens
    matches = parse_emoji_tokens(segment, lexicon)
    rebuilt = "".join(lexicon.token(t).surface for t, _ in matches)
    return rebuilt == segment


def perturbation_rate(x: str, adv: str,
                      lexicon: EmojiLexicon | None = None) -> float:
    """0.0 exactly when adv is x plus lexicon-token flanks; else a diagnostic.

    Zero requires x to appear as one contiguous byte-identical substring of
    adv with (when a lexicon is given) everything outside that occurrence
    parsing fully as lexicon tokens. The nonzero diagnostic is the fraction
    of x's words not recoverable in order from adv, floored at
    1/(word count + 1) so the zero case stays an exact equivalence.
    """
    xb = x.encode("utf-8")
    ab = adv.encode("utf-8")
    start = 0
    while xb:
        i = ab.find(xb, start)
        if i < 0:
            break
        # UTF-8 is self-synchronizing: a match of valid UTF-8 inside valid
        # UTF-8 always lands on code point boundaries, so decode is safe.
        before = ab[:i].decode("utf-8")
        after = ab[i + len(xb):].decode("utf-8")
        if lexicon is None or (_parses_fully(before, lexicon)
                               and _parses_fully(after, lexicon)):
            return 0.0
        start = i + 1
    words = x.split()
    if not words:
        return 1.0
    adv_words = adv.split()
    j = 0
    matched = 0
    for w in words:
        while j < len(adv_words) and adv_words[j] != w:
            j += 1
        if j < len(adv_words):
            matched += 1
            j += 1
    frac = (len(words) - matched) / len(words)
    return frac if frac > 0 else 1.0 / (len(words) + 1)


def attack(x: str, y: str, candidates: list[CandidatePair], oracle: Oracle,
           cfg: AttackConfig, *, lexicon: EmojiLexicon | None = None,
           x_sentiment: str | None = None,
           clock=time.perf_counter) -> AttackResult:
    """Try ranked candidates against the oracle, stopping at the first flip.

    Queries exactly one oracle call per candidate tried, never more than
    cfg.top_k. Confirming the label of x itself is the caller's job (dataset
    label or one separately-counted baseline query). On failure the returned
    pair is the best-loss candidate seen (soft-label) or the last one tried
    (hard-label). Stealth is reported when lexicon and x_sentiment are given.
    """
    if not x:
        raise ValueError("attack on empty text is undefined")
    if not candidates:
        raise ValueError("empty candidate list")
    if lexicon is None:
        raise ValueError("lexicon is required to render candidate surfaces")
    t0 = clock()
    queries = 0
    best_loss = -math.inf
    best: tuple[CandidatePair, str] | None = None
    last: tuple[CandidatePair, str] | None = None

    def finish(success, pair_adv, loss, flipped):
        pair, adv = pair_adv if pair_adv else (None, None)
        stealth = None
        if pair is not None and x_sentiment is not None:
            stealth = stealthiness(x_sentiment, pair, cfg, lexicon)
        return AttackResult(
            success=success, queries=queries, elapsed=clock() - t0,
            original_label=y, adversarial_text=adv, pair=pair,
            loss=loss, stealth=stealth, flipped_label=flipped)

    for pair in candidates[:cfg.top_k]:
        adv_text = concat_adversarial(pair.prefix, x, pair.suffix, lexicon)
        try:
            pred = oracle.classify(adv_text)
        except OracleError as e:
            raise AttackError(f"oracle failed after {queries} queries: {e}",
                              queries=queries) from e
        queries += 1
        last = (pair, adv_text)
        if pred.abstained:
            continue  # configured abstention counts as no flip
        hard = cfg.hard_label_mode or pred.probs is None
        if pred.label != y:
            loss = 1.0 if hard else adversarial_loss(pred.probs, y)
            return finish(True, (pair, adv_text), loss, pred.label)
        if hard:
            continue
        loss = adversarial_loss(pred.probs, y)
        if loss > best_loss:
            best_loss = loss
            best = (pair, adv_text)

    if best is not None:
        return finish(False, best, best_loss, None)
    return finish(False, last, -1.0 if last else None, None)
