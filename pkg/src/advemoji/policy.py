"""Candidate-ranking policy: two-phase learning and top-k generation.

The policy is a desk-scale autoregressive sequence model over the emoji
vocabulary: per-step logits tables conditioned on (text sentiment class,
role prefix/suffix, position, previous token), passed through a trainable
affine-then-softmax reweighting stage (the emoji logits processor) before
sampling. Phase 1 fits the tables to a corpus of sentiment-matched
sequences by analytic-gradient descent on the negative log-likelihood;
phase 2 runs REINFORCE against a live oracle with a smoothed
multi-component reward. Ranking enumerates exact k-best sequences with a
dynamic program over the table policy, so top-k lists nest by construction.
"""

from __future__ import annotations

import base64
import hashlib
import heapq
import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .attack import AttackConfig, CandidatePair, adversarial_loss, concat_adversarial
from .errors import CheckpointError
from .lexicon import (EmojiLexicon, EmojiSequence, SENTIMENTS,
                      SequenceSpaceConfig)
from .oracles import Oracle, sentiment_of_sequence

log = logging.getLogger(__name__)

ROLE_PREFIX = "prefix"
ROLE_SUFFIX = "suffix"
ROLES = (ROLE_PREFIX, ROLE_SUFFIX)

TEXT = "text"
EMOJI = "emoji"

CHECKPOINT_VERSION = 1
DIST_TOL = 1e-9


@dataclass(frozen=True)
class Vocabulary:
    """Unified id space: text token ids first, then emoji token ids."""

    text_tokens: tuple[str, ...]
    emoji_surfaces: tuple[str, ...]
    emoji_lexicon_ids: tuple[int, ...]

    @property
    def n_text(self) -> int:
        return len(self.text_tokens)

    @property
    def n_emoji(self) -> int:
        return len(self.emoji_surfaces)

    def __len__(self) -> int:
        return self.n_text + self.n_emoji

    def id_of_text(self, token: str) -> int:
        return self.text_tokens.index(token)

    def id_of_emoji_surface(self, surface: str) -> int:
        return self.n_text + self.emoji_surfaces.index(surface)

    def surface_of(self, unified_id: int) -> str:
        if unified_id < self.n_text:
            return self.text_tokens[unified_id]
        return self.emoji_surfaces[unified_id - self.n_text]

    def modality_of(self, unified_id: int) -> str:
        return TEXT if unified_id < self.n_text else EMOJI


def build_vocabulary(corpus_text_tokens: list[str],
                     lexicon: EmojiLexicon) -> Vocabulary:
    """Namespaced unified vocabulary: text ids [0, n_text), emoji after."""
    if len(lexicon) == 0:
        raise ValueError("lexicon is empty")
    seen = dict.fromkeys(corpus_text_tokens)  # dedupe, keep first occurrence
    return Vocabulary(
        text_tokens=tuple(seen),
        emoji_surfaces=tuple(t.surface for t in lexicon.tokens),
        emoji_lexicon_ids=tuple(t.id for t in lexicon.tokens),
    )


def vocabulary_hash(vocab: Vocabulary, lexicon: EmojiLexicon) -> str:
    payload = {
        "text": list(vocab.text_tokens),
        "emoji": [[t.surface, t.sentiment] for t in lexicon.tokens],
    }
    blob = json.dumps(payload, ensure_ascii=False, sort_keys=True)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def modality_mask(modalities: list[str], mask_beta: float) -> np.ndarray:
    """M_ij = 0 for same-modality pairs, mask_beta across modalities."""
    if not modalities:
        raise ValueError("modalities list is empty")
    for m in modalities:
        if m not in (TEXT, EMOJI):
            raise ValueError(f"unknown modality {m!r}")
    is_text = np.array([m == TEXT for m in modalities])
    cross = is_text[:, None] != is_text[None, :]
    return np.where(cross, float(mask_beta), 0.0)


def attention_pool(features: np.ndarray, modalities: list[str],
                   mask_beta: float) -> np.ndarray:
    """Optional feature extractor: self-attention pooling with the
    cross-modality bias added to the attention logits."""
    f = np.asarray(features, dtype=float)
    if f.ndim != 2 or f.shape[0] != len(modalities):
        raise ValueError("features must be [n_tokens, dim] aligned with modalities")
    logits = f @ f.T / math.sqrt(f.shape[1]) + modality_mask(modalities, mask_beta)
    logits -= logits.max(axis=1, keepdims=True)
    w = np.exp(logits)
    w /= w.sum(axis=1, keepdims=True)
    return w @ f


def _softmax(v: np.ndarray) -> np.ndarray:
    m = np.max(v)
    e = np.exp(v - m)
    return e / e.sum()


def elp_transform(p_in: np.ndarray, W: np.ndarray, b: np.ndarray) -> np.ndarray:
    """softmax(W @ p_in + b): dynamic reweighting of an emoji distribution."""
    p_in = np.asarray(p_in, dtype=float)
    W = np.asarray(W, dtype=float)
    b = np.asarray(b, dtype=float)
    if W.shape != (p_in.size, p_in.size) or b.shape != (p_in.size,):
        raise ValueError(
            f"dimension mismatch: p {p_in.shape}, W {W.shape}, b {b.shape}")
    if abs(p_in.sum() - 1.0) > DIST_TOL:
        raise ValueError(f"p_in sums to {p_in.sum()!r}, not 1 within {DIST_TOL}")
    return _softmax(W @ p_in + b)


@dataclass
class TrainConfig:
    alpha_reward: float = 1.0
    beta_reward: float = 0.1
    lambda1: float = 0.5
    lambda2: float = 0.1
    smooth_k: int = 5
    mask_beta: float = 0.5
    learning_rate: float = 1.0
    epochs: int = 20
    seed: int = 0
    require_consistency: bool = True

    def __post_init__(self):
        if self.smooth_k < 1:
            raise ValueError("smooth_k must be >= 1")
        for name in ("alpha_reward", "beta_reward", "lambda1", "lambda2",
                     "mask_beta", "learning_rate"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")


@dataclass
class RewardTrace:
    raw: list[float] = field(default_factory=list)
    smoothed: list[float] = field(default_factory=list)
    epoch_losses: list[float] = field(default_factory=list)


class Policy:
    """Table-parameterized sequence policy over the emoji vocabulary.

    ``theta[c, r, t, prev, :]`` are the logits for sentiment class c, role r,
    position t, previous-token context prev (0 = start of sequence, else
    1 + emoji index). Per-step distributions are softmax(theta_row) pushed
    through the trainable reweighting stage softmax(W p + b).
    """

    def __init__(self, lexicon: EmojiLexicon, space: SequenceSpaceConfig,
                 text_tokens: list[str] | None = None, elp_scale: float = 8.0):
        self.lexicon = lexicon
        self.space = space
        self.vocab = build_vocabulary(text_tokens or [], lexicon)
        v = self.vocab.n_emoji
        self.theta = np.zeros((len(SENTIMENTS), len(ROLES), space.l_max,
                               v + 1, v))
        self.elp_w = elp_scale * np.eye(v)
        self.elp_b = np.zeros(v)
        self._sentiment_idx = np.array(
            [SENTIMENTS.index(t.sentiment) for t in lexicon.tokens])
        self._local_of_lexicon = {lid: i for i, lid in
                                  enumerate(self.vocab.emoji_lexicon_ids)}
        self.metadata: dict = {}

    # -- indexing helpers -------------------------------------------------

    @property
    def n_emoji(self) -> int:
        return self.vocab.n_emoji

    def class_index(self, sentiment: str) -> int:
        try:
            return SENTIMENTS.index(sentiment)
        except ValueError:
            raise ValueError(f"unknown sentiment class {sentiment!r}")

    def role_index(self, role: str) -> int:
        try:
            return ROLES.index(role)
        except ValueError:
            raise ValueError(f"role must be one of {ROLES}, got {role!r}")

    def allowed_mask(self, sentiment: str | None) -> np.ndarray:
        """Support restriction for sentiment-consistent generation."""
        if sentiment is None:
            return np.ones(self.n_emoji, dtype=bool)
        mask = self._sentiment_idx == SENTIMENTS.index(sentiment)
        if not mask.any():
            raise ValueError(f"lexicon has no {sentiment} tokens")
        return mask

    def local_index(self, lexicon_id: int) -> int:
        try:
            return self._local_of_lexicon[lexicon_id]
        except KeyError:
            raise ValueError(f"token id {lexicon_id} is outside the emoji "
                             f"vocabulary")

    def lexicon_id(self, local: int) -> int:
        return self.vocab.emoji_lexicon_ids[local]

    # -- per-step distributions -------------------------------------------

    def _forward(self, c: int, r: int, t: int, prev: int,
                 allowed: np.ndarray | None):
        """One autoregressive step. Returns (p, u, q) for gradient reuse."""
        z = self.theta[c, r, t, prev]
        p = _softmax(z)
        u = self.elp_w @ p + self.elp_b
        if allowed is not None and not allowed.all():
            u = np.where(allowed, u, -np.inf)
        q = _softmax(u)
        return p, u, q

    def step_distribution(self, sentiment: str, role: str, t: int,
                          prev_local: int | None,
                          allowed: np.ndarray | None = None) -> np.ndarray:
        c, r = self.class_index(sentiment), self.role_index(role)
        prev = 0 if prev_local is None else 1 + prev_local
        _, _, q = self._forward(c, r, t, prev, allowed)
        return q

    def _backward_step(self, c: int, r: int, t: int, prev: int, tok: int,
                       p: np.ndarray, q: np.ndarray, weight: float, grads):
        """Accumulate weight * d(log q[tok])/d(theta, W, b) into grads."""
        g_u = -q.copy()
        g_u[tok] += 1.0          # d log q_tok / du = e_tok - q
        g_u *= weight
        grads["b"] += g_u
        grads["W"] += np.outer(g_u, p)
        g_p = self.elp_w.T @ g_u
        g_z = p * (g_p - p @ g_p)
        grads["theta"][c, r, t, prev] += g_z

    def _zero_grads(self):
        return {"theta": np.zeros_like(self.theta),
                "W": np.zeros_like(self.elp_w),
                "b": np.zeros_like(self.elp_b)}

    def _apply(self, grads, scale: float):
        self.theta += scale * grads["theta"]
        self.elp_w += scale * grads["W"]
        self.elp_b += scale * grads["b"]

    # -- sequence-level quantities ----------------------------------------

    def sequence_local(self, seq: EmojiSequence) -> list[int]:
        return [self.local_index(t) for t in seq.tokens]

    def sequence_log_prob(self, sentiment: str, role: str, seq: EmojiSequence,
                          allowed: np.ndarray | None = None) -> float:
        c, r = self.class_index(sentiment), self.role_index(role)
        total = 0.0
        prev = 0
        for t, lid in enumerate(seq.tokens):
            tok = self.local_index(lid)
            _, _, q = self._forward(c, r, t, prev, allowed)
            total += math.log(max(q[tok], 1e-300))
            prev = 1 + tok
        return total


def copy_policy(policy: Policy) -> Policy:
    dup = Policy(policy.lexicon, policy.space,
                 text_tokens=list(policy.vocab.text_tokens))
    dup.theta = policy.theta.copy()
    dup.elp_w = policy.elp_w.copy()
    dup.elp_b = policy.elp_b.copy()
    dup.metadata = dict(policy.metadata)
    return dup


# -- phase 1: supervised pretraining --------------------------------------

def _corpus_nll_and_grads(policy: Policy, items, want_grads: bool):
    """Mean per-pair NLL over the corpus (both roles per pair).

    Gradients come back in the log-likelihood ascent direction, so applying
    them with a positive step descends the NLL.
    """
    grads = policy._zero_grads() if want_grads else None
    total = 0.0
    n_terms = 0
    for sentiment, locals_ in items:
        c = policy.class_index(sentiment)
        for r in range(len(ROLES)):
            prev = 0
            for t, tok in enumerate(locals_):
                p, _, q = policy._forward(c, r, t, prev, None)
                total += -math.log(max(q[tok], 1e-300))
                if want_grads:
                    policy._backward_step(c, r, t, prev, tok, p, q, 1.0, grads)
                prev = 1 + tok
            n_terms += 1
    if want_grads:
        for key in grads:
            grads[key] /= n_terms
    return total / n_terms, grads


def supervised_pretrain(policy: Policy,
                        corpus: list[tuple[str, EmojiSequence]],
                        cfg: TrainConfig) -> tuple[Policy, list[float]]:
    """Full-batch gradient descent on the sequence NLL (analytic gradients).

    Each corpus pair trains both the prefix and suffix tables: the pretraining
    corpus carries no role distinction. Returns the policy (updated in place)
    and the per-epoch loss trace, with the final loss evaluated after the
    last update so trace[-1] <= trace[0] is checkable directly.
    """
    if not corpus:
        raise ValueError("pretraining corpus is empty")
    items = []
    for sentiment, seq in corpus:
        if not (policy.space.l_min <= len(seq) <= policy.space.l_max):
            raise ValueError(
                f"corpus sequence length {len(seq)} outside policy space "
                f"({policy.space.l_min}, {policy.space.l_max})")
        items.append((sentiment, policy.sequence_local(seq)))
    lr = cfg.learning_rate
    trace = []
    loss, grads = _corpus_nll_and_grads(policy, items, True)
    trace.append(loss)
    for _ in range(cfg.epochs):
        policy._apply(grads, lr)
        loss_new, grads = _corpus_nll_and_grads(policy, items, True)
        if loss_new > loss:
            lr *= 0.5  # simple backoff keeps full-batch descent monotone-ish
        loss = loss_new
        trace.append(loss)
    policy.metadata.update({"pretrain_epochs": cfg.epochs,
                            "pretrain_seed": cfg.seed})
    return policy, trace


# -- sampling ---------------------------------------------------------------

def sample_sequence(policy: Policy, x_features: str, role: str, l: int,
                    rng, allowed: np.ndarray | None = None,
                    _record: list | None = None) -> tuple[EmojiSequence, float]:
    """Autoregressively sample ``l`` tokens; returns (sequence, log-prob)."""
    if not (policy.space.l_min <= l <= policy.space.l_max):
        raise ValueError(f"length {l} outside policy space "
                         f"({policy.space.l_min}, {policy.space.l_max})")
    if isinstance(rng, int):
        rng = np.random.default_rng(rng)
    c, r = policy.class_index(x_features), policy.role_index(role)
    prev = 0
    log_prob = 0.0
    out = []
    for t in range(l):
        p, _, q = policy._forward(c, r, t, prev, allowed)
        tok = int(rng.choice(policy.n_emoji, p=q))
        log_prob += math.log(max(q[tok], 1e-300))
        if _record is not None:
            _record.append((c, r, t, prev, tok, p, q))
        out.append(policy.lexicon_id(tok))
        prev = 1 + tok
    return EmojiSequence(tokens=tuple(out)), log_prob


# -- rewards ---------------------------------------------------------------

def _normalized_entropy(q: np.ndarray, n_vocab: int) -> float:
    nz = q[q > 0]
    h = float(-(nz * np.log(nz)).sum())
    return h / math.log(n_vocab) if n_vocab > 1 else 0.0


def _pair_entropy(policy: Policy, sentiment: str, pair: CandidatePair,
                  allowed: np.ndarray | None) -> float:
    """Mean per-step entropy along the pair's path, normalized by log |V_e|."""
    c = policy.class_index(sentiment)
    hs = []
    for role, seq in ((ROLE_PREFIX, pair.prefix), (ROLE_SUFFIX, pair.suffix)):
        r = policy.role_index(role)
        prev = 0
        for t, lid in enumerate(seq.tokens):
            tok = policy.local_index(lid)
            _, _, q = policy._forward(c, r, t, prev, allowed)
            hs.append(_normalized_entropy(q, policy.n_emoji))
            prev = 1 + tok
    return float(np.mean(hs)) if hs else 0.0


def attack_reward(pred, y: str) -> float:
    """tanh of the divergence loss (soft labels) or +/-1 (hard labels)."""
    if pred.abstained:
        return -1.0
    if pred.probs is None:
        return 1.0 if pred.label != y else -1.0
    return math.tanh(adversarial_loss(pred.probs, y))


def reward(x: str, y: str, pair: CandidatePair, oracle: Oracle,
           policy: Policy, cfg: TrainConfig,
           x_sentiment: str | None = None) -> float:
    """alpha * attack reward + beta * diversity reward (one oracle query)."""
    sentiment = x_sentiment if x_sentiment is not None else y
    adv = concat_adversarial(pair.prefix, x, pair.suffix, policy.lexicon)
    pred = oracle.classify(adv)
    r_atk = attack_reward(pred, y)
    allowed = (policy.allowed_mask(sentiment)
               if cfg.require_consistency else None)
    r_div = _pair_entropy(policy, sentiment, pair, allowed)
    return cfg.alpha_reward * r_atk + cfg.beta_reward * r_div


def smooth_reward(raw: list[float], k: int) -> list[float]:
    """Trailing-window mean, window min(k, t+1): partial windows at the
    start use every value available so far."""
    if k < 1:
        raise ValueError("smoothing window must be >= 1")
    return [sum(raw[max(0, t - k + 1):t + 1]) / min(k, t + 1)
            for t in range(len(raw))]


def combined_loss(l_sem: float, l_adv: float, l_div: float,
                  lambda1: float, lambda2: float) -> float:
    """l_sem + lambda1 * l_adv + lambda2 * l_div, inputs checked finite."""
    vals = (l_sem, l_adv, l_div, lambda1, lambda2)
    if not all(math.isfinite(v) for v in vals):
        raise ValueError(f"non-finite input to combined loss: {vals}")
    return l_sem + lambda1 * l_adv + lambda2 * l_div


# -- phase 2: REINFORCE ------------------------------------------------------

def rl_train(policy: Policy, dataset: list[tuple[str, str]], oracle: Oracle,
             cfg: TrainConfig,
             sentiment_of_label=None) -> tuple[Policy, RewardTrace]:
    """REINFORCE with smoothed rewards and a batch-mean baseline.

    Per example: draw per-side lengths uniformly from the space bounds,
    sample a prefix and a suffix, query the oracle once on the assembled
    text, and score with the multi-component reward. Updates are applied
    per epoch; the advantage of each sample is its smoothed reward minus
    the epoch mean. Deterministic given cfg.seed.
    """
    if not dataset:
        raise ValueError("dataset is empty")
    rng = np.random.default_rng(cfg.seed)
    trace = RewardTrace()
    to_sentiment = sentiment_of_label or (lambda y: y)
    l_lo, l_hi = policy.space.l_min, policy.space.l_max
    for _ in range(cfg.epochs):
        order = rng.permutation(len(dataset))
        samples = []
        n_consistent = 0
        for idx in order:
            x, y = dataset[idx]
            sentiment = to_sentiment(y)
            allowed = (policy.allowed_mask(sentiment)
                       if cfg.require_consistency else None)
            steps: list = []
            lp = int(rng.integers(l_lo, l_hi + 1)) if l_hi > l_lo else l_lo
            ls = int(rng.integers(l_lo, l_hi + 1)) if l_hi > l_lo else l_lo
            prefix, _ = sample_sequence(policy, sentiment, ROLE_PREFIX, lp,
                                        rng, allowed, _record=steps)
            suffix, _ = sample_sequence(policy, sentiment, ROLE_SUFFIX, ls,
                                        rng, allowed, _record=steps)
            pair = CandidatePair(prefix=prefix, suffix=suffix)
            adv_text = concat_adversarial(prefix, x, suffix, policy.lexicon)
            pred = oracle.classify(adv_text)
            r_atk = attack_reward(pred, y)
            r_div = float(np.mean([_normalized_entropy(q, policy.n_emoji)
                                   for *_ignored, q in steps]))
            if (sentiment_of_sequence(prefix, policy.lexicon) == sentiment
                    and sentiment_of_sequence(suffix, policy.lexicon) == sentiment):
                n_consistent += 1
            r = cfg.alpha_reward * r_atk + cfg.beta_reward * r_div
            trace.raw.append(r)
            samples.append((steps, r_atk, r_div))
        smoothed_all = smooth_reward(trace.raw, cfg.smooth_k)
        batch = smoothed_all[-len(samples):]
        baseline = float(np.mean(batch))
        grads = policy._zero_grads()
        for (steps, _, _), sm in zip(samples, batch):
            advantage = sm - baseline
            if advantage == 0.0:
                continue
            for c, r_, t, prev, tok, p, q in steps:
                policy._backward_step(c, r_, t, prev, tok, p, q, advantage,
                                      grads)
        policy._apply(grads, cfg.learning_rate / len(samples))
        # epoch diagnostic through the unified objective
        frac_ok = max(n_consistent / len(samples), 1e-12)
        mean_r = float(np.mean([cfg.alpha_reward * ra + cfg.beta_reward * rd
                                for _, ra, rd in samples]))
        mean_h = float(np.mean([rd for _, _, rd in samples]))
        trace.epoch_losses.append(combined_loss(
            -math.log(frac_ok), -mean_r, -mean_h, cfg.lambda1, cfg.lambda2))
    trace.smoothed = smooth_reward(trace.raw, cfg.smooth_k)
    policy.metadata.update({"rl_epochs": cfg.epochs, "rl_seed": cfg.seed})
    return policy, trace


# -- candidate generation -----------------------------------------------------

def _kbest_sequences(length: int, k: int, allowed_idx: np.ndarray,
                     logq_steps: list[np.ndarray]) -> list[tuple[float, tuple]]:
    """Exact k-best token sequences of one length under the table policy.

    Dynamic program keeping the k best partial sequences per last-token
    state; total order is (score desc, token tuple asc) so ties are stable.
    """
    first = logq_steps[0][0]  # start-of-sequence context row
    beams = {a: [(first[j], (int(allowed_idx[j]),))]
             for j, a in enumerate(allowed_idx)}
    for t in range(1, length):
        rows = logq_steps[t]
        new_beams = {}
        for j, a in enumerate(allowed_idx):
            cands = []
            for pj, pa in enumerate(allowed_idx):
                step = rows[1 + pj][j]
                for s, ids in beams.get(int(pa), ()):
                    cands.append((s + step, ids + (int(a),)))
            cands.sort(key=lambda e: (-e[0], e[1]))
            new_beams[int(a)] = cands[:k]
        beams = new_beams
    final = [entry for lst in beams.values() for entry in lst]
    final.sort(key=lambda e: (-e[0], e[1]))
    return final[:k]


def _role_kbest(policy: Policy, sentiment: str, role: str, k: int,
                space: SequenceSpaceConfig,
                allowed: np.ndarray | None) -> list[tuple[float, tuple]]:
    """k-best sequences for one role across all admissible lengths."""
    c, r = policy.class_index(sentiment), policy.role_index(role)
    mask = allowed if allowed is not None else np.ones(policy.n_emoji, bool)
    allowed_idx = np.flatnonzero(mask)
    # log q rows for every (position, previous-token) context, vectorized:
    # row 0 is the start context, row 1+j the context "previous = allowed[j]".
    logq_steps = []
    for t in range(space.l_max):
        prevs = np.concatenate(([0], 1 + allowed_idx))
        z = policy.theta[c, r, t][prevs]              # [n_prev, V]
        z = z - z.max(axis=1, keepdims=True)
        p = np.exp(z)
        p /= p.sum(axis=1, keepdims=True)
        u = p @ policy.elp_w.T + policy.elp_b
        u[:, ~mask] = -np.inf
        u -= u.max(axis=1, keepdims=True)
        with np.errstate(divide="ignore"):
            logq = u - np.log(np.exp(u).sum(axis=1, keepdims=True))
        logq_steps.append(logq[:, allowed_idx])
    out: list[tuple[float, tuple]] = []
    for length in range(space.l_min, space.l_max + 1):
        if length == 0:
            out.append((0.0, ()))
            continue
        out.extend(_kbest_sequences(length, k, allowed_idx, logq_steps))
    out.sort(key=lambda e: (-e[0], e[1]))
    return out[:k]


def rank_candidates(policy: Policy, x_features: str, k: int,
                    cfg: AttackConfig) -> list[CandidatePair]:
    """The k highest joint-log-probability (prefix, suffix) pairs.

    Enumeration is an exact k-best dynamic program per role merged with a
    k-best product heap, totally ordered by (score desc, combined token ids
    asc); top-k lists are therefore prefixes of top-k' lists for k <= k'.
    With consistency required, generation is restricted to the sentiment
    subspace of ``x_features`` and zero-length sides are excluded (an empty
    side has no sentiment).
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    space = cfg.space
    if space.l_max > policy.space.l_max:
        raise ValueError(
            f"attack l_max {space.l_max} exceeds the policy's table depth "
            f"{policy.space.l_max}")
    allowed = (policy.allowed_mask(x_features)
               if cfg.require_consistency else None)
    eff_space = space
    if cfg.require_consistency and space.l_min == 0:
        eff_space = SequenceSpaceConfig(1, space.l_max)
    side_p = _role_kbest(policy, x_features, ROLE_PREFIX, k, eff_space, allowed)
    side_s = _role_kbest(policy, x_features, ROLE_SUFFIX, k, eff_space, allowed)

    def ids_key(i: int, j: int) -> tuple:
        return side_p[i][1] + (-1,) + side_s[j][1]

    heap = [(-(side_p[0][0] + side_s[0][0]), ids_key(0, 0), 0, 0)]
    seen = {(0, 0)}
    pairs: list[CandidatePair] = []
    while heap and len(pairs) < k:
        negscore, _, i, j = heapq.heappop(heap)
        pairs.append(CandidatePair(
            prefix=EmojiSequence(tuple(policy.lexicon_id(t)
                                       for t in side_p[i][1])),
            suffix=EmojiSequence(tuple(policy.lexicon_id(t)
                                       for t in side_s[j][1])),
            score=-negscore))
        for ni, nj in ((i + 1, j), (i, j + 1)):
            if ni < len(side_p) and nj < len(side_s) and (ni, nj) not in seen:
                seen.add((ni, nj))
                heapq.heappush(heap, (-(side_p[ni][0] + side_s[nj][0]),
                                      ids_key(ni, nj), ni, nj))
    if len(pairs) < k:
        log.warning("space bounds admit only %d candidate pairs (requested %d)",
                    len(pairs), k)
    return pairs


def random_candidates(policy: Policy, x_features: str, k: int,
                      cfg: AttackConfig, rng) -> list[CandidatePair]:
    """Uniform-random candidate ordering: the no-learning baseline."""
    if isinstance(rng, int):
        rng = np.random.default_rng(rng)
    allowed = (policy.allowed_mask(x_features)
               if cfg.require_consistency else np.ones(policy.n_emoji, bool))
    pool = np.flatnonzero(allowed)
    lo = max(cfg.space.l_min, 1) if cfg.require_consistency else cfg.space.l_min
    hi = cfg.space.l_max
    out: list[CandidatePair] = []
    seen = set()
    for _ in range(200 * k):
        if len(out) >= k:
            break
        lengths = [int(rng.integers(lo, hi + 1)) if hi > lo else lo
                   for _ in range(2)]
        sides = [tuple(int(policy.lexicon_id(int(rng.choice(pool))))
                       for _ in range(n)) for n in lengths]
        key = (sides[0], sides[1])
        if key in seen:
            continue
        seen.add(key)
        out.append(CandidatePair(prefix=EmojiSequence(sides[0]),
                                 suffix=EmojiSequence(sides[1])))
    return out


# -- checkpointing -----------------------------------------------------------

def _encode_array(a: np.ndarray) -> dict:
    return {"dtype": str(a.dtype), "shape": list(a.shape),
            "data": base64.b64encode(np.ascontiguousarray(a).tobytes()).decode()}


def _decode_array(d: dict) -> np.ndarray:
    a = np.frombuffer(base64.b64decode(d["data"]), dtype=d["dtype"])
    return a.reshape(d["shape"]).copy()


def save_policy(policy: Policy, path) -> None:
    """Write a versioned JSON checkpoint (space, vocab hash, tables, W, b)."""
    payload = {
        "version": CHECKPOINT_VERSION,
        "space": {"l_min": policy.space.l_min, "l_max": policy.space.l_max},
        "vocab_hash": vocabulary_hash(policy.vocab, policy.lexicon),
        "text_tokens": list(policy.vocab.text_tokens),
        "theta": _encode_array(policy.theta),
        "elp_w": _encode_array(policy.elp_w),
        "elp_b": _encode_array(policy.elp_b),
        "metadata": policy.metadata,
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, ensure_ascii=False)


def load_policy(path, lexicon: EmojiLexicon) -> Policy:
    """Load a checkpoint, validating the vocabulary hash against ``lexicon``."""
    try:
        with open(path, encoding="utf-8") as f:
            payload = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise CheckpointError(f"unreadable checkpoint {path}: {e}") from e
    if payload.get("version") != CHECKPOINT_VERSION:
        raise CheckpointError(
            f"unsupported checkpoint version {payload.get('version')!r}")
    space = SequenceSpaceConfig(**payload["space"])
    policy = Policy(lexicon, space, text_tokens=payload["text_tokens"])
    expected = vocabulary_hash(policy.vocab, lexicon)
    if payload["vocab_hash"] != expected:
        raise CheckpointError(
            "checkpoint vocabulary does not match the active lexicon "
            f"(stored {payload['vocab_hash'][:12]}..., active {expected[:12]}...)")
    policy.theta = _decode_array(payload["theta"])
    policy.elp_w = _decode_array(payload["elp_w"])
    policy.elp_b = _decode_array(payload["elp_b"])
    if policy.theta.shape != (len(SENTIMENTS), len(ROLES), space.l_max,
                              policy.n_emoji + 1, policy.n_emoji):
        raise CheckpointError("theta shape does not match space/vocabulary")
    policy.metadata = payload.get("metadata", {})
    return policy
