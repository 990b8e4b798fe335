"""Classifier oracles and the emoji-sentiment oracle.

Everything the attack queries goes through one contract: ``classify(text)``
returns a :class:`Prediction` and bumps the oracle's :class:`QueryLedger` by
exactly one, no matter how many transport retries happened underneath.
Three implementations are provided: a deterministic in-process naive-bayes
baseline (stand-in for fine-tuned transformer targets), a generic HTTP
classifier client, and a hard-label LLM chat adapter.
"""

from __future__ import annotations

import json
import math
import os
import re
import threading
import time
from collections import Counter, deque
from dataclasses import dataclass, field

import httpx

from . import grapheme
from .errors import AbstentionError, OracleError, ProtocolError
from .lexicon import EmojiLexicon, EmojiSequence, SENTIMENTS, parse_emoji_tokens

PROB_SUM_TOL = 1e-6


@dataclass
class Prediction:
    """One oracle answer: a label, optionally a full distribution."""

    label: str
    probs: dict[str, float] | None = None
    latency: float = 0.0
    abstained: bool = False

    def validate(self) -> "Prediction":
        if self.probs is not None:
            total = sum(self.probs.values())
            if abs(total - 1.0) > PROB_SUM_TOL:
                raise ProtocolError(
                    f"probabilities sum to {total:.6f}, not 1 within {PROB_SUM_TOL}")
            if any(p < 0 for p in self.probs.values()):
                raise ProtocolError("negative probability in distribution")
            top = min(sorted(self.probs), key=lambda k: -self.probs[k])
            if self.probs.get(self.label, -1.0) < self.probs[top]:
                raise ProtocolError(
                    f"label {self.label!r} is not the argmax of the distribution")
        return self


class QueryLedger:
    """Thread-safe query and latency accounting."""

    def __init__(self, ring_size: int = 256):
        self._lock = threading.Lock()
        self.queries = 0
        self.total_latency = 0.0
        self.per_call: deque[tuple[float, float]] = deque(maxlen=ring_size)

    def record(self, latency: float) -> None:
        with self._lock:
            self.queries += 1
            self.total_latency += latency
            self.per_call.append((time.time(), latency))


class Oracle:
    """Base classifier-oracle: subclasses implement :meth:`_predict`."""

    name = "oracle"
    labels: tuple[str, ...] = ()

    def __init__(self):
        self.ledger = QueryLedger()

    def classify(self, text: str) -> Prediction:
        if not text:
            raise OracleError("cannot classify empty text")
        t0 = time.perf_counter()
        pred = self._predict(text)
        pred.latency = time.perf_counter() - t0
        self.ledger.record(pred.latency)
        return pred

    def _predict(self, text: str) -> Prediction:
        raise NotImplementedError


_WORD_RE = re.compile(r"[a-z0-9']+")


class NaiveBayesClassifier(Oracle):
    """Multinomial naive bayes over word unigrams plus emoji tokens.

    Add-one smoothing, deterministic, exposes the full posterior. Emoji are
    tokenized with the lexicon when one is given (so inserted sequences hit
    the same features the engine produced); otherwise any non-ASCII grapheme
    cluster counts as one token.
    """

    name = "naive-bayes"

    def __init__(self, corpus: list[tuple[str, str]],
                 lexicon: EmojiLexicon | None = None):
        super().__init__()
        labels = sorted({label for _, label in corpus})
        if len(labels) < 2:
            raise ValueError("corpus must contain at least 2 distinct labels")
        self.labels = tuple(labels)
        self.lexicon = lexicon
        vocab: set[str] = set()
        counts = {c: Counter() for c in labels}
        docs = Counter()
        for text, label in corpus:
            toks = self.tokenize(text)
            vocab.update(toks)
            counts[label].update(toks)
            docs[label] += 1
        self.vocab = sorted(vocab)
        self._vocab_set = set(self.vocab)
        total_docs = len(corpus)
        self._log_prior = {c: math.log(docs[c] / total_docs) for c in labels}
        self._log_lik = {}
        v = len(self.vocab)
        for c in labels:
            denom = sum(counts[c].values()) + v
            self._log_lik[c] = {w: math.log((counts[c][w] + 1) / denom)
                                for w in self.vocab}

    def tokenize(self, text: str) -> list[str]:
        toks = _WORD_RE.findall(text.lower())
        if self.lexicon is not None:
            for tid, _ in parse_emoji_tokens(text, self.lexicon):
                toks.append(self.lexicon.token(tid).surface)
        else:
            toks.extend(c for c in grapheme.clusters(text) if not c.isascii())
        return toks

    def _predict(self, text: str) -> Prediction:
        toks = [t for t in self.tokenize(text) if t in self._vocab_set]
        scores = {}
        for c in self.labels:
            lik = self._log_lik[c]
            scores[c] = self._log_prior[c] + sum(lik[t] for t in toks)
        m = max(scores.values())
        exp = {c: math.exp(s - m) for c, s in scores.items()}
        z = sum(exp.values())
        probs = {c: exp[c] / z for c in self.labels}
        label = min(self.labels, key=lambda c: (-probs[c], c))
        return Prediction(label=label, probs=probs).validate()


def train_baseline(corpus: list[tuple[str, str]],
                   lexicon: EmojiLexicon | None = None) -> NaiveBayesClassifier:
    """Train the deterministic in-process baseline classifier."""
    return NaiveBayesClassifier(corpus, lexicon=lexicon)


def sentiment_of_sequence(s: EmojiSequence | tuple[int, ...],
                          lexicon: EmojiLexicon) -> str:
    """Sentiment of an emoji sequence: strict-majority vote over token tags.

    No strict majority (including ties) comes out neutral. Empty sequences
    have no sentiment and raise.
    """
    ids = s.tokens if isinstance(s, EmojiSequence) else tuple(s)
    if not ids:
        raise ValueError("empty sequence has no sentiment")
    votes = Counter(lexicon.token_sentiment(t) for t in ids)
    top, count = votes.most_common(1)[0]
    return top if count * 2 > len(ids) else "neutral"


class HttpClassifier(Oracle):
    """Generic classifier client for the POST /classify wire protocol.

    Request ``{"text": ...}``; response ``{"label": ..., "probs": {...}}``
    with probs optional. Transport failures retry with exponential backoff;
    retries do not add ledger queries (one logical classification, one
    query).
    """

    def __init__(self, endpoint: str, timeout: float = 10.0, retries: int = 2,
                 backoff_base: float = 0.1, name: str | None = None):
        super().__init__()
        self.endpoint = endpoint.rstrip("/")
        self.retries = retries
        self.backoff_base = backoff_base
        self.name = name or self.endpoint
        self._client = httpx.Client(timeout=timeout)

    def close(self):
        self._client.close()

    def _request(self, url: str, payload: dict) -> httpx.Response:
        attempt = 0
        while True:
            try:
                return self._client.post(url, json=payload)
            except httpx.HTTPError as e:
                if attempt >= self.retries:
                    raise OracleError(
                        f"transport failure after {attempt + 1} attempts: {e}") from e
                time.sleep(self.backoff_base * (2 ** attempt))
                attempt += 1

    def _predict(self, text: str) -> Prediction:
        resp = self._request(f"{self.endpoint}/classify", {"text": text})
        if resp.status_code != 200:
            raise ProtocolError(
                f"HTTP {resp.status_code} from {self.endpoint}/classify: "
                f"{resp.text[:200]}")
        try:
            body = resp.json()
        except json.JSONDecodeError as e:
            raise ProtocolError(f"non-JSON response: {resp.text[:200]}") from e
        if not isinstance(body, dict) or "label" not in body:
            raise ProtocolError(f"response missing 'label': {resp.text[:200]}")
        probs = body.get("probs")
        if probs is not None:
            if not isinstance(probs, dict):
                raise ProtocolError("'probs' is not an object")
            probs = {str(k): float(v) for k, v in probs.items()}
        return Prediction(label=str(body["label"]), probs=probs).validate()


DEFAULT_LLM_TEMPLATE = (
    "Classify the sentiment of the following text. "
    "Answer with exactly one word from this list: {labels}.\n\n"
    "Text: {text}"
)


class LlmClassifier(Oracle):
    """Hard-label adapter for OpenAI-style chat-completions endpoints.

    The reply is parsed by case-insensitive whole-token matching of the
    label set; zero or multiple distinct label hits is an abstention.
    With ``abstain="no_flip"`` the abstention is surfaced as a Prediction
    flagged ``abstained=True``, which the attack loop counts as no flip.
    """

    def __init__(self, endpoint: str, model: str, label_set: list[str],
                 prompt_template: str = DEFAULT_LLM_TEMPLATE,
                 api_key_env: str = "ADVEMOJI_LLM_API_KEY",
                 abstain: str = "error", timeout: float = 30.0,
                 retries: int = 2, backoff_base: float = 0.25,
                 name: str | None = None):
        super().__init__()
        if "{text}" not in prompt_template:
            raise ValueError("prompt template must contain a {text} placeholder")
        if "{labels}" not in prompt_template and not all(
                l.lower() in prompt_template.lower() for l in label_set):
            raise ValueError("prompt template must enumerate the label set "
                             "(or contain a {labels} placeholder)")
        if abstain not in ("error", "no_flip"):
            raise ValueError("abstain must be 'error' or 'no_flip'")
        self.endpoint = endpoint.rstrip("/")
        self.model = model
        self.labels = tuple(label_set)
        self.template = prompt_template
        self.api_key_env = api_key_env
        self.abstain = abstain
        self.retries = retries
        self.backoff_base = backoff_base
        self.name = name or model
        self._client = httpx.Client(timeout=timeout)
        self._patterns = {
            l: re.compile(rf"(?<![a-z0-9]){re.escape(l.lower())}(?![a-z0-9])")
            for l in label_set}

    def close(self):
        self._client.close()

    def parse_reply(self, reply: str) -> str:
        hits = [l for l, pat in self._patterns.items()
                if pat.search(reply.lower())]
        if len(hits) != 1:
            raise AbstentionError(
                f"reply matched {len(hits)} labels ({hits}): {reply[:120]!r}")
        return hits[0]

    def _predict(self, text: str) -> Prediction:
        prompt = self.template.format(
            text=text, labels=", ".join(self.labels))
        headers = {}
        key = os.environ.get(self.api_key_env)
        if key:
            headers["Authorization"] = f"Bearer {key}"
        payload = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
        }
        attempt = 0
        while True:
            try:
                resp = self._client.post(f"{self.endpoint}/chat/completions",
                                         json=payload, headers=headers)
                break
            except httpx.HTTPError as e:
                if attempt >= self.retries:
                    raise OracleError(
                        f"transport failure after {attempt + 1} attempts: {e}") from e
                time.sleep(self.backoff_base * (2 ** attempt))
                attempt += 1
        if resp.status_code != 200:
            raise ProtocolError(
                f"HTTP {resp.status_code} from chat endpoint: {resp.text[:200]}")
        try:
            reply = resp.json()["choices"][0]["message"]["content"]
        except (json.JSONDecodeError, KeyError, IndexError, TypeError) as e:
            raise ProtocolError(f"malformed chat response: {resp.text[:200]}") from e
        try:
            label = self.parse_reply(reply)
        except AbstentionError:
            if self.abstain == "no_flip":
                return Prediction(label="", abstained=True)
            raise
        return Prediction(label=label)


def llm_classify_adapter(endpoint: str, model: str, prompt_template: str,
                         label_set: list[str], **kwargs) -> LlmClassifier:
    return LlmClassifier(endpoint, model, label_set,
                         prompt_template=prompt_template, **kwargs)


def http_classify_adapter(endpoint: str, timeout: float = 10.0,
                          retries: int = 2, **kwargs) -> HttpClassifier:
    return HttpClassifier(endpoint, timeout=timeout, retries=retries, **kwargs)


def label_coarsening(task_label: str, mapping: dict[str, str]) -> str:
    """Map a task-specific label onto {positive, negative, neutral}."""
    try:
        sentiment = mapping[task_label]
    except KeyError:
        raise ValueError(f"no sentiment mapping for task label {task_label!r}")
    if sentiment not in SENTIMENTS:
        raise ValueError(
            f"mapping sends {task_label!r} to non-sentiment {sentiment!r}")
    return sentiment


def default_sentiment_map() -> dict[str, str]:
    """Bundled coarse map for emotion-style label sets (plus identities)."""
    from importlib import resources
    data = resources.files("advemoji.data").joinpath("emotion_sentiment_map.json")
    return json.loads(data.read_text(encoding="utf-8"))
