"""Model loading and deterministic single-text inference."""

from __future__ import annotations

import threading

import torch
from transformers import (AutoModelForSequenceClassification, AutoTokenizer)


class SentimentModel:
    """A sequence-classification checkpoint behind a lock.

    Inference runs in eval mode with gradients off, so identical text gives
    identical probabilities. The lock serializes forward passes; request
    handling above may be concurrent.
    """

    def __init__(self, model_id: str, device: str = "cpu"):
        self.model_id = model_id
        self.device = torch.device(device)
        self.tokenizer = AutoTokenizer.from_pretrained(model_id)
        self.model = AutoModelForSequenceClassification.from_pretrained(
            model_id).to(self.device)
        self.model.eval()
        id2label = self.model.config.id2label
        self.labels = [id2label[i] for i in range(len(id2label))]
        self._lock = threading.Lock()

    def classify(self, text: str) -> dict:
        enc = self.tokenizer(text, return_tensors="pt", truncation=True,
                             max_length=self.tokenizer.model_max_length)
        enc = {k: v.to(self.device) for k, v in enc.items()}
        with self._lock, torch.no_grad():
            logits = self.model(**enc).logits[0]
        probs = torch.softmax(logits, dim=-1)
        dist = {label: float(probs[i]) for i, label in enumerate(self.labels)}
        label = max(self.labels, key=lambda l: (dist[l], l))
        # renormalize float32 rounding so the distribution sums to 1 exactly
        total = sum(dist.values())
        dist = {k: v / total for k, v in dist.items()}
        return {"label": label, "probs": dist}
