#!/usr/bin/env python3
"""Build a tiny local sentiment checkpoint for shim testing.

The public hub is unreachable from the test environment, so this script
fine-tunes a small BERT from scratch on the engine repo's fixture corpus
(consumed as plain JSONL files, the documented dataset/lexicon formats).
The WordPiece vocab carries every emoji surface plus ##-continuations, so
affix runs concatenated directly against words stay visible to the model.

Usage:
  python build_tiny_checkpoint.py --corpus fixture_train.jsonl \
      --lexicon default_lexicon.jsonl --out checkpoints/tiny-sentiment
"""

import argparse
import json
import pathlib
import string
import unicodedata

import torch
from transformers import BertConfig, BertForSequenceClassification, \
    BertTokenizerFast

LABELS = ["negative", "neutral", "positive"]


def _strip_cf(s):
    return "".join(c for c in s if unicodedata.category(c) != "Cf")


def read_jsonl(path):
    with open(path, encoding="utf-8") as f:
        return [json.loads(line) for line in f if line.strip()]


def lexicon_surfaces(path):
    return [r["surface"] for r in read_jsonl(path)]


def split_words_and_emoji(text, surfaces):
    """Greedy longest-match split of a doc into (words-part, emoji list)."""
    ordered = sorted(surfaces, key=len, reverse=True)
    found = []
    rest = text
    for s in ordered:
        while s in rest:
            found.append(s)
            rest = rest.replace(s, " ", 1)
    return " ".join(rest.split()), found


def augment(rows, surfaces):
    """Attack-style variants: emoji runs abutting the text on either side."""
    out = []
    for row in rows:
        text, label = row["text"], row["label"]
        out.append((text, label))
        words, emo = split_words_and_emoji(text, surfaces)
        if emo and words:
            run = "".join(emo)
            out.append((run + words, label))
            out.append((words + run, label))
            out.append((run + words + run, label))
    return out


def build_vocab(rows, surfaces):
    words = sorted({w for text, _ in rows for w in text.lower().split()
                    if w.isascii() and w.isalnum()})
    units = sorted(set(surfaces))
    # tokenizer cleaning strips Cf characters (ZWJ, tag chars); keep the
    # stripped spellings as units too so those emoji survive as one piece
    units += sorted({_strip_cf(s) for s in surfaces if _strip_cf(s) != s})
    vocab = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]
    vocab += words + ["##" + w for w in words]
    vocab += units + ["##" + u for u in units]
    vocab += list(string.ascii_lowercase) + list(string.digits)
    vocab += ["##" + c for c in string.ascii_lowercase + string.digits]
    vocab += [c for c in string.punctuation]
    seen = dict.fromkeys(vocab)
    return list(seen)


def make_tokenizer(vocab):
    tokenizer = BertTokenizerFast(vocab={t: i for i, t in enumerate(vocab)},
                                  do_lower_case=True, strip_accents=False,
                                  model_max_length=64)
    try:
        # keep ZWJ/variation selectors: default BERT cleaning strips Cf
        # characters, which would shred multi-code-point emoji
        from tokenizers import normalizers
        tokenizer.backend_tokenizer.normalizer = normalizers.BertNormalizer(
            clean_text=False, handle_chinese_chars=True, strip_accents=False,
            lowercase=True)
    except Exception as e:
        print(f"warning: could not relax the normalizer ({e}); "
              f"ZWJ emoji will be split")
    return tokenizer


def train(model, tokenizer, examples, seed, max_epochs, target_acc, lr):
    torch.manual_seed(seed)
    device = torch.device("cpu")
    model.to(device).train()
    label_ids = torch.tensor([LABELS.index(label) for _, label in examples])
    enc = tokenizer([t for t, _ in examples], padding=True, truncation=True,
                    return_tensors="pt")
    opt = torch.optim.AdamW(model.parameters(), lr=lr)
    n = len(examples)
    for epoch in range(max_epochs):
        perm = torch.randperm(n)
        correct = 0
        for start in range(0, n, 32):
            idx = perm[start:start + 32]
            batch = {k: v[idx] for k, v in enc.items()}
            out = model(**batch, labels=label_ids[idx])
            out.loss.backward()
            opt.step()
            opt.zero_grad()
            correct += (out.logits.argmax(-1) == label_ids[idx]).sum().item()
        acc = correct / n
        print(f"epoch {epoch + 1}: train acc {acc:.3f}")
        if acc >= target_acc:
            break
    model.eval()
    return model


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--corpus", required=True)
    ap.add_argument("--lexicon", required=True)
    ap.add_argument("--out", required=True)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--max-epochs", type=int, default=40)
    ap.add_argument("--target-acc", type=float, default=0.985)
    ap.add_argument("--lr", type=float, default=5e-4)
    args = ap.parse_args()

    rows = read_jsonl(args.corpus)
    surfaces = lexicon_surfaces(args.lexicon)
    examples = augment(rows, surfaces)
    print(f"{len(rows)} corpus docs -> {len(examples)} training examples")

    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    vocab = build_vocab(examples, surfaces)
    tokenizer = make_tokenizer(vocab)
    print(f"vocab size {len(vocab)}")

    config = BertConfig(
        vocab_size=len(vocab), hidden_size=64, num_hidden_layers=2,
        num_attention_heads=2, intermediate_size=128,
        max_position_embeddings=64, num_labels=len(LABELS),
        id2label=dict(enumerate(LABELS)),
        label2id={l: i for i, l in enumerate(LABELS)})
    torch.manual_seed(args.seed)
    model = BertForSequenceClassification(config)
    model = train(model, tokenizer, examples, args.seed, args.max_epochs,
                  args.target_acc, args.lr)

    model.save_pretrained(out)
    tokenizer.save_pretrained(out)
    print(f"checkpoint written to {out}")


if __name__ == "__main__":
    main()
