"""Multinomial naive-Bayes sentiment probabilities (positive/negative/neutral)."""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass
from functools import cached_property
from importlib import resources
from pathlib import Path

from .core import TirmError, model_envelope, open_envelope
from .textsim import tokenize

CLASSES = ("pos", "neg", "neu")


class SentimentTrainingError(TirmError):
    pass


@dataclass(frozen=True)
class SentimentModel:
    """Smoothed multinomial naive-Bayes model.

    ``doc_counts`` and ``token_counts`` are the raw training tallies; priors
    and likelihoods are derived from them on demand.
    """

    doc_counts: dict[str, int]
    token_counts: dict[str, dict[str, int]]
    vocabulary: frozenset[str]
    smoothing_alpha: float = 1.0

    @property
    def class_priors(self) -> dict[str, float]:
        total = sum(self.doc_counts.values())
        return {c: self.doc_counts[c] / total for c in CLASSES}

    @cached_property
    def _denominators(self) -> dict[str, float]:
        return {
            c: sum(self.token_counts[c].values()) + self.smoothing_alpha * len(self.vocabulary)
            for c in CLASSES
        }

    def token_likelihood(self, label: str, token: str) -> float:
        count = self.token_counts[label].get(token, 0)
        return (count + self.smoothing_alpha) / self._denominators[label]

    def to_dict(self) -> dict:
        return model_envelope("sentiment", 1, {
            "classes": list(CLASSES),
            "doc_counts": dict(self.doc_counts),
            "smoothing_alpha": self.smoothing_alpha,
            "token_counts": {c: dict(sorted(self.token_counts[c].items())) for c in CLASSES},
        })

    @classmethod
    def from_dict(cls, doc: dict) -> "SentimentModel":
        body = open_envelope(doc, "sentiment", 1)
        token_counts = {c: dict(body["token_counts"][c]) for c in CLASSES}
        vocab = frozenset(t for counts in token_counts.values() for t in counts)
        return cls(dict(body["doc_counts"]), token_counts, vocab, float(body["smoothing_alpha"]))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), sort_keys=True, indent=1) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "SentimentModel":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def train_sentiment(corpus, alpha: float = 1.0) -> SentimentModel:
    """Fit on an iterable of ``(label, text)`` pairs with labels in pos/neg/neu."""
    if alpha <= 0:
        raise SentimentTrainingError("smoothing alpha must be positive")
    doc_counts = {c: 0 for c in CLASSES}
    token_counts = {c: Counter() for c in CLASSES}
    for label, text in corpus:
        if label not in doc_counts:
            raise SentimentTrainingError(f"unknown sentiment label {label!r}")
        doc_counts[label] += 1
        token_counts[label].update(tokenize(text))
    for c in CLASSES:
        if doc_counts[c] == 0:
            raise SentimentTrainingError(f"corpus has no documents for class {c!r}")
    vocab = frozenset(t for counts in token_counts.values() for t in counts)
    return SentimentModel(doc_counts, {c: dict(token_counts[c]) for c in CLASSES}, vocab, alpha)


def sentiment_probs(model: SentimentModel, text: str) -> tuple[float, float, float]:
    """Posterior (p_pos, p_neg, p_neu). Out-of-vocabulary tokens are ignored,
    so empty or unknown text yields the class priors."""
    priors = model.class_priors
    tokens = [t for t in tokenize(text) if t in model.vocabulary]
    logp = []
    for c in CLASSES:
        score = math.log(priors[c])
        for t in tokens:
            score += math.log(model.token_likelihood(c, t))
        logp.append(score)
    top = max(logp)
    weights = [math.exp(s - top) for s in logp]
    z = sum(weights)
    return tuple(w / z for w in weights)


def load_corpus(path) -> list[tuple[str, str]]:
    """Read ``label<TAB>text`` lines."""
    out = []
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        label, sep, body = line.partition("\t")
        if not sep or label not in CLASSES:
            raise SentimentTrainingError(f"{path}:{lineno}: expected 'pos|neg|neu<TAB>text'")
        out.append((label, body))
    return out


def bundled_corpus() -> list[tuple[str, str]]:
    with resources.as_file(resources.files("tirm") / "data" / "sentiment_corpus.tsv") as p:
        return load_corpus(p)


def default_model() -> SentimentModel:
    return train_sentiment(bundled_corpus())
