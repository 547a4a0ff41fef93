"""Celebrity gazetteer and whole-word phrase detection over tweet flocks."""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

_WORD_RE = re.compile(r"[^\W_]+")


def normalize_name(name: str) -> str:
    return " ".join(name.lower().split())


def _words(text: str) -> list[str]:
    return _WORD_RE.findall(text.lower())


@dataclass(frozen=True)
class Gazetteer:
    names: frozenset[str]

    @classmethod
    def of(cls, names) -> "Gazetteer":
        return cls(frozenset(n for n in (normalize_name(x) for x in names) if n))

    def __len__(self):
        return len(self.names)


def load_gazetteer(path) -> Gazetteer:
    """One name per line; blank lines and ``#`` comments are ignored."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    return Gazetteer.of(line for line in lines if not line.lstrip().startswith("#"))


def sample_gazetteer() -> Gazetteer:
    with resources.as_file(resources.files("tirm") / "data" / "celebrities_sample.txt") as p:
        return load_gazetteer(p)


def detect_celebrity(g: Gazetteer, flock_doc: str) -> bool:
    """True iff some gazetteer name occurs in the document as a run of whole
    words (case-insensitive, punctuation and whitespace act as boundaries)."""
    if not g.names:
        return False
    phrases: dict[int, set[tuple[str, ...]]] = {}
    for name in g.names:
        key = tuple(_words(name))
        if key:
            phrases.setdefault(len(key), set()).add(key)
    words = _words(flock_doc)
    for length, keys in phrases.items():
        for i in range(len(words) - length + 1):
            if tuple(words[i:i + length]) in keys:
                return True
    return False
