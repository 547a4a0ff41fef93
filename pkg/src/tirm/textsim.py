"""Boilerplate removal, term vectors, cosine similarity, SimHash and tweet flocks."""

from __future__ import annotations

import hashlib
import logging
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from html.parser import HTMLParser

logger = logging.getLogger(__name__)

MAX_FLOCK = 500
LINK_DENSITY_MAX = 0.33
MIN_BLOCK_WORDS = 10

_BLOCK_TAGS = frozenset({
    "address", "article", "aside", "blockquote", "body", "br", "center", "dd", "div",
    "dl", "dt", "fieldset", "figcaption", "figure", "footer", "form", "h1", "h2",
    "h3", "h4", "h5", "h6", "header", "hr", "html", "li", "main", "nav", "ol", "p",
    "pre", "section", "table", "tbody", "td", "tfoot", "th", "thead", "tr", "ul",
})
_SKIP_TAGS = frozenset({"script", "style", "noscript", "template", "svg", "iframe", "object"})
_SENTENCE_END = re.compile(r"[.!?:;\"')\]]$")
_TOKEN_RE = re.compile(r"[^\W_]+")


# ---------------------------------------------------------------------------
# boilerplate removal


@dataclass
class _Block:
    words: list[str] = field(default_factory=list)
    link_words: int = 0

    @property
    def text(self) -> str:
        return " ".join(self.words)

    @property
    def link_density(self) -> float:
        return self.link_words / len(self.words) if self.words else 0.0


class _BlockSegmenter(HTMLParser):
    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.blocks: list[_Block] = []
        self.title: list[str] = []
        self._current = _Block()
        self._skip = 0
        self._anchor = 0
        self._in_title = 0
        self._in_head = 0

    def _flush(self):
        if self._current.words:
            self.blocks.append(self._current)
        self._current = _Block()

    def handle_starttag(self, tag, attrs):
        if tag in _SKIP_TAGS:
            self._skip += 1
        elif tag == "title":
            self._in_title += 1
        elif tag == "head":
            self._in_head += 1
        elif tag == "a":
            self._anchor += 1
        elif tag in _BLOCK_TAGS:
            self._flush()

    def handle_startendtag(self, tag, attrs):
        if tag in _BLOCK_TAGS:
            self._flush()

    def handle_endtag(self, tag):
        if tag in _SKIP_TAGS:
            self._skip = max(0, self._skip - 1)
        elif tag == "title":
            self._in_title = max(0, self._in_title - 1)
        elif tag == "head":
            self._in_head = max(0, self._in_head - 1)
        elif tag == "a":
            self._anchor = max(0, self._anchor - 1)
        elif tag in _BLOCK_TAGS:
            self._flush()

    def handle_data(self, data):
        if self._skip:
            return
        words = data.split()
        if not words:
            return
        if self._in_title:
            self.title.extend(words)
        elif self._in_head:
            return
        else:
            self._current.words.extend(words)
            if self._anchor:
                self._current.link_words += len(words)

    def close(self):
        super().close()
        self._flush()


def extract_text(html: str | bytes) -> str:
    """Main visible text of an HTML page with navigation and other boilerplate
    blocks removed.

    A block survives when its link density is at most 0.33 and it either has
    at least 10 words or follows a kept block that ended mid-sentence. If no
    body block survives, the longest one is kept. Title text is always kept.
    Kept text is returned on a single whitespace-normalized line.
    """
    if isinstance(html, bytes):
        html = html.decode("utf-8", errors="replace")
    parser = _BlockSegmenter()
    parser.feed(html)
    parser.close()

    kept: list[_Block] = []
    for block in parser.blocks:
        if block.link_density > LINK_DENSITY_MAX:
            continue
        continues = bool(kept) and not _SENTENCE_END.search(kept[-1].words[-1])
        if len(block.words) >= MIN_BLOCK_WORDS or continues:
            kept.append(block)
    if not kept and parser.blocks:
        kept = [max(parser.blocks, key=lambda b: len(b.words))]
    parts = [" ".join(parser.title)] if parser.title else []
    parts.extend(b.text for b in kept)
    return " ".join(parts)


# ---------------------------------------------------------------------------
# term vectors


@dataclass(frozen=True)
class TermVector:
    entries: dict[str, int]
    norm: float

    @classmethod
    def from_counts(cls, counts) -> "TermVector":
        entries = {t: int(c) for t, c in counts.items() if c > 0}
        return cls(entries, math.sqrt(sum(c * c for c in entries.values())))

    def __len__(self):
        return len(self.entries)


def tokenize(text: str) -> list[str]:
    """Lowercased alphanumeric runs of length >= 2."""
    return [t for t in _TOKEN_RE.findall(text.lower()) if len(t) >= 2]


def term_vector(text: str) -> TermVector:
    return TermVector.from_counts(Counter(tokenize(text)))


def cosine(a: TermVector, b: TermVector) -> float:
    if not a.entries or not b.entries:
        return 0.0
    if len(a.entries) > len(b.entries):
        a, b = b, a
    dot = sum(c * b.entries.get(t, 0) for t, c in a.entries.items())
    sim = dot / (a.norm * b.norm)
    return min(1.0, max(0.0, sim))


def text_similarity(x: str, y: str) -> float:
    return cosine(term_vector(x), term_vector(y))


# ---------------------------------------------------------------------------
# SimHash

# keyed BLAKE2b with this personalization string is the token hash
SIMHASH_PERSON = b"tirm-simhash-v1"
_BITS = 64


@dataclass(frozen=True)
class Fingerprint:
    bits: int

    def __xor__(self, other: "Fingerprint") -> "Fingerprint":
        return Fingerprint(self.bits ^ other.bits)


def token_hash64(token: str) -> int:
    digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8, person=SIMHASH_PERSON).digest()
    return int.from_bytes(digest, "big")


def simhash(text: str) -> Fingerprint:
    """64-bit Charikar fingerprint over the same tokens as :func:`term_vector`,
    each occurrence voting +1/-1 on every bit."""
    tally = [0] * _BITS
    for token, count in Counter(tokenize(text)).items():
        h = token_hash64(token)
        for bit in range(_BITS):
            tally[bit] += count if (h >> bit) & 1 else -count
    bits = 0
    for bit, score in enumerate(tally):
        if score > 0:
            bits |= 1 << bit
    return Fingerprint(bits)


def hamming(x: Fingerprint, y: Fingerprint) -> int:
    return (x.bits ^ y.bits).bit_count()


# ---------------------------------------------------------------------------
# tweet flock


def flock_document(tweets) -> str:
    tweets = list(tweets)
    if len(tweets) > MAX_FLOCK:
        logger.warning("flock of %d tweets truncated to %d", len(tweets), MAX_FLOCK)
        tweets = tweets[:MAX_FLOCK]
    return "\n".join(tweets)
