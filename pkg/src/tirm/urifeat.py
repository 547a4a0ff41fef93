"""Shortened-URI expansion, URI depth and shortening reduction rate."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Mapping
from urllib.parse import urlsplit

from .core import TirmError

DEFAULT_SHORTENERS = frozenset({
    "bit.ly", "bitly.com", "j.mp", "t.co", "tinyurl.com", "ow.ly", "goo.gl", "is.gd",
})


class UnresolvedUriError(TirmError):
    pass


class UriParseError(TirmError, ValueError):
    pass


@dataclass(frozen=True)
class UriFeatures:
    depth: int
    reduction_rate: float
    short_len: int
    long_len: int


def load_uri_mapping(path) -> dict[str, str]:
    """Read a ``short<TAB>long`` sidecar file. Blank lines and ``#`` comments are skipped."""
    mapping: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2 or not parts[0] or not parts[1]:
            raise TirmError(f"{path}:{lineno}: expected 'short<TAB>long'")
        mapping[parts[0].strip()] = parts[1].strip()
    return mapping


def _host(uri: str) -> str:
    return (urlsplit(uri).hostname or "").lower()


def expand_uri(short: str, mapping: Mapping[str, str], shorteners=DEFAULT_SHORTENERS) -> str:
    """Resolve ``short`` through ``mapping``.

    The table may be keyed by the full short URI or by its path code
    (``abc`` for ``http://bit.ly/abc``). URIs on hosts that are not known
    shorteners are returned unchanged.
    """
    if short in mapping:
        return mapping[short]
    if _host(short) not in shorteners:
        return short
    code = urlsplit(short).path.strip("/")
    if code and code in mapping:
        return mapping[code]
    raise UnresolvedUriError(f"no expansion recorded for shortened URI {short}")


def uri_depth(uri: str) -> int:
    """Number of non-empty path segments; query, fragment and trailing slash ignored."""
    parts = urlsplit(uri)
    if not parts.scheme or not parts.netloc:
        raise UriParseError(f"not an absolute URI: {uri!r}")
    return sum(1 for seg in parts.path.split("/") if seg)


def reduction_rate(short: str, long: str) -> float:
    if not short or not long:
        raise ValueError("reduction_rate needs two non-empty URIs")
    return 1.0 - len(short) / len(long)


def uri_features(short: str, long: str) -> UriFeatures:
    long = long or short
    return UriFeatures(uri_depth(long), reduction_rate(short, long), len(short), len(long))
