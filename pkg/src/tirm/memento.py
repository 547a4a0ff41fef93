"""TimeMap parsing (application/link-format), closest-memento lookup and
archival-existence features."""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass
from email.utils import format_datetime, parsedate_to_datetime
from datetime import datetime, timezone
from typing import Optional
from urllib.parse import urlsplit

from .core import TirmError, hours_between

logger = logging.getLogger(__name__)


class EmptyTimeMapError(TirmError):
    pass


@dataclass(frozen=True)
class Memento:
    uri: str
    datetime: int  # epoch seconds, UTC
    archive_host: str


@dataclass(frozen=True)
class TimeMap:
    original_uri: str
    mementos: tuple[Memento, ...]
    skipped: int = 0  # entries dropped for a malformed datetime

    def __len__(self):
        return len(self.mementos)


@dataclass(frozen=True)
class ArchivalFeatures:
    num_mementos: int
    num_archives: int
    delta_signed_hours: Optional[float]
    delta_abs_hours: Optional[float]


def archive_host(uri: str) -> str:
    host = (urlsplit(uri).hostname or "").lower()
    if host.startswith("www."):
        host = host[4:]
    return host


def timemap_filename(original_uri: str) -> str:
    """File name under which the TimeMap of ``original_uri`` is stored:
    hex SHA-1 of the UTF-8 URI plus ``.timemap``."""
    return hashlib.sha1(original_uri.encode("utf-8")).hexdigest() + ".timemap"


# ---------------------------------------------------------------------------
# link-format tokenizer


def _split_links(text: str):
    """Yield (target, {param: value}) for each link in a link-format document.

    Commas inside quoted values (HTTP dates) do not end a link.
    """
    i, n = 0, len(text)
    while i < n:
        lt = text.find("<", i)
        if lt < 0:
            return
        gt = text.find(">", lt + 1)
        if gt < 0:
            return
        target = text[lt + 1:gt].strip()
        params: dict[str, str] = {}
        j = gt + 1
        while j < n:
            while j < n and text[j] in " \t\r\n":
                j += 1
            if j >= n or text[j] == ",":
                j += 1
                break
            if text[j] == "<":
                break
            if text[j] == ";":
                j += 1
                continue
            k = j
            while k < n and text[k] not in "=;,":
                k += 1
            name = text[j:k].strip().lower()
            value = ""
            if k < n and text[k] == "=":
                k += 1
                while k < n and text[k] in " \t":
                    k += 1
                if k < n and text[k] == '"':
                    end = text.find('"', k + 1)
                    if end < 0:
                        end = n
                    value = text[k + 1:end]
                    k = end + 1
                else:
                    start = k
                    while k < n and text[k] not in ";,":
                        k += 1
                    value = text[start:k].strip()
            if name:
                params[name] = value
            j = k
        yield target, params
        i = j


def _parse_http_date(value: str) -> int:
    dt = parsedate_to_datetime(value)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return int(dt.timestamp())


def parse_timemap(text: str) -> TimeMap:
    """Parse a link-format TimeMap.

    Links whose ``rel`` contains ``memento`` become mementos; the ``original``
    link is captured; everything else is ignored.
    """
    original = ""
    found: list[Memento] = []
    skipped = 0
    for target, params in _split_links(text):
        rels = params.get("rel", "").lower().split()
        if "original" in rels and not original:
            original = target
        if "memento" not in rels:
            continue
        try:
            ts = _parse_http_date(params["datetime"])
        except (KeyError, TypeError, ValueError, IndexError):
            skipped += 1
            continue
        found.append(Memento(target, ts, archive_host(target)))
    if skipped:
        logger.warning("timemap %s: skipped %d memento(s) with bad datetime", original or "?", skipped)
    if not found:
        raise EmptyTimeMapError(f"no parsable memento entries in timemap for {original or '?'}")
    found.sort(key=lambda m: (m.datetime, m.uri))
    return TimeMap(original, tuple(found), skipped)


def format_timemap(tm: TimeMap) -> str:
    lines = [f'<{tm.original_uri}>; rel="original"']
    for m in tm.mementos:
        when = format_datetime(datetime.fromtimestamp(m.datetime, tz=timezone.utc), usegmt=True)
        lines.append(f'<{m.uri}>; rel="memento"; datetime="{when}"')
    return ",\n".join(lines) + "\n"


def closest_memento(tm: TimeMap, t: int) -> tuple[Memento, float]:
    """Memento nearest to ``t`` and its signed offset in hours (negative means
    it predates ``t``). Ties go to the earlier memento."""
    if not tm.mementos:
        raise EmptyTimeMapError(f"empty timemap for {tm.original_uri or '?'}")
    # mementos are sorted ascending, so the first minimum is the earliest
    best = min(tm.mementos, key=lambda m: abs(m.datetime - t))
    return best, hours_between(best.datetime, t)


def archival_features(tm: Optional[TimeMap], t_tweet: int) -> ArchivalFeatures:
    if tm is None or not tm.mementos:
        return ArchivalFeatures(0, 0, None, None)
    _, delta = closest_memento(tm, t_tweet)
    hosts = {m.archive_host for m in tm.mementos}
    return ArchivalFeatures(len(tm.mementos), len(hosts), delta, abs(delta))
