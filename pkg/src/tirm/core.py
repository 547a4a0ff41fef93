"""Shared domain types, timestamp handling and the dataset record format."""

from __future__ import annotations

import json
import re
from calendar import timegm
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from typing import Any, Optional

DATASET_HEADER = "#tirm-dataset v1"


class TirmError(Exception):
    """Base class for every error raised by this package."""


class ParseError(TirmError, ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field_name = field_name


class Relevancy(str, Enum):
    RELEVANT = "Relevant"
    NON_RELEVANT = "NonRelevant"


class Intention(str, Enum):
    PAST = "t_tweet"
    CURRENT = "t_click"
    EITHER = "EitherOrUndefined"


# ---------------------------------------------------------------------------
# timestamps

_ISO_RE = re.compile(
    r"^(\d{4})-(\d{2})-(\d{2})T(\d{2}):(\d{2}):(\d{2})(?:\.\d+)?"
    r"(Z|[+-]\d{2}:?\d{2})$"
)


def parse_timestamp(text: str, field_name: str = "timestamp") -> int:
    """Parse an ISO-8601 timestamp with explicit offset into epoch seconds (UTC).

    Fractional seconds are truncated. Naive timestamps are rejected.
    """
    if not isinstance(text, str):
        raise ParseError(field_name, f"expected string, got {type(text).__name__}")
    m = _ISO_RE.match(text.strip())
    if not m:
        raise ParseError(field_name, f"not an ISO-8601 timestamp with offset: {text!r}")
    year, month, day, hour, minute, second = (int(g) for g in m.groups()[:6])
    try:
        dt = datetime(year, month, day, hour, minute, second, tzinfo=timezone.utc)
    except ValueError as exc:
        raise ParseError(field_name, f"{exc}: {text!r}") from None
    offset = m.group(7)
    seconds = timegm(dt.timetuple())
    if offset != "Z":
        sign = 1 if offset[0] == "+" else -1
        digits = offset[1:].replace(":", "")
        oh, om = int(digits[:2]), int(digits[2:])
        if oh > 23 or om > 59:
            raise ParseError(field_name, f"bad UTC offset in {text!r}")
        seconds -= sign * (oh * 3600 + om * 60)
    return seconds


def format_timestamp(ts: int) -> str:
    return datetime.fromtimestamp(ts, tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def hours_between(later: int, earlier: int) -> float:
    return (later - earlier) / 3600.0


# ---------------------------------------------------------------------------
# domain records


@dataclass(frozen=True)
class SocialMetrics:
    bitly_clicks_total: int = 0
    bitly_created: Optional[int] = None
    referrer_site_count: int = 0
    referrer_country_count: int = 0
    topsy_tweet_count: int = 0
    influential_tweet_count: int = 0
    flock_tweets: tuple[str, ...] = ()
    flock_deleted_ratio: float = 0.0
    fb_shares: int = 0
    fb_posts: int = 0
    fb_likes: int = 0
    fb_clicks: int = 0
    # hourly bitly click log; optional because not every export carries it
    bitly_hourly_clicks: Optional[tuple[int, ...]] = None

    def __post_init__(self):
        counts = (
            "bitly_clicks_total", "referrer_site_count", "referrer_country_count",
            "topsy_tweet_count", "influential_tweet_count",
            "fb_shares", "fb_posts", "fb_likes", "fb_clicks",
        )
        for name in counts:
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool) or v < 0:
                raise ParseError(f"social.{name}", f"expected non-negative integer, got {v!r}")
        if len(self.flock_tweets) > 500:
            raise ParseError("social.flock_tweets", f"{len(self.flock_tweets)} entries exceeds 500")
        if not 0.0 <= self.flock_deleted_ratio <= 1.0:
            raise ParseError("social.flock_deleted_ratio", f"{self.flock_deleted_ratio} not in [0, 1]")
        if self.bitly_hourly_clicks is not None and any(c < 0 for c in self.bitly_hourly_clicks):
            raise ParseError("social.bitly_hourly_clicks", "negative hourly count")


@dataclass(frozen=True)
class VoteRecord:
    votes: tuple[Relevancy, ...]

    def __post_init__(self):
        if len(self.votes) < 1:
            raise ParseError("votes", "vote record must hold at least one vote")
        for v in self.votes:
            if not isinstance(v, Relevancy):
                raise ParseError("votes", f"unknown label {v!r}")

    @classmethod
    def of(cls, labels) -> "VoteRecord":
        out = []
        for lab in labels:
            try:
                out.append(Relevancy(lab))
            except ValueError:
                raise ParseError("votes", f"unknown label {lab!r}") from None
        return cls(tuple(out))

    def count(self, label: Relevancy) -> int:
        return sum(1 for v in self.votes if v is label)


@dataclass(frozen=True)
class Instance:
    id: str
    tweet_text: str
    t_tweet: int
    short_uri: str
    long_uri: str = ""
    snapshot_past_ref: str = ""
    snapshot_current_ref: str = ""
    timemap_ref: str = ""
    social: Optional[SocialMetrics] = None
    votes: Optional[VoteRecord] = None
    http_status: Optional[int] = None
    # time the current snapshot was taken; drives the tweet-age feature
    t_click: Optional[int] = None

    def __post_init__(self):
        if not self.id:
            raise ParseError("id", "instance id must be non-empty")


# ---------------------------------------------------------------------------
# dataset line (de)serialization

_SOCIAL_FIELDS = [f for f in SocialMetrics.__dataclass_fields__]


def _require(d: dict, key: str, kind, prefix: str = ""):
    if key not in d:
        raise ParseError(prefix + key, "missing required field")
    v = d[key]
    if not isinstance(v, kind) or isinstance(v, bool):
        raise ParseError(prefix + key, f"expected {getattr(kind, '__name__', kind)}, got {v!r}")
    return v


def social_from_dict(d: dict) -> SocialMetrics:
    if not isinstance(d, dict):
        raise ParseError("social", "expected an object")
    unknown = set(d) - set(_SOCIAL_FIELDS)
    if unknown:
        raise ParseError("social", f"unknown fields {sorted(unknown)}")
    kw: dict[str, Any] = {}
    for name in _SOCIAL_FIELDS:
        if name not in d or d[name] is None:
            continue
        v = d[name]
        if name == "bitly_created":
            kw[name] = parse_timestamp(v, "social.bitly_created")
        elif name == "flock_tweets":
            if not isinstance(v, list) or not all(isinstance(t, str) for t in v):
                raise ParseError("social.flock_tweets", "expected a list of strings")
            kw[name] = tuple(v)
        elif name == "bitly_hourly_clicks":
            if not isinstance(v, list) or not all(isinstance(c, int) for c in v):
                raise ParseError("social.bitly_hourly_clicks", "expected a list of integers")
            kw[name] = tuple(v)
        elif name == "flock_deleted_ratio":
            if not isinstance(v, (int, float)) or isinstance(v, bool):
                raise ParseError("social.flock_deleted_ratio", f"expected number, got {v!r}")
            kw[name] = float(v)
        else:
            kw[name] = v
    return SocialMetrics(**kw)


def social_to_dict(s: SocialMetrics) -> dict:
    out: dict[str, Any] = {}
    for name in _SOCIAL_FIELDS:
        v = getattr(s, name)
        if v is None:
            continue
        if name == "bitly_created":
            v = format_timestamp(v)
        elif name in ("flock_tweets", "bitly_hourly_clicks"):
            v = list(v)
        out[name] = v
    return out


_INSTANCE_KEYS = {
    "id", "tweet_text", "t_tweet", "short_uri", "long_uri", "snapshot_past_ref",
    "snapshot_current_ref", "timemap_ref", "social", "votes", "http_status", "t_click",
}


def instance_from_dict(d: dict) -> Instance:
    if not isinstance(d, dict):
        raise ParseError("record", "expected a JSON object")
    unknown = set(d) - _INSTANCE_KEYS
    if unknown:
        raise ParseError("record", f"unknown fields {sorted(unknown)}")
    kw: dict[str, Any] = {
        "id": _require(d, "id", str),
        "tweet_text": _require(d, "tweet_text", str),
        "t_tweet": parse_timestamp(_require(d, "t_tweet", str), "t_tweet"),
        "short_uri": _require(d, "short_uri", str),
    }
    for key in ("long_uri", "snapshot_past_ref", "snapshot_current_ref", "timemap_ref"):
        if d.get(key) is not None:
            kw[key] = _require(d, key, str)
    if d.get("social") is not None:
        kw["social"] = social_from_dict(d["social"])
    if d.get("votes") is not None:
        v = d["votes"]
        if not isinstance(v, dict) or not isinstance(v.get("votes"), list):
            raise ParseError("votes", "expected {\"votes\": [labels...]}")
        kw["votes"] = VoteRecord.of(v["votes"])
    if d.get("http_status") is not None:
        kw["http_status"] = _require(d, "http_status", int)
    if d.get("t_click") is not None:
        kw["t_click"] = parse_timestamp(_require(d, "t_click", str), "t_click")
    return Instance(**kw)


def instance_to_dict(inst: Instance) -> dict:
    out: dict[str, Any] = {
        "id": inst.id,
        "tweet_text": inst.tweet_text,
        "t_tweet": format_timestamp(inst.t_tweet),
        "short_uri": inst.short_uri,
        "long_uri": inst.long_uri,
        "snapshot_past_ref": inst.snapshot_past_ref,
        "snapshot_current_ref": inst.snapshot_current_ref,
        "timemap_ref": inst.timemap_ref,
    }
    if inst.social is not None:
        out["social"] = social_to_dict(inst.social)
    if inst.votes is not None:
        out["votes"] = {"votes": [v.value for v in inst.votes.votes]}
    if inst.http_status is not None:
        out["http_status"] = inst.http_status
    if inst.t_click is not None:
        out["t_click"] = format_timestamp(inst.t_click)
    return out


def dumps_canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def parse_record(line: str) -> Instance:
    try:
        d = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ParseError("record", f"invalid JSON: {exc.msg}") from None
    return instance_from_dict(d)


def serialize_record(inst: Instance) -> str:
    return dumps_canonical(instance_to_dict(inst))


# ---------------------------------------------------------------------------
# model persistence envelope shared by every persisted model kind

MODEL_FORMAT = "tirm-model"


def model_envelope(kind: str, version: int, body: dict) -> dict:
    return {"format": MODEL_FORMAT, "kind": kind, "version": version, "body": body}


def open_envelope(doc: dict, kind: str, version: int) -> dict:
    if not isinstance(doc, dict) or doc.get("format") != MODEL_FORMAT:
        raise ParseError("model", "not a tirm model file")
    if doc.get("kind") != kind:
        raise ParseError("model", f"expected a {kind} model, found {doc.get('kind')!r}")
    if doc.get("version") != version:
        raise ParseError("model", f"unsupported {kind} model version {doc.get('version')!r}")
    return doc["body"]


@dataclass(frozen=True)
class Provenance:
    source: str = ""
    ingested_at: str = ""
    notes: tuple[str, ...] = field(default_factory=tuple)
