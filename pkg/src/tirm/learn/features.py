"""The fixed 39-slot feature schema and feature-vector assembly."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Optional, Sequence

import numpy as np

from ..core import Instance, TirmError, hours_between
from ..memento import ArchivalFeatures
from ..urifeat import UriFeatures

SCHEMA_VERSION = "v1"

FEATURE_NAMES = (
    "uri_depth", "reduction_rate", "short_len", "long_len",
    "num_mementos", "num_archives", "delta_signed_hours", "delta_abs_hours",
    "bitly_clicks_total", "referrer_site_count", "referrer_country_count",
    "topsy_tweet_count", "influential_tweet_count", "flock_size", "flock_deleted_ratio",
    "fb_shares", "fb_posts", "fb_likes", "fb_clicks",
    "p_pos", "p_neg", "p_neu",
    "sim_tweet_current", "sim_tweet_past", "sim_past_current",
    "sim_flock_current", "sim_flock_past", "simhash_distance_past_current",
    "celebrity_flag",
    "tweet_char_len", "tweet_token_count", "tweet_age_at_eval_days",
    "resource_age_at_tweet_hours",
    "has_hashtag", "has_mention", "has_multiple_uris",
    "hour_of_day_utc", "day_of_week", "clicklog_peak_ratio",
)
N_FEATURES = len(FEATURE_NAMES)
assert N_FEATURES == 39
INDEX = {name: i for i, name in enumerate(FEATURE_NAMES)}

SIMILARITY_SLOTS = ("sim_tweet_current", "sim_tweet_past", "sim_past_current",
                    "sim_flock_current", "sim_flock_past")

_HASHTAG = re.compile(r"(?:^|\s)#\w")
_MENTION = re.compile(r"(?:^|[^\w])@\w")
_URI = re.compile(r"https?://\S+")


class FeatureError(TirmError):
    pass


@dataclass(frozen=True)
class FeatureVector:
    """Values in schema order; ``None`` marks a missing slot."""

    values: tuple[Optional[float], ...]
    schema: str = SCHEMA_VERSION

    def __post_init__(self):
        if len(self.values) != N_FEATURES:
            raise FeatureError(f"expected {N_FEATURES} feature slots, got {len(self.values)}")

    def __getitem__(self, name: str) -> Optional[float]:
        return self.values[INDEX[name]]

    def as_array(self) -> np.ndarray:
        return np.array([math.nan if v is None else v for v in self.values], dtype=float)

    def missing(self) -> list[str]:
        return [n for n, v in zip(FEATURE_NAMES, self.values) if v is None]


@dataclass(frozen=True)
class Similarities:
    """Pairwise similarities between tweet, flock and the two snapshots.

    Any pair may be ``None`` when one side was unavailable.
    """

    tweet_current: Optional[float] = None
    tweet_past: Optional[float] = None
    past_current: Optional[float] = None
    flock_current: Optional[float] = None
    flock_past: Optional[float] = None
    simhash_distance: Optional[int] = None


def _bool(x: bool) -> float:
    return 1.0 if x else 0.0


def _tweet_tokens(text: str) -> int:
    return len(text.split())


def assemble_features(
    inst: Instance,
    memento_f: Optional[ArchivalFeatures],
    uri_f: Optional[UriFeatures],
    sims: Similarities,
    sentiment: Optional[Sequence[float]],
    celeb: Optional[bool],
    first_memento: Optional[int] = None,
) -> FeatureVector:
    """Build the schema-ordered vector from the extractor outputs.

    ``first_memento`` is the datetime of the earliest memento and drives
    ``resource_age_at_tweet_hours``. Social slots are missing, not zero, when
    the instance carries no social block.
    """
    v: dict[str, Optional[float]] = dict.fromkeys(FEATURE_NAMES)

    if uri_f is not None:
        v["uri_depth"] = float(uri_f.depth)
        v["reduction_rate"] = float(uri_f.reduction_rate)
        v["short_len"] = float(uri_f.short_len)
        v["long_len"] = float(uri_f.long_len)

    if memento_f is not None:
        v["num_mementos"] = float(memento_f.num_mementos)
        v["num_archives"] = float(memento_f.num_archives)
        v["delta_signed_hours"] = memento_f.delta_signed_hours
        v["delta_abs_hours"] = memento_f.delta_abs_hours

    s = inst.social
    if s is not None:
        v["bitly_clicks_total"] = float(s.bitly_clicks_total)
        v["referrer_site_count"] = float(s.referrer_site_count)
        v["referrer_country_count"] = float(s.referrer_country_count)
        v["topsy_tweet_count"] = float(s.topsy_tweet_count)
        v["influential_tweet_count"] = float(s.influential_tweet_count)
        v["flock_size"] = float(min(len(s.flock_tweets), 500))
        v["flock_deleted_ratio"] = float(s.flock_deleted_ratio)
        v["fb_shares"] = float(s.fb_shares)
        v["fb_posts"] = float(s.fb_posts)
        v["fb_likes"] = float(s.fb_likes)
        v["fb_clicks"] = float(s.fb_clicks)
        hourly = s.bitly_hourly_clicks
        if hourly and sum(hourly) > 0:
            v["clicklog_peak_ratio"] = max(hourly) / sum(hourly)

    if sentiment is not None:
        p = [float(x) for x in sentiment]
        if len(p) != 3 or abs(sum(p) - 1.0) > 1e-9 or min(p) < 0:
            raise FeatureError(f"sentiment probabilities {p} are not a distribution")
        v["p_pos"], v["p_neg"], v["p_neu"] = p

    for slot, value in zip(SIMILARITY_SLOTS, (sims.tweet_current, sims.tweet_past, sims.past_current,
                                              sims.flock_current, sims.flock_past)):
        if value is None:
            continue
        if not 0.0 <= value <= 1.0 or math.isnan(value):
            raise FeatureError(f"{inst.id}: similarity {slot}={value} outside [0, 1]")
        v[slot] = float(value)
    if sims.simhash_distance is not None:
        v["simhash_distance_past_current"] = float(sims.simhash_distance)

    if celeb is not None:
        v["celebrity_flag"] = _bool(celeb)

    text = inst.tweet_text
    v["tweet_char_len"] = float(len(text))
    v["tweet_token_count"] = float(_tweet_tokens(text))
    if inst.t_click is not None:
        v["tweet_age_at_eval_days"] = (inst.t_click - inst.t_tweet) / 86400.0
    if first_memento is not None:
        v["resource_age_at_tweet_hours"] = hours_between(inst.t_tweet, first_memento)
    v["has_hashtag"] = _bool(_HASHTAG.search(text))
    v["has_mention"] = _bool(_MENTION.search(text))
    v["has_multiple_uris"] = _bool(len(_URI.findall(text)) >= 2)
    when = datetime.fromtimestamp(inst.t_tweet, tz=timezone.utc)
    v["hour_of_day_utc"] = float(when.hour)
    v["day_of_week"] = float(when.weekday())

    return FeatureVector(tuple(v[n] for n in FEATURE_NAMES))
