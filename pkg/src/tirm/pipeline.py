"""Per-instance feature extraction over a loaded dataset."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Optional

from .core import Instance, TirmError
from .entities import Gazetteer, detect_celebrity
from .ingest import Dataset, SnapshotError, read_snapshot
from .learn.features import FeatureVector, Similarities, assemble_features
from .memento import EmptyTimeMapError, TimeMap, archival_features, parse_timemap
from .sentiment import SentimentModel, sentiment_probs
from .textsim import cosine, extract_text, flock_document, hamming, simhash, term_vector
from .urifeat import DEFAULT_SHORTENERS, UnresolvedUriError, UriParseError, expand_uri, uri_features

logger = logging.getLogger(__name__)


class ExtractionError(TirmError):
    pass


@dataclass
class Extractor:
    sentiment: SentimentModel
    gazetteer: Gazetteer
    uri_mapping: Mapping[str, str] = field(default_factory=dict)
    shorteners: frozenset = DEFAULT_SHORTENERS
    strict: bool = False

    def _problem(self, notes: list[str], message: str):
        if self.strict:
            raise ExtractionError(message)
        notes.append(message)

    def load_timemap(self, ds: Dataset, inst: Instance, notes: list[str]) -> Optional[TimeMap]:
        if not inst.timemap_ref:
            notes.append("no timemap reference")
            return None
        path = ds.resolve(inst.timemap_ref)
        try:
            return parse_timemap(path.read_text(encoding="utf-8", errors="replace"))
        except OSError as exc:
            self._problem(notes, f"cannot read timemap {path}: {exc.strerror}")
        except EmptyTimeMapError:
            notes.append(f"timemap {path} holds no mementos")
        return None

    def _snapshot_text(self, ds: Dataset, ref: str, notes: list[str]) -> Optional[str]:
        if not ref:
            return None
        try:
            return extract_text(read_snapshot(ds.resolve(ref)))
        except SnapshotError as exc:
            self._problem(notes, str(exc))
            return None

    def long_uri(self, inst: Instance, notes: list[str]) -> str:
        if inst.long_uri:
            return inst.long_uri
        try:
            return expand_uri(inst.short_uri, self.uri_mapping, self.shorteners)
        except UnresolvedUriError as exc:
            self._problem(notes, str(exc))
            return inst.short_uri

    def extract(self, ds: Dataset, inst: Instance) -> tuple[FeatureVector, dict]:
        """Run every extractor on one instance; returns the vector and a log entry."""
        notes: list[str] = []
        long = self.long_uri(inst, notes)
        try:
            uri_f = uri_features(inst.short_uri, long)
        except (UriParseError, ValueError) as exc:
            self._problem(notes, f"uri features: {exc}")
            uri_f = None

        tm = self.load_timemap(ds, inst, notes)
        arch = archival_features(tm, inst.t_tweet)
        first = tm.mementos[0].datetime if tm is not None else None

        past = self._snapshot_text(ds, inst.snapshot_past_ref, notes)
        current = self._snapshot_text(ds, inst.snapshot_current_ref, notes)
        tweet_v = term_vector(inst.tweet_text)
        past_v = term_vector(past) if past is not None else None
        cur_v = term_vector(current) if current is not None else None
        flock_v = None
        celeb = None
        if inst.social is not None:
            flock = flock_document(inst.social.flock_tweets)
            flock_v = term_vector(flock)
            celeb = detect_celebrity(self.gazetteer, flock)

        def sim(a, b):
            return cosine(a, b) if a is not None and b is not None else None

        sims = Similarities(
            tweet_current=sim(tweet_v, cur_v),
            tweet_past=sim(tweet_v, past_v),
            past_current=sim(past_v, cur_v),
            flock_current=sim(flock_v, cur_v),
            flock_past=sim(flock_v, past_v),
            simhash_distance=(hamming(simhash(past), simhash(current))
                              if past is not None and current is not None else None),
        )
        fv = assemble_features(inst, arch, uri_f, sims, sentiment_probs(self.sentiment, inst.tweet_text),
                               celeb, first)
        entry = {"id": inst.id, "status": "partial" if notes else "ok", "notes": notes,
                 "missing": fv.missing()}
        return fv, entry

    def extract_all(self, ds: Dataset, jobs: int = 1) -> tuple[list[FeatureVector], list[dict]]:
        if jobs > 1 and len(ds) > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                results = list(pool.map(self.extract, [ds] * len(ds), ds.instances, chunksize=8))
        else:
            results = [self.extract(ds, inst) for inst in ds.instances]
        return [fv for fv, _ in results], [entry for _, entry in results]
