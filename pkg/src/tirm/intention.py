"""Change detection, the temporal-intention quadrant model and
archived-vs-live recommendations."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

from .core import Intention, Relevancy, TirmError
from .memento import TimeMap, closest_memento

CHANGE_THRESHOLD = 0.70


class ChangeState(str, Enum):
    CHANGED = "Changed"
    NOT_CHANGED = "NotChanged"


class Quadrant(str, Enum):
    CHANGED_RELEVANT = "changed_relevant"
    CHANGED_NONRELEVANT = "changed_nonrelevant"
    NOTCHANGED_RELEVANT = "notchanged_relevant"
    NOTCHANGED_NONRELEVANT = "notchanged_nonrelevant"


class Recommendation(str, Enum):
    SERVE_CLOSEST_MEMENTO = "ServeClosestMemento"
    SERVE_LIVE_RESOURCE = "ServeLiveResource"
    NO_PREFERENCE = "NoPreference"


class UnservableIntentionError(TirmError):
    pass


_MODEL = {
    (ChangeState.CHANGED, Relevancy.RELEVANT): (Quadrant.CHANGED_RELEVANT, Intention.CURRENT),
    (ChangeState.CHANGED, Relevancy.NON_RELEVANT): (Quadrant.CHANGED_NONRELEVANT, Intention.PAST),
    (ChangeState.NOT_CHANGED, Relevancy.RELEVANT): (Quadrant.NOTCHANGED_RELEVANT, Intention.PAST),
    (ChangeState.NOT_CHANGED, Relevancy.NON_RELEVANT): (Quadrant.NOTCHANGED_NONRELEVANT, Intention.EITHER),
}


@dataclass(frozen=True)
class TirmVerdict:
    change: ChangeState
    relevancy: Relevancy
    quadrant: Quadrant
    intention: Intention
    recommendation: Recommendation
    target_uri: Optional[str] = None


def change_state(sim_past_current: float, threshold: float = CHANGE_THRESHOLD) -> ChangeState:
    """Changed iff the past/current similarity falls strictly below ``threshold``."""
    if not 0.0 <= sim_past_current <= 1.0:
        raise ValueError(f"similarity {sim_past_current} outside [0, 1]")
    return ChangeState.CHANGED if sim_past_current < threshold else ChangeState.NOT_CHANGED


def map_tirm(change: ChangeState, relevancy: Relevancy) -> tuple[Quadrant, Intention]:
    return _MODEL[(ChangeState(change), Relevancy(relevancy))]


def recommend(intention: Intention, tm: Optional[TimeMap], t_tweet: int, long_uri: str) -> tuple[Recommendation, str]:
    if intention is Intention.PAST:
        if tm is None or not tm.mementos:
            raise UnservableIntentionError(f"past intention for {long_uri} but no mementos to serve")
        memento, _ = closest_memento(tm, t_tweet)
        return Recommendation.SERVE_CLOSEST_MEMENTO, memento.uri
    if intention is Intention.CURRENT:
        return Recommendation.SERVE_LIVE_RESOURCE, long_uri
    return Recommendation.NO_PREFERENCE, long_uri


def verdict(sim_past_current: float, relevancy: Relevancy, tm: Optional[TimeMap], t_tweet: int,
            long_uri: str, threshold: float = CHANGE_THRESHOLD) -> TirmVerdict:
    change = change_state(sim_past_current, threshold)
    quadrant, intention = map_tirm(change, relevancy)
    rec, target = recommend(intention, tm, t_tweet, long_uri)
    return TirmVerdict(change, relevancy, quadrant, intention, rec, target)


def quadrant_report(verdicts) -> dict[str, float]:
    """Percentage of verdicts per quadrant; empty input gives an empty report."""
    verdicts = list(verdicts)
    if not verdicts:
        return {}
    n = len(verdicts)
    return {q.value: 100.0 * sum(1 for v in verdicts if v.quadrant is q) / n for q in Quadrant}
