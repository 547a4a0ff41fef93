"""Dataset loading and validation, artifact resolution, liveness bookkeeping
and feature-file persistence."""

from __future__ import annotations

import hashlib
import json
import logging
import math
import os
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional
from urllib.parse import urlsplit

from .core import (
    DATASET_HEADER, Instance, ParseError, Provenance, Relevancy, TirmError, parse_record,
    serialize_record,
)
from .learn.features import N_FEATURES, SCHEMA_VERSION, FeatureVector

logger = logging.getLogger(__name__)

FEATURES_HEADER_PREFIX = "#tirm-features "
MAX_REDIRECTS = 5


class DatasetError(TirmError):
    """Validation failure; ``problems`` holds ``(line, message)`` pairs."""

    def __init__(self, message: str, problems=()):
        self.problems = list(problems)
        detail = "".join(f"\n  line {ln}: {msg}" if ln else f"\n  {msg}" for ln, msg in self.problems)
        super().__init__(message + detail)


class MissingArtifactError(DatasetError):
    pass


class SnapshotError(TirmError):
    pass


class LivenessError(TirmError):
    pass


class FeatureFileError(TirmError):
    pass


@dataclass(frozen=True)
class Dataset:
    name: str
    instances: tuple[Instance, ...]
    provenance: Provenance = field(default_factory=Provenance)
    root: Path = Path(".")
    warnings: tuple[str, ...] = ()

    def __len__(self):
        return len(self.instances)

    def resolve(self, ref: str) -> Path:
        p = Path(ref)
        return p if p.is_absolute() else self.root / p


def artifact_root(dataset_path, data_dir=None) -> Path:
    """Root against which relative artifact refs resolve: explicit ``data_dir``,
    else ``$TIRM_DATA_DIR``, else the dataset file's directory."""
    if data_dir:
        return Path(data_dir)
    env = os.environ.get("TIRM_DATA_DIR")
    if env:
        return Path(env)
    return Path(dataset_path).resolve().parent


def load_dataset(path, strict: bool = False, data_dir=None) -> Dataset:
    """Load and validate a ``#tirm-dataset v1`` file.

    Every malformed line is reported at once. Missing referenced artifacts are
    an error in strict mode and a warning otherwise.
    """
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or lines[0].strip() != DATASET_HEADER:
        found = lines[0].strip() if lines else "<empty file>"
        raise DatasetError(f"{path}: expected header {DATASET_HEADER!r}, found {found!r}")
    root = artifact_root(path, data_dir)
    problems: list[tuple[int, str]] = []
    instances: list[Instance] = []
    seen: dict[str, int] = {}
    for lineno, line in enumerate(lines[1:], 2):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        try:
            inst = parse_record(line)
        except ParseError as exc:
            problems.append((lineno, str(exc)))
            continue
        if inst.id in seen:
            problems.append((lineno, f"duplicate id {inst.id!r} (first on line {seen[inst.id]})"))
            continue
        seen[inst.id] = lineno
        instances.append(inst)
    if problems:
        raise DatasetError(f"{path}: {len(problems)} invalid record(s)", problems)

    missing: list[tuple[int, str]] = []
    for inst in instances:
        for ref in (inst.snapshot_past_ref, inst.snapshot_current_ref, inst.timemap_ref):
            if ref and not (Path(ref) if Path(ref).is_absolute() else root / ref).is_file():
                missing.append((seen[inst.id], f"instance {inst.id}: missing artifact {ref}"))
    if missing and strict:
        raise MissingArtifactError(f"{path}: {len(missing)} missing artifact(s)", missing)
    for _, msg in missing:
        logger.warning(msg)
    prov = Provenance(
        source=str(path),
        ingested_at=datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ"),
    )
    return Dataset(path.stem, tuple(instances), prov, root, tuple(m for _, m in missing))


def write_dataset(path, instances) -> None:
    ids = set()
    out = [DATASET_HEADER]
    for inst in instances:
        if inst.id in ids:
            raise DatasetError(f"duplicate id {inst.id!r}")
        ids.add(inst.id)
        out.append(serialize_record(inst))
    Path(path).write_text("\n".join(out) + "\n", encoding="utf-8")


def read_snapshot(path) -> str:
    """Raw HTML of a stored snapshot, decoded lossily as UTF-8.

    Empty files and files containing NUL bytes are treated as corrupted.
    """
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise SnapshotError(f"cannot read snapshot {path}: {exc.strerror}") from None
    if not raw.strip():
        raise SnapshotError(f"corrupted snapshot {path}: empty file")
    if b"\x00" in raw:
        raise SnapshotError(f"corrupted snapshot {path}: binary content")
    return raw.decode("utf-8", errors="replace")


# ---------------------------------------------------------------------------
# liveness


@dataclass(frozen=True)
class LivenessSummary:
    pct_status_200: float
    pct_status_other: float
    n: int = 0


def liveness_summary(ds: Dataset, fetcher: "Fetcher | None" = None) -> LivenessSummary:
    """Share of instances answering 200 vs anything else.

    Recorded statuses are used when present; otherwise ``fetcher`` is asked
    and a failed fetch counts as missing.
    """
    statuses: list[Optional[int]] = []
    absent = []
    for inst in ds.instances:
        if inst.http_status is not None:
            statuses.append(inst.http_status)
        elif fetcher is not None:
            statuses.append(fetcher.status(inst.long_uri or inst.short_uri))
        else:
            absent.append(inst.id)
    if absent:
        raise LivenessError(
            f"{len(absent)} instance(s) have no recorded HTTP status (e.g. {absent[0]}); "
            "rerun with --online to fetch them"
        )
    return liveness_from_statuses(statuses)


def liveness_from_statuses(statuses) -> LivenessSummary:
    statuses = list(statuses)
    if not statuses:
        return LivenessSummary(0.0, 0.0, 0)
    live = sum(1 for s in statuses if s == 200)
    pct = 100.0 * live / len(statuses)
    return LivenessSummary(pct, 100.0 - pct, len(statuses))


# ---------------------------------------------------------------------------
# feature files


def _encode_value(v: Optional[float]):
    if v is None:
        return None
    if not math.isfinite(v):
        raise FeatureFileError(f"non-finite feature value {v!r}")
    return float(v)


def persist_features(path, ids, vectors, labels=None) -> None:
    """Write one JSON record per instance after a ``#tirm-features <schema>`` header.

    ``labels`` (optional) attaches a Relevancy to each record.
    """
    ids, vectors = list(ids), list(vectors)
    labels = list(labels) if labels is not None else [None] * len(vectors)
    if not len(ids) == len(vectors) == len(labels):
        raise FeatureFileError(
            f"count mismatch: {len(ids)} ids, {len(vectors)} vectors, {len(labels)} labels"
        )
    schema = {fv.schema for fv in vectors} or {SCHEMA_VERSION}
    if len(schema) != 1:
        raise FeatureFileError(f"mixed feature schemas {sorted(schema)}")
    out = [FEATURES_HEADER_PREFIX + schema.pop()]
    for i, fv, lab in zip(ids, vectors, labels):
        rec = {"id": i, "values": [_encode_value(v) for v in fv.values]}
        if lab is not None:
            rec["label"] = Relevancy(lab).value
        out.append(json.dumps(rec, sort_keys=True, separators=(",", ":"), ensure_ascii=False))
    Path(path).write_text("\n".join(out) + "\n", encoding="utf-8")


@dataclass(frozen=True)
class FeatureRecord:
    id: str
    vector: FeatureVector
    label: Optional[Relevancy] = None


def load_features(path, expect_schema: str = SCHEMA_VERSION) -> list[FeatureRecord]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or not lines[0].startswith(FEATURES_HEADER_PREFIX):
        raise FeatureFileError(f"{path}: missing '{FEATURES_HEADER_PREFIX}<schema>' header")
    schema = lines[0][len(FEATURES_HEADER_PREFIX):].strip()
    if schema != expect_schema:
        raise FeatureFileError(f"{path}: feature schema {schema!r}, expected {expect_schema!r}")
    records = []
    for lineno, line in enumerate(lines[1:], 2):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            values = rec["values"]
            if len(values) != N_FEATURES:
                raise ValueError(f"{len(values)} values")
            vec = FeatureVector(tuple(None if v is None else float(v) for v in values), schema)
            label = Relevancy(rec["label"]) if rec.get("label") is not None else None
            records.append(FeatureRecord(str(rec["id"]), vec, label))
        except (ValueError, KeyError, TypeError) as exc:
            raise FeatureFileError(f"{path}:{lineno}: bad feature record ({exc})") from None
    return records


# ---------------------------------------------------------------------------
# online fetching with capture


def uri_key(uri: str) -> str:
    return hashlib.sha1(uri.encode("utf-8")).hexdigest()


class Fetcher:
    """HTTP fetcher that records every response under ``capture_dir``.

    Layout: ``status.log`` holds ``<sha1(uri)>\\t<status>\\t<uri>`` lines and
    ``bodies/<sha1(uri)>`` the response bodies. With ``replay=True`` answers
    come from the capture only, so runs can be repeated offline. Redirects are
    followed up to 5 hops; status 0 means the fetch failed.
    """

    def __init__(self, capture_dir, replay: bool = False, timeout: float = 20.0,
                 politeness: float = 1.0, jobs: int = 4):
        self.capture_dir = Path(capture_dir)
        self.replay = replay
        self.timeout = timeout
        self.politeness = politeness
        self.jobs = max(1, jobs)
        self._lock = threading.Lock()
        self._last_hit: dict[str, float] = {}
        self._statuses: dict[str, int] = {}
        self._session = None
        log = self.capture_dir / "status.log"
        if log.exists():
            for line in log.read_text(encoding="utf-8").splitlines():
                key, status, _ = line.split("\t", 2)
                self._statuses[key] = int(status)

    def _http(self):
        if self._session is None:
            import requests

            self._session = requests.Session()
            self._session.max_redirects = MAX_REDIRECTS
            self._session.headers["User-Agent"] = "tirm-fetcher/0.1"
        return self._session

    def _wait_turn(self, host: str):
        with self._lock:
            now = time.monotonic()
            ready = self._last_hit.get(host, 0.0) + self.politeness
            self._last_hit[host] = max(now, ready)
        delay = ready - now
        if delay > 0:
            time.sleep(delay)

    def _record(self, uri: str, status: int, body: bytes):
        key = uri_key(uri)
        with self._lock:
            self._statuses[key] = status
            (self.capture_dir / "bodies").mkdir(parents=True, exist_ok=True)
            (self.capture_dir / "bodies" / key).write_bytes(body)
            with open(self.capture_dir / "status.log", "a", encoding="utf-8") as fh:
                fh.write(f"{key}\t{status}\t{uri}\n")

    def get(self, uri: str) -> tuple[int, bytes]:
        key = uri_key(uri)
        if key in self._statuses:
            body_path = self.capture_dir / "bodies" / key
            return self._statuses[key], body_path.read_bytes() if body_path.exists() else b""
        if self.replay:
            raise LivenessError(f"no captured response for {uri}")
        import requests

        self._wait_turn(urlsplit(uri).hostname or "")
        try:
            resp = self._http().get(uri, timeout=self.timeout, allow_redirects=True)
            status, body = resp.status_code, resp.content
        except requests.RequestException as exc:
            logger.warning("fetch failed for %s: %s", uri, exc)
            status, body = 0, b""
        self._record(uri, status, body)
        return status, body

    def status(self, uri: str) -> int:
        return self.get(uri)[0]

    def status_many(self, uris) -> list[int]:
        uris = list(uris)
        with ThreadPoolExecutor(max_workers=self.jobs) as pool:
            return list(pool.map(self.status, uris))
