import json
import math

import pytest
from hypothesis import given, strategies as st

from tirm.core import DATASET_HEADER, Instance, VoteRecord
from tirm.ingest import (
    DatasetError, Fetcher, FeatureFileError, LivenessError, MissingArtifactError, SnapshotError,
    liveness_from_statuses, liveness_summary, load_dataset, load_features, persist_features,
    read_snapshot, uri_key, write_dataset,
)
from tirm.learn.features import N_FEATURES, FeatureVector


def rec(i, **kw):
    d = {"id": f"r{i}", "tweet_text": "hi", "t_tweet": "2009-06-15T12:00:00Z", "short_uri": "http://bit.ly/a"}
    d.update(kw)
    return json.dumps(d)


def write(path, *lines, header=DATASET_HEADER):
    path.write_text("\n".join([header, *lines]) + "\n", encoding="utf-8")
    return path


def test_three_valid_lines(tmp_path):
    ds = load_dataset(write(tmp_path / "d.tirm", rec(1), rec(2), "", "# note", rec(3)))
    assert len(ds) == 3 and ds.name == "d"
    assert ds.provenance.source.endswith("d.tirm")


def test_header_required(tmp_path):
    with pytest.raises(DatasetError, match="header"):
        load_dataset(write(tmp_path / "d.tirm", rec(1), header="#tirm-dataset v2"))


def test_duplicate_id_reports_both_lines(tmp_path):
    with pytest.raises(DatasetError) as err:
        load_dataset(write(tmp_path / "d.tirm", rec(1), rec(2), rec(1)))
    assert "r1" in str(err.value) and "line 2" in str(err.value) and "line 4" in str(err.value)


def test_all_line_errors_aggregated(tmp_path):
    with pytest.raises(DatasetError) as err:
        load_dataset(write(tmp_path / "d.tirm", rec(1, t_tweet="yesterday"), "{bad", rec(3)))
    lines = [ln for ln, _ in err.value.problems]
    assert lines == [2, 3]


def test_missing_artifact_strict_and_lenient(tmp_path, caplog):
    path = write(tmp_path / "d.tirm", rec(1, snapshot_past_ref="snaps/none.html"))
    with pytest.raises(MissingArtifactError, match="none.html"):
        load_dataset(path, strict=True)
    ds = load_dataset(path)
    assert ds.warnings and "none.html" in caplog.text


def test_artifact_root_precedence(tmp_path, monkeypatch):
    (tmp_path / "alt").mkdir()
    (tmp_path / "alt" / "p.html").write_text("<p>x</p>")
    path = write(tmp_path / "d.tirm", rec(1, snapshot_past_ref="p.html"))
    monkeypatch.setenv("TIRM_DATA_DIR", str(tmp_path / "alt"))
    assert load_dataset(path, strict=True).root == tmp_path / "alt"
    with pytest.raises(MissingArtifactError):
        load_dataset(path, strict=True, data_dir=tmp_path)


def test_write_dataset_roundtrip(tmp_path):
    insts = [Instance(f"i{i}", "t", 1_000_000 + i, "http://bit.ly/x", votes=VoteRecord.of(["Relevant"]))
             for i in range(3)]
    write_dataset(tmp_path / "o.tirm", insts)
    assert load_dataset(tmp_path / "o.tirm").instances == tuple(insts)
    with pytest.raises(DatasetError):
        write_dataset(tmp_path / "o.tirm", insts + insts[:1])


def test_read_snapshot(tmp_path):
    (tmp_path / "ok.html").write_bytes(b"<p>hi \xff</p>")
    assert read_snapshot(tmp_path / "ok.html") == "<p>hi �</p>"
    (tmp_path / "empty.html").write_bytes(b"  \n")
    (tmp_path / "bin.html").write_bytes(b"\x00\x01\x02")
    for name in ("empty.html", "bin.html", "missing.html"):
        with pytest.raises(SnapshotError, match=name):
            read_snapshot(tmp_path / name)


def test_liveness_examples():
    s = liveness_from_statuses([200, 200, 404])
    assert (round(s.pct_status_200, 2), round(s.pct_status_other, 2)) == (66.67, 33.33)
    assert liveness_from_statuses([200] * 4).pct_status_other == 0.0
    assert liveness_from_statuses([]).n == 0


@given(st.lists(st.sampled_from([0, 200, 301, 404, 500]), min_size=1, max_size=50))
def test_liveness_sums_to_100(statuses):
    s = liveness_from_statuses(statuses)
    assert s.pct_status_200 + s.pct_status_other == pytest.approx(100.0, abs=0.01)


def test_liveness_offline_missing_status(tmp_path):
    ds = load_dataset(write(tmp_path / "d.tirm", rec(1, http_status=200), rec(2)))
    with pytest.raises(LivenessError, match="--online"):
        liveness_summary(ds)


def test_liveness_with_replayed_capture(tmp_path):
    cap = tmp_path / "cap"
    cap.mkdir()
    uri = "http://news.example/a"
    (cap / "status.log").write_text(f"{uri_key(uri)}\t404\t{uri}\n")
    ds = load_dataset(write(tmp_path / "d.tirm", rec(1, http_status=200), rec(2, long_uri=uri)))
    s = liveness_summary(ds, Fetcher(cap, replay=True))
    assert s.pct_status_200 == 50.0
    with pytest.raises(LivenessError):
        Fetcher(cap, replay=True).get("http://unseen.example/")


def test_fetcher_records_capture(tmp_path, monkeypatch):
    class Resp:
        status_code, content = 200, b"body"

    class Session:
        max_redirects, headers = 0, {}

        def get(self, uri, timeout, allow_redirects):
            return Resp()

    f = Fetcher(tmp_path / "cap", politeness=0.0)
    f._session = Session()
    assert f.get("http://a.example/") == (200, b"body")
    replay = Fetcher(tmp_path / "cap", replay=True)
    assert replay.get("http://a.example/") == (200, b"body")


vectors = st.lists(st.one_of(st.none(), st.floats(allow_nan=False, allow_infinity=False)),
                   min_size=N_FEATURES, max_size=N_FEATURES).map(lambda v: FeatureVector(tuple(v)))


@given(st.lists(vectors, max_size=10))
def test_features_roundtrip(tmp_path_factory, vs):
    path = tmp_path_factory.mktemp("f") / "f.jsonl"
    persist_features(path, [f"i{i}" for i in range(len(vs))], vs)
    back = load_features(path)
    assert [r.vector for r in back] == vs


def test_features_empty_and_labels(tmp_path):
    persist_features(tmp_path / "e.jsonl", [], [])
    assert load_features(tmp_path / "e.jsonl") == []
    fv = FeatureVector((1.0,) * N_FEATURES)
    persist_features(tmp_path / "l.jsonl", ["a"], [fv], ["Relevant"])
    assert load_features(tmp_path / "l.jsonl")[0].label.value == "Relevant"


def test_features_errors(tmp_path):
    fv = FeatureVector((0.0,) * N_FEATURES)
    with pytest.raises(FeatureFileError):
        persist_features(tmp_path / "x", ["a", "b"], [fv])
    with pytest.raises(FeatureFileError):
        persist_features(tmp_path / "x", ["a"], [FeatureVector((math.inf,) + (0.0,) * 38)])
    persist_features(tmp_path / "x", ["a"], [fv])
    with pytest.raises(FeatureFileError, match="v2"):
        load_features(tmp_path / "x", expect_schema="v2")
    (tmp_path / "y").write_text("#tirm-features v1\n{\"id\": \"a\", \"values\": [1]}\n")
    with pytest.raises(FeatureFileError, match=":2"):
        load_features(tmp_path / "y")
