import pytest
from hypothesis import given, strategies as st

from tirm.urifeat import (
    UnresolvedUriError, UriParseError, expand_uri, load_uri_mapping, reduction_rate, uri_depth,
    uri_features,
)

SHORT = {"bit.example"}


def test_expand_by_code():
    table = {"abc": "http://news.example/world/story.html"}
    assert expand_uri("http://bit.example/abc", table, SHORT) == "http://news.example/world/story.html"


def test_expand_by_full_key():
    table = {"http://bit.example/abc": "http://long.example/"}
    assert expand_uri("http://bit.example/abc", table, SHORT) == "http://long.example/"


def test_expand_identity_for_non_shortener():
    assert expand_uri("http://news.example/a.html", {"a": "b"}, SHORT) == "http://news.example/a.html"


def test_expand_unresolved():
    with pytest.raises(UnresolvedUriError):
        expand_uri("http://bit.example/zzz", {}, SHORT)


def test_default_shorteners_include_bitly():
    with pytest.raises(UnresolvedUriError):
        expand_uri("http://bit.ly/zzz", {})


def oracle_depth(uri):
    rest = uri.split("://", 1)[1]
    rest = rest.split("#", 1)[0].split("?", 1)[0]
    path = rest[rest.find("/"):] if "/" in rest else ""
    return len([s for s in path.split("/") if s != ""])


@pytest.mark.parametrize("uri,depth", [
    ("http://example.com/", 0), ("http://example.com", 0),
    ("http://example.com/a/b/page.html", 3), ("http://example.com/a/?q=1", 1),
    ("http://example.com/a//b/#frag", 2),
])
def test_uri_depth(uri, depth):
    assert uri_depth(uri) == depth == oracle_depth(uri)


@pytest.mark.parametrize("bad", ["example.com/a", "/just/a/path", "http:///a"])
def test_uri_depth_unparseable(bad):
    with pytest.raises(UriParseError):
        uri_depth(bad)


segment = st.text(alphabet="abcdefgh0123456789-_.", min_size=1, max_size=6).filter(lambda s: s not in (".", ".."))


@given(st.lists(segment, max_size=6), st.text(alphabet="abc=&1", max_size=8), st.text(alphabet="abc", max_size=4))
def test_depth_ignores_query_and_fragment(segs, query, frag):
    base = "http://h.example/" + "/".join(segs)
    assert uri_depth(base + "?" + query + "#" + frag) == uri_depth(base) == len(segs)


@given(st.lists(segment, max_size=6), segment)
def test_depth_monotone_in_path(segs, extra):
    parent = "http://h.example/" + "/".join(segs)
    child = parent.rstrip("/") + "/" + extra
    assert uri_depth(parent) <= uri_depth(child) == uri_depth(parent) + 1


def test_reduction_rate_examples():
    assert reduction_rate("s" * 20, "l" * 80) == pytest.approx(0.75)
    assert reduction_rate("s" * 20, "l" * 20) == 0.0
    assert reduction_rate("s" * 25, "l" * 20) == pytest.approx(-0.25)


@given(st.text(min_size=1))
def test_reduction_rate_self_zero(x):
    assert reduction_rate(x, x) == 0.0


def test_reduction_rate_requires_values():
    with pytest.raises(ValueError):
        reduction_rate("", "x")


def test_uri_features_bundle():
    f = uri_features("http://bit.ly/ab", "http://news.example/a/b/c.html")
    assert f.depth == 3 and f.short_len == 16 and f.long_len == 30


def test_load_uri_mapping(tmp_path):
    p = tmp_path / "map.tsv"
    p.write_text("# comment\nhttp://bit.ly/a\thttp://x.example/1\n\nb\thttp://x.example/2\n")
    assert load_uri_mapping(p) == {"http://bit.ly/a": "http://x.example/1", "b": "http://x.example/2"}
    p.write_text("only-one-column\n")
    with pytest.raises(Exception):
        load_uri_mapping(p)
