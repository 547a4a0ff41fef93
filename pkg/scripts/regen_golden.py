"""Regenerate the golden files of the bundled synthetic corpus.

Feature vectors are assembled here from the raw dataset records without the
package's feature assembly or extraction pipeline; only the text, timemap and
sentiment primitives are shared. The golden TIRM report is then produced by
running label, train and tirm on those golden vectors.

Run this only when the corpus or the report format changes on purpose.
"""

import argparse
import hashlib
import json
import math
import re
import shutil
import subprocess
import sys
import tempfile
from datetime import datetime, timezone
from pathlib import Path
from urllib.parse import urlsplit

from tirm.learn.features import FEATURE_NAMES
from tirm.memento import parse_timemap
from tirm.sentiment import default_model, sentiment_probs
from tirm.textsim import cosine, extract_text, hamming, simhash, term_vector

CORPUS = Path(__file__).resolve().parents[1] / "corpus" / "synthetic50"
SEED = 7

# slot order written out independently and checked against the package
SLOTS = """
uri_depth reduction_rate short_len long_len num_mementos num_archives delta_signed_hours
delta_abs_hours bitly_clicks_total referrer_site_count referrer_country_count topsy_tweet_count
influential_tweet_count flock_size flock_deleted_ratio fb_shares fb_posts fb_likes fb_clicks
p_pos p_neg p_neu sim_tweet_current sim_tweet_past sim_past_current sim_flock_current
sim_flock_past simhash_distance_past_current celebrity_flag tweet_char_len tweet_token_count
tweet_age_at_eval_days resource_age_at_tweet_hours has_hashtag has_mention has_multiple_uris
hour_of_day_utc day_of_week clicklog_peak_ratio
""".split()

SOCIAL_COUNTS = ["bitly_clicks_total", "referrer_site_count", "referrer_country_count",
                 "topsy_tweet_count", "influential_tweet_count", "fb_shares", "fb_posts",
                 "fb_likes", "fb_clicks"]


def epoch(ts: str) -> int:
    return int(datetime.strptime(ts, "%Y-%m-%dT%H:%M:%SZ").replace(tzinfo=timezone.utc).timestamp())


def load_gazetteer_names():
    from importlib import resources
    text = (resources.files("tirm") / "data" / "celebrities_sample.txt").read_text(encoding="utf-8")
    return [line.strip() for line in text.splitlines() if line.strip() and not line.startswith("#")]


def mentions_celebrity(names, doc: str) -> bool:
    for name in names:
        words = name.split()
        pattern = r"(?<![^\W_])" + r"[\W_]+".join(re.escape(w) for w in words) + r"(?![^\W_])"
        if re.search(pattern, doc, flags=re.IGNORECASE):
            return True
    return False


def html(root: Path, ref: str) -> str:
    return extract_text((root / ref).read_bytes().decode("utf-8", errors="replace"))


def vector(rec: dict, root: Path, urimap: dict, model, celebs) -> list:
    f = dict.fromkeys(SLOTS)
    short = rec["short_uri"]
    long = rec.get("long_uri") or urimap[short]
    f["uri_depth"] = float(len([s for s in urlsplit(long).path.split("/") if s]))
    f["reduction_rate"] = 1.0 - len(short) / len(long)
    f["short_len"] = float(len(short))
    f["long_len"] = float(len(long))

    t_tweet = epoch(rec["t_tweet"])
    if rec.get("timemap_ref"):
        tm = parse_timemap((root / rec["timemap_ref"]).read_text(encoding="utf-8"))
        times = sorted(m.datetime for m in tm.mementos)
        best = min(times, key=lambda t: (abs(t - t_tweet), t))
        f["num_mementos"] = float(len(times))
        f["num_archives"] = float(len({urlsplit(m.uri).hostname.removeprefix("www.") for m in tm.mementos}))
        f["delta_signed_hours"] = (best - t_tweet) / 3600.0
        f["delta_abs_hours"] = abs(best - t_tweet) / 3600.0
        f["resource_age_at_tweet_hours"] = (t_tweet - times[0]) / 3600.0
    else:
        f["num_mementos"] = f["num_archives"] = 0.0

    past = html(root, rec["snapshot_past_ref"])
    cur = html(root, rec["snapshot_current_ref"])
    tweet = rec["tweet_text"]
    tv, pv, cv = term_vector(tweet), term_vector(past), term_vector(cur)
    f["sim_tweet_current"] = cosine(tv, cv)
    f["sim_tweet_past"] = cosine(tv, pv)
    f["sim_past_current"] = cosine(pv, cv)
    f["simhash_distance_past_current"] = float(hamming(simhash(past), simhash(cur)))

    social = rec.get("social")
    if social:
        for k in SOCIAL_COUNTS:
            f[k] = float(social.get(k, 0))
        flock = social.get("flock_tweets", [])
        f["flock_size"] = float(len(flock))
        f["flock_deleted_ratio"] = float(social.get("flock_deleted_ratio", 0.0))
        doc = "\n".join(flock)
        fv = term_vector(doc)
        f["sim_flock_current"] = cosine(fv, cv)
        f["sim_flock_past"] = cosine(fv, pv)
        f["celebrity_flag"] = 1.0 if mentions_celebrity(celebs, doc) else 0.0
        hourly = social.get("bitly_hourly_clicks") or []
        if sum(hourly) > 0:
            f["clicklog_peak_ratio"] = max(hourly) / sum(hourly)

    f["p_pos"], f["p_neg"], f["p_neu"] = sentiment_probs(model, tweet)
    f["tweet_char_len"] = float(len(tweet))
    f["tweet_token_count"] = float(len(tweet.split()))
    if rec.get("t_click"):
        f["tweet_age_at_eval_days"] = (epoch(rec["t_click"]) - t_tweet) / 86400.0
    words = tweet.split()
    f["has_hashtag"] = 1.0 if any(w.startswith("#") and len(w) > 1 for w in words) else 0.0
    f["has_mention"] = 1.0 if any("@" in w and not w.startswith("http") for w in words) else 0.0
    f["has_multiple_uris"] = 1.0 if sum(w.startswith(("http://", "https://")) for w in words) >= 2 else 0.0
    when = datetime.fromtimestamp(t_tweet, tz=timezone.utc)
    f["hour_of_day_utc"] = float(when.hour)
    f["day_of_week"] = float(when.weekday())
    return [f[s] for s in SLOTS]


def write_features(path: Path, rows):
    out = ["#tirm-features v1"]
    for rid, values in rows:
        assert all(v is None or math.isfinite(v) for v in values)
        out.append(json.dumps({"id": rid, "values": values}, sort_keys=True, separators=(",", ":"),
                              ensure_ascii=False))
    path.write_text("\n".join(out) + "\n", encoding="utf-8")


def tirm(*args, cwd):
    subprocess.run([sys.executable, "-m", "tirm.cli", *map(str, args)], check=True, cwd=cwd)


def regenerate(corpus: Path):
    if SLOTS != list(FEATURE_NAMES):
        sys.exit("slot order drifted from the package schema; update SLOTS deliberately")
    golden = corpus / "golden"
    golden.mkdir(exist_ok=True)
    lines = (corpus / "dataset.tirm").read_text(encoding="utf-8").splitlines()
    records = [json.loads(x) for x in lines[1:] if x.strip()]
    urimap = dict(line.split("\t") for line in (corpus / "urimap.tsv").read_text().splitlines() if line)
    model, celebs = default_model(), load_gazetteer_names()
    write_features(golden / "features.jsonl", [(r["id"], vector(r, corpus, urimap, model, celebs)) for r in records])

    dataset = corpus / "dataset.tirm"
    with tempfile.TemporaryDirectory() as tmp:
        tirm("label", "--dataset", dataset, "--features", golden / "features.jsonl", "--out", "labeled.jsonl", cwd=tmp)
        tirm("train", "--features", "labeled.jsonl", "--seed", SEED, "--model", "model.json", cwd=tmp)
        tirm("tirm", "--dataset", dataset, "--model", "model.json", "--features", golden / "features.jsonl",
             "--out", "tirm_report.json", cwd=tmp)
        shutil.copy(Path(tmp) / "tirm_report.json", golden / "tirm_report.json")
    for name in ("features.jsonl", "tirm_report.json"):
        digest = hashlib.sha1((golden / name).read_bytes()).hexdigest()
        print(f"{name}: {digest}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--corpus", type=Path, default=CORPUS)
    regenerate(ap.parse_args().corpus)


if __name__ == "__main__":
    main()
