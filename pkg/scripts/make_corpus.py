"""Generate the bundled 50-instance synthetic corpus under corpus/synthetic50/.

Every instance is built from one of four scenarios (changed or not, tweet
still matching the page or not) so that the downstream report touches every
quadrant. Output is fully determined by SEED.
"""

import argparse
import random
import shutil
from datetime import datetime, timedelta, timezone
from email.utils import format_datetime
from pathlib import Path

from tirm.core import DATASET_HEADER, Instance, SocialMetrics, VoteRecord, serialize_record
from tirm.memento import timemap_filename

SEED = 20130731
N = 50
ROOT = Path(__file__).resolve().parents[1] / "corpus" / "synthetic50"

TOPICS = {
    "election": "vote ballot candidate campaign senate poll district turnout debate governor primary".split(),
    "flu": "virus outbreak vaccine hospital patients symptoms clinic health pandemic doses swine".split(),
    "quake": "earthquake magnitude tremor rescue rubble aftershock epicenter relief collapse survivors".split(),
    "music": "album concert singer tour stage songs fans chart record band".split(),
    "space": "rocket launch orbit astronauts mission shuttle station capsule telescope lunar".split(),
    "football": "match goal striker league coach stadium season penalty keeper derby".split(),
    "storm": "hurricane winds flooding coast evacuation rainfall landfall forecast surge shelters".split(),
    "markets": "stocks shares investors index trading earnings banks dollar bonds rally".split(),
}
FILLER = "the a of and to in on for with from this that was were has have after before over about".split()
NAV = ["Home", "World", "Politics", "Sports", "Tech", "About", "Contact"]
SITES = ["news.example", "daily.example.org", "wire.example.net", "report.example"]
ARCHIVES = ["web.archive.example", "archive.example", "cache.example.org"]
CELEBS = ["Michael Jackson", "Barack Obama", "Lady Gaga", "Tom Hanks"]
MOODS = ["great news", "so sad", "read this", "wow", "terrible", "amazing story", ""]

# scenario -> (changed, tweet matches current page)
SCENARIOS = ["changed_relevant", "changed_nonrelevant", "same_relevant", "same_nonrelevant"]


def sentence(rng, words, n):
    out = []
    for _ in range(n):
        out.append(rng.choice(words) if rng.random() < 0.6 else rng.choice(FILLER))
    return " ".join(out).capitalize() + "."


def paragraph(rng, words, sentences=4):
    return " ".join(sentence(rng, words, rng.randint(9, 14)) for _ in range(sentences))


def page(title, paras, nav=True):
    navhtml = "<div class=nav>" + " ".join(f'<a href="/{n.lower()}">{n}</a>' for n in NAV) + "</div>" if nav else ""
    body = "".join(f"<p>{p}</p>" for p in paras)
    return (f"<html><head><title>{title}</title><script>var x = 1;</script></head>"
            f"<body>{navhtml}<div class=content>{body}</div>"
            f"<div class=footer><a href='/terms'>Terms</a> <a href='/privacy'>Privacy</a></div></body></html>\n")


def http_date(ts):
    return format_datetime(datetime.fromtimestamp(ts, tz=timezone.utc), usegmt=True)


def votes_for(rng, relevant, close):
    if close:
        k = 3 if relevant else 2
    else:
        k = rng.choice([5, 5, 4]) if relevant else rng.choice([0, 0, 1])
    v = ["Relevant"] * k + ["NonRelevant"] * (5 - k)
    rng.shuffle(v)
    return VoteRecord.of(v)


def build(root: Path):
    rng = random.Random(SEED)
    if root.exists():
        shutil.rmtree(root)
    (root / "snapshots").mkdir(parents=True)
    (root / "timemaps").mkdir()
    base = datetime(2012, 3, 1, tzinfo=timezone.utc)
    t_click = int(datetime(2013, 1, 15, 12, tzinfo=timezone.utc).timestamp())
    topics = list(TOPICS)
    instances, urimap = [], []
    for i in range(N):
        iid = f"syn{i:03d}"
        scenario = SCENARIOS[i % 4]
        changed = scenario.startswith("changed")
        relevant = scenario.endswith("_relevant")
        topic = topics[i % len(topics)]
        other = topics[(i + 3) % len(topics)]
        site = SITES[i % len(SITES)]
        depth = rng.randint(0, 4)
        path = "/".join(rng.choice(TOPICS[topic]) for _ in range(depth))
        long_uri = f"http://{site}/{path}" + (f"/story{i}.html" if depth else "")
        short_uri = f"http://bit.ly/tirm{i:02d}"
        t_tweet = int((base + timedelta(days=rng.randint(0, 200), seconds=rng.randint(0, 86399))).timestamp())

        past_paras = [paragraph(rng, TOPICS[topic]) for _ in range(3)]
        if changed:
            cur_paras = [paragraph(rng, TOPICS[other]) for _ in range(3)]
        else:
            cur_paras = list(past_paras)
            if rng.random() < 0.5:
                cur_paras[-1] = paragraph(rng, TOPICS[topic])
        title_past = f"{topic.title()} coverage {i}"
        title_cur = f"{other.title()} coverage {i}" if changed else title_past
        (root / "snapshots" / f"{iid}_past.html").write_text(page(title_past, past_paras), encoding="utf-8")
        (root / "snapshots" / f"{iid}_current.html").write_text(page(title_cur, cur_paras, nav=i % 5 != 0),
                                                               encoding="utf-8")

        # the tweet describes whatever the reader will find relevant
        if relevant:
            tweet_words = TOPICS[other if changed else topic]
        else:
            tweet_words = TOPICS[topic] if changed else TOPICS[topics[(i + 5) % len(topics)]]
        tweet = " ".join(rng.sample(tweet_words, 4))
        mood = rng.choice(MOODS)
        tweet = f"{mood} {tweet}".strip()
        if i % 3 == 0:
            tweet += f" #{topic}"
        if i % 7 == 0:
            tweet = f"@reporter{i} " + tweet
        tweet += f" {short_uri}"
        if i % 11 == 0:
            tweet += " http://other.example/x"

        timemap_ref = ""
        if i != 14:
            n_m = rng.randint(10, 16)
            hosts = ARCHIVES[:1 + i % 3]
            lines = [f'<{long_uri}>; rel="original"']
            for j in range(n_m):
                ts = t_tweet + rng.randint(-60 * 86400, 30 * 86400)
                host = hosts[j % len(hosts)]
                stamp = datetime.fromtimestamp(ts, tz=timezone.utc).strftime("%Y%m%d%H%M%S")
                lines.append(f'<http://{host}/web/{stamp}/{long_uri}>; rel="memento"; datetime="{http_date(ts)}"')
            rng.shuffle(lines)
            name = timemap_filename(long_uri)
            (root / "timemaps" / name).write_text(",\n".join(lines) + "\n", encoding="utf-8")
            timemap_ref = f"timemaps/{name}"

        social = None
        if i % 6 != 5:
            flock = [" ".join(rng.sample(TOPICS[topic], 3)) for _ in range(rng.randint(0, 12))]
            if i % 4 == 1 and flock:
                flock[0] += " says " + CELEBS[i % len(CELEBS)]
            hourly = [rng.randint(0, 40) for _ in range(24)]
            social = SocialMetrics(
                bitly_clicks_total=sum(hourly) + rng.randint(0, 500),
                bitly_created=t_tweet - rng.randint(0, 7200),
                referrer_site_count=rng.randint(0, 30),
                referrer_country_count=rng.randint(0, 15),
                topsy_tweet_count=rng.randint(0, 800),
                influential_tweet_count=rng.randint(0, 20),
                flock_tweets=tuple(flock),
                flock_deleted_ratio=round(rng.random() * 0.3, 3),
                fb_shares=rng.randint(0, 300),
                fb_posts=rng.randint(0, 50),
                fb_likes=rng.randint(0, 900),
                fb_clicks=rng.randint(0, 400),
                bitly_hourly_clicks=tuple(hourly),
            )

        close = i % 9 == 4
        expand_via_map = i % 5 == 2
        if expand_via_map:
            urimap.append(f"{short_uri}\t{long_uri}")
        instances.append(Instance(
            id=iid, tweet_text=tweet, t_tweet=t_tweet, short_uri=short_uri,
            long_uri="" if expand_via_map else long_uri,
            snapshot_past_ref=f"snapshots/{iid}_past.html",
            snapshot_current_ref=f"snapshots/{iid}_current.html",
            timemap_ref=timemap_ref, social=social,
            votes=votes_for(rng, relevant, close),
            http_status=404 if i % 17 == 16 else 200,
            t_click=t_click,
        ))

    lines = [DATASET_HEADER] + [serialize_record(x) for x in instances]
    (root / "dataset.tirm").write_text("\n".join(lines) + "\n", encoding="utf-8")
    (root / "urimap.tsv").write_text("\n".join(urimap) + "\n", encoding="utf-8")
    print(f"wrote {len(instances)} instances to {root}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=ROOT)
    args = ap.parse_args()
    build(args.out)


if __name__ == "__main__":
    main()
