"""Regenerate src/tirm/data/sentiment_corpus.tsv (100 short texts per class).

The texts are composed from fixed phrase lists so the file is reproducible.
"""

import itertools
import random
from pathlib import Path

SUBJECTS = [
    "this article", "the new album", "today's game", "the update", "this video",
    "the speech", "the interview", "that movie", "the concert", "this story",
]

POS = [
    "is amazing, loved every minute", "made my day, so happy", "is brilliant and inspiring",
    "is wonderful news for everyone", "was great, highly recommend it",
    "is awesome, thank you so much", "is a beautiful tribute", "is fantastic, best thing this week",
    "gives me hope, great work", "is excellent and fun to read",
]
NEG = [
    "is terrible, what a disaster", "made me sad and angry", "is awful and disappointing",
    "is horrible news, so tragic", "was the worst, total waste of time",
    "is a shame, really upset", "is sad, rest in peace", "is ugly and broken again",
    "makes me furious, unbelievable failure", "is painful to watch, awful",
]
NEU = [
    "was published this morning", "is available at the link below", "starts at 8pm eastern",
    "has been posted online", "is scheduled for next week", "covers the main points",
    "was released on tuesday", "includes the full transcript", "is linked here for reference",
    "lists the official details",
]


def main():
    rng = random.Random(20130501)
    lines = []
    for label, phrases in (("pos", POS), ("neg", NEG), ("neu", NEU)):
        combos = list(itertools.product(SUBJECTS, phrases))
        rng.shuffle(combos)
        for subject, phrase in combos[:100]:
            lines.append(f"{label}\t{subject.capitalize()} {phrase}")
    out = Path(__file__).resolve().parents[1] / "src" / "tirm" / "data" / "sentiment_corpus.tsv"
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
