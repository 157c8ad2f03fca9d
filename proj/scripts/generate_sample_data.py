#!/usr/bin/env python3
"""Regenerate the checked-in sample data under data/.

The embedding is a 64-word, 8-dimensional toy with planted gender and race
bias. Identity directions live on axes 0 (gender) and 1 (race); attribute
clusters live on their own axes, career/family on 2 and pleasant/unpleasant
on 3. Identity words carry a shared lean along the matching attribute axis
(the planted association) plus a zero-sum per-word deviation, so effect
sizes stay measurable after debiasing translations. Word pairs that should
look similar share a base offset on axes 4..7, which also makes a few
analogy parallelograms hold.
"""
import random
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "data"

rng = random.Random(20240915)


def noise(scale, d=8):
    return [rng.uniform(-scale, scale) for _ in range(d)]


def add(*vs):
    out = [0.0] * 8
    for v in vs:
        for i, x in enumerate(v):
            out[i] += x
    return out


def axis(i, value):
    v = [0.0] * 8
    v[i] = value
    return v


def offset(scale=0.25):
    # identity component on axes 4..7 only
    v = [0.0] * 8
    for i in range(4, 8):
        v[i] = rng.uniform(-scale, scale)
    return v


rows = {}


def put(word, vec):
    assert word not in rows, word
    rows[word] = vec


LEAN = 0.2

# gender: pairs share an identity offset so "he she man woman"-style
# parallelograms hold; the lean along axis 2 plants the career/family bias
gender_pairs = [("he", "she"), ("him", "her"), ("his", "hers"),
                ("man", "woman"), ("male", "female"), ("boy", "girl")]
dev_m = [0.09, -0.09, 0.05, -0.05, 0.02, -0.02]
dev_f = [-0.05, 0.05, -0.09, 0.09, -0.02, 0.02]
for k, (m, f) in enumerate(gender_pairs):
    o = offset()
    put(m, add(axis(0, 0.8), axis(2, LEAN + dev_m[k]), o, noise(0.01)))
    put(f, add(axis(0, -0.8), axis(2, -LEAN + dev_f[k]), o, noise(0.01)))

# race names, same construction with the pleasant/unpleasant lean on axis 3
race_pairs = [("adam", "jamal"), ("frank", "leroy"), ("harry", "tyrone")]
dev_a = [0.08, -0.08, 0.0]
dev_b = [-0.04, 0.04, 0.0]
for k, (a, b) in enumerate(race_pairs):
    o = offset()
    put(a, add(axis(1, 0.8), axis(3, LEAN + dev_a[k]), o, noise(0.01)))
    put(b, add(axis(1, -0.8), axis(3, -LEAN + dev_b[k]), o, noise(0.01)))

# attribute sets with radial spread along their own axis
attr_sets = {
    "career": (["career", "office", "salary", "business", "profession"], 2, 1),
    "family": (["family", "home", "children", "marriage", "relatives"], 2, -1),
    "pleasant": (["love", "peace", "joy", "happy", "friend"], 3, 1),
    "unpleasant": (["hate", "war", "pain", "awful", "enemy"], 3, -1),
}
for words, ax, sign in attr_sets.values():
    for k, w in enumerate(words):
        put(w, add(axis(ax, sign * (0.6 + 0.08 * k)), noise(0.005)))

# filler clusters: each pair shares a base direction, so similarity
# datasets have something to rank highly
filler_pairs = [("water", "river"), ("tree", "garden"), ("book", "paper"),
                ("street", "road"), ("coffee", "bread"), ("window", "door")]
for a, b in filler_pairs:
    base = offset(0.45)
    put(a, add(base, noise(0.05)))
    put(b, add(base, noise(0.05)))

filler_singles = ["music", "stone", "glass", "train", "letter", "shoe",
                  "clock", "apple", "horse", "field", "light", "night",
                  "bridge", "table"]
for w in filler_singles:
    put(w, add(offset(0.5), noise(0.05)))

assert len(rows) == 64, len(rows)

OUT.mkdir(exist_ok=True)
with open(OUT / "sample_embedding.txt", "w") as fh:
    for w, v in rows.items():
        fh.write(w + " " + " ".join(f"{x:.6f}" for x in v) + "\n")

with open(OUT / "toy_similarity.tsv", "w") as fh:
    fh.write("# word1<TAB>word2<TAB>human score (0-10)\n")
    pairs = [("love", "joy", 9.0), ("happy", "joy", 8.5),
             ("career", "office", 8.0), ("family", "home", 8.5),
             ("water", "river", 7.5), ("street", "road", 7.0),
             ("tree", "garden", 6.5), ("love", "hate", 1.5),
             ("war", "peace", 2.0), ("friend", "enemy", 2.5)]
    for a, b, s in pairs:
        fh.write(f"{a}\t{b}\t{s}\n")

with open(OUT / "toy_analogy.txt", "w") as fh:
    fh.write(": gender-pairs\n")
    fh.write("he she man woman\n")
    fh.write("man woman boy girl\n")
    fh.write("he she him her\n")
    fh.write("man woman his hers\n")
    fh.write(": race-names\n")
    fh.write("adam jamal frank leroy\n")
    fh.write("adam jamal harry tyrone\n")
    fh.write("frank leroy harry tyrone\n")

print("wrote", OUT)
