#!/usr/bin/env python3
# Copyright 2026 The SBF Toolkit Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Writes the bundled synthetic sample used by tests and the acceptance run.

The sample imitates the released annotation files: one CSV row per
(annotation, group, statement) tuple, numeric answer codes, and the release
column names, read through a column map. Posts, labels and annotator noise
come from a small seeded generative process. Nothing here is real data.

    python3 tools/make_sample.py [--out data] [--posts 500] [--seed 20260101]
"""

import argparse
import csv
import json
import os
import random

GROUPS = {
    "women": ["are less qualified", "are too emotional", "belong in the kitchen",
              "are bad at math", "only care about money"],
    "black folks": ["are criminals", "are lazy", "are violent", "are poor"],
    "jewish folks": ["control the banks", "are greedy", "only care about money"],
    "muslims": ["are terrorists", "are violent", "hate the west"],
    "gay men": ["are weak", "are not real men", "are promiscuous"],
    "immigrants": ["steal jobs", "are criminals", "do not belong here", "are lazy"],
    "asian folks": ["are bad drivers", "all look the same", "eat weird food"],
    "disabled people": ["are a burden", "are useless", "are stupid"],
    "trans people": ["are mentally ill", "are not real women"],
    "poor folks": ["are lazy", "are stupid", "deserve it"],
}

MENTION = {
    "women": ["women", "girls", "females", "my wife"],
    "black folks": ["black people", "blacks", "these thugs"],
    "jewish folks": ["jews", "the jewish bankers"],
    "muslims": ["muslims", "these muslims", "islam"],
    "gay men": ["gay guys", "gays", "the gays"],
    "immigrants": ["immigrants", "illegals", "these foreigners"],
    "asian folks": ["asians", "chinese people"],
    "disabled people": ["retards", "cripples", "disabled folks"],
    "trans people": ["trans people", "trannies"],
    "poor folks": ["poor people", "welfare queens"],
}

OPENERS = ["", "lol", "honestly", "why do", "i swear", "rt", "ngl", "so", "of course"]
CLOSERS = ["", "lol", "smh", "!", "...", "#truth", "just saying", "every time", "wtf"]
HOSTILE = ["are the worst", "ruin everything", "should go back", "need to shut up",
           "are disgusting", "can not be trusted", "are a joke", "always whine"]
JOKE_TAIL = ["what do you call", "how many does it take", "knock knock",
             "what is the difference between"]
INSULTS = ["you are an idiot", "shut up you moron", "what a loser", "eat shit",
           "go die in a fire", "nobody asked you clown", "you stupid bitch"]
LEWD = ["she was thicc af", "send nudes", "that ass tho", "wanna hook up tonight",
        "i would smash", "dick pics all day", "she gives good head"]
BENIGN = ["just finished my coffee", "the game last night was great",
          "anyone watching the new season", "my cat knocked over the plant again",
          "traffic is terrible today", "happy birthday to my little brother",
          "cannot wait for the weekend", "this weather is so nice",
          "finally fixed my bike", "new phone who dis", "the pizza place closed",
          "studying for finals is killing me", "love this song",
          "best concert ever", "my code compiles on the first try"]

MAP_HEADER = "".join("# " + line + "\n" if line else "#\n" for line in [
    "Copyright 2026 The SBF Toolkit Authors.", "",
    "Licensed under the Apache License, Version 2.0 (the \"License\");",
    "you may not use this file except in compliance with the License.",
    "You may obtain a copy of the License at", "",
    "    http://www.apache.org/licenses/LICENSE-2.0", "",
    "Unless required by applicable law or agreed to in writing, software",
    "distributed under the License is distributed on an \"AS IS\" BASIS,",
    "WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.",
    "See the License for the specific language governing permissions and",
    "limitations under the License."]) + "\n"

SOURCES = ["r/darkjokes", "r/meanjokes", "r/offensivejokes", "r/askreddit", "t/davidson",
           "t/founta", "t/waseem", "stormfront", "gab"]


def phrase(rng, *parts):
    return " ".join(p for p in parts if p).strip()


def make_post(rng, kind):
    opener, closer = rng.choice(OPENERS), rng.choice(CLOSERS)
    if kind == "targeted":
        g = rng.choice(list(GROUPS))
        body = phrase(rng, rng.choice(MENTION[g]), rng.choice(HOSTILE + GROUPS[g]))
        if rng.random() < 0.3:
            body = phrase(rng, rng.choice(JOKE_TAIL), rng.choice(MENTION[g]), "?", rng.choice(GROUPS[g]))
        return phrase(rng, opener, body, closer), g
    if kind == "insult":
        return phrase(rng, opener, rng.choice(INSULTS), closer), None
    if kind == "lewd":
        return phrase(rng, opener, rng.choice(LEWD), closer), None
    return phrase(rng, opener, rng.choice(BENIGN), closer), None


def noisy(rng, truth, p_flip, scale):
    # truth in scale; with probability p_flip pick a different value.
    if rng.random() >= p_flip:
        return truth
    return rng.choice([s for s in scale if s != truth])


def annotate(rng, kind, group, worker):
    care = worker["care"]
    flip = 0.08 + 0.25 * (1 - care)
    off_truth = {"targeted": 1.0, "insult": 1.0, "lewd": 0.5, "benign": 0.0}[kind]
    off = noisy(rng, off_truth, flip, [1.0, 0.5, 0.0])
    intent_truth = {"targeted": 1.0, "insult": 1.0, "lewd": 0.33, "benign": 0.0}[kind]
    intent = noisy(rng, intent_truth, flip, [1.0, 0.66, 0.33, 0.0])
    lewd = noisy(rng, 1.0 if kind == "lewd" else 0.0, flip / 2, [1.0, 0.5, 0.0])
    row = {"offensiveYN": off, "intentYN": intent, "sexYN": lewd,
           "whoTarget": "", "speakerMinorityYN": "", "targets": []}
    if off == 0.0:
        return row
    targets_group = kind == "targeted" and rng.random() > flip
    if kind == "lewd" and rng.random() < 0.3:
        targets_group, group = True, "women"
    row["whoTarget"] = 1.0 if targets_group else 0.0
    if not targets_group:
        return row
    g = group if group and rng.random() > flip else rng.choice(list(GROUPS))
    picks = rng.sample(GROUPS[g], k=min(len(GROUPS[g]), rng.choice([1, 1, 2, 2, 3])))
    row["targets"].append((g, picks))
    if rng.random() < 0.1:
        g2 = rng.choice(list(GROUPS))
        if g2 != g:
            row["targets"].append((g2, [rng.choice(GROUPS[g2])]))
    row["speakerMinorityYN"] = 1.0 if rng.random() < 0.05 else 0.0
    return row


def fmt(x):
    return "" if x == "" else str(x)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default=os.path.join(os.path.dirname(__file__), "..", "data"))
    ap.add_argument("--posts", type=int, default=500)
    ap.add_argument("--seed", type=int, default=20260101)
    args = ap.parse_args()
    rng = random.Random(args.seed)
    os.makedirs(args.out, exist_ok=True)

    workers = [{"id": f"W{i:03d}", "care": rng.betavariate(5, 1.5)} for i in range(60)]
    kinds = ["targeted"] * 40 + ["insult"] * 10 + ["lewd"] * 8 + ["benign"] * 42

    header = ["HITId", "WorkerId", "post", "dataSource", "offensiveYN", "intentYN", "sexYN",
              "whoTarget", "targetMinority", "targetStereotype", "speakerMinorityYN"]
    posts = []
    with open(os.path.join(args.out, "sample.csv"), "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        for i in range(args.posts):
            kind = rng.choice(kinds)
            text, group = make_post(rng, kind)
            pid = f"S{i:05d}"
            source = rng.choice(SOURCES)
            posts.append({"post_id": pid, "text": text, "source": source})
            n = rng.choices([1, 2, 3], weights=[5, 10, 85])[0]
            for worker in rng.sample(workers, n):
                a = annotate(rng, kind, group, worker)
                base = [pid, worker["id"], text, source, fmt(a["offensiveYN"]), fmt(a["intentYN"]),
                        fmt(a["sexYN"]), fmt(a["whoTarget"])]
                tail = fmt(a["speakerMinorityYN"])
                if not a["targets"]:
                    w.writerow(base + ["", "", tail])
                    continue
                for g, statements in a["targets"]:
                    for s in statements:
                        w.writerow(base + [g, s, tail])

    with open(os.path.join(args.out, "release.map"), "w") as f:
        f.write(MAP_HEADER + "# column names of the released annotation files\n"
                "post_id=HITId\nworker_id=WorkerId\npost=post\nsource=dataSource\n"
                "offensive=offensiveYN\nintent=intentYN\nlewd=sexYN\ngroup=whoTarget\n"
                "target_group=targetMinority\ntarget_statement=targetStereotype\n"
                "ingroup=speakerMinorityYN\n")

    with open(os.path.join(args.out, "posts.jsonl"), "w") as f:
        for p in posts:
            f.write(json.dumps(p) + "\n")

    # Toy embeddings: words of the same group's statements sit near a shared
    # centre, so WMD is smaller within a group than across groups.
    erng = random.Random(args.seed + 1)
    dim = 8
    vectors = {}
    for g, statements in GROUPS.items():
        centre = [erng.gauss(0, 1) for _ in range(dim)]
        for s in statements + [g]:
            for word in s.split():
                if word not in vectors:
                    vectors[word] = [c + erng.gauss(0, 0.5) for c in centre]
    with open(os.path.join(args.out, "embeddings.txt"), "w") as f:
        for word in sorted(vectors):
            f.write(word + " " + " ".join(f"{x:.6f}" for x in vectors[word]) + "\n")


if __name__ == "__main__":
    main()
