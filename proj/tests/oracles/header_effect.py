"""Independent check of the header-effect fixture: mean gold rank per text version.

Tokens are lowercase ASCII alphanumeric runs (the fixture is ASCII), score is
Jaccard over token sets, ties broken by ascending chunk id.
"""
import json
import re
import sys

LABELS = [("test_name", "Test Name"), ("region", "Region"), ("state", "State"), ("purpose", "Purpose")]


def render(chunk, version):
    if version == "ver0" or not chunk.get("header"):
        return chunk["body"]
    head = "".join(f"## {label}: {chunk['header'][key]}\n" for key, label in LABELS if key in chunk["header"])
    return head + "\n" + chunk["body"]


def tokens(text):
    return set(re.findall(r"[a-z0-9]+", text.lower()))


def jaccard(a, b):
    return len(a & b) / len(a | b)


def main(fixtures):
    corpus = [json.loads(l) for l in open(f"{fixtures}/corpus.jsonl") if l.strip()]
    qa = [json.loads(l) for l in open(f"{fixtures}/qa.jsonl") if l.strip()]
    for version in ("ver0", "ver1"):
        ranks = []
        for q in qa:
            qt = tokens(q["question"])
            scored = sorted(corpus, key=lambda c: (-jaccard(qt, tokens(render(c, version))), c["id"]))
            ids = [c["id"] for c in scored]
            ranks.append(min(ids.index(g) + 1 for g in q["gold_chunk_ids"]))
        print(version, ranks, sum(ranks) / len(ranks))


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "tests/fixtures")
