"""Writes judge fixtures whose per-metric score histograms are fixed.

Model A and model B each get 100 single-score records. Record i takes the
i-th value of each metric's histogram expanded in score order, so the
histograms (and hence the averages) are exactly the ones listed below.
"""
import json
import sys

HISTOGRAMS = {
    "A": {"correctness": [34, 19, 20, 13, 14], "helpfulness": [2, 38, 36, 17, 7],
          "informativeness": [3, 44, 44, 8, 1]},
    "B": {"correctness": [10, 4, 4, 7, 75], "helpfulness": [3, 9, 6, 27, 55],
          "informativeness": [2, 8, 31, 38, 21]},
}


def expand(hist):
    return [s + 1 for s, n in enumerate(hist) for _ in range(n)]


def main(out):
    with open(f"{out}/judge_scores.jsonl", "w") as f:
        for model, metrics in HISTOGRAMS.items():
            columns = {m: expand(h) for m, h in metrics.items()}
            for i in range(100):
                rec = {"qid": f"J{i + 1:03d}", "kind": "single_score", "model": model,
                       "scores": {m: columns[m][i] for m in metrics}}
                f.write(json.dumps(rec) + "\n")
    # Rankings over three systems; ranks cycle so every model holds each rank.
    orders = [("A", "B", "C"), ("B", "A", "C"), ("B", "C", "A"), ("A", "C", "B"), ("B", "A", "C")]
    with open(f"{out}/judge_ranks.jsonl", "w") as f:
        for i in range(20):
            order = orders[i % len(orders)]
            f.write(json.dumps({"qid": f"R{i + 1:03d}", "kind": "pairwise_rank",
                                "ranks": {m: order.index(m) + 1 for m in "ABC"}}) + "\n")
    for model, metrics in HISTOGRAMS.items():
        for m, h in metrics.items():
            print(model, m, f"{sum((s + 1) * n for s, n in enumerate(h)) / sum(h):.2f}")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "tests/fixtures")
