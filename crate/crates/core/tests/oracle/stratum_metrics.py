"""Independent oracle for evaluation-report golden files.

Reads the per-pair cosines from a report JSON (``scores``), recomputes every
stratum's metrics with scikit-learn and exact rational Youden-J search, and
writes the golden JSON used by ``tests/golden_reports.rs``.

    python3 tests/oracle/stratum_metrics.py report.json tests/golden/out.json
"""

import json
import sys
from collections import defaultdict
from fractions import Fraction

from sklearn.metrics import average_precision_score, roc_auc_score


def youden_cutoff(scores, labels):
    distinct = sorted(set(scores))
    cands = [distinct[0] - 1.0]
    for a, b in zip(distinct, distinct[1:]):
        m = a + (b - a) / 2.0
        cands.append(b if m <= a else m)
    cands.append(distinct[-1] + 1.0)
    pos = sum(labels)
    neg = len(labels) - pos
    best = None
    for c in cands:
        tp = sum(1 for s, y in zip(scores, labels) if y and s >= c)
        fp = sum(1 for s, y in zip(scores, labels) if not y and s >= c)
        j = Fraction(tp, pos) - Fraction(fp, neg)
        if best is None or j > best[0]:
            best = (j, c)
    return best[1]


def metrics(scores, labels, cutoff):
    tp = sum(1 for s, y in zip(scores, labels) if y and s >= cutoff)
    fp = sum(1 for s, y in zip(scores, labels) if not y and s >= cutoff)
    fn = sum(1 for s, y in zip(scores, labels) if y and s < cutoff)
    tn = len(scores) - tp - fp - fn
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    two = 0 < sum(labels) < len(labels)
    return {
        "n": len(scores),
        "cutoff": cutoff,
        "accuracy": (tp + tn) / len(scores),
        "precision": precision,
        "recall": recall,
        "f1": f1,
        "roc_auc": roc_auc_score(labels, scores) if two else None,
        "pr_auc": average_precision_score(labels, scores) if sum(labels) else None,
    }


def main(src, dst):
    report = json.load(open(src, encoding="utf-8"))
    pairs = report["scores"]
    by_pairing = defaultdict(lambda: defaultdict(list))
    for p in pairs:
        by_pairing[p["pairing"]][p["domain"]].append(p)

    def cols(ps):
        return [p["similarity"] for p in ps], [1 if p["label"] == "SIMILAR" else 0 for p in ps]

    rows = []
    for pairing in sorted(by_pairing):
        domains = by_pairing[pairing]
        members = [p for d in domains.values() for p in d]
        s, y = cols(members)
        glob = youden_cutoff(s, y)
        for d in sorted(domains, key=lambda d: ["DL", "HLE", "PA", "SLEEP", "STRESS", "OTHER"].index(d)):
            ds, dy = cols(domains[d])
            cut = youden_cutoff(ds, dy) if 0 < sum(dy) < len(dy) else glob
            rows.append({"pairing": pairing, "domain": d, **metrics(ds, dy, max(-1.0, min(1.0, cut)))})
        rows.append({"pairing": pairing, "domain": "ALL", **metrics(s, y, max(-1.0, min(1.0, glob)))})
    if len(by_pairing) > 1:
        s, y = cols(pairs)
        rows.append({"pairing": "ALL", "domain": "ALL", **metrics(s, y, max(-1.0, min(1.0, youden_cutoff(s, y))))})

    out = {
        "provider_id": report["config"]["provider_id"],
        "scores": {p["pair_id"]: p["similarity"] for p in pairs},
        "rows": rows,
    }
    with open(dst, "w", encoding="utf-8") as f:
        json.dump(out, f, indent=2, sort_keys=True)
        f.write("\n")


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2])
