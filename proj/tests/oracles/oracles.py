#!/usr/bin/env python3
"""Independent reference computations for the values frozen into the C++ tests.

Run without arguments to print the values as JSON. With --check FILE the
freshly computed values are compared against FILE and the exit status reports
any drift.
"""

import argparse
import itertools
import json
import math
import sys
from pathlib import Path

import numpy as np
from sklearn.metrics import adjusted_rand_score

ROOT = Path(__file__).resolve().parents[2]
FIXTURES = ROOT / "fixtures"


# ---------------------------------------------------------------- metrics

def brute_force_ap(recs, relevant, k):
    # Enumerate prefixes explicitly rather than using a running counter.
    total = 0.0
    for cut in range(1, k + 1):
        prefix = recs[:cut]
        if prefix[-1] in relevant:
            total += sum(1 for x in prefix if x in relevant) / cut
    return total / min(len(relevant), k)


def brute_force_ar(recs, relevant, k):
    total = 0.0
    for cut in range(1, k + 1):
        prefix = recs[:cut]
        if prefix[-1] in relevant:
            total += sum(1 for x in prefix if x in relevant) / len(relevant)
    return total / len(relevant)


def metric_values():
    recs, rel = ["A", "B", "C"], {"A", "C"}
    hits = sum(1 for x in recs if x in rel)
    a = np.array([1, 1, 1, 1, 0, 0], float)
    b = np.array([0, 0, 1, 1, 1, 1], float)
    pers = 1.0 - a @ b / (np.linalg.norm(a) * np.linalg.norm(b))
    f1 = np.array([1, 1, 0], float)
    f2 = np.array([0, 1, 1], float)
    div = 1.0 - f1 @ f2 / (np.linalg.norm(f1) * np.linalg.norm(f2))
    return {
        "worked_map": brute_force_ap(recs, rel, 3),
        "worked_mar": brute_force_ar(recs, rel, 3),
        "worked_precision": hits / 3,
        "worked_recall": hits / len(rel),
        "coverage_single_item": 1 / 29,
        "personalization_overlap2": float(pers),
        "diversity_shared_feature": float(div),
        "novelty_u4_count1": -math.log2(1 / 4),
        "novelty_u8_count1": -math.log2(1 / 8),
    }


# ---------------------------------------------------------------- popularity

def damped(ratings, k, gm):
    return (sum(ratings) + k * gm) / (len(ratings) + k)


POP_TOY = {1: [5, 5, 4], 2: [2], 3: [], 4: [4, 3], 5: [5, 1, 4, 4]}


def popularity_values():
    means = {i: damped(r, 2, 3) for i, r in POP_TOY.items()}
    # Hybrid displacement toy: content ranks item 1 first, but item 1 has a
    # single bad rating and the filter at t=3.2 with k=1 removes it.
    content = {1: 1.0, 2: 0.8, 3: 0.6, 4: 0.4}
    ratings = {1: [1.0], 2: [5.0], 3: [4.0, 5.0], 4: [5.0]}
    gm = sum(sum(r) for r in ratings.values()) / sum(len(r) for r in ratings.values())
    hyb_means = {i: damped(r, 1, gm) for i, r in ratings.items()}
    survivors = [i for i in sorted(content, key=lambda i: (-content[i], i)) if hyb_means[i] >= 3.2]
    return {
        "damped_single_5": damped([5], 5, 3),
        "toy_damped": {str(i): m for i, m in means.items()},
        "toy_pass_t32": sorted(i for i, m in means.items() if m >= 3.2),
        "hybrid_toy_global_mean": gm,
        "hybrid_toy_means": {str(i): m for i, m in hyb_means.items()},
        "hybrid_toy_order": survivors,
    }


# ---------------------------------------------------------------- demographic

ORD_LEVELS = [5, 4, 3, 4]
SAMPLE_USERS = {
    0: ([4, 2, 1, 2], ["Female", "blue collar", "North Europe", "2Adlt"]),
    1: ([5, 4, 2, 3], ["Male", "white collar", "North Europe", "GrpFriends"]),
    2: ([3, 3, 2, 2], ["Female", "blue collar", "North Europe", "2Adlt+Child"]),
    3: ([4, 4, 2, 2], ["Female", "white collar", "North Europe", "2Adlt+Child"]),
    4: ([3, 3, 2, 3], ["Female", "white collar", "South Europe", "2Adlt"]),
}


def mixed(u, v, alpha=0.5, beta=0.5):
    (ou, nu), (ov, nv) = u, v
    man = np.mean([abs(a - b) / (lv - 1) for a, b, lv in zip(ou, ov, ORD_LEVELS)])
    su = {f"{i}={x}" for i, x in enumerate(nu)}
    sv = {f"{i}={x}" for i, x in enumerate(nv)}
    jac = 1 - len(su & sv) / len(su | sv)
    return alpha * man + beta * jac


def knee(costs):
    ks = np.arange(1, len(costs) + 1, dtype=float)
    c = np.array(costs, float)
    x = (ks - ks[0]) / (ks[-1] - ks[0])
    y = (c - c.min()) / (c.max() - c.min())
    # Distance of each point to the chord from the first to the last point.
    dx, dy = x[-1] - x[0], y[-1] - y[0]
    d = np.abs(dx * (y - y[0]) - dy * (x - x[0])) / math.hypot(dx, dy)
    return int(ks[int(np.argmax(d))])


def demographic_values():
    # Target user 0; neighbours 1..3 with opinions (signals) on item 7.
    target = SAMPLE_USERS[0]
    signals = {1: 1.0, 2: -1.0, 3: 0.5}
    eps = 1e-6
    num = den = 0.0
    for uid, s in signals.items():
        w = 1.0 / (mixed(target, SAMPLE_USERS[uid]) + eps)
        num += w * s
        den += w
    return {
        "sample_d01": mixed(SAMPLE_USERS[0], SAMPLE_USERS[1]),
        "sample_distances_from_0": {str(u): mixed(target, SAMPLE_USERS[u]) for u in (1, 2, 3, 4)},
        "knee_100_30_28_27": knee([100, 30, 28, 27]),
        "knn_three_neighbors": num / den,
        "ari_reference": adjusted_rand_score([0, 0, 0, 1, 1, 1, 2, 2, 2, 2], [0, 0, 1, 1, 1, 1, 2, 2, 2, 0]),
    }


# ---------------------------------------------------------------- ffm

def ffm_values():
    w0, w = 0.1, (0.2, 0.3)
    v1_f1, v2_f0 = np.array([0.1, 0.2]), np.array([0.3, 0.4])
    inter = float(v1_f1 @ v2_f0)
    y = w0 + sum(w) + inter
    # Linear-model floor on XOR: every pattern is balanced under any linear
    # score over one-hot fields, so the best constant is 0.5.
    return {"hand_interaction": inter, "hand_yhat": y, "hand_prob": 1 / (1 + math.exp(-y)),
            "xor_linear_floor": math.log(2)}


# ---------------------------------------------------------------- context

def haversine(a, b, r=6371.0):
    la1, lo1, la2, lo2 = map(math.radians, (*a, *b))
    h = math.sin((la2 - la1) / 2) ** 2 + math.cos(la1) * math.cos(la2) * math.sin((lo2 - lo1) / 2) ** 2
    return 2 * r * math.asin(math.sqrt(h))


def context_values():
    day = 86400.0
    # 3-item toy: item 1 Beach (rainy 0.2), item 2 Museums consumed 90 days
    # ago (tau 180 d), item 3 Golf consumed 15 days ago (tau 30 d, rainy 0.2).
    scores = {1: 0.9, 2: 0.8, 3: 0.7}
    factors = {
        1: 0.2,
        2: 1 - math.exp(-90 * day / (180 * day)),
        3: 0.2 * (1 - math.exp(-15 * day / (30 * day))),
    }
    adjusted = {i: scores[i] * factors[i] for i in scores}
    order = sorted(adjusted, key=lambda i: (-adjusted[i], i))
    return {
        "willingness_at_tau": 1 - math.exp(-1),
        "lisbon_porto_km": haversine((38.7223, -9.1393), (41.1579, -8.6291)),
        "toy_adjusted": {str(i): v for i, v in adjusted.items()},
        "toy_order": order,
    }


# ---------------------------------------------------------------- orchestrator

def minmax(d):
    lo, hi = min(d.values()), max(d.values())
    return {k: (v - lo) / (hi - lo) for k, v in d.items()}


def orchestrator_values():
    hybrid = {1: 0.9, 2: 0.5, 3: 0.1, 4: 0.3}
    demog = {1: 0.2, 2: 1.0, 3: 0.6, 4: 0.0}
    nh, nd = minmax(hybrid), minmax(demog)
    fused = {i: 0.5 * nh[i] + 0.5 * nd[i] for i in hybrid}
    order = sorted(fused, key=lambda i: (-fused[i], i))
    entry, cap = np.array([0.35, 0.35, 0.30]), np.array([0.25, 0.25, 0.50])
    return {"toy_fused": {str(i): v for i, v in fused.items()}, "toy_order": order,
            "midpoint_weights": list((entry + cap) / 2)}


# ---------------------------------------------------------------- ontology / content

def load_fixture():
    hl, edges, items = [], [], []
    for line in (FIXTURES / "ontology.txt").read_text().splitlines():
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if parts[0] == "C":
            if parts[1] == "ROOT":
                hl.append(parts[2])
            else:
                edges.append((parts[1], parts[2]))
        elif parts[0] == "I":
            items.append(json.loads(parts[1]))
    return sorted(hl), edges, items


def content_values():
    hl, edges, items = load_fixture()
    ll = sorted({c for _, c in edges})
    H = np.zeros((len(hl), len(ll)))
    for p, c in edges:
        H[hl.index(p), ll.index(c)] = 1
    L = np.zeros((len(ll), len(items)))
    for j, it in enumerate(items):
        for c in it["categories"]:
            L[ll.index(c), j] = 1
    sel = np.array([1.0 if h in ("Leisure", "Routes", "Sports") else 0.0 for h in hl])
    p_ll = sel @ H
    p_ll = p_ll / p_ll.max()
    per_item = (p_ll @ L) / L.sum(axis=0)
    p_item = per_item / per_item.max()
    leisure = np.array([1.0 if h == "Leisure" else 0.0 for h in hl]) @ H
    leisure_item = (leisure / leisure.max()) @ L / L.sum(axis=0)
    top = sorted(range(len(items)), key=lambda j: (-leisure_item[j], items[j]["id"]))[:5]
    return {
        "user4_item_scores": [float(x) for x in p_item],
        "leisure_only_top5": sorted(items[j]["id"] for j in top),
    }


def load_vectors():
    lines = (FIXTURES / "vectors_toy.txt").read_text().splitlines()
    table = {}
    for line in lines[1:]:
        parts = line.split()
        table[parts[0]] = np.array([float(x) for x in parts[1:]])
    stop = {w.strip() for w in (FIXTURES / "stopwords.txt").read_text().split("\n")
            if w.strip() and not w.startswith("#")}
    return table, stop


def embed(text, table, stop):
    import re
    toks = [t for t in re.findall(r"[a-z0-9]+", text.lower()) if t not in stop]
    vecs = [table[t] for t in toks if t in table]
    return np.mean(vecs, axis=0) if vecs else None


def cos(a, b):
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    return 0.0 if na == 0 or nb == 0 else float(a @ b / (na * nb))


def binning_values():
    table, stop = load_vectors()
    _, edges, _ = load_fixture()
    ll = sorted({c for _, c in edges})
    item = embed("Golf lessons", table, stop)
    scores = {c: cos(item, embed(c, table, stop)) for c in ll if embed(c, table, stop) is not None}
    linked = sorted(c for c, s in scores.items() if s >= 0.55)
    # Three-class toy table used by the unit test (2-d vectors).
    toy = {"golf": np.array([1.0, 0.0]), "beach": np.array([0.0, 1.0]), "museum": np.array([-1.0, 0.2]),
           "club": np.array([0.8, 0.3]), "sand": np.array([0.2, 0.9])}
    item_vec = np.mean([toy["club"], toy["sand"], toy["golf"]], axis=0)
    toy_scores = {c: cos(item_vec, toy[c]) for c in ("golf", "beach", "museum")}
    return {
        "golf_lessons_scores": scores,
        "golf_lessons_links": linked,
        "toy3_scores": toy_scores,
        "toy3_linked_055": sorted(c for c, s in toy_scores.items() if s >= 0.55),
    }


def softmax(u):
    e = [math.exp(x) for x in u]
    return [x / sum(e) for x in e]


def synthetic_values():
    n, p = 100 * 29, 0.02
    mu, sd = n * p, math.sqrt(n * p * (1 - p))
    # Coefficients: age=18-30 -> (c0 1.0, c1 0.5); gender=Female -> (c0 0.3,
    # c2 -0.4); group_comp=Group of Friends -> (c3 2.0); every other level 0.
    # User A is 18-30, female, group of friends; user B hits only zero rows.
    ua = [1.3, 0.5, -0.4, 2.0, 0, 0, 0, 0, 0, 0]
    return {"binomial_mean": mu, "binomial_lo": mu - 3 * sd, "binomial_hi": mu + 3 * sd,
            "softmax_user_a": softmax(ua), "softmax_user_b": softmax([0.0] * 10)}


def compute():
    return {
        "metrics": metric_values(),
        "popularity": popularity_values(),
        "demographic": demographic_values(),
        "ffm": ffm_values(),
        "context": context_values(),
        "orchestrator": orchestrator_values(),
        "content": content_values(),
        "binning": binning_values(),
        "synthetic": synthetic_values(),
    }


def close(a, b):
    if isinstance(a, dict):
        return isinstance(b, dict) and a.keys() == b.keys() and all(close(a[k], b[k]) for k in a)
    if isinstance(a, list):
        return isinstance(b, list) and len(a) == len(b) and all(close(x, y) for x, y in zip(a, b))
    if isinstance(a, float) or isinstance(b, float):
        return math.isclose(float(a), float(b), rel_tol=1e-12, abs_tol=1e-12)
    return a == b


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--check", type=Path)
    args = ap.parse_args()
    values = json.loads(json.dumps(compute()))
    if args.check is None:
        print(json.dumps(values, indent=2, sort_keys=True))
        return 0
    frozen = json.loads(args.check.read_text())
    bad = [k for k in values if not close(values[k], frozen.get(k))]
    for k in bad:
        print(f"drift in {k}", file=sys.stderr)
    print("oracle values match" if not bad else "oracle values drifted")
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
