"""Independent brute-force oracles used to cross-check the library.

Everything here is deliberately written as plain-Python loops over small
instances, sharing no code path with the package implementations.
"""

import math


def euclidean(a, b):
    return math.sqrt(sum((x - y) ** 2 for x, y in zip(a, b)))


def knn_edges(points, k):
    """Union-symmetrized kNN edge set; ties toward the lower index."""
    n = len(points)
    edges = set()
    for i in range(n):
        ranked = sorted((j for j in range(n) if j != i),
                        key=lambda j: (euclidean(points[i], points[j]), j))
        for j in ranked[:k]:
            edges.add((min(i, j), max(i, j)))
    return edges


def connected_components_bfs(vertices, edges):
    """List of components (each a sorted list) of the graph induced on vertices."""
    vertices = list(vertices)
    vset = set(vertices)
    adjacency = {v: set() for v in vertices}
    for a, b in edges:
        if a in vset and b in vset:
            adjacency[a].add(b)
            adjacency[b].add(a)
    seen = set()
    components = []
    for start in vertices:
        if start in seen:
            continue
        queue = [start]
        seen.add(start)
        comp = []
        while queue:
            v = queue.pop()
            comp.append(v)
            for w in adjacency[v]:
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
        components.append(sorted(comp))
    return components


def largest_component_per_class(points, labels, k):
    """Kept set: per class, the largest component (ties to lowest vertex)."""
    edges = knn_edges(points, k)
    kept = []
    for c in sorted(set(labels)):
        verts = [i for i, lab in enumerate(labels) if lab == c]
        comps = connected_components_bfs(verts, edges)
        best = max(comps, key=lambda comp: (len(comp), -min(comp)))
        kept.extend(best)
    return sorted(kept)


def zeta_filter(kept, points, labels, k, zeta):
    """Drop kept samples whose k-nearest neighborhood purity is below zeta."""
    survivors = []
    for i in kept:
        ranked = sorted((j for j in range(len(points)) if j != i),
                        key=lambda j: (euclidean(points[i], points[j]), j))
        neighbors = ranked[:k]
        purity = sum(1 for j in neighbors if labels[j] == labels[i]) / k
        if purity >= zeta:
            survivors.append(i)
    return survivors


def margin(logits, assigned):
    best_other = max(v for j, v in enumerate(logits) if j != assigned)
    return logits[assigned] - best_other


def class_thresholds(probs, labels, k):
    thresholds = []
    for j in range(k):
        values = [probs[i][j] for i in range(len(labels)) if labels[i] == j]
        thresholds.append(sum(values) / len(values))
    return thresholds


def confident_joint_counts(probs, labels, thresholds, k):
    counts = [[0] * k for _ in range(k)]
    for i, lab in enumerate(labels):
        confident = [j for j in range(k) if probs[i][j] >= thresholds[j]]
        if not confident:
            continue
        best = max(confident, key=lambda j: (probs[i][j], -j))
        counts[lab][best] += 1
    return counts


def calibrate(counts, labels, k):
    class_counts = [sum(1 for lab in labels if lab == c) for c in range(k)]
    scaled = [[0.0] * k for _ in range(k)]
    for i in range(k):
        row_sum = sum(counts[i])
        if row_sum > 0:
            for j in range(k):
                scaled[i][j] = counts[i][j] * class_counts[i] / row_sum
    total = sum(sum(row) for row in scaled)
    if total > 0:
        scaled = [[v / total for v in row] for row in scaled]
    return scaled


def prune_flags(probs, labels, calibrated, k):
    n = len(labels)
    flagged = set()
    for i in range(k):
        members = [m for m in range(n) if labels[m] == i]
        for j in range(k):
            if i == j:
                continue
            target = round(n * calibrated[i][j])
            if target == 0:
                continue
            target = min(target, len(members))
            ranked = sorted(members, key=lambda m: (-probs[m][j], m))
            flagged.update(ranked[:target])
    return sorted(flagged)


def detection_metrics(flagged, noisy):
    tp = sum(1 for f, t in zip(flagged, noisy) if f and t)
    fp = sum(1 for f, t in zip(flagged, noisy) if f and not t)
    fn = sum(1 for f, t in zip(flagged, noisy) if not f and t)
    n_noisy = tp + fn
    if tp + fp > 0:
        precision = tp / (tp + fp)
    else:
        precision = 1.0 if n_noisy == 0 else 0.0
    recall = 1.0 if n_noisy == 0 else tp / n_noisy
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    kept = sum(1 for f in flagged if not f)
    remaining = fn / kept if kept > 0 else 0.0
    return precision, recall, f1, remaining


def nearest_center_accuracy(features, labels, k):
    """Accuracy of classifying each sample by its nearest empirical class mean."""
    d = len(features[0])
    centers = []
    for c in range(k):
        members = [features[i] for i in range(len(labels)) if labels[i] == c]
        centers.append([sum(v[j] for v in members) / len(members) for j in range(d)])
    hits = 0
    for x, lab in zip(features, labels):
        pred = min(range(k), key=lambda c: euclidean(x, centers[c]))
        hits += pred == lab
    return hits / len(labels)
