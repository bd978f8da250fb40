"""Slow, literal reference implementations used only as test oracles.

Written with plain Python lists and ``math`` so they share no code path with
the numpy implementations under test.
"""

import math


def dist(x, y):
    return math.sqrt(sum((a - b) ** 2 for a, b in zip(x, y))) / math.sqrt(len(x))


def parzen_scores(train_X, train_y, x, sigma):
    """Per-class Gaussian Parzen densities over raw training points."""
    d = len(x)
    out = []
    for c in (0, 1):
        pts = [p for p, lab in zip(train_X, train_y) if lab == c]
        total = 0.0
        for p in pts:
            total += math.exp(-dist(x, p) ** 2 / (2 * sigma * sigma))
        out.append(total / (len(pts) * (2 * math.pi) ** (d / 2) * sigma ** d))
    return out


def parzen_predict(train_X, train_y, x, sigma):
    s0, s1 = parzen_scores(train_X, train_y, x, sigma)
    return 1 if s1 > s0 else 0


def ecm_reference(rows, dthr, multiplier=2.0):
    """Literal list-based ECM; ``rows`` are (point, counts) pairs.

    Returns a list of [center, radius, counts] entries.
    """
    clusters = []
    for x, counts in rows:
        x = list(map(float, x))
        if not clusters:
            clusters.append([x, 0.0, list(counts)])
            continue
        ds = [dist(x, c[0]) for c in clusters]
        m = min(range(len(ds)), key=lambda i: (ds[i], i))
        if ds[m] <= clusters[m][1]:
            clusters[m][2] = [a + b for a, b in zip(clusters[m][2], counts)]
            continue
        s = [ds[i] + clusters[i][1] for i in range(len(ds))]
        a = min(range(len(s)), key=lambda i: (s[i], i))
        if s[a] > multiplier * dthr:
            clusters.append([x, 0.0, list(counts)])
            continue
        clusters[a][1] = s[a] / 2
        if ds[a] > 0:
            ratio = min(max(abs(ds[a] - clusters[a][1]) / ds[a], 0.0), 1.0)
            clusters[a][0] = [e + (xi - e) * ratio for e, xi in zip(clusters[a][0], x)]
        clusters[a][2] = [a_ + b for a_, b in zip(clusters[a][2], counts)]
    return clusters
