"""Brute-force reference computations, independent of the DP code paths."""

import itertools
import math


def naive_score(model, feats, y):
    """Explicit double loop over positions and active features."""
    total = 0.0
    for t, keys in enumerate(feats):
        for key in keys:
            j = model.feature_dict.get(key)
            if j is not None:
                total += float(model.emission[j, y[t]])
        if t:
            total += float(model.transition[y[t - 1], y[t]])
    return total


def all_sequences(n, k):
    return itertools.product(range(k), repeat=n)


def enumerate_scores(model, feats):
    return {y: naive_score(model, feats, y) for y in all_sequences(len(feats), model.n_tags)}


def log_sum_exp(values):
    m = max(values)
    return m + math.log(sum(math.exp(v - m) for v in values))


def brute_log_partition(model, feats):
    return log_sum_exp(list(enumerate_scores(model, feats).values()))


def brute_marginals(model, feats):
    n, k = len(feats), model.n_tags
    scores = enumerate_scores(model, feats)
    log_z = log_sum_exp(list(scores.values()))
    node = [[0.0] * k for _ in range(n)]
    edge = [[[0.0] * k for _ in range(k)] for _ in range(n - 1)]
    for y, s in scores.items():
        p = math.exp(s - log_z)
        for t in range(n):
            node[t][y[t]] += p
        for t in range(n - 1):
            edge[t][y[t]][y[t + 1]] += p
    return node, edge


def brute_viterbi(model, feats):
    """Best score and the optimal path chosen by reverse-lexicographic order.

    Backpointer tie-breaking on the lowest tag index picks, among optimal
    paths, the one whose reversed tag tuple is smallest.
    """
    scores = enumerate_scores(model, feats)
    best = max(scores.values())
    winners = [y for y, s in scores.items() if s == best]
    return best, min(winners, key=lambda y: tuple(reversed(y)))


def brute_nll(model, batch, l2=0.0):
    """Sum of -log p(gold) by enumeration, plus l2/2 |w|^2."""
    total = 0.0
    for feats, gold in batch:
        y = tuple(model.tag_index[t] for t in gold)
        total += brute_log_partition(model, feats) - naive_score(model, feats, y)
    if l2:
        total += 0.5 * l2 * float((model.emission ** 2).sum() + (model.transition ** 2).sum())
    return total


def finite_difference_gradient(model, batch, l2=0.0, h=1e-5):
    theta = model.get_weights()
    grad = []
    probe = model.copy()
    for i in range(len(theta)):
        up, down = theta.copy(), theta.copy()
        up[i] += h
        down[i] -= h
        probe.set_weights(up)
        f_up = brute_nll(probe, batch, l2)
        probe.set_weights(down)
        f_down = brute_nll(probe, batch, l2)
        grad.append((f_up - f_down) / (2 * h))
    return grad
