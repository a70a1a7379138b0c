"""Slow, loop-based reference implementations used only by the tests.

None of these share code with the package beyond reading model parameters.
"""

from __future__ import annotations

import itertools
import math


def phi_block(labels) -> float:
    s = len(labels)
    return 2.0 ** s if len(set(labels)) == 1 else 0.0


def hypergraph_signal(labels, s1, s2, phi=phi_block):
    """Flat signal in canonical order: arity blocks, then row-major tuples."""
    out = []
    n = len(labels)
    for s in range(s1, s2 + 1):
        for tup in itertools.product(range(n), repeat=s):
            out.append(phi(tuple(labels[v] for v in tup)))
    return out


def matrix_signal(kind, labels, k, table=None):
    n = len(labels)
    if kind == "community_indicator":
        return [1.0 if labels[j] == a + 1 else 0.0 for a in range(k) for j in range(n)]
    if kind == "vertex_indicator":
        return [1.0 if labels[i] == labels[j] else 0.0 for i in range(n) for j in range(n)]
    if kind == "label_difference":
        return [float(labels[i] - labels[j]) for i in range(n) for j in range(n)]
    if kind == "table":
        return [float(table[i][labels[j] - 1]) for i in range(len(table)) for j in range(n)]
    raise ValueError(kind)


def weighted_sq_dist(a, b, sigma):
    return sum((u - v) ** 2 / s ** 2 for u, v, s in zip(a, b, sigma))


def all_assignments(n, k):
    for labels in itertools.product(range(1, k + 1), repeat=n):
        yield labels


def sizes_of(labels, k):
    return tuple(sum(1 for v in labels if v == a) for a in range(1, k + 1))


def equivalent(x, z, k, signal):
    """Brute force over all k! relabellings."""
    for perm in itertools.permutations(range(1, k + 1)):
        if all(perm[b - 1] == a for a, b in zip(x, z)):
            return signal(x) == signal(z)
    return False


def delta_terms(k, sizes, s_range, phi=phi_block, sigma_bar=lambda t: 1.0):
    """Term-by-term minimum over ordered pairs of the single-move constant."""
    best = math.inf
    for i in range(1, k + 1):
        for j in range(1, k + 1):
            if i == j:
                continue
            total = 0.0
            for s in s_range:
                for g in range(s):
                    for b in itertools.product(range(1, k + 1), repeat=s - 1):
                        ti = b[:g] + (i,) + b[g:]
                        tj = b[:g] + (j,) + b[g:]
                        prod = 1
                        for lab in b:
                            prod *= sizes[lab - 1]
                        total += (phi(ti) - phi(tj)) ** 2 / sigma_bar(ti) ** 2 * prod
            best = min(best, total)
    return best


def t_n_formula(n, k, c, eps, s1, s2):
    return sum(2 ** (2 * s) * s * n ** s / ((c * k) ** (s - 1) * max(c * k, (k - 1) / eps))
               for s in range(s1, s2 + 1))
