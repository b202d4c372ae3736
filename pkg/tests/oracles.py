"""Independent reference implementations used only by the tests.

Each helper gives a differently-derived answer for something the package
computes, so tests can check both routes agree. None of them import
package code.
"""

import itertools

import numpy as np


def project_simplex(v):
    """Euclidean projection onto the probability simplex (sort-based)."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    ks = np.arange(1, v.size + 1)
    rho = np.nonzero(u * ks > css - 1.0)[0][-1]
    theta = (css[rho] - 1.0) / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


def simplex_qp(f, beta, gamma):
    """Solve min ||s + (beta/(4 gamma)) f||^2 over the simplex."""
    return project_simplex(-(beta / (4.0 * gamma)) * np.asarray(f, dtype=np.float64))


def brute_force_accuracy(pred, truth):
    """Best-permutation agreement by enumerating every permutation."""
    pred = np.asarray(pred, dtype=np.int64)
    truth = np.asarray(truth, dtype=np.int64)
    size = int(max(pred.max(), truth.max())) + 1
    table = np.zeros((size, size), dtype=np.int64)
    np.add.at(table, (pred, truth), 1)
    best = max(
        sum(table[i, perm[i]] for i in range(size))
        for perm in itertools.permutations(range(size))
    )
    return best / pred.size


def minimal_rpca_admm(x, alpha, mu, tol, max_iters):
    """Plain low-rank + sparse ADMM with an auxiliary copy of the low-rank
    block; the reference for the solver's graph-free mode."""
    d = np.zeros_like(x)
    e = np.zeros_like(x)
    z = x.copy()
    y1 = np.zeros_like(x)
    y2 = np.zeros_like(x)
    converged = False
    iters = 0
    for iters in range(1, max_iters + 1):
        h = 0.5 * (x + z - e - (y1 + y2) / mu)
        u, s, vt = np.linalg.svd(h, full_matrices=False)
        d = (u * np.maximum(s - 1.0 / (2.0 * mu), 0.0)) @ vt
        g = x - d - y1 / mu
        e = np.sign(g) * np.maximum(np.abs(g) - alpha / mu, 0.0)
        z = d + y2 / mu
        y1 = y1 + mu * (d + e - x)
        y2 = y2 + mu * (d - z)
        if max(np.max(np.abs(d + e - x)), np.max(np.abs(d - z))) < tol:
            converged = True
            break
    return d, e, iters, converged


def connected_components(w):
    """Component labels of the support of an affinity matrix (BFS)."""
    n = w.shape[0]
    labels = -np.ones(n, dtype=np.int64)
    comp = 0
    for start in range(n):
        if labels[start] >= 0:
            continue
        labels[start] = comp
        stack = [start]
        while stack:
            i = stack.pop()
            for j in np.flatnonzero((w[i] > 0) | (w[:, i] > 0)):
                if labels[j] < 0:
                    labels[j] = comp
                    stack.append(j)
        comp += 1
    return labels
