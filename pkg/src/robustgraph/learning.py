"""Downstream consumers of a learned graph.

Spectral clustering on the affinity matrix, graph-regularized label
propagation for semisupervised classification, and the three clustering
quality metrics (best-permutation accuracy, normalized mutual information,
purity).
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist

from .errors import InvalidInputError
from .graph import laplacian
from .prox import solve_spd

KMEANS_MAX_SWEEPS = 300


@dataclass
class PartialLabels:
    """Labels known for a subset of samples.

    ``mask[i]`` says whether sample i is labeled; ``labels[i]`` is its class
    in [0, c) where the mask holds (and ignored elsewhere). At least one
    sample must be labeled.
    """

    mask: np.ndarray
    labels: np.ndarray
    c: int

    @classmethod
    def from_pairs(cls, n, indices, labels, c=None):
        indices = np.asarray(indices, dtype=np.int64)
        labels = np.asarray(labels, dtype=np.int64)
        if indices.ndim != 1 or indices.shape != labels.shape:
            raise InvalidInputError("indices and labels must be equal-length 1-D")
        if indices.size and (indices.min() < 0 or indices.max() >= n):
            raise InvalidInputError(f"label indices must lie in [0, {n})")
        if np.unique(indices).size != indices.size:
            raise InvalidInputError("duplicate sample index in partial labels")
        if c is None:
            c = int(labels.max()) + 1 if labels.size else 0
        mask = np.zeros(n, dtype=bool)
        full = np.zeros(n, dtype=np.int64)
        mask[indices] = True
        full[indices] = labels
        out = cls(mask=mask, labels=full, c=c)
        out.validate()
        return out

    def validate(self):
        if self.mask.shape != self.labels.shape:
            raise InvalidInputError("mask and labels must have the same length")
        if not self.mask.any():
            raise InvalidInputError("at least one sample must be labeled")
        if self.c < 1:
            raise InvalidInputError(f"class count must be at least 1, got {self.c}")
        known = self.labels[self.mask]
        if known.min() < 0 or known.max() >= self.c:
            raise InvalidInputError(f"labels must lie in [0, {self.c})")
        return self

    def indicator(self):
        """n x c one-hot matrix: row i is e_{labels[i]} when labeled, else 0."""
        y = np.zeros((self.mask.size, self.c))
        rows = np.flatnonzero(self.mask)
        y[rows, self.labels[rows]] = 1.0
        return y


def _kmeans_pp_init(points, c, rng):
    n = points.shape[0]
    centers = np.empty((c, points.shape[1]))
    centers[0] = points[rng.integers(n)]
    d2 = ((points - centers[0]) ** 2).sum(axis=1)
    for j in range(1, c):
        total = d2.sum()
        if total > 0.0:
            pick = rng.choice(n, p=d2 / total)
        else:
            pick = rng.integers(n)
        centers[j] = points[pick]
        d2 = np.minimum(d2, ((points - centers[j]) ** 2).sum(axis=1))
    return centers


def _lloyd(points, c, rng):
    n = points.shape[0]
    centers = _kmeans_pp_init(points, c, rng)
    prev = None
    labels = np.zeros(n, dtype=np.int64)
    for _ in range(KMEANS_MAX_SWEEPS):
        d2 = cdist(points, centers, "sqeuclidean")
        labels = np.argmin(d2, axis=1)
        empties = [j for j in range(c) if not (labels == j).any()]
        if empties:
            # re-seed empty clusters on the worst-assigned points
            gap = d2[np.arange(n), labels].copy()
            for j in empties:
                far = int(np.argmax(gap))
                labels[far] = j
                gap[far] = -1.0
        if prev is not None and np.array_equal(labels, prev):
            break
        prev = labels
        for j in range(c):
            centers[j] = points[labels == j].mean(axis=0)
    inertia = float(((points - centers[labels]) ** 2).sum())
    return labels, inertia


def kmeans(points, c, seed=0, restarts=20):
    """Best-of-restarts Lloyd iteration with k-means++ seeding.

    Each restart draws from its own generator stream derived from
    (seed, restart index), so results are reproducible and restarts could
    run concurrently. Returns the labels of the lowest within-cluster sum
    of squares found; ties keep the earliest restart.
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2 or points.size == 0:
        raise InvalidInputError("points must be a non-empty n x d array")
    n = points.shape[0]
    if not 1 <= c <= n:
        raise InvalidInputError(f"cluster count {c} out of range [1, {n}]")
    if seed < 0:
        raise InvalidInputError(f"seed must be nonnegative, got {seed}")
    best_labels, best_inertia = None, np.inf
    for r in range(restarts):
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(r,)))
        labels, inertia = _lloyd(points, c, rng)
        if inertia < best_inertia:
            best_labels, best_inertia = labels, inertia
    return best_labels


def spectral_cluster(s, c, seed=0):
    """Cluster the samples of an affinity graph into c groups.

    Embeds each sample into the c eigenvectors of smallest eigenvalue of the
    symmetrically normalized Laplacian, normalizes nonzero embedding rows to
    unit length, and runs :func:`kmeans` with the given seed. Eigenvector
    signs are fixed (largest-magnitude entry made positive) so the embedding
    is deterministic.
    """
    if c < 2:
        raise InvalidInputError(f"need at least 2 clusters, got {c}")
    n = s.n
    if c > n:
        raise InvalidInputError(f"cluster count {c} exceeds sample count {n}")
    dense = s.to_dense()
    w = 0.5 * (dense + dense.T)
    deg = w.sum(axis=1)
    inv_sqrt = np.where(deg > 0, 1.0 / np.sqrt(np.where(deg > 0, deg, 1.0)), 0.0)
    lsym = np.eye(n) - (inv_sqrt[:, None] * w) * inv_sqrt[None, :]
    lsym = 0.5 * (lsym + lsym.T)
    _, vecs = np.linalg.eigh(lsym)
    emb = vecs[:, :c].copy()
    for j in range(c):
        lead = int(np.argmax(np.abs(emb[:, j])))
        if emb[lead, j] < 0:
            emb[:, j] = -emb[:, j]
    norms = np.linalg.norm(emb, axis=1)
    nz = norms > 0
    emb[nz] /= norms[nz, None]
    return kmeans(emb, c, seed=seed)


def lgc_propagate(s, partial, lam):
    """Graph-regularized least-squares label propagation.

    Returns the n x c score matrix F = lam (L + lam I)^{-1} Y, the unique
    minimizer of Tr(F^T L F) + lam ||F - Y||_F^2 with Y the one-hot matrix
    of the known labels. Use :func:`hard_labels` for the argmax decision.
    """
    if not lam > 0:
        raise InvalidInputError(f"lambda must be positive, got {lam}")
    partial.validate()
    if partial.mask.size != s.n:
        raise InvalidInputError(
            f"labels cover {partial.mask.size} samples, graph has {s.n}"
        )
    lap = laplacian(s)
    a = lap.matrix + lam * np.eye(s.n)
    y = partial.indicator()
    # solve_spd is a right-solve; transpose twice since a is symmetric
    return lam * solve_spd(a, y.T).T


def hard_labels(f):
    """Row argmax of a score matrix; ties break to the lowest class index."""
    f = np.asarray(f, dtype=np.float64)
    if f.ndim != 2 or f.size == 0:
        raise InvalidInputError("scores must be a non-empty n x c array")
    if not np.isfinite(f).all():
        raise InvalidInputError("scores must be finite")
    return np.argmax(f, axis=1)


def _as_label_pair(a, b):
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    if a.ndim != 1 or b.ndim != 1 or a.shape != b.shape:
        raise InvalidInputError(
            f"label vectors must be 1-D of equal length, got {a.shape} and {b.shape}"
        )
    if a.size == 0:
        raise InvalidInputError("label vectors must be non-empty")
    if a.min() < 0 or b.min() < 0:
        raise InvalidInputError("labels must be nonnegative integers")
    return a, b


def _contingency(a, b):
    size = int(max(a.max(), b.max())) + 1
    table = np.zeros((size, size), dtype=np.int64)
    np.add.at(table, (a, b), 1)
    return table


def accuracy(pred, truth):
    """Best-permutation agreement between two labelings, in [0, 1].

    Builds the padded square contingency table over the union of observed
    label values and solves the maximum-weight assignment (Kuhn-Munkres),
    so the score is invariant to relabeling of either side.
    """
    pred, truth = _as_label_pair(pred, truth)
    table = _contingency(pred, truth)
    rows, cols = linear_sum_assignment(table, maximize=True)
    return float(table[rows, cols].sum()) / pred.size


def nmi(a, b):
    """Mutual information normalized by the larger of the two entropies.

    Natural logs internally (the ratio is base-invariant). When both
    partitions are a single cluster the 0/0 case is defined as 1.
    """
    a, b = _as_label_pair(a, b)
    joint = _contingency(a, b) / a.size
    pa = joint.sum(axis=1)
    pb = joint.sum(axis=0)
    nz = joint > 0
    outer = np.outer(pa, pb)
    mi = float(np.sum(joint[nz] * np.log(joint[nz] / outer[nz])))
    ent_a = float(-np.sum(pa[pa > 0] * np.log(pa[pa > 0])))
    ent_b = float(-np.sum(pb[pb > 0] * np.log(pb[pb > 0])))
    denom = max(ent_a, ent_b)
    if denom == 0.0:
        return 1.0
    return min(max(mi / denom, 0.0), 1.0)


def purity(pred, truth):
    """Fraction of samples belonging to their cluster's majority class."""
    pred, truth = _as_label_pair(pred, truth)
    table = _contingency(pred, truth)
    return float(table.max(axis=1).sum()) / pred.size
