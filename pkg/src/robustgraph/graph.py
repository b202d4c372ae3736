"""Adaptive-neighbor affinity graphs.

Each affinity row is a probability distribution over the other samples,
supported on the k nearest neighbors, with closer samples receiving larger
weight. The weights have a closed form obtained by eliminating the KKT
multipliers of the per-row simplex-constrained quadratic program; the
per-row regularizer gamma_i is pinned to the largest value that keeps
exactly k active neighbors, and the scalar used for diagnostics is the
average of the per-row values.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .errors import InvalidInputError
from .prox import as_matrix

logger = logging.getLogger(__name__)

# Stand-in gap when the first k+1 distances of a row coincide: the closed
# form degenerates to uniform weights and gamma_i collapses to (beta/4)*this.
DEGENERATE_GAP = 1e-12

ROW_SUM_TOL = 1e-9


@dataclass
class DistanceProfile:
    """Squared Euclidean distances from sample ``index`` to all other samples.

    ``neighbor_indices`` keeps the original column indices (self excluded) so
    weights can be mapped back after sorting.
    """

    index: int
    neighbor_indices: np.ndarray
    sq_dists: np.ndarray


@dataclass
class GraphLaplacian:
    """Symmetrized Laplacian Deg - (S + S^T)/2 with its degree vector."""

    matrix: np.ndarray
    degrees: np.ndarray


@dataclass
class AffinityGraph:
    """Row-sparse affinity matrix; ``rows[i]`` lists (neighbor index, weight).

    A learned graph satisfies: zero diagonal, weights in [0, 1], at most k
    nonzeros per row, unit row sums. The constructor does not enforce this,
    so degenerate fixed graphs (e.g. an all-zero graph) stay representable;
    call :meth:`validate` to assert the learned-graph invariants.
    """

    n: int
    rows: list

    def to_dense(self):
        dense = np.zeros((self.n, self.n))
        for i, row in enumerate(self.rows):
            for j, w in row:
                dense[i, j] = w
        return dense

    @classmethod
    def from_dense(cls, a):
        a = as_matrix(a, "affinity matrix")
        if a.shape[0] != a.shape[1]:
            raise InvalidInputError(f"affinity matrix must be square, got {a.shape}")
        rows = [
            [(int(j), float(a[i, j])) for j in np.flatnonzero(a[i])]
            for i in range(a.shape[0])
        ]
        return cls(n=a.shape[0], rows=rows)

    @classmethod
    def empty(cls, n):
        return cls(n=n, rows=[[] for _ in range(n)])

    def validate(self, k=None, tol=ROW_SUM_TOL):
        """Assert the learned-graph invariants; returns self."""
        if self.n < 1 or len(self.rows) != self.n:
            raise InvalidInputError(
                f"graph has {len(self.rows)} rows for n={self.n}"
            )
        for i, row in enumerate(self.rows):
            if k is not None and len(row) > k:
                raise InvalidInputError(
                    f"row {i} has {len(row)} nonzeros, limit {k}"
                )
            seen = set()
            total = 0.0
            for j, w in row:
                if not 0 <= j < self.n:
                    raise InvalidInputError(f"row {i}: neighbor index {j} out of range")
                if j == i:
                    raise InvalidInputError(f"row {i} carries a self-loop")
                if j in seen:
                    raise InvalidInputError(f"row {i}: duplicate neighbor {j}")
                seen.add(j)
                if not np.isfinite(w) or w < 0.0 or w > 1.0:
                    raise InvalidInputError(f"row {i}: weight {w!r} outside [0, 1]")
                total += w
            if abs(total - 1.0) > tol:
                raise InvalidInputError(f"row {i} sums to {total!r}, expected 1")
        return self

    def frobenius_sq(self):
        return float(sum(w * w for row in self.rows for _, w in row))

    def nnz(self):
        return sum(len(row) for row in self.rows)


def pairwise_sq_dists(z):
    """Distance profiles between the columns of ``z`` (samples).

    Profile i holds ||z_i - z_j||^2 for every j != i, original indices
    retained. Needs at least two samples.
    """
    z = as_matrix(z, "sample matrix")
    n = z.shape[1]
    if n < 2:
        raise InvalidInputError("need at least two samples for pairwise distances")
    full = cdist(z.T, z.T, "sqeuclidean")
    idx = np.arange(n)
    profiles = []
    for i in range(n):
        keep = idx != i
        profiles.append(
            DistanceProfile(
                index=i,
                neighbor_indices=idx[keep].copy(),
                sq_dists=full[i, keep].copy(),
            )
        )
    return profiles


def update_row(profile, k, beta):
    """Closed-form affinity row over the k nearest neighbors of one sample.

    With the profile's distances f sorted ascending (stable, so ties break
    on the original index), neighbor j <= k gets weight

        (f_{k+1} - f_j) / (k f_{k+1} - sum_{r<=k} f_r)

    and everything farther gets zero; the denominator equals the sum of the
    numerators, so the row sums to one by construction. gamma_i is
    (beta/4) (k f_{k+1} - sum_{j<=k} f_j). When the first k+1 distances
    coincide the quotient degenerates; the row falls back to uniform 1/k
    weights and gamma_i to (beta/4) * DEGENERATE_GAP.

    Returns ``(entries, gamma_i)`` where entries is a list of
    (original index, weight) pairs sorted by index, zeros dropped.
    """
    f = np.asarray(profile.sq_dists, dtype=np.float64)
    m = f.size
    if not 1 <= k <= m - 1:
        raise InvalidInputError(
            f"neighbor count k={k} out of range [1, {m - 1}] for {m + 1} samples"
        )
    if beta < 0:
        raise InvalidInputError(f"beta must be nonnegative, got {beta}")
    order = np.argsort(f, kind="stable")
    f_sorted = f[order]
    gaps = np.maximum(f_sorted[k] - f_sorted[:k], 0.0)
    denom = float(gaps.sum())
    if denom <= 0.0:
        weights = np.full(k, 1.0 / k)
        gamma = beta / 4.0 * DEGENERATE_GAP
    else:
        weights = gaps / denom
        gamma = beta / 4.0 * denom
    entries = [
        (int(profile.neighbor_indices[order[j]]), float(weights[j]))
        for j in range(k)
        if weights[j] > 0.0
    ]
    entries.sort()
    return entries, gamma


def average_gamma(profiles, k, beta):
    """Mean of the per-row gamma_i values over all profiles.

    Serves as the effective regularizer weight for diagnostics; by
    construction it equals the average of what :func:`update_row` returns,
    degenerate-row floors included.
    """
    gammas = [update_row(p, k, beta)[1] for p in profiles]
    return float(np.mean(gammas))


def build_graph(profiles, k, beta):
    """Assemble a full affinity graph from per-row updates.

    Returns ``(graph, gamma)`` with gamma the average of the per-row values
    (identical to :func:`average_gamma` on the same profiles).
    """
    n = len(profiles)
    rows = [None] * n
    gammas = np.empty(n)
    for p in profiles:
        entries, gamma_i = update_row(p, k, beta)
        rows[p.index] = entries
        gammas[p.index] = gamma_i
    return AffinityGraph(n=n, rows=rows), float(np.mean(gammas))


def laplacian(s):
    """Graph Laplacian Deg - (S + S^T)/2 of an affinity graph.

    The result is symmetric, positive semidefinite, and annihilates the
    all-ones vector (up to roundoff).
    """
    dense = s.to_dense()
    w = 0.5 * (dense + dense.T)
    deg = w.sum(axis=1)
    lap = np.diag(deg) - w
    return GraphLaplacian(matrix=lap, degrees=deg)
