import numpy as np
import pytest

from robustgraph import (
    AffinityGraph,
    DistanceProfile,
    InvalidInputError,
    average_gamma,
    build_graph,
    laplacian,
    pairwise_sq_dists,
    update_row,
)
from robustgraph.graph import DEGENERATE_GAP

from oracles import simplex_qp


def profile_from(f):
    f = np.asarray(f, dtype=np.float64)
    return DistanceProfile(
        index=0,
        neighbor_indices=np.arange(1, f.size + 1),
        sq_dists=f,
    )


def dense_row(entries, n):
    row = np.zeros(n)
    for j, w in entries:
        row[j] = w
    return row


class TestPairwiseSqDists:
    def test_two_samples_hand_value(self):
        profiles = pairwise_sq_dists(np.array([[0.0, 3.0]]))
        assert profiles[0].sq_dists[0] == 9.0
        assert profiles[1].sq_dists[0] == 9.0

    def test_identical_columns_give_zero(self):
        z = np.ones((4, 3))
        for p in pairwise_sq_dists(z):
            assert np.array_equal(p.sq_dists, np.zeros(2))

    def test_symmetry(self):
        rng = np.random.default_rng(0)
        z = rng.standard_normal((5, 8))
        profiles = pairwise_sq_dists(z)
        full = np.zeros((8, 8))
        for p in profiles:
            full[p.index, p.neighbor_indices] = p.sq_dists
        assert np.array_equal(full, full.T)

    def test_single_sample_rejected(self):
        with pytest.raises(InvalidInputError):
            pairwise_sq_dists(np.ones((3, 1)))


class TestUpdateRow:
    def test_hand_fixture(self):
        entries, gamma = update_row(profile_from([0.0, 1.0, 2.0, 4.0]), k=2, beta=2.0)
        assert entries == [(1, 2.0 / 3.0), (2, 1.0 / 3.0)]
        assert gamma == pytest.approx(3.0 * 2.0 / 4.0, abs=1e-15)

    def test_single_neighbor_takes_full_weight(self):
        entries, _ = update_row(profile_from([0.0, 5.0, 7.0]), k=1, beta=1.0)
        assert entries == [(1, 1.0)]

    def test_row_sums_to_one(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            n = int(rng.integers(4, 20))
            f = rng.uniform(0.0, 10.0, size=n - 1)
            k = int(rng.integers(1, n - 1))
            entries, _ = update_row(profile_from(f), k=k, beta=1.0)
            assert sum(w for _, w in entries) == pytest.approx(1.0, abs=1e-9)

    def test_matches_simplex_qp_oracle(self):
        rng = np.random.default_rng(2)
        for _ in range(40):
            n = int(rng.integers(4, 20))
            f = rng.uniform(0.0, 10.0, size=n - 1)
            k = int(rng.integers(1, n - 1))
            beta = float(rng.uniform(0.1, 5.0))
            entries, gamma = update_row(profile_from(f), k=k, beta=beta)
            want = simplex_qp(f, beta, gamma)
            got = dense_row(entries, n)[1:]
            assert np.abs(got - want).max() < 1e-8

    def test_k_smallest_get_positive_nonincreasing_weight(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            n = int(rng.integers(5, 16))
            f = rng.uniform(0.0, 10.0, size=n - 1)
            k = int(rng.integers(1, n - 1))
            entries, _ = update_row(profile_from(f), k=k, beta=1.0)
            assert len(entries) == k
            chosen = {j for j, _ in entries}
            nearest = set(np.asarray(profile_from(f).neighbor_indices)[np.argsort(f)[:k]])
            assert chosen == nearest
            by_dist = sorted(entries, key=lambda jw: f[jw[0] - 1])
            weights = [w for _, w in by_dist]
            assert all(a >= b for a, b in zip(weights, weights[1:]))
            assert all(w > 0 for w in weights)

    def test_degenerate_distances_fall_back_to_uniform(self):
        entries, gamma = update_row(profile_from([2.0, 2.0, 2.0, 9.0]), k=2, beta=4.0)
        assert entries == [(1, 0.5), (2, 0.5)]
        assert gamma == pytest.approx(DEGENERATE_GAP, rel=1e-12)

    def test_k_out_of_range_rejected(self):
        with pytest.raises(InvalidInputError):
            update_row(profile_from([1.0, 2.0, 3.0]), k=3, beta=1.0)
        with pytest.raises(InvalidInputError):
            update_row(profile_from([1.0, 2.0, 3.0]), k=0, beta=1.0)

    def test_negative_beta_rejected(self):
        with pytest.raises(InvalidInputError):
            update_row(profile_from([1.0, 2.0, 3.0]), k=1, beta=-0.5)


class TestAverageGamma:
    def test_two_identical_rows_fixture(self):
        profiles = [
            DistanceProfile(index=i, neighbor_indices=np.arange(1, 5), sq_dists=np.array([0.0, 1.0, 2.0, 4.0]))
            for i in range(2)
        ]
        beta = 2.0
        assert average_gamma(profiles, k=2, beta=beta) == pytest.approx(3.0 * beta / 4.0, abs=1e-15)

    def test_equals_mean_of_row_gammas(self):
        rng = np.random.default_rng(4)
        profiles = [
            DistanceProfile(index=i, neighbor_indices=np.arange(1, 10), sq_dists=rng.uniform(0, 5, 9))
            for i in range(7)
        ]
        gammas = [update_row(p, k=3, beta=1.7)[1] for p in profiles]
        assert average_gamma(profiles, k=3, beta=1.7) == pytest.approx(np.mean(gammas), abs=1e-12)

    def test_single_row_reduces_to_its_gamma(self):
        p = profile_from([0.0, 2.0, 5.0])
        _, gamma = update_row(p, k=1, beta=3.0)
        assert average_gamma([p], k=1, beta=3.0) == gamma

    def test_all_equal_distances_hit_the_floor(self):
        p = profile_from([1.0, 1.0, 1.0, 1.0])
        assert average_gamma([p], k=2, beta=4.0) == pytest.approx(DEGENERATE_GAP, rel=1e-12)


class TestLaplacian:
    def test_hand_fixture(self):
        s = AffinityGraph(n=2, rows=[[(1, 1.0)], [(0, 1.0)]])
        lap = laplacian(s)
        assert np.array_equal(lap.matrix, [[1.0, -1.0], [-1.0, 1.0]])
        assert np.array_equal(lap.degrees, [1.0, 1.0])

    def test_learned_graph_properties(self):
        rng = np.random.default_rng(5)
        z = rng.standard_normal((4, 12))
        graph, _ = build_graph(pairwise_sq_dists(z), k=4, beta=1.0)
        graph.validate(k=4)
        lap = laplacian(graph)
        assert np.array_equal(lap.matrix, lap.matrix.T)
        assert np.abs(lap.matrix.sum(axis=1)).max() < 1e-9
        assert np.linalg.eigvalsh(lap.matrix).min() > -1e-8
        # row-stochastic rows force every degree above 1/2
        assert lap.degrees.min() > 0.5


class TestAffinityGraph:
    def test_validate_accepts_learned_graph(self):
        rng = np.random.default_rng(6)
        z = rng.standard_normal((3, 9))
        graph, _ = build_graph(pairwise_sq_dists(z), k=3, beta=0.5)
        assert graph.validate(k=3) is graph

    def test_validate_rejects_bad_rows(self):
        with pytest.raises(InvalidInputError, match="self-loop"):
            AffinityGraph(n=2, rows=[[(0, 1.0)], [(0, 1.0)]]).validate()
        with pytest.raises(InvalidInputError, match="sums"):
            AffinityGraph(n=2, rows=[[(1, 0.4)], [(0, 1.0)]]).validate()
        with pytest.raises(InvalidInputError, match="outside"):
            AffinityGraph(n=2, rows=[[(1, 1.5)], [(0, 1.0)]]).validate()

    def test_dense_round_trip(self):
        rng = np.random.default_rng(7)
        z = rng.standard_normal((3, 7))
        graph, _ = build_graph(pairwise_sq_dists(z), k=2, beta=1.0)
        again = AffinityGraph.from_dense(graph.to_dense())
        assert again.rows == graph.rows
