import itertools

import numpy as np
import pytest
from numpy.testing import assert_allclose

from gridtrace.graphs import laplacian
from gridtrace.linalg import matrix_rank
from gridtrace.spectral import (
    SpectralDecomposition,
    decompose,
    first_nonstrategic_cluster,
    is_strategic,
)
from helpers import (
    cycle_graph,
    five_vertex_graph,
    path_graph,
    random_connected_graph,
    six_vertex_graph,
)


def exhaustive_strategic(spec: SpectralDecomposition, observed, det_tol=1e-10) -> bool:
    """Independent oracle: search square submatrices for a nonzero determinant.

    A set is strategic iff for every eigenvalue group some m_k x m_k
    submatrix of the observed rows is nonsingular.
    """
    rows = [v - 1 for v in sorted(observed)]
    for k in range(spec.n_clusters):
        m = int(spec.multiplicities[k])
        block = spec.group(k)[rows, :]
        if len(rows) < m:
            return False
        found = False
        for combo in itertools.combinations(range(len(rows)), m):
            if abs(np.linalg.det(block[list(combo), :])) > det_tol:
                found = True
                break
        if not found:
            return False
    return True


class TestDecompose:
    def test_two_vertex_network(self):
        spec = decompose(np.array([[-1.0, 1.0], [1.0, -1.0]]))
        assert_allclose(spec.omegas, [0.0, np.sqrt(2.0)], atol=1e-12)
        assert list(spec.multiplicities) == [1, 1]
        s = 1.0 / np.sqrt(2.0)
        assert_allclose(spec.group(0)[:, 0], [s, s])
        assert_allclose(spec.group(1)[:, 0], [s, -s])

    def test_four_cycle_multiplicity(self):
        spec = decompose(laplacian(cycle_graph(4)))
        assert_allclose(spec.omegas**2, [0.0, 2.0, 4.0], atol=1e-12)
        assert list(spec.multiplicities) == [1, 2, 1]
        assert spec.max_multiplicity == 2

    def test_three_path_spectrum(self):
        spec = decompose(laplacian(path_graph(3)))
        assert_allclose(spec.omegas**2, [0.0, 1.0, 3.0], atol=1e-12)

    def test_six_vertex_graph_has_double_eigenvalue(self):
        spec = decompose(laplacian(six_vertex_graph()))
        assert list(spec.multiplicities) == [1, 1, 2, 1, 1]
        assert_allclose(spec.omegas[2] ** 2, 3.0, atol=1e-10)

    def test_five_vertex_graph_simple_spectrum(self):
        spec = decompose(laplacian(five_vertex_graph()))
        assert list(spec.multiplicities) == [1] * 5
        assert_allclose(
            spec.omegas**2,
            [0.0, 3.0 - np.sqrt(2.0), 3.0, 3.0 + np.sqrt(2.0), 5.0],
            atol=1e-10,
        )

    def test_groups_orthonormal(self):
        spec = decompose(laplacian(six_vertex_graph()))
        v = spec.vectors
        assert_allclose(v.T @ v, np.eye(6), atol=1e-10)

    def test_zero_mode_is_constant_vector(self):
        spec = decompose(laplacian(five_vertex_graph()))
        assert_allclose(spec.group(0)[:, 0], np.full(5, 1.0 / np.sqrt(5.0)), atol=1e-12)

    def test_rejects_missing_zero_mode(self):
        with pytest.raises(ValueError, match="zero eigenvalue missing"):
            decompose(np.diag([-1.0, -2.0]))

    def test_rejects_disconnected(self):
        # block-diagonal Laplacian of two separate edges
        lap = np.zeros((4, 4))
        lap[:2, :2] = [[-1.0, 1.0], [1.0, -1.0]]
        lap[2:, 2:] = [[-1.0, 1.0], [1.0, -1.0]]
        with pytest.raises(ValueError, match="disconnected"):
            decompose(lap)

    def test_near_degenerate_warns(self):
        lap = np.diag([0.0, -1.0, -1.0 - 1e-7])
        # not a graph Laplacian, but symmetric with a tight pair
        with pytest.warns(UserWarning, match="nearly degenerate"):
            decompose(lap + 0.0)

    def test_reconstructs_laplacian(self):
        lap = laplacian(six_vertex_graph())
        spec = decompose(lap)
        lam = np.repeat(-(spec.omegas**2), spec.multiplicities)
        assert_allclose(spec.vectors @ np.diag(lam) @ spec.vectors.T, lap, atol=1e-9)


class TestStrategic:
    def test_four_cycle_single_observer_fails(self):
        spec = decompose(laplacian(cycle_graph(4)))
        assert not is_strategic(spec, [1])
        bad = first_nonstrategic_cluster(spec, [1])
        assert bad is not None and spec.multiplicities[bad[0]] == 2

    def test_four_cycle_adjacent_pair_succeeds(self):
        spec = decompose(laplacian(cycle_graph(4)))
        assert is_strategic(spec, [1, 2])

    def test_four_cycle_opposite_pair_fails(self):
        # vertices 1 and 3 both vanish on one eigenvector of the double mode
        spec = decompose(laplacian(cycle_graph(4)))
        assert not is_strategic(spec, [1, 3])

    def test_five_vertex_observers(self):
        spec = decompose(laplacian(five_vertex_graph()))
        assert is_strategic(spec, [1, 4, 5])
        assert is_strategic(spec, [1, 4])

    def test_full_set_always_strategic(self):
        for g in (five_vertex_graph(), six_vertex_graph(), cycle_graph(6)):
            spec = decompose(laplacian(g))
            assert is_strategic(spec, range(1, g.n + 1))

    def test_smaller_than_max_multiplicity_never_strategic(self):
        spec = decompose(laplacian(cycle_graph(4)))
        for v in range(1, 5):
            assert not is_strategic(spec, [v])

    def test_validates_observed(self):
        spec = decompose(laplacian(path_graph(3)))
        with pytest.raises(ValueError):
            is_strategic(spec, [])
        with pytest.raises(ValueError):
            is_strategic(spec, [0, 1])

    def test_superset_preserves_strategic(self):
        rng = np.random.default_rng(23)
        checked = 0
        while checked < 25:
            n = int(rng.integers(3, 9))
            g = random_connected_graph(rng, n)
            spec = decompose(laplacian(g))
            size = int(rng.integers(1, n + 1))
            obs = sorted(rng.choice(np.arange(1, n + 1), size=size, replace=False).tolist())
            if not is_strategic(spec, obs) or size == n:
                continue
            extra = [v for v in range(1, n + 1) if v not in obs]
            add = int(rng.choice(extra))
            assert is_strategic(spec, sorted(obs + [add]))
            checked += 1

    def test_matches_exhaustive_oracle(self):
        rng = np.random.default_rng(77)
        for _ in range(40):
            n = int(rng.integers(3, 8))
            g = random_connected_graph(rng, n)
            spec = decompose(laplacian(g))
            size = int(rng.integers(1, n + 1))
            obs = sorted(rng.choice(np.arange(1, n + 1), size=size, replace=False).tolist())
            assert is_strategic(spec, obs) == exhaustive_strategic(spec, obs)
