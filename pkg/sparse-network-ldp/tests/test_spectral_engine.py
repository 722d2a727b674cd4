import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import PROPERTY_SETTINGS, dense_norm, directed_networks, random_network, undirected_networks
from exceptions import DomainError, NumericError, SizeError
from network_model import DirectedNetwork, UndirectedNetwork, dense_matrix
from random_generator import RngHandle
from spectral_engine import (
    directed_star, directed_star_norm, gram_matrix, jacobi_eigenvalues, rectangular_sandwich,
    spectral_norm, spectral_norm_dense, spectral_norm_power, spectral_radius_dense,
)


class TestDenseEngine:
    def test_single_entry(self):
        assert spectral_norm_dense(DirectedNetwork.from_entries(3, [(0, 1, -2.5)])).value == pytest.approx(2.5)

    def test_identity_pattern(self):
        net = DirectedNetwork.from_entries(2, [(0, 0, 1.0), (1, 1, 1.0)])
        assert spectral_norm_dense(net).value == pytest.approx(1.0)

    def test_empty_network(self):
        result = spectral_norm_dense(DirectedNetwork.empty(4))
        assert result.value == 0.0 and result.converged

    def test_cap_is_enforced(self):
        with pytest.raises(SizeError):
            spectral_norm_dense(DirectedNetwork.from_entries(10, [(0, 1, 1.0)]), cap=5)

    def test_gram_matrix_matches_numpy(self):
        net = random_network(40, 0.2, seed=4)
        matrix = dense_matrix(net)
        assert np.allclose(gram_matrix(net), matrix.T @ matrix, rtol=1e-12, atol=1e-12)

    def test_jacobi_reports_non_convergence(self):
        with pytest.raises(NumericError):
            jacobi_eigenvalues(np.array([[1.0, 2.0], [2.0, 1.0]]), max_sweeps=0)

    def test_jacobi_eigenvalues_of_odd_matrix(self):
        matrix = np.array([[2.0, 1.0, 0.0], [1.0, 2.0, 1.0], [0.0, 1.0, 2.0]])
        eigenvalues, _, _ = jacobi_eigenvalues(matrix)
        assert np.allclose(np.sort(eigenvalues), np.linalg.eigvalsh(matrix), atol=1e-10)

    @PROPERTY_SETTINGS
    @given(net=directed_networks(max_n=8, nonnegative=False))
    def test_matches_numpy_oracle(self, net):
        expected = dense_norm(net)
        assert spectral_norm_dense(net).value == pytest.approx(expected, rel=1e-9, abs=1e-12)

    @PROPERTY_SETTINGS
    @given(u=undirected_networks(max_n=9))
    def test_undirected_networks_use_the_symmetric_matrix(self, u):
        assert spectral_norm_dense(u).value == pytest.approx(dense_norm(u), rel=1e-9, abs=1e-12)


class TestPowerEngine:
    def test_empty_network(self):
        assert spectral_norm_power(DirectedNetwork.empty(5)).value == 0.0

    def test_weighted_star(self):
        result = spectral_norm_power(directed_star([3.0, 4.0], [5.0]))
        assert result.converged
        assert result.value == pytest.approx(5.0, rel=1e-8)

    def test_bad_tolerance_is_rejected(self):
        with pytest.raises(DomainError):
            spectral_norm_power(DirectedNetwork.empty(2), tol=0.0)

    def test_iteration_cap_flags_unconverged(self):
        net = random_network(60, 0.2, seed=5)
        result = spectral_norm_power(net, tol=1e-300, max_iter=3)
        assert not result.converged
        assert result.iterations == 3
        assert 0 < result.value <= dense_norm(net) * (1 + 1e-12)

    @pytest.mark.parametrize("seed", range(5))
    def test_agrees_with_dense_engine(self, seed):
        net = random_network(20, 0.3, seed=seed)
        dense = spectral_norm_dense(net).value
        power = spectral_norm_power(net, tol=1e-14, max_iter=100_000, rng=RngHandle(seed, 1)).value
        assert power == pytest.approx(dense, rel=1e-8)
        assert spectral_norm_power(net, rng=RngHandle(seed, 2)).value == pytest.approx(dense, rel=1e-8)

    @pytest.mark.slow
    def test_default_tolerance_agrees_with_dense_engine(self):
        for stream in range(200):
            n = 2 + (37 * stream) % 199
            net = random_network(n, min(1.0, 3.0 / n), seed=2025, stream=stream)
            dense = spectral_norm_dense(net).value
            result = spectral_norm_power(net, rng=RngHandle(2025, stream))
            assert result.converged, (stream, n)
            assert abs(result.value - dense) <= 1e-8 * max(dense, 1e-300), (stream, n, result.value, dense)

    def test_close_singular_values_do_not_stop_early(self):
        # Successive changes shrink by a factor of about 0.996 here.
        net = DirectedNetwork.from_entries(2, [(0, 0, 1.0), (1, 1, 0.999)])
        result = spectral_norm_power(net, rng=RngHandle(11))
        assert result.converged
        assert result.value == pytest.approx(1.0, rel=1e-9)

    @pytest.mark.slow
    @pytest.mark.parametrize("seed", range(3))
    def test_large_sparse_network_converges(self, seed):
        n = 100_000
        net = random_network(n, 2.0 / n, seed=seed)
        result = spectral_norm_power(net, tol=1e-8, max_iter=500, rng=RngHandle(seed, 1))
        assert result.converged and np.isfinite(result.value)
        assert result.value >= np.abs(net.weights).max() * (1 - 1e-6)

    def test_seeded_start_vector_is_reproducible(self):
        net = random_network(100, 0.05, seed=8)
        a = spectral_norm_power(net, rng=RngHandle(3))
        b = spectral_norm_power(net, rng=RngHandle(3))
        assert a == b


class TestDispatch:
    def test_unknown_engine(self):
        with pytest.raises(DomainError):
            spectral_norm(DirectedNetwork.empty(2), engine="lanczos")

    def test_auto_picks_dense_for_small_networks(self):
        assert spectral_norm(random_network(30, 0.1, seed=1)).engine == "dense"

    def test_auto_picks_power_for_large_networks(self):
        assert spectral_norm(random_network(1000, 0.002, seed=1)).engine == "power"

    def test_undirected_input(self):
        u = UndirectedNetwork.from_edges(2, [(0, 1, 2.0)])
        assert spectral_norm(u, engine="power").value == pytest.approx(2.0)


class TestDirectedStar:
    def test_single_edge(self):
        assert directed_star_norm([1.0], []) == 1.0

    def test_balanced_star(self):
        assert directed_star_norm([3.0, 4.0], [5.0]) == 5.0

    def test_builder_layout(self):
        star = directed_star([1.0, 2.0], [3.0])
        assert star.entries == [(0, 1, 1.0), (0, 2, 2.0), (3, 0, 3.0)]

    def test_formula_matches_oracle_on_random_stars(self):
        gen = np.random.default_rng(2024)
        for _ in range(500):
            a = gen.uniform(-3, 3, gen.integers(0, 51))
            b = gen.uniform(-3, 3, gen.integers(0, 51))
            a, b = a[a != 0], b[b != 0]
            if a.size + b.size == 0:
                continue
            star = directed_star(a, b)
            assert abs(directed_star_norm(a, b) - dense_norm(star)) <= 1e-12


class TestSpectralRadius:
    def test_nilpotent_entry(self):
        result = spectral_radius_dense(DirectedNetwork.from_entries(2, [(0, 1, 3.0)]))
        assert result.value == pytest.approx(0.0, abs=1e-12)
        assert result.approximate

    def test_two_cycle(self):
        result = spectral_radius_dense(DirectedNetwork.from_entries(2, [(0, 1, 1.0), (1, 0, 1.0)]))
        assert result.value == pytest.approx(1.0, rel=1e-6)

    def test_cap_is_enforced(self):
        with pytest.raises(SizeError):
            spectral_radius_dense(DirectedNetwork.empty(10), cap=5)

    def test_radius_never_exceeds_norm(self):
        net = random_network(40, 0.1, seed=6)
        result = spectral_radius_dense(net)
        assert result.approximate
        assert result.value <= dense_norm(net) * (1 + 1e-9)

    def test_diagonal_network(self):
        net = DirectedNetwork.from_entries(3, [(0, 0, 2.0), (1, 1, -5.0), (2, 2, 1.0)])
        result = spectral_radius_dense(net)
        assert result.value == pytest.approx(5.0, rel=1e-6)


class TestNormInvariances:
    @PROPERTY_SETTINGS
    @given(net=directed_networks(max_n=7, nonnegative=False), data=st.data())
    def test_sign_changes_of_rows_and_columns(self, net, data):
        row_signs = np.array(data.draw(st.lists(st.sampled_from([-1.0, 1.0]), min_size=net.n, max_size=net.n)))
        col_signs = np.array(data.draw(st.lists(st.sampled_from([-1.0, 1.0]), min_size=net.n, max_size=net.n)))
        flipped = DirectedNetwork.from_arrays(net.n, net.rows, net.cols,
                                              net.weights * row_signs[net.rows] * col_signs[net.cols])
        a, b = spectral_norm_dense(net).value, spectral_norm_dense(flipped).value
        assert a == pytest.approx(b, rel=1e-9, abs=1e-12)

    @PROPERTY_SETTINGS
    @given(net=directed_networks(max_n=7, nonnegative=False))
    def test_transpose(self, net):
        a, b = spectral_norm_dense(net).value, spectral_norm_dense(net.transpose()).value
        assert a == pytest.approx(b, rel=1e-9, abs=1e-12)

    @PROPERTY_SETTINGS
    @given(net=directed_networks(max_n=7, nonnegative=False))
    def test_absolute_values_never_lower_the_norm(self, net):
        signed, unsigned = spectral_norm_dense(net).value, spectral_norm_dense(net.abs()).value
        assert unsigned >= signed - 1e-9 * max(1.0, signed)


class TestRectangularSandwich:
    def test_bad_block_is_rejected(self):
        with pytest.raises(DomainError):
            rectangular_sandwich(DirectedNetwork.empty(3), 4, 1)

    @pytest.mark.parametrize("rows, cols", [(5, 12), (12, 5), (8, 8), (1, 20)])
    def test_block_lies_between_square_minors(self, rows, cols):
        result = rectangular_sandwich(random_network(20, 0.3, seed=rows * 31 + cols), rows, cols)
        assert result.holds, result.to_dict()

    @PROPERTY_SETTINGS
    @given(net=directed_networks(max_n=7, nonnegative=False), data=st.data())
    def test_sandwich_on_random_blocks(self, net, data):
        rows = data.draw(st.integers(1, net.n))
        cols = data.draw(st.integers(1, net.n))
        assert rectangular_sandwich(net, rows, cols).holds
