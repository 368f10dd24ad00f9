import math

import numpy as np
import pytest

from swaplab import statevec as sv


def random_state(rng, num_qubits):
    amps = rng.normal(size=2**num_qubits) + 1j * rng.normal(size=2**num_qubits)
    amps /= np.linalg.norm(amps)
    return sv.StateVector(num_qubits, amps)


class TestMakeBasisState:
    def test_zero(self):
        assert np.array_equal(sv.make_basis_state(1, 0).amplitudes, [1, 0])

    def test_two_qubits_index_three(self):
        assert np.array_equal(sv.make_basis_state(2, 3).amplitudes, [0, 0, 0, 1])

    def test_three_qubits_index_five(self):
        amps = sv.make_basis_state(3, 5).amplitudes
        assert amps[5] == 1.0 and np.count_nonzero(amps) == 1

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            sv.make_basis_state(2, 4)
        with pytest.raises(ValueError):
            sv.make_basis_state(2, -1)

    def test_qubit0_is_most_significant(self):
        # |10> must put qubit 0 in |1>: index 2 for two qubits
        state = sv.tensor([sv.make_basis_state(1, 1), sv.make_basis_state(1, 0)])
        assert state.amplitudes[2] == 1.0


class TestMakeQubitState:
    def test_north_pole(self):
        assert np.allclose(sv.make_qubit_state(0, 0).amplitudes, [1, 0])

    def test_south_pole(self):
        assert np.allclose(sv.make_qubit_state(math.pi, 0).amplitudes, [0, 1], atol=1e-15)

    def test_equator(self):
        amps = sv.make_qubit_state(math.pi / 2, 0).amplitudes
        assert np.allclose(amps, [1 / math.sqrt(2)] * 2)

    def test_phase(self):
        amps = sv.make_qubit_state(math.pi / 2, math.pi / 2).amplitudes
        assert np.allclose(amps[1], 1j / math.sqrt(2))


class TestTensor:
    def test_basis_product(self):
        state = sv.tensor([sv.make_basis_state(1, 0), sv.make_basis_state(1, 1)])
        assert np.array_equal(state.amplitudes, [0, 1, 0, 0])

    def test_plus_zero(self):
        plus = sv.make_qubit_state(math.pi / 2, 0)
        state = sv.tensor([plus, sv.make_basis_state(1, 0)])
        s = 1 / math.sqrt(2)
        assert np.allclose(state.amplitudes, [s, 0, s, 0])

    def test_norm_multiplicative(self):
        rng = np.random.default_rng(11)
        state = sv.tensor([random_state(rng, 1) for _ in range(3)])
        assert abs(state.norm() - 1.0) < 1e-12

    def test_empty(self):
        with pytest.raises(ValueError):
            sv.tensor([])


class TestHadamard:
    def test_on_zero(self):
        state = sv.apply_hadamard(sv.make_basis_state(1, 0), 0)
        assert np.allclose(state.amplitudes, [1 / math.sqrt(2)] * 2)

    def test_on_one(self):
        state = sv.apply_hadamard(sv.make_basis_state(1, 1), 0)
        s = 1 / math.sqrt(2)
        assert np.allclose(state.amplitudes, [s, -s])

    def test_involution(self):
        rng = np.random.default_rng(5)
        state = random_state(rng, 3)
        twice = sv.apply_hadamard(sv.apply_hadamard(state, 1), 1)
        assert np.allclose(twice.amplitudes, state.amplitudes, atol=1e-12)

    def test_bad_index(self):
        with pytest.raises(ValueError):
            sv.apply_hadamard(sv.make_basis_state(2, 0), 2)


class TestCswap:
    def test_control_on(self):
        # |1,01> -> |1,10>
        state = sv.make_basis_state(3, 0b101)
        out = sv.apply_cswap(state, 0, 1, 2)
        assert out.amplitudes[0b110] == 1.0

    def test_control_off(self):
        state = sv.make_basis_state(3, 0b001)
        out = sv.apply_cswap(state, 0, 1, 2)
        assert np.array_equal(out.amplitudes, state.amplitudes)

    def test_superposed_control(self):
        plus = sv.make_qubit_state(math.pi / 2, 0)
        state = sv.tensor([plus, sv.make_basis_state(2, 0b01)])
        out = sv.apply_cswap(state, 0, 1, 2)
        s = 1 / math.sqrt(2)
        expected = np.zeros(8, complex)
        expected[0b001] = s  # control 0 branch untouched
        expected[0b110] = s  # control 1 branch swapped
        assert np.allclose(out.amplitudes, expected)

    def test_involution_bitwise_exact(self):
        rng = np.random.default_rng(17)
        state = random_state(rng, 4)
        twice = sv.apply_cswap(sv.apply_cswap(state, 2, 0, 3), 2, 0, 3)
        assert np.array_equal(twice.amplitudes, state.amplitudes)

    def test_duplicate_indices(self):
        state = sv.make_basis_state(3, 0)
        with pytest.raises(ValueError):
            sv.apply_cswap(state, 0, 0, 1)

    def test_bad_index(self):
        with pytest.raises(ValueError):
            sv.apply_cswap(sv.make_basis_state(3, 0), 0, 1, 3)


class TestExactMarginal:
    def test_basis_state(self):
        state = sv.make_basis_state(2, 0b01)
        assert sv.exact_marginal(state, [0]) == {(0,): 1.0, (1,): 0.0}

    def test_bell_marginal(self):
        bell = sv.StateVector(2, np.array([1, 0, 0, 1]) / math.sqrt(2))
        table = sv.exact_marginal(bell, [0])
        assert abs(table[(0,)] - 0.5) < 1e-12 and abs(table[(1,)] - 0.5) < 1e-12

    def test_orthogonal_swap_test_ancilla(self):
        # built by hand: H, CSWAP, H on |0>|0>|1>
        state = sv.tensor(
            [sv.make_basis_state(1, 0), sv.make_basis_state(1, 0), sv.make_basis_state(1, 1)]
        )
        state = sv.apply_hadamard(state, 0)
        state = sv.apply_cswap(state, 0, 1, 2)
        state = sv.apply_hadamard(state, 0)
        table = sv.exact_marginal(state, [0])
        assert abs(table[(0,)] - 0.5) < 1e-12
        assert abs(table[(1,)] - 0.5) < 1e-12

    def test_full_marginal_matches_probabilities(self):
        rng = np.random.default_rng(23)
        state = random_state(rng, 3)
        table = sv.exact_marginal(state, [0, 1, 2])
        probs = state.probabilities()
        for idx in range(8):
            bits = tuple((idx >> (2 - i)) & 1 for i in range(3))
            assert abs(table[bits] - probs[idx]) < 1e-12

    def test_requested_order(self):
        state = sv.make_basis_state(2, 0b01)  # qubit 0 = 0, qubit 1 = 1
        table = sv.exact_marginal(state, [1, 0])
        assert table[(1, 0)] == 1.0

    def test_table_sums_to_one(self):
        rng = np.random.default_rng(3)
        state = random_state(rng, 4)
        table = sv.exact_marginal(state, [1, 3])
        assert abs(sum(table.values()) - 1.0) < 1e-10

    def test_invalid_indices(self):
        state = sv.make_basis_state(2, 0)
        with pytest.raises(ValueError):
            sv.exact_marginal(state, [0, 0])
        with pytest.raises(ValueError):
            sv.exact_marginal(state, [2])


class TestSampleOutcomes:
    def test_deterministic_distribution(self):
        counts = sv.sample_outcomes(sv.make_basis_state(1, 0), [0], 1000, 42)
        assert counts == {(0,): 1000, (1,): 0}

    def test_uniform_frequency_within_4_sigma(self):
        plus = sv.make_qubit_state(math.pi / 2, 0)
        shots = 10**5
        counts = sv.sample_outcomes(plus, [0], shots, 7)
        freq = counts[(0,)] / shots
        assert abs(freq - 0.5) <= 4 * math.sqrt(0.25 / shots)

    def test_same_seed_identical(self):
        rng_state = sv.make_qubit_state(1.0, 0.5)
        a = sv.sample_outcomes(rng_state, [0], 500, 99)
        b = sv.sample_outcomes(rng_state, [0], 500, 99)
        assert a == b

    def test_counts_sum_to_shots(self):
        rng = np.random.default_rng(1)
        state = random_state(rng, 3)
        counts = sv.sample_outcomes(state, [0, 2], 1234, 5)
        assert sum(counts.values()) == 1234

    def test_zero_shots(self):
        with pytest.raises(ValueError):
            sv.sample_outcomes(sv.make_basis_state(1, 0), [0], 0, 1)


class TestInnerProduct:
    def test_orthonormal_basis(self):
        zero = sv.make_basis_state(1, 0)
        one = sv.make_basis_state(1, 1)
        assert sv.inner_product(zero, zero) == 1.0
        assert sv.inner_product(zero, one) == 0.0

    def test_zero_plus(self):
        plus = sv.make_qubit_state(math.pi / 2, 0)
        zero = sv.make_basis_state(1, 0)
        assert abs(sv.inner_product(zero, plus) - 1 / math.sqrt(2)) < 1e-15

    def test_conjugate_linear_in_first(self):
        rng = np.random.default_rng(31)
        a, b = random_state(rng, 2), random_state(rng, 2)
        assert sv.inner_product(a, b) == pytest.approx(
            np.conj(sv.inner_product(b, a))
        )

    def test_size_mismatch(self):
        with pytest.raises(ValueError):
            sv.inner_product(sv.make_basis_state(1, 0), sv.make_basis_state(2, 0))


class TestInvariants:
    def test_unitarity_random_gate_sequences(self):
        rng = np.random.default_rng(2024)
        a = random_state(rng, 4)
        b = random_state(rng, 4)
        before = sv.inner_product(a, b)
        for _ in range(40):
            if rng.random() < 0.5:
                q = int(rng.integers(4))
                a, b = sv.apply_hadamard(a, q), sv.apply_hadamard(b, q)
            else:
                qs = rng.permutation(4)[:3]
                a = sv.apply_cswap(a, int(qs[0]), int(qs[1]), int(qs[2]))
                b = sv.apply_cswap(b, int(qs[0]), int(qs[1]), int(qs[2]))
        assert abs(a.norm() - 1.0) < 1e-10
        assert abs(b.norm() - 1.0) < 1e-10
        assert abs(sv.inner_product(a, b) - before) < 1e-10

    def test_sampling_consistency(self):
        rng = np.random.default_rng(8)
        state = random_state(rng, 2)
        shots = 20000
        counts = sv.sample_outcomes(state, [0, 1], shots, 12)
        table = sv.exact_marginal(state, [0, 1])
        for bits, q in table.items():
            bound = 5 * math.sqrt(q * (1 - q) / shots) + 1e-9
            assert abs(counts[bits] / shots - q) <= bound

    def test_resource_ceiling(self):
        with pytest.raises(sv.ResourceError):
            sv.make_basis_state(sv.MAX_QUBITS + 1, 0)

    def test_amplitude_length_validation(self):
        with pytest.raises(ValueError):
            sv.StateVector(2, np.array([1.0, 0.0]))
