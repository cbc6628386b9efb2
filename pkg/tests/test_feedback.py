"""PMI/CQI feedback generation and partition tests."""

import numpy as np
import pytest

from cqibeam.channel import dft_pilot, make_dccm, pilot_for_round
from cqibeam.codebook import build_multi_layer, build_single_layer
from cqibeam.feedback import (
    compute_cqi,
    make_feedback,
    partition_cqi,
    quantize_cqi,
    select_pmi,
)


def random_psd(rng, n):
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    m = z @ z.conj().T
    return 0.5 * (m + m.conj().T)


class TestSelectPmi:
    def test_matches_exhaustive_scan(self):
        rng = np.random.default_rng(0)
        cb = build_single_layer(4, 8)
        for _ in range(20):
            gram = random_psd(rng, 4)
            best = max(range(cb.size),
                       key=lambda m: np.real(np.trace(
                           cb.entries[m].conj().T @ gram @ cb.entries[m])))
            assert select_pmi(gram, cb) == best

    def test_tie_breaks_to_lowest_index(self):
        cb = build_single_layer(4, 8)
        gram = np.eye(4, dtype=complex)  # every unit codeword achieves 1
        assert select_pmi(gram, cb) == 0

    def test_dimension_check(self):
        cb = build_single_layer(4, 8)
        with pytest.raises(ValueError):
            select_pmi(np.eye(3), cb)


class TestComputeCqi:
    def test_matches_elementwise_sum(self):
        rng = np.random.default_rng(1)
        gram = random_psd(rng, 6)
        cb = build_multi_layer(6, 2, 12)
        v = cb.entries[3]
        naive = 0.0
        for k in range(2):
            for i in range(6):
                for j in range(6):
                    naive += (v[i, k].conj() * gram[i, j] * v[j, k]).real
        assert abs(compute_cqi(gram, v) - naive) < 1e-12

    def test_accepts_flat_vector(self):
        gram = 2.0 * np.eye(3)
        v = np.array([1.0, 0.0, 0.0], dtype=complex)
        assert compute_cqi(gram, v) == pytest.approx(2.0)

    def test_clips_rounding_noise_at_zero(self):
        gram = np.zeros((2, 2))
        assert compute_cqi(gram, np.array([1.0, 0.0])) == 0.0


class TestQuantizeCqi:
    def test_binary32_rounding(self):
        value = 0.1
        assert quantize_cqi(value) == float(np.float32(0.1))
        assert quantize_cqi(value) != value

    def test_idempotent(self):
        q = quantize_cqi(np.pi)
        assert quantize_cqi(q) == q

    def test_rejects_invalid(self):
        with pytest.raises(ValueError):
            quantize_cqi(-1.0)
        with pytest.raises(ValueError):
            quantize_cqi(float("nan"))
        with pytest.raises(ValueError):
            quantize_cqi(1.0, bits=16)


class TestPartitionCqi:
    def test_average_mode(self):
        part = partition_cqi(4.0, 2)
        np.testing.assert_allclose(part.components, [2.0, 2.0])

    def test_oracle_mode(self):
        part = partition_cqi(4.0, 2, "oracle", [0.75, 0.25])
        np.testing.assert_allclose(part.components, [3.0, 1.0])

    def test_components_sum_to_parent(self):
        part = partition_cqi(7.3, 3, "oracle", [0.5, 0.3, 0.2])
        assert part.components.sum() == pytest.approx(7.3)

    def test_oracle_validation(self):
        with pytest.raises(ValueError):
            partition_cqi(1.0, 2, "oracle")
        with pytest.raises(ValueError):
            partition_cqi(1.0, 2, "oracle", [0.8, 0.1])
        with pytest.raises(ValueError):
            partition_cqi(1.0, 2, "oracle", [1.5, -0.5])
        with pytest.raises(ValueError):
            partition_cqi(1.0, 0)
        with pytest.raises(ValueError):
            partition_cqi(1.0, 2, "median")


class TestMakeFeedback:
    def test_cqi_matches_recomputed_triple_product(self):
        dccm = make_dccm(12, 2, [5.0, 1.0], 3)
        cb = build_single_layer(4, 8)
        for t in (1, 2, 5):
            pilot = pilot_for_round(t, 12, 4, [dft_pilot(12, 4)], seed=2)
            rec = make_feedback(dccm, pilot, cb)
            q = pilot.matrix
            v = cb.vector(rec.pmi)
            exact = float(np.real(v.conj() @ (q.conj().T @ dccm.matrix @ q)
                                  @ v))
            assert abs(rec.cqi - exact) <= np.finfo(np.float32).eps * exact
            np.testing.assert_array_equal(rec.codeword, cb.entries[rec.pmi])

    def test_multilayer_columns_sorted_by_captured_power(self):
        dccm = make_dccm(16, 2, [8.0, 1.0], 5)
        cb = build_multi_layer(8, 2, 16)
        pilot = pilot_for_round(3, 16, 8, [dft_pilot(16, 8)], seed=4)
        rec = make_feedback(dccm, pilot, cb)
        q = pilot.matrix
        gram = q.conj().T @ dccm.matrix @ q
        powers = [float(np.real(rec.codeword[:, k].conj() @ gram
                                @ rec.codeword[:, k])) for k in range(2)]
        assert powers[0] >= powers[1]
        # the stored codeword is the selected entry up to column order
        entry = cb.entries[rec.pmi]
        assert (np.allclose(rec.codeword, entry)
                or np.allclose(rec.codeword, entry[:, ::-1]))
        # the trace criterion and the CQI are order invariant
        assert rec.cqi == pytest.approx(compute_cqi(gram, entry), rel=1e-6)

    def test_csv_row_format(self):
        dccm = make_dccm(8, 1, [2.0], 1)
        rec = make_feedback(dccm, dft_pilot(8, 4), build_single_layer(4, 8))
        fields = rec.csv_row().split(",")
        assert fields[0] == "1"
        assert int(fields[1]) == rec.pmi
        assert float(fields[2]) == pytest.approx(rec.cqi, rel=1e-8)
        assert fields[3] == ""  # DFT pilot carries no seed
