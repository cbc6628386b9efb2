"""Covariance-averaging baseline and direct codeword beam tests."""

import numpy as np
import pytest

from cqibeam.baseline import (
    Accumulator,
    accumulate,
    baseline_beams,
    baseline_pilots,
    codeword_beam,
)
from cqibeam.channel import dft_pilot, make_dccm, pilot_for_round
from cqibeam.codebook import build_multi_layer, build_single_layer
from cqibeam.feedback import make_feedback
from cqibeam.harness import beam_precision


def records_for(seed, t_rounds=6, n_layers=1):
    dccm = make_dccm(12, 2, [4.0, 1.0], seed)
    if n_layers == 1:
        cb = build_single_layer(4, 8)
    else:
        cb = build_multi_layer(4, n_layers, 8)
    q1 = dft_pilot(12, 4)
    return dccm, [make_feedback(dccm, pilot_for_round(t, 12, 4, [q1], seed),
                                cb)
                  for t in range(1, t_rounds + 1)]


class TestAccumulate:
    def test_matches_loop_sum(self):
        _, records = records_for(0)
        acc = accumulate(records)
        naive = np.zeros((12, 12), dtype=complex)
        for rec in records:
            beam = rec.pilot.matrix @ rec.codeword[:, 0]
            naive += rec.cqi * np.outer(beam, beam.conj())
        naive /= len(records)
        np.testing.assert_allclose(acc.matrix, naive, atol=1e-12)
        assert acc.count == len(records)

    def test_multilayer_contributes_all_columns(self):
        _, records = records_for(1, n_layers=2)
        acc = accumulate(records)
        naive = np.zeros((12, 12), dtype=complex)
        for rec in records:
            for k in range(2):
                beam = rec.pilot.matrix @ rec.codeword[:, k]
                naive += rec.cqi * np.outer(beam, beam.conj())
        naive /= len(records)
        np.testing.assert_allclose(acc.matrix, naive, atol=1e-12)

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            accumulate([])

    def test_accumulator_must_be_hermitian(self):
        with pytest.raises(ValueError):
            Accumulator(matrix=np.array([[0.0, 1.0], [0.0, 0.0]]), count=1)


class TestBaselineBeams:
    def test_captured_trace_equals_top_eigenvalue_sum(self):
        _, records = records_for(2, t_rounds=10)
        acc = accumulate(records)
        for n_streams in (1, 2, 3):
            beams = baseline_beams(acc, n_streams)
            captured = np.real(np.trace(
                beams.columns.conj().T @ acc.matrix @ beams.columns))
            top = np.sort(np.linalg.eigvalsh(acc.matrix))[::-1][:n_streams]
            assert abs(captured - top.sum()) < 1e-8

    def test_deterministic(self):
        _, records = records_for(3)
        a = baseline_beams(accumulate(records), 2).columns
        b = baseline_beams(accumulate(records), 2).columns
        np.testing.assert_array_equal(a, b)

    def test_stream_count_validation(self):
        _, records = records_for(4)
        acc = accumulate(records)
        with pytest.raises(ValueError):
            baseline_beams(acc, 0)
        with pytest.raises(ValueError):
            baseline_beams(acc, 13)


class TestBaselinePilots:
    def test_round_one_returns_q1(self):
        q1 = dft_pilot(12, 4)
        assert baseline_pilots(q1, 1, seed=5) is q1

    def test_rotations_stay_in_round_one_column_space(self):
        q1 = dft_pilot(12, 4)
        projector = q1.matrix @ q1.matrix.conj().T
        for t in (2, 3, 7):
            p = baseline_pilots(q1, t, seed=5)
            np.testing.assert_allclose(p.matrix.conj().T @ p.matrix,
                                       np.eye(4), atol=1e-12)
            np.testing.assert_allclose(projector @ p.matrix, p.matrix,
                                       atol=1e-10)

    def test_seeded_determinism(self):
        q1 = dft_pilot(12, 4)
        a = baseline_pilots(q1, 4, seed=9).matrix
        b = baseline_pilots(q1, 4, seed=9).matrix
        c = baseline_pilots(q1, 4, seed=10).matrix
        np.testing.assert_array_equal(a, b)
        assert np.max(np.abs(a - c)) > 1e-3

    def test_round_validation(self):
        with pytest.raises(ValueError):
            baseline_pilots(dft_pilot(12, 4), 0, seed=0)


class TestCodewordBeam:
    def test_reported_beam_not_better_than_exhaustive_best(self):
        dccm, records = records_for(6, t_rounds=1)
        cb = build_single_layer(4, 8)
        rec = records[0]
        reported = beam_precision(dccm, codeword_beam(rec.pilot,
                                                      rec.codeword))
        best = max(beam_precision(dccm, codeword_beam(rec.pilot,
                                                      cb.entries[m]))
                   for m in range(cb.size))
        assert reported <= best + 1e-12

    def test_flat_vector_promoted(self):
        pilot = dft_pilot(12, 4)
        cb = build_single_layer(4, 8)
        beams = codeword_beam(pilot, cb.vector(3))
        assert beams.columns.shape == (12, 1)
        assert abs(np.linalg.norm(beams.columns[:, 0]) - 1.0) < 1e-12

    def test_dimension_validation(self):
        with pytest.raises(ValueError):
            codeword_beam(dft_pilot(12, 4), np.ones(5))
