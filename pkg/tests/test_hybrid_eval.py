"""
Tests for the hybrid decision rule and the per-threshold report.
"""

import pytest

from asr_correction_core.core import hybrid_eval
from asr_correction_core.core.errors import EmptyDatasetError, InvalidReductionBaseError
from asr_correction_core.core.hybrid_eval import (
    ConstantGate, NeuralGate, OracleGate, build_report, hybrid_correct, relative_reduction
)
from asr_correction_core.core.neural_gate import Vocabulary, init_model, zeros_model
from asr_correction_core.core.phoco import Context, PhocoConfig
from asr_correction_core.core.phonetics import Representation


class TestRelativeReduction:

    def test_reported_rows(self):
        assert 0.437 <= relative_reduction(0.338, 0.190) <= 0.441
        assert 0.172 <= relative_reduction(0.230, 0.190) <= 0.176

    def test_no_change(self):
        assert relative_reduction(0.3, 0.3) == 0.0

    @pytest.mark.parametrize("base", [0.0, -0.1])
    def test_non_positive_base(self, base):
        with pytest.raises(InvalidReductionBaseError):
            relative_reduction(base, 0.1)


class TestHybridCorrect:

    @pytest.fixture
    def setup(self):
        ctx = Context(["coca cola"])
        cfg = PhocoConfig(0.2, Representation.PLAIN)
        vocab = Vocabulary(["quiero", "una", "coca", "cola", "gola"])
        return ctx, cfg, zeros_model(len(vocab), 4, 3, 2, max_seq_len=16), vocab

    def test_no_proposal_skips_gate(self, setup, monkeypatch):
        ctx, cfg, model, vocab = setup

        def fail(*args):
            raise AssertionError("gate consulted")

        monkeypatch.setattr(hybrid_eval, 'forward', fail)
        assert hybrid_correct("quiero pan", ctx, cfg, model, vocab) == "quiero pan"

    def test_confident_gate_accepts(self, setup, monkeypatch):
        ctx, cfg, model, vocab = setup
        monkeypatch.setattr(hybrid_eval, 'forward', lambda *args: 0.7)
        assert hybrid_correct("quiero una coca gola", ctx, cfg, model, vocab) == "quiero una coca cola"

    def test_one_half_rejects(self, setup):
        ctx, cfg, model, vocab = setup
        # an all-zero model outputs exactly 0.5
        assert hybrid_correct("quiero una coca gola", ctx, cfg, model, vocab) == "quiero una coca gola"


class TestBuildReport:

    def test_reject_gate_matches_baseline(self, small_candidates):
        report = build_report(small_candidates, ConstantGate(False))
        for row in report.rows:
            assert row.hybrid_wer == pytest.approx(report.baseline_asr_wer)

    def test_accept_gate_matches_phoco(self, small_candidates):
        report = build_report(small_candidates, ConstantGate(True))
        for row in report.rows:
            assert row.hybrid_wer == row.phoco_wer

    def test_oracle_sandwich(self, small_candidates):
        report = build_report(small_candidates, OracleGate())
        for row in report.rows:
            assert row.hybrid_wer <= row.phoco_wer
            assert row.hybrid_wer <= report.baseline_asr_wer + 1e-12

    def test_rows_cover_grid(self, small_candidates, small_corpus):
        report = build_report(small_candidates, OracleGate())
        assert [row.threshold for row in report.rows] == pytest.approx([0.05 * k for k in range(1, 13)])
        assert all(row.n_candidates == 12 * len(small_corpus) for row in report.rows)

    def test_relative_columns(self, small_candidates):
        report = build_report(small_candidates, OracleGate())
        for row in report.rows:
            assert row.rel_vs_asr == pytest.approx((report.baseline_asr_wer - row.hybrid_wer)
                                                   / report.baseline_asr_wer)
            if row.phoco_wer > 0:
                assert row.rel_vs_phoco == pytest.approx((row.phoco_wer - row.hybrid_wer) / row.phoco_wer)
        mean_rel = sum(row.rel_vs_asr for row in report.rows) / len(report.rows)
        assert report.averages.rel_vs_asr == pytest.approx(mean_rel)

    def test_best_threshold(self, small_candidates):
        report = build_report(small_candidates, OracleGate())
        best = min(report.rows, key=lambda r: r.hybrid_wer)
        assert report.best_threshold == best.threshold
        assert report.absolute_improvement == pytest.approx(report.baseline_asr_wer - best.hybrid_wer)

    def test_reproducible(self, small_candidates):
        vocab = Vocabulary.from_candidates(small_candidates)
        model = init_model(len(vocab), 8, 6, 4)
        gate = NeuralGate(model, vocab)
        assert build_report(small_candidates, gate).to_text() == build_report(small_candidates, gate).to_text()

    def test_text_and_records(self, small_candidates):
        report = build_report(small_candidates, OracleGate())
        text = report.to_text()
        assert "Baseline ASR WER" in text and "Average" in text
        records = report.to_records()
        assert len(records) == 13
        assert records[-1]['kind'] == 'average' and records[-1]['threshold'] is None

    def test_neural_gate_leaves_unchanged_candidates_alone(self, small_candidates):
        vocab = Vocabulary.from_candidates(small_candidates)
        gate = NeuralGate(init_model(len(vocab), 8, 6, 4), vocab)
        accepted = gate.accept(small_candidates)
        assert not any(a for a, c in zip(accepted, small_candidates) if not c.changed)

    def test_empty(self):
        with pytest.raises(EmptyDatasetError):
            build_report([], OracleGate())
