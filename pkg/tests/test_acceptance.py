"""
Full-size end-to-end run on the packaged telesales domain.

Run with ``pytest --runslow``; it trains the default-size gate. Stage times
are logged and bounded coarsely (augment under 2 minutes, the whole chain
under 15 minutes on a desktop CPU).
"""

import logging
import time

import numpy as np
import pytest

from asr_correction_core.core.dataset import augment, load_sentences, split, synthesize_corpus
from asr_correction_core.core.hybrid_eval import NeuralGate, OracleGate, build_report
from asr_correction_core.core.neural_gate import TrainConfig, evaluate, train

pytestmark = pytest.mark.slow

logger = logging.getLogger(__name__)

AUGMENT_LIMIT_S = 120.0
PIPELINE_LIMIT_S = 900.0

timings = {}


def timed(stage, fn, *args, **kwargs):
    started = time.perf_counter()
    result = fn(*args, **kwargs)
    timings[stage] = time.perf_counter() - started
    logger.info(f"{stage} took {timings[stage]:.1f}s")
    return result


@pytest.fixture(scope='module')
def corpus(telesales_context, sentences_path):
    sentences = load_sentences(sentences_path)
    cycled = [sentences[i % len(sentences)] for i in range(320)]
    return timed('synth', synthesize_corpus, cycled, telesales_context, noise_rate=0.3, seed=0)


@pytest.fixture(scope='module')
def candidates(corpus, telesales_context):
    return timed('augment', augment, corpus, telesales_context)


@pytest.fixture(scope='module')
def trained(candidates):
    train_set, val_set, test_set = split(candidates, seed=0)
    result = timed('train', train, train_set, val_set, TrainConfig(epochs=2, batch_size=64, seed=0))
    return result, test_set


@pytest.fixture(scope='module')
def hybrid_report(trained, candidates):
    result, _ = trained
    return timed('report', build_report, candidates, NeuralGate(result.model, result.vocab))


def test_candidate_count(candidates, telesales_context):
    assert len(telesales_context.phrases) == 30
    assert len(candidates) == 320 * 144


def test_augment_runtime(candidates):
    assert timings['augment'] < AUGMENT_LIMIT_S


def test_phoco_improves_on_asr(candidates):
    report = build_report(candidates, OracleGate())
    row = next(r for r in report.rows if r.threshold == pytest.approx(0.40))
    assert row.phoco_wer <= 0.9 * report.baseline_asr_wer


def test_oracle_bounds(candidates):
    report = build_report(candidates, OracleGate())
    for row in report.rows:
        assert row.hybrid_wer <= row.phoco_wer
        assert row.hybrid_wer <= report.baseline_asr_wer + 1e-12


def test_gate_quality(trained):
    result, test_set = trained
    metrics = evaluate(result.model, result.vocab, test_set)
    assert metrics.macro_f1 >= 0.85
    assert metrics.auc >= 0.90
    assert np.all(np.isfinite(result.history.batch_loss))


def test_hybrid_beats_phoco_on_average(hybrid_report):
    assert hybrid_report.averages.hybrid_wer <= hybrid_report.averages.phoco_wer


def test_pipeline_runtime(hybrid_report):
    total = sum(timings[stage] for stage in ('synth', 'augment', 'train', 'report'))
    logger.info(f"Pipeline took {total:.1f}s")
    assert total < PIPELINE_LIMIT_S
