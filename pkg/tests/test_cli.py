"""
End-to-end tests for the phoco command line.
"""

import json
from pathlib import Path

import numpy.testing as npt
import pytest

from asr_correction_core import cli
from asr_correction_core.core import config as config_module
from asr_correction_core.core.neural_gate import load_model


@pytest.fixture(autouse=True)
def isolated(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    # --config replaces the global instance; restore it afterwards
    monkeypatch.setattr(config_module, 'config', config_module.config)
    for name in ('PHOCO_CONFIG_FILE', 'PHOCO_SEED', 'PHOCO_THRESHOLD', 'REDUCE_LOGGING', 'LOG_LEVEL'):
        monkeypatch.delenv(name, raising=False)
    return tmp_path


@pytest.fixture
def small_config(tmp_path):
    path = tmp_path / 'config.json'
    path.write_text(json.dumps({
        'training': {'embedding_dim': 8, 'hidden_dim': 6, 'dense_dim': 4, 'max_seq_len': 48},
    }), encoding='utf-8')
    return str(path)


def test_normalize(capsys):
    assert cli.main(['normalize', '¿Quiero', '2', 'Coca-Colas!']) == 0
    assert capsys.readouterr().out == "quiero dos coca colas\n"


def test_phonemize(capsys):
    assert cli.main(['phonemize', '--rep', 'wbet', 'Queso', 'chico']) == 0
    assert capsys.readouterr().out == "keso tSiko\n"


def test_correct_with_details(capsys):
    assert cli.main(['correct', '--threshold', '0.2', '--show-replacements', 'quiero una targeta oro']) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "quiero una tarjeta oro"
    details = json.loads(lines[1])
    assert details['candidate'] == lines[0]
    assert details['replacements'][0]['phrase'] == "tarjeta oro"


@pytest.mark.parametrize("window_slack, expected", [
    (1, "quiero una coca cola"),
    (0, "quiero una cocacola"),
])
def test_correct_uses_configured_window_slack(tmp_path, capsys, window_slack, expected):
    (tmp_path / 'context.txt').write_text("coca cola\n", encoding='utf-8')
    config_path = tmp_path / 'slack.json'
    config_path.write_text(json.dumps({'corrector': {'window_slack': window_slack}}), encoding='utf-8')
    assert cli.main(['--config', str(config_path), 'correct', '--context', 'context.txt', '--rep', 'plain',
                     '--selector', 'win', '--threshold', '0.2', 'quiero una cocacola']) == 0
    assert capsys.readouterr().out == expected + "\n"


def run_chain(common, out_dir):
    """synth -> augment -> train -> evaluate -> report into out_dir."""
    out = out_dir + '/'
    Path(out_dir).mkdir()
    assert cli.main(common + ['synth', '--utterances', '4', '--seed', '3', '--output', out + 'corpus.jsonl']) == 0
    assert cli.main(common + ['augment', '--corpus', out + 'corpus.jsonl', '--output', out + 'candidates.jsonl']) == 0
    assert cli.main(common + ['train', '--candidates', out + 'candidates.jsonl', '--seed', '3', '--epochs', '1',
                              '--batch-size', '32', '--model-out', out + 'gate.npz', '--splits-dir', out + 'splits',
                              '--curves', out + 'curves.json']) == 0
    assert cli.main(common + ['evaluate', '--model', out + 'gate.npz', '--candidates', out + 'splits/test.jsonl',
                              '--output', out + 'metrics.json']) == 0
    assert cli.main(common + ['report', '--model', out + 'gate.npz', '--candidates', out + 'candidates.jsonl',
                              '--output-dir', out + 'report']) == 0


def test_pipeline_outputs(tmp_path, small_config, capsys):
    run_chain(['--config', small_config, '--log-level', 'WARNING'], 'run')
    run = tmp_path / 'run'
    assert len((run / 'corpus.jsonl').read_text(encoding='utf-8').splitlines()) == 4
    assert len((run / 'candidates.jsonl').read_text(encoding='utf-8').splitlines()) == 4 * 144
    assert (run / 'curves.html').exists()
    assert "macro avg" in capsys.readouterr().out
    assert 'macro_f1' in json.loads((run / 'metrics.json').read_text(encoding='utf-8'))
    assert b"Baseline ASR WER" in (run / 'report' / 'report.txt').read_bytes()
    assert len((run / 'report' / 'report.jsonl').read_text(encoding='utf-8').splitlines()) == 13


def test_pipeline_is_reproducible(tmp_path, small_config):
    common = ['--config', small_config, '--log-level', 'WARNING']
    run_chain(common, 'first')
    run_chain(common, 'second')
    first, second = tmp_path / 'first', tmp_path / 'second'

    for name in ('corpus.jsonl', 'candidates.jsonl', 'splits/train.jsonl', 'splits/test.jsonl', 'curves.json',
                 'metrics.json', 'report/report.txt', 'report/report.jsonl'):
        assert (first / name).read_bytes() == (second / name).read_bytes(), name

    # .npz is a zip archive stamped with write times, so compare its contents
    model_a, vocab_a = load_model(str(first / 'gate.npz'))
    model_b, vocab_b = load_model(str(second / 'gate.npz'))
    assert vocab_a.tokens == vocab_b.tokens
    for name, param in model_a.params.items():
        npt.assert_array_equal(param, model_b.params[name])


def test_report_oracle_without_model(tmp_path, capsys):
    assert cli.main(['synth', '--utterances', '2', '--output', 'corpus.jsonl']) == 0
    assert cli.main(['augment', '--corpus', 'corpus.jsonl', '--output', 'candidates.jsonl']) == 0
    assert cli.main(['report', '--gate', 'oracle', '--candidates', 'candidates.jsonl']) == 0
    assert "Gate: oracle" in capsys.readouterr().out


def test_report_model_gate_needs_model(tmp_path):
    (tmp_path / 'candidates.jsonl').write_text("", encoding='utf-8')
    assert cli.main(['report', '--candidates', 'candidates.jsonl']) == 1


def test_missing_input_fails():
    assert cli.main(['augment', '--corpus', 'missing.jsonl', '--output', 'out.jsonl']) == 1


def test_malformed_candidates_fail(tmp_path):
    (tmp_path / 'bad.jsonl').write_text('{"id": "x"}\n', encoding='utf-8')
    assert cli.main(['report', '--gate', 'oracle', '--candidates', 'bad.jsonl']) == 1


def test_invalid_config(tmp_path):
    path = tmp_path / 'bad_config.json'
    path.write_text(json.dumps({'corrector': {'threshold': 1.5}}), encoding='utf-8')
    assert cli.main(['--config', str(path), 'normalize', 'hola']) == 1
