"""
Shared fixtures for the test suite.

Long end-to-end runs are marked ``slow`` and only run with ``--runslow``.
"""

from importlib import resources

import pytest

from asr_correction_core.core.dataset import augment, load_sentences, synthesize_corpus
from asr_correction_core.core.phoco import Context


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run slow end-to-end tests")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long end-to-end acceptance run")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


def packaged(name):
    return str(resources.files('asr_correction_core.data').joinpath(name))


@pytest.fixture(scope='session')
def context_path():
    return packaged('telesales_context.txt')


@pytest.fixture(scope='session')
def sentences_path():
    return packaged('telesales_sentences.txt')


@pytest.fixture(scope='session')
def telesales_context(context_path):
    return Context.from_file(context_path)


@pytest.fixture(scope='session')
def small_corpus(telesales_context, sentences_path):
    sentences = load_sentences(sentences_path)[:12]
    return synthesize_corpus(sentences, telesales_context, noise_rate=0.3, seed=7)


@pytest.fixture(scope='session')
def small_candidates(small_corpus, telesales_context):
    return augment(small_corpus, telesales_context)
