"""
Tests for grapheme-to-phoneme transduction.
"""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from asr_correction_core.core.errors import G2PCoverageError
from asr_correction_core.core.normalizer import LETTERS, normalize
from asr_correction_core.core.phonetics import Phonemizer, Representation, parse_rule_table, phonemize


@pytest.mark.parametrize("rep", list(Representation))
def test_empty(rep):
    assert phonemize("", rep) == ""


def test_plain_is_identity():
    assert phonemize("coca cola", Representation.PLAIN) == "coca cola"


def test_ipa_example():
    assert phonemize("queso chico", Representation.IPA) == "keso tʃiko"


def test_wbet_example():
    assert phonemize("queso chico", Representation.WBET) == "keso tSiko"


@pytest.mark.parametrize("text, ipa", [
    ("hola", "ola"),
    ("gente", "xente"),
    ("guerra", "gera"),
    ("pingüino", "pingwino"),
    ("rosa", "rosa"),
    ("pero", "peɾo"),
    ("perro", "pero"),
    ("llave", "ʝabe"),
    ("yo y tú", "ʝo i tu"),
    ("niño", "niɲo"),
    ("zapato cielo", "sapato sielo"),
    ("examen", "eksamen"),
    ("jugo", "xugo"),
])
def test_mexican_spanish_rules(text, ipa):
    assert phonemize(text, Representation.IPA) == ipa


def test_wbet_mirrors_ipa_symbols():
    assert phonemize("niño llama pero perro", Representation.WBET) == "nin~o jjama per(o perro"


def test_silent_word_keeps_a_token():
    assert phonemize("h", Representation.IPA) == "h"


@pytest.mark.parametrize("rep", [Representation.IPA, Representation.WBET])
def test_packaged_tables_are_total(rep):
    phonemizer = Phonemizer()
    phonemizer.tables[rep].check_total(LETTERS)


def test_incomplete_table_rejected():
    table = parse_rule_table("a\ta\n", "tiny")
    with pytest.raises(G2PCoverageError):
        table.check_total(LETTERS)


def test_rule_without_tab_rejected():
    with pytest.raises(ValueError):
        parse_rule_table("ch tS\n", "broken")


@settings(max_examples=200, deadline=None)
@given(st.text(), st.sampled_from(list(Representation)))
def test_token_count_preserved(text, rep):
    normalized = normalize(text)
    out = phonemize(normalized, rep)
    assert len(out.split(" ")) == len(normalized.split(" "))
    assert phonemize(normalized, rep) == out
