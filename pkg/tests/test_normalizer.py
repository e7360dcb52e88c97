"""
Tests for Spanish text normalization.
"""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from asr_correction_core.core.errors import NumberRangeError
from asr_correction_core.core.normalizer import (
    DIGITS, KEEP_CHARS, NormRules, default_norm_rules, normalize, number_to_words, parse_norm_rules
)


class TestNormalize:

    def test_empty(self):
        assert normalize("") == ""

    def test_symbols_case_and_numbers(self):
        assert normalize("¿Quiero 2 Coca-Colas!") == "quiero dos coca colas"

    def test_abbreviation_after_number(self):
        rules = NormRules(abbreviations={'lt': 'litros'})
        assert normalize("3 lt de agua", rules) == "tres litros de agua"

    def test_default_table(self):
        assert normalize("Sr. Pérez pidió 2 kg") == "señor pérez pidió dos kilos"

    def test_dotted_abbreviation(self):
        assert normalize("Pedido no. 5") == "pedido número cinco"

    def test_abbreviation_only_on_whole_tokens(self):
        rules = NormRules(abbreviations={'lt': 'litros'})
        assert normalize("salto alto", rules) == "salto alto"

    def test_accents_and_enye_kept(self):
        assert normalize("Año Pingüino CAFÉ") == "año pingüino café"

    def test_foreign_letters_folded(self):
        assert normalize("crème brûlée") == "creme brulée"

    def test_large_numbers_read_by_digit(self):
        assert normalize("1000000") == "uno cero cero cero cero cero cero"

    @pytest.mark.parametrize("text, expected", [
        ("quiero １２ cocas", "quiero doce cocas"),
        ("quiero ٣ cocas", "quiero tres cocas"),
        ("pedido 4２", "pedido cuarenta y dos"),
    ])
    def test_non_ascii_digits_spelled(self, text, expected):
        assert normalize(text) == expected

    def test_whitespace_collapsed(self):
        assert normalize("  hola \t\n  mundo  ") == "hola mundo"


class TestNumberToWords:

    @pytest.mark.parametrize("n, words", [
        (0, "cero"),
        (16, "dieciséis"),
        (21, "veintiuno"),
        (100, "cien"),
        (101, "ciento uno"),
        (600, "seiscientos"),
    ])
    def test_cardinals(self, n, words):
        assert number_to_words(n) == words

    @pytest.mark.parametrize("n", [-1, 1_000_000, 2.5, True])
    def test_out_of_range(self, n):
        with pytest.raises(NumberRangeError):
            number_to_words(n)


class TestNormRules:

    def test_parse_table(self):
        rules = parse_norm_rules("# comment\nsr\tseñor\nkg\tkilos\n")
        assert dict(rules.abbreviations) == {'sr': 'señor', 'kg': 'kilos'}

    def test_duplicate_key_rejected(self):
        with pytest.raises(ValueError):
            parse_norm_rules("kg\tkilos\nkg\tkilogramos\n")

    def test_key_with_space_rejected(self):
        with pytest.raises(ValueError):
            NormRules(abbreviations={'k g': 'kilos'})

    def test_unnormalized_expansion_rejected(self):
        with pytest.raises(ValueError):
            NormRules(abbreviations={'kg': 'Kilos'})

    def test_default_expansions_are_fixed_points(self):
        for expansion in default_norm_rules().abbreviations.values():
            assert normalize(expansion) == expansion


@settings(max_examples=300, deadline=None)
@given(st.text())
def test_idempotent(text):
    once = normalize(text)
    assert normalize(once) == once


@settings(max_examples=300, deadline=None)
@given(st.text())
def test_character_closure(text):
    out = normalize(text)
    assert set(out) <= KEEP_CHARS - DIGITS
    assert out == " ".join(out.split())
