"""
Spanish text normalization applied to every transcript before phonetic processing.

Stages, in order: lowercase, symbol strip, number expansion, abbreviation
expansion, whitespace collapse. The result contains only lowercase letters
(accents, ``ü`` and ``ñ`` included) separated by single spaces.
"""

import re
import logging
import unicodedata
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from types import MappingProxyType
from typing import FrozenSet, Mapping, Optional

from num2words import num2words

from asr_correction_core.core.errors import NumberRangeError

logger = logging.getLogger(__name__)

LETTERS = frozenset("abcdefghijklmnopqrstuvwxyzáéíóúüñ")
DIGITS = frozenset("0123456789")
KEEP_CHARS = LETTERS | DIGITS | frozenset(" ")

MAX_CARDINAL = 999_999

_NUMBER_RE = re.compile(r"[0-9]+")


@dataclass(frozen=True)
class NormRules:
    """Abbreviation table plus the character set that survives cleanup."""
    abbreviations: Mapping[str, str] = field(default_factory=dict)
    keep_chars: FrozenSet[str] = KEEP_CHARS

    def __post_init__(self):
        keys = list(self.abbreviations)
        for key in keys:
            if not key or key != key.lower() or any(ch.isspace() for ch in key):
                raise ValueError(f"Abbreviation key must be a lowercase single token: {key!r}")
        key_set = set(keys)
        for key, expansion in self.abbreviations.items():
            tokens = expansion.split(" ")
            if not expansion or any(not tok for tok in tokens):
                raise ValueError(f"Expansion for {key!r} is not single-spaced text: {expansion!r}")
            if any(ch not in LETTERS for tok in tokens for ch in tok):
                raise ValueError(f"Expansion for {key!r} is not normalized: {expansion!r}")
            if key_set.intersection(tokens):
                raise ValueError(f"Expansion for {key!r} contains an abbreviation key: {expansion!r}")
        object.__setattr__(self, 'abbreviations', MappingProxyType(dict(self.abbreviations)))

    @property
    def dotted(self) -> Mapping[str, str]:
        """Keys carrying punctuation, expanded before the symbol strip."""
        return {k: v for k, v in self.abbreviations.items() if not set(k) <= LETTERS}

    @property
    def plain(self) -> Mapping[str, str]:
        return {k: v for k, v in self.abbreviations.items() if set(k) <= LETTERS}


def parse_norm_rules(text: str) -> NormRules:
    """Parse a ``key<TAB>expansion`` table; ``#`` starts a comment line."""
    abbreviations = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip('\r')
        if not line.strip() or line.lstrip().startswith('#'):
            continue
        if '\t' not in line:
            raise ValueError(f"Abbreviation table line {line_no}: expected key<TAB>expansion")
        key, expansion = line.split('\t', 1)
        key, expansion = key.strip(), expansion.strip()
        if key in abbreviations:
            raise ValueError(f"Abbreviation table line {line_no}: duplicate key {key!r}")
        abbreviations[key] = expansion
    return NormRules(abbreviations=abbreviations)


def load_norm_rules(path: Optional[str] = None) -> NormRules:
    """Load an abbreviation table file, or the packaged default when path is None."""
    if path is None:
        return default_norm_rules()
    with open(path, 'r', encoding='utf-8') as f:
        rules = parse_norm_rules(f.read())
    logger.debug(f"Loaded {len(rules.abbreviations)} abbreviations from {path}")
    return rules


@lru_cache(maxsize=1)
def default_norm_rules() -> NormRules:
    text = resources.files('asr_correction_core.data').joinpath('abbreviations.tsv').read_text(encoding='utf-8')
    return parse_norm_rules(text)


def number_to_words(n: int) -> str:
    """
    Spell a non-negative integer below one million as a Spanish cardinal.

    Args:
        n: Integer in [0, 999999]

    Returns:
        Lowercase words, e.g. 21 -> "veintiuno", 101 -> "ciento uno"
    """
    if isinstance(n, bool) or not isinstance(n, int) or not 0 <= n <= MAX_CARDINAL:
        raise NumberRangeError(f"Cannot spell {n!r}: supported range is 0..{MAX_CARDINAL}")
    words = num2words(n, lang='es').lower()
    return _collapse(_strip_symbols(words, KEEP_CHARS - DIGITS))


def _spell_digits(digits: str) -> str:
    if len(digits) > len(str(MAX_CARDINAL)) or int(digits) > MAX_CARDINAL:
        # read digit by digit
        return " ".join(number_to_words(int(d)) for d in digits)
    return number_to_words(int(digits))


def _fold_char(ch: str, keep_chars: FrozenSet[str]) -> str:
    if ch in keep_chars:
        return ch
    if unicodedata.category(ch) == 'Nd':
        # fullwidth, Arabic-Indic and other decimal digits read as their ASCII value
        ascii_digit = str(unicodedata.decimal(ch))
        return ascii_digit if ascii_digit in keep_chars else " "
    base = unicodedata.normalize('NFD', ch)[0]
    if base in keep_chars and base in LETTERS:
        return base
    return " "


def _strip_symbols(text: str, keep_chars: FrozenSet[str]) -> str:
    return "".join(_fold_char(ch, keep_chars) for ch in text)


def _collapse(text: str) -> str:
    return " ".join(text.split())


def _expand_dotted(text: str, dotted: Mapping[str, str]) -> str:
    for key, expansion in dotted.items():
        pattern = re.compile(r"(?<!\S)" + re.escape(key) + r"(?!\S)")
        text = pattern.sub(f" {expansion} ", text)
    return text


def normalize(text: str, rules: Optional[NormRules] = None) -> str:
    """
    Normalize a raw transcript.

    Args:
        text: Raw text of any length
        rules: Abbreviation table and keep set (packaged default when None)

    Returns:
        Normalized text; normalize(normalize(x)) == normalize(x)
    """
    if not text:
        return ""
    if rules is None:
        rules = default_norm_rules()

    t = unicodedata.normalize('NFC', text).lower()
    t = _expand_dotted(t, rules.dotted)
    t = _strip_symbols(t, rules.keep_chars)
    t = _NUMBER_RE.sub(lambda m: f" {_spell_digits(m.group(0))} ", t)

    plain = rules.plain
    tokens = [plain.get(tok, tok) for tok in t.split()]
    return _collapse(" ".join(tokens))
