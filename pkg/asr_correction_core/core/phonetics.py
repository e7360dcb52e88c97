"""
Rule-based grapheme-to-phoneme transduction for Mexican Spanish.

Three representations are available: ``plain`` (the normalized text itself),
``ipa`` and ``wbet`` (an ASCII mirror of the IPA table). Tables are ordered
lists of regular-expression rules applied left to right; at every position
the first rule that matches consumes its grapheme(s) and emits its phone(s).
"""

import re
import logging
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from importlib import resources
from typing import Dict, Optional, Tuple

from asr_correction_core.core.errors import G2PCoverageError
from asr_correction_core.core.normalizer import LETTERS

logger = logging.getLogger(__name__)


class Representation(str, Enum):
    """String space in which PhoCo compares segments."""
    PLAIN = 'plain'
    IPA = 'ipa'
    WBET = 'wbet'

    @property
    def token(self) -> str:
        """Special vocabulary token naming this representation."""
        return f"REP_{self.name}"


@dataclass(frozen=True)
class G2PRule:
    pattern: str
    replacement: str
    regex: re.Pattern


@dataclass(frozen=True)
class G2PRuleTable:
    """Ordered rewrite rules for one non-plain representation."""
    name: str
    rules: Tuple[G2PRule, ...]

    def transduce_word(self, word: str) -> str:
        out = []
        pos = 0
        while pos < len(word):
            for rule in self.rules:
                m = rule.regex.match(word, pos)
                if m and m.end() > pos:
                    out.append(rule.replacement)
                    pos = m.end()
                    break
            else:
                raise G2PCoverageError(
                    f"Rule table {self.name!r} has no rule for {word[pos]!r} in {word!r}")
        return "".join(out)

    def check_total(self, alphabet=LETTERS):
        """Raise G2PCoverageError unless every letter of the alphabet is covered in isolation."""
        for ch in sorted(alphabet):
            self.transduce_word(ch)


def parse_rule_table(text: str, name: str) -> G2PRuleTable:
    """Parse ``pattern<TAB>replacement`` lines; ``#`` starts a comment line."""
    rules = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip('\r\n')
        if not line.strip() or line.startswith('#'):
            continue
        if '\t' not in line:
            raise ValueError(f"Rule table {name!r} line {line_no}: expected pattern<TAB>replacement")
        pattern, replacement = line.split('\t', 1)
        try:
            regex = re.compile(pattern)
        except re.error as e:
            raise ValueError(f"Rule table {name!r} line {line_no}: bad pattern {pattern!r}: {e}") from e
        rules.append(G2PRule(pattern=pattern, replacement=replacement.strip(), regex=regex))
    return G2PRuleTable(name=name, rules=tuple(rules))


def load_rule_table(path: str, name: Optional[str] = None) -> G2PRuleTable:
    with open(path, 'r', encoding='utf-8') as f:
        table = parse_rule_table(f.read(), name or path)
    table.check_total()
    logger.debug(f"Loaded {len(table.rules)} G2P rules from {path}")
    return table


def _packaged_table(rep: Representation) -> G2PRuleTable:
    filename = f"g2p_{rep.value}.tsv"
    text = resources.files('asr_correction_core.data').joinpath(filename).read_text(encoding='utf-8')
    return parse_rule_table(text, filename)


class Phonemizer:
    """
    Converts normalized text into a phonetic string.

    Tables default to the packaged Mexican Spanish ones; pass paths to use
    other dialects. Word results are memoized per representation.
    """

    def __init__(self, ipa_rules_path: Optional[str] = None, wbet_rules_path: Optional[str] = None):
        self.tables: Dict[Representation, G2PRuleTable] = {
            Representation.IPA: (load_rule_table(ipa_rules_path, 'ipa') if ipa_rules_path
                                 else _packaged_table(Representation.IPA)),
            Representation.WBET: (load_rule_table(wbet_rules_path, 'wbet') if wbet_rules_path
                                  else _packaged_table(Representation.WBET)),
        }
        self._word_cache: Dict[Tuple[Representation, str], str] = {}

    def phonemize_word(self, word: str, rep: Representation) -> str:
        key = (rep, word)
        cached = self._word_cache.get(key)
        if cached is not None:
            return cached
        phones = self.tables[rep].transduce_word(word)
        # an all-silent word ("h") keeps its spelling so the token count is preserved
        result = phones or word
        self._word_cache[key] = result
        return result

    def phonemize(self, text: str, rep: Representation) -> str:
        """
        Transduce normalized text into the given representation.

        Args:
            text: Normalizer output
            rep: Target representation

        Returns:
            Phonetic string with the same space-separated token count as the input
        """
        rep = Representation(rep)
        if rep is Representation.PLAIN or not text:
            return text
        return " ".join(self.phonemize_word(word, rep) for word in text.split(" "))


@lru_cache(maxsize=1)
def default_phonemizer() -> Phonemizer:
    return Phonemizer()


def phonemize(text: str, rep: Representation) -> str:
    """Transduce normalized text with the packaged rule tables."""
    return default_phonemizer().phonemize(text, rep)
