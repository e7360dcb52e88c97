"""
Phonetic correction (PhoCo).

The hypothesis and every context phrase are transduced into the chosen
representation; hypothesis segments are scored against the phrases with the
normalized Levenshtein distance and segments under the threshold are replaced
by their phrase. Two segment selectors exist: ``win`` slides token windows,
``let`` grows character segments from every token start.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from asr_correction_core.core.distance import normalized_distance
from asr_correction_core.core.normalizer import NormRules, normalize
from asr_correction_core.core.phonetics import Phonemizer, Representation, default_phonemizer

logger = logging.getLogger(__name__)

DEFAULT_WINDOW_SLACK = 1
DEFAULT_LET_SLACK = 3


class Selector(str, Enum):
    """Candidate segment selection strategy."""
    WIN = 'win'
    LET = 'let'

    @property
    def token(self) -> str:
        return f"SEL_{self.name}"


@dataclass(frozen=True)
class PhocoConfig:
    """Corrector hyperparameters."""
    threshold: float
    rep: Representation = Representation.IPA
    selector: Selector = Selector.WIN

    def __post_init__(self):
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError(f"threshold must lie in [0, 1], got {self.threshold}")
        object.__setattr__(self, 'rep', Representation(self.rep))
        object.__setattr__(self, 'selector', Selector(self.selector))


@dataclass(frozen=True)
class ScoredCandidate:
    """A hypothesis token span scored against one context phrase."""
    start: int
    end: int
    phrase: str
    distance: float


@dataclass(frozen=True)
class Replacement:
    """An accepted substitution of tokens [start_token, end_token) by a phrase."""
    start_token: int
    end_token: int
    phrase: str
    distance: float


class Context:
    """
    Domain phrases eligible as replacements, with their phonetic forms.

    Phonetic forms are computed for every representation at construction and
    never change afterwards. The slacks set how far segment widths may stray
    from a phrase's size: ``window_slack`` tokens for ``win`` and
    ``let_slack`` characters for ``let``.
    """

    def __init__(self, phrases: Iterable[str], phonemizer: Optional[Phonemizer] = None,
                 window_slack: int = DEFAULT_WINDOW_SLACK, let_slack: int = DEFAULT_LET_SLACK):
        if window_slack < 0 or let_slack < 0:
            raise ValueError(f"Slacks must be non-negative, got window {window_slack}, let {let_slack}")
        self.window_slack = window_slack
        self.let_slack = let_slack
        phrases = tuple(phrases)
        for phrase in phrases:
            if not phrase or phrase != " ".join(phrase.split()):
                raise ValueError(f"Context phrase is not normalized: {phrase!r}")
        self.phrases: Tuple[str, ...] = phrases
        self.phonemizer = phonemizer or default_phonemizer()
        self._phonetic: Dict[Representation, Tuple[str, ...]] = {
            rep: tuple(self.phonemizer.phonemize(p, rep) for p in phrases)
            for rep in Representation
        }

    @classmethod
    def from_file(cls, path: str, rules: Optional[NormRules] = None,
                  phonemizer: Optional[Phonemizer] = None, window_slack: int = DEFAULT_WINDOW_SLACK,
                  let_slack: int = DEFAULT_LET_SLACK) -> 'Context':
        """Read one phrase per line; blank lines and ``#`` comments are skipped."""
        phrases = []
        with open(path, 'r', encoding='utf-8') as f:
            for raw in f:
                line = raw.strip()
                if not line or line.startswith('#'):
                    continue
                phrase = normalize(line, rules)
                if phrase and phrase not in phrases:
                    phrases.append(phrase)
        logger.info(f"Loaded {len(phrases)} context phrases from {path}")
        return cls(phrases, phonemizer, window_slack, let_slack)

    def phonetic(self, rep: Representation) -> Tuple[str, ...]:
        return self._phonetic[Representation(rep)]

    def __len__(self) -> int:
        return len(self.phrases)

    def __iter__(self):
        return iter(self.phrases)


def _window_widths(n_tokens: int, slack: int) -> List[int]:
    return sorted({w for w in range(n_tokens - slack, n_tokens + slack + 1) if w >= 1})


def score_windows(hypothesis: str, ctx: Context, rep: Representation,
                  slack: Optional[int] = None) -> List[ScoredCandidate]:
    """
    Score every token window of width n-slack..n+slack against each n-token
    phrase; slack defaults to the context's ``window_slack``.
    """
    if not hypothesis or not len(ctx):
        return []
    slack = ctx.window_slack if slack is None else slack
    phon_tokens = ctx.phonemizer.phonemize(hypothesis, rep).split(" ")
    scored = []
    for phrase, phrase_phon in zip(ctx.phrases, ctx.phonetic(rep)):
        for width in _window_widths(len(phrase.split(" ")), slack):
            for start in range(len(phon_tokens) - width + 1):
                segment = " ".join(phon_tokens[start:start + width])
                scored.append(ScoredCandidate(start, start + width, phrase,
                                              normalized_distance(segment, phrase_phon)))
    return scored


def score_letters(hypothesis: str, ctx: Context, rep: Representation,
                  slack: Optional[int] = None) -> List[ScoredCandidate]:
    """
    Grow a character segment from every token start, one character at a time,
    up to the phrase's phonetic length plus slack. The best prefix per
    (start, phrase) is snapped forward to the end of its last token and
    rescored on the resulting token span. Slack defaults to the context's
    ``let_slack``.
    """
    if not hypothesis or not len(ctx):
        return []
    slack = ctx.let_slack if slack is None else slack
    phon = ctx.phonemizer.phonemize(hypothesis, rep)
    phon_tokens = phon.split(" ")

    # character offset of each token start, and token index of each character
    token_of_char = []
    starts = []
    for index, token in enumerate(phon_tokens):
        starts.append(len(token_of_char))
        token_of_char.extend([index] * len(token))
        if index < len(phon_tokens) - 1:
            token_of_char.append(-1)  # separator

    scored = []
    for phrase, phrase_phon in zip(ctx.phrases, ctx.phonetic(rep)):
        limit = len(phrase_phon) + slack
        for start_token, s in enumerate(starts):
            best_len, best = 0, None
            for k in range(1, min(limit, len(phon) - s) + 1):
                d = normalized_distance(phon[s:s + k], phrase_phon)
                if best is None or d < best:
                    best_len, best = k, d
            if best is None:
                continue
            last = s + best_len - 1
            if token_of_char[last] == -1:
                last -= 1
            end_token = token_of_char[last] + 1
            span = " ".join(phon_tokens[start_token:end_token])
            scored.append(ScoredCandidate(start_token, end_token, phrase,
                                          normalized_distance(span, phrase_phon)))
    return scored


def score_candidates(hypothesis: str, ctx: Context, rep: Representation, selector: Selector,
                     window_slack: Optional[int] = None,
                     let_slack: Optional[int] = None) -> List[ScoredCandidate]:
    """Score all spans for one selector; the result does not depend on the threshold."""
    if Selector(selector) is Selector.WIN:
        return score_windows(hypothesis, ctx, rep, window_slack)
    return score_letters(hypothesis, ctx, rep, let_slack)


def _qualifying(scored: Iterable[ScoredCandidate], threshold: float) -> List[ScoredCandidate]:
    return [c for c in scored if c.distance <= threshold]


def win_candidates(hypothesis: str, ctx: Context, cfg: PhocoConfig) -> List[ScoredCandidate]:
    """Sliding-window candidates whose distance is within the threshold."""
    return _qualifying(score_windows(hypothesis, ctx, cfg.rep), cfg.threshold)


def let_candidates(hypothesis: str, ctx: Context, cfg: PhocoConfig) -> List[ScoredCandidate]:
    """Incremental-by-character candidates whose distance is within the threshold."""
    return _qualifying(score_letters(hypothesis, ctx, cfg.rep), cfg.threshold)


def resolve_overlaps(candidates: Iterable[ScoredCandidate]) -> List[Replacement]:
    """
    Greedy non-overlapping selection.

    Candidates are taken by ascending distance, then wider span, then earlier
    start, then phrase; one is kept only if it overlaps nothing kept so far.
    The result is sorted by start token.
    """
    ordered = sorted(candidates, key=lambda c: (c.distance, -(c.end - c.start), c.start, c.phrase))
    kept: List[ScoredCandidate] = []
    for cand in ordered:
        if all(cand.end <= k.start or cand.start >= k.end for k in kept):
            kept.append(cand)
    kept.sort(key=lambda c: c.start)
    return [Replacement(c.start, c.end, c.phrase, c.distance) for c in kept]


def apply_replacements(hypothesis: str, replacements: Sequence[Replacement]) -> str:
    """Substitute each span right to left."""
    tokens = hypothesis.split(" ") if hypothesis else []
    for rep in sorted(replacements, key=lambda r: r.start_token, reverse=True):
        tokens[rep.start_token:rep.end_token] = rep.phrase.split(" ")
    return " ".join(tokens)


def correct_scored(hypothesis: str, scored: Sequence[ScoredCandidate],
                   threshold: float) -> Tuple[str, List[Replacement]]:
    """Finish a correction from precomputed scores at one threshold."""
    replacements = resolve_overlaps(_qualifying(scored, threshold))
    return apply_replacements(hypothesis, replacements), replacements


def correct(hypothesis: str, ctx: Context, cfg: PhocoConfig) -> Tuple[str, List[Replacement]]:
    """
    Run PhoCo on one normalized hypothesis.

    Args:
        hypothesis: Normalizer output
        ctx: Domain context
        cfg: Threshold, representation and selector

    Returns:
        (corrected text, replacements sorted by start token)
    """
    scored = score_candidates(hypothesis, ctx, cfg.rep, cfg.selector)
    return correct_scored(hypothesis, scored, cfg.threshold)
