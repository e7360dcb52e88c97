"""
Edit-distance primitives: character Levenshtein, normalized phonetic distance
and word error rate with its substitution/deletion/insertion breakdown.
"""

from dataclasses import dataclass
from typing import Sequence

import editdistance

from asr_correction_core.core.errors import EmptyReferenceError


@dataclass(frozen=True)
class WerBreakdown:
    """Error counts of a minimal token alignment."""
    substitutions: int
    deletions: int
    insertions: int
    ref_len: int

    @property
    def errors(self) -> int:
        return self.substitutions + self.deletions + self.insertions

    @property
    def wer(self) -> float:
        return self.errors / self.ref_len


def levenshtein(a: Sequence, b: Sequence) -> int:
    """Unit-cost edit distance between two strings (or two token sequences)."""
    return int(editdistance.eval(a, b))


def normalized_distance(a: str, b: str) -> float:
    """Levenshtein distance divided by the longer length; 0.0 for two empty strings."""
    longest = max(len(a), len(b))
    if longest == 0:
        return 0.0
    return levenshtein(a, b) / longest


def wer(reference: Sequence[str], hypothesis: Sequence[str]) -> WerBreakdown:
    """
    Align two token sequences and count the edit operations.

    Ties in the backtrace prefer substitution, then deletion, then insertion.

    Args:
        reference: Reference tokens, at least one
        hypothesis: Hypothesis tokens

    Returns:
        WerBreakdown; its wer may exceed 1.0 when the hypothesis has insertions
    """
    n, m = len(reference), len(hypothesis)
    if n == 0:
        raise EmptyReferenceError("WER is undefined for an empty reference")

    d = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n + 1):
        d[i][0] = i
    for j in range(m + 1):
        d[0][j] = j
    for i in range(1, n + 1):
        row, prev = d[i], d[i - 1]
        r = reference[i - 1]
        for j in range(1, m + 1):
            cost = 0 if r == hypothesis[j - 1] else 1
            row[j] = min(prev[j - 1] + cost, prev[j] + 1, row[j - 1] + 1)

    subs = dels = ins = 0
    i, j = n, m
    while i > 0 or j > 0:
        if i > 0 and j > 0:
            cost = 0 if reference[i - 1] == hypothesis[j - 1] else 1
            if d[i][j] == d[i - 1][j - 1] + cost:
                subs += cost
                i, j = i - 1, j - 1
                continue
        if i > 0 and d[i][j] == d[i - 1][j] + 1:
            dels += 1
            i -= 1
        else:
            ins += 1
            j -= 1

    return WerBreakdown(substitutions=subs, deletions=dels, insertions=ins, ref_len=n)
