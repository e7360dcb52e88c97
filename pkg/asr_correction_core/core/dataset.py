"""
Corpus model, candidate augmentation grid, labeling and splits, plus a
synthetic noisy-corpus generator standing in for recorded ASR output.
"""

import json
import logging
import time
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from asr_correction_core.core.config import OptionNames
from asr_correction_core.core.distance import normalized_distance, wer
from asr_correction_core.core.errors import EmptyDatasetError
from asr_correction_core.core.normalizer import LETTERS, NormRules, normalize
from asr_correction_core.core.phoco import Context, PhocoConfig, Selector, correct_scored, score_candidates
from asr_correction_core.core.phonetics import Representation

logger = logging.getLogger(__name__)

# 0.05 .. 0.60; 0.0 is left out so that 12 x 3 x 2 x 2 = 144 candidates per utterance
THRESHOLD_GRID: Tuple[float, ...] = tuple(round(0.05 * k, 2) for k in range(1, 13))
HYPOTHESIS_SOURCES: Tuple[str, ...] = (OptionNames.HYP_WITH_CONTEXT, OptionNames.HYP_WITHOUT_CONTEXT)

SPLIT_RATIOS = (0.8, 0.1)


@dataclass(frozen=True)
class Utterance:
    """One audio: human reference plus the two ASR hypotheses."""
    id: str
    reference: str
    hyp_with_context: str
    hyp_without_context: str

    def __post_init__(self):
        if not self.reference:
            raise ValueError(f"Utterance {self.id!r} has an empty reference")

    def hypothesis(self, source: str) -> str:
        if source == OptionNames.HYP_WITH_CONTEXT:
            return self.hyp_with_context
        if source == OptionNames.HYP_WITHOUT_CONTEXT:
            return self.hyp_without_context
        raise ValueError(f"Unknown hypothesis source: {source!r}")


@dataclass(frozen=True)
class CorrectionCandidate:
    """A PhoCo proposal for one hypothesis under one configuration, with its label."""
    utterance: Utterance
    source_hyp: str
    cfg: PhocoConfig
    candidate: str
    wer_hyp: float
    wer_cand: float
    label: int

    def __post_init__(self):
        if self.label != int(self.wer_cand < self.wer_hyp):
            raise ValueError(f"Label {self.label} inconsistent with WERs "
                             f"{self.wer_cand} (candidate) vs {self.wer_hyp} (hypothesis)")

    @property
    def utterance_id(self) -> str:
        return self.utterance.id

    @property
    def hypothesis(self) -> str:
        return self.utterance.hypothesis(self.source_hyp)

    @property
    def changed(self) -> bool:
        return self.candidate != self.hypothesis


def label_for(wer_hyp: float, wer_cand: float) -> int:
    """1 when the proposed correction lowers the WER."""
    return int(wer_cand < wer_hyp)


def augment(utterances: Sequence[Utterance], ctx: Context,
            thresholds: Sequence[float] = THRESHOLD_GRID,
            reps: Sequence[Representation] = tuple(Representation),
            selectors: Sequence[Selector] = tuple(Selector)) -> List[CorrectionCandidate]:
    """
    Run PhoCo over the full configuration grid and label every proposal.

    Scores are computed once per (utterance, hypothesis, representation,
    selector) and reused for every threshold.

    Returns:
        len(thresholds) * len(reps) * len(selectors) * 2 candidates per utterance
    """
    started = time.time()
    candidates: List[CorrectionCandidate] = []
    for count, utt in enumerate(utterances, start=1):
        ref_tokens = utt.reference.split()
        for source in HYPOTHESIS_SOURCES:
            hyp = utt.hypothesis(source)
            wer_hyp = wer(ref_tokens, hyp.split()).wer
            cand_wers: Dict[str, float] = {hyp: wer_hyp}
            for rep in reps:
                for selector in selectors:
                    scored = score_candidates(hyp, ctx, rep, selector)
                    for threshold in thresholds:
                        text, _ = correct_scored(hyp, scored, threshold)
                        if text not in cand_wers:
                            cand_wers[text] = wer(ref_tokens, text.split()).wer
                        wer_cand = cand_wers[text]
                        candidates.append(CorrectionCandidate(
                            utterance=utt,
                            source_hyp=source,
                            cfg=PhocoConfig(threshold=threshold, rep=rep, selector=selector),
                            candidate=text,
                            wer_hyp=wer_hyp,
                            wer_cand=wer_cand,
                            label=label_for(wer_hyp, wer_cand),
                        ))
        if count % 50 == 0:
            logger.info(f"Augmented {count}/{len(utterances)} utterances")

    positives = sum(c.label for c in candidates)
    logger.info(f"Generated {len(candidates)} candidates ({positives} positive) "
                f"from {len(utterances)} utterances in {time.time() - started:.1f}s")
    return candidates


def split(candidates: Sequence, seed: int) -> Tuple[list, list, list]:
    """
    Random 80/10/10 partition by candidate.

    Sizes are floor(0.8 n), floor(0.1 n) and the remainder.
    """
    n = len(candidates)
    if n == 0:
        raise EmptyDatasetError("Cannot split an empty candidate list")
    n_train = int(np.floor(SPLIT_RATIOS[0] * n))
    n_val = int(np.floor(SPLIT_RATIOS[1] * n))
    order = np.random.default_rng(seed).permutation(n)
    train = [candidates[i] for i in order[:n_train]]
    validation = [candidates[i] for i in order[n_train:n_train + n_val]]
    test = [candidates[i] for i in order[n_train + n_val:]]
    return train, validation, test


def _single_edits(word: str) -> set:
    """All strings one delete, transpose, replace or insert away from word."""
    letters = sorted(LETTERS)
    splits = [(word[:i], word[i:]) for i in range(len(word) + 1)]
    deletes = [left + right[1:] for left, right in splits if right]
    transposes = [left + right[1] + right[0] + right[2:] for left, right in splits if len(right) > 1]
    replaces = [left + c + right[1:] for left, right in splits if right for c in letters]
    inserts = [left + c + right for left, right in splits for c in letters]
    return set(w for w in deletes + transposes + replaces + inserts if w)


class ConfusionChannel:
    """
    Token-level ASR error simulator.

    A token's confusions are the lexicon words and single-edit variants whose
    IPA form lies within ``max_distance`` of the token's IPA form.
    """

    def __init__(self, lexicon: Iterable[str], ctx: Context, max_distance: float = 0.34):
        self.lexicon = sorted(set(lexicon))
        self.ctx = ctx
        self.max_distance = max_distance
        self._confusions: Dict[str, List[str]] = {}

    def confusions(self, token: str) -> List[str]:
        cached = self._confusions.get(token)
        if cached is not None:
            return cached
        phonemizer = self.ctx.phonemizer
        target = phonemizer.phonemize(token, Representation.IPA)
        pool = set(self.lexicon) | _single_edits(token)
        pool.discard(token)
        near = sorted(w for w in pool
                      if normalized_distance(phonemizer.phonemize(w, Representation.IPA), target)
                      <= self.max_distance)
        self._confusions[token] = near
        return near

    def corrupt(self, tokens: Sequence[str], noise_rate: float, rng: np.random.Generator) -> List[str]:
        out = []
        for token in tokens:
            # two draws per token whatever happens, so rates share one random stream
            hit, pick = rng.random(), rng.random()
            if hit < noise_rate:
                options = self.confusions(token)
                out.append(options[int(pick * len(options))] if options else token + token[-1])
            else:
                out.append(token)
        return out


def synthesize_corpus(clean_sentences: Sequence[str], ctx: Context, noise_rate: float, seed: int,
                      rules: Optional[NormRules] = None, max_confusion_distance: float = 0.34,
                      lexicon: Optional[Iterable[str]] = None) -> List[Utterance]:
    """
    Build utterances whose hypotheses pass the references through a
    phonetic confusion channel.

    Args:
        clean_sentences: Raw reference sentences (normalized here)
        ctx: Domain context; its words join the confusion lexicon
        noise_rate: Per-token corruption probability in [0, 1]
        seed: Random seed

    Returns:
        One Utterance per sentence that is non-empty after normalization
    """
    if not 0.0 <= noise_rate <= 1.0:
        raise ValueError(f"noise_rate must lie in [0, 1], got {noise_rate}")

    references = []
    for sentence in clean_sentences:
        ref = normalize(sentence, rules)
        if ref:
            references.append(ref)
        else:
            logger.warning(f"Skipping sentence that normalizes to nothing: {sentence!r}")

    words = set(lexicon or [])
    for text in list(references) + list(ctx.phrases):
        words.update(text.split())
    channel = ConfusionChannel(words, ctx, max_confusion_distance)

    rng = np.random.default_rng(seed)
    utterances = []
    for index, ref in enumerate(references):
        tokens = ref.split()
        with_context = " ".join(channel.corrupt(tokens, noise_rate, rng))
        without_context = " ".join(channel.corrupt(tokens, noise_rate, rng))
        utterances.append(Utterance(id=f"utt-{index:05d}", reference=ref,
                                    hyp_with_context=with_context,
                                    hyp_without_context=without_context))
    logger.info(f"Synthesized {len(utterances)} utterances at noise rate {noise_rate}")
    return utterances


def load_sentences(path: str) -> List[str]:
    """Read one raw sentence per line, skipping blanks and ``#`` comments."""
    with open(path, 'r', encoding='utf-8') as f:
        return [line.strip() for line in f if line.strip() and not line.lstrip().startswith('#')]


def load_context(path: str, rules: Optional[NormRules] = None) -> Context:
    return Context.from_file(path, rules)


def _write_jsonl(rows: Iterable[dict], path: str):
    with open(path, 'w', encoding='utf-8') as f:
        for row in rows:
            f.write(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n")


def _read_jsonl(path: str, schema) -> list:
    from marshmallow import ValidationError

    records = []
    with open(path, 'r', encoding='utf-8') as f:
        for line_no, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                records.append(schema.load(json.loads(line)))
            except json.JSONDecodeError as e:
                raise ValidationError(f"{path}:{line_no}: not valid JSON: {e}") from e
            except ValidationError as e:
                raise ValidationError(f"{path}:{line_no}: {e.messages}") from e
    return records


def save_corpus(utterances: Iterable[Utterance], path: str):
    from asr_correction_core.core.schemas import UtteranceSchema
    _write_jsonl(UtteranceSchema().dump(utterances, many=True), path)


def load_corpus(path: str) -> List[Utterance]:
    from asr_correction_core.core.schemas import UtteranceSchema
    return _read_jsonl(path, UtteranceSchema())


def save_candidates(candidates: Iterable[CorrectionCandidate], path: str):
    from asr_correction_core.core.schemas import CandidateSchema
    _write_jsonl(CandidateSchema().dump(candidates, many=True), path)


def load_candidates(path: str) -> List[CorrectionCandidate]:
    from asr_correction_core.core.schemas import CandidateSchema
    return _read_jsonl(path, CandidateSchema())
