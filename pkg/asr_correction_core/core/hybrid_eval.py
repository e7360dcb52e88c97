"""
Hybrid phonetic-neural correction and the per-threshold evaluation report.

A PhoCo proposal is applied only when the gate's probability is strictly
greater than 0.5; otherwise the ASR hypothesis is kept.
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd

from asr_correction_core.core.errors import EmptyDatasetError, InvalidReductionBaseError
from asr_correction_core.core.neural_gate import GateModel, Vocabulary, encode_batch, encode_pair, forward, predict_proba
from asr_correction_core.core.phoco import Context, PhocoConfig, Replacement, correct

logger = logging.getLogger(__name__)

ACCEPT_ABOVE = 0.5


@dataclass(frozen=True)
class HybridDecision:
    text: str
    candidate: str
    probability: Optional[float]
    replacements: List[Replacement]

    @property
    def accepted(self) -> bool:
        return self.probability is not None and self.probability > ACCEPT_ABOVE


def hybrid_decide(hypothesis: str, ctx: Context, cfg: PhocoConfig, model: GateModel,
                  vocab: Vocabulary) -> HybridDecision:
    """Run PhoCo and consult the gate only when PhoCo changed something."""
    candidate, replacements = correct(hypothesis, ctx, cfg)
    if candidate == hypothesis:
        return HybridDecision(hypothesis, candidate, None, replacements)
    probability = forward(model, encode_pair(hypothesis, candidate, cfg, vocab, model.max_seq_len))
    text = candidate if probability > ACCEPT_ABOVE else hypothesis
    return HybridDecision(text, candidate, probability, replacements)


def hybrid_correct(hypothesis: str, ctx: Context, cfg: PhocoConfig, model: GateModel,
                   vocab: Vocabulary) -> str:
    """
    Hybrid algorithm on one normalized hypothesis.

    Returns:
        The PhoCo candidate if the gate accepts it, otherwise the hypothesis
    """
    return hybrid_decide(hypothesis, ctx, cfg, model, vocab).text


def relative_reduction(base: float, improved: float) -> float:
    """(base - improved) / base; base must be positive."""
    if not base > 0:
        raise InvalidReductionBaseError(f"Relative reduction needs a positive base, got {base}")
    return (base - improved) / base


def _relative_or_none(base: float, improved: float) -> Optional[float]:
    return relative_reduction(base, improved) if base > 0 else None


class Gate(ABC):
    """Decides, for stored candidates, which proposals are applied."""
    name = 'gate'

    @abstractmethod
    def accept(self, candidates: Sequence) -> np.ndarray:
        """Boolean array, True where the candidate replaces the hypothesis."""


class NeuralGate(Gate):
    name = 'model'

    def __init__(self, model: GateModel, vocab: Vocabulary):
        self.model = model
        self.vocab = vocab

    def accept(self, candidates: Sequence) -> np.ndarray:
        decisions = np.zeros(len(candidates), dtype=bool)
        changed = [i for i, c in enumerate(candidates) if c.changed]
        if changed:
            X, _ = encode_batch([candidates[i] for i in changed], self.vocab, self.model.max_seq_len)
            decisions[changed] = predict_proba(self.model, X) > ACCEPT_ABOVE
        return decisions


class OracleGate(Gate):
    """Accepts exactly the candidates that lower the WER."""
    name = 'oracle'

    def accept(self, candidates: Sequence) -> np.ndarray:
        return np.array([c.label == 1 for c in candidates], dtype=bool)


class ConstantGate(Gate):
    def __init__(self, accept_all: bool):
        self.accept_all = accept_all
        self.name = 'accept' if accept_all else 'reject'

    def accept(self, candidates: Sequence) -> np.ndarray:
        return np.full(len(candidates), self.accept_all, dtype=bool)


@dataclass(frozen=True)
class ReportRow:
    threshold: Optional[float]
    phoco_wer: float
    hybrid_wer: float
    rel_vs_asr: Optional[float]
    rel_vs_phoco: Optional[float]
    n_candidates: int


@dataclass(frozen=True)
class EvalReport:
    """Per-threshold PhoCo and hybrid WERs against the ASR baseline."""
    gate: str
    baseline_asr_wer: float
    rows: List[ReportRow]
    averages: ReportRow
    best_threshold: float
    absolute_improvement: float

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([vars(row) for row in self.rows + [self.averages]])

    def to_text(self) -> str:
        def pct(value: Optional[float]) -> str:
            return 'n/a' if value is None else f"{100 * value:.1f}%"

        cells = [{
            'Threshold': 'Average' if row.threshold is None else f"{row.threshold:.2f}",
            'PhoCo WER': f"{row.phoco_wer:.3f}",
            'Hybrid WER': f"{row.hybrid_wer:.3f}",
            'Rel. vs ASR': pct(row.rel_vs_asr),
            'Rel. vs PhoCo': pct(row.rel_vs_phoco),
        } for row in self.rows + [self.averages]]
        table = pd.DataFrame(cells).to_string(index=False)
        best = next(row for row in self.rows if row.threshold == self.best_threshold)
        return (f"Gate: {self.gate}\n"
                f"Baseline ASR WER: {self.baseline_asr_wer:.3f}\n\n"
                f"{table}\n\n"
                f"Best threshold: {self.best_threshold:.2f} (hybrid WER {best.hybrid_wer:.3f}, "
                f"absolute improvement {self.absolute_improvement:.3f})\n")

    def to_records(self) -> List[dict]:
        from asr_correction_core.core.schemas import ReportRowSchema

        schema = ReportRowSchema()
        records = []
        for row in self.rows + [self.averages]:
            record = dict(vars(row), kind='average' if row.threshold is None else 'threshold',
                          gate=self.gate, baseline_asr_wer=self.baseline_asr_wer)
            records.append(schema.dump(record))
        return records


def _mean_or_none(values: Sequence[Optional[float]]) -> Optional[float]:
    present = [v for v in values if v is not None]
    return float(np.mean(present)) if present else None


def build_report(candidates: Sequence, gate: Gate) -> EvalReport:
    """
    Aggregate stored candidates per threshold under a gate.

    Each candidate contributes wer_cand when the gate accepts it and wer_hyp
    otherwise. The baseline pools the hypothesis WER of every candidate; the
    averages row is the unweighted mean of the threshold rows.
    """
    if not candidates:
        raise EmptyDatasetError("Cannot build a report from an empty candidate list")

    accepted = gate.accept(candidates)
    frame = pd.DataFrame({
        'threshold': [c.cfg.threshold for c in candidates],
        'wer_hyp': [c.wer_hyp for c in candidates],
        'wer_cand': [c.wer_cand for c in candidates],
    })
    frame['wer_hybrid'] = np.where(accepted, frame['wer_cand'], frame['wer_hyp'])
    baseline = float(frame['wer_hyp'].mean())

    grouped = frame.groupby('threshold', sort=True).agg(
        phoco_wer=('wer_cand', 'mean'), hybrid_wer=('wer_hybrid', 'mean'), n_candidates=('wer_cand', 'size'))
    rows = []
    for threshold, agg in grouped.iterrows():
        phoco, hybrid = float(agg['phoco_wer']), float(agg['hybrid_wer'])
        rows.append(ReportRow(threshold=float(threshold), phoco_wer=phoco, hybrid_wer=hybrid,
                              rel_vs_asr=_relative_or_none(baseline, hybrid),
                              rel_vs_phoco=_relative_or_none(phoco, hybrid),
                              n_candidates=int(agg['n_candidates'])))

    averages = ReportRow(
        threshold=None,
        phoco_wer=float(np.mean([r.phoco_wer for r in rows])),
        hybrid_wer=float(np.mean([r.hybrid_wer for r in rows])),
        rel_vs_asr=_mean_or_none([r.rel_vs_asr for r in rows]),
        rel_vs_phoco=_mean_or_none([r.rel_vs_phoco for r in rows]),
        n_candidates=len(candidates),
    )
    # min() keeps the first, i.e. lowest, threshold on ties
    best = min(rows, key=lambda r: r.hybrid_wer)
    report = EvalReport(gate=gate.name, baseline_asr_wer=baseline, rows=rows, averages=averages,
                        best_threshold=best.threshold, absolute_improvement=baseline - best.hybrid_wer)
    logger.info(f"Report over {len(candidates)} candidates with gate {gate.name}: baseline {baseline:.3f}, "
                f"best threshold {best.threshold:.2f} (hybrid {best.hybrid_wer:.3f})")
    return report
