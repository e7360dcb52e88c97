"""
Marshmallow schemas for the line-delimited corpus, candidate, report and
metrics records.
"""

from marshmallow import Schema, fields, validate, validates_schema, post_load, pre_dump, ValidationError

from asr_correction_core.core.config import OptionNames
from asr_correction_core.core.dataset import CorrectionCandidate, Utterance
from asr_correction_core.core.phoco import PhocoConfig

REPRESENTATIONS = [OptionNames.REP_PLAIN, OptionNames.REP_IPA, OptionNames.REP_WBET]
SELECTORS = [OptionNames.SEL_WIN, OptionNames.SEL_LET]
SOURCES = [OptionNames.HYP_WITH_CONTEXT, OptionNames.HYP_WITHOUT_CONTEXT]


class UtteranceSchema(Schema):
    """Schema for corpus records."""
    id = fields.String(required=True)
    reference = fields.String(required=True, validate=validate.Length(min=1))
    hyp_with_context = fields.String(required=True)
    hyp_without_context = fields.String(required=True)

    @post_load
    def make_utterance(self, data, **kwargs):
        return Utterance(**data)


class PhocoConfigSchema(Schema):
    """Schema for corrector settings."""
    threshold = fields.Float(required=True, validate=validate.Range(min=0.0, max=1.0))
    rep = fields.String(required=True, validate=validate.OneOf(REPRESENTATIONS))
    selector = fields.String(required=True, validate=validate.OneOf(SELECTORS))

    @pre_dump
    def from_config(self, cfg, **kwargs):
        if isinstance(cfg, PhocoConfig):
            return {'threshold': cfg.threshold, 'rep': cfg.rep.value, 'selector': cfg.selector.value}
        return cfg

    @post_load
    def make_config(self, data, **kwargs):
        return PhocoConfig(**data)


class CandidateSchema(Schema):
    """Schema for augmented candidate records."""
    id = fields.String(required=True)
    reference = fields.String(required=True, validate=validate.Length(min=1))
    hyp_with_context = fields.String(required=True)
    hyp_without_context = fields.String(required=True)
    cfg = fields.Nested(PhocoConfigSchema, required=True)
    source_hyp = fields.String(required=True, validate=validate.OneOf(SOURCES))
    candidate = fields.String(required=True)
    wer_hyp = fields.Float(required=True, validate=validate.Range(min=0.0))
    wer_cand = fields.Float(required=True, validate=validate.Range(min=0.0))
    label = fields.Integer(required=True, validate=validate.OneOf([0, 1]))

    @pre_dump
    def flatten(self, cand, **kwargs):
        if isinstance(cand, CorrectionCandidate):
            utt = cand.utterance
            return {
                'id': utt.id, 'reference': utt.reference,
                'hyp_with_context': utt.hyp_with_context, 'hyp_without_context': utt.hyp_without_context,
                'cfg': cand.cfg, 'source_hyp': cand.source_hyp, 'candidate': cand.candidate,
                'wer_hyp': cand.wer_hyp, 'wer_cand': cand.wer_cand, 'label': cand.label,
            }
        return cand

    @validates_schema
    def check_label(self, data, **kwargs):
        if data['label'] != int(data['wer_cand'] < data['wer_hyp']):
            raise ValidationError("label must be 1 exactly when wer_cand < wer_hyp", field_name='label')

    @post_load
    def make_candidate(self, data, **kwargs):
        utterance = Utterance(id=data['id'], reference=data['reference'],
                              hyp_with_context=data['hyp_with_context'],
                              hyp_without_context=data['hyp_without_context'])
        return CorrectionCandidate(utterance=utterance, source_hyp=data['source_hyp'], cfg=data['cfg'],
                                   candidate=data['candidate'], wer_hyp=data['wer_hyp'],
                                   wer_cand=data['wer_cand'], label=data['label'])


class ReportRowSchema(Schema):
    """Schema for machine-readable report rows."""
    kind = fields.String(required=True, validate=validate.OneOf(['threshold', 'average']))
    gate = fields.String(required=True)
    threshold = fields.Float(allow_none=True)
    baseline_asr_wer = fields.Float(required=True)
    phoco_wer = fields.Float(required=True)
    hybrid_wer = fields.Float(required=True)
    rel_vs_asr = fields.Float(allow_none=True)
    rel_vs_phoco = fields.Float(allow_none=True)
    n_candidates = fields.Integer(required=True)


class ClassMetricsSchema(Schema):
    precision = fields.Float(required=True)
    recall = fields.Float(required=True)
    f1 = fields.Float(required=True)
    support = fields.Integer(required=True)


class GateMetricsSchema(Schema):
    """Schema for classifier evaluation metrics."""
    per_class = fields.Dict(keys=fields.String(), values=fields.Nested(ClassMetricsSchema), required=True)
    macro_precision = fields.Float(required=True)
    macro_recall = fields.Float(required=True)
    macro_f1 = fields.Float(required=True)
    accuracy = fields.Float(required=True)
    auc = fields.Float(allow_none=True)
    n = fields.Integer(required=True)

    @pre_dump
    def stringify_classes(self, metrics, **kwargs):
        return {
            'per_class': {str(label): vars(m) for label, m in metrics.per_class.items()},
            'macro_precision': metrics.macro_precision, 'macro_recall': metrics.macro_recall,
            'macro_f1': metrics.macro_f1, 'accuracy': metrics.accuracy, 'auc': metrics.auc, 'n': metrics.n,
        }
