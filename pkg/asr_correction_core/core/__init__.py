"""
Core module containing the correction pipeline stages.
"""

from .config import CorrectionFrameworkConfig, OptionNames, get_config, set_config_file
from .errors import (
    PhocoError, NumberRangeError, EmptyReferenceError, G2PCoverageError,
    TrainingDivergedError, ModelFormatError, EmptyDatasetError, InvalidReductionBaseError
)
from .normalizer import NormRules, normalize, number_to_words, load_norm_rules
from .phonetics import Representation, Phonemizer, phonemize
from .distance import WerBreakdown, levenshtein, normalized_distance, wer
from .phoco import (
    Selector, PhocoConfig, Context, Replacement, ScoredCandidate,
    win_candidates, let_candidates, resolve_overlaps, correct
)
from .dataset import (
    Utterance, CorrectionCandidate, THRESHOLD_GRID, augment, split, synthesize_corpus,
    load_sentences, load_context, save_corpus, load_corpus, save_candidates, load_candidates
)
from .neural_gate import (
    Vocabulary, GateModel, TrainConfig, TrainingHistory, GateMetrics,
    encode, forward, train, evaluate, save_model, load_model
)
from .hybrid_eval import (
    EvalReport, NeuralGate, OracleGate, ConstantGate,
    hybrid_correct, relative_reduction, build_report
)

__all__ = [
    'CorrectionFrameworkConfig',
    'OptionNames',
    'get_config',
    'set_config_file',
    # Errors
    'PhocoError', 'NumberRangeError', 'EmptyReferenceError', 'G2PCoverageError',
    'TrainingDivergedError', 'ModelFormatError', 'EmptyDatasetError', 'InvalidReductionBaseError',
    # Text and phonetics
    'NormRules', 'normalize', 'number_to_words', 'load_norm_rules',
    'Representation', 'Phonemizer', 'phonemize',
    'WerBreakdown', 'levenshtein', 'normalized_distance', 'wer',
    # Corrector
    'Selector', 'PhocoConfig', 'Context', 'Replacement', 'ScoredCandidate',
    'win_candidates', 'let_candidates', 'resolve_overlaps', 'correct',
    # Dataset
    'Utterance', 'CorrectionCandidate', 'THRESHOLD_GRID', 'augment', 'split', 'synthesize_corpus',
    'load_sentences', 'load_context', 'save_corpus', 'load_corpus', 'save_candidates', 'load_candidates',
    # Gate
    'Vocabulary', 'GateModel', 'TrainConfig', 'TrainingHistory', 'GateMetrics',
    'encode', 'forward', 'train', 'evaluate', 'save_model', 'load_model',
    # Evaluation
    'EvalReport', 'NeuralGate', 'OracleGate', 'ConstantGate',
    'hybrid_correct', 'relative_reduction', 'build_report'
]
