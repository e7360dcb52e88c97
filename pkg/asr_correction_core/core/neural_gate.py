"""
Neural gate deciding whether a PhoCo correction is applied.

Architecture: token embedding -> LSTM -> masked temporal max pooling ->
dense ReLU -> sigmoid. Trained with binary cross-entropy and Adam, all in
numpy with hand-written backpropagation through time.

The input sequence is the ASR hypothesis, a separator, the proposed
correction, a separator and three configuration tokens (threshold bucket,
representation and selector).
"""

import json
import logging
import time
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.special import expit
from scipy.stats import rankdata

from asr_correction_core.core.errors import EmptyDatasetError, ModelFormatError, TrainingDivergedError
from asr_correction_core.core.phoco import PhocoConfig, Selector
from asr_correction_core.core.phonetics import Representation

logger = logging.getLogger(__name__)

PAD, UNK, SEP = 0, 1, 2
THRESHOLD_STEP = 0.05
THRESHOLD_BUCKETS = 12
CONFIG_TOKENS: Tuple[str, ...] = (
    tuple(f"THR_{k:02d}" for k in range(1, THRESHOLD_BUCKETS + 1))
    + tuple(rep.token for rep in Representation)
    + tuple(sel.token for sel in Selector)
)
RESERVED_TOKENS: Tuple[str, ...] = ("<pad>", "<unk>", "<sep>") + CONFIG_TOKENS

# tokens after the hypothesis: SEP, SEP and the three config tokens
FIXED_SLOTS = 5

PARAM_NAMES = ('embedding', 'W', 'U', 'b', 'W_dense', 'b_dense', 'W_out', 'b_out')
MODEL_FORMAT_VERSION = 1


class Vocabulary:
    """
    Token index. Reserved tokens come first (PAD=0, UNK=1, SEP=2, then the
    configuration tokens); words follow by descending training count, ties
    broken alphabetically.
    """

    def __init__(self, words: Iterable[str] = ()):
        self.tokens: List[str] = list(RESERVED_TOKENS)
        self._index: Dict[str, int] = {tok: i for i, tok in enumerate(self.tokens)}
        for word in words:
            if word not in self._index:
                self._index[word] = len(self.tokens)
                self.tokens.append(word)

    @classmethod
    def build(cls, texts: Iterable[str], min_count: int = 1) -> 'Vocabulary':
        counts = Counter(tok for text in texts for tok in text.split())
        ordered = sorted((w for w, c in counts.items() if c >= min_count), key=lambda w: (-counts[w], w))
        return cls(ordered)

    @classmethod
    def from_candidates(cls, candidates: Iterable) -> 'Vocabulary':
        """Words of every hypothesis and proposed correction."""
        texts = []
        for cand in candidates:
            texts.append(cand.hypothesis)
            texts.append(cand.candidate)
        return cls.build(texts)

    @classmethod
    def from_tokens(cls, tokens: Sequence[str]) -> 'Vocabulary':
        if tuple(tokens[:len(RESERVED_TOKENS)]) != RESERVED_TOKENS:
            raise ModelFormatError("Vocabulary does not start with the reserved tokens")
        return cls(tokens[len(RESERVED_TOKENS):])

    def index(self, token: str) -> int:
        return self._index.get(token, UNK)

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self._index

    def to_json(self) -> str:
        return json.dumps(self.tokens, ensure_ascii=False)

    @classmethod
    def from_json(cls, text: str) -> 'Vocabulary':
        return cls.from_tokens(json.loads(text))


def threshold_token(threshold: float) -> str:
    """Bucket a threshold onto THR_01 (0.05) .. THR_12 (0.60)."""
    k = int(round(threshold / THRESHOLD_STEP))
    return f"THR_{min(max(k, 1), THRESHOLD_BUCKETS):02d}"


def encode_pair(hypothesis: str, candidate: str, cfg: PhocoConfig, vocab: Vocabulary,
                max_seq_len: int) -> np.ndarray:
    """
    Index sequence for one (hypothesis, proposed correction, configuration).

    The hypothesis is truncated from the left when the sequence does not fit;
    the correction is only truncated (also from the left) once the hypothesis
    is gone.
    """
    if max_seq_len < FIXED_SLOTS:
        raise ValueError(f"max_seq_len must be at least {FIXED_SLOTS}, got {max_seq_len}")
    hyp_ids = [vocab.index(tok) for tok in hypothesis.split()]
    cand_ids = [vocab.index(tok) for tok in candidate.split()]
    config_ids = [vocab.index(threshold_token(cfg.threshold)), vocab.index(cfg.rep.token),
                  vocab.index(cfg.selector.token)]

    cand_budget = max_seq_len - FIXED_SLOTS
    if len(cand_ids) > cand_budget:
        cand_ids = cand_ids[len(cand_ids) - cand_budget:]
    hyp_budget = max_seq_len - FIXED_SLOTS - len(cand_ids)
    hyp_ids = hyp_ids[len(hyp_ids) - hyp_budget:] if len(hyp_ids) > hyp_budget else hyp_ids

    seq = hyp_ids + [SEP] + cand_ids + [SEP] + config_ids
    out = np.full(max_seq_len, PAD, dtype=np.int64)
    out[:len(seq)] = seq
    return out


def encode(candidate, vocab: Vocabulary, max_seq_len: int) -> np.ndarray:
    """Encode a CorrectionCandidate."""
    return encode_pair(candidate.hypothesis, candidate.candidate, candidate.cfg, vocab, max_seq_len)


def encode_batch(candidates: Sequence, vocab: Vocabulary, max_seq_len: int) -> Tuple[np.ndarray, np.ndarray]:
    """(sequences [n, max_seq_len], labels [n]) for a candidate list."""
    X = np.full((len(candidates), max_seq_len), PAD, dtype=np.int64)
    y = np.zeros(len(candidates), dtype=np.float64)
    for i, cand in enumerate(candidates):
        X[i] = encode(cand, vocab, max_seq_len)
        y[i] = cand.label
    return X, y


@dataclass
class GateModel:
    """Parameter blocks of the classifier, float64, keyed by PARAM_NAMES."""
    params: Dict[str, np.ndarray]
    max_seq_len: int = 64

    @property
    def vocab_size(self) -> int:
        return self.params['embedding'].shape[0]

    @property
    def embedding_dim(self) -> int:
        return self.params['embedding'].shape[1]

    @property
    def hidden_dim(self) -> int:
        return self.params['U'].shape[0]

    @property
    def dense_dim(self) -> int:
        return self.params['W_dense'].shape[1]

    def copy(self) -> 'GateModel':
        return GateModel({k: v.copy() for k, v in self.params.items()}, self.max_seq_len)


def expected_shapes(vocab_size: int, embedding_dim: int, hidden_dim: int, dense_dim: int) -> Dict[str, tuple]:
    return {
        'embedding': (vocab_size, embedding_dim),
        'W': (embedding_dim, 4 * hidden_dim),
        'U': (hidden_dim, 4 * hidden_dim),
        'b': (4 * hidden_dim,),
        'W_dense': (hidden_dim, dense_dim),
        'b_dense': (dense_dim,),
        'W_out': (dense_dim, 1),
        'b_out': (1,),
    }


def _glorot(rng: np.random.Generator, shape: tuple) -> np.ndarray:
    limit = np.sqrt(6.0 / (shape[0] + shape[1]))
    return rng.uniform(-limit, limit, size=shape)


def init_model(vocab_size: int, embedding_dim: int = 128, hidden_dim: int = 60, dense_dim: int = 50,
               max_seq_len: int = 64, rng: Optional[np.random.Generator] = None) -> GateModel:
    """
    Uniform(-0.05, 0.05) embeddings, Glorot-uniform matrices, zero biases
    except the forget gate bias which starts at 1.

    Gate blocks inside W, U and b are ordered input, forget, output, candidate.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    H = hidden_dim
    b = np.zeros(4 * H)
    b[H:2 * H] = 1.0
    params = {
        'embedding': rng.uniform(-0.05, 0.05, size=(vocab_size, embedding_dim)),
        'W': _glorot(rng, (embedding_dim, 4 * H)),
        'U': _glorot(rng, (H, 4 * H)),
        'b': b,
        'W_dense': _glorot(rng, (H, dense_dim)),
        'b_dense': np.zeros(dense_dim),
        'W_out': _glorot(rng, (dense_dim, 1)),
        'b_out': np.zeros(1),
    }
    return GateModel(params, max_seq_len)


def zeros_model(vocab_size: int, embedding_dim: int, hidden_dim: int, dense_dim: int,
                max_seq_len: int = 64) -> GateModel:
    shapes = expected_shapes(vocab_size, embedding_dim, hidden_dim, dense_dim)
    return GateModel({name: np.zeros(shape) for name, shape in shapes.items()}, max_seq_len)


def _forward(model: GateModel, X: np.ndarray, dropout: float = 0.0,
             rng: Optional[np.random.Generator] = None) -> Tuple[np.ndarray, dict]:
    """Batched forward pass returning logits [B] and the cache for backward."""
    p = model.params
    X = np.asarray(X, dtype=np.int64)
    if X.ndim == 1:
        X = X[None, :]
    B = X.shape[0]
    H = model.hidden_dim

    mask = X != PAD
    # PAD only follows the last real token, so later steps never reach the output
    has_tokens = mask.any(axis=1)
    T = int(np.max(np.where(mask, np.arange(X.shape[1])[None, :] + 1, 0))) if mask.any() else 0

    emb = p['embedding'][X[:, :T]]
    gates_i = np.zeros((B, T, H))
    gates_f = np.zeros((B, T, H))
    gates_o = np.zeros((B, T, H))
    gates_g = np.zeros((B, T, H))
    cells = np.zeros((B, T + 1, H))
    hidden = np.zeros((B, T + 1, H))

    for t in range(T):
        z = emb[:, t] @ p['W'] + hidden[:, t] @ p['U'] + p['b']
        i = expit(z[:, :H])
        f = expit(z[:, H:2 * H])
        o = expit(z[:, 2 * H:3 * H])
        g = np.tanh(z[:, 3 * H:])
        cells[:, t + 1] = f * cells[:, t] + i * g
        hidden[:, t + 1] = o * np.tanh(cells[:, t + 1])
        gates_i[:, t], gates_f[:, t], gates_o[:, t], gates_g[:, t] = i, f, o, g

    if T > 0:
        masked = np.where(mask[:, :T, None], hidden[:, 1:], -np.inf)
        argmax = masked.argmax(axis=1)
        pooled = np.take_along_axis(hidden[:, 1:], argmax[:, None, :], axis=1)[:, 0, :]
        pooled = np.where(has_tokens[:, None], pooled, 0.0)
    else:
        argmax = np.zeros((B, H), dtype=np.int64)
        pooled = np.zeros((B, H))

    pre_dense = pooled @ p['W_dense'] + p['b_dense']
    dense = np.maximum(pre_dense, 0.0)
    drop_mask = None
    if dropout > 0.0:
        rng = rng if rng is not None else np.random.default_rng()
        drop_mask = (rng.random(dense.shape) >= dropout) / (1.0 - dropout)
        dense = dense * drop_mask
    logits = (dense @ p['W_out'] + p['b_out'])[:, 0]

    cache = dict(X=X, T=T, emb=emb, i=gates_i, f=gates_f, o=gates_o, g=gates_g, c=cells, h=hidden,
                 has_tokens=has_tokens, argmax=argmax, pooled=pooled, pre_dense=pre_dense,
                 dense=dense, drop_mask=drop_mask)
    return logits, cache


# expit rounds to 1.0 above a logit of about 37 and to 0.0 below about -745
PROB_FLOOR = float(np.nextafter(0.0, 1.0))
PROB_CEIL = float(np.nextafter(1.0, 0.0))


def _probability(logits: np.ndarray) -> np.ndarray:
    return np.clip(expit(logits), PROB_FLOOR, PROB_CEIL)


def forward(model: GateModel, sequence: np.ndarray) -> float:
    """Probability that the proposed correction should be applied, strictly inside (0, 1)."""
    logits, _ = _forward(model, np.asarray(sequence)[None, :])
    return float(_probability(logits)[0])


def predict_proba(model: GateModel, X: np.ndarray, batch_size: int = 1024) -> np.ndarray:
    """Probabilities for a batch of sequences, evaluated in chunks."""
    X = np.asarray(X)
    out = np.empty(X.shape[0])
    for start in range(0, X.shape[0], batch_size):
        logits, _ = _forward(model, X[start:start + batch_size])
        out[start:start + batch_size] = _probability(logits)
    return out


def _bce_from_logits(logits: np.ndarray, y: np.ndarray) -> float:
    # log(1 + e^z) - y z, stable for large |z|
    return float(np.mean(np.logaddexp(0.0, logits) - y * logits))


def bce_loss(model: GateModel, X: np.ndarray, y: np.ndarray) -> float:
    """Mean binary cross-entropy of the model on a batch."""
    logits, _ = _forward(model, X)
    return _bce_from_logits(logits, np.asarray(y, dtype=np.float64))


def loss_and_grads(model: GateModel, X: np.ndarray, y: np.ndarray, dropout: float = 0.0,
                   rng: Optional[np.random.Generator] = None
                   ) -> Tuple[float, Dict[str, np.ndarray], np.ndarray]:
    """
    Mean binary cross-entropy, its gradient for every parameter block and
    the batch probabilities.
    """
    p = model.params
    y = np.asarray(y, dtype=np.float64)
    logits, cache = _forward(model, X, dropout, rng)
    probs = expit(logits)
    loss = _bce_from_logits(logits, y)

    B = logits.shape[0]
    H = model.hidden_dim
    T = cache['T']
    grads = {name: np.zeros_like(value) for name, value in p.items()}

    d_logits = (probs - y) / B
    grads['W_out'] = cache['dense'].T @ d_logits[:, None]
    grads['b_out'] = np.array([d_logits.sum()])

    d_dense = d_logits[:, None] @ p['W_out'].T
    if cache['drop_mask'] is not None:
        d_dense = d_dense * cache['drop_mask']
    d_pre = d_dense * (cache['pre_dense'] > 0)
    grads['W_dense'] = cache['pooled'].T @ d_pre
    grads['b_dense'] = d_pre.sum(axis=0)
    d_pooled = (d_pre @ p['W_dense'].T) * cache['has_tokens'][:, None]

    if T == 0:
        return loss, grads, probs

    # route the pooled gradient to the time step that won the max
    d_hidden = np.zeros((B, T, H))
    rows = np.arange(B)[:, None]
    units = np.arange(H)[None, :]
    d_hidden[rows, cache['argmax'], units] = d_pooled

    X = cache['X']
    emb = cache['emb']
    gi, gf, go, gg = cache['i'], cache['f'], cache['o'], cache['g']
    cells, hidden = cache['c'], cache['h']
    d_h_next = np.zeros((B, H))
    d_c_next = np.zeros((B, H))
    for t in reversed(range(T)):
        i, f, o, g = gi[:, t], gf[:, t], go[:, t], gg[:, t]
        c_prev, c = cells[:, t], cells[:, t + 1]
        tanh_c = np.tanh(c)

        d_h = d_hidden[:, t] + d_h_next
        d_o = d_h * tanh_c
        d_c = d_h * o * (1.0 - tanh_c ** 2) + d_c_next
        d_f = d_c * c_prev
        d_i = d_c * g
        d_g = d_c * i
        d_c_next = d_c * f

        d_z = np.concatenate([d_i * i * (1.0 - i), d_f * f * (1.0 - f),
                              d_o * o * (1.0 - o), d_g * (1.0 - g ** 2)], axis=1)
        grads['W'] += emb[:, t].T @ d_z
        grads['U'] += hidden[:, t].T @ d_z
        grads['b'] += d_z.sum(axis=0)
        np.add.at(grads['embedding'], X[:, t], d_z @ p['W'].T)
        d_h_next = d_z @ p['U'].T

    return loss, grads, probs


class AdamOptimizer:
    """Adam with bias-corrected moments; updates the model's arrays in place."""

    def __init__(self, params: Dict[str, np.ndarray], learning_rate: float = 0.001,
                 beta1: float = 0.9, beta2: float = 0.999, epsilon: float = 1e-8):
        self.params = params
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.t = 0
        self.m = {name: np.zeros_like(value) for name, value in params.items()}
        self.v = {name: np.zeros_like(value) for name, value in params.items()}

    def step(self, grads: Dict[str, np.ndarray]):
        self.t += 1
        correction1 = 1.0 - self.beta1 ** self.t
        correction2 = 1.0 - self.beta2 ** self.t
        for name, grad in grads.items():
            self.m[name] = self.beta1 * self.m[name] + (1.0 - self.beta1) * grad
            self.v[name] = self.beta2 * self.v[name] + (1.0 - self.beta2) * grad ** 2
            m_hat = self.m[name] / correction1
            v_hat = self.v[name] / correction2
            self.params[name] -= self.learning_rate * m_hat / (np.sqrt(v_hat) + self.epsilon)


@dataclass(frozen=True)
class TrainConfig:
    """Training hyperparameters."""
    epochs: int = 2
    batch_size: int = 64
    learning_rate: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    max_seq_len: int = 64
    seed: int = 0
    embedding_dim: int = 128
    hidden_dim: int = 60
    dense_dim: int = 50
    dropout: float = 0.0

    def __post_init__(self):
        for name in ('epochs', 'batch_size', 'embedding_dim', 'hidden_dim', 'dense_dim'):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.learning_rate <= 0 or self.epsilon <= 0:
            raise ValueError("learning_rate and epsilon must be positive")
        if not (0.0 <= self.beta1 < 1.0 and 0.0 <= self.beta2 < 1.0):
            raise ValueError("beta1 and beta2 must lie in [0, 1)")
        if self.max_seq_len < FIXED_SLOTS:
            raise ValueError(f"max_seq_len must be at least {FIXED_SLOTS}")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError(f"dropout must lie in [0, 1), got {self.dropout}")

    @classmethod
    def from_config(cls, training_config, **overrides) -> 'TrainConfig':
        """Build from a config ``TrainingConfig`` section; None overrides are ignored."""
        values = {name: getattr(training_config, name) for name in cls.__dataclass_fields__}
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


@dataclass
class TrainingHistory:
    """Per-batch training curves and per-epoch validation metrics."""
    batch_loss: List[float] = field(default_factory=list)
    batch_accuracy: List[float] = field(default_factory=list)
    epoch_loss: List[float] = field(default_factory=list)
    epoch_accuracy: List[float] = field(default_factory=list)
    val_loss: List[float] = field(default_factory=list)
    val_accuracy: List[float] = field(default_factory=list)
    val_auc: List[Optional[float]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            'batch_loss': self.batch_loss,
            'batch_accuracy': self.batch_accuracy,
            'epoch_loss': self.epoch_loss,
            'epoch_accuracy': self.epoch_accuracy,
            'val_loss': self.val_loss,
            'val_accuracy': self.val_accuracy,
            'val_auc': self.val_auc,
        }

    def save(self, path: str):
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(self.to_dict(), f, indent=2)


@dataclass
class TrainingResult:
    model: GateModel
    vocab: Vocabulary
    history: TrainingHistory


def train(candidates_train: Sequence, candidates_val: Sequence, cfg: TrainConfig,
          vocab: Optional[Vocabulary] = None) -> TrainingResult:
    """
    Fit a gate with mini-batch Adam.

    Shuffling, initialization and dropout all draw from one generator seeded
    with ``cfg.seed``, so equal seeds give identical curves and weights.

    Args:
        candidates_train: Labeled candidates to fit
        candidates_val: Labeled candidates scored after every epoch (may be empty)
        cfg: Hyperparameters
        vocab: Vocabulary to use; built from candidates_train when None

    Returns:
        TrainingResult with the model after the last epoch
    """
    if not candidates_train:
        raise EmptyDatasetError("Cannot train on an empty candidate list")
    vocab = vocab or Vocabulary.from_candidates(candidates_train)
    rng = np.random.default_rng(cfg.seed)
    model = init_model(len(vocab), cfg.embedding_dim, cfg.hidden_dim, cfg.dense_dim, cfg.max_seq_len, rng)
    optimizer = AdamOptimizer(model.params, cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon)

    X, y = encode_batch(candidates_train, vocab, cfg.max_seq_len)
    X_val, y_val = (encode_batch(candidates_val, vocab, cfg.max_seq_len) if candidates_val
                    else (None, None))
    history = TrainingHistory()
    n = X.shape[0]
    logger.info(f"Training gate on {n} candidates (vocabulary {len(vocab)}, "
                f"{cfg.epochs} epochs, batch {cfg.batch_size})")

    for epoch in range(1, cfg.epochs + 1):
        started = time.time()
        order = rng.permutation(n)
        losses, correct = [], 0
        for batch_no, start in enumerate(range(0, n, cfg.batch_size), start=1):
            idx = order[start:start + cfg.batch_size]
            loss, grads, probs = loss_and_grads(model, X[idx], y[idx], cfg.dropout, rng)
            if not np.isfinite(loss):
                raise TrainingDivergedError(f"Loss became {loss} at epoch {epoch}, batch {batch_no}")
            optimizer.step(grads)
            hits = int(np.sum((probs > 0.5) == (y[idx] > 0.5)))
            correct += hits
            losses.append(loss * len(idx))
            history.batch_loss.append(loss)
            history.batch_accuracy.append(hits / len(idx))

        history.epoch_loss.append(float(np.sum(losses) / n))
        history.epoch_accuracy.append(correct / n)
        message = (f"Epoch {epoch}/{cfg.epochs}: loss {history.epoch_loss[-1]:.4f}, "
                   f"accuracy {history.epoch_accuracy[-1]:.4f}")
        if X_val is not None:
            p_val = predict_proba(model, X_val)
            val_loss = float(np.mean(-(y_val * np.log(np.clip(p_val, 1e-12, 1.0))
                                       + (1 - y_val) * np.log(np.clip(1 - p_val, 1e-12, 1.0)))))
            history.val_loss.append(val_loss)
            history.val_accuracy.append(float(np.mean((p_val > 0.5) == (y_val > 0.5))))
            history.val_auc.append(roc_auc(y_val, p_val))
            auc = history.val_auc[-1]
            message += (f"; validation loss {val_loss:.4f}, accuracy {history.val_accuracy[-1]:.4f}, "
                        f"AUC {'n/a' if auc is None else f'{auc:.4f}'}")
        logger.info(f"{message} ({time.time() - started:.1f}s)")

    return TrainingResult(model=model, vocab=vocab, history=history)


def roc_auc(labels: Sequence[float], scores: Sequence[float]) -> Optional[float]:
    """
    Area under the ROC curve from the rank-sum statistic, midranks for ties.

    Returns None when only one class is present.
    """
    labels = np.asarray(labels) > 0.5
    scores = np.asarray(scores, dtype=np.float64)
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        return None
    ranks = rankdata(scores)
    return float((ranks[labels].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class GateMetrics:
    """Classification metrics; predictions are probability > 0.5."""
    per_class: Dict[int, ClassMetrics]
    macro_precision: float
    macro_recall: float
    macro_f1: float
    accuracy: float
    auc: Optional[float]
    n: int

    def to_frame(self) -> pd.DataFrame:
        rows = {str(label): [m.precision, m.recall, m.f1, m.support] for label, m in self.per_class.items()}
        rows['macro avg'] = [self.macro_precision, self.macro_recall, self.macro_f1, self.n]
        frame = pd.DataFrame.from_dict(rows, orient='index', columns=['precision', 'recall', 'f1-score', 'support'])
        frame['support'] = frame['support'].astype(int)
        return frame

    def to_table(self) -> str:
        table = self.to_frame().to_string(float_format=lambda v: f"{v:.2f}")
        auc = 'n/a' if self.auc is None else f"{self.auc:.2f}"
        return f"{table}\naccuracy {self.accuracy:.2f}\nROC AUC  {auc}\n"


def metrics_from_probs(labels: Sequence[float], probs: Sequence[float]) -> GateMetrics:
    """Per-class and macro precision/recall/F1, accuracy and AUC."""
    y = (np.asarray(labels) > 0.5).astype(int)
    probs = np.asarray(probs, dtype=np.float64)
    if y.size == 0:
        raise EmptyDatasetError("Cannot evaluate on an empty candidate list")
    pred = (probs > 0.5).astype(int)

    per_class = {}
    for label in (0, 1):
        tp = int(np.sum((pred == label) & (y == label)))
        predicted = int(np.sum(pred == label))
        support = int(np.sum(y == label))
        precision = tp / predicted if predicted else 0.0
        recall = tp / support if support else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        per_class[label] = ClassMetrics(precision, recall, f1, support)

    return GateMetrics(
        per_class=per_class,
        macro_precision=float(np.mean([m.precision for m in per_class.values()])),
        macro_recall=float(np.mean([m.recall for m in per_class.values()])),
        macro_f1=float(np.mean([m.f1 for m in per_class.values()])),
        accuracy=float(np.mean(pred == y)),
        auc=roc_auc(y, probs),
        n=int(y.size),
    )


def evaluate(model: GateModel, vocab: Vocabulary, candidates: Sequence) -> GateMetrics:
    """Score a labeled candidate set with the gate."""
    if not candidates:
        raise EmptyDatasetError("Cannot evaluate on an empty candidate list")
    X, y = encode_batch(candidates, vocab, model.max_seq_len)
    metrics = metrics_from_probs(y, predict_proba(model, X))
    logger.info(f"Evaluated {metrics.n} candidates: accuracy {metrics.accuracy:.4f}, "
                f"macro F1 {metrics.macro_f1:.4f}")
    return metrics


def save_model(model: GateModel, vocab: Vocabulary, path: str):
    """Write vocabulary and parameter blocks to an ``.npz`` container at exactly ``path``."""
    arrays = {f"param_{name}": model.params[name] for name in PARAM_NAMES}
    with open(path, 'wb') as f:
        np.savez(f, format_version=np.array(MODEL_FORMAT_VERSION), max_seq_len=np.array(model.max_seq_len),
                 vocab=np.array(vocab.to_json()), **arrays)
    logger.info(f"Saved gate model to {path}")


def load_model(path: str) -> Tuple[GateModel, Vocabulary]:
    """Read a model written by save_model, validating version, shapes and values."""
    try:
        with np.load(path, allow_pickle=False) as data:
            contents = {key: data[key] for key in data.files}
    except (ValueError, OSError) as e:
        raise ModelFormatError(f"Cannot read model file {path}: {e}") from e

    missing = [key for key in ['format_version', 'max_seq_len', 'vocab'] + [f"param_{n}" for n in PARAM_NAMES]
               if key not in contents]
    if missing:
        raise ModelFormatError(f"Model file {path} lacks {', '.join(missing)}")
    version = int(contents['format_version'].item())
    if version != MODEL_FORMAT_VERSION:
        raise ModelFormatError(f"Unsupported model format version {version}")

    vocab = Vocabulary.from_json(contents['vocab'].item())
    params = {name: contents[f"param_{name}"].astype(np.float64) for name in PARAM_NAMES}
    emb_shape, u_shape, dense_shape = params['embedding'].shape, params['U'].shape, params['W_dense'].shape
    if len(emb_shape) != 2 or len(u_shape) != 2 or len(dense_shape) != 2:
        raise ModelFormatError("Embedding, U and W_dense must be matrices")
    expected = expected_shapes(len(vocab), emb_shape[1], u_shape[0], dense_shape[1])
    for name, shape in expected.items():
        if params[name].shape != shape:
            raise ModelFormatError(f"Parameter {name} has shape {params[name].shape}, expected {shape}")
        if not np.all(np.isfinite(params[name])):
            raise ModelFormatError(f"Parameter {name} holds non-finite values")
    return GateModel(params, int(contents['max_seq_len'].item())), vocab


def plot_training_curves(history: TrainingHistory, title: str = 'Gate training') -> str:
    """Standalone HTML page with per-batch loss and accuracy."""
    import plotly.graph_objects as go

    steps = list(range(1, len(history.batch_loss) + 1))
    fig = go.Figure()
    fig.add_trace(go.Scatter(x=steps, y=history.batch_loss, mode='lines', name='Loss',
                             line=dict(color='red', width=1)))
    fig.add_trace(go.Scatter(x=steps, y=history.batch_accuracy, mode='lines', name='Accuracy',
                             yaxis='y2', line=dict(color='green', width=1)))
    fig.update_layout(
        title=title,
        xaxis=dict(title='Batch'),
        yaxis=dict(title='Binary cross-entropy', side='left'),
        yaxis2=dict(title='Accuracy', overlaying='y', side='right', range=[0, 1]),
        legend=dict(x=0, y=1.1, orientation='h'),
        height=500,
        margin=dict(l=50, r=50, t=80, b=50),
    )
    return fig.to_html(full_html=True, include_plotlyjs='cdn')
