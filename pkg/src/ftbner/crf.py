"""Linear-chain CRF with elastic-net regularized Rprop training.

The score of a tag sequence is the sum, over positions, of the emission
weights of the active features for the assigned tag, plus one transition
weight per pair of consecutive tags.  There are no start/stop weights; the
``bias`` feature plays that role.

Sentences are handled in two shapes: lists of feature-key tuples (public
API) and a compiled sparse design matrix (:class:`Batch`) used for
full-batch training, where sentences of equal length are pushed through the
forward-backward recursions together.
"""

from __future__ import annotations

import hashlib
import json
import math
import struct
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp

OUTSIDE = "O"
MAGIC = b"FTBNECRF"
FORMAT_VERSION = 1
GROUP_POSITIONS = 4096


class TrainingDiverged(RuntimeError):
    pass


class ModelFormatError(ValueError):
    """The model file is truncated, corrupted or not a model file."""


class TemplateMismatch(ValueError):
    pass


def order_tags(tags) -> tuple[str, ...]:
    """``O`` first, then the remaining tags sorted (B-* before I-*)."""
    rest = sorted(set(tags) - {OUTSIDE})
    return (OUTSIDE, *rest)


@dataclass
class CrfModel:
    tags: tuple[str, ...]
    feature_dict: dict[str, int]
    emission: np.ndarray  # (n_features, n_tags)
    transition: np.ndarray  # (n_tags, n_tags), [previous, next]
    template_hash: str = ""
    config: dict = field(default_factory=dict)

    def __post_init__(self):
        self.tags = tuple(self.tags)
        k = len(self.tags)
        self.emission = np.asarray(self.emission, dtype=np.float64)
        self.transition = np.asarray(self.transition, dtype=np.float64)
        if self.emission.shape != (len(self.feature_dict), k):
            raise ValueError(f"emission shape {self.emission.shape} does not match "
                             f"{len(self.feature_dict)} features x {k} tags")
        if self.transition.shape != (k, k):
            raise ValueError(f"transition shape {self.transition.shape} != ({k}, {k})")
        self.tag_index = {t: i for i, t in enumerate(self.tags)}

    @classmethod
    def zeros(cls, tags, features, template_hash="", config=None) -> "CrfModel":
        features = list(features)
        return cls(
            tuple(tags),
            {f: i for i, f in enumerate(features)},
            np.zeros((len(features), len(tags))),
            np.zeros((len(tags), len(tags))),
            template_hash,
            dict(config or {}),
        )

    @property
    def n_tags(self) -> int:
        return len(self.tags)

    @property
    def n_weights(self) -> int:
        return self.emission.size + self.transition.size

    def get_weights(self) -> np.ndarray:
        return np.concatenate([self.emission.ravel(), self.transition.ravel()])

    def set_weights(self, theta: np.ndarray) -> None:
        split = self.emission.size
        self.emission = theta[:split].reshape(self.emission.shape).copy()
        self.transition = theta[split:].reshape(self.transition.shape).copy()

    def copy(self) -> "CrfModel":
        return CrfModel(self.tags, dict(self.feature_dict), self.emission.copy(),
                        self.transition.copy(), self.template_hash, dict(self.config))

    def design(self, sentence_features) -> sp.csr_matrix:
        """0/1 matrix (positions x features); unknown keys are dropped."""
        indptr = [0]
        indices = []
        lookup = self.feature_dict.get
        for keys in sentence_features:
            for key in keys:
                j = lookup(key)
                if j is not None:
                    indices.append(j)
            indptr.append(len(indices))
        data = np.ones(len(indices))
        return sp.csr_matrix(
            (data, np.asarray(indices, dtype=np.int64), np.asarray(indptr, dtype=np.int64)),
            shape=(len(sentence_features), len(self.feature_dict)),
        )

    def emissions(self, sentence_features) -> np.ndarray:
        return np.asarray(self.design(sentence_features) @ self.emission)

    def tag_ids(self, tags, unknown: Optional[int] = None) -> np.ndarray:
        """Tag strings to ids; unknown tags map to ``unknown`` if given."""
        lookup = self.tag_index
        if unknown is None:
            ids = [t if isinstance(t, (int, np.integer)) else lookup[t] for t in tags]
        else:
            ids = [t if isinstance(t, (int, np.integer)) else lookup.get(t, unknown)
                   for t in tags]
        return np.array(ids, dtype=np.int64)

    def __eq__(self, other):
        if not isinstance(other, CrfModel):
            return NotImplemented
        return (self.tags == other.tags and self.feature_dict == other.feature_dict
                and self.template_hash == other.template_hash
                and np.array_equal(self.emission, other.emission)
                and np.array_equal(self.transition, other.transition))


def _logsumexp(x: np.ndarray, axis: int) -> np.ndarray:
    m = np.max(x, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    out = np.log(np.sum(np.exp(x - m), axis=axis, keepdims=True)) + m
    return np.squeeze(out, axis=axis)


# Recursions over a stack of equal-length sentences: E is (B, n, K).

def _forward(E: np.ndarray, T: np.ndarray) -> np.ndarray:
    B, n, K = E.shape
    alpha = np.empty_like(E)
    alpha[:, 0] = E[:, 0]
    for t in range(1, n):
        alpha[:, t] = _logsumexp(alpha[:, t - 1, :, None] + T[None], axis=1) + E[:, t]
    return alpha


def _backward(E: np.ndarray, T: np.ndarray) -> np.ndarray:
    B, n, K = E.shape
    beta = np.zeros_like(E)
    for t in range(n - 2, -1, -1):
        nxt = E[:, t + 1] + beta[:, t + 1]
        beta[:, t] = _logsumexp(T[None] + nxt[:, None, :], axis=2)
    return beta


def _viterbi(E: np.ndarray, T: np.ndarray):
    B, n, K = E.shape
    delta = E[:, 0].copy()
    back = np.zeros((B, n, K), dtype=np.int64)
    for t in range(1, n):
        cand = delta[:, :, None] + T[None]  # (B, prev, next)
        back[:, t] = np.argmax(cand, axis=1)  # first maximum = lowest tag index
        delta = np.take_along_axis(cand, back[:, t][:, None, :], axis=1)[:, 0] + E[:, t]
    best = np.argmax(delta, axis=1)
    scores = delta[np.arange(B), best]
    path = np.empty((B, n), dtype=np.int64)
    path[:, n - 1] = best
    for t in range(n - 1, 0, -1):
        path[:, t - 1] = back[np.arange(B), t, path[:, t]]
    return path, scores


def _marginals(E: np.ndarray, T: np.ndarray):
    alpha = _forward(E, T)
    beta = _backward(E, T)
    log_z = _logsumexp(alpha[:, -1], axis=1)
    node = np.exp(alpha + beta - log_z[:, None, None])
    edge = np.exp(
        alpha[:, :-1, :, None] + T[None, None] + (E[:, 1:] + beta[:, 1:])[:, :, None, :]
        - log_z[:, None, None, None]
    )
    return log_z, node, edge


def score(model: CrfModel, sentence_features, tags) -> float:
    y = model.tag_ids(tags)
    if len(y) != len(sentence_features):
        raise ValueError("tag sequence and sentence lengths differ")
    E = model.emissions(sentence_features)
    total = float(E[np.arange(len(y)), y].sum())
    if len(y) > 1:
        total += float(model.transition[y[:-1], y[1:]].sum())
    return total


def log_partition(model: CrfModel, sentence_features) -> float:
    if not len(sentence_features):
        raise ValueError("empty sentence")
    E = model.emissions(sentence_features)[None]
    alpha = _forward(E, model.transition)
    return float(_logsumexp(alpha[0, -1], axis=0))


def marginals(model: CrfModel, sentence_features):
    """Per-position ``(n, K)`` and per-edge ``(n-1, K, K)`` posterior marginals."""
    E = model.emissions(sentence_features)[None]
    _, node, edge = _marginals(E, model.transition)
    return node[0], edge[0]


def viterbi(model: CrfModel, sentence_features) -> tuple[list[str], float]:
    """Best tag sequence; ties go to the lowest tag index at every decision."""
    if not len(sentence_features):
        raise ValueError("empty sentence")
    E = model.emissions(sentence_features)[None]
    path, scores = _viterbi(E, model.transition)
    return [model.tags[i] for i in path[0]], float(scores[0])


class Batch:
    """Sentences compiled against a model's feature dictionary.

    ``gold`` may be ``None`` for decoding-only batches.
    """

    def __init__(self, model: CrfModel, sentences, gold=None, unknown: Optional[int] = None):
        self.lengths = np.array([len(s) for s in sentences], dtype=np.int64)
        if np.any(self.lengths == 0):
            raise ValueError("empty sentence in batch")
        self.offsets = np.concatenate([[0], np.cumsum(self.lengths)])
        flat = [keys for s in sentences for keys in s]
        self.X = model.design(flat)
        self.XT = self.X.T.tocsr()
        self.gold = None
        if gold is not None:
            self.gold = np.concatenate([model.tag_ids(g, unknown) for g in gold])
            if len(self.gold) != self.offsets[-1]:
                raise ValueError("gold tags do not match sentence lengths")
        # sentences grouped by length, each group as a (B, n) index array,
        # chunked to bound the size of the (B, n, K, K) edge marginals
        self.groups = []
        for n in np.unique(self.lengths):
            ids = np.flatnonzero(self.lengths == n)
            per_chunk = max(1, GROUP_POSITIONS // int(n))
            for lo in range(0, len(ids), per_chunk):
                chunk = ids[lo:lo + per_chunk]
                self.groups.append(self.offsets[chunk][:, None] + np.arange(n)[None])

    def __len__(self):
        return len(self.lengths)


def nll_and_gradient(model: CrfModel, batch: Batch, l2: float = 0.0):
    """Summed negative log-likelihood plus ``l2/2 * |w|^2`` and its gradient.

    The gradient is returned flat, in :meth:`CrfModel.get_weights` order.
    """
    W, T = model.emission, model.transition
    K = model.n_tags
    E_all = np.asarray(batch.X @ W)
    node_all = np.zeros_like(E_all)
    edge_sum = np.zeros((K, K))
    log_z_total = 0.0
    for rows in batch.groups:
        log_z, node, edge = _marginals(E_all[rows], T)
        log_z_total += float(log_z.sum())
        node_all[rows] = node
        edge_sum += edge.sum(axis=(0, 1))
    y = batch.gold
    gold_emission = float(E_all[np.arange(len(y)), y].sum())
    # transitions inside sentences only
    inner = np.ones(len(y), dtype=bool)
    inner[batch.offsets[:-1]] = False
    second = np.flatnonzero(inner)
    prev, nxt = y[second - 1], y[second]
    gold_trans = float(T[prev, nxt].sum())
    empirical_trans = np.zeros((K, K))
    np.add.at(empirical_trans, (prev, nxt), 1.0)

    node_all[np.arange(len(y)), y] -= 1.0
    grad_W = np.asarray(batch.XT @ node_all)
    grad_T = edge_sum - empirical_trans
    nll = log_z_total - gold_emission - gold_trans
    theta = model.get_weights()
    grad = np.concatenate([grad_W.ravel(), grad_T.ravel()])
    if l2:
        nll += 0.5 * l2 * float(theta @ theta)
        grad += l2 * theta
    return nll, grad


def gradient(model: CrfModel, batch, l2: float = 0.0) -> np.ndarray:
    """Gradient of the (L2-regularized) NLL over ``batch``.

    ``batch`` is a :class:`Batch` or a sequence of ``(features, gold_tags)``.
    """
    if not isinstance(batch, Batch):
        batch = list(batch)
        if not batch:
            raise ValueError("empty batch")
        batch = Batch(model, [f for f, _ in batch], [g for _, g in batch])
    return nll_and_gradient(model, batch, l2)[1]


def decode_batch(model: CrfModel, batch: Batch) -> np.ndarray:
    """Viterbi over a whole batch; returns flat tag ids."""
    E_all = np.asarray(batch.X @ model.emission)
    out = np.zeros(len(E_all), dtype=np.int64)
    for rows in batch.groups:
        path, _ = _viterbi(E_all[rows], model.transition)
        out[rows] = path
    return out


@dataclass(frozen=True)
class TrainConfig:
    l1: float = 0.1
    l2: float = 0.1
    max_epochs: int = 100
    patience: int = 5
    eta_plus: float = 1.2
    eta_minus: float = 0.5
    delta_init: float = 0.1
    delta_min: float = 1e-8
    delta_max: float = 50.0
    seed: int = 0

    def __post_init__(self):
        if self.l1 < 0 or self.l2 < 0:
            raise ValueError("penalties must be non-negative")
        if not self.eta_minus < 1 < self.eta_plus:
            raise ValueError("need eta_minus < 1 < eta_plus")
        if not self.delta_min <= self.delta_init <= self.delta_max:
            raise ValueError("need delta_min <= delta_init <= delta_max")
        if self.max_epochs < 1 or self.patience < 1:
            raise ValueError("max_epochs and patience must be positive")


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    objective: float
    dev_error: float

    def __str__(self):
        return f"{self.epoch}\t{self.objective!r}\t{self.dev_error!r}"


@dataclass
class TrainResult:
    model: CrfModel
    log: list[EpochRecord]
    best_epoch: int

    def log_text(self) -> str:
        return "".join(f"{r}\n" for r in self.log)


def l1_pseudo_gradient(theta: np.ndarray, grad: np.ndarray, l1: float) -> np.ndarray:
    """Steepest-descent direction of ``f + l1*|w|_1`` (orthant-wise)."""
    if not l1:
        return grad.copy()
    pg = grad + l1 * np.sign(theta)
    zero = theta == 0
    g0 = grad[zero]
    pg[zero] = np.where(g0 + l1 < 0, g0 + l1, np.where(g0 - l1 > 0, g0 - l1, 0.0))
    return pg


class Rprop:
    """Rprop with weight backtracking; L1 steps are clipped at zero."""

    def __init__(self, n: int, config: TrainConfig):
        self.cfg = config
        self.delta = np.full(n, config.delta_init)
        self.prev_grad = np.zeros(n)
        self.prev_step = np.zeros(n)

    def step(self, theta: np.ndarray, grad: np.ndarray) -> np.ndarray:
        cfg = self.cfg
        g = l1_pseudo_gradient(theta, grad, cfg.l1)
        prod = g * self.prev_grad
        up, down = prod > 0, prod < 0
        self.delta[up] = np.minimum(self.delta[up] * cfg.eta_plus, cfg.delta_max)
        self.delta[down] = np.maximum(self.delta[down] * cfg.eta_minus, cfg.delta_min)
        step = -np.sign(g) * self.delta
        step[down] = -self.prev_step[down]
        new = theta + step
        if cfg.l1:
            crossed = ~down & (theta != 0) & (np.sign(new) != np.sign(theta))
            new[crossed] = 0.0
        g[down] = 0.0
        self.prev_grad = g
        self.prev_step = new - theta
        return new


def l1_norm(theta):
    return float(np.abs(theta).sum())


def token_error(model: CrfModel, batch: Batch) -> float:
    pred = decode_batch(model, batch)
    return float(np.mean(pred != batch.gold))


def build_model(train_set, template_hash: str = "", config: Optional[TrainConfig] = None):
    tags = order_tags(t for _, gold in train_set for t in gold)
    features = sorted({k for feats, _ in train_set for keys in feats for k in keys})
    return CrfModel.zeros(tags, features, template_hash,
                          asdict(config) if config else None)


def train(train_set, dev_set, config: TrainConfig = TrainConfig(),
          template_hash: str = "", progress=None) -> TrainResult:
    """Full-batch Rprop on the regularized NLL, stopped on dev token error.

    ``train_set`` and ``dev_set`` are sequences of ``(features, tags)`` with
    features already extracted.  The returned model is the one with the
    lowest dev error (earliest on ties).
    """
    train_set, dev_set = list(train_set), list(dev_set)
    if not train_set or not dev_set:
        raise ValueError("training and development sets must be non-empty")
    model = build_model(train_set, template_hash, config)
    tr = Batch(model, [f for f, _ in train_set], [g for _, g in train_set])
    # dev tags never seen in training count as errors
    dev = Batch(model, [f for f, _ in dev_set], [g for _, g in dev_set], unknown=-1)

    theta = model.get_weights()
    opt = Rprop(len(theta), config)
    nll, grad = nll_and_gradient(model, tr, config.l2)
    best = (token_error(model, dev), 0, theta.copy())
    log = [EpochRecord(0, nll + config.l1 * l1_norm(theta), best[0])]
    stale = 0
    for epoch in range(1, config.max_epochs + 1):
        theta = opt.step(theta, grad)
        model.set_weights(theta)
        nll, grad = nll_and_gradient(model, tr, config.l2)
        objective = nll + config.l1 * l1_norm(theta)
        if not math.isfinite(objective):
            raise TrainingDiverged(f"objective became {objective} at epoch {epoch}")
        err = token_error(model, dev)
        log.append(EpochRecord(epoch, objective, err))
        if progress is not None:
            progress(log[-1])
        if err < best[0]:
            best = (err, epoch, theta.copy())
            stale = 0
        else:
            stale += 1
            if stale >= config.patience:
                break
    model.set_weights(best[2])
    return TrainResult(model, log, best[1])


def tag_features(model: CrfModel, sentences) -> list[list[str]]:
    """Viterbi-decode many sentences (lists of feature tuples) at once."""
    sentences = list(sentences)
    if not sentences:
        return []
    batch = Batch(model, sentences)
    flat = decode_batch(model, batch)
    return [[model.tags[i] for i in flat[a:b]]
            for a, b in zip(batch.offsets[:-1], batch.offsets[1:])]


def save(model: CrfModel, path) -> None:
    """Write the model container (deterministic bytes for identical models)."""
    features = [None] * len(model.feature_dict)
    for key, i in model.feature_dict.items():
        features[i] = key
    header = json.dumps(
        {
            "version": FORMAT_VERSION,
            "tags": list(model.tags),
            "features": features,
            "template_hash": model.template_hash,
            "config": model.config,
            "shape": list(model.emission.shape),
        },
        ensure_ascii=False,
        sort_keys=True,
    ).encode("utf-8")
    body = b"".join([
        MAGIC,
        struct.pack("<Q", len(header)),
        header,
        model.emission.astype("<f8").tobytes(),
        model.transition.astype("<f8").tobytes(),
    ])
    with open(path, "wb") as f:
        f.write(body + hashlib.sha256(body).digest())


def load(path, expected_hash: Optional[str] = None) -> CrfModel:
    """Read a model; refuse it if ``expected_hash`` differs from its template hash."""
    with open(path, "rb") as f:
        data = f.read()
    if len(data) < len(MAGIC) + 8 + 32 or not data.startswith(MAGIC):
        raise ModelFormatError(f"{path}: not a model file or truncated")
    body, digest = data[:-32], data[-32:]
    if hashlib.sha256(body).digest() != digest:
        raise ModelFormatError(f"{path}: checksum mismatch (truncated or corrupted)")
    (hlen,) = struct.unpack_from("<Q", body, len(MAGIC))
    start = len(MAGIC) + 8
    try:
        header = json.loads(body[start:start + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise ModelFormatError(f"{path}: bad header ({e})") from None
    if header.get("version") != FORMAT_VERSION:
        raise ModelFormatError(f"{path}: unsupported format version {header.get('version')}")
    n_feat, k = header["shape"]
    offset = start + hlen
    n_em = n_feat * k * 8
    if len(body) != offset + n_em + k * k * 8:
        raise ModelFormatError(f"{path}: payload size mismatch")
    emission = np.frombuffer(body, "<f8", n_feat * k, offset).reshape(n_feat, k)
    transition = np.frombuffer(body, "<f8", k * k, offset + n_em).reshape(k, k)
    if expected_hash is not None and header["template_hash"] != expected_hash:
        raise TemplateMismatch(
            f"{path}: model was trained with feature templates {header['template_hash'][:12]}, "
            f"current extractor is {expected_hash[:12]} (different gazetteers or templates)"
        )
    return CrfModel(
        tuple(header["tags"]),
        {key: i for i, key in enumerate(header["features"])},
        emission.astype(np.float64),
        transition.astype(np.float64),
        header["template_hash"],
        header["config"],
    )
