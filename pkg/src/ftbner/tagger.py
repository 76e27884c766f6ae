"""Glue between corpora, features and the CRF: training, tagging, broadcasting."""

from __future__ import annotations

import collections
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from typing import Optional, Sequence

from . import bio, crf
from .features import FeatureExtractor, Gazetteer
from .model import Sentence, TokenMention


def gold_tags(sentence: Sentence) -> list[str]:
    return [str(t) for t in bio.encode(sentence.mentions, len(sentence.words))]


def featurize(extractor: FeatureExtractor, sentences: Sequence[Sentence], workers: int = 1):
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(extractor.sentence, sentences))
    return [extractor.sentence(s) for s in sentences]


def examples(extractor, sentences, workers: int = 1):
    sentences = [s for s in sentences if s.words]
    feats = featurize(extractor, sentences, workers)
    return list(zip(feats, (gold_tags(s) for s in sentences)))


def train_tagger(
    train: Sequence[Sentence],
    dev: Sequence[Sentence],
    gazetteers: Sequence[Gazetteer] = (),
    config: crf.TrainConfig = crf.TrainConfig(),
    workers: int = 1,
    progress=None,
) -> crf.TrainResult:
    extractor = FeatureExtractor(gazetteers)
    return crf.train(
        examples(extractor, train, workers),
        examples(extractor, dev, workers),
        config,
        template_hash=extractor.template_hash,
        progress=progress,
    )


def tag_sentences(
    model: crf.CrfModel,
    sentences: Sequence[Sentence],
    gazetteers: Sequence[Gazetteer] = (),
    broadcast: bool = False,
    workers: int = 1,
) -> list[Sentence]:
    """Replace each sentence's mentions with the model's predictions.

    Predicted tag sequences are decoded in repair mode since the CRF can
    emit an ``I-`` tag without its ``B-``.
    """
    extractor = FeatureExtractor(gazetteers)
    if model.template_hash and model.template_hash != extractor.template_hash:
        raise crf.TemplateMismatch(
            "model feature templates do not match the supplied gazetteers"
        )
    nonempty = [s for s in sentences if s.words]
    predicted = iter(crf.tag_features(model, featurize(extractor, nonempty, workers)))
    out = []
    for s in sentences:
        tags = next(predicted) if s.words else []
        out.append(replace(s, mentions=tuple(bio.decode(tags, bio.REPAIR))))
    if broadcast:
        out = broadcast_mentions(out)
    return out


def _lexicon(sentences: Sequence[Sentence]):
    seen: dict[tuple, set] = collections.defaultdict(set)
    for s in sentences:
        forms = s.forms
        for m in s.mentions:
            seen[tuple(forms[m.first_token - 1:m.last_token])].add((m.ne_type, m.sub_type))
    return {form: next(iter(labels)) for form, labels in seen.items() if len(labels) == 1}


def broadcast_mentions(sentences: Sequence[Sentence]) -> list[Sentence]:
    """Tag unlabeled occurrences of forms already found as mentions.

    Forms predicted with more than one label are left alone, and new
    mentions never overlap existing ones.  Matching is leftmost-longest.
    """
    lexicon = _lexicon(sentences)
    max_len = max((len(f) for f in lexicon), default=0)
    out = []
    for s in sentences:
        forms = s.forms
        n = len(forms)
        taken = [False] * n
        for m in s.mentions:
            for i in range(m.first_token - 1, m.last_token):
                taken[i] = True
        added = []
        i = 0
        while i < n:
            hit = None
            if not taken[i]:
                for length in range(min(max_len, n - i), 0, -1):
                    if any(taken[i:i + length]):
                        continue
                    label = lexicon.get(tuple(forms[i:i + length]))
                    if label is not None:
                        hit = (length, label)
                        break
            if hit is None:
                i += 1
                continue
            length, (ne_type, sub_type) = hit
            added.append(TokenMention(i + 1, i + length, ne_type, sub_type))
            for j in range(i, i + length):
                taken[j] = True
            i += length
        if added:
            mentions = sorted([*s.mentions, *added], key=lambda m: m.first_token)
            s = replace(s, mentions=tuple(mentions))
        out.append(s)
    return out
