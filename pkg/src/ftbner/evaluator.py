"""Entity-level precision/recall/F1 and token accuracy.

A predicted mention counts as correct iff a gold mention has the same token
span and the same base type; subtypes, ids and names are ignored.  Overall
scores are micro-averaged from summed counts.
"""

from __future__ import annotations

import collections
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from typing import Sequence

from . import bio
from .model import NeType, Sentence


class CorpusMismatch(ValueError):
    pass


def round_half_up(value: float, places: int = 2) -> Decimal:
    quantum = Decimal(1).scaleb(-places)
    return Decimal(repr(value)).quantize(quantum, rounding=ROUND_HALF_UP)


def fmt(value: float) -> str:
    return str(round_half_up(value))


def precision(tp: int, fp: int) -> float:
    return 100.0 * tp / (tp + fp) if tp + fp else 0.0


def recall(tp: int, fn: int) -> float:
    return 100.0 * tp / (tp + fn) if tp + fn else 0.0


def f1_score(p: float, r: float) -> float:
    return 2 * p * r / (p + r) if p + r else 0.0


@dataclass
class Counts:
    tp: int = 0
    fp: int = 0
    fn: int = 0

    @property
    def precision(self) -> float:
        return precision(self.tp, self.fp)

    @property
    def recall(self) -> float:
        return recall(self.tp, self.fn)

    @property
    def f1(self) -> float:
        return f1_score(self.precision, self.recall)

    def __iadd__(self, other: "Counts") -> "Counts":
        self.tp += other.tp
        self.fp += other.fp
        self.fn += other.fn
        return self


@dataclass
class EvalReport:
    per_type: dict[str, Counts] = field(default_factory=dict)
    token_accuracy: float = 0.0

    @property
    def overall(self) -> Counts:
        total = Counts()
        for c in self.per_type.values():
            total += c
        return total

    def rows(self):
        for name, c in self.per_type.items():
            yield name, c
        yield "overall", self.overall

    def records(self) -> str:
        """``type TAB tp TAB fp TAB fn TAB P TAB R TAB F1`` per line."""
        return "".join(
            f"{name}\t{c.tp}\t{c.fp}\t{c.fn}\t{fmt(c.precision)}\t{fmt(c.recall)}\t{fmt(c.f1)}\n"
            for name, c in self.rows()
        )

    def table(self) -> str:
        header = ("type", "tp", "fp", "fn", "precision", "recall", "f1")
        body = [
            (name, str(c.tp), str(c.fp), str(c.fn), fmt(c.precision), fmt(c.recall), fmt(c.f1))
            for name, c in self.rows()
        ]
        widths = [max(len(r[i]) for r in [header, *body]) for i in range(len(header))]
        lines = []
        for j, r in enumerate([header, *body]):
            cells = [r[0].ljust(widths[0])] + [v.rjust(w) for v, w in zip(r[1:], widths[1:])]
            lines.append("  ".join(cells))
            if j == 0 or j == len(body) - 1:
                lines.append("-" * len(lines[-1]))
        lines.append(f"token accuracy: {fmt(self.token_accuracy)}")
        return "\n".join(lines) + "\n"


def _keys(sentence: Sentence):
    return collections.Counter(
        (m.first_token, m.last_token, m.ne_type) for m in sentence.mentions
    )


def _check_pair(i: int, g: Sentence, p: Sentence) -> None:
    if len(g.words) != len(p.words):
        raise CorpusMismatch(
            f"sentence {i + 1} ({g.sent_id}): {len(g.words)} gold tokens vs "
            f"{len(p.words)} predicted"
        )


def evaluate(gold: Sequence[Sentence], pred: Sequence[Sentence]) -> EvalReport:
    if len(gold) != len(pred):
        raise CorpusMismatch(f"{len(gold)} gold sentences vs {len(pred)} predicted")
    counts: dict[NeType, Counts] = collections.defaultdict(Counts)
    gold_tags, pred_tags = [], []
    for i, (g, p) in enumerate(zip(gold, pred)):
        _check_pair(i, g, p)
        gk, pk = _keys(g), _keys(p)
        for key in gk.keys() | pk.keys():
            hit = min(gk[key], pk[key])
            c = counts[key[2]]
            c.tp += hit
            c.fp += pk[key] - hit
            c.fn += gk[key] - hit
        n = len(g.words)
        gold_tags.extend(str(t) for t in bio.encode(g.mentions, n))
        pred_tags.extend(str(t) for t in bio.encode(p.mentions, n))
    report = EvalReport(
        {t.value: counts[t] for t in NeType if t in counts},
        token_accuracy(gold_tags, pred_tags) if gold_tags else 0.0,
    )
    return report


def token_accuracy(gold_tags: Sequence, pred_tags: Sequence) -> float:
    if len(gold_tags) != len(pred_tags):
        raise CorpusMismatch(f"{len(gold_tags)} gold tags vs {len(pred_tags)} predicted")
    if not gold_tags:
        raise ValueError("token accuracy of an empty corpus is undefined")
    same = sum(str(a) == str(b) for a, b in zip(gold_tags, pred_tags))
    return 100.0 * same / len(gold_tags)
