"""Command-line entry point: ``ftbner <command> ...``.

Exit status is 0 on full success, 1 when a run completed but found problems
(alignment errors, validation violations) and 2 on usage or fatal errors.
Logs go to stderr; data goes to files or stdout.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import dataclass, field
from typing import Sequence

from . import aligner, bio, conllu, crf, enamex, evaluator, splitter, tagger
from .features import FeatureExtractor, load_gazetteer
from .model import NeType, Sentence, validate_mentions

log = logging.getLogger("ftbner")

OK, DIRTY, FATAL = 0, 1, 2


class Fatal(Exception):
    pass


@dataclass
class CorpusStats:
    n_sentences: int = 0
    n_tokens: int = 0
    n_sentences_with_mentions: int = 0
    n_mentions: int = 0
    mentions_by_type: dict = field(default_factory=lambda: {t.value: 0 for t in NeType})

    @classmethod
    def of(cls, sentences: Sequence[Sentence]) -> "CorpusStats":
        st = cls()
        for s in sentences:
            st.n_sentences += 1
            st.n_tokens += len(s.words)
            st.n_sentences_with_mentions += bool(s.mentions)
            st.n_mentions += len(s.mentions)
            for m in s.mentions:
                st.mentions_by_type[m.ne_type.value] += 1
        return st

    def render(self) -> str:
        lines = [
            f"sentences\t{self.n_sentences}",
            f"tokens\t{self.n_tokens}",
            f"sentences_with_mentions\t{self.n_sentences_with_mentions}",
            f"mentions\t{self.n_mentions}",
        ]
        lines += [f"type:{t}\t{n}" for t, n in self.mentions_by_type.items()]
        return "\n".join(lines) + "\n"


def _read_text(path) -> str:
    try:
        with open(path, encoding="utf-8", newline="") as f:
            return f.read()
    except OSError as e:
        raise Fatal(f"cannot read {path}: {e.strerror}") from None


def _read_corpus(path, mode=bio.STRICT):
    text = _read_text(path)
    for line in text.split("\n"):
        if line.strip() and not line.startswith("#"):
            if len(line.split("\t")) == conllu.N_EXTENDED:
                return conllu.parse_extended(text, mode), True
            break
    return conllu.parse_conllu(text), False


def _write(path, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)


def _extended_text(sentences) -> str:
    return "".join(conllu.format_extended(s) for s in sentences)


def _gazetteers(paths):
    # priority follows command-line order
    return [load_gazetteer(p, priority=i) for i, p in enumerate(paths or ())]


def cmd_ingest(args) -> int:
    doc = enamex.parse_enamex(_read_text(args.input))
    bad = 0
    for s in doc.sentences:
        for v in validate_mentions(s):
            bad += 1
            log.error("sentence %s: %s", s.sent_id, v)
    n_mentions = sum(len(s.mentions) for s in doc.sentences)
    log.info("%d sentences, %d mentions", len(doc.sentences), n_mentions)
    if args.out and not bad:
        _write(args.out, enamex.serialize_enamex(doc) + ("\n" if doc.sentences else ""))
    return DIRTY if bad else OK


def cmd_align(args) -> int:
    doc = enamex.parse_enamex(_read_text(args.enamex))
    treebank = conllu.parse_conllu(_read_text(args.conllu))
    merged, report = aligner.align_corpus(doc.sentences, treebank, args.threads)
    _write(args.out, _extended_text(merged))
    if args.errors:
        _write(args.errors, report.records())
    for e in report.errors:
        log.warning("%s", e.record())
    log.info("%s", report.summary())
    return OK if report.clean else DIRTY


def cmd_convert(args) -> int:
    sentences, extended = _read_corpus(args.input, args.mode)
    if not extended:
        raise Fatal(f"{args.input} has no NE columns")
    if args.to == "bio":
        blocks = []
        for s in sentences:
            rows = [f"{f}\t{t}" for f, t in zip(s.forms, tagger.gold_tags(s))]
            blocks.append("\n".join(rows) + "\n\n")
        _write(args.out, "".join(blocks))
        return OK
    lines = []
    for s in sentences:
        if not s.raw_text:
            raise Fatal(f"sentence {s.sent_id} has no '# text' comment to rebuild raw text")
        try:
            mentions = aligner.char_mentions(s)
        except aligner.AlignmentError as e:
            raise Fatal(f"sentence {s.sent_id}: {e.detail}") from None
        lines.append(enamex.serialize_sentence(Sentence(s.raw_text, (), tuple(mentions), s.sent_id)))
    _write(args.out, "".join(line + "\n" for line in lines))
    return OK


def cmd_stats(args) -> int:
    sentences, _ = _read_corpus(args.corpus)
    _write("-", CorpusStats.of(sentences).render())
    return OK


def cmd_train(args) -> int:
    train_set, ext1 = _read_corpus(args.train)
    dev_set, ext2 = _read_corpus(args.dev)
    if not (ext1 and ext2):
        raise Fatal("training and development corpora need NE columns")
    config = crf.TrainConfig(
        l1=args.l1, l2=args.l2, max_epochs=args.max_epochs,
        patience=args.patience, seed=args.seed,
    )
    log_lines = []

    def progress(rec):
        log_lines.append(str(rec))
        log.info("epoch %d objective %.6g dev error %.4f", rec.epoch, rec.objective, rec.dev_error)

    result = tagger.train_tagger(train_set, dev_set, _gazetteers(args.gazetteer), config,
                                 args.threads, progress)
    crf.save(result.model, args.model_out)
    if args.log:
        _write(args.log, result.log_text())
    log.info("best dev error %.4f at epoch %d", result.log[result.best_epoch].dev_error,
             result.best_epoch)
    return OK


def cmd_tag(args) -> int:
    gazetteers = _gazetteers(args.gazetteer)
    model = crf.load(args.model, FeatureExtractor(gazetteers).template_hash)
    sentences, _ = _read_corpus(args.input, bio.REPAIR)
    tagged = tagger.tag_sentences(model, sentences, gazetteers, args.broadcast, args.threads)
    _write(args.out, _extended_text(tagged))
    return OK


def cmd_broadcast(args) -> int:
    sentences, extended = _read_corpus(args.input, bio.REPAIR)
    if not extended:
        raise Fatal(f"{args.input} has no NE columns")
    _write(args.out, _extended_text(tagger.broadcast_mentions(sentences)))
    return OK


def cmd_eval(args) -> int:
    gold, _ = _read_corpus(args.gold)
    pred, _ = _read_corpus(args.pred, bio.REPAIR)
    report = evaluator.evaluate(gold, pred)
    _write("-", report.table())
    if args.records:
        _write(args.records, report.records())
    return OK


def cmd_split(args) -> int:
    spec = splitter.SplitSpec.parse(args.sizes, args.seed)
    sentences, extended = _read_corpus(args.corpus)
    parts = splitter.split(sentences, spec)
    for path in splitter.write_manifests(parts, args.out_dir):
        log.info("wrote %s", path)
    if args.emit:
        for name, part in zip(splitter.PART_NAMES, parts):
            path = os.path.join(args.out_dir, f"{name}.conllu")
            if extended:
                _write(path, _extended_text(part))
            else:
                with open(path, "w", encoding="utf-8", newline="\n") as f:
                    conllu.emit_conllu(part, f)
    return OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true")
    common.add_argument("--threads", type=int, default=1,
                        help="worker threads (output is identical)")
    p = argparse.ArgumentParser(prog="ftbner", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("ingest", parents=[common], help="parse and validate an ENAMEX file")
    s.add_argument("input")
    s.add_argument("--out", help="write the normalized ENAMEX file here")
    s.set_defaults(func=cmd_ingest)

    s = sub.add_parser("align", parents=[common], help="merge ENAMEX annotations into a CoNLL-U file")
    s.add_argument("--enamex", required=True)
    s.add_argument("--conllu", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--errors", help="machine-readable error records")
    s.set_defaults(func=cmd_align)

    s = sub.add_parser("convert", parents=[common], help="extended CoNLL-U to ENAMEX or two-column BIO")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--out", default="-")
    s.add_argument("--to", choices=("enamex", "bio"), default="enamex")
    s.add_argument("--mode", choices=(bio.STRICT, bio.REPAIR), default=bio.STRICT)
    s.set_defaults(func=cmd_convert)

    s = sub.add_parser("stats", parents=[common], help="corpus statistics")
    s.add_argument("corpus")
    s.set_defaults(func=cmd_stats)

    s = sub.add_parser("train", parents=[common], help="train a CRF tagger")
    s.add_argument("--train", required=True)
    s.add_argument("--dev", required=True)
    s.add_argument("--gazetteer", action="append", help="repeatable; earlier = higher priority")
    s.add_argument("--l1", type=float, default=0.1)
    s.add_argument("--l2", type=float, default=0.1)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--max-epochs", type=int, default=100)
    s.add_argument("--patience", type=int, default=5)
    s.add_argument("--model-out", required=True)
    s.add_argument("--log", help="training log (epoch, objective, dev error)")
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("tag", parents=[common], help="tag a CoNLL-U file with a trained model")
    s.add_argument("--model", required=True)
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--out", default="-")
    s.add_argument("--gazetteer", action="append")
    s.add_argument("--broadcast", action="store_true", help="apply mention broadcasting")
    s.set_defaults(func=cmd_tag)

    s = sub.add_parser("broadcast", parents=[common], help="mention broadcasting on a tagged corpus")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--out", default="-")
    s.set_defaults(func=cmd_broadcast)

    s = sub.add_parser("eval", parents=[common], help="entity-level P/R/F1")
    s.add_argument("--gold", required=True)
    s.add_argument("--pred", required=True)
    s.add_argument("--records", help="also write tab-separated records here")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("split", parents=[common], help="chronological or shuffled train/dev/test split")
    s.add_argument("--corpus", required=True)
    s.add_argument("--sizes", required=True, help="train,dev,test sentence counts")
    s.add_argument("--seed", type=int, help="shuffle seed; omit for the chronological split")
    s.add_argument("--out-dir", required=True)
    s.add_argument("--emit", action="store_true", help="also write the three corpus parts")
    s.set_defaults(func=cmd_split)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(message)s",
        stream=sys.stderr,
    )
    if args.threads < 1:
        parser.error("--threads must be at least 1")
    try:
        return args.func(args)
    except Fatal as e:
        log.error("%s", e)
    except (enamex.EnamexSyntaxError, conllu.ConlluError, aligner.SentenceCountMismatch,
            evaluator.CorpusMismatch, splitter.SplitSizeError, crf.ModelFormatError,
            crf.TemplateMismatch, crf.TrainingDiverged) as e:
        log.error("%s: %s", type(e).__name__, e)
    except ValueError as e:
        log.error("%s", e)
    except OSError as e:
        log.error("%s", e)
    return FATAL


if __name__ == "__main__":
    sys.exit(main())
