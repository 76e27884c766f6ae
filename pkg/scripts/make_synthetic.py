"""Write a synthetic annotated corpus in all three formats.

Produces ``<out>/corpus.conllu`` (extended, with NE columns),
``<out>/plain.conllu`` (10 columns) and ``<out>/corpus.xml`` (ENAMEX), so
that ``ftbner align --enamex corpus.xml --conllu plain.conllu`` rebuilds
``corpus.conllu``.
"""

import argparse
import os

from ftbner import aligner, conllu
from ftbner.enamex import EnamexDocument, serialize_enamex
from ftbner.model import Sentence
from ftbner.synthetic import deterministic_corpus


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sentences", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--vocab", type=int, default=12, help="forms per tag")
    p.add_argument("--out", required=True)
    args = p.parse_args()

    corpus = deterministic_corpus(args.sentences, seed=args.seed, vocab_per_tag=args.vocab)
    os.makedirs(args.out, exist_ok=True)
    conllu.write_extended(corpus, os.path.join(args.out, "corpus.conllu"))
    with open(os.path.join(args.out, "plain.conllu"), "w", encoding="utf-8", newline="\n") as f:
        conllu.emit_conllu(corpus, f)
    raw = [Sentence(s.raw_text, (), tuple(aligner.char_mentions(s)), s.sent_id) for s in corpus]
    with open(os.path.join(args.out, "corpus.xml"), "w", encoding="utf-8", newline="\n") as f:
        f.write(serialize_enamex(EnamexDocument(tuple(raw))) + "\n")
    print(f"wrote {len(corpus)} sentences to {args.out}")


if __name__ == "__main__":
    main()
