"""Chronological vs. shuffled splits on a corpus whose entities drift over time.

The corpus is cut into eras. Each era introduces its own entity names, so
the last sentences (the chronological dev and test sets) mention many names
never seen in training. Shuffled splits of the same sizes mix eras, which
should raise test F1. Prints one row per split.
"""

import argparse
import random
import time
from dataclasses import replace

from ftbner import crf
from ftbner.evaluator import evaluate, fmt
from ftbner.model import NeType, TokenMention
from ftbner.splitter import SplitSpec, split
from ftbner.synthetic import make_sentence
from ftbner.tagger import tag_sentences, train_tagger

TYPES = (NeType.PERSON, NeType.LOCATION, NeType.ORGANIZATION, NeType.COMPANY)
OUTSIDE = [("le", "DET"), ("la", "DET"), ("de", "ADP"), ("à", "ADP"), ("dit", "VERB"),
           ("annonce", "VERB"), ("hier", "ADV"), ("président", "NOUN"), ("ville", "NOUN"),
           ("société", "NOUN"), ("groupe", "NOUN"), (",", "PUNCT"), (".", "PUNCT")]
# each type has a trigger noun that tends to precede it
TRIGGER = {NeType.PERSON: "président", NeType.LOCATION: "ville",
           NeType.ORGANIZATION: "groupe", NeType.COMPANY: "société"}


def name(rng):
    return rng.choice("BCDFGLMPRST") + "".join(rng.choice("aeiouyrnl") for _ in range(rng.randint(3, 7)))


def drifting_corpus(n, eras, names_per_era, seed):
    rng = random.Random(seed)
    lexicon = [{t: [name(rng) for _ in range(names_per_era)] for t in TYPES} for _ in range(eras)]
    corpus = []
    for k in range(n):
        era = lexicon[k * eras // n]
        forms, upos, mentions = [], [], []
        while len(forms) < rng.randint(6, 16):
            if rng.random() < 0.2:
                t = rng.choice(TYPES)
                if rng.random() < 0.7:
                    forms.append(TRIGGER[t])
                    upos.append("NOUN")
                forms.append(rng.choice(era[t]))
                upos.append("PROPN")
                mentions.append(TokenMention(len(forms), len(forms), t))
            else:
                f, p = rng.choice(OUTSIDE)
                forms.append(f)
                upos.append(p)
        corpus.append(make_sentence(forms, upos, mentions, f"s{k + 1}"))
    return corpus


def unseen_rate(train, test):
    seen = {s.forms[m.first_token - 1] for s in train for m in s.mentions}
    names = [s.forms[m.first_token - 1] for s in test for m in s.mentions]
    return 100.0 * sum(n not in seen for n in names) / max(len(names), 1)


def run(corpus, spec, config):
    train, dev, test = split(corpus, spec)
    result = train_tagger(train, dev, config=config)
    pred = tag_sentences(result.model, [replace(s, mentions=()) for s in test])
    return evaluate(test, pred).overall, unseen_rate(train, test)


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sentences", type=int, default=3000)
    p.add_argument("--eras", type=int, default=10)
    p.add_argument("--names-per-era", type=int, default=15)
    p.add_argument("--sizes", default=None, help="train,dev,test (default 80/10/10)")
    p.add_argument("--seeds", type=int, nargs="+", default=[1, 2, 3])
    p.add_argument("--max-epochs", type=int, default=40)
    p.add_argument("--corpus-seed", type=int, default=0)
    args = p.parse_args()

    corpus = drifting_corpus(args.sentences, args.eras, args.names_per_era, args.corpus_seed)
    if args.sizes:
        sizes = SplitSpec.parse(args.sizes)
    else:
        dev = test = len(corpus) // 10
        sizes = SplitSpec(len(corpus) - dev - test, dev, test)
    config = crf.TrainConfig(l1=0.1, l2=0.1, max_epochs=args.max_epochs)
    print("split\tunseen%\tP\tR\tF1\tseconds")
    for seed in [None, *args.seeds]:
        t0 = time.perf_counter()
        c, unseen = run(corpus, replace(sizes, seed=seed), config)
        label = "chronological" if seed is None else f"shuffled-{seed}"
        print(f"{label}\t{fmt(unseen)}\t{fmt(c.precision)}\t{fmt(c.recall)}\t{fmt(c.f1)}\t"
              f"{time.perf_counter() - t0:.1f}", flush=True)


if __name__ == "__main__":
    main()
