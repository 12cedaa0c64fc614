"""Regenerate the bundled fixture corpus and its stand-in embedding table.

    python scripts/make_fixture.py

Writes src/abstractclf/data/fixture_{train,validation}.tsv and
fixture_embeddings.txt.  The abstracts are synthetic: each class draws from its
own topical vocabulary plus a shared pool of generic research phrasing, with a
little cross-class leakage so the task is not trivially separable.
"""

import random
from pathlib import Path

import numpy as np

from abstractclf.corpus import LABELS, Corpus, Document, save_corpus
from abstractclf.embed import EmbeddingTable, save_embeddings
from abstractclf.textprep import tokenize

OUT = Path(__file__).resolve().parents[1] / "src" / "abstractclf" / "data"
SEED = 20210125
EMBED_DIM = 32

TOPICS = {
    "CL": ["language models", "machine translation", "named entity recognition",
           "dependency parsing", "sentiment analysis", "word embeddings",
           "question answering", "text summarization", "speech transcripts",
           "morphological analysis", "annotated corpora", "low-resource languages"],
    "CR": ["encryption schemes", "side-channel attacks", "malware detection",
           "authentication protocols", "zero-knowledge proofs", "public-key cryptography",
           "intrusion detection", "differential privacy", "hash functions",
           "key exchange", "adversaries", "security vulnerabilities"],
    "DC": ["distributed systems", "cluster scheduling", "consensus protocols",
           "fault tolerance", "MapReduce jobs", "cloud workloads",
           "parallel computation", "replicated state machines", "load balancing",
           "GPU clusters", "message passing", "data centers"],
    "DS": ["approximation algorithms", "graph algorithms", "shortest paths",
           "data structures", "hash tables", "dynamic programming",
           "lower bounds", "matching problems", "sorting networks",
           "streaming algorithms", "polynomial time", "randomized algorithms"],
    "LO": ["modal logic", "type theory", "model checking", "temporal logic",
           "proof systems", "automata", "lambda calculus", "decidability",
           "first-order formulas", "bisimulation", "satisfiability", "coinduction"],
    "NI": ["wireless networks", "routing protocols", "network throughput",
           "5G base stations", "packet loss", "software-defined networking",
           "congestion control", "Internet traffic", "mobile edge devices",
           "network latency", "spectrum allocation", "sensor networks"],
    "SE": ["software testing", "code review", "bug reports", "refactoring",
           "continuous integration", "program repair", "developer productivity",
           "static analysis tools", "requirements engineering", "open-source projects",
           "technical debt", "unit tests"],
}

VERBS = ["study", "analyze", "investigate", "revisit", "characterize", "model", "improve"]
TEMPLATES = [
    "We {verb} {a} and show how {b} can be handled in practice.",
    "This paper presents a new approach to {a} based on {b}.",
    "Our method combines {a} with {b} to address a long-standing limitation.",
    "Experiments on {a} demonstrate clear gains over prior work on {b}.",
    "We further discuss how {a} interacts with {b} under realistic assumptions.",
    "A detailed evaluation of {a} reveals several open problems related to {b}.",
    "The proposed framework for {a} scales to large instances of {b} in our experiments.",
    "In contrast to earlier studies of {a}, we focus on {b}.",
]
SHORT = ["Results are encouraging.", "Code is available.", "We conclude.",
         "This is new.", "Details follow."]


def make_abstract(rng, code):
    own = TOPICS[code]
    others = [t for c, ts in TOPICS.items() if c != code for t in ts]
    sentences = []
    for _ in range(rng.randint(3, 5)):
        a = rng.choice(own)
        b = rng.choice(own) if rng.random() < 0.8 else rng.choice(others)
        sentences.append(rng.choice(TEMPLATES).format(verb=rng.choice(VERBS), a=a, b=b))
    if rng.random() < 0.6:
        sentences.insert(rng.randint(1, len(sentences)), rng.choice(SHORT))
    return " ".join(sentences)


def embed(texts, dim, seed):
    """Hashed bag-of-words random projection; a stand-in for an external encoder."""
    vocab = {}
    rng = np.random.default_rng(seed)
    rows = []
    for text in texts:
        v = np.zeros(dim)
        for tok in tokenize(text.lower()):
            if tok not in vocab:
                vocab[tok] = rng.normal(size=dim)
            v += vocab[tok]
        rows.append(np.round(v, 6))
    return rows


def main():
    rng = random.Random(SEED)
    train, valid = [], []
    for label in LABELS:
        for i in range(6):
            train.append(Document(f"tr-{label.code}-{i}", make_abstract(rng, label.code), label))
    for j in range(18):
        label = LABELS[j % len(LABELS)]
        valid.append(Document(f"va-{label.code}-{j}", make_abstract(rng, label.code), label))
    rng.shuffle(train)
    save_corpus(Corpus("train", tuple(train)), OUT / "fixture_train.tsv")
    save_corpus(Corpus("validation", tuple(valid)), OUT / "fixture_validation.tsv")

    docs = train + valid
    table = EmbeddingTable(EMBED_DIM)
    for doc, vec in zip(docs, embed([d.text for d in docs], EMBED_DIM, SEED)):
        table.vectors[doc.id] = vec
    save_embeddings(table, OUT / "fixture_embeddings.txt")


if __name__ == "__main__":
    main()
