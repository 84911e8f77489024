"""Exact unsmoothed N-gram probabilities from a finite corpus.

Counting is within-sentence: a k-gram is a contiguous run of tokens inside a
single sentence, never crossing sentence boundaries, and there are no
begin/end pseudo-tokens.  All probabilities are exact Fractions so the
telescoping identity P(S) = C(S)/C(empty context) can be asserted with
rational equality.  The ellipsis token "…" is an ordinary vocabulary item.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence


class EmptyCorpus(ValueError):
    """The input contained no tokens."""


class EncodingError(ValueError):
    """The input was not valid UTF-8."""


class ZeroContext(ValueError):
    """The conditioning context never occurs; the conditional is 0/0."""


@dataclass(frozen=True)
class Corpus:
    sentences: tuple[tuple[str, ...], ...]
    token_vocabulary: frozenset
    total_token_count: int


@dataclass(frozen=True)
class NGramTable:
    """Occurrence counts for every contiguous k-gram with k <= n_max.

    The empty context's count is the total token count, so unigram
    conditional probabilities are plain relative frequencies.
    """

    counts: dict
    n_max: int
    base_count: int

    def count(self, tokens: Sequence[str]) -> int:
        tokens = tuple(tokens)
        if len(tokens) == 0:
            return self.base_count
        return self.counts.get(tokens, 0)

    def write_tsv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for ngram in sorted(self.counts):
                fh.write(" ".join(ngram) + "\t" + str(self.counts[ngram]) + "\n")


def ingest(text, n_max: int = 3, sentence_delimiter: str = "\n") -> tuple[Corpus, NGramTable]:
    """Tokenize one sentence per delimiter-separated line and count n-grams."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise EncodingError(str(exc)) from exc
    sentences = []
    for line in text.split(sentence_delimiter):
        tokens = tuple(line.split())
        if tokens:
            sentences.append(tokens)
    if not sentences:
        raise EmptyCorpus("no tokens in input")
    counts: dict = {}
    total = 0
    vocab = set()
    for sentence in sentences:
        total += len(sentence)
        vocab.update(sentence)
        for k in range(1, n_max + 1):
            for i in range(len(sentence) - k + 1):
                gram = sentence[i : i + k]
                counts[gram] = counts.get(gram, 0) + 1
    corpus = Corpus(tuple(sentences), frozenset(vocab), total)
    return corpus, NGramTable(counts, n_max, total)


def conditional_prob(table: NGramTable, next_token: str, context: Sequence[str]) -> Fraction:
    """Exact C(context + next) / C(context); empty context divides by the
    total token count."""
    context = tuple(context)
    if len(context) >= table.n_max:
        raise ValueError(
            f"context of length {len(context)} needs order {len(context) + 1} "
            f"counts but the table holds n_max={table.n_max}"
        )
    denominator = table.count(context)
    if denominator == 0:
        raise ZeroContext(f"context {context!r} has zero count")
    return Fraction(table.count(context + (next_token,)), denominator)


def sentence_prob(table: NGramTable, sentence: Sequence[str]) -> Fraction:
    """Chain-rule product of conditional probabilities over the full prefix.

    The sentence must fit within the table order; longer queries are
    rejected rather than Markov-truncated.
    """
    sentence = tuple(sentence)
    if len(sentence) == 0:
        raise ValueError("sentence is empty")
    if len(sentence) > table.n_max:
        raise ValueError(
            f"sentence of length {len(sentence)} exceeds table order {table.n_max}; "
            "the unsmoothed chain is exact only up to n_max"
        )
    prob = Fraction(1)
    for k in range(len(sentence)):
        prob *= conditional_prob(table, sentence[k], sentence[:k])
        if prob == 0:
            return Fraction(0)
    return prob


def brute_force_count(corpus: Corpus, tokens: Sequence[str]) -> int:
    """Independent contiguous-occurrence counter scanning the raw sentences.

    Deliberately separate from NGramTable so it can serve as an oracle for
    the chain-rule computation.
    """
    tokens = tuple(tokens)
    if len(tokens) == 0:
        return corpus.total_token_count
    hits = 0
    for sentence in corpus.sentences:
        for i in range(len(sentence) - len(tokens) + 1):
            if sentence[i : i + len(tokens)] == tokens:
                hits += 1
    return hits


@dataclass(frozen=True)
class ObservationReport:
    chain_value: Fraction
    brute_force_value: Fraction
    equal: bool


def direct_observation_check(
    table: NGramTable, corpus: Corpus, sentence: Sequence[str]
) -> ObservationReport:
    """Compare the chain product against the direct relative frequency
    C(S)/C(empty context) computed by the independent counter."""
    chain = sentence_prob(table, sentence)
    brute = Fraction(brute_force_count(corpus, sentence), corpus.total_token_count)
    return ObservationReport(chain, brute, chain == brute)
