"""Text normalization and vocabulary construction.

Descriptions are lower-cased, every character outside the Unicode letter
set becomes a space, one-character words are dropped, and each surviving
token is reduced from plural to singular by an ordered suffix-rule table
(shipped as ``data/plural_rules.txt``). The vocabulary then keeps every
word that occurs at least twice in the whole corpus, indexed in
lexicographic order so downstream artifacts are reproducible byte for byte.

Accented vowels and ç are letters and are kept as-is: the suffix rules
distinguish e.g. ``-éis`` from ``-eis``, so accent folding would corrupt
them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

TokenSequence = list[str]


class EmptyCorpusError(ValueError):
    """Raised when a vocabulary is requested for a corpus with no tokens."""


@dataclass(frozen=True)
class SuffixRule:
    suffix: str
    replacement: str
    min_stem: int
    exceptions: frozenset[str]

    def apply(self, word: str) -> str | None:
        """The reduced word if this rule fires for it, else None."""
        if not word.endswith(self.suffix):
            return None
        if len(word) - len(self.suffix) < self.min_stem:
            return None
        if word in self.exceptions:
            return None
        return word[: -len(self.suffix)] + self.replacement


def parse_rule_table(text: str) -> list[SuffixRule]:
    """Parse the pipe-separated rule file format; '#' lines are comments."""
    rules = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("|")
        if len(parts) != 4:
            raise ValueError(f"rule line {line_no}: expected 4 fields, got {len(parts)}")
        suffix, replacement, min_stem_raw, exceptions_raw = parts
        if not suffix:
            raise ValueError(f"rule line {line_no}: empty suffix")
        exceptions = frozenset(w for w in exceptions_raw.split(",") if w)
        rules.append(SuffixRule(suffix, replacement, int(min_stem_raw), exceptions))
    return rules


def load_rule_table(path: str | Path | None = None) -> list[SuffixRule]:
    if path is not None:
        return parse_rule_table(Path(path).read_text(encoding="utf-8"))
    text = resources.files("categoriza.data").joinpath("plural_rules.txt").read_text("utf-8")
    return parse_rule_table(text)


_RULES: list[SuffixRule] | None = None


def _rules() -> list[SuffixRule]:
    global _RULES
    if _RULES is None:
        _RULES = load_rule_table()
    return _RULES


def singularize(token: str) -> str:
    """Reduce a lowercase, letters-only token to singular form.

    Rules are tried in table order; the first applicable one fires and ends
    the scan, so at most one rule rewrites the word. A rule blocked by its
    exception list does not stop later rules from being tried (this is how
    'mães' falls through to the final -s rule and becomes 'mãe'). Tokens
    matching no rule come back unchanged.
    """
    for rule in _rules():
        reduced = rule.apply(token)
        if reduced is not None:
            return reduced
    return token


def normalize(text: str) -> TokenSequence:
    """Normalize raw description text into singular, lowercase tokens.

    Idempotent: normalizing the space-joined output reproduces it.
    """
    lowered = text.lower()
    cleaned = "".join(ch if ch.isalpha() else " " for ch in lowered)
    return [singularize(tok) for tok in cleaned.split() if len(tok) > 1]


@dataclass(frozen=True, eq=False)
class Vocabulary:
    """Corpus words that occur at least twice, indexed lexicographically.

    ``doc_freq[i]`` counts documents containing word i; ``corpus_freq[i]``
    counts its total occurrences (>= 2 by construction: hapaxes are
    removed).
    """

    words: tuple[str, ...]
    doc_freq: np.ndarray
    corpus_freq: np.ndarray
    _index: dict[str, int] = field(repr=False, compare=False, default_factory=dict)

    def __post_init__(self) -> None:
        if list(self.words) != sorted(self.words):
            raise ValueError("vocabulary words must be in lexicographic order")
        if len(self.doc_freq) != len(self.words) or len(self.corpus_freq) != len(self.words):
            raise ValueError("frequency arrays must align with the word list")
        if len(self.words) and int(self.corpus_freq.min()) < 2:
            raise ValueError("vocabulary contains a hapax (corpus_freq < 2)")
        if len(self.words) and int(self.doc_freq.min()) < 1:
            raise ValueError("vocabulary contains a word with doc_freq < 1")
        self._index.update({w: i for i, w in enumerate(self.words)})

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word: str) -> bool:
        return word in self._index

    def index_of(self, word: str) -> int:
        return self._index[word]

    def get(self, word: str) -> int | None:
        return self._index.get(word)


def build_vocabulary(docs: Iterable[TokenSequence]) -> Vocabulary:
    """Count the corpus and keep every word that occurs more than once.

    Deterministic for a given multiset of documents: the counts are
    order-independent and the index is lexicographic.
    """
    corpus_counts: dict[str, int] = {}
    doc_counts: dict[str, int] = {}
    n_docs_nonempty = 0
    for tokens in docs:
        if not tokens:
            continue
        n_docs_nonempty += 1
        for tok in tokens:
            corpus_counts[tok] = corpus_counts.get(tok, 0) + 1
        for tok in set(tokens):
            doc_counts[tok] = doc_counts.get(tok, 0) + 1
    if n_docs_nonempty == 0:
        raise EmptyCorpusError("empty corpus")
    words = tuple(sorted(w for w, c in corpus_counts.items() if c >= 2))
    doc_freq = np.array([doc_counts[w] for w in words], dtype=np.int64)
    corpus_freq = np.array([corpus_counts[w] for w in words], dtype=np.int64)
    return Vocabulary(words, doc_freq, corpus_freq)


def vocabulary_from_counts(
    words: Sequence[str],
    doc_freq: Sequence[int] | np.ndarray,
    corpus_freq: Sequence[int] | np.ndarray,
) -> Vocabulary:
    """Rebuild a Vocabulary from persisted counts, re-validating invariants."""
    return Vocabulary(
        tuple(words),
        np.asarray(doc_freq, dtype=np.int64),
        np.asarray(corpus_freq, dtype=np.int64),
    )
