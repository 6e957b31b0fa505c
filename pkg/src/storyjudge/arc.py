"""Emotional story arc: rule-based sentence valence with negation/booster
adjustments, narrator-sentence filtering, fixed-count chunking with a slope
summary, and per-chunk class comparisons.

Input text is normalized (lowercased) upstream, so capitalization-based
amplification heuristics have no effect here by design.
"""

from __future__ import annotations

import csv
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .character import EntityClass, NARRATOR, SvoTuple, span_matches
from .stats import T_SENTINEL, welch_t
from .text import Sentence

# Rule constants from the published rule-based sentiment algorithm; exposed
# as arguments so a config can override them.
COMPOUND_NORM = 15.0
NEGATION_FACTOR = -0.74
BOOSTER_INCREMENT = 0.293
_BOOSTER_DAMPING = {1: 1.0, 2: 0.95, 3: 0.9}
_CONTEXT_WINDOW = 3


@dataclass(frozen=True)
class ValenceLexicon:
    valences: dict[str, float]
    boosters: dict[str, float]
    negations: frozenset[str]


@dataclass(frozen=True)
class ArcProfile:
    chunk_means: tuple[float, ...]
    slope: float
    n_sentences_used: int


@dataclass(frozen=True)
class ChunkComparison:
    chunk: int
    mean_yta: float
    mean_nta: float
    t: float
    p: float
    zero_variance_guard: bool = False


def load_valence_lexicon(
    valence_path: str | Path,
    boosters_path: str | Path | None = None,
    negations_path: str | Path | None = None,
) -> ValenceLexicon:
    """Valence CSV `term,valence` plus optional plain-text booster/negation
    lists (booster lines may carry an increment after whitespace)."""
    valences: dict[str, float] = {}
    path = Path(valence_path)
    with path.open(encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header[:2]] != ["term", "valence"]:
            raise ValueError(f"{path}: expected header 'term,valence'")
        for lineno, row in enumerate(reader, start=2):
            if not row or not row[0].strip():
                continue
            if len(row) != 2:
                raise ValueError(f"{path}:{lineno}: expected 2 columns")
            try:
                valences[row[0].strip().lower()] = float(row[1])
            except ValueError:
                raise ValueError(f"{path}:{lineno}: bad valence {row[1]!r}") from None
    boosters: dict[str, float] = {}
    if boosters_path is not None:
        for line in Path(boosters_path).read_text(encoding="utf-8").splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            boosters[parts[0].lower()] = (
                float(parts[1]) if len(parts) > 1 else BOOSTER_INCREMENT
            )
    negations: set[str] = set()
    if negations_path is not None:
        for line in Path(negations_path).read_text(encoding="utf-8").splitlines():
            line = line.strip()
            if line and not line.startswith("#"):
                negations.add(line.lower())
    return ValenceLexicon(valences, boosters, frozenset(negations))


def make_valence_lexicon(
    valences: dict[str, float],
    boosters: dict[str, float] | None = None,
    negations: Sequence[str] = (),
) -> ValenceLexicon:
    return ValenceLexicon(
        {k.lower(): float(v) for k, v in valences.items()},
        {k.lower(): float(v) for k, v in (boosters or {}).items()},
        frozenset(w.lower() for w in negations),
    )


def _surfaces(sentence: Sentence | Sequence) -> list[str]:
    tokens = sentence.tokens if isinstance(sentence, Sentence) else sentence
    return [t.surface if hasattr(t, "surface") else str(t) for t in tokens]


def sentence_sentiment(
    sentence: Sentence | Sequence,
    lex: ValenceLexicon,
    compound_norm: float = COMPOUND_NORM,
    negation_factor: float = NEGATION_FACTOR,
) -> float:
    """Normalized sentence score in (-1, 1): sum adjusted token valences,
    then s / sqrt(s^2 + compound_norm)."""
    surfaces = _surfaces(sentence)
    total = 0.0
    for i, word in enumerate(surfaces):
        valence = lex.valences.get(word)
        if valence is None:
            continue
        negated = False
        boost = 0.0
        for dist in range(1, _CONTEXT_WINDOW + 1):
            j = i - dist
            if j < 0:
                break
            prev = surfaces[j]
            if prev in lex.negations:
                negated = True
            elif prev in lex.boosters:
                boost += lex.boosters[prev] * _BOOSTER_DAMPING[dist]
        if boost:
            valence += boost if valence >= 0 else -boost
        if negated:
            valence *= negation_factor
        total += valence
    if total == 0.0:
        return 0.0
    return float(total / np.sqrt(total * total + compound_norm))


def chunk_sizes(n_items: int, n_chunks: int) -> list[int]:
    """Contiguous chunk sizes differing by at most 1, longer chunks first."""
    if n_chunks <= 0:
        raise ValueError("n_chunks must be positive")
    base, extra = divmod(n_items, n_chunks)
    return [base + 1 if i < extra else base for i in range(n_chunks)]


def _ols_slope(values: Sequence[float]) -> float:
    y = np.asarray(values, dtype=float)
    if y.size < 2:
        return 0.0
    x = np.arange(y.size, dtype=float)
    xc = x - x.mean()
    return float((xc @ (y - y.mean())) / (xc @ xc))


def story_arc(
    sentences: Sequence[Sentence],
    tuples: Sequence[SvoTuple],
    lex: ValenceLexicon,
    narrator: EntityClass = NARRATOR,
    n_chunks: int = 10,
    min_sentence_words: int = 6,
    compound_norm: float = COMPOUND_NORM,
    negation_factor: float = NEGATION_FACTOR,
) -> Optional[ArcProfile]:
    """Arc over sentences that are long enough and reference the narrator in
    some tuple's subject or object slot. Returns None (invalid arc) when
    fewer kept sentences than chunks."""
    if n_chunks <= 0:
        raise ValueError("n_chunks must be positive")
    by_sentence: dict[int, list[SvoTuple]] = defaultdict(list)
    for tup in tuples:
        by_sentence[tup.sentence_index].append(tup)
    kept: list[float] = []
    for sentence in sentences:
        if len(sentence.tokens) < min_sentence_words:
            continue
        refs = by_sentence.get(sentence.index, ())
        if not any(
            span_matches(t.subject_text, narrator) or span_matches(t.object_text, narrator)
            for t in refs
        ):
            continue
        kept.append(sentence_sentiment(sentence, lex, compound_norm, negation_factor))
    if len(kept) < n_chunks:
        return None
    means: list[float] = []
    cursor = 0
    for size in chunk_sizes(len(kept), n_chunks):
        means.append(float(np.mean(kept[cursor : cursor + size])))
        cursor += size
    return ArcProfile(tuple(means), _ols_slope(means), len(kept))


def arc_class_comparison(
    arcs_yta: Sequence[ArcProfile], arcs_nta: Sequence[ArcProfile]
) -> list[ChunkComparison]:
    """Per-chunk Welch comparison of the two label classes (figure input)."""
    if len(arcs_yta) < 2 or len(arcs_nta) < 2:
        raise ValueError("each class needs at least 2 valid arcs")
    lengths = {len(a.chunk_means) for a in arcs_yta} | {len(a.chunk_means) for a in arcs_nta}
    if len(lengths) != 1:
        raise ValueError(f"arcs disagree on chunk count: {sorted(lengths)}")
    n_chunks = lengths.pop()
    rows: list[ChunkComparison] = []
    for chunk in range(n_chunks):
        a = [arc.chunk_means[chunk] for arc in arcs_yta]
        b = [arc.chunk_means[chunk] for arc in arcs_nta]
        t, p = welch_t(a, b)
        rows.append(
            ChunkComparison(
                chunk,
                float(np.mean(a)),
                float(np.mean(b)),
                t,
                p,
                zero_variance_guard=abs(t) == T_SENTINEL,
            )
        )
    return rows
