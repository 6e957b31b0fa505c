"""Generic weighted-lexicon scoring plus the corpus-aligned feature table.

One engine covers every dictionary feature family (emotion, sentiment,
dominance, concreteness/familiarity, LIWC-style category files): a lexicon
maps terms to (category, weight) pairs and documents are scored as weighted
relative frequencies over the token bag.
"""

from __future__ import annotations

import csv
import json
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .text import Token

# Fixed pronoun inventories; the ratio combines singular and plural.
FIRST_SINGULAR = frozenset({"i", "i'm", "i've", "i'd", "i'll", "my", "me", "mine", "myself"})
FIRST_PLURAL = frozenset({"we", "we're", "our", "ours", "us", "ourselves"})
THIRD_SINGULAR = frozenset(
    {"he", "she", "him", "her", "his", "hers", "he's", "she's", "himself", "herself"}
)
THIRD_PLURAL = frozenset({"they", "them", "their", "theirs", "they're", "themselves"})


@dataclass(frozen=True)
class Lexicon:
    name: str
    entries: Mapping[str, tuple[tuple[str, float], ...]]
    categories: tuple[str, ...]


@dataclass
class CategoryScores:
    values: dict[str, float]
    empty_document: bool = False


@dataclass(frozen=True)
class PronounCounts:
    first_sing: int
    first_plur: int
    third_sing: int
    third_plur: int
    ratio_1st_3rd: float


def load_lexicon(path: str | Path, name: str | None = None) -> Lexicon:
    """Load a `term,category,weight` CSV (weight optional, default 1.0).

    Rejects malformed rows and duplicate (term, category) pairs, citing the
    line number.
    """
    path = Path(path)
    entries: dict[str, list[tuple[str, float]]] = {}
    seen: set[tuple[str, str]] = set()
    with path.open(encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header[:2]] != ["term", "category"]:
            raise ValueError(f"{path}: expected header 'term,category[,weight]'")
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) < 2 or len(row) > 3:
                raise ValueError(f"{path}:{lineno}: expected 2 or 3 columns, got {len(row)}")
            term = row[0].strip().lower()
            category = row[1].strip()
            if not term or not category:
                raise ValueError(f"{path}:{lineno}: empty term or category")
            raw_weight = row[2].strip() if len(row) == 3 and row[2].strip() else "1.0"
            try:
                weight = float(raw_weight)
            except ValueError:
                raise ValueError(f"{path}:{lineno}: weight {raw_weight!r} is not a number") from None
            if not math.isfinite(weight):
                raise ValueError(f"{path}:{lineno}: weight must be finite")
            if (term, category) in seen:
                raise ValueError(f"{path}:{lineno}: duplicate entry ({term}, {category})")
            seen.add((term, category))
            entries.setdefault(term, []).append((category, weight))
    categories = tuple(sorted({c for _, c in seen}))
    frozen = {term: tuple(pairs) for term, pairs in entries.items()}
    return Lexicon(name or path.stem, frozen, categories)


def _surfaces(tokens: Sequence[Token | str]) -> list[str]:
    return [t.surface if isinstance(t, Token) else t for t in tokens]


def score(tokens: Sequence[Token | str], lex: Lexicon) -> CategoryScores:
    """Per-category weighted relative frequency: sum_t weight(t,c) * count(t)/N."""
    values = {c: 0.0 for c in lex.categories}
    surfaces = _surfaces(tokens)
    n = len(surfaces)
    if n == 0:
        return CategoryScores(values, empty_document=True)
    counts = Counter(surfaces)
    for term, count in counts.items():
        for category, weight in lex.entries.get(term, ()):
            values[category] += weight * count / n
    return CategoryScores(values, empty_document=False)


def pronoun_features(tokens: Sequence[Token | str]) -> PronounCounts:
    """Count 1st/3rd person pronouns; ratio uses +1/+1 smoothing."""
    fs = fp = ts = tp = 0
    for surface in _surfaces(tokens):
        if surface in FIRST_SINGULAR:
            fs += 1
        elif surface in FIRST_PLURAL:
            fp += 1
        elif surface in THIRD_SINGULAR:
            ts += 1
        elif surface in THIRD_PLURAL:
            tp += 1
    ratio = (fs + fp + 1) / (ts + tp + 1)
    return PronounCounts(fs, fp, ts, tp, ratio)


@dataclass
class FeatureTable:
    """Named feature values aligned across submissions (one row per id)."""

    feature_names: list[str]
    rows: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        if len(set(self.feature_names)) != len(self.feature_names):
            raise ValueError("duplicate feature names")
        self.rows = {sid: self._coerce(sid, vals) for sid, vals in self.rows.items()}

    def _coerce(self, sid: str, values) -> np.ndarray:
        arr = np.asarray(values, dtype=float)
        if arr.shape != (len(self.feature_names),):
            raise ValueError(
                f"row {sid!r}: expected {len(self.feature_names)} values, got {arr.shape}"
            )
        if not np.all(np.isfinite(arr)):
            raise ValueError(f"row {sid!r}: non-finite feature value")
        return arr

    @property
    def ids(self) -> list[str]:
        return list(self.rows)

    def add_row(self, sid: str, values) -> None:
        if sid in self.rows:
            raise ValueError(f"duplicate submission id {sid!r}")
        self.rows[sid] = self._coerce(sid, values)

    def column(self, name: str, ids: Sequence[str] | None = None) -> np.ndarray:
        j = self.feature_names.index(name)
        use = self.ids if ids is None else list(ids)
        return np.array([self.rows[sid][j] for sid in use])

    def matrix(self, ids: Sequence[str] | None = None) -> np.ndarray:
        use = self.ids if ids is None else list(ids)
        if not use:
            return np.empty((0, len(self.feature_names)))
        return np.vstack([self.rows[sid] for sid in use])

    def select(self, names: Sequence[str]) -> "FeatureTable":
        idx = [self.feature_names.index(n) for n in names]
        return FeatureTable(list(names), {sid: row[idx] for sid, row in self.rows.items()})

    def subset_rows(self, ids: Sequence[str]) -> "FeatureTable":
        return FeatureTable(list(self.feature_names), {sid: self.rows[sid] for sid in ids})

    def merge(self, other: "FeatureTable") -> "FeatureTable":
        """Inner join on ids; feature names must not collide."""
        overlap = set(self.feature_names) & set(other.feature_names)
        if overlap:
            raise ValueError(f"feature name collision: {sorted(overlap)}")
        shared = [sid for sid in self.rows if sid in other.rows]
        names = self.feature_names + other.feature_names
        rows = {sid: np.concatenate([self.rows[sid], other.rows[sid]]) for sid in shared}
        return FeatureTable(names, rows)

    def to_csv(self, path: str | Path, meta: str | None = None) -> None:
        """Write id + feature columns; a JSON sidecar lists the feature names."""
        path = Path(path)
        with path.open("w", encoding="utf-8", newline="") as handle:
            if meta is not None:
                handle.write(f"# {meta}\n")
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(["id", *self.feature_names])
            for sid, row in self.rows.items():
                writer.writerow([sid, *[repr(float(v)) for v in row]])
        sidecar = path.with_suffix(path.suffix + ".features.json")
        payload = {"feature_names": self.feature_names}
        if meta is not None:
            payload["meta"] = meta
        sidecar.write_text(
            json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )

    @classmethod
    def from_csv(cls, path: str | Path) -> "FeatureTable":
        path = Path(path)
        with path.open(encoding="utf-8", newline="") as handle:
            first = handle.readline()
            if not first.startswith("#"):
                handle.seek(0)
            reader = csv.reader(handle)
            header = next(reader)
            if not header or header[0] != "id":
                raise ValueError(f"{path}: expected an 'id' header column")
            table = cls(header[1:])
            for row in reader:
                if row:
                    table.add_row(row[0], [float(v) for v in row[1:]])
        return table


def unigram_matrix(
    docs: Sequence[tuple[str, Sequence[Token | str]]],
    min_doc_fraction: float = 0.01,
) -> FeatureTable:
    """Relative-frequency features for unigrams above a document-frequency floor.

    A unigram is retained iff it appears in at least
    max(1, floor(min_doc_fraction * n_docs)) documents; 38,060 docs at 1%
    gives the 380-document floor.
    """
    if not docs:
        raise ValueError("empty corpus")
    if not 0 < min_doc_fraction <= 1:
        raise ValueError("min_doc_fraction must be in (0, 1]")
    doc_freq: Counter[str] = Counter()
    bags: list[tuple[str, Counter[str], int]] = []
    for sid, tokens in docs:
        surfaces = _surfaces(tokens)
        counts = Counter(surfaces)
        doc_freq.update(counts.keys())
        bags.append((sid, counts, len(surfaces)))
    threshold = max(1, math.floor(min_doc_fraction * len(bags)))
    retained = sorted(term for term, df in doc_freq.items() if df >= threshold)
    table = FeatureTable(retained)
    index = {term: j for j, term in enumerate(retained)}
    for sid, counts, n in bags:
        row = np.zeros(len(retained))
        if n:
            for term, count in counts.items():
                j = index.get(term)
                if j is not None:
                    row[j] = count / n
        table.add_row(sid, row)
    return table
