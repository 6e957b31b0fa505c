"""Synthetic corpus generators for end-to-end and calibration tests.

The planted-signal generator elevates the token rate of three lexicon
categories in class-1 documents. Rates are calibrated so each planted
category's relative-frequency feature has Cohen's D ~= 0.8 between classes
at the default document length; two null categories stay at equal rates.
Three independent planted signals put the Bayes accuracy of the balanced
classification task around 0.75, comfortably above the 0.70 gate while the
designated category alone still carries D ~= 0.8.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

DOC_LEN = 150
RATE_CLASS0 = 0.06
RATE_CLASS1 = 0.0764  # calibrated for D ~= 0.8 at DOC_LEN tokens
NULL_RATE = 0.05

PLANTED_CATEGORIES = ("cata", "catb", "catc")
NULL_CATEGORIES = ("catd", "cate")
WORDS_PER_CATEGORY = 5
N_FILLERS = 30


def category_words(category: str) -> list[str]:
    return [f"{category}w{i}" for i in range(1, WORDS_PER_CATEGORY + 1)]


def write_category_lexicon(path: Path) -> None:
    with path.open("w", encoding="utf-8") as handle:
        handle.write("term,category,weight\n")
        for category in PLANTED_CATEGORIES + NULL_CATEGORIES:
            for word in category_words(category):
                handle.write(f"{word},{category},1.0\n")


def _document_tokens(rng: np.random.Generator, label: int, doc_len: int) -> list[str]:
    planted_rate = RATE_CLASS1 if label == 1 else RATE_CLASS0
    categories = list(PLANTED_CATEGORIES) + list(NULL_CATEGORIES)
    rates = [planted_rate] * len(PLANTED_CATEGORIES) + [NULL_RATE] * len(NULL_CATEGORIES)
    filler_mass = 1.0 - sum(rates)
    fillers = [f"filler{i:02d}" for i in range(N_FILLERS)]
    choices = []
    weights = []
    for category, rate in zip(categories, rates):
        for word in category_words(category):
            choices.append(word)
            weights.append(rate / WORDS_PER_CATEGORY)
    for word in fillers:
        choices.append(word)
        weights.append(filler_mass / N_FILLERS)
    idx = rng.choice(len(choices), size=doc_len, p=np.asarray(weights))
    return [choices[i] for i in idx]


def planted_corpus(
    path: Path,
    n_docs: int = 2000,
    seed: int = 7,
    p_yta: float = 0.35,
    doc_len: int = DOC_LEN,
) -> None:
    """JSONL corpus where class-1 (YTA) documents over-use the planted
    categories; passes ingest at min_words <= doc_len, min_comments <= 25."""
    rng = np.random.default_rng(seed)
    with path.open("w", encoding="utf-8") as handle:
        for i in range(n_docs):
            label = int(rng.random() < p_yta)
            tokens = _document_tokens(rng, label, doc_len)
            record = {
                "id": f"s{i:05d}",
                "title": f"synthetic submission {i}",
                "body": " ".join(tokens),
                "label": "YTA" if label else "NTA",
                "num_comments": 25,
                "created_utc": 1_600_000_000 + i,
                "author": f"user{i:05d}",
            }
            handle.write(json.dumps(record) + "\n")


def noise_features(
    n_samples: int, n_features: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Pure-noise design: iid N(0,1) features, labels independent of them."""
    X = rng.standard_normal((n_samples, n_features))
    y = (rng.random(n_samples) < 0.5).astype(int)
    # guarantee both classes so logistic fits are well-posed
    if y.sum() == 0:
        y[0] = 1
    elif y.sum() == n_samples:
        y[0] = 0
    return X, y
