"""Deterministic text preprocessing shared by every feature extractor.

Normalization, social-media-aware tokenization (emoticons, contractions),
rule-based sentence splitting, and Porter stemming. Everything here is a
pure function so documents can be processed concurrently.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Sequence


@dataclass(frozen=True)
class Token:
    surface: str
    char_span: tuple[int, int]

    def __post_init__(self):
        if not self.surface:
            raise ValueError("empty token surface")


@dataclass(frozen=True)
class Sentence:
    index: int
    tokens: tuple[Token, ...]


# Emoticon inventory kept intact by the tokenizer. Input is already
# lowercased, so the table holds lowercase forms only.
DEFAULT_EMOTICONS: tuple[str, ...] = (
    ":)", ":(", ":d", ":p", ":o", ":s", ":/", ":|", ":*", ":'(", ":')",
    ":-)", ":-(", ":-d", ":-p", ":-o", ":-/", ":-|",
    ";)", ";-)", ";d", ";p",
    "=)", "=(", "=d", "=/", "=p",
    "xd", "x-d", "<3", "</3", ":3", "^_^", "^-^", "-_-", "o_o",
)

DEFAULT_ABBREVIATIONS: tuple[str, ...] = (
    "e.g.", "i.e.", "etc.", "vs.", "mr.", "mrs.", "ms.", "dr.", "prof.",
    "st.", "jr.", "sr.", "approx.", "ca.", "est.", "misc.", "min.", "max.",
    "a.m.", "p.m.", "u.s.", "u.k.",
)


def load_wordlist(path: str | Path) -> tuple[str, ...]:
    """Read a plain-text list, one entry per line; blanks and # comments skipped."""
    entries = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            entries.append(line)
    return tuple(entries)


def normalize(raw: str) -> str:
    """Collapse whitespace, lowercase, strip, drop non-UTF8-encodable chars."""
    cleaned = raw.encode("utf-8", "ignore").decode("utf-8", "ignore")
    return " ".join(cleaned.lower().split())


def _guarded(pattern: str) -> str:
    """Add boundary lookarounds when a literal starts/ends with a word char."""
    out = re.escape(pattern)
    if pattern[0].isalnum():
        out = r"(?<![a-z0-9])" + out
    if pattern[-1].isalnum():
        out = out + r"(?![a-z0-9])"
    return out


@lru_cache(maxsize=8)
def _tokenizer_re(emoticons: tuple[str, ...], abbreviations: tuple[str, ...]) -> re.Pattern:
    by_len = sorted(abbreviations, key=len, reverse=True)
    abbrev_alt = "|".join(r"(?<![a-z0-9'])" + re.escape(a) for a in by_len)
    emo_alt = "|".join(_guarded(e) for e in sorted(emoticons, key=len, reverse=True))
    # contractions / quote-glued misspellings (i'm, i"m, don't) stay one token
    word = r"[a-z0-9]+(?:['\"][a-z0-9]+)*"
    run = r"(?P<pr>\S)(?P=pr)*"
    parts = [p for p in (abbrev_alt, emo_alt, word, run) if p]
    return re.compile("|".join(f"(?:{p})" for p in parts))


def tokenize(
    normalized: str,
    emoticons: Sequence[str] = DEFAULT_EMOTICONS,
    abbreviations: Sequence[str] = DEFAULT_ABBREVIATIONS,
) -> list[Token]:
    """Split normalized text into tokens, keeping emoticons and contractions whole.

    Punctuation is emitted as its own tokens (same-char runs), so parentheses
    and quotation marks survive as unigram features.
    """
    pattern = _tokenizer_re(tuple(emoticons), tuple(abbreviations))
    return [Token(m.group(0), m.span()) for m in pattern.finditer(normalized)]


def _is_terminal(surface: str) -> bool:
    return all(ch in ".!?" for ch in surface)


def split_sentences(
    tokens: Sequence[Token],
    abbreviations: Sequence[str] = DEFAULT_ABBREVIATIONS,
) -> list[Sentence]:
    """Split after terminal punctuation not belonging to a known abbreviation.

    A document without terminal punctuation is a single sentence. Sentence
    token sequences concatenate back to the input sequence.
    """
    abbrev = set(abbreviations)
    sentences: list[Sentence] = []
    current: list[Token] = []
    for pos, tok in enumerate(tokens):
        current.append(tok)
        if not _is_terminal(tok.surface):
            continue
        nxt = tokens[pos + 1] if pos + 1 < len(tokens) else None
        if nxt is not None and _is_terminal(nxt.surface):
            continue  # attach trailing terminals to the same sentence
        if tok.surface == "." and len(current) >= 2 and current[-2].surface + "." in abbrev:
            continue
        sentences.append(Sentence(len(sentences), tuple(current)))
        current = []
    if current:
        sentences.append(Sentence(len(sentences), tuple(current)))
    return sentences


# ---------------------------------------------------------------------------
# Porter stemmer (original published algorithm, not Porter2)
# ---------------------------------------------------------------------------

_VOWELS = "aeiou"


def _is_cons(word: str, i: int) -> bool:
    ch = word[i]
    if ch in _VOWELS:
        return False
    if ch == "y":
        return i == 0 or not _is_cons(word, i - 1)
    return True


def _measure(stem: str) -> int:
    """Number of VC sequences in the consonant/vowel group form of the stem."""
    groups: list[bool] = []
    for i in range(len(stem)):
        c = _is_cons(stem, i)
        if not groups or groups[-1] != c:
            groups.append(c)
    return sum(
        1 for i in range(len(groups) - 1) if not groups[i] and groups[i + 1]
    )


def _has_vowel(stem: str) -> bool:
    return any(not _is_cons(stem, i) for i in range(len(stem)))


def _ends_double_cons(word: str) -> bool:
    return len(word) >= 2 and word[-1] == word[-2] and _is_cons(word, len(word) - 1)


def _ends_cvc(word: str) -> bool:
    if len(word) < 3:
        return False
    return (
        _is_cons(word, len(word) - 3)
        and not _is_cons(word, len(word) - 2)
        and _is_cons(word, len(word) - 1)
        and word[-1] not in "wxy"
    )


def _step1a(w: str) -> str:
    if w.endswith("sses"):
        return w[:-2]
    if w.endswith("ies"):
        return w[:-2]
    if w.endswith("ss"):
        return w
    if w.endswith("s"):
        return w[:-1]
    return w


def _step1b(w: str) -> str:
    if w.endswith("eed"):
        # longest matching suffix is 'eed'; the 'ed' rule is not tried
        return w[:-1] if _measure(w[:-3]) > 0 else w
    if w.endswith("ed") and _has_vowel(w[:-2]):
        w = w[:-2]
    elif w.endswith("ing") and _has_vowel(w[:-3]):
        w = w[:-3]
    else:
        return w
    # cleanup after a successful 'ed'/'ing' removal
    if w.endswith(("at", "bl", "iz")):
        return w + "e"
    if _ends_double_cons(w) and w[-1] not in "lsz":
        return w[:-1]
    if _measure(w) == 1 and _ends_cvc(w):
        return w + "e"
    return w


def _step1c(w: str) -> str:
    if w.endswith("y") and _has_vowel(w[:-1]):
        return w[:-1] + "i"
    return w


# (suffix, replacement) pairs; scan order is longest suffix first so the
# longest matching S1 decides the (single) rule attempted per step.
_STEP2 = (
    ("ational", "ate"), ("tional", "tion"), ("enci", "ence"), ("anci", "ance"),
    ("izer", "ize"), ("abli", "able"), ("alli", "al"), ("entli", "ent"),
    ("eli", "e"), ("ousli", "ous"), ("ization", "ize"), ("ation", "ate"),
    ("ator", "ate"), ("alism", "al"), ("iveness", "ive"), ("fulness", "ful"),
    ("ousness", "ous"), ("aliti", "al"), ("iviti", "ive"), ("biliti", "ble"),
)

_STEP3 = (
    ("icate", "ic"), ("ative", ""), ("alize", "al"), ("iciti", "ic"),
    ("ical", "ic"), ("ful", ""), ("ness", ""),
)

_STEP4 = (
    "al", "ance", "ence", "er", "ic", "able", "ible", "ant", "ement",
    "ment", "ent", "ion", "ou", "ism", "ate", "iti", "ous", "ive", "ize",
)


def _apply_table(w: str, table, min_measure: int) -> str:
    for suffix, repl in sorted(table, key=lambda r: len(r[0]), reverse=True):
        if w.endswith(suffix):
            stem = w[: len(w) - len(suffix)]
            if _measure(stem) > min_measure:
                return stem + repl
            return w
    return w


def _step2(w: str) -> str:
    return _apply_table(w, _STEP2, 0)


def _step3(w: str) -> str:
    return _apply_table(w, _STEP3, 0)


def _step4(w: str) -> str:
    for suffix in sorted(_STEP4, key=len, reverse=True):
        if w.endswith(suffix):
            stem = w[: len(w) - len(suffix)]
            if _measure(stem) > 1:
                if suffix == "ion" and not stem.endswith(("s", "t")):
                    return w
                return stem
            return w
    return w


def _step5a(w: str) -> str:
    if w.endswith("e"):
        stem = w[:-1]
        m = _measure(stem)
        if m > 1 or (m == 1 and not _ends_cvc(stem)):
            return stem
    return w


def _step5b(w: str) -> str:
    if _measure(w) > 1 and _ends_double_cons(w) and w.endswith("l"):
        return w[:-1]
    return w


def stem(word: str) -> str:
    """Porter stem of a lowercase word (words of length <= 2 pass through)."""
    if len(word) <= 2:
        return word
    for step in (_step1a, _step1b, _step1c, _step2, _step3, _step4, _step5a, _step5b):
        word = step(word)
    return word


def stem_tokens(tokens: Iterable[Token]) -> list[str]:
    return [stem(t.surface) for t in tokens]
