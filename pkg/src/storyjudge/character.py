"""Author-as-character extraction: demographic markers, dependency-parse
ingestion, subject-verb-object tuples, entity classes, and power/agency
scoring over verb frames."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .text import Sentence, Token, stem, tokenize


@dataclass(frozen=True)
class CharacterProfile:
    age: Optional[float] = None
    gender_code: Optional[float] = None

    @property
    def age_disclosed(self) -> int:
        return 0 if self.age is None else 1

    @property
    def gender_disclosed(self) -> int:
        return 0 if self.gender_code is None else 1

    @property
    def age_value(self) -> float:
        """Feature value; undisclosed demographics are zeroed."""
        return 0.0 if self.age is None else float(self.age)

    @property
    def gender_value(self) -> float:
        return 0.0 if self.gender_code is None else float(self.gender_code)


@dataclass(frozen=True)
class SvoTuple:
    sentence_index: int
    subject_text: str
    verb_lemma: str
    object_text: Optional[str] = None

    def __post_init__(self):
        if not self.verb_lemma:
            raise ValueError("empty verb lemma")


@dataclass(frozen=True)
class EntityClass:
    name: str
    keywords: frozenset[str]


@dataclass(frozen=True)
class PowerAgencyScore:
    power: float
    agency: float
    n_power_tuples: int
    n_agency_tuples: int


POWER_LABELS = ("agent", "theme", "equal", "none")
AGENCY_LABELS = ("positive", "negative", "equal", "none")


@dataclass
class PowerAgencyLexicon:
    """Stemmed verb -> (power, agency) labels; stem collisions keep the first
    row and are counted."""

    entries: dict[str, tuple[str, str]]
    collisions: int = 0


def _cls(name: str, words: Iterable[str]) -> EntityClass:
    return EntityClass(name, frozenset(w.lower() for w in words))


# Order matters: match_entity resolves specific classes before generic ones.
DEFAULT_ENTITY_CLASSES: tuple[EntityClass, ...] = (
    _cls("narrator", ["i", "i'm", 'i"m', "mine", "myself", "me"]),
    _cls("romantic_females", [
        "wife", "exgf", "ex-gf", "exgirlfriend", "ex-girlfriend", "exwife",
        "ex-wife", "exwive", "exwives", "girlfriend", "mistress", "sugarmom",
    ]),
    _cls("romantic_males", [
        "husband", "exbf", "ex-bf", "exboyfriend", "ex-boyfriend", "exhusband",
        "ex-husband", "boyfriend", "hubby", "sugardad", "sugardaddy",
    ]),
    _cls("family", [
        "aunt", "uncle", "sister", "brother", "mom", "dad", "mother", "father",
        "mommy", "daddy", "daughter", "son", "children", "family", "godmother",
        "godfather", "grandmother", "grandfather", "grandma", "grandpa",
        "grandmom", "granddad", "grandkid", "grandchildren", "neice", "nephew",
        "parent", "grandparent", "subling", "relatives", "cousin",
    ]),
    _cls("friends", ["bestie", "besties", "friend", "friends", "bff", "bffs"]),
    _cls("females", ["she", "her", "herself", "hers"]),
    _cls("males", ["he", "him", "himself", "his"]),
)

NARRATOR = DEFAULT_ENTITY_CLASSES[0]


def load_entity_classes(path: str | Path) -> list[EntityClass]:
    """JSON {class_name: [keywords...]}; file order defines match precedence."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return [_cls(name, words) for name, words in data.items()]


# Age/gender markers: "(66f)", "(24 f)", "(18)", "24m", "m24", "f 30".
# Unparenthesized markers require the gender letter so bare numbers do not fire.
_MARKER = re.compile(
    r"\(\s?(?:(?P<age1>\d{1,3})\s?(?P<g1>[fm])?|(?P<g2>[fm])\s?(?P<age2>\d{1,3}))\s?\)"
    r"|(?<![a-z0-9])(?:(?P<age3>\d{1,3})\s?(?P<g3>[fm])|(?P<g4>[fm])\s?(?P<age4>\d{1,3}))(?![a-z0-9])"
)

_FIRST_PERSON = {"i", "me"}
_GENDER_CODE = {"f": 1.0, "m": -1.0}


def _marker_profile(match: re.Match) -> CharacterProfile:
    age = next(
        (match.group(g) for g in ("age1", "age2", "age3", "age4") if match.group(g)),
        None,
    )
    letter = next(
        (match.group(g) for g in ("g1", "g2", "g3", "g4") if match.group(g)), None
    )
    return CharacterProfile(
        age=float(age) if age is not None else None,
        gender_code=_GENDER_CODE[letter] if letter else None,
    )


def extract_demographics(
    normalized_text: str,
) -> tuple[CharacterProfile, list[CharacterProfile]]:
    """Pull (age, gender) markers; a marker within 2 tokens after a
    first-person keyword belongs to the narrator, the rest to other
    characters. No markers -> narrator profile with both fields absent."""
    tokens = tokenize(normalized_text)
    starts = [t.char_span[0] for t in tokens]
    narrator: Optional[CharacterProfile] = None
    others: list[CharacterProfile] = []
    for match in _MARKER.finditer(normalized_text):
        profile = _marker_profile(match)
        # token index where the marker begins
        pos = 0
        while pos + 1 < len(starts) and starts[pos + 1] <= match.start():
            pos += 1
        is_narrator = any(
            j >= 0 and tokens[j].surface in _FIRST_PERSON for j in (pos - 1, pos - 2)
        )
        if is_narrator:
            if narrator is None:
                narrator = profile
            # repeated self-disclosures are ignored
        else:
            others.append(profile)
    return narrator or CharacterProfile(), others


def mean_profile(profiles: Sequence[CharacterProfile]) -> CharacterProfile:
    """Unweighted field-wise mean over profiles that disclose the field."""
    ages = [p.age for p in profiles if p.age is not None]
    genders = [p.gender_code for p in profiles if p.gender_code is not None]
    return CharacterProfile(
        age=sum(ages) / len(ages) if ages else None,
        gender_code=sum(genders) / len(genders) if genders else None,
    )


# ---------------------------------------------------------------------------
# CoNLL-U ingestion and SVO extraction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ParsedToken:
    index: int
    form: str
    lemma: str
    upos: str
    head: int
    deprel: str


@dataclass
class DependencyGraph:
    sentence_index: int
    tokens: list[ParsedToken]

    def dependents(self, head_index: int) -> list[ParsedToken]:
        return [t for t in self.tokens if t.head == head_index]


def _finish_sentence(
    tokens: list[ParsedToken], sentence_index: int, path: Path, lineno: int
) -> DependencyGraph:
    n = len(tokens)
    roots = [t for t in tokens if t.head == 0]
    for tok in tokens:
        if tok.head < 0 or tok.head > n:
            raise ValueError(
                f"{path}:{lineno}: head {tok.head} out of range in sentence {sentence_index}"
            )
    if len(roots) != 1:
        raise ValueError(
            f"{path}:{lineno}: sentence {sentence_index} has {len(roots)} roots, expected 1"
        )
    by_index = {t.index: t for t in tokens}
    for tok in tokens:
        seen = {tok.index}
        head = tok.head
        while head != 0:
            if head in seen:
                raise ValueError(
                    f"{path}:{lineno}: cyclic heads in sentence {sentence_index}"
                )
            seen.add(head)
            head = by_index[head].head
    return DependencyGraph(sentence_index, tokens)


def parse_conllu(path: str | Path) -> list[DependencyGraph]:
    """Read standard 10-column CoNLL-U; one graph per sentence.

    Multiword-token and empty-node lines are skipped. Column-count problems,
    out-of-range heads, missing/multiple roots, and head cycles all raise
    with the offending location.
    """
    path = Path(path)
    graphs: list[DependencyGraph] = []
    pending: list[ParsedToken] = []
    last_token_line = 0
    with path.open(encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                if pending:
                    graphs.append(
                        _finish_sentence(pending, len(graphs), path, last_token_line)
                    )
                    pending = []
                continue
            if line.startswith("#"):
                continue
            cols = line.split("\t")
            if len(cols) != 10:
                raise ValueError(f"{path}:{lineno}: expected 10 columns, got {len(cols)}")
            token_id = cols[0]
            if "-" in token_id or "." in token_id:
                continue  # multiword ranges / empty nodes carry no tree edges
            try:
                index = int(token_id)
                head = int(cols[6])
            except ValueError:
                raise ValueError(f"{path}:{lineno}: non-integer id or head") from None
            if head == index:
                raise ValueError(f"{path}:{lineno}: token {index} is its own head")
            pending.append(
                ParsedToken(index, cols[1], cols[2], cols[3], head, cols[7])
            )
            last_token_line = lineno
    if pending:
        graphs.append(_finish_sentence(pending, len(graphs), path, last_token_line))
    return graphs


_SUBJECT_RELS = {"nsubj", "nsubj:pass", "nsubjpass"}
_OBJECT_RELS = {"obj", "dobj"}


def extract_svo(graph: DependencyGraph) -> list[SvoTuple]:
    """One tuple per verb with a subject dependent; objects are optional.

    The verb lemma is the stemmed verb surface so it lines up with the
    chain-of-events and power/agency lexica.
    """
    tuples: list[SvoTuple] = []
    for tok in graph.tokens:
        if tok.upos != "VERB":
            continue
        subject = None
        obj = None
        for dep in sorted(graph.dependents(tok.index), key=lambda t: t.index):
            if subject is None and dep.deprel in _SUBJECT_RELS:
                subject = dep
            elif obj is None and dep.deprel in _OBJECT_RELS:
                obj = dep
        if subject is None:
            continue
        tuples.append(
            SvoTuple(
                sentence_index=graph.sentence_index,
                subject_text=subject.form.lower(),
                verb_lemma=stem(tok.form.lower()),
                object_text=obj.form.lower() if obj is not None else None,
            )
        )
    return tuples


def extract_svo_heuristic(
    sentences: Sequence[Sentence],
    verb_stems: frozenset[str] | set[str],
    candidate_words: frozenset[str] | set[str],
    window: int = 3,
) -> list[SvoTuple]:
    """Parse-free fallback: entity word + known verb + entity word inside a
    sentence. Approximate by construction; reports must label it as such."""
    tuples: list[SvoTuple] = []
    for sentence in sentences:
        surfaces = [t.surface for t in sentence.tokens]
        stems = [stem(s) for s in surfaces]
        for pos, st in enumerate(stems):
            if st not in verb_stems:
                continue
            subject = None
            for j in range(pos - 1, max(-1, pos - 1 - window), -1):
                if surfaces[j] in candidate_words:
                    subject = surfaces[j]
                    break
            if subject is None:
                continue
            obj = None
            for j in range(pos + 1, min(len(surfaces), pos + 1 + window)):
                if surfaces[j] in candidate_words:
                    obj = surfaces[j]
                    break
            tuples.append(SvoTuple(sentence.index, subject, st, obj))
    return tuples


def _head_word(text_span: str) -> str:
    words = text_span.lower().split()
    return words[-1] if words else ""


def match_entity(
    text_span: str, classes: Sequence[EntityClass] = DEFAULT_ENTITY_CLASSES
) -> Optional[str]:
    """First class (in precedence order) whose keywords contain the span's
    head token; None when nothing matches."""
    head = _head_word(text_span)
    for cls in classes:
        if head in cls.keywords:
            return cls.name
    return None


def load_power_agency(path: str | Path) -> PowerAgencyLexicon:
    """CSV `verb,power,agency`; verbs are stemmed so tuple lemmas match."""
    import csv

    path = Path(path)
    entries: dict[str, tuple[str, str]] = {}
    collisions = 0
    with path.open(encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header[:3]] != ["verb", "power", "agency"]:
            raise ValueError(f"{path}: expected header 'verb,power,agency'")
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 3:
                raise ValueError(f"{path}:{lineno}: expected 3 columns, got {len(row)}")
            verb = row[0].strip().lower()
            power = row[1].strip().lower() or "none"
            agency = row[2].strip().lower() or "none"
            if not verb:
                raise ValueError(f"{path}:{lineno}: empty verb")
            if power not in POWER_LABELS:
                raise ValueError(f"{path}:{lineno}: unknown power label {power!r}")
            if agency not in AGENCY_LABELS:
                raise ValueError(f"{path}:{lineno}: unknown agency label {agency!r}")
            key = stem(verb)
            if key in entries:
                collisions += 1
                continue
            entries[key] = (power, agency)
    return PowerAgencyLexicon(entries, collisions)


def span_matches(text_span: Optional[str], target: EntityClass) -> bool:
    """True when the span's head token is one of the class keywords."""
    return text_span is not None and _head_word(text_span) in target.keywords


def power_agency(
    tuples: Sequence[SvoTuple], lex: PowerAgencyLexicon, target: EntityClass
) -> PowerAgencyScore:
    """Signed, normalized power and agency of one entity class.

    Power: +1 when the target is the subject of an agent-power verb or the
    object of a theme-power verb; -1 for the two mirror cases. Agency counts
    subject slots only: +1 for positive-agency verbs, -1 for negative.
    Verbs missing from the lexicon or labeled equal/none contribute to
    neither numerator nor denominator.
    """
    power_sum = 0
    agency_sum = 0
    n_power = 0
    n_agency = 0
    for tup in tuples:
        labels = lex.entries.get(tup.verb_lemma)
        if labels is None:
            continue
        power, agency = labels
        subj = span_matches(tup.subject_text, target)
        obj = span_matches(tup.object_text, target)
        if power in ("agent", "theme"):
            if subj:
                power_sum += 1 if power == "agent" else -1
                n_power += 1
            if obj:
                power_sum += 1 if power == "theme" else -1
                n_power += 1
        if agency in ("positive", "negative") and subj:
            agency_sum += 1 if agency == "positive" else -1
            n_agency += 1
    return PowerAgencyScore(
        power=power_sum / n_power if n_power else 0.0,
        agency=agency_sum / n_agency if n_agency else 0.0,
        n_power_tuples=n_power,
        n_agency_tuples=n_agency,
    )
