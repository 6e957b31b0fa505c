"""Corpus ingestion: load pre-scraped JSONL, clean, filter, and label.

Scraping is out of scope; this module starts from files with one submission
per line and ends with the eligible, binary-labeled analysis corpus.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .text import normalize, tokenize

YTA = 1
NTA = 0


@dataclass(frozen=True)
class Submission:
    id: str
    title: str
    body: str
    raw_label: str
    comment_count: int
    created_at: float
    author_handle: Optional[str]
    word_count: int
    parse_ref: Optional[str] = None


@dataclass(frozen=True)
class Reject:
    line: int
    reason: str


@dataclass
class LoadResult:
    submissions: list[Submission]
    rejects: list[Reject]


@dataclass(frozen=True)
class CorpusStats:
    n_total: int
    n_eligible: int
    n_nta: int
    n_yta: int
    class_balance: float


def encode_label(raw_label: str) -> Optional[int]:
    """YTA -> 1, NTA -> 0 (case-insensitive, trimmed); anything else -> None."""
    label = raw_label.strip().upper()
    if label == "YTA":
        return YTA
    if label == "NTA":
        return NTA
    return None


def _parse_record(record: dict) -> Submission:
    sid = record.get("id")
    if not isinstance(sid, str) or not sid:
        raise ValueError("missing or empty 'id'")
    body = record.get("body")
    if not isinstance(body, str):
        raise ValueError("missing 'body'")
    raw_label = record.get("label")
    if not isinstance(raw_label, str):
        raise ValueError("missing 'label'")
    comment_count = record.get("num_comments", 0)
    if not isinstance(comment_count, int) or comment_count < 0:
        raise ValueError("'num_comments' must be a non-negative integer")
    author = record.get("author")
    if author is not None and not isinstance(author, str):
        raise ValueError("'author' must be a string when present")
    parse_ref = record.get("parse_ref")
    if parse_ref is not None and not isinstance(parse_ref, str):
        raise ValueError("'parse_ref' must be a string when present")
    word_count = len(tokenize(normalize(body)))
    return Submission(
        id=sid,
        title=record.get("title", "") or "",
        body=body,
        raw_label=raw_label,
        comment_count=comment_count,
        created_at=float(record.get("created_utc", 0)),
        author_handle=author,
        word_count=word_count,
        parse_ref=parse_ref,
    )


def load_submissions(path: str | Path, format: str = "jsonl") -> LoadResult:
    """Read submissions in file order; malformed lines land in the reject list."""
    if format != "jsonl":
        raise ValueError(f"unsupported format {format!r}")
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(str(path))
    submissions: list[Submission] = []
    rejects: list[Reject] = []
    seen_ids: set[str] = set()
    with path.open(encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                if not isinstance(record, dict):
                    raise ValueError("line is not a JSON object")
                sub = _parse_record(record)
                if sub.id in seen_ids:
                    raise ValueError(f"duplicate id {sub.id!r}")
            except (json.JSONDecodeError, ValueError, TypeError) as exc:
                rejects.append(Reject(lineno, str(exc)))
                continue
            seen_ids.add(sub.id)
            submissions.append(sub)
    return LoadResult(submissions, rejects)


def filter_eligible(
    subs: Sequence[Submission],
    min_words: int = 500,
    min_comments: int = 20,
    bot_handles: Iterable[str] = (),
) -> list[Submission]:
    """Keep long-enough, engaged-with submissions not authored by bots or mods.

    Handle screening is a lowercase blocklist plus the 'bot'/'mod' substring
    heuristic; subreddit-sourced bot lists are inputs, not code.
    """
    blocked = {h.strip().lower() for h in bot_handles if h.strip()}
    kept = []
    for sub in subs:
        if sub.word_count < min_words or sub.comment_count < min_comments:
            continue
        if sub.author_handle is not None:
            handle = sub.author_handle.lower()
            if handle in blocked or "bot" in handle or "mod" in handle:
                continue
        kept.append(sub)
    return kept


def corpus_stats(n_total: int, labels: Sequence[int]) -> CorpusStats:
    """Bookkeeping over the eligible, binary-labeled corpus."""
    n_eligible = len(labels)
    n_yta = sum(1 for y in labels if y == YTA)
    n_nta = n_eligible - n_yta
    balance = n_nta / n_eligible if n_eligible else 0.0
    return CorpusStats(n_total, n_eligible, n_nta, n_yta, balance)


def submission_to_record(sub: Submission) -> dict:
    """JSONL-round-trippable record with the external field names."""
    record = {
        "id": sub.id,
        "title": sub.title,
        "body": sub.body,
        "label": sub.raw_label,
        "num_comments": sub.comment_count,
        "created_utc": sub.created_at,
    }
    if sub.author_handle is not None:
        record["author"] = sub.author_handle
    if sub.parse_ref is not None:
        record["parse_ref"] = sub.parse_ref
    return record


def write_submissions(subs: Iterable[Submission], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as handle:
        for sub in subs:
            handle.write(json.dumps(submission_to_record(sub), sort_keys=True) + "\n")
