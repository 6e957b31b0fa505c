import json
from pathlib import Path

import pytest

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture
def pa_fixture_path() -> Path:
    return DATA_DIR / "power_agency_fixture.csv"


@pytest.fixture
def verb_frames_conllu() -> Path:
    return DATA_DIR / "verb_frame_sentences.conllu"


def write_jsonl(path: Path, records: list[dict]) -> Path:
    with path.open("w", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(record) + "\n")
    return path


def submission_record(i: int, label: str = "NTA", words: int = 500, comments: int = 25, **extra) -> dict:
    record = {
        "id": f"sub{i:04d}",
        "title": "a title",
        "body": " ".join(f"word{j % 97}" for j in range(words)),
        "label": label,
        "num_comments": comments,
        "created_utc": 1_600_000_000 + i,
        "author": f"author{i}",
    }
    record.update(extra)
    return record
