import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from storyjudge.cli import EXIT_CONFIG, EXIT_OK, main

# tone vocabulary in valence buckets; positive tones carry 'joy', negative 'sadness'
TONES = {
    "radiant": 1.9, "lovely": 1.2, "pleasant": 0.5,
    "gloomy": -0.5, "bitter": -1.2, "awful": -1.9,
}
# past forms whose Porter stems match the lexicon rows below ('told' is
# irregular, so the lexicon carries it directly)
VERBS = {"asked": "early", "told": "early", "decided": "mid", "wanted": "mid",
         "needed": "late", "yelled": "late"}
OBJECTS = ["her", "friend", "sister", "him"]


def _tone_for(value, rng):
    jittered = value + rng.normal(0, 0.45)
    return min(TONES, key=lambda w: abs(TONES[w] - jittered))


def build_corpus(path: Path, n_docs: int = 120, seed: int = 4) -> None:
    """YTA stories stay mildly positive; NTA stories decline into negatives."""
    rng = np.random.default_rng(seed)
    verbs = list(VERBS)
    with path.open("w", encoding="utf-8") as handle:
        for i in range(n_docs):
            yta = i % 3 == 0  # 40 YTA / 80 NTA
            sentences = []
            for j in range(12):
                target = 1.1 - 0.18 * j if yta else 1.5 - 0.3 * j
                tone = _tone_for(target, rng)
                stage = "early" if j < 4 else ("mid" if j < 8 else "late")
                stage_verbs = [v for v in verbs if VERBS[v] == stage]
                verb = stage_verbs[int(rng.integers(len(stage_verbs)))]
                obj = OBJECTS[int(rng.integers(len(OBJECTS)))]
                sentences.append(f"i {verb} {obj} about the {tone} day again .")
            if rng.random() < 0.5:
                sentences.append("we kept them near the whole plan .")
            # 'edit' leans YTA without perfectly separating the classes
            if yta or rng.random() < 0.1:
                sentences.append("edit : thanks everyone for the feedback .")
            body = " ".join(sentences)
            if rng.random() < 0.4:
                age = int(rng.integers(18, 60))
                gender = "m" if rng.random() < 0.5 else "f"
                body = f"i ({age}{gender}) was with my sister (31f) . " + body
            record = {
                "id": f"post{i:03d}",
                "title": "was i wrong",
                "body": body,
                "label": "YTA" if yta else "NTA",
                "num_comments": 25,
                "created_utc": 1_650_000_000 + i,
                "author": f"user{i:03d}",
            }
            handle.write(json.dumps(record) + "\n")


def write_support_files(root: Path) -> dict:
    pa = root / "power_agency.csv"
    pa.write_text(
        "verb,power,agency\n"
        "ask,theme,positive\ntold,agent,positive\ndecide,agent,positive\n"
        "want,agent,negative\nneed,theme,negative\nyell,agent,negative\n"
    )
    valence = root / "valence.csv"
    rows = ["term,valence"] + [f"{w},{v}" for w, v in TONES.items()]
    valence.write_text("\n".join(rows) + "\n")
    boosters = root / "boosters.txt"
    boosters.write_text("very\n")
    negations = root / "negations.txt"
    negations.write_text("not\n")
    emotions = root / "emotions.csv"
    emo_rows = ["term,category,weight"]
    emo_rows += [f"{w},joy,0.8" for w, v in TONES.items() if v > 0]
    emo_rows += [f"{w},sadness,0.7" for w, v in TONES.items() if v < 0]
    emotions.write_text("\n".join(emo_rows) + "\n")
    return {
        "power_agency": pa,
        "valence": valence,
        "boosters": boosters,
        "negations": negations,
        "emotions": emotions,
    }


def write_config(root: Path, support: dict, out_dir: Path, corpus: Path) -> Path:
    config = root / "run.toml"
    config.write_text(
        f"""
[paths]
corpus = "{corpus}"
power_agency = "{support['power_agency']}"
valence = "{support['valence']}"
boosters = "{support['boosters']}"
negations = "{support['negations']}"
output_dir = "{out_dir}"

[paths.lexicons]
emotions = "{support['emotions']}"

[thresholds]
min_words = 30
min_comments = 5
min_doc_fraction = 0.01
alpha = 0.05

[seeds]
undersample = 11
folds = 13

[analysis]
k_folds = 5
k_chain = 3
n_chunks = 10
"""
    )
    return config


@pytest.fixture
def pipeline(tmp_path):
    raw = tmp_path / "raw.jsonl"
    build_corpus(raw)
    support = write_support_files(tmp_path)
    out_dir = tmp_path / "out"
    config = write_config(tmp_path, support, out_dir, out_dir / "filtered.jsonl")
    return {"raw": raw, "config": config, "out": out_dir, "tmp": tmp_path}


def run_all(pipeline) -> None:
    cfg = str(pipeline["config"])
    filtered = pipeline["out"] / "filtered.jsonl"
    assert main(["ingest", "--config", cfg, "--input", str(pipeline["raw"]), "--out", str(filtered)]) == EXIT_OK
    assert main(["extract", "--config", cfg]) == EXIT_OK
    assert main(["analyze", "--config", cfg]) == EXIT_OK
    assert main(["classify", "--config", cfg]) == EXIT_OK
    assert main(["report", "--config", cfg]) == EXIT_OK


class TestIngestCommand:
    def test_writes_filtered_and_stats(self, pipeline):
        filtered = pipeline["out"] / "filtered.jsonl"
        code = main([
            "ingest", "--config", str(pipeline["config"]),
            "--input", str(pipeline["raw"]), "--out", str(filtered),
        ])
        assert code == EXIT_OK
        stats = json.loads((pipeline["out"] / "filtered_stats.json").read_text())
        assert stats["n_eligible"] == 120
        assert stats["n_yta"] == 40
        assert stats["meta"]["seeds"] == {"undersample": 11, "folds": 13}

    def test_dry_run_writes_nothing(self, pipeline):
        code = main([
            "ingest", "--config", str(pipeline["config"]),
            "--input", str(pipeline["raw"]), "--dry-run",
        ])
        assert code == EXIT_OK
        assert not pipeline["out"].exists() or not any(pipeline["out"].iterdir())

    def test_missing_corpus_is_config_error(self, pipeline):
        code = main([
            "ingest", "--config", str(pipeline["config"]),
            "--input", str(pipeline["tmp"] / "missing.jsonl"),
        ])
        assert code == EXIT_CONFIG

    def test_flag_overrides_config(self, pipeline):
        filtered = pipeline["out"] / "filtered.jsonl"
        code = main([
            "ingest", "--config", str(pipeline["config"]),
            "--input", str(pipeline["raw"]), "--out", str(filtered),
            "--min-words", "100000",
        ])
        assert code == EXIT_OK
        stats = json.loads((pipeline["out"] / "filtered_stats.json").read_text())
        assert stats["n_eligible"] == 0


class TestExtractCommand:
    def test_families_and_manifest(self, pipeline):
        run_all(pipeline)
        manifest = json.loads((pipeline["out"] / "manifest.json").read_text())
        families = set(manifest["families"])
        assert {"demographics", "pronouns", "lexicon_emotions", "power_agency", "arc", "chain", "unigrams"} <= families
        assert manifest["svo_sources"] == ["heuristic"]
        for info in manifest["families"].values():
            assert (pipeline["out"] / info["path"]).exists()
        arc_rows = manifest["families"]["arc"]["n_rows"]
        assert arc_rows == 120  # every doc has 12 narrator sentences >= 10 chunks

    def test_no_parses_no_fallback_drops_power_agency(self, pipeline):
        cfg = str(pipeline["config"])
        filtered = pipeline["out"] / "filtered.jsonl"
        assert main(["ingest", "--config", cfg, "--input", str(pipeline["raw"]), "--out", str(filtered)]) == EXIT_OK
        assert main(["extract", "--config", cfg, "--no-fallback-svo"]) == EXIT_OK
        manifest = json.loads((pipeline["out"] / "manifest.json").read_text())
        assert "power_agency" not in manifest["families"]
        assert any("power/agency" in w for w in manifest["warnings"])

    def test_missing_lexicon_reports_name(self, pipeline, capsys):
        cfg = str(pipeline["config"])
        filtered = pipeline["out"] / "filtered.jsonl"
        main(["ingest", "--config", cfg, "--input", str(pipeline["raw"]), "--out", str(filtered)])
        code = main(["extract", "--config", cfg, "--lexicon", "ghost=/nonexistent.csv"])
        assert code == EXIT_CONFIG
        assert "ghost" in capsys.readouterr().err


class TestAnalyzeCommand:
    def test_reports_written(self, pipeline):
        run_all(pipeline)
        out = pipeline["out"]
        theory = (out / "correlations_theory.csv").read_text().splitlines()
        assert theory[1] == "feature,cohens_d,p,q_significant"
        rows = {line.split(",")[0]: line for line in theory[2:]}
        # planted signal: joy is higher in YTA documents
        assert rows["emotions.joy"].endswith("true")
        assert float(rows["emotions.joy"].split(",")[1]) > 0
        assert (out / "correlations_unigrams.csv").exists()
        assert (out / "interactions.csv").exists()
        arc_cmp = json.loads((out / "arc_comparison.json").read_text())
        assert len(arc_cmp["t_per_chunk"]) == 10
        cloud = json.loads((out / "word_cloud.json").read_text())
        cloud_words = {e["unigram"] for e in cloud["unigrams"]}
        assert "edit" in cloud_words

    def test_analyze_without_extract_is_config_error(self, pipeline):
        code = main(["analyze", "--config", str(pipeline["config"])])
        assert code == EXIT_CONFIG

    def test_analyze_with_missing_families_still_succeeds(self, pipeline):
        cfg = str(pipeline["config"])
        filtered = pipeline["out"] / "filtered.jsonl"
        main(["ingest", "--config", cfg, "--input", str(pipeline["raw"]), "--out", str(filtered)])
        assert main(["extract", "--config", cfg, "--no-fallback-svo"]) == EXIT_OK
        assert main(["analyze", "--config", cfg]) == EXIT_OK
        assert (pipeline["out"] / "correlations_theory.csv").exists()
        warnings = json.loads((pipeline["out"] / "analyze_manifest.json").read_text())["warnings"]
        assert isinstance(warnings, list)

    def test_sentiment_constants_flow_from_config(self, pipeline):
        cfg_path = pipeline["config"]
        text = cfg_path.read_text()
        filtered = pipeline["out"] / "filtered.jsonl"
        main(["ingest", "--config", str(cfg_path), "--input", str(pipeline["raw"]), "--out", str(filtered)])
        assert main(["extract", "--config", str(cfg_path)]) == EXIT_OK
        base = json.loads((pipeline["out"] / "arcs.json").read_text())["profiles"]
        cfg_path.write_text(text + "compound_norm = 200.0\n")
        assert main(["extract", "--config", str(cfg_path)]) == EXIT_OK
        damped = json.loads((pipeline["out"] / "arcs.json").read_text())["profiles"]
        sid = next(iter(base))
        # larger normalization constant shrinks every nonzero chunk mean
        assert abs(damped[sid]["chunk_means"][0]) < abs(base[sid]["chunk_means"][0])


class TestClassifyCommand:
    def test_reports_per_feature_set(self, pipeline):
        run_all(pipeline)
        out = pipeline["out"]
        for name in ("story_level", "character_level", "all"):
            payload = json.loads((out / f"classifier_{name}.json").read_text())
            assert payload["mfc_baseline"]["mean"]["accuracy"] == pytest.approx(0.5)
            assert 0 <= payload["report"]["mean"]["accuracy"] <= 1
            assert len(payload["report"]["per_fold"]) == 5
        story = json.loads((out / "classifier_story_level.json").read_text())
        # planted tone difference: clearly above chance, but classes overlap
        assert story["report"]["mean"]["accuracy"] >= 0.7

    def test_unknown_feature_set_rejected_by_parser(self, pipeline):
        with pytest.raises(SystemExit) as exc:
            main(["classify", "--config", str(pipeline["config"]), "--feature-set", "bogus"])
        assert exc.value.code == 2


class TestChainAndReport:
    def test_chain_build_and_inspect(self, pipeline, capsys):
        cfg = str(pipeline["config"])
        filtered = pipeline["out"] / "filtered.jsonl"
        main(["ingest", "--config", cfg, "--input", str(pipeline["raw"]), "--out", str(filtered)])
        chains_path = pipeline["tmp"] / "chains.json"
        assert main(["chain", "build", "--config", cfg, "--out", str(chains_path)]) == EXIT_OK
        assert main(["chain", "inspect", str(chains_path)]) == EXIT_OK
        output = capsys.readouterr().out
        assert "NTA" in output and "YTA" in output

    def test_report_bundles_artifacts(self, pipeline):
        run_all(pipeline)
        bundle = json.loads((pipeline["out"] / "report.json").read_text())
        assert "manifest.json" in bundle["artifacts"]
        assert "correlations_theory.csv" in bundle["artifacts"]


class TestMoreInterfaceSurface:
    def test_bots_blocklist_flag(self, pipeline, tmp_path):
        bots = tmp_path / "bots.txt"
        bots.write_text("user001\nuser002\n")
        filtered = pipeline["out"] / "filtered.jsonl"
        code = main([
            "ingest", "--config", str(pipeline["config"]),
            "--input", str(pipeline["raw"]), "--out", str(filtered),
            "--bots", str(bots),
        ])
        assert code == EXIT_OK
        stats = json.loads((pipeline["out"] / "filtered_stats.json").read_text())
        assert stats["n_eligible"] == 118
        kept_ids = {json.loads(l)["id"] for l in filtered.read_text().splitlines()}
        assert "post001" not in kept_ids and "post002" not in kept_ids

    def test_corrupt_manifest_is_runtime_error(self, pipeline):
        pipeline["out"].mkdir(parents=True, exist_ok=True)
        (pipeline["out"] / "manifest.json").write_text("{broken")
        code = main(["analyze", "--config", str(pipeline["config"])])
        assert code == 1

    def test_include_unigrams_expands_story_set(self, pipeline):
        run_all(pipeline)
        baseline = json.loads((pipeline["out"] / "classifier_story_level.json").read_text())
        assert main([
            "classify", "--config", str(pipeline["config"]),
            "--feature-set", "story-level", "--include-unigrams",
        ]) == EXIT_OK
        expanded = json.loads((pipeline["out"] / "classifier_story_level.json").read_text())
        assert "unigrams" in expanded["families"]
        assert expanded["n_features"] > baseline["n_features"]

    def test_extract_uses_conllu_parses_when_present(self, pipeline, data_dir):
        cfg = str(pipeline["config"])
        filtered = pipeline["out"] / "filtered.jsonl"
        assert main(["ingest", "--config", cfg, "--input", str(pipeline["raw"]),
                     "--out", str(filtered)]) == EXIT_OK
        parses = pipeline["tmp"] / "parses"
        parses.mkdir()
        fixture = (data_dir / "verb_frame_sentences.conllu").read_text()
        for line in filtered.read_text().splitlines():
            sid = json.loads(line)["id"]
            (parses / f"{sid}.conllu").write_text(fixture)
        assert main(["extract", "--config", cfg, "--parses", str(parses)]) == EXIT_OK
        manifest = json.loads((pipeline["out"] / "manifest.json").read_text())
        assert manifest["svo_sources"] == ["conllu"]
        assert "power_agency" in manifest["families"]
        pa_csv = (pipeline["out"] / "features_power_agency.csv").read_text().splitlines()
        header = pa_csv[1].split(",")
        narrator_power = header.index("pa.narrator.power")
        first_row = pa_csv[2].split(",")
        # every doc shares the fixture parse: ask (theme) -1 and decide (agent) +1
        assert float(first_row[narrator_power]) == 0.0


def test_console_entry_point(pipeline):
    result = subprocess.run(
        [sys.executable, "-m", "storyjudge.cli", "ingest",
         "--config", str(pipeline["config"]),
         "--input", str(pipeline["raw"]), "--dry-run"],
        capture_output=True, text=True,
    )
    assert result.returncode == 0, result.stderr
    assert "eligible" in result.stdout
