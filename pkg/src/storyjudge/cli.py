"""Command-line driver: ingest, extract, analyze, classify, chain, report.

Configuration comes from an optional TOML file with every value overridable
by a CLI flag (precedence: flag > file > default). All randomness flows from
the named seeds in the config, and every output file embeds the config hash
and seeds so identical runs are byte-identical.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

import numpy as np

from . import arc as arc_mod
from . import character, classify, events, ingest, lexicon, stats, text


class ConfigError(Exception):
    """Bad or missing configuration; exits with status 2."""


EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2

STORY_FAMILIES = ("pronouns",)  # plus every lexicon_<name> family
CHARACTER_FAMILIES = ("demographics", "power_agency", "arc", "chain")
DEMOGRAPHIC_FEATURES = ("op_age", "op_gender")
COVARIATE_FEATURES = ("op_age_undisclosed", "op_gender_undisclosed")


@dataclass
class RunConfig:
    corpus: Optional[str] = None
    parses: Optional[str] = None
    bots: Optional[str] = None
    entity_classes: Optional[str] = None
    power_agency: Optional[str] = None
    valence: Optional[str] = None
    boosters: Optional[str] = None
    negations: Optional[str] = None
    output_dir: str = "out"
    lexicons: dict = field(default_factory=dict)
    open_vocab_lexicons: tuple = ()
    min_words: int = 500
    min_comments: int = 20
    min_doc_fraction: float = 0.01
    alpha: float = 0.05
    seed_undersample: int = 101
    seed_folds: int = 202
    k_folds: int = 10
    k_chain: int = 3
    n_chunks: int = 10
    min_sentence_words: int = 6
    compound_norm: float = 15.0
    negation_factor: float = -0.74
    fallback_svo: bool = True
    include_unigrams_in_classify: bool = False
    feature_sets: tuple = ("story-level", "character-level", "all")

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ConfigError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.k_folds < 2:
            raise ConfigError("k_folds must be at least 2")
        if self.k_chain < 1:
            raise ConfigError("k_chain must be at least 1")

    @property
    def config_hash(self) -> str:
        payload = json.dumps(dataclasses.asdict(self), sort_keys=True, default=str)
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]

    @property
    def seeds(self) -> dict:
        return {"undersample": self.seed_undersample, "folds": self.seed_folds}

    def meta_dict(self) -> dict:
        return {"config_hash": self.config_hash, "seeds": self.seeds}

    def meta_comment(self) -> str:
        return (
            f"config_hash={self.config_hash} "
            f"seed_undersample={self.seed_undersample} seed_folds={self.seed_folds}"
        )

    def out(self) -> Path:
        path = Path(self.output_dir)
        path.mkdir(parents=True, exist_ok=True)
        return path


_TOML_MAP = {
    ("paths", "corpus"): "corpus",
    ("paths", "parses"): "parses",
    ("paths", "bots"): "bots",
    ("paths", "entity_classes"): "entity_classes",
    ("paths", "power_agency"): "power_agency",
    ("paths", "valence"): "valence",
    ("paths", "boosters"): "boosters",
    ("paths", "negations"): "negations",
    ("paths", "output_dir"): "output_dir",
    ("thresholds", "min_words"): "min_words",
    ("thresholds", "min_comments"): "min_comments",
    ("thresholds", "min_doc_fraction"): "min_doc_fraction",
    ("thresholds", "alpha"): "alpha",
    ("seeds", "undersample"): "seed_undersample",
    ("seeds", "folds"): "seed_folds",
    ("analysis", "k_folds"): "k_folds",
    ("analysis", "k_chain"): "k_chain",
    ("analysis", "n_chunks"): "n_chunks",
    ("analysis", "min_sentence_words"): "min_sentence_words",
    ("analysis", "compound_norm"): "compound_norm",
    ("analysis", "negation_factor"): "negation_factor",
    ("analysis", "fallback_svo"): "fallback_svo",
    ("analysis", "include_unigrams_in_classify"): "include_unigrams_in_classify",
    ("analysis", "feature_sets"): "feature_sets",
    ("analysis", "open_vocab_lexicons"): "open_vocab_lexicons",
}


def load_config(config_path: Optional[str], overrides: dict) -> RunConfig:
    """Defaults, then the TOML file, then non-None CLI overrides."""
    values: dict = {}
    if config_path:
        path = Path(config_path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        with path.open("rb") as handle:
            data = tomllib.load(handle)
        for (section, key), attr in _TOML_MAP.items():
            if section in data and key in data[section]:
                value = data[section][key]
                if attr in ("feature_sets", "open_vocab_lexicons"):
                    value = tuple(value)
                values[attr] = value
        if "paths" in data and "lexicons" in data["paths"]:
            values["lexicons"] = dict(data["paths"]["lexicons"])
    for attr, value in overrides.items():
        if value is not None:
            values[attr] = value
    try:
        return RunConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def _require_file(path: Optional[str], what: str) -> Path:
    if not path:
        raise ConfigError(f"missing required path: {what}")
    resolved = Path(path)
    if not resolved.exists():
        raise ConfigError(f"{what} not found: {resolved}")
    return resolved


def _write_json(path: Path, payload: dict, cfg: RunConfig) -> None:
    body = {"meta": cfg.meta_dict()}
    body.update(payload)
    path.write_text(json.dumps(body, indent=2, sort_keys=True) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# ingest
# ---------------------------------------------------------------------------


def cmd_ingest(cfg: RunConfig, out_path: Optional[str] = None, dry_run: bool = False) -> int:
    corpus_path = _require_file(cfg.corpus, "corpus")
    bot_handles: Sequence[str] = ()
    if cfg.bots:
        bot_handles = text.load_wordlist(_require_file(cfg.bots, "bot list"))
    result = ingest.load_submissions(corpus_path)
    filtered = ingest.filter_eligible(
        result.submissions, cfg.min_words, cfg.min_comments, bot_handles
    )
    eligible: list[ingest.Submission] = []
    labels: list[int] = []
    for sub in filtered:
        label = ingest.encode_label(sub.raw_label)
        if label is not None:
            eligible.append(sub)
            labels.append(label)
    corpus_stats = ingest.corpus_stats(len(result.submissions), labels)
    print(
        f"loaded {corpus_stats.n_total} submissions "
        f"({len(result.rejects)} rejects), eligible {corpus_stats.n_eligible} "
        f"(NTA {corpus_stats.n_nta} / YTA {corpus_stats.n_yta}, "
        f"balance {corpus_stats.class_balance:.3f})"
    )
    if dry_run:
        return EXIT_OK
    out_file = Path(out_path) if out_path else cfg.out() / "filtered.jsonl"
    out_file.parent.mkdir(parents=True, exist_ok=True)
    ingest.write_submissions(eligible, out_file)
    stats_path = out_file.with_name(out_file.stem + "_stats.json")
    _write_json(
        stats_path,
        {
            "n_total": corpus_stats.n_total,
            "n_eligible": corpus_stats.n_eligible,
            "n_nta": corpus_stats.n_nta,
            "n_yta": corpus_stats.n_yta,
            "class_balance": corpus_stats.class_balance,
            "rejects": [{"line": r.line, "reason": r.reason} for r in result.rejects],
        },
        cfg,
    )
    print(f"wrote {out_file} and {stats_path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# extract
# ---------------------------------------------------------------------------


@dataclass
class _Doc:
    sub: ingest.Submission
    label: int
    tokens: list
    sentences: list
    tuples: list
    svo_source: str  # "conllu" | "heuristic" | "none"


def _parse_path_for(sub: ingest.Submission, parses_dir: Optional[Path]) -> Optional[Path]:
    if sub.parse_ref:
        candidate = Path(sub.parse_ref)
        if not candidate.is_absolute() and parses_dir is not None:
            candidate = parses_dir / candidate
        return candidate if candidate.exists() else None
    if parses_dir is not None:
        candidate = parses_dir / f"{sub.id}.conllu"
        return candidate if candidate.exists() else None
    return None


def _prepare_docs(
    cfg: RunConfig,
    entity_classes: Sequence[character.EntityClass],
    pa_lexicon: Optional[character.PowerAgencyLexicon],
    warnings: list[str],
) -> tuple[list[_Doc], int]:
    corpus_path = _require_file(cfg.corpus, "corpus")
    parses_dir = Path(cfg.parses) if cfg.parses else None
    result = ingest.load_submissions(corpus_path)
    if result.rejects:
        warnings.append(f"{len(result.rejects)} malformed corpus lines skipped")
    candidate_words = frozenset().union(*(c.keywords for c in entity_classes))
    verb_stems = frozenset(pa_lexicon.entries) if pa_lexicon else frozenset()
    docs: list[_Doc] = []
    unlabeled = 0
    for sub in result.submissions:
        label = ingest.encode_label(sub.raw_label)
        if label is None:
            unlabeled += 1
            continue
        normalized = text.normalize(sub.body)
        tokens = text.tokenize(normalized)
        sentences = text.split_sentences(tokens)
        tuples: list[character.SvoTuple] = []
        source = "none"
        parse_path = _parse_path_for(sub, parses_dir)
        if parse_path is not None:
            graphs = character.parse_conllu(parse_path)
            for graph in graphs:
                tuples.extend(character.extract_svo(graph))
            source = "conllu"
        elif cfg.fallback_svo and verb_stems:
            tuples = character.extract_svo_heuristic(
                sentences, verb_stems, candidate_words
            )
            source = "heuristic"
        docs.append(_Doc(sub, label, tokens, sentences, tuples, source))
    return docs, unlabeled


def _demographics_table(docs: Sequence[_Doc]) -> lexicon.FeatureTable:
    names = [
        "op_age", "op_gender", "op_age_undisclosed", "op_gender_undisclosed",
        "other_age", "other_gender",
    ]
    table = lexicon.FeatureTable(names)
    for doc in docs:
        narrator, others = character.extract_demographics(text.normalize(doc.sub.body))
        other_mean = character.mean_profile(others)
        table.add_row(
            doc.sub.id,
            [
                narrator.age_value,
                narrator.gender_value,
                float(1 - narrator.age_disclosed),
                float(1 - narrator.gender_disclosed),
                other_mean.age_value,
                other_mean.gender_value,
            ],
        )
    return table


def _pronouns_table(docs: Sequence[_Doc]) -> lexicon.FeatureTable:
    names = [
        "pron_first_singular", "pron_first_plural",
        "pron_third_singular", "pron_third_plural", "pron_ratio_1st_3rd",
    ]
    table = lexicon.FeatureTable(names)
    for doc in docs:
        counts = lexicon.pronoun_features(doc.tokens)
        n = max(1, len(doc.tokens))
        table.add_row(
            doc.sub.id,
            [
                counts.first_sing / n,
                counts.first_plur / n,
                counts.third_sing / n,
                counts.third_plur / n,
                counts.ratio_1st_3rd,
            ],
        )
    return table


def _lexicon_table(docs: Sequence[_Doc], name: str, lex: lexicon.Lexicon) -> lexicon.FeatureTable:
    names = [f"{name}.{cat}" for cat in lex.categories]
    table = lexicon.FeatureTable(names)
    for doc in docs:
        scores = lexicon.score(doc.tokens, lex)
        table.add_row(doc.sub.id, [scores.values[c] for c in lex.categories])
    return table


def _power_agency_table(
    docs: Sequence[_Doc],
    entity_classes: Sequence[character.EntityClass],
    pa_lexicon: character.PowerAgencyLexicon,
) -> tuple[lexicon.FeatureTable, list[str]]:
    names = []
    for cls in entity_classes:
        names.extend([f"pa.{cls.name}.power", f"pa.{cls.name}.agency"])
    table = lexicon.FeatureTable(names)
    excluded = []
    for doc in docs:
        if not doc.tuples:
            excluded.append(doc.sub.id)
            continue
        row = []
        for cls in entity_classes:
            score = character.power_agency(doc.tuples, pa_lexicon, cls)
            row.extend([score.power, score.agency])
        table.add_row(doc.sub.id, row)
    return table, excluded


def _arc_results(
    docs: Sequence[_Doc],
    valence_lex: arc_mod.ValenceLexicon,
    narrator: character.EntityClass,
    cfg: RunConfig,
) -> tuple[lexicon.FeatureTable, dict, list[str]]:
    table = lexicon.FeatureTable(["arc_slope"])
    profiles: dict[str, dict] = {}
    invalid = []
    for doc in docs:
        profile = arc_mod.story_arc(
            doc.sentences,
            doc.tuples,
            valence_lex,
            narrator,
            n_chunks=cfg.n_chunks,
            min_sentence_words=cfg.min_sentence_words,
            compound_norm=cfg.compound_norm,
            negation_factor=cfg.negation_factor,
        )
        if profile is None:
            invalid.append(doc.sub.id)
            continue
        table.add_row(doc.sub.id, [profile.slope])
        profiles[doc.sub.id] = {
            "label": doc.label,
            "chunk_means": list(profile.chunk_means),
            "slope": profile.slope,
            "n_sentences_used": profile.n_sentences_used,
        }
    return table, profiles, invalid


def _ordered_verbs(tuples: Sequence[character.SvoTuple]) -> list[str]:
    return [t.verb_lemma for t in sorted(tuples, key=lambda t: t.sentence_index)]


def _chain_results(
    docs: Sequence[_Doc], cfg: RunConfig, warnings: list[str]
) -> tuple[Optional[lexicon.FeatureTable], list[events.EventChain], list[str]]:
    with_tuples = [d for d in docs if d.tuples]
    nta_docs = [d.tuples for d in with_tuples if d.label == ingest.NTA]
    yta_docs = [d.tuples for d in with_tuples if d.label == ingest.YTA]
    try:
        chain_nta = events.build_chain("NTA", nta_docs, cfg.k_chain)
        chain_yta = events.build_chain("YTA", yta_docs, cfg.k_chain)
    except ValueError as exc:
        warnings.append(f"chain family skipped: {exc}")
        return None, [], []
    if chain_nta.degenerate or chain_yta.degenerate:
        warnings.append("degenerate event chain (tied depths collapsed clusters)")
    table = lexicon.FeatureTable(["chain_match_yta"])
    excluded = []
    for doc in docs:
        if not doc.tuples:
            excluded.append(doc.sub.id)
            continue
        prediction = events.predict_by_chain(
            _ordered_verbs(doc.tuples), chain_nta, chain_yta
        )
        table.add_row(doc.sub.id, [1.0 if prediction.label == "YTA" else 0.0])
    return table, [chain_nta, chain_yta], excluded


def cmd_extract(cfg: RunConfig) -> int:
    out = cfg.out()
    warnings: list[str] = []
    entity_classes = (
        character.load_entity_classes(_require_file(cfg.entity_classes, "entity classes"))
        if cfg.entity_classes
        else list(character.DEFAULT_ENTITY_CLASSES)
    )
    narrator = entity_classes[0]
    pa_lexicon = None
    if cfg.power_agency:
        pa_lexicon = character.load_power_agency(
            _require_file(cfg.power_agency, "power/agency lexicon")
        )
        if pa_lexicon.collisions:
            warnings.append(
                f"power/agency lexicon: {pa_lexicon.collisions} stem collisions dropped"
            )
    lexica = {
        name: lexicon.load_lexicon(_require_file(path, f"lexicon {name!r}"), name)
        for name, path in sorted(cfg.lexicons.items())
    }
    valence_lex = None
    if cfg.valence:
        valence_lex = arc_mod.load_valence_lexicon(
            _require_file(cfg.valence, "valence lexicon"),
            cfg.boosters if cfg.boosters else None,
            cfg.negations if cfg.negations else None,
        )

    docs, unlabeled = _prepare_docs(cfg, entity_classes, pa_lexicon, warnings)
    if not docs:
        raise ConfigError("no labeled submissions to extract features from")
    if unlabeled:
        warnings.append(f"{unlabeled} submissions without a binary label dropped")

    families: dict[str, lexicon.FeatureTable] = {}
    exclusions: dict[str, list[str]] = {}

    families["demographics"] = _demographics_table(docs)
    families["pronouns"] = _pronouns_table(docs)
    for name, lex in lexica.items():
        families[f"lexicon_{name}"] = _lexicon_table(docs, name, lex)

    any_tuples = any(d.tuples for d in docs)
    if pa_lexicon is not None and any_tuples:
        table, excluded = _power_agency_table(docs, entity_classes, pa_lexicon)
        families["power_agency"] = table
        exclusions["no_tuples"] = excluded
    else:
        warnings.append("power/agency family absent (no parses or no lexicon)")

    if valence_lex is not None and any_tuples:
        table, profiles, invalid = _arc_results(docs, valence_lex, narrator, cfg)
        if table.rows:
            families["arc"] = table
            exclusions["invalid_arc"] = invalid
            _write_json(out / "arcs.json", {"profiles": profiles}, cfg)
        else:
            warnings.append("arc family absent (no valid arcs)")
    else:
        warnings.append("arc family absent (no valence lexicon or no tuples)")

    if any_tuples:
        chain_table, chains, chain_excluded = _chain_results(docs, cfg, warnings)
        if chain_table is not None and chain_table.rows:
            families["chain"] = chain_table
            exclusions["chain_no_tuples"] = chain_excluded
            events.save_chains(chains, out / "chains.json", cfg.meta_dict())
    else:
        warnings.append("chain family absent (no tuples)")

    families["unigrams"] = lexicon.unigram_matrix(
        [(d.sub.id, d.tokens) for d in docs], cfg.min_doc_fraction
    )

    with (out / "labels.csv").open("w", encoding="utf-8", newline="") as handle:
        handle.write(f"# {cfg.meta_comment()}\n")
        handle.write("id,label\n")
        for doc in docs:
            handle.write(f"{doc.sub.id},{doc.label}\n")

    manifest_families = {}
    for name, table in families.items():
        path = out / f"features_{name}.csv"
        table.to_csv(path, cfg.meta_comment())
        manifest_families[name] = {
            "path": path.name,
            "n_features": len(table.feature_names),
            "n_rows": len(table.rows),
            "features": table.feature_names,
        }
    sources = sorted({d.svo_source for d in docs})
    _write_json(
        out / "manifest.json",
        {
            "families": manifest_families,
            "exclusions": {k: sorted(v) for k, v in exclusions.items()},
            "unlabeled_dropped": unlabeled,
            "svo_sources": sources,
            "warnings": warnings,
        },
        cfg,
    )
    for warning in warnings:
        print(f"warning: {warning}")
    print(f"extracted {len(families)} families over {len(docs)} submissions -> {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# analyze
# ---------------------------------------------------------------------------


def _load_labels(out: Path) -> dict[str, int]:
    path = out / "labels.csv"
    if not path.exists():
        raise ConfigError(f"labels file not found: {path} (run extract first)")
    labels: dict[str, int] = {}
    for line in path.read_text(encoding="utf-8").splitlines():
        if line.startswith("#") or line == "id,label" or not line:
            continue
        sid, _, value = line.partition(",")
        labels[sid] = int(value)
    return labels


def _load_manifest(out: Path) -> dict:
    path = out / "manifest.json"
    if not path.exists():
        raise ConfigError(f"manifest not found: {path} (run extract first)")
    return json.loads(path.read_text(encoding="utf-8"))


def _load_family(out: Path, manifest: dict, name: str) -> lexicon.FeatureTable:
    return lexicon.FeatureTable.from_csv(out / manifest["families"][name]["path"])


def _family_tests(
    table: lexicon.FeatureTable,
    labels: dict[str, int],
    skip_features: Sequence[str] = (),
    covariate_source: Optional[lexicon.FeatureTable] = None,
    warnings: Optional[list] = None,
) -> list[tuple[str, float, float]]:
    """Per-feature (name, cohens_d, wald_p); zero-variance features skipped."""
    ids = [sid for sid in table.ids if sid in labels]
    if len(ids) < 10:
        if warnings is not None:
            warnings.append(f"family with {len(ids)} labeled rows skipped")
        return []
    y = np.array([labels[sid] for sid in ids], dtype=float)
    if len(np.unique(y)) < 2:
        if warnings is not None:
            warnings.append("family skipped: one class after row filtering")
        return []
    covariate_cols: dict[str, np.ndarray] = {}
    if covariate_source is not None:
        for cov in COVARIATE_FEATURES:
            if cov in covariate_source.feature_names:
                col = covariate_source.column(cov, ids)
                try:
                    covariate_cols[cov] = stats.standardize(col, cov)
                except ValueError:
                    if warnings is not None:
                        warnings.append(f"constant covariate {cov} dropped")
    ones = np.ones(len(ids))
    results = []
    for name in table.feature_names:
        if name in skip_features:
            continue
        col = table.column(name, ids)
        try:
            z = stats.standardize(col, name)
        except ValueError as exc:
            if warnings is not None:
                warnings.append(f"feature skipped: {exc}")
            continue
        design = [ones, z]
        if covariate_cols and name in DEMOGRAPHIC_FEATURES:
            design.extend(covariate_cols[c] for c in sorted(covariate_cols))
        fit = stats.logistic_fit(np.column_stack(design), y)
        d = stats.cohens_d(col[y == 1], col[y == 0])
        results.append((name, d, float(fit.p_values[1])))
    return results


def _bh_results(
    tests: Sequence[tuple[str, float, float]], alpha: float
) -> list[stats.CorrelationResult]:
    if not tests:
        return []
    reject, _ = stats.bh_correct([t[2] for t in tests], alpha)
    rows = [
        stats.CorrelationResult(name, d, p, bool(flag))
        for (name, d, p), flag in zip(tests, reject)
    ]
    return sorted(rows, key=lambda r: r.feature)


def cmd_analyze(cfg: RunConfig) -> int:
    out = cfg.out()
    warnings: list[str] = []
    manifest = _load_manifest(out)
    labels = _load_labels(out)
    available = set(manifest["families"])

    open_vocab = {f"lexicon_{name}" for name in cfg.open_vocab_lexicons}
    theory_families = sorted(
        name
        for name in available
        if name != "unigrams" and name not in open_vocab
    )

    tables = {name: _load_family(out, manifest, name) for name in sorted(available)}
    demo_table = tables.get("demographics")

    # theory-driven set: BH within the combined family
    theory_tests: list[tuple[str, float, float]] = []
    for name in theory_families:
        theory_tests.extend(
            _family_tests(
                tables[name],
                labels,
                skip_features=COVARIATE_FEATURES,
                covariate_source=demo_table,
                warnings=warnings,
            )
        )
    theory_results = _bh_results(theory_tests, cfg.alpha)
    stats.write_correlations_csv(
        theory_results, out / "correlations_theory.csv", cfg.meta_comment()
    )

    # open-vocabulary lexica (LIWC-style): one family each
    for name in sorted(open_vocab & available):
        rows = _bh_results(_family_tests(tables[name], labels, warnings=warnings), cfg.alpha)
        if rows:
            stats.write_correlations_csv(
                rows, out / f"correlations_{name}.csv", cfg.meta_comment()
            )
        else:
            warnings.append(f"family {name} produced no correlation rows")

    # unigrams + word-cloud data
    unigram_results: list[stats.CorrelationResult] = []
    if "unigrams" in available:
        unigram_table = tables["unigrams"]
        unigram_results = _bh_results(
            _family_tests(unigram_table, labels, warnings=warnings), cfg.alpha
        )
        stats.write_correlations_csv(
            unigram_results, out / "correlations_unigrams.csv", cfg.meta_comment()
        )
        doc_freq = {
            name: int(np.count_nonzero(unigram_table.column(name)))
            for name in unigram_table.feature_names
        }
        cloud = [
            {
                "unigram": r.feature,
                "cohens_d": r.cohens_d,
                "doc_frequency": doc_freq[r.feature],
            }
            for r in unigram_results
            if r.q_significant
        ]
        cloud.sort(key=lambda e: (-abs(e["cohens_d"]), e["unigram"]))
        _write_json(out / "word_cloud.json", {"unigrams": cloud}, cfg)

    # interactions among individually significant theory features
    significant = [r.feature for r in theory_results if r.q_significant]
    interactions: list[stats.InteractionResult] = []
    if len(significant) >= 2:
        merged: Optional[lexicon.FeatureTable] = None
        for name in theory_families:
            wanted = [f for f in tables[name].feature_names if f in significant]
            if not wanted:
                continue
            part = tables[name].select(wanted)
            merged = part if merged is None else merged.merge(part)
        if merged is not None and len(merged.rows) > 8 + len(merged.feature_names):
            ids = [sid for sid in merged.ids if sid in labels]
            y = [labels[sid] for sid in ids]
            columns = {}
            for name in merged.feature_names:
                try:
                    columns[name] = stats.standardize(merged.column(name, ids), name)
                except ValueError as exc:
                    warnings.append(f"interaction feature dropped: {exc}")
            ztable = lexicon.FeatureTable(sorted(columns))
            for row_i, sid in enumerate(ids):
                ztable.add_row(sid, [columns[n][row_i] for n in sorted(columns)])
            covariates = None
            if demo_table is not None:
                covariates = {}
                for cov in COVARIATE_FEATURES:
                    if cov in demo_table.feature_names:
                        col = demo_table.column(cov, ids)
                        if np.std(col, ddof=1) > 0:
                            covariates[cov] = col
                if not covariates:
                    covariates = None
            interactions = stats.interaction_scan(
                ztable,
                y,
                cfg.alpha,
                covariates=covariates,
                covariate_features=DEMOGRAPHIC_FEATURES,
            )
        else:
            warnings.append("interaction scan skipped: too few shared rows")
    stats.write_interactions_csv(interactions, out / "interactions.csv", cfg.meta_comment())

    # arc class comparison
    arcs_path = out / "arcs.json"
    if arcs_path.exists():
        payload = json.loads(arcs_path.read_text(encoding="utf-8"))["profiles"]
        yta = [
            arc_mod.ArcProfile(tuple(p["chunk_means"]), p["slope"], p["n_sentences_used"])
            for p in payload.values()
            if p["label"] == ingest.YTA
        ]
        nta = [
            arc_mod.ArcProfile(tuple(p["chunk_means"]), p["slope"], p["n_sentences_used"])
            for p in payload.values()
            if p["label"] == ingest.NTA
        ]
        if len(yta) >= 2 and len(nta) >= 2:
            rows = arc_mod.arc_class_comparison(yta, nta)
            _write_json(
                out / "arc_comparison.json",
                {
                    "yta_means": [r.mean_yta for r in rows],
                    "nta_means": [r.mean_nta for r in rows],
                    "t_per_chunk": [r.t for r in rows],
                    "p_per_chunk": [r.p for r in rows],
                    "zero_variance_guards": [r.zero_variance_guard for r in rows],
                    "slope_summary": {
                        "yta_mean_slope": float(np.mean([a.slope for a in yta])),
                        "nta_mean_slope": float(np.mean([a.slope for a in nta])),
                    },
                },
                cfg,
            )
        else:
            warnings.append("arc comparison skipped: fewer than 2 valid arcs per class")

    _write_json(out / "analyze_manifest.json", {"warnings": warnings}, cfg)
    for warning in warnings:
        print(f"warning: {warning}")
    n_sig = sum(r.q_significant for r in theory_results)
    print(
        f"analyzed {len(theory_results)} theory features ({n_sig} significant), "
        f"{len(unigram_results)} unigrams, {len(interactions)} interaction pairs"
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# classify
# ---------------------------------------------------------------------------


def _feature_set_families(cfg: RunConfig, available: set[str], set_name: str) -> list[str]:
    lexicon_families = sorted(n for n in available if n.startswith("lexicon_"))
    story = [f for f in STORY_FAMILIES if f in available] + lexicon_families
    if cfg.include_unigrams_in_classify and "unigrams" in available:
        story.append("unigrams")
    chars = [f for f in CHARACTER_FAMILIES if f in available]
    if set_name == "story-level":
        return story
    if set_name == "character-level":
        return chars
    if set_name == "all":
        return story + chars
    raise ConfigError(f"unknown feature set {set_name!r}")


def cmd_classify(cfg: RunConfig) -> int:
    out = cfg.out()
    manifest = _load_manifest(out)
    labels = _load_labels(out)
    available = set(manifest["families"])
    wrote_any = False
    for set_name in cfg.feature_sets:
        family_names = _feature_set_families(cfg, available, set_name)
        if not family_names:
            print(f"warning: feature set {set_name!r} has no available families, skipped")
            continue
        merged: Optional[lexicon.FeatureTable] = None
        for name in family_names:
            table = _load_family(out, manifest, name)
            merged = table if merged is None else merged.merge(table)
        ids = [sid for sid in merged.ids if sid in labels]
        y = [labels[sid] for sid in ids]
        if len(set(y)) < 2:
            print(f"warning: feature set {set_name!r} has one class, skipped")
            continue
        balanced_ids = classify.undersample(ids, y, cfg.seed_undersample)
        label_of = {sid: labels[sid] for sid in ids}
        y_balanced = [label_of[sid] for sid in balanced_ids]
        subset = merged.subset_rows(balanced_ids)
        matrix = subset.matrix()
        # variance floor: a column must leave the modal value at least k_folds
        # times, otherwise some training fold would see it as constant
        keep = []
        dropped = []
        for j, name in enumerate(subset.feature_names):
            _, counts = np.unique(matrix[:, j], return_counts=True)
            if counts.size < 2 or matrix.shape[0] - counts.max() < cfg.k_folds:
                dropped.append(name)
            else:
                keep.append(name)
        if not keep:
            print(f"warning: feature set {set_name!r} is all-constant, skipped")
            continue
        subset = subset.select(keep)
        plan = classify.stratified_folds(y_balanced, cfg.k_folds, cfg.seed_folds)
        report = classify.train_eval(subset, y_balanced, plan)
        baseline = classify.mfc_baseline(y_balanced)
        _write_json(
            out / f"classifier_{set_name.replace('-', '_')}.json",
            {
                "feature_set": set_name,
                "families": family_names,
                "n_samples": len(balanced_ids),
                "n_features": len(keep),
                "dropped_features": sorted(dropped),
                "k_folds": cfg.k_folds,
                "report": report.to_dict(),
                "mfc_baseline": baseline.to_dict(),
            },
            cfg,
        )
        wrote_any = True
        print(
            f"{set_name}: accuracy {report.accuracy:.3f} "
            f"(MFC {baseline.accuracy:.3f}) over {len(balanced_ids)} balanced samples"
        )
    if not wrote_any:
        raise ConfigError("no feature set could be classified")
    return EXIT_OK


# ---------------------------------------------------------------------------
# chain / report
# ---------------------------------------------------------------------------


def cmd_chain_build(cfg: RunConfig, chains_out: Optional[str]) -> int:
    warnings: list[str] = []
    entity_classes = (
        character.load_entity_classes(_require_file(cfg.entity_classes, "entity classes"))
        if cfg.entity_classes
        else list(character.DEFAULT_ENTITY_CLASSES)
    )
    pa_lexicon = None
    if cfg.power_agency:
        pa_lexicon = character.load_power_agency(
            _require_file(cfg.power_agency, "power/agency lexicon")
        )
    docs, _ = _prepare_docs(cfg, entity_classes, pa_lexicon, warnings)
    nta_docs = [d.tuples for d in docs if d.label == ingest.NTA and d.tuples]
    yta_docs = [d.tuples for d in docs if d.label == ingest.YTA and d.tuples]
    chain_nta = events.build_chain("NTA", nta_docs, cfg.k_chain)
    chain_yta = events.build_chain("YTA", yta_docs, cfg.k_chain)
    target = Path(chains_out) if chains_out else cfg.out() / "chains.json"
    events.save_chains([chain_nta, chain_yta], target, cfg.meta_dict())
    print(f"wrote {target}")
    return EXIT_OK


def cmd_chain_inspect(path: str) -> int:
    chains = events.load_chains(_require_file(path, "chains file"))
    for chain in chains:
        sizes: dict[int, int] = {}
        for cid in chain.cluster_of.values():
            sizes[cid] = sizes.get(cid, 0) + 1
        degenerate = " (degenerate)" if chain.degenerate else ""
        print(f"{chain.label}: k={chain.k}{degenerate} breaks={list(chain.breaks)}")
        for cid in range(chain.k):
            members = sorted(v for v, c in chain.cluster_of.items() if c == cid)
            preview = ", ".join(members[:8]) + ("..." if len(members) > 8 else "")
            print(f"  cluster {cid}: {sizes.get(cid, 0)} verbs [{preview}]")
    return EXIT_OK


def cmd_report(cfg: RunConfig) -> int:
    out = cfg.out()
    bundle: dict = {}
    for name in sorted(p.name for p in out.glob("*.json")):
        if name == "report.json":
            continue
        bundle[name] = json.loads((out / name).read_text(encoding="utf-8"))
    for name in sorted(p.name for p in out.glob("*.csv")):
        lines = (out / name).read_text(encoding="utf-8").splitlines()
        bundle[name] = [line for line in lines if not line.startswith("#")]
    if not bundle:
        raise ConfigError(f"nothing to bundle in {out}")
    _write_json(out / "report.json", {"artifacts": bundle}, cfg)
    print(f"wrote {out / 'report.json'} ({len(bundle)} artifacts)")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="TOML config file")
    parser.add_argument("--out-dir", dest="output_dir", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="storyjudge",
        description="Feature extraction and analysis for labeled first-person narratives",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="load, filter, and label a JSONL corpus")
    _add_common(p)
    p.add_argument("--input", dest="corpus", help="raw JSONL corpus")
    p.add_argument("--min-words", dest="min_words", type=int)
    p.add_argument("--min-comments", dest="min_comments", type=int)
    p.add_argument("--bots", dest="bots", help="bot handle blocklist")
    p.add_argument("--out", dest="out_path", help="filtered JSONL output path")
    p.add_argument("--dry-run", action="store_true")

    p = sub.add_parser("extract", help="extract all feature families")
    _add_common(p)
    p.add_argument("--corpus", help="filtered JSONL corpus")
    p.add_argument("--parses", help="directory of CoNLL-U parses")
    p.add_argument("--entity-classes", dest="entity_classes")
    p.add_argument("--power-agency", dest="power_agency")
    p.add_argument("--valence")
    p.add_argument("--boosters")
    p.add_argument("--negations")
    p.add_argument("--min-doc-fraction", dest="min_doc_fraction", type=float)
    p.add_argument("--k-chain", dest="k_chain", type=int, choices=(3, 5, 10))
    p.add_argument("--n-chunks", dest="n_chunks", type=int)
    p.add_argument(
        "--no-fallback-svo", dest="fallback_svo", action="store_const", const=False
    )
    p.add_argument(
        "--lexicon",
        dest="lexicon_args",
        action="append",
        metavar="NAME=PATH",
        help="category lexicon CSV (repeatable)",
    )

    p = sub.add_parser("analyze", help="correlation, interaction, and arc reports")
    _add_common(p)
    p.add_argument("--alpha", type=float)
    p.add_argument(
        "--open-vocab",
        dest="open_vocab_lexicons",
        action="append",
        help="lexicon name treated as its own open-vocabulary family (repeatable)",
    )

    p = sub.add_parser("classify", help="cross-validated classification per feature set")
    _add_common(p)
    p.add_argument("--k-folds", dest="k_folds", type=int)
    p.add_argument("--seed-undersample", dest="seed_undersample", type=int)
    p.add_argument("--seed-folds", dest="seed_folds", type=int)
    p.add_argument(
        "--feature-set",
        dest="feature_sets",
        action="append",
        choices=("story-level", "character-level", "all"),
        help="restrict to one or more feature sets (repeatable)",
    )
    p.add_argument(
        "--include-unigrams",
        dest="include_unigrams_in_classify",
        action="store_const",
        const=True,
    )

    p = sub.add_parser("chain", help="build or inspect event chains")
    chain_sub = p.add_subparsers(dest="chain_command", required=True)
    pb = chain_sub.add_parser("build")
    _add_common(pb)
    pb.add_argument("--corpus")
    pb.add_argument("--parses")
    pb.add_argument("--power-agency", dest="power_agency")
    pb.add_argument("--entity-classes", dest="entity_classes")
    pb.add_argument("--k-chain", dest="k_chain", type=int, choices=(3, 5, 10))
    pb.add_argument("--out", dest="chains_out")
    pi = chain_sub.add_parser("inspect")
    pi.add_argument("chains_file")

    p = sub.add_parser("report", help="bundle analysis outputs into one JSON")
    _add_common(p)

    return parser


_CONFIG_ATTRS = {f.name for f in dataclasses.fields(RunConfig)}


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    overrides = {
        k: v for k, v in vars(args).items() if k in _CONFIG_ATTRS and v is not None
    }
    if getattr(args, "lexicon_args", None):
        lexicons = {}
        for item in args.lexicon_args:
            name, sep, path = item.partition("=")
            if not sep or not name or not path:
                raise ConfigError(f"--lexicon expects NAME=PATH, got {item!r}")
            lexicons[name] = path
        overrides["lexicons"] = lexicons
    for attr in ("feature_sets", "open_vocab_lexicons"):
        if overrides.get(attr) is not None:
            overrides[attr] = tuple(overrides[attr])
    return load_config(getattr(args, "config", None), overrides)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "ingest":
            return cmd_ingest(_config_from_args(args), args.out_path, args.dry_run)
        if args.command == "extract":
            return cmd_extract(_config_from_args(args))
        if args.command == "analyze":
            return cmd_analyze(_config_from_args(args))
        if args.command == "classify":
            return cmd_classify(_config_from_args(args))
        if args.command == "chain":
            if args.chain_command == "build":
                return cmd_chain_build(_config_from_args(args), args.chains_out)
            return cmd_chain_inspect(args.chains_file)
        if args.command == "report":
            return cmd_report(_config_from_args(args))
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
