"""Feature extraction and statistical analysis for first-person
moral-dilemma narratives with crowd-sourced YTA/NTA verdicts."""

from .arc import ArcProfile, ValenceLexicon, arc_class_comparison, sentence_sentiment, story_arc
from .character import (
    CharacterProfile,
    EntityClass,
    PowerAgencyLexicon,
    PowerAgencyScore,
    SvoTuple,
    extract_demographics,
    extract_svo,
    match_entity,
    parse_conllu,
    power_agency,
)
from .classify import ClassifierReport, FoldPlan, mfc_baseline, stratified_folds, train_eval, undersample
from .events import EventChain, build_chain, dl_distance, jenks_breaks, predict_by_chain, verb_depths
from .ingest import CorpusStats, Submission, corpus_stats, encode_label, filter_eligible, load_submissions
from .lexicon import FeatureTable, Lexicon, PronounCounts, load_lexicon, pronoun_features, score, unigram_matrix
from .stats import (
    CorrelationResult,
    InteractionResult,
    LogisticFit,
    bh_correct,
    cohens_d,
    interaction_scan,
    logistic_fit,
    standardize,
    welch_t,
)
from .text import Sentence, Token, normalize, split_sentences, stem, tokenize

__version__ = "0.1.0"
