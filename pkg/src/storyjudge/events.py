"""Chain-of-events machinery: verb depth statistics, Jenks natural-breaks
clustering into per-label chains, and edit-distance chain matching."""

from __future__ import annotations

import json
from bisect import bisect_left
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Iterable, Sequence

import numpy as np

if TYPE_CHECKING:  # pragma: no cover
    from .character import SvoTuple


@dataclass(frozen=True)
class VerbDepth:
    total_depth: float
    frequency: int
    normalized_depth: float


@dataclass
class EventChain:
    label: str
    k: int
    breaks: tuple[float, ...]
    cluster_of: dict[str, int]
    degenerate: bool = False


@dataclass(frozen=True)
class ChainPrediction:
    label: str
    no_signal: bool = False


def verb_depths(tuple_docs: Iterable[Sequence["SvoTuple"]]) -> dict[str, VerbDepth]:
    """Accumulate per-verb story depth (sentence index) across a corpus subset."""
    totals: dict[str, float] = {}
    freqs: dict[str, int] = {}
    for doc in tuple_docs:
        for tup in doc:
            totals[tup.verb_lemma] = totals.get(tup.verb_lemma, 0.0) + tup.sentence_index
            freqs[tup.verb_lemma] = freqs.get(tup.verb_lemma, 0) + 1
    return {
        verb: VerbDepth(totals[verb], freqs[verb], totals[verb] / freqs[verb])
        for verb in sorted(totals)
    }


def _class_sse(pref: np.ndarray, pref2: np.ndarray, starts: np.ndarray, end: int) -> np.ndarray:
    counts = end - starts + 1
    sums = pref[end + 1] - pref[starts]
    squares = pref2[end + 1] - pref2[starts]
    return np.maximum(squares - sums * sums / counts, 0.0)


def _jenks_partition(values: Sequence[float], k: int) -> tuple[list[int], float]:
    """Optimal contiguous k-partition of sorted values by total within-class SSE.

    Returns the inclusive end index of each class and the objective value.
    """
    v = np.asarray(values, dtype=float)
    n = v.size
    pref = np.concatenate([[0.0], np.cumsum(v)])
    pref2 = np.concatenate([[0.0], np.cumsum(v * v)])
    best = np.full(n, np.inf)
    ends = np.arange(n)
    for j in range(n):
        best[j] = _class_sse(pref, pref2, np.array([0]), j)[0]
    backptr = np.zeros((k + 1, n), dtype=int)
    for m in range(2, k + 1):
        current = np.full(n, np.inf)
        for j in range(m - 1, n):
            starts = np.arange(m - 1, j + 1)
            costs = best[starts - 1] + _class_sse(pref, pref2, starts, j)
            t = int(np.argmin(costs))
            current[j] = costs[t]
            backptr[m, j] = starts[t]
        best = current
    bounds: list[int] = []
    j = n - 1
    for m in range(k, 1, -1):
        bounds.append(j)
        j = backptr[m, j] - 1
    bounds.append(j)
    bounds.reverse()
    return bounds, float(best[n - 1])


def jenks_breaks(values: Sequence[float], k: int) -> list[float]:
    """Boundary values (upper bound of each class except the last) of the
    optimal k-class contiguous partition."""
    if k <= 0:
        raise ValueError("k must be positive")
    if k > len(values):
        raise ValueError(f"k={k} exceeds {len(values)} values")
    ordered = sorted(float(v) for v in values)
    ends, _ = _jenks_partition(ordered, k)
    return [ordered[e] for e in ends[:-1]]


def build_chain(
    label: str, tuple_docs: Iterable[Sequence["SvoTuple"]], k: int = 3
) -> EventChain:
    """Cluster a label's verbs by normalized depth into an ordered event chain.

    All-equal (or otherwise tied) depths collapse the boundary values; the
    resulting chain carries fewer clusters and a degenerate flag instead of
    failing the pipeline.
    """
    table = verb_depths(tuple_docs)
    if len(table) < k:
        raise ValueError(f"need at least {k} distinct verbs, got {len(table)}")
    ordered = sorted(depth.normalized_depth for depth in table.values())
    ends, _ = _jenks_partition(ordered, k)
    uppers: list[float] = []
    for e in ends:
        value = ordered[e]
        if not uppers or value > uppers[-1]:
            uppers.append(value)
    k_eff = len(uppers)
    boundary = tuple(uppers[:-1])
    cluster_of = {
        verb: bisect_left(boundary, depth.normalized_depth)
        for verb, depth in table.items()
    }
    return EventChain(label, k_eff, boundary, cluster_of, degenerate=k_eff < k)


def dl_distance(a: Sequence, b: Sequence) -> int:
    """Damerau-Levenshtein distance, optimal-string-alignment variant."""
    sa, sb = list(a), list(b)
    la, lb = len(sa), len(sb)
    if la == 0:
        return lb
    if lb == 0:
        return la
    prev2: list[int] | None = None
    prev = list(range(lb + 1))
    for i in range(1, la + 1):
        cur = [i] + [0] * lb
        ca = sa[i - 1]
        for j in range(1, lb + 1):
            cost = prev[j - 1] + (ca != sb[j - 1])
            dele = prev[j] + 1
            if dele < cost:
                cost = dele
            ins = cur[j - 1] + 1
            if ins < cost:
                cost = ins
            if (
                prev2 is not None
                and j > 1
                and ca == sb[j - 2]
                and sa[i - 2] == sb[j - 1]
            ):
                trans = prev2[j - 2] + 1
                if trans < cost:
                    cost = trans
            cur[j] = cost
        prev2, prev = prev, cur
    return prev[lb]


def cluster_sequence(verbs: Iterable[str], chain: EventChain) -> list[int]:
    """Map a verb sequence to cluster ids, skipping verbs the chain does not
    know and collapsing consecutive duplicates."""
    seq: list[int] = []
    for verb in verbs:
        cid = chain.cluster_of.get(verb)
        if cid is None:
            continue
        if not seq or seq[-1] != cid:
            seq.append(cid)
    return seq


def predict_by_chain(
    verbs: Sequence[str], chain_nta: EventChain, chain_yta: EventChain
) -> ChainPrediction:
    """Pick the label whose canonical chain is closest in edit distance.

    Ties go to NTA (the majority class); a post with no verbs known to either
    chain is NTA with the no-signal flag set.
    """
    seq_nta = cluster_sequence(verbs, chain_nta)
    seq_yta = cluster_sequence(verbs, chain_yta)
    if not seq_nta and not seq_yta:
        return ChainPrediction("NTA", no_signal=True)
    dist_nta = dl_distance(seq_nta, range(chain_nta.k))
    dist_yta = dl_distance(seq_yta, range(chain_yta.k))
    return ChainPrediction("NTA" if dist_nta <= dist_yta else "YTA")


def chain_to_dict(chain: EventChain) -> dict:
    return {
        "label": chain.label,
        "k": chain.k,
        "breaks": list(chain.breaks),
        "clusters": dict(sorted(chain.cluster_of.items())),
        "degenerate": chain.degenerate,
    }


def chain_from_dict(data: dict) -> EventChain:
    return EventChain(
        label=data["label"],
        k=int(data["k"]),
        breaks=tuple(float(b) for b in data["breaks"]),
        cluster_of={str(v): int(c) for v, c in data["clusters"].items()},
        degenerate=bool(data.get("degenerate", False)),
    )


def save_chains(chains: Sequence[EventChain], path: str | Path, meta: dict | None = None) -> None:
    payload = {"chains": [chain_to_dict(c) for c in chains]}
    if meta:
        payload["meta"] = meta
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def load_chains(path: str | Path) -> list[EventChain]:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    return [chain_from_dict(d) for d in payload["chains"]]
