"""Statistical engine: standardization, ridge-stabilized IRLS logistic
regression with Wald inference, signed Cohen's D, Benjamini-Hochberg
correction, Welch t-tests, and pairwise interaction scans.

Conventions used throughout: sample (n-1) standard deviations, YTA
operationalized as 1 and NTA as 0, and Cohen's D signed negative when the
feature mean is higher in the NTA class.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import special

from .lexicon import FeatureTable

# Guard value reported when a zero-variance comparison has unequal means.
T_SENTINEL = 1e6


@dataclass
class LogisticFit:
    coefficients: np.ndarray
    std_errors: np.ndarray
    p_values: np.ndarray
    converged: bool
    n_iter: int
    separation_warning: bool = False

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return _sigmoid(np.asarray(X, float) @ self.coefficients)


@dataclass(frozen=True)
class CorrelationResult:
    feature: str
    cohens_d: float
    p_value: float
    q_significant: bool


@dataclass(frozen=True)
class InteractionResult:
    f1: str
    f2: str
    beta3: float
    p_value: float
    q_significant: bool

    def __post_init__(self):
        if self.f1 >= self.f2:
            raise ValueError("interaction pair must be stored with f1 < f2")


def standardize(values: Sequence[float], name: str | None = None) -> np.ndarray:
    """Mean-center and scale to unit sample (n-1) standard deviation."""
    x = np.asarray(values, dtype=float)
    if x.size < 2:
        raise ValueError("standardize needs at least 2 values")
    sd = x.std(ddof=1)
    if sd == 0 or not np.isfinite(sd):
        raise ValueError(f"zero variance in feature {name or '<unnamed>'}")
    return (x - x.mean()) / sd


def _sigmoid(eta: np.ndarray) -> np.ndarray:
    out = np.empty_like(eta)
    pos = eta >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-eta[pos]))
    ex = np.exp(eta[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _penalized_ll(X: np.ndarray, y: np.ndarray, beta: np.ndarray, ridge: float) -> float:
    eta = X @ beta
    ll = float(np.sum(y * eta - np.logaddexp(0.0, eta)))
    return ll - 0.5 * ridge * float(beta @ beta)


def logistic_fit(
    X: np.ndarray,
    y: Sequence[int],
    ridge: float = 1e-8,
    max_iter: int = 100,
    tol: float = 1e-8,
) -> LogisticFit:
    """Newton/IRLS maximization of the ridge-penalized log-likelihood.

    X must carry its own intercept column. Standard errors come from the
    inverse penalized Hessian at the solution; p-values are two-sided Wald.
    Perfect separation stays finite thanks to the ridge and is flagged.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, p = X.shape
    if y.shape != (n,):
        raise ValueError("y length must match X rows")
    if not set(np.unique(y)) <= {0.0, 1.0}:
        raise ValueError("y must be binary 0/1")
    if len(np.unique(y)) < 2:
        raise ValueError("y contains a single class")
    if n <= p:
        raise ValueError(f"need more observations ({n}) than parameters ({p})")

    beta = np.zeros(p)
    eye = np.eye(p)
    converged = False
    n_iter = max_iter
    for iteration in range(1, max_iter + 1):
        prob = _sigmoid(X @ beta)
        w = np.clip(prob * (1.0 - prob), 1e-12, None)
        grad = X.T @ (y - prob) - ridge * beta
        hess = (X.T * w) @ X + ridge * eye
        step = np.linalg.solve(hess, grad)
        # halve overshooting steps so the penalized likelihood never drops
        scale = 1.0
        base_ll = _penalized_ll(X, y, beta, ridge)
        for _ in range(40):
            if _penalized_ll(X, y, beta + scale * step, ridge) >= base_ll - 1e-12:
                break
            scale *= 0.5
        beta = beta + scale * step
        if np.max(np.abs(scale * step)) < tol:
            converged = True
            n_iter = iteration
            break

    prob = _sigmoid(X @ beta)
    w = np.clip(prob * (1.0 - prob), 1e-12, None)
    hess = (X.T * w) @ X + ridge * eye
    cov = np.linalg.inv(hess)
    std_errors = np.sqrt(np.diag(cov))
    z = np.divide(beta, std_errors, out=np.zeros_like(beta), where=std_errors > 0)
    p_values = 2.0 * special.ndtr(-np.abs(z))
    separation = bool(np.any(prob < 1e-10) or np.any(prob > 1.0 - 1e-10))
    return LogisticFit(beta, std_errors, p_values, converged, n_iter, separation)


def cohens_d(group_yta: Sequence[float], group_nta: Sequence[float]) -> float:
    """Difference in group means over the pooled sd; negative when NTA is higher."""
    a = np.asarray(group_yta, dtype=float)
    b = np.asarray(group_nta, dtype=float)
    if a.size < 2 or b.size < 2:
        raise ValueError("both groups need at least 2 values")
    pooled_var = ((a.size - 1) * a.var(ddof=1) + (b.size - 1) * b.var(ddof=1)) / (
        a.size + b.size - 2
    )
    if pooled_var == 0:
        raise ValueError("zero pooled standard deviation")
    return float((a.mean() - b.mean()) / np.sqrt(pooled_var))


def bh_correct(
    p_values: Sequence[float], alpha: float = 0.05
) -> tuple[np.ndarray, np.ndarray]:
    """Benjamini-Hochberg step-up; returns (reject flags, q-values) in input order."""
    p = np.asarray(p_values, dtype=float)
    if not 0 < alpha <= 1:
        raise ValueError("alpha must be in (0, 1]")
    m = p.size
    if m == 0:
        return np.zeros(0, dtype=bool), np.zeros(0)
    if p.min() < 0 or p.max() > 1:
        raise ValueError("p-values must lie in [0, 1]")
    order = np.argsort(p, kind="stable")
    sorted_p = p[order]
    ranks = np.arange(1, m + 1)
    passing = np.nonzero(sorted_p <= alpha * ranks / m)[0]
    k = passing[-1] + 1 if passing.size else 0
    reject_sorted = np.zeros(m, dtype=bool)
    reject_sorted[:k] = True
    q_sorted = np.minimum.accumulate((sorted_p * m / ranks)[::-1])[::-1]
    q_sorted = np.clip(q_sorted, 0.0, 1.0)
    reject = np.empty(m, dtype=bool)
    q = np.empty(m)
    reject[order] = reject_sorted
    q[order] = q_sorted
    return reject, q


def t_cdf(x: float, df: float) -> float:
    """Student t CDF (the reference point for Welch p-values)."""
    return float(special.stdtr(df, x))


def welch_t(a: Sequence[float], b: Sequence[float]) -> tuple[float, float]:
    """Welch statistic with Welch-Satterthwaite df and two-sided p.

    Zero variance on both sides: equal means give (0, 1); unequal means give
    the +/-T_SENTINEL guard with p = 0.
    """
    x = np.asarray(a, dtype=float)
    z = np.asarray(b, dtype=float)
    if x.size < 2 or z.size < 2:
        raise ValueError("both samples need at least 2 values")
    vx = x.var(ddof=1)
    vz = z.var(ddof=1)
    diff = x.mean() - z.mean()
    if vx == 0 and vz == 0:
        if diff == 0:
            return 0.0, 1.0
        return (T_SENTINEL if diff > 0 else -T_SENTINEL), 0.0
    se2 = vx / x.size + vz / z.size
    t = diff / np.sqrt(se2)
    df = se2**2 / (
        (vx / x.size) ** 2 / (x.size - 1) + (vz / z.size) ** 2 / (z.size - 1)
    )
    p = 2.0 * t_cdf(-abs(float(t)), df)
    return float(t), float(p)


def correlation_analysis(
    table: FeatureTable,
    y: Sequence[int],
    alpha: float = 0.05,
    covariates: Mapping[str, Sequence[float]] | None = None,
    covariate_features: Iterable[str] = (),
) -> list[CorrelationResult]:
    """Per-feature logistic regression of the standardized value on the label.

    Wald p-values are BH-corrected within this family; Cohen's D (signed by
    class direction) is reported as the effect size. Features named in
    covariate_features get the supplied covariate columns added to their
    regression (the undisclosed-demographics controls).
    """
    y_arr = np.asarray(y, dtype=float)
    needs_covariates = set(covariate_features)
    cov_cols = []
    if covariates:
        for cov_name in sorted(covariates):
            cov_cols.append(standardize(covariates[cov_name], cov_name))
    ones = np.ones(y_arr.size)
    names = sorted(table.feature_names)
    p_values = []
    effect_sizes = []
    for name in names:
        col = table.column(name)
        z = standardize(col, name)
        design_cols = [ones, z]
        if cov_cols and name in needs_covariates:
            design_cols.extend(cov_cols)
        fit = logistic_fit(np.column_stack(design_cols), y_arr)
        p_values.append(float(fit.p_values[1]))
        effect_sizes.append(cohens_d(col[y_arr == 1], col[y_arr == 0]))
    reject, _ = bh_correct(p_values, alpha)
    return [
        CorrelationResult(name, d, p, bool(flag))
        for name, d, p, flag in zip(names, effect_sizes, p_values, reject)
    ]


def interaction_scan(
    table: FeatureTable,
    y: Sequence[int],
    alpha: float = 0.05,
    covariates: Mapping[str, Sequence[float]] | None = None,
    covariate_features: Iterable[str] = (),
) -> list[InteractionResult]:
    """Fit y ~ f1 + f2 + f1*f2 for every unordered feature pair.

    The caller passes only individually significant features. Columns are
    (re-)standardized here, so a constant feature raises the zero-variance
    error naming it. The product term is standardized as well so the
    reported beta3 is a standardized coefficient; BH correction runs across
    all pairs.
    """
    y_arr = np.asarray(y, dtype=float)
    needs_covariates = set(covariate_features)
    cov_cols = {}
    if covariates:
        for cov_name in sorted(covariates):
            cov_cols[cov_name] = standardize(covariates[cov_name], cov_name)
    ones = np.ones(y_arr.size)
    names = sorted(table.feature_names)
    z_cols = {name: standardize(table.column(name), name) for name in names}
    pairs: list[tuple[str, str]] = []
    betas: list[float] = []
    p_values: list[float] = []
    for i, f1 in enumerate(names):
        z1 = z_cols[f1]
        for f2 in names[i + 1 :]:
            z2 = z_cols[f2]
            product = standardize(z1 * z2, f"{f1}*{f2}")
            design_cols = [ones, z1, z2, product]
            if cov_cols and {f1, f2} & needs_covariates:
                design_cols.extend(cov_cols[c] for c in sorted(cov_cols))
            fit = logistic_fit(np.column_stack(design_cols), y_arr)
            pairs.append((f1, f2))
            betas.append(float(fit.coefficients[3]))
            p_values.append(float(fit.p_values[3]))
    reject, _ = bh_correct(p_values, alpha) if pairs else (np.zeros(0, bool), None)
    return [
        InteractionResult(f1, f2, b, p, bool(flag))
        for (f1, f2), b, p, flag in zip(pairs, betas, p_values, reject)
    ]


def write_correlations_csv(
    results: Sequence[CorrelationResult], path: str | Path, meta: str | None = None
) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as handle:
        if meta is not None:
            handle.write(f"# {meta}\n")
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["feature", "cohens_d", "p", "q_significant"])
        for r in results:
            writer.writerow([r.feature, repr(r.cohens_d), repr(r.p_value), str(r.q_significant).lower()])


def write_interactions_csv(
    results: Sequence[InteractionResult], path: str | Path, meta: str | None = None
) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as handle:
        if meta is not None:
            handle.write(f"# {meta}\n")
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["f1", "f2", "beta3", "p", "q_significant"])
        for r in results:
            writer.writerow(
                [r.f1, r.f2, repr(r.beta3), repr(r.p_value), str(r.q_significant).lower()]
            )
