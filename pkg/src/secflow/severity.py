"""Attack severity model: chi-square feature selection per attack type and
k-means clustering of attack records, mapping clusters to Low/Medium/High
severity by their mean hidden intensity."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .datagen import Dataset, DatasetKind, NORMAL
from .model import Severity, SEVERITY_LEVEL, SEVERITY_ORDER, AttackType

K_CLUSTERS = 3
CHI2_BINS = 10
DEFAULT_TOP_K = 5
KMEANS_MAX_ITER = 100
KMEANS_TOL = 1e-6
KMEANS_RESEEDS = 5


class SelectionError(ValueError):
    pass


class FittingError(ValueError):
    pass


class AssessmentError(KeyError):
    pass


def chi_square_statistics(ds: Dataset, attack_type: AttackType) -> np.ndarray:
    """Chi-square statistic per feature against the binary attack-vs-normal
    label, after discretizing each feature into 10 equal-width bins."""
    mask = (ds.labels == attack_type.value) | (ds.labels == NORMAL)
    X = ds.X[mask]
    y = (ds.labels[mask] == attack_type.value).astype(int)
    if len(np.unique(y)) < 2:
        raise SelectionError(
            f"need both {attack_type.value!r} and normal records for selection"
        )
    stats = np.zeros(X.shape[1])
    n = len(y)
    n_pos = y.sum()
    col_totals = np.array([n - n_pos, n_pos], dtype=float)
    for f in range(X.shape[1]):
        vals = X[:, f]
        lo, hi = vals.min(), vals.max()
        if hi - lo <= 0:
            stats[f] = 0.0  # constant feature carries no association
            continue
        bins = np.clip(((vals - lo) / (hi - lo) * CHI2_BINS).astype(int), 0, CHI2_BINS - 1)
        observed = np.zeros((CHI2_BINS, 2))
        np.add.at(observed, (bins, y), 1.0)
        row_totals = observed.sum(axis=1)
        expected = np.outer(row_totals, col_totals) / n
        with np.errstate(invalid="ignore", divide="ignore"):
            terms = (observed - expected) ** 2 / expected
        stats[f] = np.nansum(terms[expected > 0])
    return stats


def chi_square_select(ds: Dataset, attack_type: AttackType, top_k: int) -> list:
    """Indices of the top_k features by chi-square statistic, descending.
    Deterministic; statistic ties break on the lower feature index."""
    stats = chi_square_statistics(ds, attack_type)
    if top_k > len(stats):
        raise SelectionError(f"top_k {top_k} exceeds feature count {len(stats)}")
    order = sorted(range(len(stats)), key=lambda f: (-stats[f], f))
    return order[:top_k]


def _kmeans_pp_init(X, k, rng):
    centroids = [X[rng.integers(len(X))]]
    for _ in range(k - 1):
        d2 = np.min(
            [np.sum((X - c) ** 2, axis=1) for c in centroids], axis=0
        )
        total = d2.sum()
        if total <= 0:
            centroids.append(X[rng.integers(len(X))])
            continue
        probs = d2 / total
        centroids.append(X[rng.choice(len(X), p=probs)])
    return np.array(centroids)


def kmeans(X: np.ndarray, k: int, rng, max_iter=KMEANS_MAX_ITER, tol=KMEANS_TOL):
    """Lloyd's algorithm with k-means++ seeding. Returns (centroids, labels)
    or raises FittingError if every reseed leaves an empty cluster."""
    if len(X) < k:
        raise FittingError(f"need at least {k} records, got {len(X)}")
    for _ in range(KMEANS_RESEEDS):
        centroids = _kmeans_pp_init(X, k, rng)
        for _ in range(max_iter):
            d2 = np.sum((X[:, None, :] - centroids[None, :, :]) ** 2, axis=2)
            labels = d2.argmin(axis=1)
            new = np.empty_like(centroids)
            empty = False
            for j in range(k):
                members = X[labels == j]
                if len(members) == 0:
                    empty = True
                    break
                new[j] = members.mean(axis=0)
            if empty:
                break
            shift = np.max(np.abs(new - centroids))
            centroids = new
            if shift <= tol:
                break
        else:
            empty = False
        if not empty:
            d2 = np.sum((X[:, None, :] - centroids[None, :, :]) ** 2, axis=2)
            return centroids, d2.argmin(axis=1)
    raise FittingError("k-means produced an empty cluster on every reseed")


@dataclass
class SeverityEntry:
    """Fitted severity model for one (dataset kind, attack type) pair."""

    feature_indices: list
    scale_mean: np.ndarray  # standardization of the selected features
    scale_std: np.ndarray
    centroids: np.ndarray  # (k, top_k) in standardized space
    cluster_mean_intensity: np.ndarray  # (k,)
    cluster_level: list  # cluster index -> Severity

    def assess(self, features) -> tuple:
        x = (np.asarray(features, dtype=float)[self.feature_indices] - self.scale_mean) / (
            self.scale_std
        )
        d2 = np.sum((self.centroids - x) ** 2, axis=1)
        # equidistant clusters resolve to the lower severity
        best = min(
            range(len(d2)),
            key=lambda j: (d2[j], SEVERITY_ORDER.index(self.cluster_level[j])),
        )
        level = self.cluster_level[best]
        return level, SEVERITY_LEVEL[level]


@dataclass
class SeverityModel:
    entries: dict  # (DatasetKind, AttackType) -> SeverityEntry

    def assess(self, kind: DatasetKind, attack_type: AttackType, features) -> tuple:
        entry = self.entries.get((kind, attack_type))
        if entry is None:
            raise AssessmentError(
                f"no severity entry for ({kind.value}, {attack_type.value})"
            )
        return entry.assess(features)


def fit_severity_entry(
    ds: Dataset, attack_type: AttackType, seed: int, top_k: int | None = None
) -> SeverityEntry:
    """Cluster the type's attack records (k=3) on their chi-square-selected,
    standardized features; rank clusters by mean hidden intensity ascending
    into Low/Medium/High."""
    if top_k is None:
        top_k = min(DEFAULT_TOP_K, ds.X.shape[1])
    selected = chi_square_select(ds, attack_type, top_k)
    mask = ds.labels == attack_type.value
    X = ds.X[mask][:, selected]
    intensity = ds.intensity[mask]
    if len(X) < K_CLUSTERS:
        raise FittingError(
            f"{attack_type.value}: need >= {K_CLUSTERS} attack records, got {len(X)}"
        )
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    std[std <= 0] = 1.0
    Z = (X - mean) / std
    rng = np.random.default_rng(seed)
    centroids, labels = kmeans(Z, K_CLUSTERS, rng)
    cluster_intensity = np.array(
        [intensity[labels == j].mean() for j in range(K_CLUSTERS)]
    )
    # ascending mean intensity -> Low, Medium, High; intensity ties break on
    # cluster index so the ranking is always strict
    rank = sorted(range(K_CLUSTERS), key=lambda j: (cluster_intensity[j], j))
    cluster_level = [None] * K_CLUSTERS
    for pos, j in enumerate(rank):
        cluster_level[j] = SEVERITY_ORDER[pos]
    return SeverityEntry(
        feature_indices=list(selected),
        scale_mean=mean,
        scale_std=std,
        centroids=centroids,
        cluster_mean_intensity=cluster_intensity,
        cluster_level=cluster_level,
    )


def fit_severity(datasets: dict, seed: int) -> SeverityModel:
    """Fit entries for every (kind, attack type) with enough records.
    `datasets` maps DatasetKind -> Dataset (with intensity metadata)."""
    entries = {}
    ss = np.random.SeedSequence(seed)
    keys = [(kind, at) for kind in datasets for at in AttackType]
    for child_seed, (kind, at) in zip(ss.generate_state(len(keys)), keys):
        ds = datasets[kind]
        if np.sum(ds.labels == at.value) < K_CLUSTERS:
            continue
        entries[(kind, at)] = fit_severity_entry(ds, at, int(child_seed))
    return SeverityModel(entries=entries)


# ---------------------------------------------------------------------------
# Serialization (embedded in the shared model JSON file)

def severity_to_obj(model: SeverityModel):
    return {
        f"{kind.value}/{at.value}": {
            "feature_indices": entry.feature_indices,
            "scale_mean": entry.scale_mean.tolist(),
            "scale_std": entry.scale_std.tolist(),
            "centroids": entry.centroids.tolist(),
            "cluster_mean_intensity": entry.cluster_mean_intensity.tolist(),
            "cluster_level": [lv.value for lv in entry.cluster_level],
        }
        for (kind, at), entry in model.entries.items()
    }


def severity_from_obj(obj) -> SeverityModel:
    entries = {}
    for key, e in obj.items():
        kind_name, at_name = key.split("/")
        entries[(DatasetKind(kind_name), AttackType(at_name))] = SeverityEntry(
            feature_indices=list(e["feature_indices"]),
            scale_mean=np.array(e["scale_mean"]),
            scale_std=np.array(e["scale_std"]),
            centroids=np.array(e["centroids"]),
            cluster_mean_intensity=np.array(e["cluster_mean_intensity"]),
            cluster_level=[Severity(v) for v in e["cluster_level"]],
        )
    return SeverityModel(entries=entries)
