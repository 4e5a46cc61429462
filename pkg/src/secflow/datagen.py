"""Synthetic labeled telemetry: network traffic data (NTD) and cloud log
files (CLF).

Records are drawn from class-conditional Gaussians. Attack records carry a
hidden ground-truth intensity in (0,1] that shifts the attack's signature
features; the intensity is emitted only to a companion metadata file and is
never visible to detectors.
"""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass

import numpy as np

NORMAL = "normal"
ATTACK_LABELS = ("dos", "probe", "u2r", "r2l")
LABELS = (NORMAL,) + ATTACK_LABELS


class DatasetKind(enum.Enum):
    NTD = "ntd"
    CLF = "clf"


NTD_FEATURES = (
    "duration",
    "protocol_type",
    "src_bytes",
    "dst_bytes",
    "packet_count",
    "srv_count",
    "serror_rate",
    "same_srv_rate",
)
CLF_FEATURES = ("cpu_util", "ram_util", "bw_util")

FEATURES = {DatasetKind.NTD: NTD_FEATURES, DatasetKind.CLF: CLF_FEATURES}

# Baseline (normal-traffic) mean and standard deviation per feature.
_NTD_BASE = {
    "duration": (10.0, 3.0),
    "protocol_type": None,  # categorical, uniform over {0,1,2}
    "src_bytes": (500.0, 100.0),
    "dst_bytes": (800.0, 150.0),
    "packet_count": (100.0, 30.0),
    "srv_count": (10.0, 4.0),
    "serror_rate": (0.05, 0.03),
    "same_srv_rate": (0.7, 0.1),
}
_CLF_BASE = {
    "cpu_util": (0.25, 0.06),
    "ram_util": (0.30, 0.06),
    "bw_util": (0.30, 0.06),
}

# Per-attack signature shifts: feature -> (offset, slope); the shifted mean is
# base + offset + slope * intensity. Offsets keep the classes separable from
# normal traffic even at intensity ~ 0; slopes run across (nearly) all
# continuous features so record geometry tracks the hidden intensity in every
# dimension a selector might keep.
SIGNATURES = {
    DatasetKind.NTD: {
        "dos": {
            "packet_count": (300.0, 300.0),
            "serror_rate": (0.4, 0.4),
            "duration": (10.0, 25.0),
            "src_bytes": (150.0, 600.0),
            "dst_bytes": (200.0, 900.0),
            "srv_count": (10.0, 30.0),
        },
        "probe": {
            "srv_count": (30.0, 40.0),
            "src_bytes": (400.0, 600.0),
            "duration": (30.0, 30.0),
            "packet_count": (50.0, 200.0),
            "dst_bytes": (150.0, 900.0),
        },
        "u2r": {
            "duration": (60.0, 60.0),
            "src_bytes": (120.0, 600.0),
            "dst_bytes": (100.0, 900.0),
            "packet_count": (40.0, 200.0),
            "srv_count": (6.0, 25.0),
        },
        "r2l": {
            "dst_bytes": (2500.0, 3000.0),
            "src_bytes": (300.0, 450.0),
            "duration": (15.0, 25.0),
            "packet_count": (30.0, 200.0),
            "srv_count": (5.0, 25.0),
        },
    },
    DatasetKind.CLF: {
        "dos": {
            "bw_util": (0.20, 0.40),
            "cpu_util": (0.10, 0.38),
            "ram_util": (0.08, 0.38),
        },
        "probe": {
            "cpu_util": (0.15, 0.40),
            "bw_util": (0.10, 0.38),
            "ram_util": (0.05, 0.36),
        },
        "u2r": {
            "cpu_util": (0.30, 0.38),
            "ram_util": (0.10, 0.40),
            "bw_util": (0.05, 0.36),
        },
        "r2l": {
            "ram_util": (0.25, 0.40),
            "cpu_util": (0.06, 0.40),
            "bw_util": (0.07, 0.35),
        },
    },
}

# serror_rate capped below 1 so its intensity response never saturates.
_UNIT_FEATURES = {"serror_rate", "same_srv_rate", "cpu_util", "ram_util", "bw_util"}


class DataConfigError(ValueError):
    pass


class StratificationError(ValueError):
    pass


@dataclass(frozen=True)
class TelemetryRecord:
    features: np.ndarray
    label: str
    intensity: float


@dataclass
class Dataset:
    kind: DatasetKind
    feature_names: tuple
    X: np.ndarray  # (n, d) float64
    labels: np.ndarray  # (n,) unicode
    intensity: np.ndarray  # (n,) float64; 0 for normal records

    def __len__(self):
        return len(self.labels)

    def record(self, idx: int) -> TelemetryRecord:
        return TelemetryRecord(self.X[idx], str(self.labels[idx]), float(self.intensity[idx]))

    def to_csv(self) -> str:
        """Feature columns in schema order plus a final lowercase 'label'
        column. The hidden intensity is deliberately excluded."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(list(self.feature_names) + ["label"])
        for row, label in zip(self.X, self.labels):
            w.writerow([repr(float(v)) for v in row] + [str(label)])
        return buf.getvalue()

    def metadata_csv(self) -> str:
        """Row index -> hidden intensity, for severity training only."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["row", "intensity"])
        for idx, val in enumerate(self.intensity):
            w.writerow([idx, repr(float(val))])
        return buf.getvalue()


def dataset_from_csv(kind: DatasetKind, csv_text: str, meta_text: str | None = None) -> Dataset:
    rows = list(csv.reader(io.StringIO(csv_text)))
    header, body = rows[0], rows[1:]
    expected = list(FEATURES[kind]) + ["label"]
    if header != expected:
        raise DataConfigError(f"unexpected {kind.value} header: {header}")
    X = np.array([[float(v) for v in r[:-1]] for r in body], dtype=float)
    labels = np.array([r[-1] for r in body])
    intensity = np.zeros(len(body))
    if meta_text is not None:
        meta = list(csv.reader(io.StringIO(meta_text)))[1:]
        for row_idx, val in meta:
            intensity[int(row_idx)] = float(val)
    return Dataset(kind, FEATURES[kind], X, labels, intensity)


def _draw_intensity(rng, n, mode):
    if mode == "banded":
        # Three tight bands centered on the intensity terciles.
        centers = np.array([1 / 6, 1 / 2, 5 / 6])
        picks = rng.integers(0, 3, size=n)
        return centers[picks] + rng.uniform(-0.05, 0.05, size=n)
    # uniform over (0, 1]
    return 1.0 - rng.random(n)


def generate(
    kind: DatasetKind,
    n: int,
    attack_mix: dict,
    seed: int,
    intensity_mode: str = "uniform",
) -> Dataset:
    """Generate `n` records with label fractions `attack_mix` (label -> fraction
    summing to 1). Deterministic given `seed`."""
    if n < 1:
        raise DataConfigError("record count must be >= 1")
    total = sum(attack_mix.values())
    if abs(total - 1.0) > 1e-9:
        raise DataConfigError(f"attack_mix fractions sum to {total}, expected 1")
    for label in attack_mix:
        if label not in LABELS:
            raise DataConfigError(f"unknown label {label!r}")

    # largest-remainder apportionment of n among labels, deterministic
    items = [(label, frac) for label, frac in attack_mix.items() if frac > 0]
    counts = {label: int(n * frac) for label, frac in items}
    remainder = n - sum(counts.values())
    by_frac = sorted(items, key=lambda lf: (-(n * lf[1] - int(n * lf[1])), lf[0]))
    for label, _ in by_frac[:remainder]:
        counts[label] += 1

    rng = np.random.default_rng(seed)
    names = FEATURES[kind]
    rows, labels, intensities = [], [], []
    for label in LABELS:
        cnt = counts.get(label, 0)
        if cnt == 0:
            continue
        intensity = (
            np.zeros(cnt) if label == NORMAL else _draw_intensity(rng, cnt, intensity_mode)
        )
        X = sample_features(kind, label, intensity, rng)
        rows.append(X)
        labels.extend([label] * cnt)
        intensities.append(intensity)
    X = np.vstack(rows)
    labels = np.array(labels)
    intensity = np.concatenate(intensities)
    # deterministic shuffle so labels are interleaved
    perm = rng.permutation(len(labels))
    return Dataset(kind, names, X[perm], labels[perm], intensity[perm])


def sample_features(kind: DatasetKind, label: str, intensity: np.ndarray, rng) -> np.ndarray:
    """Draw feature rows for one label; `intensity` gives the per-row severity
    signal (ignored for normal records)."""
    n = len(intensity)
    base = _NTD_BASE if kind is DatasetKind.NTD else _CLF_BASE
    sig = SIGNATURES[kind].get(label, {})
    cols = []
    for name in FEATURES[kind]:
        if base[name] is None:  # categorical protocol_type
            cols.append(rng.integers(0, 3, size=n).astype(float))
            continue
        mean, sd = base[name]
        shift = np.zeros(n)
        if name in sig:
            offset, slope = sig[name]
            shift = offset + slope * intensity
        col = rng.normal(mean + shift, sd)
        col = np.maximum(col, 0.0)
        if name in _UNIT_FEATURES:
            col = np.minimum(col, 1.0)
        cols.append(col)
    return np.column_stack(cols)


def split(ds: Dataset, train_fraction: float, seed: int):
    """Stratified-by-label split into (train, test); disjoint, union = ds."""
    if not (0.0 < train_fraction < 1.0):
        raise DataConfigError("train_fraction must be in (0,1)")
    rng = np.random.default_rng(seed)
    train_idx, test_idx = [], []
    for label in LABELS:
        idx = np.flatnonzero(ds.labels == label)
        if len(idx) == 0:
            continue
        if len(idx) < 2:
            raise StratificationError(f"label {label!r} has fewer than 2 records")
        idx = idx[rng.permutation(len(idx))]
        k = int(round(len(idx) * train_fraction))
        k = min(max(k, 1), len(idx) - 1)
        train_idx.extend(idx[:k])
        test_idx.extend(idx[k:])
    train_idx = np.sort(np.array(train_idx))
    test_idx = np.sort(np.array(test_idx))

    def take(indices):
        return Dataset(
            ds.kind, ds.feature_names, ds.X[indices], ds.labels[indices], ds.intensity[indices]
        )

    return take(train_idx), take(test_idx)
