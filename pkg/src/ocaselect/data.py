"""Block-structured datasets: layout spec, CSV loading, synthetic generation, splitting.

Features are organized as named blocks (groups of related columns, e.g. the
same quantity observed at different lags) plus standalone single variables.
The flattened column order is always: block 1 columns, block 2 columns, ...,
then singles.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd


class DataError(ValueError):
    """Raised for malformed input data or layout specs."""


@dataclass(frozen=True)
class Block:
    name: str
    columns: tuple[str, ...]

    def __post_init__(self):
        if len(self.columns) < 1:
            raise DataError(f"block {self.name!r} must contain at least one column")

    def __len__(self) -> int:
        return len(self.columns)


@dataclass(frozen=True)
class BlockSpec:
    """Feature layout: ordered blocks of columns plus single variables."""

    blocks: tuple[Block, ...]
    singles: tuple[str, ...]

    def __post_init__(self):
        names = [b.name for b in self.blocks]
        cols = [c for b in self.blocks for c in b.columns] + list(self.singles)
        if len(set(names)) != len(names):
            raise DataError("duplicate block names")
        if len(set(cols)) != len(cols):
            dupes = sorted({c for c in cols if cols.count(c) > 1})
            raise DataError(f"column(s) assigned more than once: {dupes}")
        if not cols:
            raise DataError("layout spec contains zero features")

    @classmethod
    def from_lengths(cls, lengths, n_singles: int = 0) -> "BlockSpec":
        """Build a spec with generated names: B1_1..B1_L1, ..., S_1..S_p."""
        blocks = tuple(
            Block(f"B{i + 1}", tuple(f"B{i + 1}_{j + 1}" for j in range(length)))
            for i, length in enumerate(lengths)
        )
        singles = tuple(f"S_{j + 1}" for j in range(n_singles))
        return cls(blocks, singles)

    @classmethod
    def from_json(cls, obj: dict) -> "BlockSpec":
        blocks = tuple(
            Block(b["name"], tuple(b["columns"])) for b in obj.get("blocks", [])
        )
        return cls(blocks, tuple(obj.get("singles", [])))

    @classmethod
    def from_json_file(cls, path) -> "BlockSpec":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))

    def to_json(self) -> dict:
        return {
            "blocks": [{"name": b.name, "columns": list(b.columns)} for b in self.blocks],
            "singles": list(self.singles),
        }

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=2) + "\n", encoding="utf-8")

    # -- layout arithmetic -------------------------------------------------
    @property
    def n_blocks(self) -> int:
        return len(self.blocks)

    @property
    def block_lengths(self) -> tuple[int, ...]:
        return tuple(len(b) for b in self.blocks)

    @property
    def n_singles(self) -> int:
        return len(self.singles)

    @property
    def n_block_features(self) -> int:
        return sum(self.block_lengths)

    @property
    def n_features(self) -> int:
        return self.n_block_features + self.n_singles

    @property
    def feature_names(self) -> tuple[str, ...]:
        return tuple(c for b in self.blocks for c in b.columns) + self.singles

    def block_slices(self) -> list[slice]:
        """Flat index range of each block, in layout order."""
        out, start = [], 0
        for length in self.block_lengths:
            out.append(slice(start, start + length))
            start += length
        return out

    def single_indices(self) -> np.ndarray:
        return np.arange(self.n_block_features, self.n_features)


def _as_readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Dataset:
    """Sample matrix with binary labels and an attached block layout."""

    features: np.ndarray
    labels: np.ndarray
    spec: BlockSpec

    def __post_init__(self):
        X = np.asarray(self.features, dtype=np.float64)
        y = np.asarray(self.labels)
        if X.ndim != 2:
            raise DataError("features must be a 2-D matrix")
        if X.shape[1] != self.spec.n_features:
            raise DataError(
                f"feature matrix has {X.shape[1]} columns, layout spec expects "
                f"{self.spec.n_features}"
            )
        if y.shape != (X.shape[0],):
            raise DataError("labels must be one value per sample row")
        if not np.isfinite(X).all():
            raise DataError("features contain NaN or infinite values")
        uniq = np.unique(y)
        if not np.isin(uniq, (0, 1)).all():
            raise DataError(f"labels must take values in {{0, 1}}, got {uniq.tolist()}")
        object.__setattr__(self, "features", _as_readonly(X))
        object.__setattr__(self, "labels", _as_readonly(y.astype(np.int8)))

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def subset(self, rows: np.ndarray) -> "Dataset":
        return Dataset(self.features[rows], self.labels[rows], self.spec)

    def content_hash(self) -> str:
        h = hashlib.sha256()
        h.update(self.features.tobytes())
        h.update(self.labels.tobytes())
        h.update("|".join(self.spec.feature_names).encode())
        return h.hexdigest()


@dataclass(frozen=True)
class SplitDataset:
    """Seeded holdout split; train/test rows partition the source rows."""

    train: Dataset
    test: Dataset
    seed: int
    train_fraction: float
    train_indices: np.ndarray = field(repr=False, default=None)
    test_indices: np.ndarray = field(repr=False, default=None)


def load_csv(data_path, spec_path) -> Dataset:
    """Load a CSV (header row, one ``label`` column) with a block-spec JSON sidecar.

    Columns are reordered to the spec's flattening order: block 1 first,
    then block 2, ..., then singles.
    """
    spec = BlockSpec.from_json_file(spec_path)
    try:
        frame = pd.read_csv(data_path)
    except Exception as exc:
        raise DataError(f"cannot read CSV {data_path}: {exc}") from exc
    if "label" not in frame.columns:
        raise DataError("CSV must contain a column named 'label'")

    csv_cols = [c for c in frame.columns if c != "label"]
    wanted = list(spec.feature_names)
    missing = [c for c in wanted if c not in csv_cols]
    if missing:
        raise DataError(f"spec references column(s) absent from CSV: {missing}")
    extra = [c for c in csv_cols if c not in set(wanted)]
    if extra:
        raise DataError(f"CSV column(s) not assigned by the spec: {extra}")

    for c in wanted:
        col = pd.to_numeric(frame[c], errors="coerce")
        if col.isna().any():
            bad = int(col.isna().idxmax())
            raise DataError(f"non-numeric or missing value in column {c!r} (row {bad})")
    X = frame[wanted].to_numpy(dtype=np.float64)

    y_raw = pd.to_numeric(frame["label"], errors="coerce")
    if y_raw.isna().any() or not y_raw.isin((0, 1)).all():
        raise DataError("label column must contain only 0 or 1")
    return Dataset(X, y_raw.to_numpy(dtype=np.int8), spec)


def save_csv(ds: Dataset, path) -> None:
    """Write a Dataset back to CSV in flattening order plus a ``label`` column."""
    frame = pd.DataFrame(ds.features, columns=list(ds.spec.feature_names))
    frame["label"] = ds.labels
    frame.to_csv(path, index=False)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def generate_synthetic(
    spec: BlockSpec,
    n_samples: int,
    n_informative_per_block: int,
    noise: float,
    seed: int,
) -> Dataset:
    """Generate a dataset shaped by ``spec`` with planted block structure.

    Within each block the first ``n_informative_per_block`` columns are
    correlated copies of one latent signal (the same quantity at increasing
    lags, so correlation decays with the column index); the remaining block
    columns are distant lags, faintly correlated with the same latent (pure
    noise when the block has no informative columns). All single variables
    carry signal. Labels are a logistic function of a random linear
    combination of the informative columns plus Gaussian noise of scale
    ``noise``, thresholded at its median so classes are balanced.
    """
    if n_samples < 10:
        raise DataError("n_samples must be at least 10")
    if n_informative_per_block < 0:
        raise DataError("n_informative_per_block must be >= 0")
    if spec.n_blocks and n_informative_per_block > min(spec.block_lengths):
        raise DataError(
            "n_informative_per_block exceeds the shortest block length "
            f"({min(spec.block_lengths)})"
        )
    if n_informative_per_block == 0 and spec.n_singles == 0:
        raise DataError("no signal source: zero informative block columns and zero singles")

    rng = np.random.default_rng(seed)
    X = np.empty((n_samples, spec.n_features))
    informative: list[int] = []

    for sl in spec.block_slices():
        latent = rng.standard_normal(n_samples)
        width = sl.stop - sl.start
        for j in range(width):
            col = sl.start + j
            if j < n_informative_per_block:
                # near lags: correlation decays but stays well above noise,
                # so each copy keeps a small private share of the signal
                rho = max(0.92 - 0.07 * j, 0.55)
                informative.append(col)
            elif n_informative_per_block > 0:
                # distant lags: faint echo of the same quantity
                rho = 0.2
            else:
                rho = 0.0
            X[:, col] = rho * latent + np.sqrt(1.0 - rho**2) * rng.standard_normal(n_samples)
    for col in spec.single_indices():
        X[:, col] = rng.standard_normal(n_samples)
        informative.append(int(col))

    # random signs with magnitudes bounded away from zero, so every designated
    # informative column genuinely contributes to the label
    magnitudes = 0.5 + np.abs(rng.standard_normal(len(informative)))
    signs = rng.choice((-1.0, 1.0), size=len(informative))
    weights = signs * magnitudes
    score = X[:, informative] @ weights + noise * rng.standard_normal(n_samples)
    prob = _sigmoid(score)
    y = (prob > np.median(prob)).astype(np.int8)
    return Dataset(X, y, spec)


def split(ds: Dataset, train_fraction: float, seed: int) -> SplitDataset:
    """Seeded uniform shuffle, then contiguous holdout split.

    Both parts must contain both classes; on failure the shuffle is retried
    with an incremented seed up to 100 times before giving up.
    """
    if not 0.0 < train_fraction < 1.0:
        raise DataError("train_fraction must lie strictly between 0 and 1")
    n = ds.n_samples
    n_train = int(round(train_fraction * n))
    if n_train == 0 or n_train == n:
        raise DataError("split would leave one side empty; need more rows")

    for attempt in range(100):
        rng = np.random.default_rng(seed + attempt)
        perm = rng.permutation(n)
        tr, te = perm[:n_train], perm[n_train:]
        y_tr, y_te = ds.labels[tr], ds.labels[te]
        if 0 < y_tr.sum() < len(tr) and 0 < y_te.sum() < len(te):
            return SplitDataset(
                train=ds.subset(tr),
                test=ds.subset(te),
                seed=seed,
                train_fraction=train_fraction,
                train_indices=_as_readonly(tr),
                test_indices=_as_readonly(te),
            )
    raise DataError("could not place both classes on both sides of the split in 100 attempts")
