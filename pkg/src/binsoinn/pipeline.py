"""Corpus ingestion, bulk featurisation, training and evaluation."""

from __future__ import annotations

import logging
import os
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .binviz import file_extension, render
from .features import DEFAULT_VARIANT, FeatureVector, color_frequencies, extract
from .hilbert import DEFAULT_MAX_SIDE
from .soinn import DegenerateInitError, Soinn, TrainParams

log = logging.getLogger(__name__)

BENIGN = "benign"
MALICIOUS = "malicious"
POSITIVE = MALICIOUS


class DegenerateSplitError(ValueError):
    pass


@dataclass(frozen=True)
class Sample:
    path: Path
    label: str
    file_ext: str
    byte_len: int


@dataclass(frozen=True)
class Skip:
    path: Path
    reason: str


@dataclass
class Dataset:
    X: np.ndarray
    labels: list[str]
    exts: list[str]
    paths: list[str] = field(default_factory=list)
    variant: str = DEFAULT_VARIANT
    color_stats: list[dict[str, float]] | None = None

    def __len__(self) -> int:
        return len(self.labels)

    def subset(self, idx: Sequence[int]) -> Dataset:
        idx = list(idx)
        return Dataset(
            self.X[idx],
            [self.labels[i] for i in idx],
            [self.exts[i] for i in idx],
            [self.paths[i] for i in idx] if self.paths else [],
            self.variant,
            [self.color_stats[i] for i in idx] if self.color_stats else None,
        )

    @classmethod
    def from_vectors(cls, vectors: Sequence[FeatureVector], labels: Sequence[str]) -> Dataset:
        variants = {fv.variant for fv in vectors}
        if len(variants) > 1:
            raise ValueError(f"mixed extractor variants in one dataset: {sorted(variants)}")
        X = np.vstack([fv.values for fv in vectors]) if vectors else np.empty((0, 1024))
        return cls(
            X,
            list(labels),
            [fv.source_ext or "" for fv in vectors],
            variant=variants.pop() if variants else DEFAULT_VARIANT,
        )

    def vectors(self) -> list[FeatureVector]:
        return [FeatureVector(x, e or None, self.variant) for x, e in zip(self.X, self.exts)]


def ingest_dirs(dirs: Mapping[str, str | Path]) -> tuple[list[Sample], list[Skip]]:
    """Walk each labelled directory; samples come back sorted by path."""
    samples, skips = [], []
    for label, root in dirs.items():
        root = Path(root)
        if not root.is_dir():
            raise NotADirectoryError(f"{root} is not a directory")
        for dirpath, dirnames, filenames in os.walk(root):
            dirnames.sort()
            for name in filenames:
                p = Path(dirpath) / name
                try:
                    with open(p, "rb"):
                        pass
                    size = p.stat().st_size
                except OSError as exc:
                    skips.append(Skip(p, exc.strerror or str(exc)))
                    continue
                samples.append(Sample(p, label, file_extension(p), size))
    samples.sort(key=lambda s: str(s.path))
    skips.sort(key=lambda s: str(s.path))
    if not samples:
        log.warning("no input files found under %s", ", ".join(str(d) for d in dirs.values()))
    for s in skips:
        log.warning("skipped %s: %s", s.path, s.reason)
    return samples, skips


def ingest(benign_dir: str | Path, malicious_dir: str | Path) -> tuple[list[Sample], list[Skip]]:
    return ingest_dirs({BENIGN: benign_dir, MALICIOUS: malicious_dir})


def _featurize_one(sample: Sample, max_side: int, variant: str, stats: bool):
    img = render(sample.path.read_bytes(), max_side, sample.file_ext)
    return extract(img, variant), (color_frequencies(img) if stats else None)


def featurize(
    samples: Sequence[Sample],
    max_side: int = DEFAULT_MAX_SIDE,
    variant: str = DEFAULT_VARIANT,
    workers: int = 1,
    color_stats: bool = False,
) -> tuple[Dataset, list[Skip]]:
    """Render and extract every sample; output order follows ``samples``."""

    def job(s: Sample):
        try:
            return _featurize_one(s, max_side, variant, color_stats)
        except OSError as exc:
            return Skip(s.path, exc.strerror or str(exc))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(job, samples))
    else:
        results = [job(s) for s in samples]

    vectors, labels, paths, stats, skips = [], [], [], [], []
    for s, res in zip(samples, results):
        if isinstance(res, Skip):
            log.warning("could not featurize %s: %s", res.path, res.reason)
            skips.append(res)
            continue
        vectors.append(res[0])
        stats.append(res[1])
        labels.append(s.label)
        paths.append(str(s.path))
    ds = Dataset.from_vectors(vectors, labels)
    ds.variant = variant
    ds.paths = paths
    ds.color_stats = stats if color_stats else None
    return ds, skips


def stratified_split(labels: Sequence[str], train_frac: float, seed: int) -> tuple[list[int], list[int]]:
    """Per-label seeded split. Training indices come back shuffled, held-out sorted."""
    if not 0 < train_frac <= 1:
        raise ValueError("train fraction must be in (0, 1]")
    rng = np.random.default_rng(seed)
    train, test = [], []
    for label in sorted(set(labels)):
        idx = np.array([i for i, lab in enumerate(labels) if lab == label])
        idx = idx[rng.permutation(len(idx))]
        cut = int(round(train_frac * len(idx)))
        train.extend(idx[:cut].tolist())
        test.extend(idx[cut:].tolist())
    order = rng.permutation(len(train))
    return [train[i] for i in order], sorted(test)


def _pick_initial(X: np.ndarray, rng: np.random.Generator) -> tuple[int, int]:
    i = int(rng.integers(len(X)))
    others = [j for j in range(len(X)) if j != i and not np.array_equal(X[j], X[i])]
    if not others:
        raise DegenerateInitError("all training vectors are identical")
    return i, others[int(rng.integers(len(others)))]


def fit(
    X: np.ndarray,
    labels: Sequence[str | None],
    params: TrainParams,
    init: str = "random",
) -> Soinn:
    """Online training over ``X`` in the given order, then one final denoise.

    ``init="random"`` seeds the two starting nodes from a seeded random pair
    of distinct vectors; ``init="first"`` uses the first two distinct ones.
    """
    if len(X) < 2:
        raise DegenerateSplitError("need at least two training vectors")
    if init == "random":
        a, b = _pick_initial(X, np.random.default_rng(params.rng_seed))
    elif init == "first":
        a = 0
        rest = [j for j in range(1, len(X)) if not np.array_equal(X[j], X[0])]
        if not rest:
            raise DegenerateInitError("all training vectors are identical")
        b = rest[0]
    else:
        raise ValueError(f"unknown init mode {init!r}")
    net = Soinn.init(X[a], X[b], params, labels=(labels[a], labels[b]))
    for x, lab in zip(X, labels):
        net.train_step(x, lab)
    net.denoise()
    return net


@dataclass
class TrainResult:
    net: Soinn
    train_idx: list[int]
    held_out_idx: list[int]


def train(
    dataset: Dataset,
    params: TrainParams,
    train_frac: float = 0.8,
    seed: int = 0,
    init: str = "random",
) -> TrainResult:
    train_idx, test_idx = stratified_split(dataset.labels, train_frac, seed)
    if len(train_idx) < 2:
        raise DegenerateSplitError(
            f"training split holds {len(train_idx)} vectors; need at least 2"
        )
    if len({dataset.labels[i] for i in train_idx}) < 2:
        warnings.warn("training split contains a single label", stacklevel=2)
    net = fit(dataset.X[train_idx], [dataset.labels[i] for i in train_idx], params, init)
    return TrainResult(net, train_idx, test_idx)


def train_per_ext(
    dataset: Dataset, params: TrainParams, train_frac: float = 0.8, seed: int = 0
) -> dict[str, TrainResult]:
    """One network per file extension; held-out indices refer to ``dataset``."""
    out = {}
    for ext in sorted(set(dataset.exts)):
        idx = [i for i, e in enumerate(dataset.exts) if e == ext]
        sub = dataset.subset(idx)
        try:
            res = train(sub, params, train_frac, seed)
        except (DegenerateSplitError, DegenerateInitError) as exc:
            log.warning("no model for extension %r: %s", ext, exc)
            continue
        out[ext] = TrainResult(res.net, [idx[i] for i in res.train_idx], [idx[i] for i in res.held_out_idx])
    return out


@dataclass
class Confusion:
    tp: int = 0
    tn: int = 0
    fp: int = 0
    fn: int = 0

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn

    @property
    def accuracy(self) -> float:
        return (self.tp + self.tn) / self.total if self.total else 0.0

    @property
    def fp_rate(self) -> float:
        d = self.fp + self.tn
        return self.fp / d if d else 0.0

    @property
    def fn_rate(self) -> float:
        d = self.fn + self.tp
        return self.fn / d if d else 0.0

    def add(self, truth: str, predicted: str) -> None:
        if truth == POSITIVE:
            if predicted == POSITIVE:
                self.tp += 1
            else:
                self.fn += 1
        elif predicted == POSITIVE:
            self.fp += 1
        else:
            self.tn += 1

    def as_row(self) -> dict:
        return {
            "tp": self.tp, "tn": self.tn, "fp": self.fp, "fn": self.fn, "total": self.total,
            "accuracy": self.accuracy, "fp_rate": self.fp_rate, "fn_rate": self.fn_rate,
        }


@dataclass
class EvalReport:
    """Confusion counts for ``"all"`` and, optionally, each file extension."""

    groups: dict[str, Confusion]
    meta: dict = field(default_factory=dict)

    @property
    def overall(self) -> Confusion:
        return self.groups["all"]

    @classmethod
    def from_predictions(
        cls,
        truth: Sequence[str],
        predicted: Sequence[str],
        exts: Sequence[str] | None = None,
        group_by_ext: bool = False,
        meta: dict | None = None,
    ) -> EvalReport:
        groups = {"all": Confusion()}
        for i, (t, p) in enumerate(zip(truth, predicted)):
            groups["all"].add(t, p)
            if group_by_ext:
                key = "." + exts[i] if exts[i] else "(none)"
                groups.setdefault(key, Confusion()).add(t, p)
        ordered = {"all": groups.pop("all")}
        ordered.update(sorted(groups.items()))
        return cls(ordered, dict(meta or {}))

    def rows(self) -> list[dict]:
        return [{"group": g, **c.as_row()} for g, c in self.groups.items()]

    def to_dict(self) -> dict:
        return {"groups": self.rows(), "meta": self.meta}


def evaluate(
    net: Soinn,
    held_out: Dataset,
    group_by_ext: bool = False,
    meta: dict | None = None,
) -> EvalReport:
    if len(held_out) == 0:
        raise ValueError("held-out set is empty")
    predicted = [net.classify(x).label for x in held_out.X]
    return EvalReport.from_predictions(held_out.labels, predicted, held_out.exts, group_by_ext, meta)


@dataclass
class SweepResult:
    lambdas: list[int]
    ages: list[int]
    trials: int
    seed: int
    accuracy: np.ndarray  # (len(lambdas), len(ages), trials)
    seconds: np.ndarray  # wall-clock per trial, same shape
    nodes: np.ndarray  # final node count per trial, same shape

    @property
    def mean_accuracy(self) -> np.ndarray:
        return self.accuracy.mean(axis=2)

    @property
    def spread(self) -> float:
        m = self.mean_accuracy
        return float(m.max() - m.min())

    def rows(self) -> list[dict]:
        out = []
        for a, lam in enumerate(self.lambdas):
            for b, age in enumerate(self.ages):
                out.append({
                    "lambda": lam,
                    "age_max": age,
                    "trials": self.trials,
                    "mean_accuracy": float(self.accuracy[a, b].mean()),
                    "std_accuracy": float(self.accuracy[a, b].std()),
                    "mean_seconds": float(self.seconds[a, b].mean()),
                    "mean_nodes": float(self.nodes[a, b].mean()),
                })
        return out


def run_trial(dataset: Dataset, params: TrainParams, seed: int, train_frac: float = 0.8) -> tuple[float, Soinn]:
    """One fresh split + init + train + evaluate; returns held-out accuracy."""
    p = TrainParams(**{**params.__dict__, "rng_seed": seed})
    res = train(dataset, p, train_frac, seed)
    report = evaluate(res.net, dataset.subset(res.held_out_idx))
    return report.overall.accuracy, res.net


def sweep(
    dataset: Dataset,
    lambdas: Sequence[int],
    ages: Sequence[int],
    trials: int,
    seed: int = 0,
    train_frac: float = 0.8,
    base: TrainParams | None = None,
) -> SweepResult:
    """Monte Carlo grid over (lambda, age_max); trial ``t`` uses seed ``seed + t``."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    base = base or TrainParams()
    shape = (len(lambdas), len(ages), trials)
    acc, secs, nodes = np.zeros(shape), np.zeros(shape), np.zeros(shape, dtype=int)
    for a, lam in enumerate(lambdas):
        for b, age in enumerate(ages):
            params = TrainParams(**{**base.__dict__, "lambda_": int(lam), "age_max": int(age)})
            for t in range(trials):
                start = time.perf_counter()
                acc[a, b, t], net = run_trial(dataset, params, seed + t, train_frac)
                secs[a, b, t] = time.perf_counter() - start
                nodes[a, b, t] = len(net)
            log.info("lambda=%d A=%d mean accuracy %.4f", lam, age, acc[a, b].mean())
    return SweepResult(list(lambdas), list(ages), trials, seed, acc, secs, nodes)


@dataclass
class CurveResult:
    sizes: list[int]
    accuracy: np.ndarray  # (len(sizes), trials)
    seconds: np.ndarray


def learning_curve(
    dataset: Dataset,
    sizes: Sequence[int],
    trials: int,
    params: TrainParams,
    seed: int = 0,
    train_frac: float = 0.8,
) -> CurveResult:
    """Held-out accuracy and training time as the corpus grows.

    Each size draws a seeded stratified subsample of the dataset first.
    """
    acc = np.zeros((len(sizes), trials))
    secs = np.zeros_like(acc)
    for a, size in enumerate(sizes):
        for t in range(trials):
            frac = min(1.0, size / len(dataset))
            idx, _ = stratified_split(dataset.labels, frac, seed + 7919 * (t + 1))
            sub = dataset.subset(sorted(idx))
            start = time.perf_counter()
            acc[a, t], _ = run_trial(sub, params, seed + t, train_frac)
            secs[a, t] = time.perf_counter() - start
    return CurveResult(list(sizes), acc, secs)


def mean_color_stats(dataset: Dataset) -> dict[str, dict[str, float]]:
    """Per-label mean colour-class frequency over the dataset's files."""
    if dataset.color_stats is None:
        raise ValueError("dataset was featurized without colour statistics")
    out: dict[str, dict[str, float]] = {}
    for label in sorted(set(dataset.labels)):
        rows = [s for s, lab in zip(dataset.color_stats, dataset.labels) if lab == label]
        out[label] = {k: float(np.mean([r[k] for r in rows])) for k in rows[0]}
    return out
