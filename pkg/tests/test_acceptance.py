"""Exit criteria. Each test prints one PASS/FAIL line (see the terminal summary)."""

import time

import numpy as np
import pytest

from binsoinn import model_store
from binsoinn.binviz import ColorClass, class_to_rgb, classify_byte, render
from binsoinn.features import extract
from binsoinn.hilbert import index_to_point, point_to_index
from binsoinn.model_store import Provenance
from binsoinn.pipeline import Dataset, evaluate, featurize, fit, ingest, sweep, train
from binsoinn.soinn import Soinn, TrainParams
from conftest import palette_histograms, two_gaussians
from oracles import brute_threshold, brute_winners, features_naive, render_naive


@pytest.mark.acceptance(1, "Hilbert bijectivity and unit-step locality, orders 1-6, < 5 s")
def test_hilbert_exhaustive(record_property):
    start = time.perf_counter()
    violations = 0
    for n in range(1, 7):
        side = 1 << n
        seen = set()
        prev = None
        for d in range(4**n):
            p = index_to_point(n, d)
            if p in seen or not (0 <= p[0] < side and 0 <= p[1] < side) or point_to_index(n, *p) != d:
                violations += 1
            seen.add(p)
            if prev is not None and abs(p[0] - prev[0]) + abs(p[1] - prev[1]) != 1:
                violations += 1
            prev = p
        if len(seen) != side * side:
            violations += 1
    elapsed = time.perf_counter() - start
    record_property("violations", violations)
    record_property("seconds", f"{elapsed:.2f}")
    assert violations == 0
    assert elapsed < 5


@pytest.mark.acceptance(2, "byte classes partition 0x00-0xFF with the colour anchors")
def test_byte_partition(record_property):
    expected = {}
    for b in range(256):
        if b == 0x00:
            expected[b] = (ColorClass.NULL, (0, 0, 0))
        elif b == 0xFF:
            expected[b] = (ColorClass.NON_BREAKING, (255, 255, 255))
        elif 0x20 <= b <= 0x7E:
            expected[b] = (ColorClass.PRINTABLE, (0, 0, 255))
        elif b <= 0x1F or b == 0x7F:
            expected[b] = (ColorClass.CONTROL, (0, 255, 0))
        else:
            expected[b] = (ColorClass.EXTENDED, (255, 0, 0))
    got = {b: (classify_byte(b), class_to_rgb(classify_byte(b))) for b in range(256)}
    mismatches = [b for b in range(256) if got[b] != expected[b]]
    record_property("mismatches", len(mismatches))
    assert not mismatches
    assert {c for c, _ in got.values()} == set(ColorClass)


@pytest.mark.acceptance(3, "render/extract equal the naive oracle on 100 random inputs (0-64 KiB)")
def test_render_extract_oracle(record_property):
    rng = np.random.default_rng(2024)
    lengths = [0, 1, 4, 5, 65536] + rng.integers(0, 65537, 95).tolist()
    worst = 0.0
    for n in lengths:
        # biased byte mix so every colour class shows up
        data = rng.choice(256, int(n), p=_byte_mix()).astype(np.uint8).tobytes()
        img = render(data, 256)
        side, rows = render_naive(data, 256)
        assert img.side == side
        assert img.pixels.tolist() == [[list(p) for p in r] for r in rows], f"pixels differ for length {n}"
        fv = extract(img)
        assert fv.values.tolist() == features_naive(side, rows), f"features differ for length {n}"
        assert fv.values.shape == (1024,)
        for s in range(4):
            worst = max(worst, abs(fv.values[s * 256 : (s + 1) * 256].sum() - 1))
    record_property("inputs", len(lengths))
    record_property("max_block_sum_error", f"{worst:.1e}")
    assert worst <= 1e-9


def _byte_mix():
    p = np.ones(256)
    p[0] = 40
    p[255] = 10
    return p / p.sum()


@pytest.mark.acceptance(4, "SOINN structural invariants over 10,000 randomized train steps")
def test_soinn_invariants(record_property):
    steps = 0
    insertions = 0
    for seed in range(20):
        rng = np.random.default_rng(seed)
        dim = int(rng.integers(1, 5))
        params = TrainParams(lambda_=int(rng.integers(5, 60)), age_max=int(rng.integers(1, 15)),
                             isolated_threshold=str(rng.choice(["max", "min"])))
        centers = rng.normal(0, 2, (4, dim))
        a, b = rng.normal(size=dim), rng.normal(size=dim)
        net = Soinn.init(a, b, params)
        inputs = [centers[rng.integers(4)] + rng.normal(0, rng.choice([0.05, 0.5, 3]), dim) for _ in range(500)]
        for u in inputs:
            ids = net.node_ids
            weights = net.weights.copy()
            adj = {i: net.neighbors(i) for i in ids}
            rep = net.train_step(u, "x")
            w, s, d1, d2 = brute_winners(weights, ids, u)
            t1 = brute_threshold(weights, ids, adj, w, params.isolated_threshold)
            t2 = brute_threshold(weights, ids, adj, s, params.isolated_threshold)
            assert (rep.winner, rep.second) == (w, s)
            assert rep.inserted == (d1 > t1 or d2 > t2)
            net.check_invariants()
            live = set(net.node_ids)
            assert all(i in live and j in live for i, j in net.edges)
            assert all(age <= params.age_max for age in net.edges.values())
            steps += 1
            insertions += rep.inserted
        twin = Soinn.init(a, b, params)
        for u in inputs:
            twin.train_step(u, "x")
        assert twin.node_ids == net.node_ids and twin.edges == net.edges
        assert twin.weights.tobytes() == net.weights.tobytes()
    record_property("steps", steps)
    record_property("insertions", insertions)
    assert steps >= 10_000


@pytest.mark.acceptance(5, "two-Gaussian surrogate: held-out accuracy >= 95% (lambda=100, A=50), < 10 s")
def test_two_gaussian_accuracy(record_property):
    start = time.perf_counter()
    X, y = two_gaussians(500, sigma=0.05, sep=1.0, seed=0)
    ds = Dataset(X, y, [""] * len(y))
    res = train(ds, TrainParams(lambda_=100, age_max=50, rng_seed=0), train_frac=0.8, seed=0)
    acc = evaluate(res.net, ds.subset(res.held_out_idx)).overall.accuracy
    elapsed = time.perf_counter() - start
    record_property("accuracy", f"{acc:.4f}")
    record_property("seconds", f"{elapsed:.2f}")
    assert len(res.held_out_idx) == 200
    assert acc >= 0.95
    assert elapsed < 10


@pytest.mark.acceptance(6, "training on 4,000 vectors of dimension 1024 within 60 s")
def test_training_throughput(record_property):
    X, y = palette_histograms(2000, seed=0)
    start = time.perf_counter()
    net = fit(X, y, TrainParams(lambda_=290, age_max=170, rng_seed=0))
    elapsed = time.perf_counter() - start
    record_property("seconds", f"{elapsed:.2f}")
    record_property("nodes", len(net))
    assert X.shape == (4000, 1024)
    assert elapsed <= 60


@pytest.mark.acceptance(7, "micro-corpus trains, saves, reloads, memorizes all 20 files, byte-reproducible")
def test_micro_corpus(record_property, corpus_dir, tmp_path):
    blobs = []
    for run in ("first", "second"):
        samples, skips = ingest(corpus_dir / "benign", corpus_dir / "malicious")
        assert len(samples) == 20 and not skips
        ds, _ = featurize(samples)
        res = train(ds, TrainParams(lambda_=50, age_max=30, rng_seed=7), train_frac=1.0, seed=7)
        path = tmp_path / f"{run}.json"
        model_store.save(res.net, Provenance.current(ds.variant), path)
        net, _ = model_store.load(path, expected_variant=ds.variant)
        wrong = [s.path.name for s, x in zip(samples, ds.X) if net.classify(x).label != s.label]
        assert not wrong, f"misclassified training files: {wrong}"
        blobs.append(path.read_bytes())
    record_property("model_bytes", len(blobs[0]))
    assert blobs[0] == blobs[1]


@pytest.mark.acceptance(8, "3x3 (lambda, A) x 3-trial sweep on the synthetic set, spread < 2 points")
def test_sweep_stability(record_property):
    X, y = two_gaussians(500, sigma=0.05, sep=1.0, seed=1)
    ds = Dataset(X, y, [""] * len(y))
    res = sweep(ds, [50, 100, 200], [25, 50, 100], trials=3, seed=0)
    grid = res.mean_accuracy
    record_property("min", f"{grid.min():.4f}")
    record_property("max", f"{grid.max():.4f}")
    assert grid.shape == (3, 3)
    assert res.accuracy.shape == (3, 3, 3)
    assert res.spread < 0.02
