"""Acceptance gate: one test per external guarantee of the toolkit.

Every test here restates a promise from the package documentation at its
stated tolerance, against an independent oracle where one exists. Each
prints a single [ACCEPTANCE] line on success so a verbose run doubles as
a checklist. Wall-clock budgets are asserted where the guarantee has one.
"""

import json
import math
import time

import numpy as np
import scipy.sparse as sp
from click.testing import CliRunner
from fastapi.testclient import TestClient

from categoriza.calibration import couple, fit_sigmoid, smoothed_targets
from categoriza.cli import main as cli_main
from categoriza.evaluate import pearson, per_class_rates, top_k_accuracy
from categoriza.persist import load_model, save_model, serialize_model
from categoriza.service import create_app
from categoriza.svm import TrainConfig, solve_dual
from categoriza.textprep import build_vocabulary, normalize
from categoriza.vectorize import build_idf, vectorize_tokens

from conftest import THEMES
from oracles import dense_tfidf, platt_objective, platt_oracle, qp_hinge_objective
from synthcorpus import make_corpus, write_jsonl


def announce(name):
    print(f"[ACCEPTANCE] {name}: PASS")


def test_tfidf_matches_dense_oracle():
    rng = np.random.default_rng(424242)
    pool = [f"w{i:02d}" for i in range(12)]
    start = time.perf_counter()
    for _ in range(1000):
        n_docs = int(rng.integers(1, 9))
        # empty documents allowed, an entirely empty corpus is not
        lengths = [int(rng.integers(1, 11))] + [
            int(rng.integers(0, 11)) for _ in range(n_docs - 1)
        ]
        docs = [
            [pool[int(i)] for i in rng.integers(0, len(pool), length)]
            for length in lengths
        ]
        vocab = build_vocabulary(docs)
        idf = build_idf(vocab, n_docs)
        words, dense = dense_tfidf(docs)
        assert list(vocab.words) == words
        for j, doc in enumerate(docs):
            vec = vectorize_tokens(doc, vocab, idf)
            row = np.zeros(len(words))
            row[vec.indices] = vec.weights
            np.testing.assert_allclose(row, dense[j], rtol=0.0, atol=1e-12)
    elapsed = time.perf_counter() - start
    assert elapsed < 10.0, f"took {elapsed:.1f}s, budget 10s"
    announce("tf-idf equals dense oracle within 1e-12 on 1000 corpora")


def test_unit_norm_invariant(theme_docs, theme_model):
    checked = 0
    for doc in theme_docs:
        vec = vectorize_tokens(
            normalize(doc.text), theme_model.vocabulary, theme_model.idf
        )
        if len(vec):
            checked += 1
            norm = math.sqrt(float(np.dot(vec.weights, vec.weights)))
            assert abs(norm - 1.0) <= 1e-9

    synth = make_corpus(n_classes=10, docs_per_class=60, seed=31)
    tokens = [normalize(d.text) for d in synth]
    vocab = build_vocabulary(tokens)
    idf = build_idf(vocab, len(tokens))
    for toks in tokens:
        vec = vectorize_tokens(toks, vocab, idf)
        if len(vec):
            checked += 1
            norm = math.sqrt(float(np.dot(vec.weights, vec.weights)))
            assert abs(norm - 1.0) <= 1e-9
    assert checked >= 600
    announce(f"unit norm 1 +/- 1e-9 on {checked} non-empty vectors")


def separable_instance(rng, n, d, margin=0.5):
    direction = rng.normal(size=d)
    direction /= np.linalg.norm(direction)
    X = rng.normal(size=(n, d))
    y = np.sign(X @ direction)
    y[y == 0] = 1.0
    X += margin * y[:, None] * direction
    return X, y


def test_svm_solver_matches_qp_oracle():
    rng = np.random.default_rng(99)
    C = 1.0
    start = time.perf_counter()
    for _ in range(100):
        n = int(rng.integers(8, 61))
        d = int(rng.integers(2, 11))
        X, y = separable_instance(rng, n, d)
        if len(set(y.tolist())) < 2:
            X, y = separable_instance(rng, max(n, 12), d)
        sol = solve_dual(sp.csr_matrix(X), y, TrainConfig(C=C))
        margins = y * (X @ sol.weights + sol.bias)
        assert np.all(margins > 0.0), "training error must be zero"
        assert sol.alpha.min() >= 0.0 and sol.alpha.max() <= C
        primal = 0.5 * (float(sol.weights @ sol.weights) + sol.bias**2) + C * float(
            np.maximum(0.0, 1.0 - margins).sum()
        )
        oracle = qp_hinge_objective(X, y, C)
        assert abs(primal - oracle) <= 1e-4 * max(1e-12, abs(oracle))
    elapsed = time.perf_counter() - start
    assert elapsed < 60.0, f"took {elapsed:.1f}s, budget 60s"
    announce("svm objective within 1e-4 of convex-QP oracle on 100 instances")


def test_platt_fit_matches_grid_newton_oracle():
    rng = np.random.default_rng(2718)
    for _ in range(100):
        n = int(rng.integers(6, 61))
        labels = np.where(rng.random(n) < rng.uniform(0.25, 0.75), 1, -1)
        labels[0], labels[1] = 1, -1
        sigma = rng.uniform(0.3, 3.0)
        delta = rng.uniform(0.0, 2.5)
        scores = rng.normal(0.0, sigma, n) + delta * (labels > 0)
        params = fit_sigmoid(zip(scores.tolist(), labels.tolist()))
        targets = smoothed_targets(labels)
        fitted_val = platt_objective(params.A, params.B, scores, targets)
        _, _, oracle_val = platt_oracle(scores, labels)
        assert abs(fitted_val - oracle_val) <= 1e-8

    for seed in range(5):
        r2 = np.random.default_rng(seed)
        s = r2.uniform(0.5, 3.0, 20)
        scores = np.concatenate([s, -s])
        labels = np.concatenate([np.ones(20, dtype=int), -np.ones(20, dtype=int)])
        params = fit_sigmoid(zip(scores.tolist(), labels.tolist()))
        assert abs(params.B) < 1e-6
    announce("sigmoid log-likelihood within 1e-8 of grid+newton oracle, |B|<1e-6 symmetric")


def test_pairwise_coupling_recovers_known_distribution():
    rng = np.random.default_rng(1234)
    for _ in range(100):
        k = int(rng.integers(2, 9))
        p_true = rng.uniform(0.05, 1.0, k)
        p_true /= p_true.sum()
        r = np.full((k, k), 0.5)
        for i in range(k):
            for j in range(k):
                if i != j:
                    r[i, j] = p_true[i] / (p_true[i] + p_true[j])
        p_hat, objectives = couple(r, return_objectives=True)
        assert float(np.max(np.abs(p_hat - p_true))) <= 1e-6
        assert abs(float(p_hat.sum()) - 1.0) <= 1e-9
        assert float(p_hat.min()) >= -1e-9
        diffs = np.diff(objectives)
        assert np.all(diffs <= 1e-14 * max(1.0, objectives[0]))
    announce("coupling recovers known p within 1e-6 on 100 random instances")


def test_end_to_end_synthetic_corpus(tmp_path):
    start = time.perf_counter()
    docs = make_corpus(n_classes=20, docs_per_class=500, seed=2024)
    data = tmp_path / "synth.jsonl"
    write_jsonl(docs, data)
    model_path = tmp_path / "model.bin"
    runner = CliRunner()
    result = runner.invoke(
        cli_main, ["train", str(data), "-o", str(model_path), "--seed", "5"]
    )
    assert result.exit_code == 0, result.output + repr(result.exception)
    out_dir = tmp_path / "reports"
    result = runner.invoke(
        cli_main,
        ["evaluate", str(model_path), str(data), "--out-dir", str(out_dir), "--k", "5"],
    )
    assert result.exit_code == 0, result.output + repr(result.exception)
    report = json.loads((out_dir / "report.json").read_text())
    accs = [report["top_k_accuracy"][str(k)] for k in range(1, 6)]

    for lower, higher in zip(accs, accs[1:]):
        assert higher > lower, f"accuracy not strictly increasing: {accs}"
    majority_baseline = 500 / 10000
    assert accs[0] >= 5 * majority_baseline
    # absolute floors frozen after a one-time run of the full pipeline on
    # this exact seeded corpus (measured top-1 0.9740, top-3 0.9953)
    assert accs[0] >= 0.95
    assert accs[2] >= 0.98
    elapsed = time.perf_counter() - start
    assert elapsed < 300.0, f"took {elapsed:.1f}s, budget 300s"
    announce(
        f"end-to-end 20x500 corpus: top-1 {accs[0]:.4f}, top-3 {accs[2]:.4f}, "
        f"strictly monotone k=1..5"
    )


def test_evaluation_metrics_monotone_and_hand_checked():
    rng = np.random.default_rng(55)
    codes = [f"{c:04d}" for c in range(1000, 1010)]
    for _ in range(200):
        n = int(rng.integers(1, 40))
        truths = [codes[int(i)] for i in rng.integers(0, len(codes), n)]
        rankings = [
            [codes[int(i)] for i in rng.permutation(len(codes))] for _ in range(n)
        ]
        accs = [top_k_accuracy(rankings, truths, k) for k in range(1, len(codes) + 1)]
        assert all(b >= a for a, b in zip(accs, accs[1:]))
        assert accs[-1] == 1.0

    # three classes, frequencies 10/20/30, top-1 misses 4/4/3
    rankings, truths = [], []
    expected = [("0001", 10, 4), ("0002", 20, 4), ("0003", 30, 3)]
    for code, freq, missed in expected:
        wrong = "0001" if code != "0001" else "0002"
        for i in range(freq):
            truths.append(code)
            rankings.append([wrong, code] if i < missed else [code, wrong])
    rows = per_class_rates(rankings, truths)
    assert [(r.class_code, r.frequency, r.misclassified) for r in rows] == expected
    for row, rate in zip(rows, (0.4, 0.2, 0.1)):
        assert abs(row.rate - rate) <= 1e-12
    corr = pearson([r.frequency for r in rows], [r.rate for r in rows])
    assert abs(corr - (-math.sqrt(27.0 / 28.0))) <= 1e-12
    announce("metrics monotone on 200 random tables; 3-class fixture exact to 1e-12")


def test_persistence_bitwise_round_trip(theme_model, tmp_path, monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
    path = tmp_path / "model.bin"
    save_model(theme_model, path)
    reloaded = load_model(path)

    rng = np.random.default_rng(8)
    pool = " ".join(THEMES.values()).split() + ["zzz", "qqq", "inexistente"]
    inputs = ["", "   ", "!!!"]
    while len(inputs) < 100:
        count = int(rng.integers(1, 7))
        inputs.append(" ".join(pool[int(i)] for i in rng.integers(0, len(pool), count)))
    for text in inputs:
        original = theme_model.distribution_for_text(text).probs
        restored = reloaded.distribution_for_text(text).probs
        assert original == restored, f"prediction drift for {text!r}"

    other = tmp_path / "again.bin"
    save_model(theme_model, other)
    assert path.read_bytes() == other.read_bytes()
    assert serialize_model(theme_model) == serialize_model(reloaded)
    announce("persistence round-trip bitwise identical on 100 inputs; saves byte-equal")


def test_service_contract(theme_model_file):
    with TestClient(create_app(model_path=theme_model_file)) as client:
        ok = client.post("/v1/classify", json={"description": "cadeira de escritório"})
        assert ok.status_code == 200
        suggestions = ok.json()["suggestions"]
        assert len(suggestions) == 3
        probs = [s["probability"] for s in suggestions]
        assert probs == sorted(probs, reverse=True)

        empty = client.post("/v1/classify", json={"description": "   "})
        assert empty.status_code == 422
        assert empty.json()["code"] == "empty_description"

        oov = client.post("/v1/classify", json={"description": "zzz qq xptofrobnitz"})
        assert oov.status_code == 200
        payload = oov.json()
        assert payload["fallback"] is True
        oov_probs = [s["probability"] for s in payload["suggestions"]]
        assert oov_probs == sorted(oov_probs, reverse=True)
        assert all(0.0 <= p <= 1.0 for p in oov_probs)
        # wire probabilities carry 4 decimals, so each term may round up 5e-5
        assert sum(oov_probs) <= 1.0 + len(oov_probs) * 5e-5
    announce("service: 3 descending suggestions, 422 on empty, fallback on OOV")
