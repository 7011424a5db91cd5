"""End-to-end checks of the package's headline guarantees.

One test per guarantee, each pinned to fixed seeds so reruns are exact.
The replicated studies (d=500 populations, the Wine benchmark) dominate
the runtime; expect a few minutes for the whole module.
"""
import math
import time

import numpy as np
import pytest

import pglmc
from pglmc.cli import cli_main
from pglmc.core import labels_from_scores
from pglmc.streams import ROLE_REPLICATION, child_rng, child_seed

from oracles import gaussian_ccr, max_margin_two_points, pg_solve_batch


def random_instances(seed, count):
    """Small dual programs spanning sizes, dimensions, and box bounds."""
    rng = np.random.default_rng(seed)
    instances = []
    c0_choices = (0.5, 1.0, 10.0)
    while len(instances) < count:
        n = int(rng.integers(2, 7))
        d = int(rng.integers(1, 5))
        x = rng.standard_normal((n, d))
        y = np.where(rng.standard_normal(n) > 0, 1, -1)
        if (y > 0).all() or (y < 0).all():
            continue
        c0 = float(rng.choice(c0_choices))
        data = pglmc.Dataset(x, y)
        m_plus, m_minus = pglmc.class_means(data)
        if not np.any(m_plus - m_minus):
            continue
        instances.append(pglmc.assemble_dual(data, m_plus, m_minus, c0, 2.0))
    return instances


def test_c01_small_instance_duals_match_independent_oracles():
    start = time.monotonic()
    instances = random_instances(20260814, 200)
    reference = pg_solve_batch(
        [p.a_matrix for p in instances],
        [p.tau for p in instances],
        [p.equality_coeffs[1:] for p in instances],
        [p.c0 for p in instances],
    )
    objective_diffs = []
    kkt_residuals = []
    for k, problem in enumerate(instances):
        solution = pglmc.solve_dual(problem, tol=1e-8)
        objective_diffs.append(abs(solution.objective - reference.objective[k]))
        kkt_residuals.append(pglmc.kkt_check(problem, solution).max_residual)
    assert max(objective_diffs) <= 1e-6
    assert max(kkt_residuals) <= 1e-6
    assert time.monotonic() - start < 60.0


def test_c02_separable_geometry_recovers_the_max_margin_rule():
    rng = np.random.default_rng(201)
    for _ in range(50):
        # One opposing pair at distance gap along a random unit direction;
        # every other point sits strictly behind its class's pair point, so
        # the pair slab is the unique hard-margin solution.
        u = rng.standard_normal(2)
        u /= np.linalg.norm(u)
        gap = float(rng.uniform(0.8, 3.0))
        mid = rng.standard_normal(2) * 2.0
        x_plus = mid + 0.5 * gap * u
        x_minus = mid - 0.5 * gap * u
        points = [x_plus, x_minus]
        labels = [1, -1]
        for _ in range(int(rng.integers(2, 6))):
            off = rng.standard_normal(2)
            depth = float(rng.uniform(0.1, 2.0))
            perp = off - (off @ u) * u
            if rng.random() < 0.5:
                points.append(x_plus + depth * gap * u + perp)
                labels.append(1)
            else:
                points.append(x_minus - depth * gap * u + perp)
                labels.append(-1)
        data = pglmc.Dataset(np.array(points), np.array(labels))
        w_ref, _, margin_ref = max_margin_two_points(x_plus, x_minus)
        config = pglmc.TrainConfig(c0=40.0 / gap**2 + 10.0, tol=1e-10)

        svm = pglmc.train_svm(data, config)
        assert pglmc.direction_angle(svm.w, w_ref) <= 1e-4
        assert abs(1.0 / float(np.linalg.norm(svm.w)) - margin_ref) <= 1e-5

        frozen = pglmc.train_pglmc(data, config, freeze_population=True)
        assert float(np.max(np.abs(frozen.alpha - svm.alpha))) <= 1e-10
        assert float(np.max(np.abs(frozen.w - svm.w))) <= 1e-10
        assert abs(frozen.b - svm.b) <= 1e-10


def test_c03_optimal_rule_hits_the_theoretical_rate():
    spec = pglmc.SimSpec(
        setting="independent", d=500, n_plus=200, n_minus=50, seed=301
    )
    bayes = pglmc.bayes_reference(spec)
    test = pglmc.generate_test(spec, 2000)
    predictions = labels_from_scores(test.features @ bayes.w_bayes + bayes.b_bayes)
    rate = pglmc.ccr(predictions, test.labels)
    assert abs(rate - gaussian_ccr(2.7)) <= 0.02


def test_c04_population_guidance_tracks_or_beats_the_svm():
    means = {}
    for d in (100, 500):
        spec = pglmc.SimSpec(
            setting="independent", d=d, n_plus=200, n_minus=50, seed=1401
        )
        plan = pglmc.CVPlan(replications=10, base_seed=1401)
        results = pglmc.run_sim_experiment(
            spec,
            plan,
            [pglmc.Method.PGLMC, pglmc.Method.SVM],
            test_per_class=2000,
            max_workers=4,
        )
        for result in results:
            assert result.failures == ()
            agg = pglmc.aggregate(result.per_replication)
            means[(d, result.method)] = {
                key: agg[key].mean for key in ("ccr", "mwe", "angle_deg")
            }
    for d in (100, 500):
        pg = means[(d, pglmc.Method.PGLMC)]
        svm = means[(d, pglmc.Method.SVM)]
        assert pg["mwe"] <= svm["mwe"] + 0.005
    assert (
        means[(100, pglmc.Method.PGLMC)]["angle_deg"]
        <= means[(100, pglmc.Method.SVM)]["angle_deg"] + 2.0
    )
    gap_100 = abs(
        means[(100, pglmc.Method.PGLMC)]["ccr"]
        - means[(100, pglmc.Method.SVM)]["ccr"]
    )
    gap_500 = abs(
        means[(500, pglmc.Method.PGLMC)]["ccr"]
        - means[(500, pglmc.Method.SVM)]["ccr"]
    )
    assert gap_500 < gap_100


def test_c05_block_generator_matches_its_covariance_model():
    spec = pglmc.SimSpec(
        setting="block", d=50, n_plus=25000, n_minus=25000, seed=501
    )
    test = pglmc.generate_test(spec, 25000)
    mu = pglmc.mean_vector(spec)
    centered = test.features.copy()
    centered[:25000] -= mu
    centered[25000:] += mu
    empirical = centered.T @ centered / centered.shape[0]
    off_diag = empirical[~np.eye(50, dtype=bool)]
    assert abs(float(off_diag.mean()) - 0.8) <= 0.01
    assert abs(float(np.diag(empirical).mean()) - 1.0) <= 0.01

    bayes = pglmc.bayes_reference(spec)
    assert abs(bayes.mahalanobis - 2.7) <= 1e-10
    sigma = np.full((50, 50), 0.8) + 0.2 * np.eye(50)
    dense = math.sqrt(float((2 * mu) @ np.linalg.inv(sigma) @ (2 * mu)))
    assert abs(dense - 2.7) <= 1e-10


def test_c06_intercepts_stay_bounded_under_class_imbalance():
    config = pglmc.TrainConfig(c0=1.0)
    intercepts = []
    for n_minus in (50, 500, 5000):
        for s in range(2):
            spec = pglmc.SimSpec(
                setting="independent",
                d=200,
                n_plus=10,
                n_minus=n_minus,
                seed=child_seed(601, n_minus, s),
            )
            train, _ = pglmc.generate(spec)
            intercepts.append(pglmc.train_pglmc(train, config).b)
    assert max(intercepts) - min(intercepts) <= 2.0
    assert max(abs(b) for b in intercepts) <= 5.0


def test_c07_margin_piling_separates_the_two_rules():
    svm_config = pglmc.TrainConfig(c0=10.0)
    pg_config = pglmc.TrainConfig(c0=10.0, c_const=4.0)
    wins = 0
    for r in range(10):
        spec = pglmc.SimSpec(
            setting="independent",
            d=500,
            n_plus=200,
            n_minus=50,
            seed=child_seed(701, ROLE_REPLICATION, r),
        )
        train, _ = pglmc.generate(spec)
        svm_piling = pglmc.margin_piling_fraction(
            pglmc.train_svm(train, svm_config), train
        )
        pg_piling = pglmc.margin_piling_fraction(
            pglmc.train_pglmc(train, pg_config), train
        )
        wins += svm_piling > pg_piling
    assert wins >= 8


def test_c08_wine_benchmark_reaches_reference_accuracy():
    from sklearn.datasets import load_wine

    wine = load_wine()
    features = wine.data.astype(float)
    raw_labels = [str(int(t)) for t in wine.target]
    plan = pglmc.CVPlan(
        outer_folds=5, inner_folds=5, replications=10, base_seed=801
    )
    summaries = {}
    for method in (pglmc.Method.PGLMC, pglmc.Method.SVM):
        result = pglmc.one_vs_rest_runs(
            features, raw_labels, plan, method, standardize=True, max_workers=4
        )
        assert result.failures == ()
        summaries[method] = pglmc.aggregate(result.per_replication)
    assert summaries[pglmc.Method.PGLMC]["ccr"].mean >= 0.968
    assert summaries[pglmc.Method.PGLMC]["mwe"].mean <= 0.035
    assert summaries[pglmc.Method.SVM]["ccr"].mean >= 0.955


def test_c09_decision_signs_follow_the_posterior():
    # Two atoms x = +1 and x = -1; the positive label has probability 0.8
    # at the first and 0.3 at the second, so the best rule scores the
    # first positive and the second negative.
    matches = 0
    for s in range(10):
        rng = child_rng(901, 0, s)
        n_per_atom = 2000
        blocks, labels = [], []
        for atom, eta in ((1.0, 0.8), (-1.0, 0.3)):
            labels.append(np.where(rng.random(n_per_atom) < eta, 1, -1))
            blocks.append(np.full((n_per_atom, 1), atom))
        data = pglmc.Dataset(np.vstack(blocks), np.concatenate(labels))
        model = pglmc.train_pglmc(data)
        score_plus = float(model.w[0] + model.b)
        score_minus = float(-model.w[0] + model.b)
        matches += score_plus > 0 and score_minus < 0
    assert matches == 10


def test_c10_distances_concentrate_as_dimension_grows():
    spec = pglmc.SimSpec(
        setting="independent", d=100, n_plus=20, n_minus=20, seed=1001
    )
    report = pglmc.hdlss_diagnostics(spec, [100, 1000])
    cv_100 = report.per_dim[0].stats.within_cv
    cv_1000 = report.per_dim[1].stats.within_cv
    assert cv_1000 < cv_100
    mean_1000 = report.per_dim[1].stats.within_mean
    assert abs(mean_1000 - math.sqrt(2.0)) / math.sqrt(2.0) < 0.03


def test_c11_cli_reruns_are_byte_identical(tmp_path):
    import json

    plan_path = tmp_path / "plan.json"
    plan_path.write_text(
        json.dumps(
            {
                "schema_version": 1,
                "outer_folds": 2,
                "inner_folds": 2,
                "replications": 2,
                "grid": [{"c0": 1.0}],
            }
        ),
        encoding="utf-8",
    )

    def run_suite(root):
        root.mkdir()
        sim = root / "sim"
        commands = [
            [
                "simulate", "--d", "5", "--n-plus", "6", "--n-minus", "6",
                "--seed", "42", "--out-dir", str(sim),
            ],
            [
                "cv", "--data", str(sim / "train.csv"), "--seed", "43",
                "--plan", str(plan_path), "--out-dir", str(root / "cv"),
            ],
            [
                "sim-exp", "--d", "6", "--n-plus", "8", "--n-minus", "6",
                "--seed", "44", "--methods", "pglmc,bayes",
                "--test-per-class", "20", "--plan", str(plan_path),
                "--out-dir", str(root / "exp"),
            ],
            [
                "diag", "--dims", "5,20", "--n-plus", "6", "--n-minus", "6",
                "--seed", "45", "--out", str(root / "diag.json"),
            ],
        ]
        for argv in commands:
            assert cli_main(argv) == 0

    first = tmp_path / "first"
    second = tmp_path / "second"
    run_suite(first)
    run_suite(second)

    artifacts = sorted(
        p.relative_to(first) for p in first.rglob("*") if p.is_file()
    )
    assert artifacts
    assert any(p.suffix == ".png" for p in artifacts)
    for rel in artifacts:
        assert (first / rel).read_bytes() == (second / rel).read_bytes(), rel
