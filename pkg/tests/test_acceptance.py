"""Acceptance gate: every criterion runs at its stated tolerance and prints
one pass line (visible under ``pytest -s``).  Criteria touching the figures
frontend live in that package's own test suite."""

import json
import time

import numpy as np
import pytest

from spddist import (
    MetricWeight,
    OmegaConstraintSet,
    alpha_procrustes_closed,
    alpha_procrustes_numeric,
    bures_wasserstein,
    cli,
    gaussian_w2_generalized,
    gbw_objective,
    generalized_bw,
    generalized_log_euclidean,
    gles_distance,
    robust_gbw,
    robust_gbw_gradient,
)
from spddist.bench import BenchmarkConfig, run_convergence_suite, run_learned_benchmark
from spddist.learn import LearnConfig, WeightParams, separation_loss, separation_loss_grad
from spddist.bench import PAIRS
from spddist.metrics import project_to_omega_set
from spddist.spectral import SketchConfig, eigenvalue_error_bound, nystrom_fixed_rank

from conftest import rand_orthogonal, rand_spd, rand_spd_pair
from test_learn import toy_spectra
from test_metrics_oracles import sphere_oracle


def _report(num: int, detail: str) -> None:
    print(f"\n[criterion {num:02d}] PASS - {detail}")


def test_criterion_01_half_alpha_equals_twice_gbw():
    rng = np.random.default_rng(101)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(2, 7))
        x, y = rand_spd_pair(rng, n)
        m = MetricWeight.full(rand_spd(rng, n))
        d_a = alpha_procrustes_closed(x, y, 0.5, m).value
        d_g = generalized_bw(x, y, m).value
        gap = abs(d_a - 2.0 * d_g)
        assert gap <= 1e-9 * (1.0 + d_a)
        worst = max(worst, gap / (1.0 + d_a))
    elapsed = time.perf_counter() - t0
    assert elapsed < 5.0
    _report(1, f"100 pairs dims 2-6, worst rel gap {worst:.2e}, {elapsed:.2f}s")


def test_criterion_02_reductions():
    rng = np.random.default_rng(102)
    worst_bw = worst_les = worst_w2 = 0.0
    for _ in range(100):
        n = int(rng.integers(2, 6))
        x, y = rand_spd_pair(rng, n)
        gap = abs(generalized_bw(x, y, MetricWeight.identity(n)).value - bures_wasserstein(x, y).value)
        assert gap <= 1e-12
        worst_bw = max(worst_bw, gap)

        k = int(rng.integers(2, 8))
        lx = np.sort(rng.uniform(0.1, 1.0, k))[::-1]
        ly = np.sort(rng.uniform(0.1, 1.0, k))[::-1]
        delta = gamma = 1e-8
        ours = gles_distance(lx, delta, ly, gamma, MetricWeight.diagonal(np.zeros(k), 1.0), k).value
        plain = np.sqrt(np.sum((np.log(lx + delta) - np.log(ly + gamma)) ** 2))
        gap = abs(ours - plain)
        assert gap <= 1e-12 * (1.0 + plain)
        worst_les = max(worst_les, gap)

        z = np.zeros(n)
        gap = abs(
            gaussian_w2_generalized(z, x, z, y, MetricWeight.identity(n)).value
            - bures_wasserstein(x, y).value
        )
        assert gap <= 1e-12
        worst_w2 = max(worst_w2, gap)
    _report(2, f"reductions worst gaps: bw {worst_bw:.1e}, les {worst_les:.1e}, w2 {worst_w2:.1e}")


def test_criterion_03_small_alpha_limit_on_commuting_pairs():
    rng = np.random.default_rng(103)
    for _ in range(50):
        n = int(rng.integers(2, 6))
        q = rand_orthogonal(rng, n)

        def spd_from(lam):
            a = q @ np.diag(lam) @ q.T
            return 0.5 * (a + a.T)

        x = spd_from(rng.uniform(0.5, 2.0, n))
        y = spd_from(rng.uniform(0.5, 2.0, n))
        m = MetricWeight.full(spd_from(rng.uniform(0.5, 2.0, n)))
        limit = generalized_log_euclidean(x, y, m).value
        gaps = [
            abs(alpha_procrustes_closed(x, y, a, m).value - limit)
            for a in (1e-1, 1e-2, 1e-3)
        ]
        assert gaps[0] > gaps[1] > gaps[2]
        assert gaps[2] <= 1e-2 * (1.0 + limit)
    _report(3, "50 commuting triples, gap monotone in alpha and small at 1e-3")


def test_criterion_04_closed_form_matches_numeric_oracle():
    rng = np.random.default_rng(104)
    t0 = time.perf_counter()
    worst = 0.0
    cases = [(n, alpha) for n in (2, 3) for alpha in (0.5, 1.0) for _ in range(5)]
    for n, alpha in cases:
        x, y = rand_spd_pair(rng, n)
        m = MetricWeight.full(rand_spd(rng, n))
        closed = alpha_procrustes_closed(x, y, alpha, m).value
        budget = 100_000 if n == 2 else 1_000_000
        numeric = alpha_procrustes_numeric(x, y, alpha, m, budget, seed=int(rng.integers(1 << 30))).value
        rel = abs(closed - numeric) / (1.0 + closed)
        assert rel <= 1e-4
        worst = max(worst, rel)
    elapsed = time.perf_counter() - t0
    assert elapsed < 120.0
    _report(4, f"20 instances n in {{2,3}}, worst rel gap {worst:.2e}, {elapsed:.1f}s")


def test_criterion_05_robust_gbw():
    rng = np.random.default_rng(105)
    # (a) full budget pins omega to the identity
    for _ in range(5):
        x, y = rand_spd_pair(rng, 4)
        sol = robust_gbw(x, y, OmegaConstraintSet(dim=4, budget=4))
        d2 = bures_wasserstein(x, y).value ** 2
        assert abs(sol.distance_sq - d2) <= 1e-10 * (1.0 + d2)
    # (b) dominance over random feasible points
    for _ in range(5):
        x, y = rand_spd_pair(rng, 4)
        c = OmegaConstraintSet(dim=4, budget=2)
        sol = robust_gbw(x, y, c)
        for _ in range(10):
            s = rng.standard_normal((4, 4))
            omega = project_to_omega_set(0.5 * (s + s.T), c).entries
            assert gbw_objective(x, y, omega) <= sol.distance_sq + 1e-8
    # (c) analytic ascent gradient against central differences
    for _ in range(5):
        x, y = rand_spd_pair(rng, 3)
        lam = rng.uniform(0.2, 0.8, 3)
        lam = lam / lam.sum() * 1.5
        qmat = rand_orthogonal(rng, 3)
        omega = qmat @ np.diag(lam) @ qmat.T
        omega = 0.5 * (omega + omega.T)
        g = robust_gbw_gradient(x, y, omega)
        h = 1e-5
        num = np.zeros((3, 3))
        for i in range(3):
            for j in range(3):
                e = np.zeros((3, 3))
                e[i, j] = e[j, i] = 1.0
                num[i, j] = (gbw_objective(x, y, omega + h * e) - gbw_objective(x, y, omega - h * e)) / (2 * h)
        ana = np.where(np.eye(3, dtype=bool), g, g + g.T)
        assert np.abs(ana - num).max() <= 1e-4 * max(1.0, np.abs(num).max())
    # (d) rank-one budget against the sphere-sampling oracle
    worst = 0.0
    for _ in range(10):
        x, y = rand_spd_pair(rng, 3)
        sol = robust_gbw(x, y, OmegaConstraintSet(dim=3, budget=1))
        oracle = sphere_oracle(x, y, 1_000_000, rng)
        rel = abs(sol.distance_sq - oracle) / max(oracle, 1e-12)
        assert rel <= 1e-3
        worst = max(worst, rel)
    _report(5, f"k=n exact, dominance, gradient, k=1 oracle worst rel {worst:.2e}")


def test_criterion_06_nystrom_certificate():
    rng = np.random.default_rng(106)
    t0 = time.perf_counter()
    margins = []
    for n, k, m in ((50, 10, 20), (100, 20, 45)):
        q = rand_orthogonal(rng, n)
        lam = 0.9 ** np.arange(n)
        a = q @ np.diag(lam) @ q.T
        a = 0.5 * (a + a.T)
        weights = MetricWeight.diagonal(np.ones(k), rho=0.0)
        errs = []
        for seed in range(50):
            est = nystrom_fixed_rank(a, SketchConfig(m, k, seed)).eigenvalues()
            errs.append(np.abs(lam[:k] - est).sum())
        bound = eigenvalue_error_bound(lam[k:], k, m, weights)
        assert np.mean(errs) <= bound
        margins.append(np.mean(errs) / bound)
    elapsed = time.perf_counter() - t0
    assert elapsed < 30.0
    _report(6, f"mean weighted error within bound, ratios {margins[0]:.3f}/{margins[1]:.3f}, {elapsed:.1f}s")


def test_criterion_07_tori_benchmark_trends():
    from spddist.bench import run_tori_benchmark

    t0 = time.perf_counter()
    cfg = BenchmarkConfig.from_mapping(
        {
            "N": 200,
            "K": 50,
            "c_grid": (1.0, 0.8, 0.6, 0.4, 0.2),
            "rho_grid": (1e2,),
            "trials": 10,
            "seed": 1107,
            "method": "gles",
        }
    )
    rows = list(run_tori_benchmark(cfg))
    means = {}
    for row in rows:
        means.setdefault((row.pair, row.c), []).append(row.distance)
    means = {k: float(np.mean(v)) for k, v in means.items()}
    for pair in ("T2-T2Sc", "T3-T3Sc", "T3-T2Sc"):
        curve = [means[(pair, c)] for c in cfg.c_grid]
        assert all(a < b for a, b in zip(curve, curve[1:])), (pair, curve)
    at_smallest = {pair: means[(pair, 0.2)] for pair, _, _ in PAIRS}
    assert at_smallest["T2-T3Sc"] == min(at_smallest.values())
    elapsed = time.perf_counter() - t0
    assert elapsed < 600.0
    _report(
        7,
        "three pairs strictly increase as c shrinks; T2-T3Sc smallest at c=0.2 "
        f"({at_smallest['T2-T3Sc']:.4f} vs next {sorted(at_smallest.values())[1]:.4f}), {elapsed:.1f}s",
    )


def test_criterion_08_perturbation_convergence():
    for seed in range(5):
        rows = list(run_convergence_suite(5, [1, 10, 100, 1000], seed=2000 + seed))
        gbw = [r[1] for r in rows]
        bw = [r[2] for r in rows]
        assert all(a > b for a, b in zip(gbw, gbw[1:]))
        assert all(a > b for a, b in zip(bw, bw[1:]))
        assert gbw[-1] <= 1e-2 * gbw[0]
    _report(8, "5 draws dim 5: strictly decreasing, value(1000) <= 1e-2 * value(1)")


def test_criterion_09_learned_weights():
    rng = np.random.default_rng(109)
    # analytic gradient of the training loss against central differences
    spectra = toy_spectra(rng, 10, n_per_tag=3)
    w = WeightParams.random_init(10, seed=9)
    ana = separation_loss_grad(w, 2.0, spectra, 0.5)
    h = 1e-6
    num = np.zeros(10)
    for i in range(10):
        e = np.zeros(10)
        e[i] = h
        num[i] = (
            separation_loss(WeightParams(w.raw + e), 2.0, spectra, 0.5)
            - separation_loss(WeightParams(w.raw - e), 2.0, spectra, 0.5)
        ) / (2 * h)
    assert np.abs(ana - num).max() <= 1e-4 * max(1.0, np.abs(num).max())

    cfg = BenchmarkConfig.from_mapping(
        {
            "N": 200,
            "K": 50,
            "c_grid": (0.2,),
            "rho_grid": (1e2,),
            "trials": 20,
            "seed": 1109,
            "method": "gles_learned",
        }
    )
    learn_cfg = LearnConfig(k=50, rho=1e2, learning_rate=1e3, max_epochs=300, margin=1.0, seed=9)
    run = run_learned_benchmark(cfg, learn_cfg)
    assert np.all(np.diff(run.loss_trace) <= 1e-12)
    assert run.learned_gap >= run.init_gap
    _report(
        9,
        f"gradient ok; loss {run.loss_trace[0]:.4f}->{run.loss_trace[-1]:.4f} nonincreasing; "
        f"eval gap {run.learned_gap:.4f} >= init {run.init_gap:.4f} "
        f"({len(run.eval_trials)} eval trials)",
    )


def test_criterion_10_csv_determinism(tmp_path):
    cfg = {
        "N": 120,
        "K": 30,
        "c_grid": [1.0, 0.6, 0.2],
        "rho_grid": [1e2],
        "trials": 3,
        "seed": 42,
        "method": "gles",
    }
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    outputs = []
    for name in ("run1", "run2"):
        out = tmp_path / name
        assert cli.main(["bench", "--config", str(cfg_path), "--out", str(out)]) == 0
        outputs.append((out / "results.csv").read_bytes().decode())

    def strip_timing(text):
        return "\n".join(",".join(line.split(",")[:-1]) for line in text.splitlines())

    assert strip_timing(outputs[0]) == strip_timing(outputs[1])
    assert outputs[0].splitlines()[0] == "trial,c,rho,pair,method,N,K,distance,wall_time_ms"
    _report(10, "bench twice with identical config+seed: byte-identical CSV minus timing")
