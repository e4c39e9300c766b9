"""Desk-scale benchmark pipeline: tori point clouds -> diffusion operators ->
top-K spectra -> log-spectral distances, swept over the tube-radius scale c
and the regularizer rho, with reproducible seeded CSV output.

Seed derivation: every cloud draws from child = hash64(master, trial,
dataset_index, scale_index), a blake2b-based mixing that is documented,
platform-stable, and immune to execution order.  Dataset indices: T2=0,
T2Sc=1, T3=2, T3Sc=3; index 4 seeds the per-trial random weight init, 5 the
learned-weight init, and 6 tags each trial for the train/eval parity split.
"""

from __future__ import annotations

import hashlib
import struct
import time
from dataclasses import dataclass, field

import numpy as np

from .core import MetricWeight, SpdMatrix, sym
from .errors import ConfigError, SpdDistError
from .geodata import (
    TorusParams,
    diffusion_operator,
    median_bandwidth,
    sample_torus,
    scale_minor_radius,
)
from .learn import LabeledSpectrum, LearnConfig, WeightParams, learn_weights
from .metrics import bures_wasserstein, generalized_bw, gles_distance
from .spectral import SketchConfig, top_k_spectrum

__all__ = [
    "PAIRS",
    "DATASETS",
    "BenchmarkConfig",
    "TrialResult",
    "BenchStats",
    "LearnedBenchmarkRun",
    "child_seed",
    "run_tori_benchmark",
    "run_convergence_suite",
    "run_learned_benchmark",
    "write_results_csv",
    "format_rows",
    "CSV_HEADER",
]

T2_BASE = TorusParams(intrinsic_dim=2, radii=(2.0, 0.8))
T3_BASE = TorusParams(intrinsic_dim=3, radii=(2.0, 0.8, 0.4))

DATASETS = ("T2", "T2Sc", "T3", "T3Sc")
PAIRS = (
    ("T2-T2Sc", "T2", "T2Sc"),
    ("T3-T3Sc", "T3", "T3Sc"),
    ("T3-T2Sc", "T3", "T2Sc"),
    ("T2-T3Sc", "T2", "T3Sc"),
)

_WEIGHT_INIT_IDX = 4
_LEARN_INIT_IDX = 5
_TRIAL_TAG_IDX = 6

EXACT_EIG_MAX_N = 500

CSV_HEADER = "trial,c,rho,pair,method,N,K,distance,wall_time_ms"


def child_seed(master: int, trial: int, dataset: int, scale_idx: int) -> int:
    """Stable 64-bit child seed from (master, trial, dataset, scale_idx)."""
    payload = struct.pack("<4Q", master & (2**64 - 1), trial, dataset, scale_idx)
    digest = hashlib.blake2b(payload, digest_size=8).digest()
    return int.from_bytes(digest, "little")


@dataclass(frozen=True)
class BenchmarkConfig:
    """Benchmark knobs; field names are exactly the config-file keys."""

    N: int = 200
    K: int = 50
    c_grid: tuple = (1.0, 0.8, 0.6, 0.4, 0.2)
    rho_grid: tuple = (1e1, 1e2, 1e3, 1e4)
    delta: float = 1e-8
    gamma: float = 1e-8
    trials: int = 10
    seed: int = 0
    method: str = "gles"
    nystrom: SketchConfig | None = None

    def __post_init__(self):
        object.__setattr__(self, "c_grid", tuple(float(c) for c in self.c_grid))
        object.__setattr__(self, "rho_grid", tuple(float(r) for r in self.rho_grid))
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not 1 <= self.K <= self.N:
            raise ConfigError(f"need 1 <= K <= N, got K={self.K}, N={self.N}")
        if any(not 0.0 < c <= 1.0 for c in self.c_grid):
            raise ConfigError(f"c_grid values must lie in (0, 1]: {self.c_grid}")
        if self.method not in ("les", "gles", "gles_learned"):
            raise ConfigError(f"unknown method {self.method!r}")

    @classmethod
    def from_mapping(cls, data: dict) -> "BenchmarkConfig":
        allowed = {
            "N", "K", "c_grid", "rho_grid", "delta", "gamma",
            "trials", "seed", "method", "nystrom",
        }
        unknown = set(data) - allowed
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kwargs = dict(data)
        sketch = kwargs.get("nystrom")
        if sketch is not None and not isinstance(sketch, SketchConfig):
            try:
                kwargs["nystrom"] = SketchConfig(**sketch)
            except (TypeError, SpdDistError, ValueError) as exc:
                raise ConfigError(f"bad nystrom sketch config: {exc}") from exc
        try:
            return cls(**kwargs)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc


@dataclass(frozen=True)
class TrialResult:
    trial: int
    c: float
    rho: float
    pair: str
    method: str
    N: int
    K: int
    distance: float
    wall_time_ms: int


@dataclass
class BenchStats:
    total_units: int = 0
    failed_units: int = 0
    failed_trials: list = field(default_factory=list)

    @property
    def failure_rate(self) -> float:
        return self.failed_units / self.total_units if self.total_units else 0.0


@dataclass(frozen=True, eq=False)
class LearnedBenchmarkRun:
    results: list
    loss_trace: np.ndarray
    learned: WeightParams
    init: WeightParams
    learned_gap: float
    init_gap: float
    train_trials: tuple
    eval_trials: tuple
    rho: float
    k: int


def _dataset_params(c: float) -> dict:
    return {
        "T2": T2_BASE,
        "T2Sc": scale_minor_radius(T2_BASE, c),
        "T3": T3_BASE,
        "T3Sc": scale_minor_radius(T3_BASE, c),
    }


def _spectra_for(cfg: BenchmarkConfig, trial: int, scale_idx: int, c: float) -> dict:
    """Top-K spectra of the four datasets' diffusion operators for one trial."""
    params = _dataset_params(c)
    out = {}
    for d_idx, tag in enumerate(DATASETS):
        seed = child_seed(cfg.seed, trial, d_idx, scale_idx)
        cloud = sample_torus(params[tag], cfg.N, seed)
        op = diffusion_operator(cloud, median_bandwidth(cloud))
        if cfg.nystrom is not None:
            sketch = SketchConfig(
                num_random_vectors=cfg.nystrom.num_random_vectors,
                rank=cfg.nystrom.rank,
                seed=seed,
            )
            out[tag] = top_k_spectrum(op.matrix, cfg.K, "nystrom", sketch)
        elif cfg.N > EXACT_EIG_MAX_N:
            sketch = SketchConfig(
                num_random_vectors=min(2 * cfg.K + 10, cfg.N),
                rank=cfg.K,
                seed=seed,
            )
            out[tag] = top_k_spectrum(op.matrix, cfg.K, "nystrom", sketch)
        else:
            out[tag] = top_k_spectrum(op.matrix, cfg.K, "exact")
    return out


def _method_weight(cfg: BenchmarkConfig, trial: int, rho: float) -> MetricWeight:
    if cfg.method == "les":
        # unit-weight baseline: omega = 0, rho = 1 gives weights exactly 1
        return MetricWeight.diagonal(np.zeros(cfg.K), 1.0)
    seed = child_seed(cfg.seed, trial, _WEIGHT_INIT_IDX, 0)
    omega = WeightParams.random_init(cfg.K, seed).omega
    return MetricWeight.diagonal(omega, rho)


def run_tori_benchmark(cfg: BenchmarkConfig, stats: BenchStats | None = None):
    """Yield TrialResult rows in deterministic (trial, c, rho, pair) order.

    Each trial x c x rho unit is isolated: a module error records the unit as
    failed and the sweep continues.  Callers inspect ``stats`` for the
    failure rate (the CLI exits nonzero above 10%).
    """
    if cfg.method == "gles_learned":
        raise ConfigError("gles_learned runs through run_learned_benchmark")
    if stats is None:
        stats = BenchStats()
    for trial in range(cfg.trials):
        for scale_idx, c in enumerate(cfg.c_grid):
            try:
                spectra = _spectra_for(cfg, trial, scale_idx, c)
            except SpdDistError:
                stats.total_units += len(cfg.rho_grid)
                stats.failed_units += len(cfg.rho_grid)
                stats.failed_trials.append(trial)
                continue
            for rho in cfg.rho_grid:
                stats.total_units += 1
                t0 = time.perf_counter()
                try:
                    weight = _method_weight(cfg, trial, rho)
                    dists = {
                        pair: gles_distance(
                            spectra[a], cfg.delta, spectra[b], cfg.gamma, weight, cfg.K
                        ).value
                        for pair, a, b in PAIRS
                    }
                except SpdDistError:
                    stats.failed_units += 1
                    stats.failed_trials.append(trial)
                    continue
                wall_ms = int((time.perf_counter() - t0) * 1000)
                for pair, _, _ in PAIRS:
                    yield TrialResult(
                        trial=trial,
                        c=c,
                        rho=rho,
                        pair=pair,
                        method=cfg.method,
                        N=cfg.N,
                        K=cfg.K,
                        distance=dists[pair],
                        wall_time_ms=wall_ms,
                    )


def _rand_spd(rng, dim: int, lo: float = 0.5, hi: float = 2.0) -> np.ndarray:
    q, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
    return sym(q @ np.diag(rng.uniform(lo, hi, dim)) @ q.T)


def run_convergence_suite(dim: int, n_grid, seed: int, c_mat=None, p_mat=None, m_mat=None):
    """Distances from C + P/n to C for fixed random SPD C, PSD P, SPD M:
    yields (n, d_GBW, d_BW) which both shrink to zero as n grows.

    The matrices draw from the seed unless supplied explicitly.
    """
    if dim < 2:
        raise ConfigError(f"dim must be >= 2, got {dim}")
    rng = np.random.Generator(np.random.Philox(seed))
    c_mat = _rand_spd(rng, dim) if c_mat is None else np.asarray(c_mat, dtype=np.float64)
    p_mat = _rand_spd(rng, dim, lo=0.2, hi=1.0) if p_mat is None else np.asarray(p_mat, dtype=np.float64)
    m_mat = _rand_spd(rng, dim) if m_mat is None else np.asarray(m_mat, dtype=np.float64)
    weight = MetricWeight.full(SpdMatrix(m_mat))
    base = SpdMatrix(c_mat)
    for n in n_grid:
        shifted = SpdMatrix(sym(c_mat + p_mat / float(n)), validate=False)
        d_gbw = generalized_bw(shifted, base, weight).value
        d_bw = bures_wasserstein(shifted, base).value
        yield int(n), d_gbw, d_bw


def _split_by_seed_parity(cfg: BenchmarkConfig) -> tuple[tuple, tuple]:
    train, evals = [], []
    for trial in range(cfg.trials):
        tag = child_seed(cfg.seed, trial, _TRIAL_TAG_IDX, 0)
        (train if tag % 2 == 0 else evals).append(trial)
    # a one-sided split gets its lowest-index trial reassigned
    if not train:
        train.append(evals.pop(0))
    if not evals:
        evals.append(train.pop(0))
    return tuple(train), tuple(evals)


def _gap(spectra_by_trial, trials, weight: MetricWeight, cfg: BenchmarkConfig, k: int) -> float:
    """Mean d(T2, T2Sc) minus mean d(T2, T3Sc) at the smallest scale."""
    sep, close = [], []
    for trial in trials:
        spectra = spectra_by_trial[trial]
        sep.append(
            gles_distance(spectra["T2"], cfg.delta, spectra["T2Sc"], cfg.gamma, weight, k).value
        )
        close.append(
            gles_distance(spectra["T2"], cfg.delta, spectra["T3Sc"], cfg.gamma, weight, k).value
        )
    return float(np.mean(sep) - np.mean(close))


def run_learned_benchmark(cfg: BenchmarkConfig, learn_cfg: LearnConfig) -> LearnedBenchmarkRun:
    """Train diagonal weights on the train split and evaluate on the eval
    split.

    Trials split into train/eval by the parity of their tag seed; weights are
    learned on the train trials' spectra at the smallest c (where the close
    and separating taxonomies are sharpest) and evaluated on the eval trials
    across the full c grid.  The returned run carries both the learned-weight
    and init-weight separation gaps at the smallest c.
    """
    if cfg.method != "gles_learned":
        raise ConfigError("run_learned_benchmark requires method == 'gles_learned'")
    if learn_cfg.k != cfg.K:
        raise ConfigError(f"learn K={learn_cfg.k} != benchmark K={cfg.K}")
    train_trials, eval_trials = _split_by_seed_parity(cfg)
    c_min = min(cfg.c_grid)
    c_min_idx = cfg.c_grid.index(c_min)

    spectra_train = {
        t: _spectra_for(cfg, t, c_min_idx, c_min) for t in train_trials
    }
    labeled = [
        LabeledSpectrum(eigenvalues=spec, shift=cfg.delta, tag=tag)
        for t in train_trials
        for tag, spec in spectra_train[t].items()
    ]
    init = WeightParams.random_init(cfg.K, child_seed(cfg.seed, 0, _LEARN_INIT_IDX, 0))
    learned, loss_trace = learn_weights(learn_cfg, labeled, init=init)

    learned_weight = MetricWeight.diagonal(learned.omega, learn_cfg.rho)
    init_weight = MetricWeight.diagonal(init.omega, learn_cfg.rho)

    results = []
    spectra_eval_min = {}
    for trial in eval_trials:
        for scale_idx, c in enumerate(cfg.c_grid):
            t0 = time.perf_counter()
            spectra = _spectra_for(cfg, trial, scale_idx, c)
            if scale_idx == c_min_idx:
                spectra_eval_min[trial] = spectra
            wall_ms = int((time.perf_counter() - t0) * 1000)
            for pair, a, b in PAIRS:
                d = gles_distance(
                    spectra[a], cfg.delta, spectra[b], cfg.gamma, learned_weight, cfg.K
                ).value
                results.append(
                    TrialResult(
                        trial=trial,
                        c=c,
                        rho=learn_cfg.rho,
                        pair=pair,
                        method="gles_learned",
                        N=cfg.N,
                        K=cfg.K,
                        distance=d,
                        wall_time_ms=wall_ms,
                    )
                )
    learned_gap = _gap(spectra_eval_min, eval_trials, learned_weight, cfg, cfg.K)
    init_gap = _gap(spectra_eval_min, eval_trials, init_weight, cfg, cfg.K)
    return LearnedBenchmarkRun(
        results=results,
        loss_trace=loss_trace,
        learned=learned,
        init=init,
        learned_gap=learned_gap,
        init_gap=init_gap,
        train_trials=train_trials,
        eval_trials=eval_trials,
        rho=learn_cfg.rho,
        k=cfg.K,
    )


def format_rows(rows) -> str:
    """Canonical CSV body: '.' decimals via shortest round-trip float repr,
    LF endings; byte-stable for identical inputs."""
    lines = [CSV_HEADER]
    for r in rows:
        lines.append(
            f"{r.trial},{float(r.c)!r},{float(r.rho)!r},{r.pair},{r.method},"
            f"{r.N},{r.K},{float(r.distance)!r},{r.wall_time_ms}"
        )
    return "\n".join(lines) + "\n"


def write_results_csv(rows, path) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(format_rows(rows))
