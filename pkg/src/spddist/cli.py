"""Command-line driver: generate tori clouds, compute one-off distances, run
the benchmark / convergence / learned-weight sweeps, and emit CSV results.

Exit codes: 0 success, 2 configuration error, 3 when more than 10% of
benchmark units fail.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .bench import (
    BenchmarkConfig,
    BenchStats,
    child_seed,
    run_convergence_suite,
    run_learned_benchmark,
    run_tori_benchmark,
    write_results_csv,
)
from .core import MetricWeight, SpdMatrix
from .errors import ConfigError, SpdDistError
from .geodata import PointCloud, TorusParams, diffusion_operator, median_bandwidth, sample_torus
from .learn import LearnConfig, WeightParams
from .metrics import (
    alpha_procrustes_closed,
    bures_wasserstein,
    generalized_bw,
    generalized_log_euclidean,
    gles_distance,
)
from .spectral import top_k_spectrum

MATRIX_METRICS = ("bw", "gbw", "logeu", "alpha")
SPECTRAL_METRICS = ("les", "gles")


def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must be a JSON object")
    return data


def _learn_config(data: dict) -> LearnConfig:
    allowed = {"K", "rho", "learning_rate", "max_epochs", "margin", "seed"}
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(f"unknown learn-config keys: {sorted(unknown)}")
    try:
        return LearnConfig(
            k=int(data["K"]),
            rho=float(data["rho"]),
            learning_rate=float(data["learning_rate"]),
            max_epochs=int(data["max_epochs"]),
            margin=float(data["margin"]),
            seed=int(data.get("seed", 0)),
        )
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"bad learn config: {exc}") from exc


def _write_cloud(cloud: PointCloud, path: Path) -> None:
    params = cloud.params
    radii = params.effective_radii
    minor = ",".join(repr(float(r)) for r in radii[1:])
    header = f"# torus d={params.intrinsic_dim} R={radii[0]!r} r={minor} seed={cloud.seed}"
    with open(path, "w", newline="\n") as fh:
        fh.write(header + "\n")
        for row in cloud.points:
            fh.write(" ".join(f"{v:.17g}" for v in row) + "\n")


def cmd_generate(args) -> int:
    radii = tuple(float(r) for r in args.radii.split(",")) if args.radii else None
    if radii is None:
        radii = (2.0, 0.8) if args.dim == 2 else (2.0, 0.8, 0.4)
    params = TorusParams(intrinsic_dim=args.dim, radii=radii)
    if args.scale != 1.0:
        from .geodata import scale_minor_radius

        params = scale_minor_radius(params, args.scale)
    cloud = sample_torus(params, args.n, args.seed)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    _write_cloud(cloud, out)
    print(f"wrote {cloud.size} points to {out}")
    return 0


def _spectrum_from_cloud_file(path: str, k: int) -> np.ndarray:
    pts = np.loadtxt(path)
    cloud = PointCloud(points=np.atleast_2d(pts), params="external", seed=0)
    op = diffusion_operator(cloud, median_bandwidth(cloud))
    return top_k_spectrum(op.matrix, min(k, cloud.size), "exact")


def cmd_distance(args) -> int:
    if args.metric in MATRIX_METRICS:
        x = SpdMatrix(np.atleast_2d(np.loadtxt(args.a)))
        y = SpdMatrix(np.atleast_2d(np.loadtxt(args.b)))
        if args.weight:
            weight = MetricWeight.full(np.atleast_2d(np.loadtxt(args.weight)), rho=args.rho)
        else:
            weight = MetricWeight.identity(x.dim)
        if args.metric == "bw":
            value = bures_wasserstein(x, y).value
        elif args.metric == "gbw":
            value = generalized_bw(x, y, weight).value
        elif args.metric == "logeu":
            value = generalized_log_euclidean(x, y, weight).value
        else:
            value = alpha_procrustes_closed(x, y, args.alpha, weight).value
    else:
        k = args.k
        sx = _spectrum_from_cloud_file(args.a, k)
        sy = _spectrum_from_cloud_file(args.b, k)
        k = min(k, sx.size, sy.size)
        if args.metric == "les":
            weight = MetricWeight.diagonal(np.zeros(k), 1.0)
        else:
            omega = WeightParams.random_init(k, child_seed(args.seed, 0, 4, 0)).omega
            weight = MetricWeight.diagonal(omega, args.rho)
        value = gles_distance(sx, args.delta, sy, args.gamma, weight, k).value
    print(f"{value!r}")
    return 0


def _bench_config(args) -> BenchmarkConfig:
    data = _load_json(args.config) if args.config else {}
    if args.seed is not None:
        data["seed"] = args.seed
    if args.method is not None:
        data["method"] = args.method
    return BenchmarkConfig.from_mapping(data)


def cmd_bench(args) -> int:
    if args.format != "csv":
        raise ConfigError(f"unsupported format {args.format!r}")
    cfg = _bench_config(args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    stats = BenchStats()
    rows = list(run_tori_benchmark(cfg, stats))
    write_results_csv(rows, out_dir / "results.csv")
    print(f"wrote {len(rows)} rows to {out_dir / 'results.csv'}")
    if stats.failed_units:
        print(
            f"{stats.failed_units}/{stats.total_units} units failed "
            f"(trials {sorted(set(stats.failed_trials))})",
            file=sys.stderr,
        )
    return 3 if stats.failure_rate > 0.10 else 0


def cmd_converge(args) -> int:
    n_grid = [int(v) for v in args.n_grid.split(",")]
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "convergence.csv"
    with open(path, "w", newline="\n") as fh:
        fh.write("n,d_gbw,d_bw\n")
        for n, d_gbw, d_bw in run_convergence_suite(args.dim, n_grid, args.seed):
            fh.write(f"{n},{d_gbw!r},{d_bw!r}\n")
            print(f"n={n} d_gbw={d_gbw:.6e} d_bw={d_bw:.6e}")
    print(f"wrote {path}")
    return 0


def cmd_learn(args) -> int:
    data = _load_json(args.config) if args.config else {}
    if args.seed is not None:
        data["seed"] = args.seed
    data["method"] = "gles_learned"
    cfg = BenchmarkConfig.from_mapping(data)
    learn_cfg = _learn_config(_load_json(args.learn_config))
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    run = run_learned_benchmark(cfg, learn_cfg)
    write_results_csv(run.results, out_dir / "results.csv")
    with open(out_dir / "loss_trace.csv", "w", newline="\n") as fh:
        fh.write("epoch,loss\n")
        for i, v in enumerate(run.loss_trace):
            fh.write(f"{i},{float(v)!r}\n")
    summary = {
        "K": run.k,
        "rho": run.rho,
        "weights": [[i, float(w)] for i, w in enumerate(run.learned.omega)],
        "learned_gap": run.learned_gap,
        "init_gap": run.init_gap,
        "train_trials": list(run.train_trials),
        "eval_trials": list(run.eval_trials),
    }
    with open(out_dir / "learned_weights.json", "w") as fh:
        json.dump(summary, fh, indent=2)
    print(
        f"wrote {len(run.results)} rows; learned gap {run.learned_gap:.6f} "
        f"vs init gap {run.init_gap:.6f}"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spddist",
        description="SPD-matrix distance library benchmark driver",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("generate", help="emit a torus point cloud")
    p_gen.add_argument("--dim", type=int, choices=(2, 3), default=2)
    p_gen.add_argument("--n", type=int, default=200)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--scale", type=float, default=1.0)
    p_gen.add_argument("--radii", type=str, default=None, help="comma list, e.g. 2.0,0.8")
    p_gen.add_argument("--out", type=str, required=True)
    p_gen.set_defaults(func=cmd_generate)

    p_dist = sub.add_parser("distance", help="one pair, one metric, prints the value")
    p_dist.add_argument("--a", required=True, help="matrix file (bw/gbw/logeu/alpha) or cloud file (les/gles)")
    p_dist.add_argument("--b", required=True)
    p_dist.add_argument("--metric", required=True, choices=MATRIX_METRICS + SPECTRAL_METRICS)
    p_dist.add_argument("--alpha", type=float, default=0.5)
    p_dist.add_argument("--rho", type=float, default=100.0)
    p_dist.add_argument("--k", type=int, default=50)
    p_dist.add_argument("--delta", type=float, default=1e-8)
    p_dist.add_argument("--gamma", type=float, default=1e-8)
    p_dist.add_argument("--seed", type=int, default=0)
    p_dist.add_argument("--weight", type=str, default=None, help="dense weight matrix file")
    p_dist.set_defaults(func=cmd_distance)

    p_bench = sub.add_parser("bench", help="run the tori benchmark sweep")
    p_bench.add_argument("--config", type=str, default=None, help="JSON config mirroring BenchmarkConfig fields")
    p_bench.add_argument("--out", type=str, required=True)
    p_bench.add_argument("--seed", type=int, default=None)
    p_bench.add_argument("--method", type=str, default=None, choices=("les", "gles"))
    p_bench.add_argument("--format", type=str, default="csv")
    p_bench.set_defaults(func=cmd_bench)

    p_conv = sub.add_parser("converge", help="perturbation decay of the weighted distances")
    p_conv.add_argument("--dim", type=int, default=5)
    p_conv.add_argument("--n-grid", type=str, default="1,10,100,1000")
    p_conv.add_argument("--seed", type=int, default=0)
    p_conv.add_argument("--out", type=str, required=True)
    p_conv.set_defaults(func=cmd_converge)

    p_learn = sub.add_parser("learn", help="learned-weight benchmark with train/eval split")
    p_learn.add_argument("--config", type=str, default=None)
    p_learn.add_argument("--learn-config", type=str, required=True)
    p_learn.add_argument("--out", type=str, required=True)
    p_learn.add_argument("--seed", type=int, default=None)
    p_learn.add_argument("--method", type=str, default=None, choices=("gles_learned",))
    p_learn.set_defaults(func=cmd_learn)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except SpdDistError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
