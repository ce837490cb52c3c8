"""Command-line pipeline: gen-data, train, sweep, interpolate, regress, report.

Every command resolves its configuration (flags, then an optional
--config JSON file whose values override flags, with LM_SEED supplying
the default seed), writes a run manifest capturing the resolved
configuration and SHA-256 hashes of all input files, and writes outputs
atomically (temp file + rename).

Exit codes: 0 success, 1 usage, 2 I/O or format, 3 numerical failure,
4 checkpoint/dataset incompatibility.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import analysis, plots
from .dataset import (
    Dataset,
    DatasetFormatError,
    SplitSpec,
    generate_synthetic_dataset,
    load_dataset,
    save_dataset,
    split_dataset,
)
from .homogenize import HomogenizationError, MaterialModel
from .latent import (
    SWEEP_DISTANCES,
    SWEEP_LENGTHS,
    cluster_latent,
    decode_transition,
    encode_cell,
    interpolate_linear,
    mesh_interpolate,
    parse_sweep_csv,
    run_sweep,
    select_cluster_pair,
    sweep_records_to_csv,
)
from .metrics import geometric_smoothness, stiffness_continuity, transition_stiffness
from .vae import ModelCheckpoint, TrainConfig, TrainingDivergedError, build_model, train

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_NUMERIC = 3
EXIT_INCOMPAT = 4


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    """argparse with usage failures mapped to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise CliError(f"{self.prog}: error: {message}", EXIT_USAGE)


# ---------------------------------------------------------------------------
# small helpers
# ---------------------------------------------------------------------------

def _atomic_write(path: Path, data) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, mode) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _default_seed() -> int:
    env = os.environ.get("LM_SEED")
    return int(env) if env else 0


def _apply_config_file(args: argparse.Namespace) -> None:
    """Values from --config <json> override the parsed flags."""
    if not getattr(args, "config", None):
        return
    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            overrides = json.load(fh)
    except OSError as exc:
        raise CliError(f"cannot read config file: {exc}", EXIT_IO)
    except json.JSONDecodeError as exc:
        raise CliError(f"malformed config file: {exc}", EXIT_IO)
    if not isinstance(overrides, dict):
        raise CliError("config file must hold a JSON object", EXIT_IO)
    for key, value in overrides.items():
        dest = key.replace("-", "_")
        if not hasattr(args, dest):
            raise CliError(f"config file sets unknown option {key!r}", EXIT_USAGE)
        setattr(args, dest, value)


def _write_manifest(directory: Path, command: str, args: argparse.Namespace, inputs) -> None:
    config = {
        k: v for k, v in sorted(vars(args).items()) if k not in ("func", "config") and v is not None
    }
    config = {k: (str(v) if isinstance(v, Path) else v) for k, v in config.items()}
    manifest = {
        "command": command,
        "config": config,
        "inputs": {str(p): f"sha256:{_sha256(p)}" for p in inputs},
    }
    _atomic_write(Path(directory) / f"{command}-manifest.json",
                  json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _load_checkpoint(path) -> ModelCheckpoint:
    try:
        return ModelCheckpoint.load(path)
    except FileNotFoundError as exc:
        raise CliError(f"checkpoint not found: {exc}", EXIT_IO)
    except Exception as exc:
        raise CliError(f"cannot load checkpoint {path}: {exc}", EXIT_IO)


def _load_data(path) -> Dataset:
    try:
        return load_dataset(path)
    except FileNotFoundError as exc:
        raise CliError(f"dataset not found: {exc}", EXIT_IO)
    except DatasetFormatError as exc:
        raise CliError(f"bad dataset file {path}: {exc}", EXIT_IO)


# ---------------------------------------------------------------------------
# gen-data
# ---------------------------------------------------------------------------

def _parse_weights(text: str | None):
    if not text:
        return None
    weights = {}
    for part in text.split(","):
        if "=" not in part:
            raise CliError(f"bad --weights entry {part!r}; expected family=value", EXIT_USAGE)
        name, value = part.split("=", 1)
        weights[name.strip()] = float(value)
    return weights


def cmd_gen_data(args) -> int:
    if args.count < 1:
        raise CliError("usage: --count must be a positive integer", EXIT_USAGE)
    material = MaterialModel(e0=args.e0, nu=args.nu, emin=args.emin)
    ds = generate_synthetic_dataset(
        args.count, args.seed, _parse_weights(args.weights), material, verbose=args.progress
    )
    try:
        save_dataset(ds, args.out)
    except OSError as exc:
        raise CliError(f"cannot write {args.out}: {exc}", EXIT_IO)
    _write_manifest(Path(args.out).parent, "gen-data", args, [])

    vf = ds.pixels().mean(axis=(1, 2))
    hist, edges = np.histogram(vf, bins=np.arange(0.0, 1.05, 0.1))
    n_unique = len({r.cell.tobytes() for r in ds.records})
    print(f"wrote {len(ds)} records to {args.out}")
    print("volume-fraction histogram:")
    for h, lo in zip(hist, edges[:-1]):
        if h:
            print(f"  [{lo:.1f},{lo + 0.1:.1f}): {h}")
    print(f"duplicate rate: {100.0 * (len(ds) - n_unique) / len(ds):.2f}%")
    return EXIT_OK


# ---------------------------------------------------------------------------
# train
# ---------------------------------------------------------------------------

def cmd_train(args) -> int:
    ds = _load_data(args.data)
    config = TrainConfig(
        batch_size=args.batch_size,
        learning_rate=args.lr,
        max_epochs=args.max_epochs,
        patience_epochs=args.patience,
        beta=args.beta,
        latent_dim=args.latent_dim,
        split=SplitSpec(args.train_fraction, args.split_seed),
        seed=args.seed,
    )
    train_ds, test_ds = split_dataset(ds, config.split)
    model = build_model(args.arch, config)
    try:
        ckpt = train(model, train_ds, test_ds, config,
                     dataset_hash=_sha256(args.data), verbose=args.progress)
    except TrainingDivergedError as exc:
        raise CliError(str(exc), EXIT_NUMERIC)

    try:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        ckpt.save(args.out)
    except OSError as exc:
        raise CliError(f"cannot write {args.out}: {exc}", EXIT_IO)

    stem = Path(args.out)
    hist = ckpt.history
    rows = ["epoch,train_total,train_mse,train_kl,test_total,test_mse,test_kl,test_r2"]
    for h in hist:
        rows.append(
            f"{h['epoch']},{h['train_total']:.6f},{h['train_mse']:.6f},{h['train_kl']:.6f},"
            f"{h['test_total']:.6f},{h['test_mse']:.6f},{h['test_kl']:.6f},{h['test_r2']:.6f}"
        )
    _atomic_write(stem.with_suffix(".history.csv"), "\n".join(rows) + "\n")
    epochs = [h["epoch"] for h in hist]
    svg = plots.svg_lines(
        {
            "train loss": (epochs, [h["train_total"] for h in hist]),
            "test loss": (epochs, [h["test_total"] for h in hist]),
            "test R^2": (epochs, [h["test_r2"] for h in hist]),
        },
        f"{args.arch} VAE training",
        "epoch",
        "loss / R^2",
    )
    _atomic_write(stem.with_suffix(".history.svg"), svg)
    _write_manifest(stem.parent, "train", args, [args.data])

    best = min(h["test_total"] for h in hist)
    final_r2 = hist[-1]["test_r2"]
    best_r2 = max(h["test_r2"] for h in hist)
    print(f"trained {args.arch} VAE for {len(hist)} epochs "
          f"(best test loss {best:.6f}, best test R^2 {best_r2:.4f}, final {final_r2:.4f})")
    print(f"checkpoint: {args.out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------

def _run_sweep_outputs(ckpt: ModelCheckpoint, args, outdir: Path) -> Path:
    try:
        records = run_sweep(
            ckpt,
            distances=args.distances,
            lengths=args.lengths,
            directions_per_config=args.directions,
            seed=args.seed,
            verbose=args.progress,
        )
    except ValueError as exc:
        raise CliError(str(exc), EXIT_USAGE)
    except HomogenizationError as exc:
        raise CliError(str(exc), EXIT_NUMERIC)

    arch = ckpt.architecture
    csv_path = outdir / f"sweep-{arch}.csv"
    _atomic_write(csv_path, sweep_records_to_csv(records))

    for field_name, pretty, fname in (
        ("c_s", "geometric smoothness (%)", f"smoothness-vs-distance-{arch}.svg"),
        ("c_k", "stiffness continuity (%)", f"continuity-vs-distance-{arch}.svg"),
    ):
        series = {}
        for n in sorted({r.length for r in records}):
            pts = [r for r in records if r.length == n]
            series[f"length {n}"] = (
                [r.distance_std for r in pts],
                [getattr(r, field_name) for r in pts],
            )
        svg = plots.svg_scatter(
            series, f"{arch} VAE: {pretty} vs latent distance", "latent distance (std devs)", pretty
        )
        _atomic_write(outdir / fname, svg)
    return csv_path


def cmd_sweep(args) -> int:
    ckpt = _load_checkpoint(args.ckpt)
    if args.data:
        file_hash = _sha256(args.data)
        if file_hash != ckpt.dataset_hash:
            raise CliError(
                f"dataset {args.data} (sha256 {file_hash[:12]}...) does not match the "
                f"checkpoint's training dataset ({ckpt.dataset_hash[:12]}...)",
                EXIT_INCOMPAT,
            )
    outdir = Path(args.out_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    csv_path = _run_sweep_outputs(ckpt, args, outdir)
    _write_manifest(outdir, "sweep", args, [args.ckpt] + ([args.data] if args.data else []))
    n = len(args.distances) * len(args.lengths) * args.directions
    print(f"wrote {n} sweep records to {csv_path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# interpolate
# ---------------------------------------------------------------------------

def _resolve_endpoint_latents(ckpt: ModelCheckpoint, args) -> np.ndarray:
    modes = sum(bool(x) for x in (args.ids, args.latents_file, args.intra_cluster, args.inter_cluster))
    if modes != 1:
        raise CliError(
            "give endpoints exactly one way: --ids, --latents-file, "
            "--intra-cluster or --inter-cluster",
            EXIT_USAGE,
        )
    n_pts = 4 if args.mesh else 2
    if args.latents_file:
        try:
            with open(args.latents_file, "r", encoding="utf-8") as fh:
                z = np.asarray(json.load(fh), dtype=np.float64)
        except OSError as exc:
            raise CliError(f"cannot read latents file: {exc}", EXIT_IO)
        except (json.JSONDecodeError, ValueError) as exc:
            raise CliError(f"malformed latents file: {exc}", EXIT_IO)
        if z.shape != (n_pts, ckpt.config.latent_dim):
            raise CliError(
                f"latents file must hold {n_pts} vectors of dimension "
                f"{ckpt.config.latent_dim}, got shape {z.shape}",
                EXIT_USAGE,
            )
        return z

    if args.ids:
        if len(args.ids) != n_pts:
            raise CliError(f"--ids needs exactly {n_pts} dataset ids here", EXIT_USAGE)
        if not args.data:
            raise CliError("--ids requires --data", EXIT_USAGE)
        ds = _load_data(args.data)
        for i in args.ids:
            if not 0 <= i < len(ds):
                raise CliError(f"unknown dataset id {i} (dataset has {len(ds)} records)", EXIT_USAGE)
        return np.stack(
            [encode_cell(ckpt, ds.records[i].cell, ds.records[i].stiffness
                         if ckpt.architecture == "hybrid" else None) for i in args.ids]
        )

    if not args.data:
        raise CliError("cluster sampling requires --data", EXIT_USAGE)
    ds = _load_data(args.data)
    train_ds, _ = split_dataset(ds, SplitSpec(seed=args.seed))
    clusters = cluster_latent(ckpt, train_ds, k=args.clusters, seed=args.seed)
    rng = np.random.default_rng(args.seed)
    mus = ckpt.encode_mu(train_ds.pixels(), train_ds.stiffness_array())
    pts = []
    for _ in range(n_pts // 2):
        i, j = select_cluster_pair(clusters.labels, rng, intra=bool(args.intra_cluster))
        pts += [mus[i], mus[j]]
    return np.stack(pts)


def cmd_interpolate(args) -> int:
    ckpt = _load_checkpoint(args.ckpt)
    if args.length < 2:
        raise CliError("usage: --length must be at least 2", EXIT_USAGE)
    outdir = Path(args.out_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    z = _resolve_endpoint_latents(ckpt, args)

    if args.mesh:
        cells, _ = mesh_interpolate(ckpt, z, args.rows, args.cols)
        plots.write_pgm(outdir / "mesh.pgm", plots.cells_to_mosaic(cells))
        _atomic_write(outdir / "mesh.svg",
                      plots.svg_cell_mosaic(cells, f"{args.rows}x{args.cols} mesh interpolation"))
        _write_manifest(outdir, "interpolate", args,
                        [args.ckpt] + ([args.data] if args.data else []))
        print(f"wrote {args.rows}x{args.cols} mesh to {outdir}")
        return EXIT_OK

    latents = interpolate_linear(z[0], z[1], args.length)
    region = decode_transition(ckpt, latents)
    try:
        tensors = transition_stiffness(region, ckpt.material)
    except HomogenizationError as exc:
        raise CliError(str(exc), EXIT_NUMERIC)
    c_s = geometric_smoothness(region.cells).c_s if args.length >= 4 else float("nan")
    c_k = stiffness_continuity(tensors, ckpt.stiffness_stats).c_k

    plots.write_pgm(outdir / "transition.pgm", plots.cells_to_strip(region.cells))
    caption = f"{ckpt.architecture} VAE transition: C_s {c_s:.2f}%  C_K {c_k:.2f}%"
    _atomic_write(
        outdir / "transition.svg",
        plots.svg_cell_strip(region.cells, labels=list(range(args.length)), caption=caption),
    )
    rows = ["cell," + ",".join(f"c{i}{j}" for i in (1, 2, 3) for j in (1, 2, 3))]
    for idx, t in enumerate(tensors):
        rows.append(f"{idx}," + ",".join(f"{v:.8e}" for v in np.asarray(t).ravel()))
    _atomic_write(outdir / "transition.csv", "\n".join(rows) + "\n")
    _atomic_write(
        outdir / "metrics.json",
        json.dumps(
            {
                "c_s_percent": None if np.isnan(c_s) else c_s,
                "c_k_percent": c_k,
                "length": args.length,
            },
            sort_keys=True,
        ) + "\n",
    )
    _write_manifest(outdir, "interpolate", args, [args.ckpt] + ([args.data] if args.data else []))
    print(f"transition of {args.length} cells: C_s = {c_s:.2f}%  C_K = {c_k:.2f}%")
    return EXIT_OK


# ---------------------------------------------------------------------------
# regress
# ---------------------------------------------------------------------------

def _aggregate_records(records):
    """Collapse sweep records to per-(distance, length) means."""
    from .latent import SweepRecord

    out = []
    keys = sorted({(r.distance_std, r.length) for r in records})
    for d, n in keys:
        grp = [r for r in records if (r.distance_std, r.length) == (d, n)]
        out.append(
            SweepRecord(
                model=grp[0].model,
                distance_std=d,
                length=n,
                direction_seed=-1,
                c_s=float(np.mean([r.c_s for r in grp])),
                c_k=float(np.mean([r.c_k for r in grp])),
            )
        )
    return out


def _fit_sweep_csv(path, aggregate: bool, alpha: float):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            records = parse_sweep_csv(fh.read())
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}", EXIT_IO)
    except ValueError as exc:
        raise CliError(f"malformed sweep CSV {path}: {exc}", EXIT_IO)
    if aggregate:
        records = _aggregate_records(records)
    model = records[0].model
    results = {}
    for response in ("c_s", "c_k"):
        design = analysis.RegressionDesign.from_records(records, response)
        try:
            results[response] = analysis.ols_fit(design)
        except analysis.SingularDesignError as exc:
            raise CliError(f"{path}: {exc}", EXIT_NUMERIC)
    return model, results


def cmd_regress(args) -> int:
    outdir = Path(args.out_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    fits = [(_fit_sweep_csv(p, args.aggregate, args.alpha), p) for p in args.sweep_csv]

    lines = []
    for (model, results), path in fits:
        for response, pretty in (("c_s", "geometric smoothness"), ("c_k", "stiffness continuity")):
            res = results[response]
            table = analysis.significance_table(res, args.alpha,
                                                title=f"{model} VAE / {pretty} ({path})")
            lines += [table, ""]
            _atomic_write(outdir / f"regression-{model}-{response}.csv",
                          analysis.regression_csv(res, args.alpha))

    if len(fits) == 2:
        (m_a, res_a), _ = fits[0]
        (m_b, res_b), _ = fits[1]
        coef_a = abs(res_a["c_k"].coefficient("distance"))
        coef_b = abs(res_b["c_k"].coefficient("distance"))
        better = m_a if coef_a < coef_b else m_b
        lines.append(
            f"stiffness-continuity distance coefficient: |{m_a}| = {coef_a:.4f}, "
            f"|{m_b}| = {coef_b:.4f} -> smaller for the {better} model"
        )
    report = "\n".join(lines) + "\n"
    _atomic_write(outdir / "regression-report.txt", report)
    _write_manifest(outdir, "regress", args, list(args.sweep_csv))
    print(report, end="")
    return EXIT_OK


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------

def cmd_report(args) -> int:
    outdir = Path(args.out_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    csv_paths = []
    for path in (args.geometry_ckpt, args.hybrid_ckpt):
        ckpt = _load_checkpoint(path)
        csv_paths.append(_run_sweep_outputs(ckpt, args, outdir))

    regress_args = argparse.Namespace(
        sweep_csv=[str(p) for p in csv_paths],
        out_dir=str(outdir),
        aggregate=args.aggregate,
        alpha=args.alpha,
        config=None,
    )
    cmd_regress(regress_args)
    _write_manifest(outdir, "report", args, [args.geometry_ckpt, args.hybrid_ckpt])
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _add_common(p: _Parser):
    p.add_argument("--config", help="JSON file whose values override any flag")
    p.add_argument("--seed", type=int, default=None,
                   help="global seed (default: LM_SEED env var or 0)")
    p.add_argument("--progress", action="store_true", help="print progress")


def _add_sweep_params(p: _Parser):
    p.add_argument("--distances", type=float, nargs="+", default=list(SWEEP_DISTANCES))
    p.add_argument("--lengths", type=int, nargs="+", default=list(SWEEP_LENGTHS))
    p.add_argument("--directions", type=int, default=20,
                   help="random sign directions per (distance, length)")


def build_parser() -> _Parser:
    parser = _Parser(prog="latmorph", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="generate and homogenize a synthetic dataset")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--weights", help="family weights, e.g. frame=1,ring=2")
    p.add_argument("--e0", type=float, default=1.0)
    p.add_argument("--nu", type=float, default=0.3)
    p.add_argument("--emin", type=float, default=1e-6)
    _add_common(p)
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("train", help="train a geometry or hybrid VAE")
    p.add_argument("--arch", choices=("geometry", "hybrid"), required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--max-epochs", type=int, default=200)
    p.add_argument("--patience", type=int, default=10)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--latent-dim", type=int, default=16)
    p.add_argument("--train-fraction", type=float, default=0.85)
    p.add_argument("--split-seed", type=int, default=0)
    _add_common(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("sweep", help="run the standard-deviation sweep")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--data", help="optional dataset file checked against the checkpoint hash")
    _add_sweep_params(p)
    _add_common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("interpolate", help="build one transition region or mesh")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--data", help="dataset file (for --ids and cluster sampling)")
    p.add_argument("--ids", type=int, nargs="+", help="dataset ids of the endpoints")
    p.add_argument("--latents-file", help="JSON file with explicit latent endpoints")
    p.add_argument("--intra-cluster", action="store_true",
                   help="sample endpoints from one latent cluster")
    p.add_argument("--inter-cluster", action="store_true",
                   help="sample endpoints from different latent clusters")
    p.add_argument("--clusters", type=int, default=4)
    p.add_argument("--length", type=int, default=10)
    p.add_argument("--mesh", action="store_true", help="bilinear mesh between 4 corners")
    p.add_argument("--rows", type=int, default=5)
    p.add_argument("--cols", type=int, default=5)
    _add_common(p)
    p.set_defaults(func=cmd_interpolate)

    p = sub.add_parser("regress", help="OLS tables from one or two sweep CSVs")
    p.add_argument("--sweep-csv", nargs="+", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--aggregate", action="store_true",
                   help="fit per-configuration means instead of per-interpolation rows")
    p.add_argument("--alpha", type=float, default=0.05)
    _add_common(p)
    p.set_defaults(func=cmd_regress)

    p = sub.add_parser("report", help="sweep + regress for both checkpoints")
    p.add_argument("--geometry-ckpt", required=True)
    p.add_argument("--hybrid-ckpt", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--aggregate", action="store_true")
    p.add_argument("--alpha", type=float, default=0.05)
    _add_sweep_params(p)
    _add_common(p)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _apply_config_file(args)
        if getattr(args, "seed", None) is None:
            args.seed = _default_seed()
        return args.func(args)
    except CliError as exc:
        print(exc, file=sys.stderr)
        return exc.code
    except DatasetFormatError as exc:
        print(f"format error: {exc}", file=sys.stderr)
        return EXIT_IO
    except TrainingDivergedError as exc:
        print(exc, file=sys.stderr)
        return EXIT_NUMERIC
    except HomogenizationError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
