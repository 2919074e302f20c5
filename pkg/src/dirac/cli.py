"""Command-line entry point.

Subcommands:
  rim        accumulate feature values and gradient magnitudes along unit
             gradients; writes raw tensors, per-slice PGM renderings, and a
             JSON sidecar with argmax locations
  gradcheck  finite-difference and adjoint verification of the backward
             passes
  bench      synthetic rim benchmark over stratified folds; writes metrics
             CSV/JSON, fold assignments, and a dataset manifest

Exit codes: 0 success, 1 check failure, 2 usage or I/O error.  DIRAC_THREADS
caps internal parallelism (the reference path is sequential, so any value is
honored trivially).
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from . import bench as bench_mod
from .errors import DiracError, InvalidArgumentError
from .gradcheck import gradcheck_report
from .imageio import read_pgm, write_pgm
from .kernels import Kernel
from .phantom import DEFAULT_PATCH_DIMS, LesionKind, LesionSpec, generate_lesion
from .rim import RimConfig, rim_transform, rim_transform_volume
from .tensors import FeatureMap, read_tensor, write_tensor

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2

GRADCHECK_TOLERANCE = 1e-4
ADJOINT_TOLERANCE = 1e-12


def _load_input(path: str) -> FeatureMap:
    if not os.path.exists(path):
        raise FileNotFoundError(f"input file not found: {path}")
    if path.endswith(".pgm"):
        return read_pgm(path)
    return read_tensor(path)


def _parse_radii(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(tok) for tok in text.split(",") if tok.strip())
    except ValueError:
        raise InvalidArgumentError(f"bad radii list {text!r}") from None


def _rim_config(args) -> RimConfig:
    fields: dict = {}
    if args.config:
        with open(args.config) as fh:
            raw = json.load(fh)
        for key in ("radii", "epsilon", "target_dims", "full_range", "per_radius_channels"):
            if key in raw:
                fields[key] = raw[key]
        if "radii" in fields:
            fields["radii"] = tuple(fields["radii"])
        if fields.get("target_dims") is not None:
            fields["target_dims"] = tuple(fields["target_dims"])
    if args.radii:
        fields["radii"] = _parse_radii(args.radii)
    if args.full_range:
        fields["full_range"] = True
    return RimConfig(**fields)


def _atomic_json(path, payload) -> None:
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, path)


def cmd_rim(args) -> int:
    source = _load_input(args.input)
    cfg = _rim_config(args)
    if len(source.dims) == 3:
        vu, vs = rim_transform_volume(source, cfg)
    else:
        vu, vs = rim_transform(source, cfg)

    prefix = args.output
    write_tensor(f"{prefix}_vu.dact", vu)
    write_tensor(f"{prefix}_vs.dact", vs)

    summary: dict = {"input": args.input, "radii": list(cfg.resolve_radii(source.dims[-2:]))}
    for name, fmap in (("vu", vu), ("vs", vs)):
        flat = fmap.data.sum(axis=0)  # collapse channels for rendering/argmax
        if flat.ndim == 3:
            for d in range(flat.shape[0]):
                write_pgm(f"{prefix}_{name}_s{d:03d}.pgm", flat[d])
        else:
            write_pgm(f"{prefix}_{name}.pgm", flat)
        argmax = np.unravel_index(int(np.argmax(flat)), flat.shape)
        summary[f"{name}_argmax"] = [int(v) for v in argmax]
        summary[f"{name}_max"] = float(flat.max())
    _atomic_json(f"{prefix}_summary.json", summary)
    return EXIT_OK


def cmd_gradcheck(args) -> int:
    if args.size > 16:
        raise InvalidArgumentError("gradcheck sizes are capped at 16 per dimension")
    kernel = Kernel.parse(args.kernel)
    report = gradcheck_report(size=args.size, kernel=kernel, seed=args.seed)
    worst = max(
        report["accumulate_grad_source_error"],
        report["grid_sample_grad_source_error"],
        report["grid_sample_grad_grid_error"],
    )
    ok = worst <= GRADCHECK_TOLERANCE and report["adjoint_gap"] <= ADJOINT_TOLERANCE
    for key in (
        "accumulate_grad_source_error",
        "grid_sample_grad_source_error",
        "grid_sample_grad_grid_error",
        "adjoint_gap",
    ):
        print(f"{key}: {report[key]:.3e}")
    print(f"gradcheck ({kernel.value}, size {args.size}): {'PASS' if ok else 'FAIL'}")
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def _records_from_manifest(path, dims, noise_sigma):
    if not os.path.exists(path):
        raise FileNotFoundError(f"manifest not found: {path}")
    records = []
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise InvalidArgumentError(f"manifest {path} lists no patches")
    for i, row in enumerate(rows):
        kind = LesionKind(row["kind"])
        center = tuple(float(tok) for tok in row["center"].split(";"))
        spec = LesionSpec(
            kind=kind,
            center=center,
            radius=float(row["radius"]),
            rim_width=2.0,
            rim_intensity=1.0,
            interior_intensity=0.3,
            noise_sigma=noise_sigma,
            seed=int(row["seed"]),
        )
        if row.get("file"):
            base = os.path.dirname(os.path.abspath(path))
            patch = read_tensor(os.path.join(base, row["file"]))
        else:
            patch, _ = generate_lesion(spec, dims[: len(center)] if len(center) < 3 else dims)
        records.append(
            bench_mod.BenchRecord(id=int(row["id"]), subject=i % 20, spec=spec, patch=patch)
        )
    return records


def cmd_bench(args) -> int:
    cfg = _rim_config(args)
    if args.generate:
        records = bench_mod.generate_dataset(
            args.generate, seed=args.seed, noise_sigma=args.noise
        )
    elif args.manifest:
        records = _records_from_manifest(args.manifest, DEFAULT_PATCH_DIMS, args.noise)
    else:
        raise InvalidArgumentError("bench needs either --generate N or --manifest PATH")
    result = bench_mod.run_benchmark(records, cfg, fold_seed=args.seed)
    bench_mod.write_metrics(args.output, result)
    bench_mod.write_manifest(f"{args.output}_manifest.csv", records)
    report = result.report
    print(
        f"n={len(records)} f1={report.f1:.4f} roc_auc={report.roc_auc:.4f} "
        f"proc_auc={report.proc_auc:.4f} pr_auc={report.pr_auc:.4f}"
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dirac",
        description="Directed accumulation transforms, gradient checks, and benchmarks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_rim = sub.add_parser("rim", help="rim accumulation transform of an image or volume")
    p_rim.add_argument("--input", required=True, help="raw tensor (.dact) or PGM input")
    p_rim.add_argument("--output", required=True, help="output file prefix")
    p_rim.add_argument("--config", help="JSON config for the transform")
    p_rim.add_argument("--radii", help="comma-separated shift radii")
    p_rim.add_argument("--full-range", action="store_true", help="use radii 1..max(H,W)")
    p_rim.add_argument("--seed", type=int, default=0)
    p_rim.set_defaults(func=cmd_rim)

    p_grad = sub.add_parser("gradcheck", help="verify backward passes and adjointness")
    p_grad.add_argument("--size", type=int, default=6)
    p_grad.add_argument("--kernel", default="bilinear", choices=["integer", "bilinear"])
    p_grad.add_argument("--seed", type=int, default=0)
    p_grad.set_defaults(func=cmd_gradcheck)

    p_bench = sub.add_parser("bench", help="synthetic rim benchmark")
    p_bench.add_argument("--manifest", help="dataset manifest CSV")
    p_bench.add_argument("--generate", type=int, metavar="N", help="generate N patches")
    p_bench.add_argument("--output", required=True, help="output file prefix")
    p_bench.add_argument("--config", help="JSON config for the transform")
    p_bench.add_argument("--radii", help="comma-separated shift radii")
    p_bench.add_argument("--full-range", action="store_true")
    p_bench.add_argument("--noise", type=float, default=0.0)
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (DiracError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
