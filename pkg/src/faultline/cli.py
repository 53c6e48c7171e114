"""Command line entry points.

Subcommands: ``synth`` draws a sample cloud, ``detect`` runs only the
indicator sweep, ``reconstruct`` runs the full pipeline, ``score``
recomputes metrics from previously written curve files.  Options
resolve in three layers: built-in defaults, then a JSON config file
(``--config``, same keys as the flags), then explicit flags.  The
``FAULTLINE_OUTDIR`` environment variable replaces only the default
output directory.

Exit codes: 0 success (warnings included), 2 configuration error,
3 I/O error, 4 internal error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import traceback
from pathlib import Path

import numpy as np

from .detector import DetectorConfig, detect
from .geometry import build_index
from .io import (
    NARROWED_HEADER,
    IngestError,
    read_narrowed,
    read_points,
    read_polylines,
    write_points,
)
from .metrics import match_faults, max_min_distance, min_distances
from .numdiff import FormulaConfig
from .pipeline import RunConfig, _write_detected, _write_json, run_pipeline
from .synthdata import GENERATOR_NAME, SamplerSpec, exact_faults, sample

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_INTERNAL = 4

_S = argparse.SUPPRESS


def _defaults(command: str) -> dict:
    out_dir = os.environ.get("FAULTLINE_OUTDIR", ".")
    base = {"out_dir": out_dir}
    if command == "synth":
        return {**base, "kind": None, "count": 10000, "seed": 0}
    if command == "detect":
        return {
            **base, "input_path": None, "kind": None, "count": 10000, "seed": 0,
            "stencil_size": 6, "theta": 0.8, "weight_exponent": 1.0, "workers": 1,
        }
    if command == "reconstruct":
        return {
            **base, "input_path": None, "kind": None, "count": 10000, "seed": 0,
            "stencil_size": 6, "theta": 0.8, "weight_exponent": 1.0, "knn": 10,
            "iterations": 3, "link_radius": None, "samples": 500, "workers": 1,
        }
    return {**base, "curves": None, "narrowed": None, "exact": None, "samples": 500}


def _add_synth_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--kind", default=_S, help="synthetic sampler: uniform or variable")
    p.add_argument("--count", type=int, default=_S, help="synthetic site count")
    p.add_argument("--seed", type=int, default=_S, help="sampler seed")


def _add_detect_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--stencil-size", dest="stencil_size", type=int, default=_S)
    p.add_argument("--theta", type=float, default=_S, help="indicator threshold")
    p.add_argument("--weight-exponent", dest="weight_exponent", type=float, default=_S)
    p.add_argument("--workers", type=int, default=_S)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="faultline",
        description="Detect and reconstruct curves of discontinuity in scattered data.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for name, helptext in [
        ("synth", "generate a synthetic point cloud"),
        ("detect", "run the indicator sweep and write the detected set"),
        ("reconstruct", "run the full pipeline"),
        ("score", "compute metrics for existing curve files"),
    ]:
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", default=_S, help="JSON file with option defaults")
        p.add_argument("--out", dest="out_dir", default=_S, help="output directory")
        if name == "synth":
            _add_synth_flags(p)
        elif name == "detect":
            p.add_argument("--input", dest="input_path", default=_S, help="input points CSV")
            _add_synth_flags(p)
            _add_detect_flags(p)
        elif name == "reconstruct":
            p.add_argument("--input", dest="input_path", default=_S, help="input points CSV")
            _add_synth_flags(p)
            _add_detect_flags(p)
            p.add_argument("--knn", type=int, default=_S, help="narrowing neighborhood")
            p.add_argument("--iterations", type=int, default=_S)
            p.add_argument("--link-radius", dest="link_radius", type=float, default=_S)
            p.add_argument("--samples", type=int, default=_S, help="spline sample count")
        else:
            p.add_argument("--curves", default=_S, help="reconstructed curves CSV")
            p.add_argument(
                "--narrowed", default=_S,
                help="points CSV for the point-to-curve metric "
                "(narrowed or polylines format)",
            )
            p.add_argument("--exact", default=_S, help="exact fault polylines CSV")
            p.add_argument("--samples", type=int, default=_S)
    return parser


def _resolve(ns: argparse.Namespace) -> dict:
    opts = _defaults(ns.command)
    given = {k: v for k, v in vars(ns).items() if k not in ("command", "config")}
    if hasattr(ns, "config"):
        doc = json.loads(Path(ns.config).read_text(encoding="utf-8"))
        if not isinstance(doc, dict):
            raise ValueError("config file must hold a JSON object")
        unknown = sorted(set(doc) - set(opts))
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(unknown)}")
        opts.update(doc)
    opts.update(given)
    return opts


def _cmd_synth(opts: dict) -> int:
    if opts["kind"] is None:
        raise ValueError("synth requires --kind")
    spec = SamplerSpec(kind=opts["kind"], count=opts["count"], seed=opts["seed"])
    cloud = sample(spec)
    out = Path(opts["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    target = out / "points.csv"
    write_points(target, cloud)
    print(f"wrote {len(cloud)} sites to {target} [{GENERATOR_NAME}]")
    return EXIT_OK


def _load_cloud(opts: dict, out: Path):
    if (opts["input_path"] is None) == (opts["kind"] is None):
        raise ValueError("give exactly one of --input and --kind")
    if opts["kind"] is not None:
        spec = SamplerSpec(kind=opts["kind"], count=opts["count"], seed=opts["seed"])
        cloud = sample(spec)
        write_points(out / "points.csv", cloud)
        return cloud
    return read_points(opts["input_path"])


def _cmd_detect(opts: dict) -> int:
    out = Path(opts["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    cloud = _load_cloud(opts, out)
    cfg = DetectorConfig(
        stencil_size=opts["stencil_size"],
        theta=opts["theta"],
        formula=FormulaConfig(weight_exponent=opts["weight_exponent"]),
    )
    field, candidates = detect(cloud, build_index(cloud), cfg, workers=opts["workers"])
    _write_detected(out / "detected.csv", cloud, candidates.indices)
    print(
        f"flagged {len(candidates.indices)} of {len(cloud)} sites "
        f"(threshold {cfg.theta}, {len(field.failed_sites)} failed stencils)"
    )
    return EXIT_OK


def _cmd_reconstruct(opts: dict) -> int:
    report = run_pipeline(RunConfig(**opts))
    print(f"reconstructed {report.fault_count} fault(s); artifacts in {opts['out_dir']}")
    for s in report.scores:
        print(
            f"  fault {s.fault_id}: hausdorff={s.hausdorff:.6g} "
            f"point_to_curve={s.point_to_curve:.6g} (exact {s.matched_exact})"
        )
    if report.diagnostics["failed_stencils"]:
        print(f"  {len(report.diagnostics['failed_stencils'])} stencil failures")
    return EXIT_OK


def _points_by_fault(
    path: str, curve_rows: list[tuple[int, np.ndarray]]
) -> dict[int, np.ndarray]:
    """Per-fault point sets for the point-to-curve metric.

    Accepts a grouped polylines file as-is; a flat narrowed file has no
    fault column, so each of its points is attributed to the nearest
    reconstructed curve.
    """
    with open(path, encoding="utf-8", newline="") as fh:
        header = fh.readline().strip()
    if header != ",".join(NARROWED_HEADER):
        return dict(read_polylines(path))
    pts = read_narrowed(path).xy
    if not curve_rows or not len(pts):
        return {}
    gaps = np.column_stack([min_distances(pts, pl) for _, pl in curve_rows])
    assign = np.argmin(gaps, axis=1)
    return {
        fid: pts[assign == k]
        for k, (fid, _) in enumerate(curve_rows)
        if np.any(assign == k)
    }


def _cmd_score(opts: dict) -> int:
    if opts["curves"] is None:
        raise ValueError("score requires --curves")
    curve_rows = read_polylines(opts["curves"])
    curves = [pts for _, pts in curve_rows]
    if opts["exact"] is not None:
        exact = [pts for _, pts in read_polylines(opts["exact"])]
    else:
        exact = exact_faults(opts["samples"])
    narrowed = (
        _points_by_fault(opts["narrowed"], curve_rows)
        if opts["narrowed"] is not None
        else None
    )
    faults = []
    unmatched_rec: list[int] = []
    unmatched_exact: list[int] = list(range(len(exact))) if not curves else []
    if curves:
        matching = match_faults(curves, exact)
        for rec, ex, dist in matching.pairs:
            fid = int(curve_rows[rec][0])
            gap = None
            if narrowed is not None and fid in narrowed:
                gap = max_min_distance(narrowed[fid], exact[ex])
            faults.append(
                {
                    "fault_id": fid,
                    "hausdorff": dist,
                    "point_to_curve": gap,
                    "matched_exact": ex,
                }
            )
        unmatched_rec = matching.unmatched_reconstructed
        unmatched_exact = matching.unmatched_exact
    out = Path(opts["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    _write_json(
        out / "metrics.json",
        {
            "faults": faults,
            "unmatched_reconstructed": unmatched_rec,
            "unmatched_exact": unmatched_exact,
        },
    )
    for record in faults:
        print(
            f"fault {record['fault_id']}: hausdorff={record['hausdorff']:.6g} "
            f"(exact {record['matched_exact']})"
        )
    print(f"metrics written to {out / 'metrics.json'}")
    return EXIT_OK


_HANDLERS = {
    "synth": _cmd_synth,
    "detect": _cmd_detect,
    "reconstruct": _cmd_reconstruct,
    "score": _cmd_score,
}


def cli_main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        opts = _resolve(ns)
        return _HANDLERS[ns.command](opts)
    except IngestError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception:
        traceback.print_exc()
        return EXIT_INTERNAL


def main() -> None:
    raise SystemExit(cli_main())


if __name__ == "__main__":
    main()
