"""Full run orchestration: detect, narrow, cluster, order, fit, score.

One call produces every artifact of a run in the output directory:

    points.csv        input cloud (synthesized runs only)
    detected.csv      sites whose indicator exceeded the threshold
    narrowed.csv      thinned positions with tangents and provenance
    polylines.csv     per-fault ordered narrowed points
    curves.csv        per-fault sampled spline reconstructions
    metrics.json      per-fault scores against the exact faults
    report.json       config echo, timings, diagnostics
    plot_*.svg        the four stage views

Everything except report.json (which carries wall-clock timings) is
byte-deterministic for a fixed config and seed.
"""
from __future__ import annotations

import json
import logging
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .curvefit import fit_curve
from .detector import DetectorConfig, detect
from .geometry import PointCloud, build_index, median_nn_spacing
from .io import write_narrowed, write_points, write_polylines
from .metrics import FaultScore, hausdorff, match_faults, max_min_distance
from .narrower import NarrowConfig, NarrowedPoints, cluster, narrow, order_along_curve
from .numdiff import FormulaConfig
from .synthdata import GENERATOR_NAME, SamplerSpec, exact_faults, sample

logger = logging.getLogger(__name__)

LINK_SPACING_FACTOR = 20.0
SVG_HASH_SALT = "faultline"

PLOT_NAMES = (
    "plot_data.svg",
    "plot_detected.svg",
    "plot_narrowed.svg",
    "plot_reconstructed.svg",
)


@dataclass(frozen=True)
class RunConfig:
    """Resolved configuration for one pipeline run.

    Exactly one of ``input_path`` (CSV file) and ``kind`` (synthetic
    sampler) must be given; ``count`` and ``seed`` apply only to the
    synthetic route.  ``link_radius=None`` means the default of 20x
    the cloud's median nearest-neighbor spacing.
    """

    input_path: str | None = None
    kind: str | None = None
    count: int = 10000
    seed: int = 0
    stencil_size: int = 6
    theta: float = 0.8
    weight_exponent: float = 1.0
    knn: int = 10
    iterations: int = 3
    link_radius: float | None = None
    samples: int = 500
    out_dir: str = "."
    workers: int = 1

    def __post_init__(self) -> None:
        if (self.input_path is None) == (self.kind is None):
            raise ValueError("give exactly one of input_path and kind")
        if self.kind is not None and self.kind not in ("uniform", "variable"):
            raise ValueError("kind must be 'uniform' or 'variable'")
        if self.count < 1:
            raise ValueError("count must be at least 1")
        if self.samples < 2:
            raise ValueError("samples must be at least 2")
        if self.link_radius is not None and not self.link_radius > 0.0:
            raise ValueError("link_radius must be positive")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        # delegate range checks to the stage configs they feed
        DetectorConfig(
            stencil_size=self.stencil_size,
            theta=self.theta,
            formula=FormulaConfig(weight_exponent=self.weight_exponent),
        )
        NarrowConfig(knn=self.knn, iterations=self.iterations)


@dataclass(frozen=True)
class RunReport:
    config: dict
    timings: dict
    fault_count: int
    scores: list[FaultScore]
    unmatched_reconstructed: list[int]
    unmatched_exact: list[int]
    diagnostics: dict

    def to_dict(self) -> dict:
        doc = asdict(self)
        doc["scores"] = [asdict(s) for s in self.scores]
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> RunReport:
        fields = dict(doc)
        fields["scores"] = [FaultScore(**s) for s in doc["scores"]]
        return cls(**fields)


def _write_json(path: Path, doc: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_detected(path: Path, cloud: PointCloud, indices: np.ndarray) -> None:
    if len(indices):
        write_points(path, PointCloud.from_arrays(cloud.xy[indices], cloud.values[indices]))
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("x,y,f\n")


def emit_plots(
    out_dir: Path,
    cloud: PointCloud,
    exact: list[np.ndarray] | None,
    detected_xy: np.ndarray,
    narrowed_xy: np.ndarray,
    curves: list[np.ndarray],
) -> list[Path]:
    """Write the four stage views as deterministic SVG files."""
    import matplotlib

    matplotlib.use("Agg", force=True)
    import matplotlib.pyplot as plt

    lo = cloud.xy.min(axis=0)
    hi = cloud.xy.max(axis=0)
    pad = 0.02 * max(float(hi[0] - lo[0]), float(hi[1] - lo[1]), 1e-9)

    def frame(ax, title):
        ax.set_xlim(lo[0] - pad, hi[0] + pad)
        ax.set_ylim(lo[1] - pad, hi[1] + pad)
        ax.set_aspect("equal")
        ax.set_title(title, fontsize=10)

    def data_layer(ax, light):
        if light:
            ax.scatter(cloud.xy[:, 0], cloud.xy[:, 1], s=2, color="0.85")
        else:
            ax.scatter(cloud.xy[:, 0], cloud.xy[:, 1], s=2, c=cloud.values, cmap="viridis")

    paths = []
    with matplotlib.rc_context({"svg.hashsalt": SVG_HASH_SALT}):

        def save(fig, name):
            target = out_dir / name
            fig.savefig(target, format="svg", metadata={"Date": None})
            plt.close(fig)
            paths.append(target)

        fig, ax = plt.subplots(figsize=(4.6, 4.3))
        data_layer(ax, light=False)
        if exact is not None:
            for ref in exact:
                ax.plot(ref[:, 0], ref[:, 1], color="black", linewidth=1.2)
        frame(ax, "input data and reference curves")
        save(fig, PLOT_NAMES[0])

        fig, ax = plt.subplots(figsize=(4.6, 4.3))
        data_layer(ax, light=True)
        if len(detected_xy):
            ax.scatter(detected_xy[:, 0], detected_xy[:, 1], s=4, color="crimson")
        frame(ax, "detected sites")
        save(fig, PLOT_NAMES[1])

        fig, ax = plt.subplots(figsize=(4.6, 4.3))
        data_layer(ax, light=True)
        if len(narrowed_xy):
            ax.scatter(narrowed_xy[:, 0], narrowed_xy[:, 1], s=4, color="navy")
        frame(ax, "narrowed sites")
        save(fig, PLOT_NAMES[2])

        fig, ax = plt.subplots(figsize=(4.6, 4.3))
        data_layer(ax, light=True)
        if exact is not None:
            for ref in exact:
                ax.plot(ref[:, 0], ref[:, 1], color="0.6", linewidth=1.0, linestyle="--")
        for rec in curves:
            ax.plot(rec[:, 0], rec[:, 1], linewidth=1.6)
        frame(ax, "reconstructed curves")
        save(fig, PLOT_NAMES[3])
    return paths


def _dedupe_chain(chain: np.ndarray) -> np.ndarray:
    if len(chain) < 2:
        return chain
    keep = np.ones(len(chain), dtype=bool)
    keep[1:] = np.hypot(*np.diff(chain, axis=0).T) > 0.0
    return chain[keep]


def run_pipeline(config: RunConfig) -> RunReport:
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    timings: dict[str, float] = {}
    t_total = time.perf_counter()

    t = time.perf_counter()
    if config.kind is not None:
        spec = SamplerSpec(kind=config.kind, count=config.count, seed=config.seed)
        cloud = sample(spec)
        write_points(out / "points.csv", cloud)
        generator = GENERATOR_NAME
    else:
        from .io import read_points

        cloud = read_points(config.input_path)
        generator = None
    index = build_index(cloud)
    spacing = median_nn_spacing(cloud, index)
    timings["load"] = time.perf_counter() - t

    t = time.perf_counter()
    det_cfg = DetectorConfig(
        stencil_size=config.stencil_size,
        theta=config.theta,
        formula=FormulaConfig(weight_exponent=config.weight_exponent),
    )
    field, candidates = detect(cloud, index, det_cfg, workers=config.workers)
    _write_detected(out / "detected.csv", cloud, candidates.indices)
    timings["detect"] = time.perf_counter() - t

    t = time.perf_counter()
    if len(candidates.indices):
        narrowed = narrow(
            cloud.xy[candidates.indices],
            NarrowConfig(knn=config.knn, iterations=config.iterations),
            source_indices=candidates.indices,
        )
    else:
        empty = np.empty((0, 2))
        narrowed = NarrowedPoints(xy=empty, tangents=empty.copy())
    write_narrowed(out / "narrowed.csv", narrowed)
    timings["narrow"] = time.perf_counter() - t

    t = time.perf_counter()
    link = (
        config.link_radius
        if config.link_radius is not None
        else LINK_SPACING_FACTOR * spacing
    )
    groups = cluster(narrowed.xy, link) if len(narrowed.xy) else []
    timings["cluster"] = time.perf_counter() - t

    t = time.perf_counter()
    polylines: list[np.ndarray] = []
    sampled_curves: list[np.ndarray] = []
    cluster_points: list[np.ndarray] = []
    coverages: list[float] = []
    dropped = 0
    for k, group in enumerate(groups):
        pts = narrowed.xy[group]
        order = order_along_curve(pts)
        chain = _dedupe_chain(pts[order])
        if len(chain) < 2:
            dropped += 1
            continue
        if len(order) < 0.9 * len(group):
            logger.warning(
                "ordering failed on cluster %d: visited %d of %d points; "
                "fitting the partial polyline",
                k, len(order), len(group),
            )
        coverages.append(len(order) / len(group))
        polylines.append(chain)
        sampled_curves.append(fit_curve(chain).sample(config.samples))
        cluster_points.append(pts)
    write_polylines(out / "polylines.csv", polylines)
    write_polylines(out / "curves.csv", sampled_curves)
    timings["fit"] = time.perf_counter() - t

    t = time.perf_counter()
    scores: list[FaultScore] = []
    unmatched_rec: list[int] = []
    unmatched_exact: list[int] = []
    exact = exact_faults(config.samples) if config.kind is not None else None
    if exact is not None and sampled_curves:
        matching = match_faults(sampled_curves, exact)
        for rec_id, exact_id, dist in matching.pairs:
            scores.append(
                FaultScore(
                    fault_id=rec_id,
                    hausdorff=dist,
                    point_to_curve=max_min_distance(cluster_points[rec_id], exact[exact_id]),
                    matched_exact=exact_id,
                )
            )
        unmatched_rec = matching.unmatched_reconstructed
        unmatched_exact = matching.unmatched_exact
    _write_json(
        out / "metrics.json",
        {
            "faults": [asdict(s) for s in scores],
            "unmatched_reconstructed": unmatched_rec,
            "unmatched_exact": unmatched_exact,
        },
    )
    timings["score"] = time.perf_counter() - t

    t = time.perf_counter()
    emit_plots(out, cloud, exact, cloud.xy[candidates.indices], narrowed.xy, sampled_curves)
    timings["plots"] = time.perf_counter() - t
    timings["total"] = time.perf_counter() - t_total

    report = RunReport(
        config=asdict(config),
        timings=timings,
        fault_count=len(sampled_curves),
        scores=scores,
        unmatched_reconstructed=unmatched_rec,
        unmatched_exact=unmatched_exact,
        diagnostics={
            "candidate_count": int(len(candidates.indices)),
            "failed_stencils": [int(i) for i in field.failed_sites],
            "median_spacing": float(spacing),
            "link_radius": float(link),
            "cluster_sizes": [int(len(g)) for g in groups],
            "discarded_clusters": int(dropped),
            "ordering_coverage": [float(c) for c in coverages],
            "generator": generator,
            "scored": exact is not None,
        },
    )
    _write_json(out / "report.json", report.to_dict())
    return report
