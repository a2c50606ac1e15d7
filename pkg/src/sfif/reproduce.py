"""End-to-end run on the sample data: coefficients, dimensions, distances, smoothness."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

from . import presets
from .analysis import (
    DEFAULT_SCALES,
    avg_fractal_distance,
    box_dimension,
    moran_dimension_periodic,
    smoothness_classify,
)
from .attractor import DEFAULT_DEPTH, sample_uniform
from .core import CodeString, Sifs
from .svg import write_svg

DIMENSION_POINTS = 2**17 + 1
DISTANCE_POINTS = 2**15 + 1


@dataclass
class Reproduction:
    sifs: Sifs
    coefficients: list[dict]
    dimensions: dict[str, dict] = field(default_factory=dict)
    distances: dict[str, dict] = field(default_factory=dict)
    orderings: list[dict] = field(default_factory=list)
    smoothness: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "sifs_hash": self.sifs.content_hash,
            "coefficients": self.coefficients,
            "dimensions": self.dimensions,
            "distances": self.distances,
            "orderings": self.orderings,
            "smoothness": self.smoothness,
        }

    def table(self) -> str:
        lines = ["coefficients", f"{'n':>3} {'a_n':>6} {'b_n':>6}" + "".join(
            f" {'e_n' + str(k + 1):>7} {'f_n' + str(k + 1):>7}" for k in range(self.sifs.M)
        )]
        for row in self.coefficients:
            cells = "".join(f" {e:7.2f} {f:7.2f}" for e, f in zip(row["e"], row["f"]))
            lines.append(f"{row['n']:>3} {row['a']:6.2f} {row['b']:6.2f}{cells}")
        lines += ["", "dimension", f"{'sigma':>7} {'box':>8} {'r2':>7} {'moran':>8} {'reported':>9}"]
        for s, d in self.dimensions.items():
            lines.append(
                f"{s:>7} {d['estimate']:8.4f} {d['r2']:7.4f} {d['moran']:8.4f} {d['reported']:9.4f}"
            )
        lines += ["", "average fractal distance", f"{'pair':>14} {'raw':>9} {'normalized':>11} {'reported':>9}"]
        for p, d in self.distances.items():
            lines.append(f"{p:>14} {d['raw']:9.4f} {d['normalized']:11.4f} {d['reported']:9.3f}")
        lines += ["", "orderings"]
        for o in self.orderings:
            lines.append(f"  {o['claim']}: {'holds' if o['holds'] else 'FAILS'}")
        sm = self.smoothness
        lines += [
            "",
            "smoothness",
            f"  class {sm['klass']}, C1 = {sm['C1']:.4g}, lambda bar bound = {sm['lambda_bar_bound']}",
            f"  empirical exponent for (2) = {sm['empirical_exponent']:.4f} (r2 {sm['empirical_r2']:.4f})",
        ]
        return "\n".join(lines) + "\n"


def json_default(obj):
    """``json.dump`` fallback for numpy scalars and arrays."""
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"{type(obj).__name__} is not JSON serializable")


def coefficient_rows(sifs: Sifs) -> list[dict]:
    rows = []
    for n in range(sifs.N):
        rows.append(
            {
                "n": n + 1,
                "a": float(sifs.a[n]),
                "b": float(sifs.b[n]),
                "e": [float(sifs.qcoef[k, n, 1]) for k in range(sifs.M)],
                "f": [float(sifs.qcoef[k, n, 0]) for k in range(sifs.M)],
            }
        )
    return rows


def reproduce_paper(
    outdir=None,
    depth: int = DEFAULT_DEPTH,
    dimension_points: int = DIMENSION_POINTS,
    distance_points: int = DISTANCE_POINTS,
    scales: tuple[int, int] = DEFAULT_SCALES,
) -> Reproduction:
    sifs = presets.sample_sifs()
    rep = Reproduction(sifs, coefficient_rows(sifs))
    sigmas = presets.SAMPLE_SIGMAS

    graphs = {}
    for s in sigmas:
        g = sample_uniform(sifs, CodeString.parse(s), depth, dimension_points)
        d = box_dimension(g, *scales)
        rep.dimensions[s] = {
            **d.to_dict(),
            "moran": moran_dimension_periodic(sifs, CodeString.parse(s)),
            "reported": presets.REPORTED_DIMENSIONS[s],
        }
        graphs[s] = sample_uniform(sifs, CodeString.parse(s), depth, distance_points)
    est = [rep.dimensions[s]["estimate"] for s in sigmas]
    rep.orderings.append(
        {"claim": "D" + " < D".join(sigmas), "holds": all(u < v for u, v in zip(est, est[1:]))}
    )

    for (s, t), reported in presets.REPORTED_DISTANCES.items():
        rep.distances[f"{s} vs {t}"] = {
            "raw": avg_fractal_distance(graphs[s], graphs[t]),
            "normalized": avg_fractal_distance(graphs[s], graphs[t], normalize=True),
            "reported": reported,
        }
    for near, far in presets.DISTANCE_ORDERINGS:
        dn = rep.distances[f"{near[0]} vs {near[1]}"]["normalized"]
        df = rep.distances[f"{far[0]} vs {far[1]}"]["normalized"]
        rep.orderings.append({"claim": f"d{near[0]}{near[1]} < d{far[0]}{far[1]}", "holds": bool(dn < df)})

    rep.smoothness = smoothness_classify(sifs, sigma=CodeString.parse("(2)"), depth=depth).to_dict()

    if outdir is not None:
        os.makedirs(outdir, exist_ok=True)
        with open(os.path.join(outdir, "sifs.json"), "w") as fh:
            fh.write(sifs.to_json())
        with open(os.path.join(outdir, "summary.json"), "w") as fh:
            json.dump(rep.to_dict(), fh, indent=2, default=json_default)
        with open(os.path.join(outdir, "summary.txt"), "w") as fh:
            fh.write(rep.table())
        for s in sigmas:
            g = graphs[s]
            name = s.strip("()")
            g.write_csv(os.path.join(outdir, f"sfif_{name}.csv"))
            write_svg(os.path.join(outdir, f"sfif_{name}.svg"), [(s, g.x, g.y)], f"sigma = {s}")
        write_svg(
            os.path.join(outdir, "sfif_all.svg"),
            [(s, graphs[s].x, graphs[s].y) for s in sigmas],
            "sample data, five code strings",
        )
    return rep
