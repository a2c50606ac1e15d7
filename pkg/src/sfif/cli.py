"""Command-line front end.

Exit codes: 0 on success, 2 for invalid input, 3 when a computation cannot
be carried out.  Errors are reported on stderr as ``ErrorName: message``.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import presets
from .analysis import (
    DEFAULT_SCALES,
    avg_fractal_distance,
    box_dimension,
    moran_dimension_periodic,
    smoothness_classify,
)
from .attractor import DEFAULT_DEPTH, SampledGraph, evaluate, uniform_grid
from .calculus import check_derivative_condition, differentiate_sifs, integrate_sifs
from .core import CodeString, InterpolationData, Sifs, load_sifs, solve_maps, validate_sifs
from .errors import NotApplicable, SfifError, ValidationError
from .reproduce import coefficient_rows, json_default, reproduce_paper
from .svg import write_svg

DEFAULT_POINTS = 2**13 + 1
DIMENSION_POINTS = 2**17 + 1
DISTANCE_POINTS = 2**15 + 1


def _read_config(path) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise ValidationError("config must be a JSON object")
    return cfg


def _scales(text) -> tuple[int, int]:
    if isinstance(text, (list, tuple)):
        m1, m2 = text
    else:
        try:
            m1, m2 = (int(v) for v in str(text).split(".."))
        except ValueError:
            raise ValidationError(f"scales must look like m1..m2, got {text!r}") from None
    if not 1 <= m1 < m2:
        raise ValidationError(f"scales need 1 <= m1 < m2, got {m1}..{m2}")
    return int(m1), int(m2)


class Run:
    """Resolved settings: command-line flags override the config file."""

    def __init__(self, args):
        self.args = args
        self.cfg = _read_config(getattr(args, "config", None))

    def get(self, name, default=None):
        v = getattr(self.args, name, None)
        if v is not None:
            return v
        return self.cfg.get(name, default)

    def sifs(self) -> Sifs:
        path = getattr(self.args, "sifs", None)
        if path is not None:
            try:
                sifs = load_sifs(path)
            except OSError as exc:
                raise ValidationError(f"cannot read {path}: {exc.strerror}") from None
            validate_sifs(sifs, allow_gamma_collision=self.cfg.get("allow_gamma_collision", False)).raise_for_failures()
            return sifs
        if "nodes" not in self.cfg:
            raise ValidationError("give --sifs FILE or a --config with nodes and gammas")
        try:
            data = InterpolationData.from_nodes(self.cfg["nodes"])
            gammas = self.cfg["gammas"]
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"config needs nodes and gammas: {exc!r}") from None
        return solve_maps(
            data, gammas, float(self.cfg.get("kappa", 0.0)),
            bool(self.cfg.get("allow_gamma_collision", False)),
        )

    def sigmas(self) -> list[CodeString]:
        raw = self.get("sigma")
        if raw is None:
            raise ValidationError("a code string is required (--sigma)")
        if isinstance(raw, str):
            raw = [raw]
        return [CodeString.parse(s) for s in raw]

    def sigma(self) -> CodeString:
        return self.sigmas()[0]

    @property
    def depth(self) -> int:
        return int(self.get("depth", DEFAULT_DEPTH))

    def points(self, default: int) -> int:
        n = int(self.get("points", default))
        if n < 2:
            raise ValidationError("points must be at least 2")
        return n


def _emit(text: str, out) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, default=json_default) + "\n"


def cmd_build(run: Run) -> None:
    sifs = run.sifs()
    validate_sifs(sifs, allow_gamma_collision=run.cfg.get("allow_gamma_collision", False)).raise_for_failures()
    if run.args.out is None:
        sys.stdout.write(sifs.to_json() + "\n")
        return
    _emit(sifs.to_json() + "\n", run.args.out)
    print(f"{'n':>3} {'a_n':>8} {'b_n':>10}  e_(n,k) / f_(n,k)")
    for row in coefficient_rows(sifs):
        ef = "  ".join(f"{e:.2f}/{f:.2f}" for e, f in zip(row["e"], row["f"]))
        print(f"{row['n']:>3} {row['a']:8.4g} {row['b']:10.4g}  {ef}")


def cmd_sample(run: Run) -> None:
    sifs = run.sifs()
    sigma = run.sigma()
    count = run.points(DEFAULT_POINTS)
    g = evaluate(sifs, sigma, run.depth, uniform_grid(sifs, count, include_nodes=True))
    _emit(g.to_csv(), run.args.out)
    if run.args.svg:
        write_svg(run.args.svg, [(str(sigma), g.x, g.y)], f"sigma = {sigma}, depth {run.depth}")


def _graph_from_csv(path) -> SampledGraph:
    try:
        return SampledGraph.from_csv(path)
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from None
    except (ValueError, IndexError) as exc:
        raise ValidationError(f"{path}: bad sample row ({exc})") from None


def cmd_dimension(run: Run) -> None:
    m1, m2 = _scales(run.get("scales", "%d..%d" % DEFAULT_SCALES))
    report: dict = {}
    if run.args.csv:
        g = _graph_from_csv(run.args.csv)
    else:
        sifs = run.sifs()
        sigma = run.sigma()
        g = evaluate(sifs, sigma, run.depth, uniform_grid(sifs, run.points(DIMENSION_POINTS)))
        report["sigma"] = str(sigma)
        try:
            report["moran_oracle"] = moran_dimension_periodic(sifs, sigma)
        except NotApplicable as exc:
            report["moran_oracle"] = None
            report["moran_note"] = str(exc)
        if sifs.content_hash == presets.sample_sifs().content_hash:
            report["reported"] = presets.REPORTED_DIMENSIONS.get(str(sigma))
    d = box_dimension(g, m1, m2)
    report.update(d.to_dict())
    _emit(_dump(report), run.args.out)
    if run.args.out is not None:
        print(f"box-counting D = {d.estimate:.4f}  (r2 {d.r2:.4f}, scales {m1}..{m2})")
        for key in ("moran_oracle", "reported"):
            if report.get(key) is not None:
                print(f"{key:>14} = {report[key]:.4f}")


def cmd_distance(run: Run) -> None:
    if run.args.csv:
        if len(run.args.csv) != 2:
            raise ValidationError("distance takes exactly two CSV files")
        f, g = (_graph_from_csv(p) for p in run.args.csv)
        labels = list(run.args.csv)
    else:
        sifs = run.sifs()
        sigmas = run.sigmas()
        if len(sigmas) != 2:
            raise ValidationError("distance needs two --sigma values")
        x = uniform_grid(sifs, run.points(DISTANCE_POINTS))
        f, g = (evaluate(sifs, s, run.depth, x) for s in sigmas)
        labels = [str(s) for s in sigmas]
    report = {
        "f": labels[0],
        "g": labels[1],
        "raw": avg_fractal_distance(f, g),
        "normalized": avg_fractal_distance(f, g, normalize=True),
    }
    if not run.args.csv and sifs.content_hash == presets.sample_sifs().content_hash:
        key = tuple(labels)
        reported = presets.REPORTED_DISTANCES.get(key, presets.REPORTED_DISTANCES.get(key[::-1]))
        if reported is not None:
            report["reported"] = reported
    _emit(_dump(report), run.args.out)


def cmd_smoothness(run: Run) -> None:
    sifs = run.sifs()
    sigma = run.sigma() if run.get("sigma") is not None else None
    t = run.cfg.get("t_grid")
    rep = smoothness_classify(
        sifs,
        lambda_nk=run.cfg.get("lambda_nk"),
        sigma=sigma,
        depth=run.depth,
        points=run.points(2**15 + 1),
        t_values=None if t is None else np.asarray(t, dtype=float),
    )
    _emit(_dump(rep.to_dict()), run.args.out)


def cmd_integrate(run: Run) -> None:
    sifs = run.sifs()
    res = integrate_sifs(sifs, float(run.get("y0hat", 0.0)))
    _emit(res.to_json() + "\n", run.args.out)


def cmd_differentiate(run: Run) -> None:
    sifs = run.sifs()
    order = int(run.get("order", 1))
    if run.args.report:
        _emit(_dump(check_derivative_condition(sifs, order).to_dict()), run.args.out)
        return
    res = differentiate_sifs(sifs, order)
    _emit(res.to_json() + "\n", run.args.out)


def cmd_reproduce(run: Run) -> None:
    rep = reproduce_paper(
        run.args.out,
        depth=run.depth,
        scales=_scales(run.get("scales", "%d..%d" % DEFAULT_SCALES)),
    )
    sys.stdout.write(rep.table())


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sfif", description="Super fractal interpolation toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_, sifs=True, sigma=True):
        sp = sub.add_parser(name, help=help_)
        sp.set_defaults(func=func)
        sp.add_argument("--config", help="run configuration (JSON)")
        if sifs:
            sp.add_argument("--sifs", help="Sifs JSON file (overrides config nodes/gammas)")
        if sigma:
            sp.add_argument("--sigma", help="code string such as (12) or 1(2)")
        sp.add_argument("--depth", type=int)
        sp.add_argument("--out", help="output file (stdout when omitted)")
        return sp

    add("build", cmd_build, "solve maps from a config and write Sifs JSON", sifs=False, sigma=False)
    sp = add("sample", cmd_sample, "evaluate g_sigma on a uniform grid plus the nodes")
    sp.add_argument("--points", type=int)
    sp.add_argument("--svg", help="also write an SVG plot")
    sp = add("dimension", cmd_dimension, "box-counting dimension of a curve")
    sp.add_argument("csv", nargs="?", help="sampled curve (x,y CSV) instead of --sifs")
    sp.add_argument("--points", type=int)
    sp.add_argument("--scales", help="dyadic levels m1..m2")
    sp = add("distance", cmd_distance, "average fractal distance of two curves", sigma=False)
    sp.add_argument("csv", nargs="*", help="two sampled curves (x,y CSV)")
    sp.add_argument("--sigma", action="append", help="code string (give twice)")
    sp.add_argument("--points", type=int)
    sp = add("smoothness", cmd_smoothness, "Lipschitz class and empirical Holder exponent")
    sp.add_argument("--points", type=int)
    sp = add("integrate", cmd_integrate, "integral SIFS", sigma=False)
    sp.add_argument("--y0hat", type=float, help="constant of integration (default 0)")
    sp = add("differentiate", cmd_differentiate, "derivative SIFS", sigma=False)
    sp.add_argument("--order", type=int, help="derivative order (default 1)")
    sp.add_argument("--report", action="store_true", help="only print the feasibility report")
    # --out names a directory here
    sp = add("reproduce-paper", cmd_reproduce, "full run on the sample data", sifs=False, sigma=False)
    sp.add_argument("--scales", help="dyadic levels m1..m2")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(Run(args))
    except SfifError as exc:
        print(f"{exc.name}: {exc}", file=sys.stderr)
        return 2 if isinstance(exc, ValidationError) else 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
