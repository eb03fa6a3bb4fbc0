"""Command-line experiment runner.

Every subcommand reads an optional flat ``key = value`` config file, applies
command-line overrides, runs one experiment and writes a CSV report (to
stdout, or ``PREFIX.csv`` plus ``PREFIX.json`` with ``--out PREFIX``).

Exit status: 0 on success, 2 on violated preconditions or bad input,
1 on internal errors or failed self-checks.
"""
from __future__ import annotations

import argparse
import datetime as _dt
import sys
import traceback
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    Constant,
    DistanceToPoint,
    Height,
    SupCones,
    approx_diff_defect,
    chart_uniqueness_lambda,
    measure_porosity_gamma,
    non_doubling_scan,
    porosity_search,
    vertical_derivative,
)
from .base import DEFAULT_DEPTH, PointM, random_point
from .errors import DomainError, PreconditionError
from .jump import (
    FinitePointSet,
    JumpLevel,
    SpacePoint,
    admissible_radius,
    ball_decompose,
    d_infty,
    d_p,
    rectangle_cover,
)
from .numeric import Dyadic, as_dyadic, as_rational
from .report import ScanReport

KINDS = ("distance", "ball", "nondoubling", "cover", "approxdiff", "porosity",
         "gamma", "uniqueness", "selftest")

# what each experiment exercises, recorded in the JSON report
PAPER_REFS = {
    "distance": "pseudometric d_p versus max metric: d_p <= 3 d_inf",
    "ball": "balls as unions of jump-level rectangles; exact nu x Lebesgue measure",
    "nondoubling": "non-doubling theorem: ball ratio at heights in E_n",
    "cover": "three-rectangle approximation lemma",
    "approxdiff": "approximate differentiability with vertical derivative",
    "porosity": "porosity witnesses and cone functions",
    "gamma": "measure porosity gamma(mu, x, r, delta)",
    "uniqueness": "uniqueness-of-derivative criterion for charts",
    "selftest": "oracle equivalence for d_p and ball measures",
}

# per-kind parameters: name -> (default, help)
PARAMS: dict[str, dict[str, tuple]] = {
    "distance": {"p": (None, "first point, e.g. 1,2,1@3/8"),
                 "q": (None, "second point")},
    "ball": {"center": (None, "ball centre, coords@height"),
             "radius": (None, "dyadic radius")},
    "nondoubling": {"base": (None, "base point coords"),
                    "height": (None, "dyadic height"),
                    "levels": ("3..8", "levels as a..b or a comma list")},
    "cover": {"center": (None, "ball centre, coords@height"),
              "radius": (None, "radius; searched downward from 1/2 if omitted"),
              "epsilon": ("1/10", "target uncovered fraction")},
    "approxdiff": {"center": (None, "centre; random if omitted"),
                   "radius": ("1/1024", "ball radius"),
                   "epsilon": ("1/10", "defect threshold"),
                   "samples": ("10000", "Monte Carlo samples"),
                   "field": ("distance", "height | constant:C | distance[:POINT] | cones[:K]"),
                   "df": (None, "derivative; vertical derivative if omitted"),
                   "tol": ("1/1000000", "tolerance for the vertical derivative")},
    "porosity": {"set": ("jump:1/2", "jump:H or points:P1;P2"),
                 "center": (None, "subject point (must lie in the set)"),
                 "radii": ("1/4,1/16,1/64", "comma-separated radii"),
                 "budget": ("100", "random candidates per radius")},
    "gamma": {"center": (None, "centre point"),
              "radius": (None, "radius r"),
              "delta": ("1/2", "measure ratio delta"),
              "budget": ("100", "random centres"),
              "resolution": ("10", "radius grid resolution")},
    "uniqueness": {"increments": (None, "dphi:d entries separated by ';', vectors comma-separated"),
                   "dim": ("1", "chart dimension (1 or 2)"),
                   "grid": ("10000", "angular grid size")},
    "selftest": {"pairs": ("2000", "random pairs for the distance checks"),
                 "balls": ("50", "random balls for the measure oracle"),
                 "membership": ("200", "random membership probes per ball")},
}


# selftest enumerates islands, so it runs on a shallow truncation by default
KIND_DEPTH = {"selftest": 5}


@dataclass
class ExperimentConfig:
    """Everything needed to reproduce a run."""

    kind: str
    depth: int = DEFAULT_DEPTH
    seed: int = 0
    params: dict[str, str] = field(default_factory=dict)
    out: str | None = None

    def to_text(self) -> str:
        lines = [f"kind = {self.kind}", f"depth = {self.depth}", f"seed = {self.seed}"]
        if self.out is not None:
            lines.append(f"out = {self.out}")
        lines += [f"{k} = {v}" for k, v in sorted(self.params.items())]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "ExperimentConfig":
        values = parse_config_text(text)
        kind = values.pop("kind", None)
        if kind is None:
            raise DomainError("config has no 'kind'")
        return cls.from_mapping(kind, values)

    @classmethod
    def from_mapping(cls, kind: str, values: dict[str, str]) -> "ExperimentConfig":
        if kind not in KINDS:
            raise DomainError(f"unknown experiment kind {kind!r}")
        values = dict(values)
        try:
            depth = int(values.pop("depth", KIND_DEPTH.get(kind, DEFAULT_DEPTH)))
            seed = int(values.pop("seed", 0))
        except ValueError as exc:
            raise DomainError(f"malformed config: {exc}") from exc
        out = values.pop("out", None)
        known = PARAMS[kind]
        unknown = set(values) - set(known)
        if unknown:
            raise DomainError(f"unknown keys for {kind}: {sorted(unknown)}")
        params = {k: v for k, (v, _) in known.items() if v is not None}
        params.update(values)
        return cls(kind, depth, seed, params, out)


def parse_config_text(text: str) -> dict[str, str]:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DomainError(f"config line {lineno}: expected key = value")
        key, value = line.split("=", 1)
        values[key.strip()] = value.strip()
    return values


def _parse_levels(text: str) -> list[int]:
    text = text.strip()
    if ".." in text:
        a, b = text.split("..")
        return list(range(int(a), int(b) + 1))
    return [int(v) for v in text.split(",") if v.strip()]


def _required(params: dict, key: str) -> str:
    if params.get(key) in (None, ""):
        raise DomainError(f"missing required parameter {key!r}")
    return params[key]


def _parse_set(text: str, depth: int):
    kind, _, body = text.partition(":")
    if kind == "jump":
        return JumpLevel(Dyadic.parse(body))
    if kind == "points":
        pts = tuple(SpacePoint.parse(p) for p in body.split(";") if p.strip())
        for p in pts:
            if p.depth != depth:
                raise DomainError(f"point {p} does not have depth {depth}")
        return FinitePointSet(pts)
    raise DomainError(f"unknown set descriptor {text!r}")


COVER_HEIGHT_BITS = 256


def _random_height(rng, bits: int = 40) -> Dyadic:
    if bits <= 62:
        return Dyadic(int(rng.integers(1, 1 << bits)), bits)
    # odd mantissa, so the height sits exactly on grid level ``bits``
    return Dyadic(int.from_bytes(rng.bytes((bits + 7) // 8), "big") % (1 << bits) | 1, bits)


def _point(params: dict, key: str, depth: int, rng, bits: int = 40) -> SpacePoint:
    text = params.get(key)
    if text:
        p = SpacePoint.parse(text)
        if p.depth != depth:
            raise DomainError(f"{key} has depth {p.depth}, expected {depth}")
        return p
    return SpacePoint(random_point(depth, rng), _random_height(rng, bits))


# -- experiments -------------------------------------------------------------

def run_distance(cfg: ExperimentConfig, rng) -> ScanReport:
    p = SpacePoint.parse(_required(cfg.params, "p"))
    q = SpacePoint.parse(_required(cfg.params, "q"))
    dp, dinf = d_p(p, q), d_infty(p, q)
    rep = ScanReport(["p", "q", "d_p", "d_infty", "three_d_infty", "vertical_gap",
                      "upper_bound_holds", "lower_bound_holds"])
    gap = abs(p.height - q.height)
    rep.add(p=p, q=q, d_p=dp, d_infty=dinf, three_d_infty=3 * dinf, vertical_gap=gap,
            upper_bound_holds=dp <= 3 * dinf, lower_bound_holds=gap <= dp)
    return rep


def run_ball(cfg: ExperimentConfig, rng) -> ScanReport:
    center = SpacePoint.parse(_required(cfg.params, "center"))
    dec = ball_decompose(center, Dyadic.parse(_required(cfg.params, "radius")))
    total = dec.measure()
    rep = ScanReport(["center", "radius", "level", "weight", "intervals", "length",
                      "contribution", "measure"])
    for k, w, sec in dec.sections():
        rep.add(center=center, radius=dec.radius, level=k, weight=w,
                intervals=" ".join(f"({lo},{hi})" for lo, hi in sec),
                length=sec.length, contribution=w * sec.length.to_fraction(), measure=total)
    rep.metadata["measure"] = str(total)
    rep.metadata["decomposition"] = dec.to_json()
    return rep


def run_nondoubling(cfg: ExperimentConfig, rng) -> ScanReport:
    base = PointM.parse(_required(cfg.params, "base"))
    if base.depth != cfg.depth:
        raise DomainError(f"base has depth {base.depth}, expected {cfg.depth}")
    rep = non_doubling_scan(base, Dyadic.parse(_required(cfg.params, "height")),
                            _parse_levels(cfg.params["levels"]))
    statuses = rep.column("status")
    if statuses and all(s != "ok" for s in statuses):
        raise PreconditionError("no requested level is usable: " + "; ".join(sorted(set(statuses))))
    return rep


def run_cover(cfg: ExperimentConfig, rng) -> ScanReport:
    # small epsilon needs heights far from every grid up to level ~2/epsilon
    center = _point(cfg.params, "center", cfg.depth, rng, bits=COVER_HEIGHT_BITS)
    eps = as_rational(cfg.params["epsilon"])
    radius = cfg.params.get("radius")
    r = Dyadic.parse(radius) if radius else admissible_radius(center, eps)
    res = rectangle_cover(center, r, eps)
    rep = ScanReport(["center", "radius", "epsilon", "k1", "index", "level", "grid_point",
                      "half_width", "ball_measure", "covered_measure", "uncovered_fraction",
                      "bound", "below_epsilon", "below_bound", "work_depth"])
    for i, rect in enumerate(res.rectangles, start=1):
        rep.add(center=center, radius=r, epsilon=eps, k1=res.k1, index=i, level=rect.level,
                grid_point=rect.center, half_width=rect.half_width, ball_measure=res.ball_measure,
                covered_measure=res.covered_measure, uncovered_fraction=res.uncovered_fraction,
                bound=res.bound, below_epsilon=res.uncovered_fraction < eps,
                below_bound=res.uncovered_fraction <= res.bound, work_depth=res.work_depth)
    return rep


def _make_field(text: str, center: SpacePoint, rng):
    name, _, arg = text.partition(":")
    if name == "height":
        return Height()
    if name == "constant":
        return Constant(as_rational(arg or "0"))
    if name == "distance":
        q = SpacePoint.parse(arg) if arg else SpacePoint(random_point(center.depth, rng), _random_height(rng))
        return DistanceToPoint(q)
    if name == "cones":
        count = int(arg or 5)
        cones = []
        while len(cones) < count:
            y = SpacePoint(random_point(center.depth, rng), _random_height(rng))
            S = JumpLevel(_random_height(rng))
            if y.height != S.height:
                cones.append((y, S))
        return SupCones(cones)
    raise DomainError(f"unknown field {text!r}")


def run_approxdiff(cfg: ExperimentConfig, rng) -> ScanReport:
    center = _point(cfg.params, "center", cfg.depth, rng)
    f = _make_field(cfg.params["field"], center, rng)
    if cfg.params.get("df"):
        df = float(as_rational(cfg.params["df"]))
    else:
        df = vertical_derivative(f, center, as_rational(cfg.params["tol"]))
    est = approx_diff_defect(f, center, df, as_rational(cfg.params["epsilon"]),
                             Dyadic.parse(cfg.params["radius"]), int(cfg.params["samples"]), rng)
    rep = ScanReport(["field", "center", "radius", "epsilon", "df", "samples", "defects",
                      "fraction", "ci_low", "ci_high"])
    rep.add(field=repr(f), center=center, radius=Dyadic.parse(cfg.params["radius"]),
            epsilon=as_rational(cfg.params["epsilon"]), df=df, samples=est.nsamples,
            defects=est.defects, fraction=est.fraction, ci_low=est.ci_low, ci_high=est.ci_high)
    return rep


def run_porosity(cfg: ExperimentConfig, rng) -> ScanReport:
    S = _parse_set(cfg.params["set"], cfg.depth)
    if cfg.params.get("center"):
        x0 = _point(cfg.params, "center", cfg.depth, rng)
    elif isinstance(S, JumpLevel):
        x0 = SpacePoint(random_point(cfg.depth, rng), S.height)
    else:
        x0 = S.points[0]
    radii = [Dyadic.parse(r) for r in cfg.params["radii"].split(",")]
    found = porosity_search(S, x0, radii, int(cfg.params["budget"]), rng)
    rep = ScanReport(["set", "subject", "radius", "best_ratio", "witness",
                      "dist_to_set", "dist_to_subject"])
    for r, cert in found:
        rep.add(set=S, subject=x0, radius=r, best_ratio=cert.ratio if cert else 0,
                witness=cert.witness if cert else None,
                dist_to_set=cert.dist_to_set if cert else None,
                dist_to_subject=cert.dist_to_subject if cert else None)
    return rep


def run_gamma(cfg: ExperimentConfig, rng) -> ScanReport:
    x = _point(cfg.params, "center", cfg.depth, rng)
    res = measure_porosity_gamma(x, Dyadic.parse(_required(cfg.params, "radius")),
                                 as_rational(cfg.params["delta"]), int(cfg.params["budget"]), rng,
                                 resolution=int(cfg.params["resolution"]))
    rep = ScanReport(["center", "radius", "delta", "gamma", "gamma_over_r", "z",
                      "measure_zs", "measure_xr", "verified"])
    rep.add(center=x, radius=res.radius, delta=res.delta, gamma=res.gamma,
            gamma_over_r=res.gamma / res.radius, z=res.z, measure_zs=res.measure_zs,
            measure_xr=res.measure_xr, verified=res.verify())
    return rep


def _parse_increments(text: str):
    out = []
    for item in text.split(";"):
        if not item.strip():
            continue
        vec, _, d = item.rpartition(":")
        if not vec:
            raise DomainError(f"increment {item!r} needs the form dphi:d")
        out.append(([float(as_rational(v)) for v in vec.split(",")], float(as_rational(d))))
    return out


def run_uniqueness(cfg: ExperimentConfig, rng) -> ScanReport:
    incs = _parse_increments(_required(cfg.params, "increments"))
    n = int(cfg.params["dim"])
    lam = chart_uniqueness_lambda(incs, n, grid=int(cfg.params["grid"]))
    rep = ScanReport(["dim", "increments", "lambda", "grid_error"])
    rep.add(dim=n, increments=len(incs), **{"lambda": lam.value}, grid_error=lam.grid_error)
    return rep


def run_selftest(cfg: ExperimentConfig, rng) -> ScanReport:
    from .selftest import run_checks

    if cfg.depth > 5:
        raise PreconditionError("selftest enumerates islands and needs depth <= 5")
    rep = run_checks(cfg.depth, int(cfg.params["pairs"]), int(cfg.params["balls"]),
                     int(cfg.params["membership"]), rng)
    return rep


RUNNERS = {
    "distance": run_distance,
    "ball": run_ball,
    "nondoubling": run_nondoubling,
    "cover": run_cover,
    "approxdiff": run_approxdiff,
    "porosity": run_porosity,
    "gamma": run_gamma,
    "uniqueness": run_uniqueness,
    "selftest": run_selftest,
}


def execute(cfg: ExperimentConfig, timestamp: bool = False) -> ScanReport:
    """Run an experiment and attach reproducibility metadata."""
    rng = np.random.default_rng(cfg.seed)
    rep = RUNNERS[cfg.kind](cfg, rng)
    meta = {
        "kind": cfg.kind,
        "paper_ref": PAPER_REFS[cfg.kind],
        "depth": cfg.depth,
        "seed": cfg.seed,
        "params": dict(sorted(cfg.params.items())),
        "version": __version__,
    }
    if timestamp:
        meta["timestamp"] = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    rep.metadata = {**meta, **rep.metadata}
    return rep


def write_report(rep: ScanReport, out: str | None, stdout=None) -> None:
    if out is None:
        (stdout or sys.stdout).write(rep.to_csv())
        return
    prefix = Path(out)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    Path(f"{prefix}.csv").write_text(rep.to_csv(), encoding="utf-8")
    Path(f"{prefix}.json").write_text(rep.to_json(), encoding="utf-8")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="jumpspace", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="kind", required=True)
    for kind in KINDS:
        sp = sub.add_parser(kind, help=PAPER_REFS[kind])
        sp.add_argument("--config", help="flat key = value config file")
        sp.add_argument("--depth", type=int, help=f"truncation depth N (default {KIND_DEPTH.get(kind, DEFAULT_DEPTH)})")
        sp.add_argument("--seed", type=int, help="master seed (default 0)")
        sp.add_argument("--out", help="write PREFIX.csv and PREFIX.json instead of CSV on stdout")
        sp.add_argument("--timestamp", action="store_true", help="record wall-clock time in the JSON")
        for name, (default, text) in PARAMS[kind].items():
            suffix = f" (default {default})" if default is not None else ""
            sp.add_argument(f"--{name}", dest=f"p_{name}", help=text + suffix)
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    values: dict[str, str] = {}
    if args.config:
        file_values = parse_config_text(Path(args.config).read_text(encoding="utf-8"))
        file_kind = file_values.pop("kind", args.kind)
        if file_kind != args.kind:
            raise DomainError(f"config is for {file_kind!r}, not {args.kind!r}")
        values.update(file_values)
    for key in ("depth", "seed", "out"):
        if getattr(args, key) is not None:
            values[key] = str(getattr(args, key))
    for name in PARAMS[args.kind]:
        v = getattr(args, f"p_{name}")
        if v is not None:
            values[name] = v
    return ExperimentConfig.from_mapping(args.kind, values)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        rep = execute(cfg, timestamp=args.timestamp)
        write_report(rep, cfg.out)
    except (PreconditionError, DomainError) as exc:
        print(f"jumpspace {args.kind}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"jumpspace {args.kind}: {exc}", file=sys.stderr)
        return 2
    except Exception:
        traceback.print_exc()
        return 1
    if cfg.kind == "selftest" and not all(rep.column("passed")):
        print("jumpspace selftest: some checks failed", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
