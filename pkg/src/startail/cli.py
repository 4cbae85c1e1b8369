"""Command-line front end.

Usage::

    startail COMMAND [--config FILE] [--key value ...]

Every setting is a dotted key (``shape.kind``, ``generator.theta``,
``experiment.n``, ``run.seed`` ...). A config file holds ``key = value``
lines; command-line ``--key value`` pairs override it. On the command line a
key may be shortened to any unique suffix (``--p`` for ``shape.p``,
``--seed`` for ``run.seed``), and ``--shape``, ``--density``,
``--generator`` set the corresponding ``.kind``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import io
import json
import math
import os
import sys
from dataclasses import dataclass
from typing import Any, Callable

import numpy as np

from . import __version__
from .clouds import (
    convergence_report,
    coordinatewise_max,
    frechet_fit,
    make_cloud,
    pareto_edge,
    positivity_partition_check,
)
from .density import (
    ComonotoneGaussian,
    HomotheticDensity,
    MetaTDensity,
    SkewNormalDensity,
    SlicedTriangleDensity,
    gaussian,
    pareto_disk,
)
from .errors import ConfigError, NumericError, StartailError
from .estimators import lambda_u_curve, overlap_probability, record_probability, sum_criterion
from .generators import ParetoGenerator, WeibullGenerator
from .parallel import set_default_threads
from .shapes import (
    Ellipsoid,
    LpBall,
    MetaTShape,
    OffCenterBall,
    PolytopeShape,
    SkewLimitShape,
    triangle,
)
from .svg import cloud_svg

COMMANDS = (
    "shape-info",
    "blunt",
    "sample",
    "cloud",
    "lambda",
    "sum",
    "record",
    "overlap",
    "heavy",
    "figure1a",
    "figure1b",
)

# -- value parsers ---------------------------------------------------------------


def _number(text: str) -> float:
    t = text.strip().lower()
    if t in ("inf", "+inf", "infinity"):
        return math.inf
    v = float(t)
    if math.isnan(v):
        raise ValueError("NaN is not allowed")
    return v


def _int(lo: int):
    def parse(text):
        v = _number(text)
        if not math.isfinite(v) or v != int(v):
            raise ValueError("expected an integer")
        if v < lo:
            raise ValueError(f"must be >= {lo}")
        return int(v)

    return parse


def _real(lo=-math.inf, hi=math.inf, lo_open=True, hi_open=True, allow_inf=False):
    def parse(text):
        v = _number(text)
        if math.isinf(v) and not allow_inf:
            raise ValueError("must be finite")
        if v < lo or (lo_open and v == lo) or v > hi or (hi_open and v == hi and not math.isinf(v)):
            lb, rb = "(" if lo_open else "[", ")" if hi_open else "]"
            raise ValueError(f"must lie in {lb}{lo:g}, {hi:g}{rb}")
        return v

    return parse


def _choice(*options):
    def parse(text):
        t = text.strip()
        if t not in options:
            raise ValueError(f"must be one of {', '.join(options)}")
        return t

    return parse


def _vector(text) -> tuple[float, ...]:
    parts = [p for p in text.replace(" ", "").split(",") if p]
    if not parts:
        raise ValueError("empty vector")
    v = tuple(_number(p) for p in parts)
    if not all(math.isfinite(x) for x in v):
        raise ValueError("vector entries must be finite")
    return v


def _int_list(text) -> tuple[int, ...]:
    v = _vector(text)
    if any(x != int(x) or x < 2 for x in v):
        raise ValueError("expected integers >= 2")
    return tuple(int(x) for x in v)


def _unit_list(text) -> tuple[float, ...]:
    v = _vector(text)
    if any(not 0 < x < 1 for x in v):
        raise ValueError("levels must lie in (0, 1)")
    return v


def _matrix(text) -> tuple[tuple[float, ...], ...]:
    rows = tuple(_vector(r) for r in text.split(";") if r.strip())
    if not rows or len({len(r) for r in rows}) != 1:
        raise ValueError("matrix rows must have equal length")
    return rows


def _text(text) -> str:
    t = text.strip()
    if not t:
        raise ValueError("empty value")
    return t


def _fmt_value(v) -> str:
    if isinstance(v, tuple) and v and isinstance(v[0], tuple):
        return "; ".join(_fmt_value(r) for r in v)
    if isinstance(v, tuple):
        return ", ".join(_fmt_value(x) for x in v)
    if isinstance(v, float):
        return "inf" if math.isinf(v) else repr(v)
    return str(v)


@dataclass(frozen=True)
class Key:
    parse: Callable[[str], Any]
    default: Any = None
    help: str = ""


SCHEMA: dict[str, Key] = {
    "shape.kind": Key(_choice("lp", "ellipsoid", "offcenter", "polytope", "triangle", "skew_limit", "meta_t"), "lp"),
    "shape.p": Key(_real(1.0, math.inf, lo_open=False, allow_inf=True), 2.0, "l_p exponent, 1..inf"),
    "shape.dim": Key(_int(1), 2),
    "shape.sigma": Key(_matrix, None, "rows separated by ';'"),
    "shape.beta": Key(_vector),
    "shape.vertices": Key(_matrix, None, "polygon vertices 'x,y; x,y; ...'"),
    "shape.omega": Key(_matrix),
    "shape.alpha": Key(_vector),
    "shape.lambda": Key(_real(0.0), 1.0),
    "generator.kind": Key(_choice("weibull", "pareto"), "weibull"),
    "generator.theta": Key(_real(0.0), 2.0),
    "generator.kappa": Key(_real(0.0), math.sqrt(2.0)),
    "generator.lambda": Key(_real(0.0), 1.0),
    "density.kind": Key(
        _choice(
            "homothetic", "gaussian", "independent", "pareto_disk", "skew_normal", "meta_t", "sliced_triangle", "comonotone"
        ),
        "homothetic",
    ),
    "density.rho": Key(_real(-1.0, 1.0), 0.0),
    "density.lambda": Key(_real(0.0), 1.0),
    "density.omega": Key(_matrix),
    "density.alpha": Key(_vector),
    "experiment.n": Key(_int(1)),
    "experiment.trials": Key(_int(1)),
    "experiment.k": Key(_int(1), 5),
    "experiment.n_list": Key(_int_list, (100, 1000, 10000)),
    "experiment.n_big": Key(_int(1000), 10**6),
    "experiment.q_grid": Key(_unit_list, (0.9, 0.99, 0.999)),
    "experiment.eps": Key(_real(0.0), 0.15),
    "experiment.probe_radius": Key(_real(0.0)),
    "experiment.n_probes": Key(_int(1)),
    "experiment.m_min": Key(_int(1), 3),
    "experiment.s_n": Key(_real(0.0)),
    "experiment.tol": Key(_real(0.0), 1e-3),
    "experiment.i": Key(_int(0), 0),
    "experiment.j": Key(_int(0), 1),
    "experiment.n_mc": Key(_int(1000), 10**6),
    "experiment.hide_below": Key(_real(0.0, 1.0), 0.8),
    "run.seed": Key(_int(0), 0),
    "run.threads": Key(_int(1), 1),
    "run.out_dir": Key(_text),
    "run.format": Key(_choice("csv", "json", "svg"), "json"),
}

GROUP_ALIASES = {"shape": "shape.kind", "density": "density.kind", "generator": "generator.kind"}

COMMAND_DEFAULTS: dict[str, dict[str, Any]] = {
    "sample": {"experiment.n": 1000, "run.format": "csv"},
    "cloud": {"experiment.n": 10**5},
    "lambda": {},
    "sum": {},
    "record": {"experiment.n": 100, "experiment.trials": 10**4},
    "overlap": {"experiment.n": 100, "experiment.trials": 10**4},
    "heavy": {"density.kind": "pareto_disk", "experiment.n": 10**4, "experiment.trials": 1000},
    "figure1a": {"density.kind": "gaussian", "density.rho": 0.1, "experiment.n": 10**5, "experiment.probe_radius": 0.25},
    "figure1b": {"density.kind": "meta_t", "density.lambda": 1.0, "experiment.n": 10**5, "experiment.probe_radius": 0.25},
}


class Config:
    """Validated settings; ``values`` holds only explicitly given keys."""

    def __init__(self, values: dict[str, Any] | None = None, command: str | None = None):
        self.values = dict(values or {})
        self.command = command

    def __getitem__(self, key: str):
        if key in self.values:
            return self.values[key]
        cmd = COMMAND_DEFAULTS.get(self.command or "", {})
        if key in cmd:
            return cmd[key]
        return SCHEMA[key].default

    def require(self, key: str):
        v = self[key]
        if v is None:
            raise ConfigError(f"{key}: required for this command")
        return v

    def __eq__(self, other):
        return isinstance(other, Config) and self.values == other.values

    def dump(self) -> str:
        return "".join(f"{k} = {_fmt_value(v)}\n" for k, v in sorted(self.values.items()))


def _set(values: dict, key: str, raw: str, where: str) -> None:
    if key not in SCHEMA:
        raise ConfigError(f"{where}: unknown key '{key}'")
    try:
        values[key] = SCHEMA[key].parse(raw)
    except ValueError as exc:
        raise ConfigError(f"{where}: invalid value {raw!r} for {key}: {exc}") from None


def parse_config_text(text: str, source: str = "<config>") -> Config:
    """Parse ``key = value`` lines; errors name ``source:line``."""
    values: dict[str, Any] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        where = f"{source}:{lineno}"
        if "=" not in body:
            raise ConfigError(f"{where}: expected 'key = value'")
        key, raw = (s.strip() for s in body.split("=", 1))
        if key in values:
            raise ConfigError(f"{where}: duplicate key '{key}'")
        _set(values, key, raw, where)
    return Config(values)


def resolve_flag(name: str) -> str:
    """Map a command-line flag name to its dotted key."""
    name = name.replace("-", "_")
    if name in SCHEMA:
        return name
    if name in GROUP_ALIASES:
        return GROUP_ALIASES[name]
    matches = [k for k in SCHEMA if k.endswith("." + name)]
    if len(matches) == 1:
        return matches[0]
    if matches:
        raise ConfigError(f"--{name}: ambiguous, use one of {', '.join(matches)}")
    raise ConfigError(f"--{name}: unknown key")


def parse_args(argv: list[str]) -> tuple[str, Config]:
    if not argv or argv[0] in ("-h", "--help"):
        raise ConfigError(f"usage: startail COMMAND [--config FILE] [--key value ...]; commands: {', '.join(COMMANDS)}")
    command, rest = argv[0], argv[1:]
    if command not in COMMANDS:
        raise ConfigError(f"argv:1: unknown command '{command}'")
    overrides: list[tuple[str, str, str]] = []
    config_path = None
    i = 0
    while i < len(rest):
        tok = rest[i]
        pos = i + 2
        if not tok.startswith("--") or len(tok) == 2:
            raise ConfigError(f"argv:{pos}: expected --key, got {tok!r}")
        name, eq, val = tok[2:].partition("=")
        if not eq:
            if i + 1 >= len(rest):
                raise ConfigError(f"argv:{pos}: missing value for --{name}")
            val = rest[i + 1]
            i += 1
        i += 1
        if name == "config":
            config_path = val
        else:
            overrides.append((name, val, f"argv:{pos}"))
    if config_path is not None:
        try:
            with open(config_path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"{config_path}:0: cannot read config: {exc.strerror}") from None
        cfg = parse_config_text(text, config_path)
    else:
        cfg = Config()
    for name, val, where in overrides:
        try:
            key = resolve_flag(name)
        except ConfigError as exc:
            raise ConfigError(f"{where}: {exc}") from None
        _set(cfg.values, key, val, where)
    cfg.command = command
    return command, cfg


# -- model construction ----------------------------------------------------------


def _square(m, name):
    a = np.asarray(m, dtype=float)
    if a.shape[0] != a.shape[1]:
        raise ConfigError(f"{name}: matrix must be square")
    return a


def build_shape(cfg: Config):
    kind = cfg["shape.kind"]
    if kind == "lp":
        return LpBall(cfg["shape.p"], cfg["shape.dim"])
    if kind == "ellipsoid":
        return Ellipsoid(_square(cfg.require("shape.sigma"), "shape.sigma"))
    if kind == "offcenter":
        return OffCenterBall(cfg.require("shape.beta"))
    if kind == "polytope":
        return PolytopeShape.from_vertices(cfg.require("shape.vertices"))
    if kind == "triangle":
        return triangle()
    if kind == "skew_limit":
        alpha = cfg.require("shape.alpha")
        omega = cfg["shape.omega"]
        return SkewLimitShape(np.eye(len(alpha)) if omega is None else _square(omega, "shape.omega"), alpha)
    return MetaTShape(cfg["shape.lambda"])


def build_generator(cfg: Config, dim: int):
    if cfg["generator.kind"] == "weibull":
        return WeibullGenerator(cfg["generator.theta"], cfg["generator.kappa"])
    return ParetoGenerator(cfg["generator.lambda"], dim)


def build_density(cfg: Config):
    kind = cfg["density.kind"]
    if kind == "homothetic":
        shape = build_shape(cfg)
        return HomotheticDensity(shape, build_generator(cfg, shape.dim))
    if kind == "gaussian":
        return gaussian(cfg["density.rho"])
    if kind == "independent":
        return gaussian(0.0)
    if kind == "pareto_disk":
        return pareto_disk(cfg["density.lambda"])
    if kind == "skew_normal":
        alpha = cfg["density.alpha"] or (-1.0, 3.0)
        omega = cfg["density.omega"]
        return SkewNormalDensity(np.eye(len(alpha)) if omega is None else _square(omega, "density.omega"), alpha)
    if kind == "meta_t":
        return MetaTDensity(cfg["density.lambda"])
    if kind == "sliced_triangle":
        return SlicedTriangleDensity()
    return ComonotoneGaussian()


# -- output ----------------------------------------------------------------------


def to_json(obj) -> str:
    def default(o):
        if isinstance(o, np.ndarray):
            return o.tolist()
        if isinstance(o, np.generic):
            return o.item()
        raise TypeError(f"not serialisable: {type(o).__name__}")

    return json.dumps(obj, indent=2, sort_keys=True, default=default) + "\n"


def to_csv(arr, header: list[str] | None = None) -> str:
    """Comma-separated rows with 17 significant digits and LF endings."""
    arr = np.atleast_2d(np.asarray(arr, dtype=float))
    if header is None:
        header = [f"x{i + 1}" for i in range(arr.shape[1])]
    buf = io.StringIO()
    np.savetxt(buf, arr, fmt="%.17g", delimiter=",", header=",".join(header), comments="", newline="\n")
    return buf.getvalue()


class Output:
    def __init__(self, cfg: Config, command: str, stdout):
        self.dir = cfg["run.out_dir"]
        self.command = command
        self.stdout = stdout
        self.format = cfg["run.format"]

    def write(self, name: str, text: str, show: bool) -> None:
        if self.dir is not None:
            os.makedirs(self.dir, exist_ok=True)
            with open(os.path.join(self.dir, name), "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        if show:
            self.stdout.write(text)

    def emit(self, payload: dict, csv: str | None = None, svg: str | None = None) -> None:
        """Write every available representation; print the one selected by ``run.format``."""
        fmt = self.format
        if fmt == "csv" and csv is None or fmt == "svg" and svg is None:
            fmt = "json"
        self.write(f"{self.command}.json", to_json(payload), fmt == "json")
        if csv is not None:
            self.write(f"{self.command}.csv", csv, fmt == "csv")
        if svg is not None:
            self.write(f"{self.command}.svg", svg, fmt == "svg")


def _log(stage: str) -> None:
    print(f"[startail] {stage}", file=sys.stderr)


# -- commands --------------------------------------------------------------------


def _shape_payload(shape, cfg):
    a, b = shape.coordinate_extrema(cfg["experiment.tol"])
    payload = {
        "label": shape.label,
        "dim": shape.dim,
        "convex": shape.convex,
        "bounding_box": [list(map(float, shape.bounding_box[0])), list(map(float, shape.bounding_box[1]))],
        "extrema": {"inf": a.tolist(), "sup": b.tolist()},
        "exact_volume": shape.exact_volume(),
    }
    est, se = shape.volume(cfg["experiment.n_mc"], seed=cfg["run.seed"], threads=cfg["run.threads"])
    payload["volume_mc"] = {"estimate": est, "stderr": se}
    return payload


def cmd_shape_info(cfg, out):
    out.emit(_shape_payload(build_shape(cfg), cfg))


def cmd_blunt(cfg, out):
    shape = build_shape(cfg)
    res = shape.is_blunt(cfg["experiment.i"], cfg["experiment.j"], cfg["experiment.tol"])
    out.emit(res.to_dict())


def cmd_sample(cfg, out):
    dens = build_density(cfg)
    x = dens.sample(cfg.require("experiment.n"), seed=cfg["run.seed"], threads=cfg["run.threads"])
    out.emit({"density": dens.label, "n": len(x), "mean": x.mean(0), "seed": cfg["run.seed"]}, csv=to_csv(x))


def _light_cloud(cfg, dens):
    s_n = cfg["experiment.s_n"]
    return make_cloud(dens, cfg.require("experiment.n"), seed=cfg["run.seed"], s_n=s_n, threads=cfg["run.threads"])


def cmd_cloud(cfg, out):
    dens = build_density(cfg)
    cloud = _light_cloud(cfg, dens)
    shape = dens.limit_shape
    payload = {"density": dens.label, "n": cloud.n, "s_n": cloud.s_n}
    svg = None
    if shape is not None:
        rep = convergence_report(
            cloud, shape, cfg["experiment.eps"], cfg["experiment.n_probes"], cfg["experiment.m_min"], cfg["experiment.probe_radius"]
        )
        payload["convergence"] = rep.to_dict()
        if cloud.dim == 2:
            cmax, flag = coordinatewise_max(cloud)
            payload["coordinatewise_max"] = {"point": cmax, "is_sample_point": flag}
            svg = cloud_svg(cloud.scaled, shape, pareto_edge(cloud), cmax, title=dens.label, version=__version__)
    out.emit(payload, csv=to_csv(cloud.scaled), svg=svg)


def _big_sample(cfg, dens):
    return dens.sample(cfg["experiment.n_big"], seed=cfg["run.seed"], threads=cfg["run.threads"])


def cmd_lambda(cfg, out):
    dens = build_density(cfg)
    curve = lambda_u_curve(_big_sample(cfg, dens), cfg["experiment.q_grid"])
    table = np.column_stack([curve.q_grid, curve.lambda_hat, curve.ci, curve.n_effective])
    payload = {"density": dens.label, "lambda_u": curve.to_dict()}
    out.emit(payload, csv=to_csv(table, ["q", "lambda_hat", "ci_low", "ci_high", "n_effective"]))


def cmd_sum(cfg, out):
    dens = build_density(cfg)
    res = sum_criterion(dens, cfg["experiment.n_list"], cfg["experiment.n_big"], seed=cfg["run.seed"], threads=cfg["run.threads"])
    table = np.column_stack([res.n_list, res.s_hat, res.thresholds])
    out.emit({"density": dens.label, "sum_criterion": res.to_dict()}, csv=to_csv(table, ["n", "s_hat", "t1", "t2"]))


def cmd_record(cfg, out):
    dens = build_density(cfg)
    n = cfg.require("experiment.n")
    rec = record_probability(dens, n, cfg.require("experiment.trials"), seed=cfg["run.seed"], threads=cfg["run.threads"])
    payload = {"density": dens.label, "records": rec.to_dict(), "independent_baseline": 1.0 / n}
    table = np.array([[rec.n, rec.trials, rec.p_hat, rec.ci[0], rec.ci[1]]])
    out.emit(payload, csv=to_csv(table, ["n", "trials", "p_hat", "ci_low", "ci_high"]))


def cmd_overlap(cfg, out):
    dens = build_density(cfg)
    res = overlap_probability(
        dens, cfg.require("experiment.n"), cfg["experiment.k"], cfg.require("experiment.trials"),
        seed=cfg["run.seed"], threads=cfg["run.threads"],
    )
    out.emit({"density": dens.label, "overlap": res.to_dict()})


def cmd_heavy(cfg, out):
    dens = build_density(cfg)
    fit = frechet_fit(dens, cfg.require("experiment.n"), cfg.require("experiment.trials"), seed=cfg["run.seed"], threads=cfg["run.threads"])
    payload = {"density": dens.label, "frechet": fit.to_dict()}
    if dens.limit_shape is not None and dens.dim == 2:
        payload["positive_quadrant_meets_D"] = positivity_partition_check(dens.limit_shape)
    curve = lambda_u_curve(_big_sample(cfg, dens), (0.9, 0.99))
    payload["lambda_u"] = curve.to_dict()
    out.emit(payload)


def _figure(cfg, out, limit_shape):
    dens = build_density(cfg)
    n = cfg.require("experiment.n")
    s_n = cfg["experiment.s_n"] or math.sqrt(2.0 * math.log(n))
    _log(f"sampling {n} points from {dens.label}")
    cloud = make_cloud(dens, n, seed=cfg["run.seed"], s_n=s_n, threads=cfg["run.threads"])
    rep = convergence_report(
        cloud, limit_shape, cfg["experiment.eps"], cfg["experiment.n_probes"], cfg["experiment.m_min"], cfg["experiment.probe_radius"]
    )
    edge = pareto_edge(cloud, (1, 1))
    cmax, flag = coordinatewise_max(cloud)
    _log("rendering")
    svg = cloud_svg(
        cloud.scaled, limit_shape, edge, cmax, positive_quadrant=True,
        hide_below=cfg["experiment.hide_below"], title=dens.label, version=__version__,
    )
    payload = {
        "density": dens.label,
        "limit_set": limit_shape.label,
        "n": n,
        "s_n": s_n,
        "seed": cfg["run.seed"],
        "convergence": rep.to_dict(),
        "coordinatewise_max": {"point": cmax, "is_sample_point": flag},
        "edge_points": len(edge),
    }
    out.emit(payload, csv=to_csv(edge), svg=svg)


def cmd_figure1a(cfg, out):
    if cfg["density.kind"] != "gaussian":
        raise ConfigError("density.kind: figure1a uses the gaussian density")
    _figure(cfg, out, Ellipsoid.correlation(cfg["density.rho"]))


def cmd_figure1b(cfg, out):
    if cfg["density.kind"] != "meta_t":
        raise ConfigError("density.kind: figure1b uses the meta_t density")
    _figure(cfg, out, MetaTShape(cfg["density.lambda"]))


HANDLERS = {
    "shape-info": cmd_shape_info,
    "blunt": cmd_blunt,
    "sample": cmd_sample,
    "cloud": cmd_cloud,
    "lambda": cmd_lambda,
    "sum": cmd_sum,
    "record": cmd_record,
    "overlap": cmd_overlap,
    "heavy": cmd_heavy,
    "figure1a": cmd_figure1a,
    "figure1b": cmd_figure1b,
}


def run(argv: list[str], stdout=None, stderr=None) -> int:
    """Execute one command; returns the process exit code."""
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    try:
        command, cfg = parse_args(argv)
        set_default_threads(cfg["run.threads"])
        HANDLERS[command](cfg, Output(cfg, command, stdout))
    except ConfigError as exc:
        print(f"error: {exc}", file=stderr)
        return 2
    except NumericError as exc:
        print(f"numeric failure: {type(exc).__name__}: {exc}", file=stderr)
        return 3
    except (StartailError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=stderr)
        return 2
    return 0


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
