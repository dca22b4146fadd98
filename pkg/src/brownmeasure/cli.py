"""Command-line interface.

Every subcommand reads a measure-spec JSON file (or inline JSON), runs one
part of the pipeline and writes its results under ``--out``. All files carry
the run configuration and the library version. Exit status is 0 on success,
1 on a numerical failure and 2 on a usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from . import __version__
from . import brown_map as bm
from . import cauchy_oracle as co
from . import hj_characteristics as hj
from . import rmt_lab
from . import subordination as sb
from .errors import BrownMeasureError
from .measure_core import MeasureSpec
from .svg import density_svg, scatter_svg

EXIT_OK, EXIT_NUMERIC, EXIT_USAGE = 0, 1, 2
FORMATS = ("csv", "json", "svg")


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    measure_path: Optional[str]
    alpha: float
    beta: float
    t: Optional[float]
    window: Optional[tuple]
    resolution: int
    output_dir: str
    seed: int
    format: str
    n: Optional[int] = None
    lambda0: Optional[str] = None
    eps0: Optional[float] = None
    inject_v_error: float = 0.0

    def __post_init__(self):
        if self.resolution < 16:
            raise UsageError("--resolution must be at least 16")
        if self.window is not None and not self.window[1] > self.window[0]:
            raise UsageError(f"empty window {self.window}")
        if self.format not in FORMATS:
            raise UsageError(f"--format must be one of {FORMATS}")

    @property
    def params(self):
        return bm.EllipticParams(self.alpha, self.beta)

    def to_dict(self):
        # the output location is left out so reruns elsewhere are byte-identical
        d = asdict(self)
        del d["output_dir"]
        d["window"] = list(self.window) if self.window else None
        return d


def _provenance(config):
    return {"version": __version__, "config": config.to_dict()}


def _header_lines(config):
    return [f"brownmeasure {__version__}", "config " + json.dumps(config.to_dict(), sort_keys=True)]


def _path(config, name):
    os.makedirs(config.output_dir, exist_ok=True)
    return os.path.join(config.output_dir, name)


def _write_json(config, name, payload):
    data = dict(payload)
    data.update(_provenance(config))
    path = _path(config, name)
    with open(path, "w") as fh:
        json.dump(_jsonable(data), fh, indent=2, sort_keys=True)
    return path


def _write_table(config, name, columns, rows):
    path = _path(config, name)
    with open(path, "w") as fh:
        for line in _header_lines(config):
            fh.write(f"# {line}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(repr(float(x)) for x in row) + "\n")
    return path


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _load_measure(config):
    src = config.measure_path
    if src is None:
        raise UsageError("--measure is required")
    try:
        if src.lstrip().startswith("{"):
            return MeasureSpec.from_json(src)
        return MeasureSpec.load(src)
    except FileNotFoundError:
        raise UsageError(f"measure file not found: {src}") from None
    except (ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"bad measure spec: {exc}") from None


# -- subcommands -------------------------------------------------------------


def cmd_density(config):
    measure = _load_measure(config)
    field = bm.density_field(measure, config.params, config.resolution, config.window)
    written = []
    if config.format == "json":
        payload = field.sidecar()
        payload.update({"u0": field.u0_grid, "u": field.u_grid, "phi": field.phi, "w": field.w})
        written.append(_write_json(config, "density.json", payload))
    else:
        written.append(_write_table(config, "density.csv", ["u0", "u", "phi", "w"], field.rows()))
        written.append(_write_json(config, "density.sidecar.json", field.sidecar()))
    if config.format == "svg":
        svg = density_svg(field.u_grid, field.phi, field.w, meta=_provenance(config))
        written.append(_write_text(config, "density.svg", svg))
    return written


def _write_text(config, name, text):
    path = _path(config, name)
    with open(path, "w") as fh:
        fh.write(text)
    return path


def cmd_boundary(config):
    measure = _load_measure(config)
    p = config.params
    window = config.window or bm.default_window(measure, p.s)
    lo, hi = window
    comps = sb.support_components(measure, p.s, (lo, hi, (hi - lo) / 400))
    center, scale = measure.center_scale()
    scale = max(scale, math.sqrt(p.s))
    rows = []
    last = len(comps.intervals) - 1
    for k, (a, b) in enumerate(comps.intervals):
        open_lo = k == 0 and comps.unbounded_below
        open_hi = k == last and comps.unbounded_above
        nodes, _, _ = sb.component_nodes(a, b, config.resolution, not open_lo, not open_hi, center, scale)
        guess = None
        for x in nodes:
            smp = bm.sample_at(measure, p, x, guess)
            guess = smp.v if smp.v > 0 else None
            rows.append((k, smp.u0, smp.v, smp.u, smp.phi))
    columns = ["component", "u0", "v", "u", "phi"]
    if config.format == "json":
        payload = {c: [r[i] for r in rows] for i, c in enumerate(columns)}
        payload["components_u0"] = [list(c) for c in comps.intervals]
        return [_write_json(config, "boundary.json", payload)]
    return [_write_table(config, "boundary.csv", columns, rows)]


def cmd_convolve(config):
    measure = _load_measure(config)
    t = config.t if config.t is not None else config.params.s
    table = sb.convolution_table(measure, t, config.resolution, config.window)
    summary = {"t": t, "mass": table.mass, "tail_mass": table.tail_mass,
               "max_density": float(table.density.max())}
    if config.format == "json":
        summary.update({"u": table.u, "x": table.x, "density": table.density})
        return [_write_json(config, "convolve.json", summary)]
    rows = zip(table.u, table.x, table.density)
    return [_write_table(config, "convolve.csv", ["u", "x", "density"], rows),
            _write_json(config, "convolve.summary.json", summary)]


def cmd_pushforward(config):
    measure = _load_measure(config)
    p = config.params
    field = bm.density_field(measure, p, config.resolution, config.window)
    rows = []
    for u0, u, phi in zip(field.u0_grid, field.u_grid, field.phi):
        v = phi / p.height_ratio
        q = bm.pushforward_Q_via_psi(measure, p, u) if phi > 0 else math.nan
        rows.append((u0, v, u, phi, q))
    columns = ["u0", "v_s", "U_re", "U_height", "Q"]
    if config.format == "json":
        return [_write_json(config, "pushforward.json",
                            {c: [r[i] for r in rows] for i, c in enumerate(columns)})]
    return [_write_table(config, "pushforward.csv", columns, rows)]


def _parse_complex(text):
    try:
        return complex(text.replace(" ", ""))
    except ValueError:
        raise UsageError(f"cannot parse complex number {text!r}") from None


def cmd_characteristics(config):
    measure = _load_measure(config)
    lam0 = _parse_complex(config.lambda0 or "0")
    eps0 = config.eps0 if config.eps0 is not None else 1.0
    tstar = hj.lifetime_tstar(measure, lam0, eps0)
    t_end = min(config.t, tstar) if config.t is not None else tstar
    times = np.linspace(0.0, t_end, config.resolution)
    states = hj.path(measure, lam0, eps0, times)
    s0 = hj.hj_value(measure, lam0, eps0, 0.0)
    rows = [st.as_row() + (s0.s_value + st.t * s0.h0,) for st in states]
    columns = ["t", "u", "v", "eps", "p_u", "p_v", "p_eps", "s_value"]
    if config.format == "json":
        payload = {c: [r[i] for r in rows] for i, c in enumerate(columns)}
        payload.update({"tstar": tstar, "h0": s0.h0})
        return [_write_json(config, "characteristics.json", payload)]
    return [_write_table(config, "characteristics.csv", columns, rows)]


def cmd_simulate(config):
    measure = _load_measure(config)
    p = config.params
    n = config.n or 200
    cloud = rmt_lab.simulate(measure, p, n, config.seed)
    field = bm.density_field(measure, p, config.resolution, config.window)
    cmp = rmt_lab.cloud_vs_density(cloud, field)
    report = {"n": n, "seeds": cloud.seed_record, "backward_error": cloud.backward_error,
              "tv_distance": cmp.tv_distance, "clipped_fraction": cmp.clipped_fraction,
              "comparison": cmp.report()}
    path_csv = _path(config, "eigenvalues.csv")
    cloud.write_csv(path_csv, _header_lines(config) + ["seeds " + json.dumps(cloud.seed_record)])
    written = [path_csv, _write_json(config, "simulate.report.json", report)]
    if config.format == "svg":
        svg = scatter_svg(cloud.eigenvalues, field.u_grid, field.phi, cmp.box, meta=_provenance(config))
        written.append(_write_text(config, "simulate.svg", svg))
    return written


def validation_suite(resolution=200):
    """Oracle-vs-pipeline checks for the standard Cauchy law.

    Returns a list of ``(name, formula, max_residual, threshold)``. A check
    whose pipeline raises reports an infinite residual.
    """
    m = MeasureSpec.cauchy()
    grid = np.linspace(-10.0, 10.0, resolution)
    checks = []

    def run(name, formula, threshold, fn):
        try:
            resid = float(fn())
        except BrownMeasureError as exc:
            resid = math.inf
            formula = f"{formula} [pipeline error: {type(exc).__name__}]"
        checks.append((name, formula, resid, threshold))

    def peak():
        return max(abs(sb.v_t(m, t, 0.0).v - co.peak_height(t)) for t in (0.25, 1.0, 4.0))

    def cubic():
        return max(abs(sb.v_t(m, 1.0, u).v - co.cauchy_v(1.0, u)) for u in grid)

    def psi():
        return max(abs(sb.psi_t(m, 1.0, u) - co.psi(1.0, u)) for u in grid)

    def fmap():
        p = bm.EllipticParams(1 / 8, 7 / 8)
        return max(abs(bm.f_ab(m, p, u) - co.f_map(p.alpha, p.beta, u)) for u in grid)

    def dens(alpha, beta, ref):
        p = bm.EllipticParams(alpha, beta)
        return max(abs(bm.brown_density(m, p, u) - ref(u)) for u in grid)

    def phi():
        p = bm.EllipticParams(0.0, 1.0)
        return max(abs(bm.phi_ab(m, p, u) - co.isigma_phi(1.0, u)) for u in np.linspace(-20, 20, resolution))

    def elliptic_boundary():
        p = bm.EllipticParams(1 / 8, 7 / 8)
        worst = 0.0
        for u in grid:
            b = bm.phi_ab(m, p, u)
            worst = max(worst, abs(co.elliptic_boundary_u2(p.alpha, p.beta, b) - u * u) / max(1.0, u * u))
        return worst

    def spacing():
        p = bm.EllipticParams(1 / 8, 7 / 8)
        u0, _ = co.spacing_zero(1.0)
        return abs(bm.spacing_inflection(m, p, 2.0, 3.0) - u0)

    run("boundary_peak", "v_t(0) = (-1 + sqrt(1 + 4t))/2, t in {1/4, 1, 4}", 1e-10, peak)
    run("boundary_cubic", "v u^2 = (1 + v)(t - v - v^2), t = 1", 1e-10, cubic)
    run("subordination_psi", "psi_t(u) = u + u v/(1 + v), t = 1", 1e-9, psi)
    run("boundary_map_f", "f(u0) = u0 + ((a - b)/s) u0 v/(1 + v), a = 1/8, b = 7/8", 1e-9, fmap)
    run("circular_density", "w = (t + 4v^2(1+v)^2) / (2 pi t (1+v)(t + 2v^2(1+v))), t = 1", 1e-8,
        lambda: dens(0.5, 0.5, lambda u: co.circular_density(1.0, u)))
    run("elliptic_density", "w_{a,b} rational in the boundary height b(u), a = 1/8, b = 7/8", 1e-8,
        lambda: dens(1 / 8, 7 / 8, lambda u: co.elliptic_density(1 / 8, 7 / 8, u)))
    run("imaginary_density", "w_t = (4t + (1+u^2)^2) / (4 pi t (1+u^2)^{3/2} sqrt(u^2+1+4t)), t = 1", 1e-8,
        lambda: dens(0.0, 1.0, lambda u: co.isigma_density(1.0, u)))
    run("imaginary_boundary", "phi = 4t / (sqrt(u^2+1)(sqrt(u^2+1) + sqrt(u^2+1+4t))), |u| <= 20", 1e-9, phi)
    run("elliptic_boundary", "u^2 = (b a + B)^2 (4B^2 - 2bB - b^2 s) / (b B^2 (b s + 2B)), relative", 1e-9,
        elliptic_boundary)
    run("spacing_zero", "f'' = 0 where 4v(1+v)(1 + 3v(1+v)) = s, s = 1", 1e-3, spacing)
    return checks


def cmd_validate_cauchy(config):
    with sb.injected_v_error(config.inject_v_error):
        checks = validation_suite(min(config.resolution, 200))
    entries = [
        {"name": n, "formula": f, "max_residual": r if math.isfinite(r) else None,
         "threshold": th, "passed": bool(r <= th)}
        for n, f, r, th in checks
    ]
    report = {"passed": all(e["passed"] for e in entries), "checks": entries}
    path = _write_json(config, "validate-cauchy.json", report)
    for e in entries:
        flag = "PASS" if e["passed"] else "FAIL"
        res = "error" if e["max_residual"] is None else f"{e['max_residual']:.3e}"
        print(f"{flag} {e['name']}: max residual {res} (threshold {e['threshold']:.0e})")
        if not e["passed"]:
            print(f"     formula: {e['formula']}")
    if not report["passed"]:
        raise _ValidationFailed(path)
    return [path]


class _ValidationFailed(Exception):
    pass


COMMANDS = {
    "density": cmd_density,
    "boundary": cmd_boundary,
    "convolve": cmd_convolve,
    "pushforward": cmd_pushforward,
    "characteristics": cmd_characteristics,
    "simulate": cmd_simulate,
    "validate-cauchy": cmd_validate_cauchy,
}


def _window(text):
    try:
        lo, hi = (float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("window must be 'lower,upper'") from None
    return lo, hi


def build_parser():
    parser = argparse.ArgumentParser(
        prog="brownmeasure",
        description="Brown measures of x0 + c_{alpha,beta} from the law of x0.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--measure", help="measure-spec JSON file, or inline JSON")
        sp.add_argument("--alpha", type=float, default=0.0)
        sp.add_argument("--beta", type=float, default=1.0)
        sp.add_argument("--t", type=float, default=None)
        sp.add_argument("--window", type=_window, default=None, help="lower,upper")
        sp.add_argument("--resolution", type=int, default=201)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", default=".")
        sp.add_argument("--format", choices=FORMATS, default="csv")
        if name == "simulate":
            sp.add_argument("--n", type=int, default=200)
        if name == "characteristics":
            sp.add_argument("--lambda0", default="0", help="start point, e.g. 0.5+0.2j")
            sp.add_argument("--eps0", type=float, default=1.0)
        if name == "validate-cauchy":
            sp.add_argument("--inject-v-error", type=float, default=0.0,
                            help="relative error added to v_t (fault injection)")
    return parser


def _glue_window(argv):
    # argparse reads "-5,5" as an option, so attach the value to its flag
    out, it = [], iter(argv)
    for arg in it:
        if arg == "--window":
            out.append("--window=" + next(it, ""))
        else:
            out.append(arg)
    return out


def main(argv=None):
    parser = build_parser()
    argv = _glue_window(sys.argv[1:] if argv is None else list(argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    try:
        config = RunConfig(
            command=args.command,
            measure_path=args.measure,
            alpha=args.alpha,
            beta=args.beta,
            t=args.t,
            window=args.window,
            resolution=args.resolution,
            output_dir=args.out,
            seed=args.seed,
            format=args.format,
            n=getattr(args, "n", None),
            lambda0=getattr(args, "lambda0", None),
            eps0=getattr(args, "eps0", None),
            inject_v_error=getattr(args, "inject_v_error", 0.0),
        )
        if args.command != "validate-cauchy" and args.command != "convolve":
            config.params
        written = COMMANDS[args.command](config)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except _ValidationFailed as exc:
        print(f"validation failed; report at {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except BrownMeasureError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    for path in written:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
