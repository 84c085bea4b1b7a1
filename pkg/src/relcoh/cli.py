"""Command-line front end: ``relcoh compute | sweep | verify``.

All numbers are dimensionless (see ``relcoh --explain-units``).  Exit codes:
0 success, 1 failed verification, 2 invalid input or setup error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from importlib import resources

import numpy as np

from . import canonical, checks, lorentzian, poincare
from .errors import ConvergenceError, DomainError

FAMILIES = ("canonical", "lorentzian", "poincare")
QUANTITIES = {
    "canonical": ("energy", "momentum", "velocity", "var_x", "var_p", "product_xp"),
    "lorentzian": ("energy", "momentum", "velocity", "var_x", "var_p", "var_v", "product_xp", "product_xv"),
    "poincare": ("energy", "momentum", "velocity", "var_x", "var_p", "product_xp"),
}
MASSLESS_QUANTITIES = ("energy", "velocity", "var_x", "var_p", "product_xp")

UNITS_TABLE = """\
Units (all input and output is dimensionless):

  r          sigma / lambda_c, packet width in Compton wavelengths (lambda_c = hbar / mc)
  xbar       mean position, units of sigma
  pbar       sigma pbar / hbar (canonical and poincare)
  sbar       sigma pbar / hbar for a massless particle
  beta       mean velocity / c (lorentzian), |beta| < 1

  energy     mc^2   (massless: c hbar / sigma)
  momentum   mc
  velocity   c
  var_x      (Delta x / sigma)^2            canonical value 0.5
  var_p      (sigma Delta p / hbar)^2       canonical value 0.5
  var_v      (Delta v / c)^2
  product_xp var_x * var_p, units hbar^2    canonical value 0.25
  product_xv var_x * var_v, units sigma^2 c^2

With --si --mass-mev M, compute additionally reports energy and momentum in
MeV and MeV/c, velocity in m/s, var_x in fm^2 and var_p in (MeV/c)^2.
"""


@dataclass(frozen=True)
class FigurePreset:
    family: str
    axis: str
    quantity: str


FIGURES = {
    1: FigurePreset("lorentzian", "beta", "var_x"),
    2: FigurePreset("lorentzian", "beta", "var_p"),
    3: FigurePreset("lorentzian", "beta", "product_xp"),
    4: FigurePreset("poincare", "pbar", "var_x"),
    5: FigurePreset("poincare", "pbar", "var_p"),
    6: FigurePreset("poincare", "pbar", "product_xp"),
}
FIGURE_R = 8.0
AXES = {"lorentzian": ("beta",), "poincare": ("pbar",), "canonical": ("pbar", "sbar")}


class UsageError(Exception):
    """Invalid input detected after argument parsing; exit code 2."""


# --- evaluation ---------------------------------------------------------------


def evaluate(family: str, r: float | None, xbar: float, label: float, quantities, *,
             massless: bool = False, method: str = "series") -> tuple[dict, dict]:
    """Values and method tags of the requested quantities for one state.

    ``label`` is sigma pbar / hbar (canonical, poincare; sbar if massless)
    or beta (lorentzian).
    """
    values, methods = {}, {}
    if family == "canonical":
        st = canonical.CanonicalState(xbar, label)
        scale = canonical.Scale.massless() if massless else canonical.Scale(r)
        d = canonical.moment_report(st, scale, method).as_dict()
    elif family == "lorentzian":
        st = lorentzian.LorentzianState(xbar, label, r)
        d = _lorentzian_partial(st, quantities)
    elif family == "poincare":
        st = poincare.PoincareState(xbar, label / r, r)
        d = _poincare_partial(st, quantities)
    else:
        raise UsageError(f"unknown family {family!r}")
    for q in quantities:
        if q not in d:
            raise UsageError(f"quantity {q!r} not available for family {family}")
        values[q] = d[q]
        methods[q] = d["methods"][q]
    return values, methods


def _lorentzian_partial(st, quantities):
    b, r = st.beta, st.r
    d, m = {}, {}
    if {"var_x", "var_v", "product_xp", "product_xv"} & set(quantities):
        vx, vv, pxv = lorentzian.variances_xv(b, r)
        d.update(var_x=vx, var_v=vv, product_xv=pxv)
        m.update(var_x="quadrature", var_v="quadrature", product_xv="quadrature")
    vp = lorentzian.momentum_variance(b, r) * r * r
    d.update(var_p=vp, energy=lorentzian.mean_energy(b, r), momentum=lorentzian.mean_momentum(b, r), velocity=b)
    m.update(var_p="closed_form", energy="closed_form", momentum="closed_form", velocity="closed_form")
    if "var_x" in d:
        d["product_xp"] = d["var_x"] * vp
        m["product_xp"] = "quadrature"
    d["methods"] = m
    return d


def _poincare_partial(st, quantities):
    r = st.r
    d, m = {}, {}
    d.update(energy=poincare.mean_energy(st), momentum=poincare.mean_momentum(st),
             var_p=poincare.momentum_variance(st) * r * r)
    m.update(energy="closed_form", momentum="closed_form", var_p="closed_form")
    if "velocity" in quantities:
        d["velocity"] = poincare.mean_velocity(st)
        m["velocity"] = "quadrature"
    if {"var_x", "product_xp"} & set(quantities):
        d["var_x"] = poincare.position_variance(st)
        d["product_xp"] = d["var_x"] * d["var_p"]
        m.update(var_x="quadrature", product_xp="quadrature")
    d["methods"] = m
    return d


def oracle_values(family, r, xbar, label, massless=False) -> dict:
    """Brute-force quadrature values of the same quantities (for --verify)."""
    if family == "canonical":
        st = canonical.CanonicalState(xbar, label)
        vx, vp, prod = canonical.uncertainty_product(st)
        out = dict(var_x=vx, var_p=vp, product_xp=prod)
        if massless:
            out["energy"] = canonical.mean_energy_massless_quadrature(label)
        else:
            out["energy"] = canonical.mean_energy_massive(label, r, "quadrature")
            out["velocity"] = canonical.mean_velocity(label, r, "quadrature")
            out["momentum"] = canonical.wavefunction(st).expectation(lambda k: k) / r
        return out
    if family == "lorentzian":
        q = lorentzian.quadrature_moments(lorentzian.LorentzianState(xbar, label, r))
        return dict(energy=q.energy, momentum=q.mean_p, velocity=q.mean_v, var_x=q.var_x,
                    var_v=q.var_v, var_p=q.var_p * r * r, product_xp=q.var_x * q.var_p * r * r,
                    product_xv=q.var_x * q.var_v)
    q = poincare.quadrature_moments(poincare.PoincareState(xbar, label / r, r))
    return dict(energy=q.energy, momentum=q.mean_p, velocity=q.velocity, var_x=q.var_x,
                var_p=q.var_p * r * r, product_xp=q.var_x * q.var_p * r * r)


def load_constants() -> dict:
    with resources.files("relcoh").joinpath("data/codata.json").open() as fh:
        return json.load(fh)


def to_si(values: dict, r: float, mass_mev: float) -> dict:
    k = load_constants()
    lam_c = k["hbar_c_MeV_fm"] / mass_mev          # fm
    sigma = r * lam_c                               # fm
    hbar_over_sigma = k["hbar_c_MeV_fm"] / sigma    # MeV/c
    conv = {
        "energy": ("MeV", mass_mev),
        "momentum": ("MeV/c", mass_mev),
        "velocity": ("m/s", k["speed_of_light_m_per_s"]),
        "var_x": ("fm^2", sigma**2),
        "var_p": ("(MeV/c)^2", hbar_over_sigma**2),
    }
    out = {"sigma_fm": sigma, "compton_wavelength_fm": lam_c}
    for name, (unit, f) in conv.items():
        if name in values:
            out[f"{name} [{unit}]"] = values[name] * f
    return out


# --- commands ----------------------------------------------------------------------


def _parse_list(text, allowed, what):
    items = [t.strip() for t in text.split(",") if t.strip()]
    bad = [t for t in items if t not in allowed]
    if bad or not items:
        raise UsageError(f"unknown {what} {', '.join(bad) or '(empty)'}; choose from {', '.join(allowed)}")
    return items


def cmd_compute(args, out=None) -> int:
    out = out or sys.stdout
    family = args.family
    massless = bool(args.massless)
    if massless:
        if family != "canonical":
            raise UsageError(f"{family} states need a massive particle; --massless is canonical only")
        if args.sbar is None:
            raise UsageError("--massless needs --sbar")
        label, r = args.sbar, None
        allowed = MASSLESS_QUANTITIES
    else:
        if args.r is None:
            raise UsageError("--r is required for massive states")
        if not (math.isfinite(args.r) and args.r > 0):
            raise UsageError(f"--r must be positive (sigma / lambda_c), got {args.r}")
        r = args.r
        allowed = QUANTITIES[family]
        if family == "lorentzian":
            if args.beta is None:
                raise UsageError("lorentzian states need --beta")
            if not abs(args.beta) < 1:
                raise UsageError(f"{lorentzian.SUPERLUMINAL_MSG}; got beta = {args.beta}")
            label = args.beta
        else:
            label = 0.0 if args.pbar is None else args.pbar
    quantities = _parse_list(args.quantities, allowed, "quantity") if args.quantities else list(allowed)
    values, methods = evaluate(family, r, args.xbar, label, quantities, massless=massless, method=args.method)
    record = {
        "family": family,
        "inputs": {"r": r, "xbar": args.xbar,
                   ("beta" if family == "lorentzian" else "sbar" if massless else "pbar"): label,
                   "regime": "massless" if massless else "massive"},
        "quantities": values,
        "methods": methods,
    }
    if args.verify:
        oracle = oracle_values(family, r, args.xbar, label, massless)
        record["oracle_deltas"] = {
            q: checks.rel(values[q], oracle[q]) for q in quantities if q in oracle
        }
    if args.si:
        if massless or args.mass_mev is None:
            raise UsageError("--si needs a massive state and --mass-mev")
        if not args.mass_mev > 0:
            raise UsageError("--mass-mev must be positive")
        record["si"] = to_si(values, r, args.mass_mev)
    for v in _walk_numbers(record):
        if not math.isfinite(v):
            raise ConvergenceError("non-finite value in report")
    json.dump(record, out, indent=2, sort_keys=True)
    out.write("\n")
    return 0


def _walk_numbers(obj):
    if isinstance(obj, dict):
        for v in obj.values():
            yield from _walk_numbers(v)
    elif isinstance(obj, float):
        yield obj


@dataclass(frozen=True)
class SweepSpec:
    family: str
    axis: str
    r: float
    lo: float
    hi: float
    points: int
    quantities: tuple[str, ...]
    figure: int | None = None
    open_interval: bool = False

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise UsageError(f"unknown family {self.family!r}")
        if self.axis not in AXES[self.family]:
            raise UsageError(f"axis {self.axis!r} not valid for {self.family}; use {', '.join(AXES[self.family])}")
        if not self.lo < self.hi:
            raise UsageError("sweep range needs lo < hi")
        if self.points < 2:
            raise UsageError("sweep needs at least 2 points")
        if self.axis == "beta" and not (-1 < self.lo and self.hi < 1) and not self.open_interval:
            raise UsageError(f"beta range must lie inside (-1, 1): {lorentzian.SUPERLUMINAL_MSG}")
        if not (math.isfinite(self.r) and self.r > 0):
            raise UsageError("r must be positive")

    def grid(self) -> np.ndarray:
        if self.open_interval:
            # points strictly inside (lo, hi), uniformly spaced
            return self.lo + (self.hi - self.lo) * np.arange(1, self.points + 1) / (self.points + 1)
        return np.linspace(self.lo, self.hi, self.points)

    @classmethod
    def from_figure(cls, n: int, r: float = FIGURE_R) -> "SweepSpec":
        fp = FIGURES[n]
        if fp.axis == "beta":
            return cls(fp.family, "beta", r, -1.0, 1.0, 399, (fp.quantity,), n, open_interval=True)
        return cls(fp.family, "pbar", r, -10.0, 10.0, 401, (fp.quantity,), n)


def _sweep_point(job):
    spec, i, x = job
    massless = spec.axis == "sbar"
    try:
        values, _ = evaluate(spec.family, None if massless else spec.r, 0.0, float(x),
                             spec.quantities, massless=massless)
    except (DomainError, ConvergenceError) as exc:
        raise SweepPointError(f"point {i} ({spec.axis} = {float(x):.12g}): {exc}") from None
    return [values[q] for q in spec.quantities]


class SweepPointError(Exception):
    pass


def run_sweep(spec: SweepSpec, workers: int = 1) -> list[list[float]]:
    xs = spec.grid()
    jobs = [(spec, i, x) for i, x in enumerate(xs)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_point, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        rows = [_sweep_point(j) for j in jobs]
    return [[float(x)] + row for x, row in zip(xs, rows)]


def sweep_csv(spec: SweepSpec, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([spec.axis, *spec.quantities, "canonical_variance", "canonical_product"])
    for row in rows:
        w.writerow([f"{v:.12g}" for v in row] + ["0.5", "0.25"])
    return buf.getvalue()


def sweep_json(spec: SweepSpec, rows) -> str:
    """One JSON object per line, keys in CSV column order."""
    keys = [spec.axis, *spec.quantities]
    lines = [json.dumps({k: float(f"{v:.12g}") for k, v in zip(keys, row)}) for row in rows]
    return "\n".join(lines) + "\n"


def cmd_sweep(args, out=None) -> int:
    out = out or sys.stdout
    if args.figure is not None:
        spec = SweepSpec.from_figure(args.figure, FIGURE_R if args.r is None else args.r)
        default_name = f"figure{args.figure}.{args.format}"
    else:
        if args.family is None or args.axis is None or args.range is None:
            raise UsageError("custom sweeps need --family, --axis and --range (or use --figure)")
        quantities = tuple(_parse_list(args.quantities or "var_x,var_p,product_xp",
                                       MASSLESS_QUANTITIES if args.axis == "sbar" else QUANTITIES[args.family],
                                       "quantity"))
        r = FIGURE_R if args.r is None else args.r
        spec = SweepSpec(args.family, args.axis, r, args.range[0], args.range[1], args.points, quantities)
        default_name = f"sweep_{spec.family}_{spec.axis}.{args.format}"
    workers = args.workers or os.cpu_count() or 1
    try:
        rows = run_sweep(spec, workers)
    except SweepPointError as exc:
        raise UsageError(f"sweep aborted at {exc}") from None
    text = sweep_json(spec, rows) if args.format == "json" else sweep_csv(spec, rows)
    target = args.out
    if target is None and os.environ.get("RELCOH_OUTPUT_DIR"):
        target = os.path.join(os.environ["RELCOH_OUTPUT_DIR"], default_name)
    if target is None or target == "-":
        out.write(text)
    else:
        os.makedirs(os.path.dirname(os.path.abspath(target)), exist_ok=True)
        with open(target, "w", newline="", encoding="utf-8") as fh:
            fh.write(text)
        print(f"wrote {len(rows)} rows to {target}", file=sys.stderr)
    return 0


def parse_tol(items) -> dict[str, float]:
    out = {}
    for item in items or []:
        for part in item.split(","):
            key, sep, val = part.partition("=")
            key = key.strip()
            if not sep or key not in ("rel", "abs"):
                raise UsageError(f"bad --tol {part!r}; expected rel=<x> or abs=<x>")
            try:
                v = float(val)
            except ValueError:
                raise UsageError(f"bad tolerance value {val!r}") from None
            if not (math.isfinite(v) and v > 0):
                raise UsageError("tolerances must be positive")
            out[key] = v
    return out


def cmd_verify(args, out=None) -> int:
    out = out or sys.stdout
    tol = parse_tol(args.tol)
    selected = checks.registry(args.suite)
    out.write("TAP version 13\n")
    out.write(f"1..{len(selected)}\n")
    failed = 0
    for i, res in enumerate(checks.run_checks(args.suite, tol), start=1):
        status = "ok" if res.passed else "not ok"
        failed += not res.passed
        out.write(f"{status} {i} - {res.check.suite}.{res.check.name} # {res.check.kind} residual="
                  f"{res.residual:.3e} tol={res.tol:.1e} time={res.seconds:.2f}s\n")
        if res.error:
            out.write(f"  ---\n  error: {res.error}\n  ...\n")
        try:
            out.flush()
        except BrokenPipeError:  # reader went away (e.g. piped into head)
            return 1 if failed else 0
    out.write(f"# {len(selected) - failed} passed, {failed} failed\n")
    return 1 if failed else 0


# --- parser ----------------------------------------------------------------------------


def read_config(path: str) -> dict[str, str]:
    """Parse a ``key = value`` file; ``#`` starts a comment."""
    cfg = {}
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    with fh:
        for n, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, val = line.partition("=")
            if not sep:
                raise UsageError(f"{path}:{n}: expected key = value")
            cfg[key.strip().replace("-", "_")] = val.strip()
    return cfg


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="relcoh", description="Relativistic coherent states: moments, sweeps and checks.")
    p.add_argument("--explain-units", action="store_true", help="print the unit conventions and exit")
    p.add_argument("--config", help="key = value file supplying defaults for command flags")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    c = sub.add_parser("compute", help="moments of one coherent state as JSON")
    c.add_argument("--family", choices=FAMILIES, default="canonical")
    c.add_argument("--r", type=float, help="sigma / lambda_c")
    c.add_argument("--xbar", type=float, default=0.0)
    c.add_argument("--pbar", type=float, help="sigma pbar / hbar")
    c.add_argument("--beta", type=float, help="mean velocity / c (lorentzian)")
    c.add_argument("--massless", action="store_true")
    c.add_argument("--sbar", type=float, help="sigma pbar / hbar for --massless")
    c.add_argument("--quantities", help="comma-separated subset of quantities")
    c.add_argument("--method", choices=("series", "quadrature"), default="series")
    c.add_argument("--verify", action="store_true", help="add relative deltas against quadrature oracles")
    c.add_argument("--si", action="store_true", help="also report SI / MeV values")
    c.add_argument("--mass-mev", type=float, help="particle mass in MeV for --si")
    c.set_defaults(func=cmd_compute)

    s = sub.add_parser("sweep", help="figure data or custom sweeps as CSV")
    s.add_argument("--figure", type=int, choices=sorted(FIGURES))
    s.add_argument("--family", choices=FAMILIES)
    s.add_argument("--axis", choices=("beta", "pbar", "sbar"))
    s.add_argument("--range", type=float, nargs=2, metavar=("LO", "HI"))
    s.add_argument("--points", type=int, default=101)
    s.add_argument("--quantities")
    s.add_argument("--r", type=float, help=f"sigma / lambda_c (figure presets use {FIGURE_R:g})")
    s.add_argument("--out", help="output file ('-' for stdout); default $RELCOH_OUTPUT_DIR or stdout")
    s.add_argument("--format", choices=("csv", "json"), default="csv", help="CSV table or JSON lines")
    s.add_argument("--workers", type=int, help="worker processes (default: CPU count)")
    s.set_defaults(func=cmd_sweep)

    v = sub.add_parser("verify", help="run oracle checks, TAP output")
    v.add_argument("--suite", choices=("all", *checks.SUITES), default="all")
    v.add_argument("--tol", action="append", help="override tolerances, e.g. rel=1e-6 or abs=1e-12")
    v.set_defaults(func=cmd_verify)
    return p


def _apply_config(parser, argv, cfg: dict[str, str]):
    """Re-parse with config values as defaults, so explicit flags still win."""
    sub_action = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    for sp in sub_action.choices.values():
        known = {a.dest: a for a in sp._actions}
        defaults = {}
        for key, raw in cfg.items():
            if key not in known:
                continue
            a = known[key]
            if a.nargs == 0:
                defaults[key] = raw.lower() in ("1", "true", "yes", "on")
            elif a.nargs == 2:
                defaults[key] = [a.type(x) for x in raw.replace(",", " ").split()]
            elif a.dest == "tol":
                defaults[key] = [raw]
            else:
                defaults[key] = a.type(raw) if a.type else raw
        sp.set_defaults(**defaults)
    return parser.parse_args(argv)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors (2) and --help (0)
        return int(exc.code or 0)
    if args.explain_units:
        sys.stdout.write(UNITS_TABLE)
        return 0
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    try:
        if args.config:
            try:
                args = _apply_config(parser, argv, read_config(args.config))
            except SystemExit as exc:
                return int(exc.code or 0)
        return args.func(args)
    except (UsageError, DomainError) as exc:
        print(f"relcoh {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:  # e.g. an unparsable config value
        print(f"relcoh {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except ConvergenceError as exc:
        print(f"relcoh {args.command}: numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
