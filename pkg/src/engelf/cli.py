"""Command-line interface: ``engelf <command> [options]``.

Exit codes: 0 success, 1 failed ``check``, 2 usage or domain error.
"""

from __future__ import annotations

import argparse
import json
import sys
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path

from gmpy2 import mpq

from .checks import run_checks
from .engel import Cylinder, DigitStream, digits_of, value_of
from .family import (
    Family,
    FamilyValidationError,
    builtin_families,
    family_from_name,
    load_family,
    validate,
)
from .function import enumerate_extrema, eval_exact, eval_f, graph_boxes, level_set_probe
from .measure import (
    DEFAULT_PRECISION,
    DEFAULT_SLACK,
    SamplerState,
    empirical_cdf_distance,
    integral_enclosure,
    paper_integral_bound,
    sample_floats,
    sample_xi,
)
from .rational import RationalInterval, fmt_rational, parse_rational, to_decimal

EXIT_OK, EXIT_CHECK_FAILED, EXIT_USAGE = 0, 1, 2
DEFAULT_EPS = "1e-12"
# rationals with more bits than this print as decimals unless --exact
SHORT_BITS = 128


class CliError(Exception):
    pass


@dataclass
class CliConfig:
    family: Family
    eps: mpq
    seed: int
    json: bool
    exact: bool
    out: Path | None


def _num(q, exact: bool) -> str:
    q = mpq(q)
    short = q.numerator.bit_length() + q.denominator.bit_length() <= SHORT_BITS
    return fmt_rational(q) if exact or (short and q.denominator == 1) else to_decimal(q)


def _value_text(q, exact: bool) -> str:
    q = mpq(q)
    short = q.numerator.bit_length() + q.denominator.bit_length() <= SHORT_BITS
    return f"{fmt_rational(q) if exact or short else to_decimal(q)} (exact)"


def _interval_json(iv: RationalInterval) -> dict:
    return {"exact": False, "lo": fmt_rational(iv.lo), "hi": fmt_rational(iv.hi), "width": float(iv.width)}


def _point_json(q) -> dict:
    return {"exact": True, "value": fmt_rational(q), "decimal": float(q)}


def _resolve_family(args) -> Family:
    try:
        if args.config:
            spec = load_family(args.config)
        else:
            spec = family_from_name(args.family, args.a)
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot read family config: {exc}") from exc
    except (ValueError, KeyError, TypeError) as exc:
        raise CliError(f"invalid family: {exc}") from exc
    report = validate(spec, getattr(args, "depth", 100))
    if not report.ok:
        raise CliError(str(FamilyValidationError(report)))
    return spec


@contextmanager
def _output(cfg: CliConfig):
    if cfg.out is None:
        yield sys.stdout
    else:
        with open(cfg.out, "w", newline="") as fh:
            yield fh


def _parse_stream(text: str) -> DigitStream:
    try:
        return DigitStream.parse(text)
    except ValueError as exc:
        raise CliError(str(exc)) from exc


# commands -----------------------------------------------------------------


def cmd_digits(args, cfg: CliConfig, out) -> int:
    d = digits_of(parse_rational(args.x), args.max_digits)
    if cfg.json:
        json.dump({"x": args.x, "prefix": list(d.prefix), "period": None if d.period is None else list(d.period)}, out)
        out.write("\n")
    else:
        out.write(f"{d}{'' if d.is_periodic else ' ...'}\n")
    return EXIT_OK


def cmd_value(args, cfg: CliConfig, out) -> int:
    v = value_of(_parse_stream(args.stream), args.depth_digits)
    if isinstance(v, RationalInterval):
        text = f"[{_num(v.lo, cfg.exact)}, {_num(v.hi, cfg.exact)}] (width {to_decimal(v.width, 3)})"
        payload = _interval_json(v)
    else:
        text = _value_text(v, cfg.exact)
        payload = _point_json(v)
    out.write((json.dumps(payload) if cfg.json else text) + "\n")
    return EXIT_OK


def cmd_eval(args, cfg: CliConfig, out) -> int:
    if (args.x is None) == (args.digits is None):
        raise CliError("give exactly one of X or --digits")
    d = _parse_stream(args.digits) if args.digits is not None else digits_of(parse_rational(args.x), 256)
    spec = cfg.family
    enc = eval_f(spec, d, cfg.eps)
    if enc.is_point and d.is_periodic:
        text, payload = _value_text(enc.lo, cfg.exact), _point_json(enc.lo)
    else:
        text = f"[{_num(enc.lo, cfg.exact)}, {_num(enc.hi, cfg.exact)}] (width {to_decimal(enc.width, 3)})"
        payload = _interval_json(enc)
        if enc.width > cfg.eps:
            print(
                f"note: width exceeds eps; the {d.depth} given digits only fix f up to this enclosure",
                file=sys.stderr,
            )
    out.write((json.dumps(payload) if cfg.json else text) + "\n")
    return EXIT_OK


def cmd_plot(args, cfg: CliConfig, out) -> int:
    boxes = graph_boxes(cfg.family, args.rank or 4, args.points)
    out.write("x_lo,x_hi,f_lo,f_hi\n")
    for row in boxes:
        out.write(",".join(to_decimal(v) for v in row) + "\n")
    if args.svg:
        _write_svg(boxes, args.svg, cfg.family.name)
    return EXIT_OK


def _write_svg(boxes, path, title):
    import matplotlib

    matplotlib.use("svg")
    import matplotlib.pyplot as plt
    from matplotlib.patches import Rectangle

    # fixed hash salt keeps the SVG byte-identical across runs
    matplotlib.rcParams["svg.hashsalt"] = "engelf"
    fig, ax = plt.subplots(figsize=(7, 5))
    for x0, x1, f0, f1 in boxes:
        ax.add_patch(Rectangle((float(x0), float(f0)), float(x1 - x0), float(f1 - f0), lw=0.3, ec="C0", fc="C0", alpha=0.35))
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1)
    ax.set_xlabel("x")
    ax.set_ylabel("f(x)")
    ax.set_title(title)
    fig.savefig(path, metadata={"Date": None})
    plt.close(fig)


def cmd_extrema(args, cfg: CliConfig, out) -> int:
    rank = 2 if args.rank is None else args.rank
    pts = enumerate_extrema(cfg.family, rank + 1, args.cap)
    rows = []
    for p in pts:
        *base, i = p.point.prefix
        rows.append({"base": str(Cylinder(tuple(base))), "i": i, "type": p.role, "value": p.value})
    if cfg.json:
        json.dump([{**r, "value": fmt_rational(r["value"])} for r in rows], out)
        out.write("\n")
    else:
        for r in rows:
            out.write(f"{r['base']};{r['i']};{r['type']};{_num(r['value'], cfg.exact)}\n")
    return EXIT_OK


def parse_level(spec: Family, text: str) -> mpq:
    """A rational, or ``from:periodic:<digits>``, ``from:digits:<stream>``, ``from:x:<rational>``."""
    if not text.startswith("from:"):
        return parse_rational(text)
    kind, _, arg = text[5:].partition(":")
    if kind == "periodic":
        digits = arg.split(",") if "," in arg else list(arg.replace(" ", ""))
        return eval_exact(spec, DigitStream((), tuple(int(g) for g in digits)))
    if kind == "digits":
        return eval_exact(spec, _parse_stream(arg))
    if kind == "x":
        return eval_exact(spec, parse_rational(arg))
    raise CliError(f"unknown level source {kind!r}")


def cmd_levelset(args, cfg: CliConfig, out) -> int:
    y0 = parse_level(cfg.family, args.y)
    rank = 8 if args.rank is None else args.rank
    cyls = level_set_probe(cfg.family, y0, rank, args.cap)
    if cfg.json:
        json.dump({"y0": fmt_rational(y0), "rank": rank, "cap": args.cap, "cylinders": [str(c) for c in cyls]}, out)
        out.write("\n")
    else:
        for c in cyls:
            out.write(f"{c}\n")
    return EXIT_OK


def cmd_integral(args, cfg: CliConfig, out) -> int:
    spec = cfg.family
    rank = 12 if args.rank is None else args.rank
    breadth = 24 if args.breadth is None else args.breadth
    enc = integral_enclosure(spec, rank, breadth, parse_rational(args.slack), args.remainder, with_bound=False)
    pb = paper_integral_bound(spec, args.terms)
    bound = pb.bound if pb.applicable else None
    conv = (lambda q: fmt_rational(q)) if cfg.exact else float
    report = {
        "lower": conv(enc.lower),
        "upper": conv(enc.upper),
        "paper_bound_lo": None if bound is None else conv(bound.lo),
        "paper_bound_hi": None if bound is None else conv(bound.hi),
        "rank": rank,
        "breadth": enc.breadth_used,
        "width": float(enc.width),
        "cylinders": enc.cylinders,
        "slack": args.slack,
        "remainder": args.remainder,
    }
    if cfg.json:
        json.dump(report, out)
        out.write("\n")
    else:
        for k, v in report.items():
            out.write(f"{k}: {'not applicable' if v is None else v}\n")
    return EXIT_OK


def cmd_sample(args, cfg: CliConfig, out) -> int:
    precision = parse_rational(args.precision)
    if args.ks:
        ks = empirical_cdf_distance(cfg.family, args.n, args.grid, cfg.seed, precision)
        json.dump({"ks": ks, "n_samples": args.n, "n_grid": args.grid, "seed": cfg.seed}, out)
        out.write("\n")
        return EXIT_OK
    if args.n < 1:
        raise CliError("--n must be positive")
    state = SamplerState(cfg.seed, cfg.family, precision)
    if cfg.exact:
        values = [fmt_rational(sample_xi(state).point) for _ in range(args.n)]
    else:
        values = [float(v) for v in sample_floats(state, args.n)]
    if cfg.json:
        json.dump({"seed": cfg.seed, "precision": fmt_rational(precision), "samples": values}, out)
        out.write("\n")
    else:
        for v in values:
            out.write(f"{v if cfg.exact else to_decimal(v)}\n")
    return EXIT_OK


def cmd_check(args, cfg: CliConfig, out) -> int:
    results = run_checks(cfg.family, "full" if args.full else "quick", cfg.seed)
    ok = all(r.passed for r in results)
    if cfg.json:
        json.dump(
            {"family": cfg.family.name, "passed": ok, "checks": [{"name": r.name, "passed": r.passed, "detail": r.detail, "extra": r.extra} for r in results]},
            out,
        )
        out.write("\n")
    else:
        out.write(f"family {cfg.family.name}\n")
        for r in results:
            out.write(f"{r}\n")
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def cmd_family(args, cfg: CliConfig, out) -> int:
    if args.action == "list":
        for f in builtin_families():
            out.write(f"{f.name}\n")
        return EXIT_OK
    report = validate(cfg.family, args.depth)
    if cfg.json:
        json.dump(
            {"family": cfg.family.to_config(), "ok": report.ok, "checked_depth": report.checked_depth,
             "failures": [str(f) for f in report.failures], "notes": report.notes},
            out,
        )
        out.write("\n")
    else:
        out.write(f"{report}\n")
    return EXIT_OK if report.ok else EXIT_USAGE


# parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("common options")
    g.add_argument("--family", default="dyadic", help="builtin family name (default: dyadic)")
    g.add_argument("--a", default=None, help="parameter a for two_scale")
    g.add_argument("--config", default=None, help="JSON family config (overrides --family)")
    g.add_argument("--eps", default=DEFAULT_EPS, help="target enclosure width")
    g.add_argument("--rank", type=int, default=None)
    g.add_argument("--breadth", type=int, default=None)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--json", action="store_true", help="machine-readable output")
    g.add_argument("--exact", action="store_true", help="print exact rationals")
    g.add_argument("--out", default=None, help="write output to this file")

    parser = argparse.ArgumentParser(prog="engelf", description="Engel-series functions with exact arithmetic.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("digits", parents=[common], help="E-representation of a rational")
    p.add_argument("x")
    p.add_argument("--max-digits", type=int, default=64)
    p.set_defaults(func=cmd_digits)

    p = sub.add_parser("value", parents=[common], help="number with a given digit stream")
    p.add_argument("stream", help='digits such as "0 0 2 (0)"')
    p.add_argument("--depth-digits", type=int, default=64, help="unrolling depth for non-zero periods")
    p.set_defaults(func=cmd_value)

    p = sub.add_parser("eval", parents=[common], help="f at a rational or digit stream")
    p.add_argument("x", nargs="?")
    p.add_argument("--digits", default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("plot", parents=[common], help="CSV (and optional SVG) of enclosure boxes")
    p.add_argument("--points", type=int, default=256)
    p.add_argument("--svg", default=None)
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("extrema", parents=[common], help="local extrema at cylinder endpoints")
    p.add_argument("--cap", type=int, default=6, help="largest digit")
    p.set_defaults(func=cmd_extrema)

    p = sub.add_parser("levelset", parents=[common], help="certified cylinders meeting f = y")
    p.add_argument("--y", required=True, help="rational, or from:periodic:01, from:digits:..., from:x:...")
    p.add_argument("--cap", type=int, default=6, help="largest digit")
    p.set_defaults(func=cmd_levelset)

    p = sub.add_parser("integral", parents=[common], help="rigorous enclosure of the integral of f")
    p.add_argument("--slack", default=fmt_rational(DEFAULT_SLACK))
    p.add_argument("--remainder", choices=["tail", "parent"], default="tail")
    p.add_argument("--terms", type=int, default=60, help="terms for the closed-form bound")
    p.set_defaults(func=cmd_integral)

    p = sub.add_parser("sample", parents=[common], help="draw xi with P(digit = n) = u_n")
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--precision", default=fmt_rational(DEFAULT_PRECISION))
    p.add_argument("--ks", action="store_true", help="report the KS distance instead")
    p.add_argument("--grid", type=int, default=1000)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("check", parents=[common], help="run the invariant suite")
    p.add_argument("--full", action="store_true")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("family", parents=[common], help="family utilities")
    p.add_argument("action", choices=["validate", "list"])
    p.add_argument("--depth", type=int, default=100)
    p.set_defaults(func=cmd_family)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        for name in ("rank", "breadth"):
            v = getattr(args, name)
            if v is not None and v < (0 if name == "breadth" else 1):
                raise CliError(f"--{name} must be positive")
        if args.command == "family" and args.action == "list":
            spec = None
        else:
            spec = _resolve_family(args)
        cfg = CliConfig(spec, parse_rational(args.eps), args.seed, args.json, args.exact, Path(args.out) if args.out else None)
        if cfg.eps <= 0:
            raise CliError("--eps must be positive")
        with _output(cfg) as out:
            return args.func(args, cfg, out)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
    except (ValueError, OverflowError, IndexError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
