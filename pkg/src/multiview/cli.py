"""Command-line front end.

Every subcommand writes one CSV table (header always present, floats with 12
significant digits) or one JSON object carrying ``schema_version``.  Values
are computed in nats and converted only when written.

Exit status: 0 success, 2 invalid input, 3 budget exceeded, 4 invariant
violation.
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
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import deletion, fbl_rates, largedev, special_channels
from .multiview_dmc import (
    DEFAULT_TYPE_BUDGET,
    BudgetExceededError,
    ChannelFormatError,
    Dmc,
    GapUnderflowError,
    InvariantViolationError,
    bec,
    bsc,
    fit_convergence_rate,
    min_pair_chernoff,
    multi_view_report,
    random_dmc,
    read_channel,
    z_channel,
)
from .prob_core import FiniteDistribution

SCHEMA_VERSION = 1
DEFAULT_SEED = 0
EXIT_OK, EXIT_INPUT, EXIT_BUDGET, EXIT_INVARIANT = 0, 2, 3, 4
LOG2 = math.log(2.0)


class UsageError(ValueError):
    pass


# ---------------------------------------------------------------------------
# parsing helpers


def parse_channel_spec(spec: str, seed: int = DEFAULT_SEED) -> Dmc:
    """``bsc:p``, ``bec:e``, ``zchan:d``, ``random:NXxNY`` or ``file:path``."""
    kind, _, arg = spec.partition(":")
    if not arg:
        raise UsageError(f"channel spec {spec!r} needs the form kind:arg")
    try:
        if kind == "bsc":
            return bsc(_unit(float(arg)))
        if kind == "bec":
            return bec(_unit(float(arg)))
        if kind == "zchan":
            return z_channel(_unit(float(arg)))
        if kind == "random":
            nx, ny = (int(v) for v in arg.lower().split("x"))
            if nx < 1 or ny < 1:
                raise UsageError("random channel sizes must be positive")
            return random_dmc(np.random.default_rng(seed), nx, ny)
        if kind == "file":
            return read_channel(arg)
    except (ValueError, OSError) as exc:
        if isinstance(exc, UsageError):
            raise
        raise UsageError(f"bad channel spec {spec!r}: {exc}") from exc
    raise UsageError(f"unknown channel kind {kind!r}")


def _unit(v: float) -> float:
    if not 0.0 <= v <= 1.0:
        raise UsageError(f"parameter {v} outside [0, 1]")
    return v


def parse_list(text: str, kind=float) -> list:
    """Comma list, or ``start:stop:step`` inclusive of ``stop`` up to rounding."""
    text = text.strip()
    if text.count(":") == 2:
        a, b, s = (float(v) for v in text.split(":"))
        if s <= 0 or b < a:
            raise UsageError(f"bad range {text!r}")
        n = int(math.floor((b - a) / s + 1e-9))
        vals = [round(a + i * s, 12) for i in range(n + 1)]
        return [kind(v) for v in vals]
    try:
        return [kind(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"bad list {text!r}") from exc


def parse_input(text: str | None, channel: Dmc) -> FiniteDistribution:
    if text is None:
        return FiniteDistribution.uniform(channel.input_size)
    probs = parse_list(text)
    if len(probs) != channel.input_size:
        raise UsageError(f"input distribution has {len(probs)} entries, channel has {channel.input_size} inputs")
    try:
        return FiniteDistribution(probs, tol=1e-9)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


# ---------------------------------------------------------------------------
# report container


@dataclass
class Report:
    """Rows of a table; ``kinds`` marks columns as info (1), squared info (2) or raw (0)."""

    command: str
    columns: list[str]
    kinds: list[int]
    rows: list[list] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def scaled(self, unit: str) -> tuple[list[str], list[list]]:
        scale = LOG2 if unit == "bits" else 1.0
        cols = [c.replace("_nats", "_" + unit) for c in self.columns]
        out = []
        for row in self.rows:
            out.append([v / scale**k if k and isinstance(v, float) else v for v, k in zip(row, self.kinds)])
        return cols, out

    def render(self, unit: str, fmt: str) -> str:
        cols, rows = self.scaled(unit)
        if fmt == "json":
            obj = {
                "schema_version": SCHEMA_VERSION,
                "command": self.command,
                "unit": unit,
                **self.meta,
                "rows": [dict(zip(cols, r)) for r in rows],
            }
            return json.dumps(obj, sort_keys=True, allow_nan=True) + "\n"
        buf = io.StringIO()
        if "seed" in self.meta:
            buf.write(f"# seed={self.meta['seed']}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for r in rows:
            w.writerow([_fmt(v) for v in r])
        return buf.getvalue()


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.12g}"
    if v is None:
        return ""
    return str(v)


# ---------------------------------------------------------------------------
# commands


def _uses_seed(args) -> bool:
    return getattr(args, "channel", "").startswith("random:")


def _channel(args) -> Dmc:
    return parse_channel_spec(args.channel, args.seed)


def cmd_chernoff(args) -> Report:
    ch = _channel(args)
    px = parse_input(args.input, ch)
    rep = Report("chernoff", ["channel", "rho_nats"], [0, 1])
    rep.rows.append([args.channel, min_pair_chernoff(ch, px)])
    return rep


def cmd_mvinfo(args) -> Report:
    ch = _channel(args)
    px = parse_input(args.input, ch)
    rep = Report(
        "mvinfo",
        ["d", "input_entropy_nats", "cond_entropy_nats", "mutual_info_nats", "dispersion_nats2"],
        [0, 1, 1, 1, 2],
    )
    for d in parse_list(args.d, int):
        r = multi_view_report(ch, px, d, args.type_budget)
        rep.rows.append([d, r.input_entropy, r.cond_entropy, r.mutual_info, r.dispersion])
    return rep


def cmd_dispersion(args) -> Report:
    ch = _channel(args)
    px = parse_input(args.input, ch)
    rep = Report(
        "dispersion",
        ["d", "dispersion_nats2", "dispersion_decomposed_nats2", "cross_term_nats2", "route_gap_nats2"],
        [0, 2, 2, 2, 2],
    )
    for d in parse_list(args.d, int):
        r = multi_view_report(ch, px, d, args.type_budget, check=False)
        gap = abs(r.dispersion - r.dispersion_decomposed)
        rep.rows.append([d, r.dispersion, r.dispersion_decomposed, r.cross_term, gap])
        if gap > 1e-9:
            rep.meta["invariant_failed"] = f"dispersion routes differ by {gap:.3g} at d={d}"
    return rep


def cmd_rate_fit(args) -> Report:
    ch = _channel(args)
    px = parse_input(args.input, ch)
    e = fit_convergence_rate(ch, px, args.d_min, args.d_max, args.target, args.type_budget)
    rep = Report(
        "rate-fit",
        ["target", "d_min", "d_max", "fitted_rate_nats", "predicted_rate_nats", "relative_gap", "log_d_coefficient"],
        [0, 0, 0, 1, 1, 0, 0],
    )
    rep.rows.append([e.target, e.d_window[0], e.d_window[1], e.fitted_rate, e.predicted_rate, e.relative_gap, e.log_d_coefficient])
    return rep


def _bin_row(dp):
    d, p = dp
    return special_channels.binomial_capacity(d, p)


def _pool_map(fn, items, workers: int):
    items = list(items)
    if workers <= 1 or len(items) < 8:
        return [fn(i) for i in items]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))


def cmd_bin_cap(args) -> Report:
    pairs = [(d, p) for d in parse_list(args.d, int) for p in parse_list(args.p)]
    for d, p in pairs:
        if d < 0:
            raise UsageError("d must be nonnegative")
        _unit(p)
    caps = _pool_map(_bin_row, pairs, args.workers)
    rep = Report("bin-cap", ["d", "p", "c_bin_nats"], [0, 0, 1])
    rep.rows = [[d, p, c] for (d, p), c in zip(pairs, caps)]
    return rep


def cmd_poi_cap(args) -> Report:
    rep = Report("poi-cap", ["d", "p", "c_poi_nats", "truncation_bound_nats", "cutoff"], [0, 0, 1, 1, 0])
    rep.meta["leading_constant"] = "log 2 nats"
    for d in parse_list(args.d):
        for p in parse_list(args.p):
            r = special_channels.poisson_capacity_report(d, _unit(p), args.tail_tol)
            rep.rows.append([d, p, r.value, r.truncation_bound, r.cutoff])
    return rep


def _sweep_row(args3):
    d, p, tol = args3
    return special_channels.figure1_sweep([d], [p], tol)[0]


def cmd_poi_sandwich(args) -> Report:
    ds, ps = parse_list(args.d, int), [_unit(p) for p in parse_list(args.p_grid)]
    rows = _pool_map(_sweep_row, [(d, p, args.tail_tol) for d in ds for p in ps], args.workers)
    # same columns as SWEEP_HEADER, with units spelled out for --unit bits
    rep = Report("poi-sandwich", ["d", "p", "c_bin_nats", "c_poi_nats", "gap_nats", "thm3_bound_nats"], [0, 0, 1, 1, 1, 1])
    rep.rows = [[r.d, r.p, r.c_bin, r.c_poi, r.gap, r.thm3_bound] for r in rows]
    bad = [r for r in rows if not r.sandwich_holds()]
    if bad:
        rep.meta["invariant_failed"] = f"sandwich fails at {len(bad)} grid points"
    return rep


def cmd_del_rho(args) -> Report:
    trace = [] if args.trace else None
    r = deletion.rho_n_exact(args.n, args.delta, max_n=args.max_n, trace=trace)
    if trace is not None:
        with open(args.trace, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["x", "x_tilde", "rho_pair_nats"])
            for x, y, v in trace:
                w.writerow([x, y, _fmt(v)])
    rep = Report(
        "del-rho",
        ["n", "delta", "rho_exact_nats", "bound_naive_nats", "bound_alternating_nats", "bound_fractional_nats", "argmin_x", "argmin_x_tilde"],
        [0, 0, 1, 1, 1, 1, 0, 0],
    )
    rep.rows.append([r.n, r.delta, r.rho_exact, r.bound_naive, r.bound_alternating, r.bound_fractional, *r.argmin_pair])
    if not r.chain_holds():
        rep.meta["invariant_failed"] = "rho_exact exceeds a bound"
    return rep


def cmd_del_bounds(args) -> Report:
    rep = Report(
        "del-bounds",
        ["n", "delta", "bound_naive_nats", "bound_alternating_nats", "bound_fractional_nats"],
        [0, 0, 1, 1, 1],
    )
    for n in parse_list(args.n, int):
        if n < 1:
            raise UsageError("n must be positive")
        alt = deletion.alternating_pair_bound(n, args.delta) if n <= args.max_alternating else None
        rep.rows.append([n, args.delta, deletion.bound_naive(n, args.delta), alt, deletion.bound_fractional(n, args.delta)])
    return rep


def cmd_sanov(args) -> Report:
    ch = _channel(args)
    if not (0 <= args.x < ch.input_size and 0 <= args.x_tilde < ch.input_size) or args.x == args.x_tilde:
        raise UsageError("x and x_tilde must be distinct valid inputs")
    prof = largedev.LlrProfile.from_channel(ch, args.x, args.x_tilde)
    rep = Report("sanov", ["v", "E_dual_nats", "E_primal_nats", "gap_nats"], [0, 1, 1, 1])
    for v in parse_list(args.v):
        e_d = largedev.exponent(prof, v)
        e_p = largedev.primal_sanov_oracle(prof, v, args.grid)
        gap = abs(e_d - e_p) if math.isfinite(e_d) and math.isfinite(e_p) else (0.0 if e_d == e_p else math.inf)
        rep.rows.append([v, e_d, e_p, gap])
    return rep


def cmd_fbl(args) -> Report:
    ch = _channel(args)
    px = parse_input(args.input, ch)
    rep = Report("fbl", ["n", "epsilon", "d", "rate_nats", "gap_to_entropy_nats"], [0, 0, 0, 1, 1])
    rep.meta["label"] = fbl_rates.LABEL
    rep.meta["assumption"] = "non-singular channel (not checked)"
    for n in parse_list(args.n, int):
        for eps in parse_list(args.eps):
            for d in parse_list(args.d, int):
                r = fbl_rates.fbl_row(ch, px, fbl_rates.FblQuery(n, eps, d), args.type_budget)
                rep.rows.append([n, eps, d, r.rate, r.gap_to_entropy])
    return rep


COMMANDS = {
    "chernoff": cmd_chernoff,
    "mvinfo": cmd_mvinfo,
    "dispersion": cmd_dispersion,
    "rate-fit": cmd_rate_fit,
    "bin-cap": cmd_bin_cap,
    "poi-cap": cmd_poi_cap,
    "poi-sandwich": cmd_poi_sandwich,
    "del-rho": cmd_del_rho,
    "del-bounds": cmd_del_bounds,
    "sanov": cmd_sanov,
    "fbl": cmd_fbl,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--unit", choices=["nats", "bits"], default="nats")
    common.add_argument("--format", choices=["csv", "json"], default="csv")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED, help="seed for random:NXxNY channels")
    common.add_argument("--type-budget", type=int, default=DEFAULT_TYPE_BUDGET, help="max type classes per enumeration")
    common.add_argument("--workers", type=int, default=os.cpu_count() or 1, help="processes for grid sweeps")
    common.add_argument("-o", "--output", help="write the report here instead of stdout")

    p = _Parser(prog="multiview", description="Exact rates and bounds for multi-view channels.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def chan(sp, need_input=True):
        sp.add_argument("--channel", required=True, help="bsc:p | bec:e | zchan:d | random:NXxNY | file:path")
        if need_input:
            sp.add_argument("--input", help="comma-separated input distribution (default uniform)")

    sp = sub.add_parser("chernoff", parents=[common], help="min-pair Chernoff information")
    chan(sp)
    sp = sub.add_parser("mvinfo", parents=[common], help="H(X|Y^d), I and V for each d")
    chan(sp)
    sp.add_argument("--d", required=True, help="list of d values")
    sp = sub.add_parser("dispersion", parents=[common], help="both dispersion routes and the cross term")
    chan(sp)
    sp.add_argument("--d", required=True)
    sp = sub.add_parser("rate-fit", parents=[common], help="fit the decay rate of a gap")
    chan(sp)
    sp.add_argument("--target", choices=["entropy_gap", "dispersion_gap"], default="entropy_gap")
    sp.add_argument("--d-min", type=int)
    sp.add_argument("--d-max", type=int)
    sp = sub.add_parser("bin-cap", parents=[common], help="binomial channel capacity")
    sp.add_argument("--d", required=True)
    sp.add_argument("--p", required=True)
    sp = sub.add_parser("poi-cap", parents=[common], help="Poisson channel capacity")
    sp.add_argument("--d", required=True)
    sp.add_argument("--p", required=True)
    sp.add_argument("--tail-tol", type=float, default=special_channels.DEFAULT_TAIL_TOL)
    sp = sub.add_parser("poi-sandwich", parents=[common], help="binomial vs Poisson sweep")
    sp.add_argument("--d", required=True)
    sp.add_argument("--p-grid", required=True, help="list or start:stop:step")
    sp.add_argument("--tail-tol", type=float, default=special_channels.DEFAULT_TAIL_TOL)
    sp = sub.add_parser("del-rho", parents=[common], help="exact deletion rate for small n")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--delta", type=float, required=True)
    sp.add_argument("--max-n", type=int, default=deletion.DEFAULT_MAX_N, help="raise to allow a larger search")
    sp.add_argument("--trace", help="CSV file for per-pair values")
    sp = sub.add_parser("del-bounds", parents=[common], help="upper bounds on the deletion rate")
    sp.add_argument("--n", required=True)
    sp.add_argument("--delta", type=float, required=True)
    sp.add_argument("--max-alternating", type=int, default=24)
    sp = sub.add_parser("sanov", parents=[common], help="dual vs primal exponent")
    chan(sp, need_input=False)
    sp.add_argument("--x", type=int, default=0)
    sp.add_argument("--x-tilde", type=int, default=1)
    sp.add_argument("--v", required=True)
    sp.add_argument("--grid", type=int, default=largedev.DEFAULT_GRID)
    sp = sub.add_parser("fbl", parents=[common], help="normal-approximation rate table")
    chan(sp)
    sp.add_argument("--n", required=True)
    sp.add_argument("--eps", required=True)
    sp.add_argument("--d", required=True)
    return p


def _validate(args) -> None:
    if getattr(args, "delta", None) is not None and not 0.0 < args.delta < 1.0:
        raise UsageError("delta must lie in (0, 1)")
    if args.type_budget < 1 or args.workers < 1:
        raise UsageError("budgets and worker counts must be positive")
    if args.command == "del-rho" and args.n > args.max_n:
        pairs = 4**args.n // 2
        print(f"n={args.n} exceeds --max-n={args.max_n}; the search would visit about {pairs} pairs", file=sys.stderr)


def run(argv: Sequence[str] | None = None, stdout=None) -> int:
    """Parse ``argv``, run one command and write its report; returns the exit status."""
    stdout = stdout or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        _validate(args)
        report = COMMANDS[args.command](args)
    except (BudgetExceededError, deletion.DeletionBudgetError, largedev.OracleSizeError) as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except InvariantViolationError as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (UsageError, ChannelFormatError, GapUnderflowError, ValueError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if _uses_seed(args):
        report.meta["seed"] = args.seed
    text = report.render(args.unit, args.format)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    if "invariant_failed" in report.meta:
        print(f"invariant violation: {report.meta['invariant_failed']}", file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
