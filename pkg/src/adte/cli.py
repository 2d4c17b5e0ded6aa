"""Command-line interface.

Subcommands:

* ``synth``     generate a synthetic biased logit stream file;
* ``run``       adapt a stream online and write/print a report;
* ``sweep-q``   run the Tsallis pipeline across q values and tabulate
  accuracy and mean Tcr_K per selected views;
* ``analyze-f`` tabulate the SE/TE gap function F(p, q) over a grid with
  per-regime verdicts;
* ``report``    pretty-print or compare report CSVs side by side.

Exit code 0 means success; flag misuse exits 2 with usage text; runtime
failures (unreadable files, malformed streams, bad configs) print the
error to standard error and exit 1. Data goes to files or standard
output, never to standard error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

import numpy as np

from . import io as streamio
from .entropy import gap, gap_critical_q
from .errors import AdteError
from .pipeline import MEASURE_NAMES, AdaptConfig, AdapterState, run_stream
from .synth import LABEL_DISTS, StreamSpec, gen_stream, make_world

_Q_ONE_WINDOW = 1e-9

# Defaults for `analyze-f`: a log grid over small p and the two q ranges
# flanking q = 1 where the gap function's sign and trend claims live.
_DEFAULT_P_GRID = tuple(np.logspace(-4, -2, 20))
_DEFAULT_Q_GRID = tuple(np.linspace(0.05, 0.95, 19)) + \
    tuple(np.linspace(1.05, 10.0, 19))


def _fmt(x) -> str:
    if x is None:
        return "n/a"
    if isinstance(x, float):
        return format(x, ".6g")
    return str(x)


def _sniff_format(path: str) -> str:
    with open(path, "rb") as fh:
        return "bin" if fh.read(4) == streamio.MAGIC else "jsonl"


def _parse_float_list(text: str, flag: str, parser) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError:
        parser.error(f"{flag} expects comma-separated numbers, got {text!r}")


# ---------------------------------------------------------------------------
# synth


def _cmd_synth(args, parser) -> int:
    if args.classes < 2:
        parser.error("--classes must be >= 2")
    if args.zipf_s < 0:
        parser.error("--zipf-s must be >= 0")
    if args.bias_strength < 0:
        parser.error("--bias-strength must be >= 0")
    if not args.margin > 0:
        parser.error("--margin must be > 0")
    if args.count < 1:
        parser.error("--count must be >= 1")
    if args.views < 1:
        parser.error("--views must be >= 1")
    if args.noise_sigma < 0:
        parser.error("--noise-sigma must be >= 0")
    if not 0 <= args.corrupt_prob <= 1:
        parser.error("--corrupt-prob must lie in [0, 1]")

    world = make_world(args.classes, zipf_s=args.zipf_s,
                       bias_strength=args.bias_strength, margin=args.margin,
                       seed=args.seed)
    spec = StreamSpec(count=args.count, n_views=args.views,
                      noise_sigma=args.noise_sigma,
                      corrupt_prob=args.corrupt_prob,
                      label_dist=args.label_dist)
    header = streamio.StreamHeader(num_classes=args.classes)
    n = streamio.write_stream(args.out, header, gen_stream(world, spec),
                              fmt=args.format)

    decile = max(1, args.classes // 10)
    prior = world.class_prior
    print(f"world: classes={args.classes} zipf_s={_fmt(args.zipf_s)} "
          f"bias_strength={_fmt(args.bias_strength)} "
          f"margin={_fmt(args.margin)} seed={args.seed}")
    print(f"prior: head mass={_fmt(float(prior[:decile].sum()))} "
          f"tail mass={_fmt(float(prior[-decile:].sum()))} "
          f"(top/bottom {decile} classes)")
    print(f"offset: max={_fmt(float(world.bias_offset.max()))} "
          f"min={_fmt(float(world.bias_offset.min()))}")
    print(f"wrote {n} records ({args.views} views each) to {args.out} "
          f"[{args.format}]")
    return 0


# ---------------------------------------------------------------------------
# run


_RUN_OVERRIDES = (
    ("n_views", "n_views"),
    ("filter_ratio", "filter_ratio"),
    ("bank_capacity", "bank_capacity"),
    ("jacobi_max_iter", "jacobi_max_iter"),
    ("jacobi_eps", "jacobi_eps"),
    ("q_alpha", "q_alpha"),
    ("q_beta", "q_beta"),
    ("measure", "measure"),
    ("q", "tsallis_q"),
    ("la", "use_logit_adjustment"),
    ("invert_q", "invert_q_mapping"),
    ("bias_refresh_period", "bias_refresh_period"),
)


def _config_from_args(args) -> AdaptConfig:
    cfg = streamio.load_config(args.config) if args.config else AdaptConfig()
    overrides = {}
    for attr, key in _RUN_OVERRIDES:
        value = getattr(args, attr, None)
        if value is not None:
            overrides[key] = value
    return replace(cfg, **overrides) if overrides else cfg


def _cmd_run(args, parser) -> int:
    cfg = _config_from_args(args)
    header, records = streamio.read_stream(args.infile,
                                           _sniff_format(args.infile))
    n_buckets = args.buckets if args.buckets is not None else \
        min(10, header.num_classes)
    if not 1 <= n_buckets <= header.num_classes:
        parser.error(f"--buckets must lie in [1, {header.num_classes}] "
                     "for this stream")
    prior_rank = None if args.bucket_rank == "estimated" else \
        np.arange(header.num_classes)
    state = AdapterState.fresh(header.num_classes, cfg)
    report = run_stream(records, cfg, state=state, prior_rank=prior_rank,
                        n_buckets=n_buckets)
    if args.report_out:
        streamio.write_report_csv(report, args.report_out)
    print(f"instances={report.instances}, accuracy={_fmt(report.accuracy)}, "
          f"measure={cfg.measure}")
    return 0


# ---------------------------------------------------------------------------
# sweep-q


def _cmd_sweep_q(args, parser) -> int:
    qs = _parse_float_list(args.q_list, "--q-list", parser)
    ks = []
    for tok in args.k_list.split(","):
        if tok.strip() == "":
            continue
        try:
            ks.append(int(tok))
        except ValueError:
            parser.error(f"--k-list expects comma-separated integers, "
                         f"got {tok!r}")
    if not qs:
        parser.error("--q-list must name at least one q value")
    if not ks or any(k < 1 for k in ks):
        parser.error("--k-list values must be positive integers")
    if any(abs(q - 1.0) < _Q_ONE_WINDOW for q in qs):
        parser.error("--q-list must not contain q = 1 "
                     "(the Tsallis form is undefined there)")
    if len(set(qs)) != len(qs) or len(set(ks)) != len(ks):
        parser.error("--q-list and --k-list values must be pairwise distinct")

    header, reader = streamio.read_stream(args.infile,
                                          _sniff_format(args.infile))
    records = list(reader)  # one pass per arm requires materializing
    if any(k > header.num_classes for k in ks):
        parser.error(f"--k-list values must be <= {header.num_classes} "
                     "classes for this stream")

    # Each arm isolates the selection measure: adjustment off and the bias
    # refresh pushed past the stream end so the initial uniform state holds.
    def arm(measure: str, q: float) -> tuple:
        cfg = AdaptConfig(measure=measure, tsallis_q=q,
                          use_logit_adjustment=False,
                          bias_refresh_period=len(records) + 1)
        report = run_stream(records, cfg, n_buckets=1, tcr_ks=ks)
        return report.accuracy, [report.mean_tcr[k] for k in ks]

    rows = []
    for q in qs:
        acc, tcrs = arm("tsallis", q)
        rows.append((q, acc, tcrs))
        print(f"q={_fmt(q)}: accuracy={_fmt(acc)}")
    se_acc, se_tcrs = arm("shannon", 0.5)
    print(f"se baseline: accuracy={_fmt(se_acc)}")

    lines = ["q,accuracy," + ",".join(f"mean_tcr_{k}" for k in ks)]
    for q, acc, tcrs in rows:
        lines.append(",".join([repr(q), _csv_opt(acc)]
                              + [repr(t) for t in tcrs]))
    lines.append(",".join(["se", _csv_opt(se_acc)]
                          + [repr(t) for t in se_tcrs]))
    with open(args.report_out, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")

    by_q = sorted(rows, key=lambda r: r[0])
    trend = all(
        a[2][i] >= b[2][i]
        for a, b in zip(by_q, by_q[1:])
        for i, k in enumerate(ks) if k > 1)
    print(f"tcr_nonincreasing_for_k_gt_1={'true' if trend else 'false'}")
    print(f"wrote {len(rows) + 1} rows to {args.report_out}")
    return 0


def _csv_opt(x) -> str:
    return "" if x is None else repr(float(x))


# ---------------------------------------------------------------------------
# analyze-f


def _cmd_analyze_f(args, parser) -> int:
    ps = (_parse_float_list(args.p_grid, "--p-grid", parser)
          if args.p_grid else list(_DEFAULT_P_GRID))
    qs = (_parse_float_list(args.q_grid, "--q-grid", parser)
          if args.q_grid else list(_DEFAULT_Q_GRID))
    if any(not 0.0 < p < 1.0 for p in ps):
        parser.error("--p-grid values must lie strictly inside (0, 1)")
    if any(abs(q - 1.0) < _Q_ONE_WINDOW for q in qs):
        parser.error("--q-grid must not contain q = 1 "
                     "(the gap function is undefined there)")
    qs = sorted(qs)

    # Verdicts per regime: below the critical exponent F is positive and
    # strictly decreasing; between it and 1, positive and strictly
    # increasing; above 1, negative and non-decreasing (analytic strict
    # growth can fall below one float64 ulp of F at large q).
    lines = ["p,q,f,regime,verdict"]
    for p in ps:
        q_star = float(gap_critical_q(p))
        prev_regime, prev_f = None, None
        for q in qs:
            f = float(gap(p, q))
            if q > 1.0:
                regime, sign_ok = "super-unity", f < 0.0
            elif q < q_star:
                regime, sign_ok = "sub-critical", f > 0.0
            else:
                regime, sign_ok = "super-critical", f > 0.0
            trend_ok = True
            if regime == prev_regime:
                if regime == "sub-critical":
                    trend_ok = f < prev_f
                elif regime == "super-critical":
                    trend_ok = f > prev_f
                else:
                    trend_ok = f >= prev_f
            verdict = "pass" if (sign_ok and trend_ok) else "fail"
            lines.append(",".join([repr(float(p)), repr(float(q)), repr(f),
                                   regime, verdict]))
            prev_regime, prev_f = regime, f
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        n_fail = sum(line.endswith(",fail") for line in lines)
        print(f"wrote {len(lines) - 1} grid points to {args.out} "
              f"({n_fail} regime violations)")
    else:
        sys.stdout.write(text)
    return 0


# ---------------------------------------------------------------------------
# report


def _report_rows(path: str):
    summary, classes, buckets = streamio.read_report_csv(path)
    rows = [("instances", summary.get("instances")),
            ("accuracy", summary.get("accuracy"))]
    for b in buckets:
        tag = f"bucket{int(b[0])}[rank {int(b[1])}-{int(b[2])}]"
        rows.append((f"{tag} count", b[3]))
        rows.append((f"{tag} accuracy", b[4]))
        rows.append((f"{tag} mean_confidence", b[5]))
        rows.append((f"{tag} mean_entropy", b[6]))
    return rows, len(classes)


def _cmd_report(args, parser) -> int:
    loaded = [_report_rows(path) for path in args.infiles]
    n_classes = {n for _, n in loaded}
    if len(n_classes) > 1:
        raise AdteError(
            f"reports disagree on class count: {sorted(n_classes)}")
    keys = [k for k, _ in loaded[0][0]]
    if any([k for k, _ in rows] != keys for rows, _ in loaded[1:]):
        raise AdteError("reports have mismatched bucket layouts")

    def cell(v) -> str:
        if v is None or v == "":
            return "n/a"
        return _fmt(float(v))

    names = [path.rsplit("/", 1)[-1] for path in args.infiles]
    header = ["metric"] + names
    grid = [[k] + [cell(dict(rows)[k]) for rows, _ in loaded] for k in keys]
    if len(loaded) == 2:
        header.append("delta")
        for row, key in zip(grid, keys):
            a = dict(loaded[0][0])[key]
            b = dict(loaded[1][0])[key]
            row.append(_fmt(float(b) - float(a))
                       if a not in (None, "") and b not in (None, "")
                       else "n/a")
    widths = [max(len(r[i]) for r in [header] + grid)
              for i in range(len(header))]
    for row in [header] + grid:
        print("  ".join(v.ljust(w) for v, w in zip(row, widths)).rstrip())
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adte",
        description="Entropy-based online test-time adaptation over "
                    "per-instance logit streams.")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("synth", help="generate a synthetic biased stream")
    p.add_argument("--classes", type=int, default=100,
                   help="number of classes L (default 100)")
    p.add_argument("--zipf-s", type=float, default=1.0,
                   help="Zipf exponent of the class prior (default 1.0)")
    p.add_argument("--bias-strength", type=float, default=2.0,
                   help="log-prior logit offset scale (default 2.0)")
    p.add_argument("--margin", type=float, default=3.0,
                   help="true-class logit advantage (default 3.0)")
    p.add_argument("--count", type=int, default=2000,
                   help="number of instances (default 2000)")
    p.add_argument("--views", type=int, default=16,
                   help="augmented views per instance (default 16)")
    p.add_argument("--noise-sigma", type=float, default=1.0,
                   help="per-view Gaussian logit noise (default 1.0)")
    p.add_argument("--corrupt-prob", type=float, default=0.3,
                   help="chance a view's margin is attenuated (default 0.3)")
    p.add_argument("--label-dist", choices=LABEL_DISTS, default="uniform",
                   help="label sampling distribution (default uniform)")
    p.add_argument("--seed", type=int, default=0, help="world/stream seed")
    p.add_argument("--out", required=True, help="output stream path")
    p.add_argument("--format", choices=("jsonl", "bin"), default="jsonl",
                   help="stream encoding (default jsonl)")
    p.set_defaults(func=_cmd_synth, parser=p)

    p = sub.add_parser("run", help="adapt a stream online and report")
    p.add_argument("--in", dest="infile", required=True,
                   help="input stream (jsonl or binary, sniffed)")
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--measure", choices=MEASURE_NAMES,
                   help="override the entropy measure")
    p.add_argument("--q", type=float, help="override the Tsallis exponent")
    p.add_argument("--la", action=argparse.BooleanOptionalAction,
                   default=None, help="toggle logit adjustment")
    p.add_argument("--invert-q", action=argparse.BooleanOptionalAction,
                   default=None, help="toggle the bias-to-q mapping "
                   "direction (largest bias gets the smallest q)")
    p.add_argument("--n-views", type=int, help="override expected view count")
    p.add_argument("--filter-ratio", type=float,
                   help="override the kept-view ratio tau")
    p.add_argument("--bank-capacity", type=int,
                   help="override per-class memory size M")
    p.add_argument("--jacobi-max-iter", type=int,
                   help="override the prior solver iteration cap")
    p.add_argument("--jacobi-eps", type=float,
                   help="override the prior solver tolerance")
    p.add_argument("--q-alpha", type=float,
                   help="override the adaptive profile lower bound")
    p.add_argument("--q-beta", type=float,
                   help="override the adaptive profile upper bound")
    p.add_argument("--bias-refresh-period", type=int,
                   help="override instances between bias refreshes")
    p.add_argument("--buckets", type=int, default=None,
                   help="bucket count for the head/tail summary "
                   "(default min(10, L))")
    p.add_argument("--bucket-rank", choices=("index", "estimated"),
                   default="index",
                   help="rank classes by index (synthetic worlds are "
                   "head-first) or by the final estimated prior")
    p.add_argument("--report-out", help="write the report CSV here")
    p.add_argument("--seed", type=int, default=0,
                   help="accepted for interface symmetry; the adaptation "
                   "loop itself is deterministic")
    p.set_defaults(func=_cmd_run, parser=p)

    p = sub.add_parser("sweep-q",
                       help="accuracy and Tcr_K across Tsallis exponents")
    p.add_argument("--in", dest="infile", required=True,
                   help="input stream (jsonl or binary, sniffed)")
    p.add_argument("--q-list", default="0.01,0.1,0.5,0.9,1.1,1.5,2.0",
                   help="comma-separated Tsallis exponents (q = 1 excluded)")
    p.add_argument("--k-list", default="1,3,5,10,20",
                   help="comma-separated Tcr_K sizes")
    p.add_argument("--report-out", required=True,
                   help="write the sweep CSV here")
    p.set_defaults(func=_cmd_sweep_q, parser=p)

    p = sub.add_parser("analyze-f",
                       help="tabulate the SE/TE gap function F(p, q)")
    p.add_argument("--p-grid",
                   help="comma-separated p values in (0, 1); default is a "
                   "20-point log grid over [1e-4, 1e-2]")
    p.add_argument("--q-grid",
                   help="comma-separated q values (q = 1 excluded); default "
                   "covers [0.05, 0.95] and [1.05, 10]")
    p.add_argument("--out", help="output CSV path (standard output when "
                   "omitted)")
    p.set_defaults(func=_cmd_analyze_f, parser=p)

    p = sub.add_parser("report", help="compare report CSVs side by side")
    p.add_argument("--in", dest="infiles", required=True, nargs="+",
                   help="one or more report CSV files")
    p.set_defaults(func=_cmd_report, parser=p)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, args.parser)
    except AdteError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
