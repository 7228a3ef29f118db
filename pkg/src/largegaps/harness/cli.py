"""Command line interface: ``largegaps <subcommand> [options]``.

Every subcommand writes CSV rows (stdout or --output) and a JSON summary
(--summary, else next to --output with a .json suffix, else stderr). Exit
codes: 0 success, 1 invalid input, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import math
import sys
import warnings

import numpy as np

from ..errors import FitUnstableError, NumericalError, ValidationError
from ..holeprob import (
    ArcUnion,
    IntervalUnion,
    estimate_c0,
    gram_hole_cue,
    gram_hole_gue,
    log_hole_cue,
)
from ..rescaling import (
    BulkInterval,
    RescaleParams,
    check_lemma1,
    check_lemma8,
    check_lemma10,
    m_of_interval,
    tau_from_gap_cue,
    tau_from_gap_gue,
)
from ..samplers import Seed, extract_gaps_cue, extract_gaps_gue, sample_cue, sample_gue
from .experiments import (
    C0_ALPHAS,
    C0_N_GRID,
    ExperimentConfig,
    default_c0,
    gumbel_from_gaps,
    poisson_factorial_check,
    sample_top_gaps,
)
from .io import csv_text, summary_text, write_text
from .parallel import worker_count
from .suites import SUITES, run_suite

CSV_COLUMNS = {
    "hole": ["ensemble", "n", "set", "log_prob", "prob", "method", "backend", "min_pivot"],
    "c0": ["alpha", "intercept", "slope"],
    "sample": ["trial", "index", "value"],
    "gumbel": ["trial", "tau"],
    "poisson": ["kind", "key", "value"],
    "checks": ["suite", "instance", "check", "lhs", "rhs", "holds"],
    "limits": ["quantity", "x", "z", "value", "limit"],
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(message)


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ValidationError(f"expected comma-separated numbers, got {text!r}") from exc


def _ints(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ValidationError(f"expected comma-separated integers, got {text!r}") from exc


def _interval(text: str | None) -> BulkInterval | None:
    if text is None:
        return None
    vals = _floats(text)
    if len(vals) != 2:
        raise ValidationError(f"an interval is two numbers 'a,b', got {text!r}")
    return BulkInterval(*vals)


def _add_common(p):
    p.add_argument("--config", help="flat key=value file mirroring the flags")
    p.add_argument("--output", default="-", help="CSV path ('-' for stdout)")
    p.add_argument("--summary", help="JSON summary path")
    p.add_argument("--threads", type=int, help="worker processes (LARGEGAPS_THREADS overrides)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="largegaps", description="Largest eigenvalue gaps of CUE and GUE.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("hole", help="exact hole probabilities")
    _add_common(p)
    p.add_argument("--ensemble", choices=("cue", "gue"), default="cue")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--arc-size", type=float, help="CUE: one arc of this length")
    p.add_argument("--arcs", help="CUE: 'start:length;start:length;...'")
    p.add_argument("--intervals", help="GUE: 'lo:hi;lo:hi;...'")
    p.add_argument("--method", choices=("toeplitz", "gram"), default="toeplitz")

    p = sub.add_parser("c0", help="estimate the expansion constant")
    _add_common(p)
    p.add_argument("--alphas", default=",".join(str(a) for a in C0_ALPHAS))
    p.add_argument("--n-grid", default=",".join(str(n) for n in C0_N_GRID))

    p = sub.add_parser("sample", help="emit sampled spectra or gaps")
    _add_common(p)
    p.add_argument("--ensemble", choices=("cue", "gue"), default="cue")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--what", choices=("spectrum", "gaps"), default="spectrum")
    p.add_argument("--interval", help="GUE gaps: 'a,b'")

    for name, help_text in (("gumbel", "largest-gap Gumbel experiment"), ("poisson", "factorial moments and counts")):
        p = sub.add_parser(name, help=help_text)
        _add_common(p)
        p.add_argument("--n", type=int, required=True)
        p.add_argument("--trials", type=int, required=True)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--c0", type=float, help="expansion constant (default: in-repo fit)")
        if name == "gumbel":
            p.add_argument("--ensemble", choices=("cue", "gue"), default="cue")
            p.add_argument("--k", type=int, default=1)
            p.add_argument("--interval", help="GUE: 'a,b'")
        else:
            p.add_argument("--x", default="0", help="thresholds 'x1,x2,...'")

    p = sub.add_parser("checks", help="operator and membership suites")
    _add_common(p)
    p.add_argument("--suite", choices=SUITES, required=True)
    p.add_argument("--n", type=int, default=16)
    p.add_argument("--instances", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ensemble", choices=("cue", "gue"), default="cue")

    p = sub.add_parser("limits", help="finite-n tables of the rescaling limits")
    _add_common(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--x", default="-1,0,1")
    p.add_argument("--z", default="0,1")
    p.add_argument("--interval", default="-1,-0.5")
    p.add_argument("--c0", type=float)
    return parser


def _config_tokens(path: str) -> list[str]:
    tokens = []
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ValidationError(f"cannot read config file {path!r}: {exc}") from exc
    for raw in lines:
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"config line {raw!r} is not key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        # Attached form, so values such as "-1,-0.5" are not read as flags.
        tokens.append("--" + key.replace("_", "-") + "=" + value)
    return tokens


def _config_path(argv) -> str | None:
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            return argv[i + 1]
        if tok.startswith("--config="):
            return tok.split("=", 1)[1]
    return None


def parse_args(argv) -> argparse.Namespace:
    argv = list(argv)
    path = _config_path(argv)
    if path is not None and argv:
        # File values go right after the subcommand so that explicit flags override them.
        argv = argv[:1] + _config_tokens(path) + argv[1:]
    return build_parser().parse_args(argv)


# ---------------------------------------------------------------------------
# Subcommands; each returns (config echo, rows, results)


def _parse_pairs(text: str) -> tuple:
    out = []
    for part in text.split(";"):
        if part.strip():
            vals = _floats(part.replace(":", ","))
            if len(vals) != 2:
                raise ValidationError(f"expected 'a:b', got {part!r}")
            out.append(tuple(vals))
    return tuple(out)


def cmd_hole(args):
    n = args.n
    if args.ensemble == "cue":
        if (args.arc_size is None) == (args.arcs is None):
            raise ValidationError("give exactly one of --arc-size and --arcs")
        arcs = ArcUnion.single(0.0, args.arc_size) if args.arcs is None else ArcUnion(_parse_pairs(args.arcs))
        label = ";".join(f"{s!r}:{l!r}" for s, l in arcs.arcs)
        if args.method == "toeplitz" and len(arcs.arcs) == 1:
            res = log_hole_cue(n, arcs.arcs[0][1] / 2.0)
        else:
            res = gram_hole_cue(n, arcs)
    else:
        if args.intervals is None:
            raise ValidationError("the GUE ensemble needs --intervals")
        ivs = IntervalUnion(_parse_pairs(args.intervals))
        label = ";".join(f"{lo!r}:{hi!r}" for lo, hi in ivs.intervals)
        res = gram_hole_gue(n, ivs)
    row = (args.ensemble, n, label, res.log_prob, res.prob, res.method, res.backend, res.min_pivot)
    config = {"ensemble": args.ensemble, "n": n, "set": label, "method": args.method}
    return config, [row], {"log_prob": res.log_prob, "backend": res.backend}


def cmd_c0(args):
    alphas, n_grid = _floats(args.alphas), _ints(args.n_grid)
    fit = estimate_c0(alphas, n_grid, strict=False)
    rows = [(a, c, s) for a, c, s in zip(fit.alphas, fit.per_alpha, fit.slopes)]
    config = {"alphas": alphas, "n_grid": n_grid}
    results = {"c0_hat": fit.c0_hat, "spread": fit.spread}
    if fit.spread > 1e-2:
        raise FitUnstableError(f"c0 fits disagree across alpha (spread {fit.spread:.3g})", fit.c0_hat, fit.spread)
    return config, rows, results


def cmd_sample(args):
    interval = _interval(args.interval)
    if args.ensemble == "gue" and args.what == "gaps" and interval is None:
        raise ValidationError("GUE gaps need --interval")
    rows = []
    for t in range(args.trials):
        seed = Seed(args.seed, t)
        if args.ensemble == "cue":
            spec = sample_cue(args.n, seed)
            values = spec.angles if args.what == "spectrum" else extract_gaps_cue(spec).gaps
        else:
            spec = sample_gue(args.n, seed)
            values = spec.values if args.what == "spectrum" else extract_gaps_gue(spec, interval).gaps
        rows.extend((t, i, v) for i, v in enumerate(values))
    config = {"ensemble": args.ensemble, "n": args.n, "trials": args.trials, "seed": args.seed,
              "what": args.what, "interval": args.interval}
    return config, rows, {"rows": len(rows)}


def cmd_gumbel(args):
    cfg = ExperimentConfig(args.ensemble, args.n, args.trials, args.k, _interval(args.interval), args.seed)
    c0 = default_c0() if args.c0 is None else args.c0
    gaps = sample_top_gaps(cfg.ensemble, cfg.n, cfg.trials, cfg.seed_root, cfg.interval,
                           worker_count(args.threads))
    dist = gumbel_from_gaps(cfg, gaps, c0)
    kth = gaps[:, cfg.k - 1]
    params = RescaleParams(cfg.n)
    taus = (tau_from_gap_cue(params, kth) if cfg.ensemble == "cue"
            else tau_from_gap_gue(params, kth, cfg.interval))
    # Trials with fewer than k gaps are reported as -inf.
    rows = [(i, float(t) if np.isfinite(t) else -math.inf) for i, t in enumerate(taus)]
    results = {
        "c0_hat": c0,
        "reference_location": dist.reference.location,
        "reference_mean": dist.reference.mean,
        "reference_variance": dist.reference.variance,
        "mean": dist.mean,
        "variance": dist.variance,
        "ks_distance": dist.ks_distance_vs_reference,
        "ks_pvalue": dist.ks_pvalue,
        "n_missing": dist.n_missing,
    }
    return cfg.to_dict(), rows, results


def cmd_poisson(args):
    x_grid = _floats(args.x)
    cfg = ExperimentConfig("cue", args.n, args.trials, len(x_grid), None, args.seed, tuple(x_grid))
    c0 = default_c0() if args.c0 is None else args.c0
    rep = poisson_factorial_check(cfg, x_grid, c0, worker_count(args.threads))
    rows = [
        ("moment", "empirical", rep.empirical_factorial_moment),
        ("moment", "standard_error", rep.standard_error),
        ("moment", "exact", rep.exact_target),
        ("moment", "asymptotic", rep.asymptotic_target),
        ("count", "tv_distance", rep.tv_distance),
    ]
    rows += [("count_hist", k, v) for k, v in sorted(rep.empirical_count_histogram.items())]
    rows += [("poisson_ref", k, v) for k, v in sorted(rep.poisson_reference.items())]
    results = {
        "c0_hat": c0,
        "empirical": rep.empirical_factorial_moment,
        "standard_error": rep.standard_error,
        "exact": rep.exact_target,
        "asymptotic": rep.asymptotic_target,
        "z_score": rep.z_score,
        "tv_distance": rep.tv_distance,
    }
    return cfg.to_dict(), rows, results


def cmd_checks(args):
    rows = run_suite(args.suite, args.n, args.instances, args.seed, args.ensemble)
    flagged = [r for r in rows if r[4] is not None]
    failures = sum(1 for r in flagged if not r[4])
    out = [(args.suite, *r) for r in rows]
    config = {"suite": args.suite, "n": args.n, "instances": args.instances, "seed": args.seed,
              "ensemble": args.ensemble}
    results = {"checked": len(flagged), "failures": failures, "all_hold": failures == 0}
    return config, out, results


def cmd_limits(args):
    params = RescaleParams(args.n, default_c0() if args.c0 is None else args.c0)
    interval = _interval(args.interval)
    c0 = params.c0_hat
    rows = []
    for x in _floats(args.x):
        rows.append(("lemma1", x, 0.0, check_lemma1(params, x), math.exp(c0 - x)))
        for z in _floats(args.z):
            rows.append(("lemma8", x, z, check_lemma8(params, x, z), math.exp(c0 - x - 2.0 * z)))
        rows.append(("lemma10", x, 0.0, check_lemma10(params, x, interval),
                     m_of_interval(interval) * math.exp(c0 - x)))
    config = {"n": args.n, "x": args.x, "z": args.z, "interval": args.interval, "c0": c0}
    return config, rows, {"rows": len(rows)}


COMMANDS = {
    "hole": cmd_hole,
    "c0": cmd_c0,
    "sample": cmd_sample,
    "gumbel": cmd_gumbel,
    "poisson": cmd_poisson,
    "checks": cmd_checks,
    "limits": cmd_limits,
}


def _emit(args, config, rows, results, caught):
    text = csv_text(CSV_COLUMNS[args.command], rows)
    config = {"command": args.command, **config}
    summary = summary_text(config, results, [str(w.message) for w in caught])
    if args.output == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        write_text(args.output, text)
    if args.summary:
        write_text(args.summary, summary)
    elif args.output != "-":
        write_text(args.output.rsplit(".", 1)[0] + ".json" if args.output.endswith(".csv")
                   else args.output + ".json", summary)
    else:
        sys.stderr.write(summary)


def cli_main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parse_args(argv)
        worker_count(args.threads)  # validate early
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            with np.errstate(all="ignore"):
                config, rows, results = COMMANDS[args.command](args)
        _emit(args, config, rows, results, caught)
        return 0
    except ValidationError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except NumericalError as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return 2


def main() -> None:
    sys.exit(cli_main())
