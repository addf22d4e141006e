"""``wavelife`` command line: exponents, solve, verify, iterate, sweep.

Exit codes: 0 success, 1 configuration error, 2 numerical abort,
3 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, RunConfig, load_config
from .exponents import (
    ProblemParams,
    fujita_exponent,
    gamma,
    lifespan_exponent,
    strauss_exponent,
    thm4_condition,
)
from .functionals import PreconditionError, compute_constants, verify_all
from .iteration import IterationFrame, predicted_lifespan
from .solver import MODES, BoundaryContamination, solve
from .special import yz_lemma_check
from .sweep import SweepError, run_sweep, sweep_csv, write_sweep

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_VERIFY = 0, 1, 2, 3


def _writer(stream):
    return csv.writer(stream, lineterminator="\n")


def _fmt(x):
    return "" if x is None else repr(float(x))


def _config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig(ProblemParams(n=1, p=2.0, eps=0.5))
    return cfg.override(mode=args.mode, threshold=args.threshold, out_dir=args.out)


def _out(cfg: RunConfig) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _maybe(fn, *a):
    try:
        return fn(*a)
    except ValueError:
        return None


def cmd_exponents(args, cfg, out):
    w = _writer(sys.stdout)
    p = cfg.params.p
    w.writerow(["n", "p_S", "p_F", "p", "gamma", "thm1", "thm2", "thm3"])
    for n in range(1, 11):
        w.writerow(
            [n, _fmt(strauss_exponent(n)), _fmt(fujita_exponent(n)), _fmt(p), _fmt(gamma(p, n))]
            + [_fmt(_maybe(lifespan_exponent, p, n, th)) for th in ("thm1", "thm2", "thm3")]
        )
    if cfg.params.n == 2 and cfg.params.p == 2:
        print(f"thm4_condition,{thm4_condition(cfg.params)}")
    return EXIT_OK


def _solve(cfg: RunConfig, dr=None):
    return solve(
        cfg.params, cfg.data(), cfg.grid(dr), cfg.horizon, mode=cfg.mode, threshold=cfg.threshold, sample_dt=cfg.sample_dt
    )


def _dump_fields(trace, path):
    with open(path, "w", newline="") as fh:
        w = _writer(fh)
        w.writerow(["t", "r", "u", "u_t"])
        for k, t in enumerate(trace.times):
            for r, u, v in zip(trace.r, trace.u[k], trace.v[k]):
                w.writerow([repr(float(t)), repr(float(r)), repr(float(u)), repr(float(v))])


def _report_row(rep):
    return [rep.blew_up, repr(rep.T_num), rep.reason.value, repr(rep.dt_last), repr(rep.threshold), rep.steps]


def cmd_solve(args, cfg, out):
    trace = _solve(cfg)
    w = _writer(sys.stdout)
    w.writerow(["blew_up", "T_num", "reason", "dt_last", "threshold", "steps"])
    w.writerow(_report_row(trace.report))
    if args.dump_fields:
        _dump_fields(trace, out / "fields.csv")
    return EXIT_OK


def cmd_verify(args, cfg, out):
    trace = _solve(cfg)
    coarse = _solve(cfg, cfg.dr * cfg.coarse_factor)
    verdicts, ft, c = verify_all(trace, coarse)
    w = _writer(sys.stdout)
    w.writerow(["name", "margin", "tol", "pass"])
    for v in verdicts:
        w.writerow(v.row())
    p, n, R = cfg.params.p, cfg.params.n, cfg.params.R
    with open(out / "yz_lemma.csv", "w", newline="") as fh:
        yw = _writer(fh)
        yw.writerow(["t", "integral", "ratio"])
        for t in np.geomspace(1.0, 100.0, 25):
            lhs, ratio = yz_lemma_check(float(t), p, n, R)
            yw.writerow([repr(float(t)), repr(lhs), repr(ratio)])
    _write_json(
        out / "verify.json",
        {
            "report": dict(zip(["blew_up", "T_num", "reason", "dt_last", "threshold", "steps"], _report_row(trace.report))),
            "t_stop": ft.t_stop,
            "constants": c.as_dict(),
            "verdicts": [v.__dict__ for v in verdicts],
            "all_passed": all(v.passed for v in verdicts),
        },
    )
    if args.dump_fields:
        _dump_fields(trace, out / "fields.csv")
    return EXIT_OK if all(v.passed for v in verdicts) else EXIT_VERIFY


def frames_for(cfg: RunConfig, constants):
    """Every iteration frame admissible for ``cfg.params``."""
    out = []
    for variant in ("standard", "improved"):
        try:
            out.append(IterationFrame.from_constants(cfg.params, constants, variant))
        except ValueError:
            pass
    return out


def _frame_summary(fr):
    b = predicted_lifespan(fr)
    return {
        "variant": fr.variant,
        "log_D1": fr.log_D1,
        "C": fr.C,
        "S_inf": fr.S_inf,
        "C_tail": fr.C_tail,
        "log_C7": fr.log_C7,
        "log_eps0": fr.log_eps0,
        "rate": fr.rate,
        "log_T_bound": b.log_T,
        "asserted": b.asserted,
    }


def cmd_iterate(args, cfg, out):
    c = compute_constants(cfg.params, cfg.data())
    frames = frames_for(cfg, c)
    if not frames:
        raise ConfigError(f"no iteration frame applies to p={cfg.params.p}, n={cfg.params.n}")
    w = _writer(sys.stdout)
    w.writerow(["variant", "j", "a_j", "b_j", "log_D_bound", "log_D_propagated"])
    for fr in frames:
        a, b = fr.recurrence(12)
        prop = fr.log_D_propagated(12)
        for j in range(1, 13):
            w.writerow([fr.variant, j, repr(a[j - 1]), repr(b[j - 1]), repr(fr.log_D_bound(j)), repr(prop[j - 1])])
    w.writerow(["variant", "log_C7", "log_eps0", "rate", "log_T_bound", "asserted"])
    summaries = [_frame_summary(fr) for fr in frames]
    for s in summaries:
        w.writerow([s["variant"], repr(s["log_C7"]), repr(s["log_eps0"]), repr(s["rate"]), repr(s["log_T_bound"]), s["asserted"]])
    _write_json(out / "iterate.json", {"constants": c.as_dict(), "frames": summaries})
    return EXIT_OK


def cmd_sweep(args, cfg, out):
    if not cfg.eps_list:
        raise ConfigError("sweep needs [sweep] eps or eps_start/eps_stop/eps_num")
    result = run_sweep(cfg)
    c = compute_constants(cfg.params, cfg.data())
    prov = {"source": "C1 is the grid supremum of the test-function ratio over t in [0, 1000]", **c.as_dict()}
    prov["frames"] = [_frame_summary(fr) for fr in frames_for(cfg, c)]
    write_sweep(result, cfg, out, prov)
    sys.stdout.write(sweep_csv(result))
    if result.fit:
        print(f"# fitted_slope={result.fit.slope!r} theoretical={result.theoretical_exponent!r}")
    else:
        print(f"# no slope: {result.fit_note}")
    return EXIT_OK


COMMANDS = {
    "exponents": cmd_exponents,
    "solve": cmd_solve,
    "verify": cmd_verify,
    "iterate": cmd_iterate,
    "sweep": cmd_sweep,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="INI run configuration")
    common.add_argument("--out", metavar="DIR", help="output directory (overrides [output] dir)")
    common.add_argument("--dump-fields", action="store_true", help="write time-sampled u, u_t to fields.csv")
    common.add_argument("--mode", choices=MODES, help="override [run] mode")
    common.add_argument("--threshold", type=float, metavar="AMPLITUDE", help="blow-up amplitude threshold")
    parser = argparse.ArgumentParser(prog="wavelife", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=fn.__name__[4:])
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _config(args)
        out = _out(cfg)
        return COMMANDS[args.command](args, cfg, out)
    except (ConfigError, PreconditionError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (BoundaryContamination, SweepError, FloatingPointError) as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
