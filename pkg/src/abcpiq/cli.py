"""Command-line entry point.

Subcommands: r0, sensitivity, series, simulate, check, fit, ml.
Exit status is 0 on success, 1 on usage or input errors and 2 on
numerical or solver failures.
"""

from __future__ import annotations

import argparse
import contextlib
import sys

import numpy as np

from . import analysis, calibrate, io, ladm, model, solver
from .errors import (
    AbcPiqError,
    ConfigError,
    ConvergenceError,
    DegenerateModelError,
    DomainError,
    SolverError,
)
from .special import MLParams, mittag_leffler

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


@contextlib.contextmanager
def _output(path):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def _floats(text, n):
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != n:
        raise _UsageError(f"expected {n} comma-separated numbers, got {text!r}")
    try:
        return [float(p) for p in parts]
    except ValueError:
        raise _UsageError(f"expected numbers, got {text!r}") from None


def _config(args):
    cfg = io.load_config(args.config)
    changes = {}
    for key in ("theta", "b_norm", "t_end", "steps", "order"):
        val = getattr(args, key, None)
        if val is not None:
            changes[key] = val
    if getattr(args, "source_every_term", False):
        changes["source_every_term"] = True
    return cfg.replace(**changes) if changes else cfg


# -- subcommands --------------------------------------------------------

def cmd_r0(args):
    cfg = _config(args)
    print(f"{model.r0(cfg.params):.7g}")


def cmd_sensitivity(args):
    cfg = _config(args)
    rep = analysis.sensitivity_indices(cfg.params, args.mode)
    with _output(args.out) as fh:
        io.write_csv(fh, ["parameter", "index"], [(e.name, e.index) for e in rep.entries])


def cmd_series(args):
    cfg = _config(args)
    s = ladm.ladm_expand(cfg.params, cfg.init, cfg.theta, cfg.b_norm, cfg.order,
                         cfg.source_every_term)
    if args.print:
        print(s.render())
        if args.out is None:
            return
    if args.samples < 1:
        raise _UsageError("--samples must be >= 1")
    ts = np.linspace(0.0, args.t_max, args.samples) if args.samples > 1 else np.array([0.0])
    vals = ladm.series_eval(s, ts)
    with _output(args.out) as fh:
        io.write_csv(fh, ["t", "P", "I", "Q"], (
            (t, *row) for t, row in zip(ts.tolist(), vals.tolist())
        ))


def cmd_simulate(args):
    cfg = _config(args)
    grid = solver.Grid(cfg.t_end, cfg.steps)
    traj = solver.solve_abc(cfg.params, cfg.init, cfg.theta, cfg.b_norm, grid)
    ts = traj.times.tolist()
    with _output(args.out) as fh:
        io.write_csv(fh, ["t", "P", "I", "Q"], (
            (t, *row) for t, row in zip(ts, traj.states.tolist())
        ))
    if args.diagnostics:
        with _output(args.diagnostics) as fh:
            rows = (
                (repr(t), "1" if neg else "0", str(int(it)))
                for t, neg, it in zip(ts, traj.negative.tolist(), traj.iterations.tolist())
            )
            io.write_csv(fh, ["t", "negative", "iterations"], rows)


def cmd_check(args):
    cfg = _config(args)
    box = _floats(args.box, 3)
    rep = analysis.stability_report(cfg.params, box, cfg.theta, args.tau, cfg.b_norm)
    for line in rep.lines():
        print(line)


def cmd_fit(args):
    cfg = _config(args)
    data = io.load_cases(args.data)
    free = tuple(n.strip() for n in args.free.split(",") if n.strip())
    spec = calibrate.CalibrationSpec(cfg.params, free, cfg.init, cfg.theta, cfg.b_norm)
    res = calibrate.fit(spec, data, starts=args.starts, seed=args.seed)
    fitted = cfg.replace(**res.params.as_dict())
    header = (f"fitted: {', '.join(free) or 'none'}\n"
              f"loss = {io.format_number(res.loss)}\n"
              f"iterations = {res.iterations}, converged = {'yes' if res.converged else 'no'}")
    with _output(args.out) as fh:
        fh.write(io.render_config(fitted, header))
    if args.residuals:
        rows = calibrate.residual_report(res.params, data, cfg.theta, cfg.init, cfg.b_norm)
        with _output(args.residuals) as fh:
            io.write_csv(fh, ["t", "observed", "predicted", "residual"], rows)


def cmd_ml(args):
    print(f"{mittag_leffler(MLParams(args.alpha, args.beta), args.z):.15g}")


# -- parser -------------------------------------------------------------

def build_parser():
    p = _Parser(prog="abcpiq", description="Fractional (ABC) P-I-Q epidemic model toolkit")
    sub = p.add_subparsers(dest="command", parser_class=_Parser, metavar="COMMAND")
    sub.required = True

    def with_config(sp, required=True):
        sp.add_argument("--config", required=required,
                        help="scenario file (table2.cfg / table3.cfg name the shipped ones)")
        sp.add_argument("--b-norm", dest="b_norm", type=float, help="normalization ABC(theta)")

    sp = sub.add_parser("r0", help="basic reproduction number")
    with_config(sp)
    sp.set_defaults(func=cmd_r0)

    sp = sub.add_parser("sensitivity", help="normalized sensitivity indices of R0 (CSV)")
    with_config(sp)
    sp.add_argument("--mode", choices=("analytic", "finite_difference"), default="analytic")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_sensitivity)

    sp = sub.add_parser("series", help="Laplace-Adomian series solution (CSV t,P,I,Q)")
    with_config(sp)
    sp.add_argument("--theta", type=float)
    sp.add_argument("--order", type=int)
    sp.add_argument("--t-max", dest="t_max", type=float, default=1.0)
    sp.add_argument("--samples", type=int, default=101)
    sp.add_argument("--print", action="store_true", help="print the iterates instead of CSV")
    sp.add_argument("--source-every-term", dest="source_every_term", action="store_true")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_series)

    sp = sub.add_parser("simulate", help="numerical solution on a uniform grid (CSV t,P,I,Q)")
    with_config(sp)
    sp.add_argument("--theta", type=float)
    sp.add_argument("--t-end", dest="t_end", type=float)
    sp.add_argument("--steps", type=int)
    sp.add_argument("--out")
    sp.add_argument("--diagnostics", help="CSV of per-step flags")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("check", help="Lipschitz, contraction and Ulam-Hyers constants")
    with_config(sp)
    sp.add_argument("--tau", type=float, required=True)
    sp.add_argument("--theta", type=float)
    sp.add_argument("--box", required=True, help="state bounds P,I,Q")
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("fit", help="fit rates to a t,cases CSV")
    with_config(sp)
    sp.add_argument("--data", required=True)
    sp.add_argument("--free", required=True, help="comma-separated rate names")
    sp.add_argument("--theta", type=float)
    sp.add_argument("--starts", type=int, default=1)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out")
    sp.add_argument("--residuals", help="CSV of t,observed,predicted,residual")
    sp.set_defaults(func=cmd_fit)

    sp = sub.add_parser("ml", help="Mittag-Leffler function E_{alpha,beta}(z)")
    sp.add_argument("--alpha", type=float, required=True)
    sp.add_argument("--beta", type=float, default=1.0)
    sp.add_argument("--z", type=float, required=True)
    sp.set_defaults(func=cmd_ml)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args.func(args)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (SolverError, ConvergenceError, DegenerateModelError, OverflowError) as exc:
        print(f"abcpiq: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, DomainError, OSError) as exc:
        print(f"abcpiq: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except AbcPiqError as exc:
        print(f"abcpiq: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
