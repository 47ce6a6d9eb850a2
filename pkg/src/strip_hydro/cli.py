"""``strip-hydro`` command line entry point.

Exit status: 0 success, 1 validation/usage error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from .errors import NumericalError, ValidationError

log = logging.getLogger("strip_hydro")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.prog}: {message}")


def _checkpointer(outdir: Path, prefix: str, every: int):
    from .checkpoint import write_checkpoint

    def obs(state):
        if every and state.step_index % every == 0:
            write_checkpoint(outdir / f"{prefix}_{state.step_index:06d}.strp", state.u)

    return obs


def _cmd_solve_ans(args) -> int:
    from .anisotropic import ANSConfig, box_divergence, energy, run_ans
    from .checkpoint import write_checkpoint
    from .config import load_config
    from .harness import reference_data

    cfg = load_config(args.config)
    eps = args.eps if args.eps is not None else cfg.eps_list[0]
    out = Path(args.out or cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    ac = ANSConfig(cfg.grid, cfg.dt, cfg.t_end, eps, cfg.divergence_tol)
    obs = [_checkpointer(out, "ans", args.checkpoint_every)] if args.checkpoint_every else []
    res = run_ans(ac, reference_data(cfg), obs)
    st = res.state
    write_checkpoint(out / "ans_final.strp", st.u)
    div = float(np.sqrt(np.mean(np.abs(box_divergence(st.u, st.v)) ** 2)))
    print(f"t={st.t:.6g} eps={eps:g} steps={res.steps} energy={energy(st.u, st.v, eps):.6e} divergence={div:.3e}")
    return 0


def _cmd_solve_hydro(args) -> int:
    from .checkpoint import write_checkpoint
    from .config import load_config
    from .harness import DECAY_COLUMNS, fit_decay, reference_data, write_csv
    from .hydrostatic import HydroConfig, run_hydro
    from .grid import mode_energy
    from .littlewood_paley import NormSeries, block_norms_from_energy, build_partition

    cfg = load_config(args.config)
    out = Path(args.out or cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    g = cfg.grid
    p = build_partition(g)
    series = NormSeries.for_partition(p)
    l2 = []

    def rec(state):
        if state.step_index % cfg.cadence == 0 or state.step_index == cfg.nsteps:
            e = mode_energy(state.u.coeffs, g.dy)
            series.append(state.t, block_norms_from_energy(p, e))
            l2.append(float(np.sqrt(e.sum())))

    obs = [rec]
    if args.checkpoint_every:
        obs.append(_checkpointer(out, "hydro", args.checkpoint_every))
    res = run_hydro(HydroConfig(g, cfg.dt, cfg.t_end), reference_data(cfg), obs)
    write_checkpoint(out / "hydro_final.strp", res.state.u)
    write_csv(out / "decay.csv", DECAY_COLUMNS, zip(series.times, l2, series.besov_series(0.5)))
    msg = f"t={res.state.t:.6g} steps={res.steps} l2={l2[-1]:.6e}"
    if cfg.t_end >= 0.5:
        msg += f" decay_rate={fit_decay(series, (0.3 * cfg.t_end, cfg.t_end)):.4f}"
    print(msg)
    return 0


def _cmd_converge(args) -> int:
    from .config import load_config
    from .harness import CONVERGENCE_COLUMNS, format_csv_row, run_sweep, write_report

    cfg = load_config(args.config)
    out = Path(args.out or cfg.output_dir)
    report = run_sweep(cfg, workers=args.workers)
    summary = write_report(report, out)
    print(",".join(CONVERGENCE_COLUMNS))
    for r in report.rows:
        print(format_csv_row(r))
    print(f"slope={summary['slope']:.4f} residual={summary['residual']:.4f} alive={summary['alive']}")
    return 0


def _cmd_norms(args) -> int:
    from .checkpoint import read_checkpoint
    from .harness import NORMS_COLUMNS, format_csv_row, norms_row

    f = read_checkpoint(args.checkpoint)
    if args.header:
        print(",".join(NORMS_COLUMNS))
    print(format_csv_row(norms_row(f, args.s, args.time)))
    return 0


def _cmd_selftest(args) -> int:
    try:
        import pytest
    except ImportError as exc:  # pragma: no cover
        raise ValidationError("pytest is required for selftest") from exc
    tests = Path(__file__).resolve().parents[2] / "tests"
    if not tests.is_dir():
        raise ValidationError(f"test directory not found: {tests}")
    argv = [str(tests), "-q"]
    if not args.full:
        argv += ["-m", "not slow"]
    return 0 if pytest.main(argv) == 0 else 2


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="strip-hydro", description="Thin-strip anisotropic/hydrostatic Navier-Stokes toolkit")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve-ans", help="integrate the scaled anisotropic system")
    s.add_argument("--config", required=True)
    s.add_argument("--eps", type=float, default=None, help="override the first eps of the config")
    s.add_argument("--checkpoint-every", type=int, default=0, metavar="N")
    s.add_argument("--out", default=None)
    s.set_defaults(func=_cmd_solve_ans)

    s = sub.add_parser("solve-hydro", help="integrate the hydrostatic system")
    s.add_argument("--config", required=True)
    s.add_argument("--checkpoint-every", type=int, default=0, metavar="N")
    s.add_argument("--out", default=None)
    s.set_defaults(func=_cmd_solve_hydro)

    s = sub.add_parser("converge", help="paired eps sweep -> convergence.csv + summary.json")
    s.add_argument("--config", required=True)
    s.add_argument("--out", default=None)
    s.add_argument("--workers", type=int, default=None)
    s.set_defaults(func=_cmd_converge)

    s = sub.add_parser("norms", help="norm-report row for a checkpoint")
    s.add_argument("--checkpoint", required=True)
    s.add_argument("--s", type=float, default=0.5)
    s.add_argument("--time", type=float, default=0.0)
    s.add_argument("--header", action="store_true")
    s.set_defaults(func=_cmd_norms)

    s = sub.add_parser("selftest", help="run the property suite")
    s.add_argument("--full", action="store_true", help="include the slow acceptance runs")
    s.set_defaults(func=_cmd_selftest)
    return ap


def cli_main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
