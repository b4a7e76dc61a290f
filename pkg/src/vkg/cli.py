"""Command line entry point: ``vkg <subcommand> --config <path> [--out <dir>] [--quiet]``.

Exit codes: 0 success, 1 verification or I/O failure, 2 configuration error,
3 numerical failure (blow-up, failed semigroup scan, degenerate symbol).
"""
from __future__ import annotations

import argparse
import logging
import os
import sys

import numpy as np

from .config import build_config, parse_config, write_effective
from .errors import IoError, Overflow, ParseError, ValidationError, VKGError
from .experiments import LIFESPAN_NOTE, lifespan_probe
from .io import emit_plot, write_csv, write_snapshot, write_trajectory
from .normal_form import cancellation_verdict, cubic_coefficients_at_origin
from .resonance import SIGN_TUPLES_2, SIGN_TUPLES_3, format_signs, phase_floor, phi2, phi3
from .simulator import RunConfig, decay_fit, run
from .spectral_core import collision_threshold, eigenvalues, opnorm2, propagator
from .verify import all_passed, run_checks

SUBCOMMANDS = ("spectrum", "phases", "coeffs", "simulate", "lifespan", "verify")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


class _Out:
    def __init__(self, quiet: bool):
        self.quiet = quiet

    def __call__(self, *args):
        if not self.quiet:
            print(*args)


def _path(config: RunConfig, name: str) -> str:
    return os.path.join(config.out_dir, name)


def cmd_spectrum(config: RunConfig, say) -> int:
    p = config.params
    k = np.round(np.linspace(-10.0, 10.0, 401), 12)
    ev = eigenvalues(p, k)
    norms = opnorm2(propagator(p, k, 1.0))
    rows = zip(k, ev.lambda_plus.real, ev.lambda_plus.imag, ev.lambda_minus.real, ev.lambda_minus.imag, norms)
    header = ("k", "re_lambda_plus", "im_lambda_plus", "re_lambda_minus", "im_lambda_minus", "propagator_norm_t1")
    path = write_csv(_path(config, "spectrum.csv"), header, ([x + 0.0 for x in r] for r in rows))
    say(f"collision threshold k1 = {collision_threshold(p):.12g}")
    say(f"wrote {path}")
    return EXIT_OK


def cmd_phases(config: RunConfig, say) -> int:
    p = config.params
    axis = np.round(np.linspace(-0.5, 0.5, 41), 12)
    kk, ll = np.meshgrid(axis, axis, indexing="ij")
    cols2 = [np.abs(phi2(p, j, kk, ll)).ravel() for j in SIGN_TUPLES_2]
    header2 = ["k", "l"] + [f"abs_phi2_{format_signs(j)}" for j in SIGN_TUPLES_2]
    path2 = write_csv(_path(config, "phases2.csv"), header2, zip(kk.ravel(), ll.ravel(), *cols2))

    axis3 = np.round(np.linspace(-0.25, 0.25, 11), 12)
    g = np.meshgrid(axis3, axis3, axis3, indexing="ij")
    cols3 = [np.abs(phi3(p, j, *g)).ravel() for j in SIGN_TUPLES_3]
    header3 = ["k", "l1", "l2"] + [f"abs_phi3_{format_signs(j)}" for j in SIGN_TUPLES_3]
    path3 = write_csv(_path(config, "phases3.csv"), header3, zip(*(x.ravel() for x in g), *cols3))
    floor = phase_floor(p, 2, 0.1, 0.005)
    say(f"quadratic phase floor on [-0.1, 0.1]^2: {floor.floor:.6f} at {format_signs(floor.argmin_signs)}")
    say(f"wrote {path2}")
    say(f"wrote {path3}")
    return EXIT_OK


def cmd_coeffs(config: RunConfig, say) -> int:
    table = cubic_coefficients_at_origin(config.params)
    header = ("signs", "n3_re", "n3_im", "q3_re", "q3_im")
    rows = [
        (label, f"{n3.real + 0.0:.12g}", f"{n3.imag + 0.0:.12g}", f"{q3.real + 0.0:.12g}", f"{q3.imag + 0.0:.12g}")
        for label, n3, q3 in table.rows()
    ]
    path = write_csv(_path(config, "coeffs.csv"), header, rows)
    report = cancellation_verdict(table)
    with open(_path(config, "coeffs_verdict.txt"), "w") as fh:
        fh.write(report.summary() + "\n")
    say(report.summary())
    say(f"wrote {path}")
    return EXIT_OK


def cmd_simulate(config: RunConfig, say) -> int:
    result = run(config)
    path = write_trajectory(_path(config, "trajectory.csv"), result.records)
    write_snapshot(_path(config, "snapshot_final.csv"), result.final, result.records[-1].t)
    say(f"wrote {path}")
    if len(result.records) >= 10:
        try:
            say(f"wrote {emit_plot(result.records, _path(config, 'decay.svg'))}")
        except IoError as exc:
            say(f"no plot: {exc}")
    t_last = result.records[-1].t
    if t_last >= 200:
        say(f"decay exponent over [20, {t_last:g}]: {decay_fit(result.records, 20.0, t_last):.4f}")
    say(f"max boundary energy fraction {result.boundary_fraction:.3e}")
    if result.blowup_time is not None:
        say(f"blow-up at t = {result.blowup_time:g}")
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_lifespan(config: RunConfig, say) -> int:
    ladder = [config.epsilon, config.epsilon / 2, config.epsilon / 4]
    table = lifespan_probe(config, ladder, config.t_end)
    path = write_csv(_path(config, "lifespan.csv"), ("epsilon", "bounded_until"), table.rows)
    with open(_path(config, "lifespan_report.txt"), "w") as fh:
        fh.write(f"budget = {table.budget:g}, threshold = {table.factor:g} x plateau\n")
        fh.write(f"monotone = {table.is_monotone()}\n")
        fh.write(f"note: {table.note}\n")
    for eps, until in table.rows:
        say(f"epsilon = {eps:g}: bounded until {until:g}")
    say(f"note: {LIFESPAN_NOTE}")
    say(f"wrote {path}")
    return EXIT_OK


def cmd_verify(config: RunConfig, say) -> int:
    results = run_checks(config.seed)
    lines = [f"{'PASS' if r.ok else 'FAIL'}  {r.name}: {r.detail} ({r.seconds:.2f} s)" for r in results]
    with open(_path(config, "verify.txt"), "w") as fh:
        fh.write("\n".join(lines) + "\n")
    for line in lines:
        say(line)
    ok = all_passed(results)
    say("all checks passed" if ok else "verification FAILED")
    return EXIT_OK if ok else EXIT_FAIL


COMMANDS = {
    "spectrum": cmd_spectrum,
    "phases": cmd_phases,
    "coeffs": cmd_coeffs,
    "simulate": cmd_simulate,
    "lifespan": cmd_lifespan,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vkg", description="Viscous Klein-Gordon resonance toolkit")
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("--config", help="key = value configuration file (defaults if omitted)")
    parser.add_argument("--out", help="output directory (overrides out_dir)")
    parser.add_argument("--quiet", action="store_true", help="suppress console output")
    return parser


def dispatch(subcommand: str, config: RunConfig, quiet: bool = False) -> int:
    say = _Out(quiet)
    try:
        return COMMANDS[subcommand](config, say)
    except (Overflow, VKGError) as exc:
        if isinstance(exc, IoError):
            print(f"vkg: {exc}", file=sys.stderr)
            return EXIT_FAIL
        print(f"vkg: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"vkg: {exc}", file=sys.stderr)
        return EXIT_FAIL


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.WARNING, format="vkg: %(message)s")
    try:
        if args.config:
            config = parse_config(args.config, out_dir=args.out)
        else:
            config = build_config({"out_dir": args.out} if args.out else {})
            write_effective(config)
    except (ParseError, ValidationError) as exc:
        print(f"vkg: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return dispatch(args.subcommand, config, args.quiet)


if __name__ == "__main__":
    sys.exit(main())
