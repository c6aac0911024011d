import argparse
import logging
import math
import sys
from pathlib import Path
from typing import List, Optional

from pydantic import ValidationError

from app.core.config import config
from app.core.exceptions import SimulationError
from app.core.utils import write_csv, write_json
from app.models.models import (
    ChiralDemoConfig,
    EtaConfig,
    FloquetVerifyConfig,
    ModulationParams,
    ScheduleConfig,
    ZipConfig,
)
from app.services.bessel import j0_first_root
from app.services.chiral import POPULATION_COLUMNS, population_series
from app.services.floquet import effective_kappa, eta, h0_residual, run_ratio_ladder, sweep_to_csv, sweep_to_json
from app.services.zipper import execute_schedule, generate_schedule, trajectory_to_csv, trajectory_to_json

logger = logging.getLogger("zipper")


def _f_value(text: str) -> Optional[float]:
    if text == "auto":
        return None
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"--f takes 'auto' or a number, got {text!r}")


def _output_format(requested: Optional[str], out: Optional[Path], default: str) -> str:
    if requested:
        return requested
    if out is None:
        return default
    return "json" if out.suffix.lower() == ".json" else "csv"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zipper",
        description="Chiral spin-wave zipper: GHZ preparation and Floquet verification",
    )
    parser.add_argument("--log-level", default=config.LOG_LEVEL, help="logging level (default from ZIPPER_LOG_LEVEL)")
    sub = parser.add_subparsers(dest="command", required=True)

    demo = sub.add_parser("chiral-demo", help="three-spin chiral rotation populations")
    demo.add_argument("--kappa", type=float, default=config.KAPPA)
    demo.add_argument("--periods", type=float, default=3.0, help="duration in rotation periods T")
    demo.add_argument("--samples", type=int, default=60)
    demo.add_argument("--out", type=Path)
    demo.add_argument("--format", choices=("csv", "json"))

    zipper = sub.add_parser("zip", help="run the zipper on an odd register")
    zipper.add_argument("--spins", type=int, required=True)
    zipper.add_argument("--kappa", type=float, default=config.KAPPA)
    zipper.add_argument("--out", type=Path)
    zipper.add_argument("--format", choices=("csv", "json"))
    zipper.add_argument("--populations", action="store_true", help="store full population vectors")
    zipper.add_argument("--x-axis-half-pi", action="store_true", help="apply the pi/2 pulse about x")

    schedule = sub.add_parser("schedule", help="print the zipper schedule without running it")
    schedule.add_argument("--spins", type=int, required=True)

    eta_cmd = sub.add_parser("eta", help="effective coupling factor eta(f, delta_phi)")
    eta_cmd.add_argument("--f", type=_f_value, default=None, help="'auto' (first J0 root) or a number")
    eta_cmd.add_argument("--delta-phi", type=float, default=2 * math.pi / 3)
    eta_cmd.add_argument("--n-max", type=int, default=config.N_MAX)
    eta_cmd.add_argument("--g", type=float, default=1.0)
    eta_cmd.add_argument("--nu-d", type=float)

    verify = sub.add_parser("floquet-verify", help="effective vs full dynamics over nu_d/g")
    verify.add_argument("--ratio", type=float, action="append", required=True, help="nu_d/g, repeatable")
    verify.add_argument("--g", type=float, default=1.0)
    verify.add_argument("--f", type=_f_value, default=None)
    verify.add_argument("--samples", type=int, default=11)
    verify.add_argument("--cutoff", type=int, default=config.PHOTON_CUTOFF)
    verify.add_argument("--steps-per-period", type=int, default=config.STEPS_PER_PERIOD)
    verify.add_argument("--workers", type=int, default=1)
    verify.add_argument("--out", type=Path)
    verify.add_argument("--format", choices=("csv", "json"))
    return parser


def _chiral_demo(args) -> None:
    run = ChiralDemoConfig(
        kappa=args.kappa,
        periods=args.periods,
        samples=args.samples,
        out=args.out,
        format=_output_format(args.format, args.out, "csv"),
    )
    rows = population_series(run.kappa, run.periods, run.samples)
    metadata = {"kappa": run.kappa, "periods": run.periods, "samples": run.samples}
    if run.format == "csv":
        write_csv(run.out, POPULATION_COLUMNS, rows, metadata=metadata)
    else:
        write_json(run.out, {"metadata": metadata, "rows": [dict(zip(POPULATION_COLUMNS, row)) for row in rows]})


def _zip(args) -> None:
    run = ZipConfig(
        spins=args.spins,
        kappa=args.kappa,
        out=args.out,
        format=_output_format(args.format, args.out, "json"),
        populations=args.populations,
        half_pi_phase=0.0 if args.x_axis_half_pi else -math.pi / 2,
    )
    schedule = generate_schedule(run.spins, half_pi_phase=run.half_pi_phase)
    _, record = execute_schedule(schedule, run.kappa, record_populations=run.populations)
    if run.format == "csv":
        trajectory_to_csv(record, run.out)
    else:
        trajectory_to_json(record, run.out)
    if run.out is not None:
        print(f"M={run.spins} fidelity_to_ghz={record.final_fidelity_to_ghz:.12g} pulses={record.pulse_counts}")


def _schedule(args) -> None:
    run = ScheduleConfig(spins=args.spins)
    schedule = generate_schedule(run.spins)
    for line in schedule.describe():
        print(line)
    counts = schedule.pulse_counts()
    print(f"pi pulses: {counts['pi']}, pi/2 pulses: {counts['half_pi']}")


def _eta(args) -> None:
    run = EtaConfig(f=args.f, delta_phi=args.delta_phi, n_max=args.n_max, g=args.g, nu_d=args.nu_d)
    f = j0_first_root() if run.f is None else run.f
    value = eta(f, run.delta_phi, run.n_max)
    print(f"f = {f:.12g}")
    print(f"delta_phi = {run.delta_phi:.12g}")
    print(f"eta = {value:.12g}")
    if run.nu_d is not None:
        print(f"kappa = {effective_kappa(run.g, run.nu_d, f, run.n_max):.12g}")
    # h_0 does not depend on nu_d
    residual = h0_residual(ModulationParams.protocol(g=run.g, nu_d=run.nu_d or 1.0, f=f))
    print(f"h0_residual = {residual:.12g}")


def _floquet_verify(args) -> None:
    run = FloquetVerifyConfig(
        ratios=args.ratio,
        g=args.g,
        f=args.f,
        samples=args.samples,
        photon_cutoff=args.cutoff,
        steps_per_period=args.steps_per_period,
        workers=args.workers,
        out=args.out,
        format=_output_format(args.format, args.out, "csv"),
    )
    f = j0_first_root() if run.f is None else run.f
    points = run_ratio_ladder(
        run.ratios,
        g=run.g,
        f=f,
        photon_cutoff=run.photon_cutoff,
        steps_per_period=run.steps_per_period,
        fractions=[i / (run.samples - 1) for i in range(run.samples)],
        workers=run.workers,
    )
    metadata = {
        "g": run.g,
        "f": f,
        "photon_cutoff": run.photon_cutoff,
        "steps_per_period": run.steps_per_period,
    }
    if run.format == "csv":
        sweep_to_csv(points, run.out, metadata=metadata)
    else:
        sweep_to_json(points, run.out, metadata=metadata)


COMMANDS = {
    "chiral-demo": _chiral_demo,
    "zip": _zip,
    "schedule": _schedule,
    "eta": _eta,
    "floquet-verify": _floquet_verify,
}


def run_command(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    logging.basicConfig(level=getattr(logging, str(args.log_level).upper(), logging.WARNING))
    try:
        COMMANDS[args.command](args)
    except (SimulationError, ValidationError, ValueError) as exc:
        logger.debug(f"{args.command} failed", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(run_command())
