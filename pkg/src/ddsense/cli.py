"""Command line interface.

Subcommands: ``simulate`` (Monte Carlo MSE sweep to CSV), ``af`` (ambiguity
surface), ``sf`` (spreading-function surface or delay slice), ``estimate``
(run the estimator on an externally produced mask + observation file).

Exit codes: 0 on success, 1 on configuration/usage errors, 2 on runtime
errors.
"""

import argparse
import sys

from .channel import load_observation
from .config import default_config, load_config_file
from .errors import ConfigurationError, DdsenseError, FormatError
from .estimator import EstimatorConfig, estimate
from .grid import load_mask
from .harness import export_af, export_sf, run_campaign


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with code 2 on usage errors; remap to the config-error code
    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="ddsense", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="campaign config file (key = value lines)")
        p.add_argument("--seed", type=int, help="campaign seed override")
        p.add_argument("--out", help="output file (default: stdout)")

    p_sim = sub.add_parser("simulate", help="run an MSE-vs-SNR campaign")
    add_common(p_sim)
    p_sim.add_argument("--snr", help="comma-separated SNR points in dB")
    p_sim.add_argument("--trials", type=int, help="trials per SNR point")
    p_sim.add_argument("--method", help="comma-separated methods to run")
    p_sim.add_argument("--jobs", type=int, default=1, help="parallel worker processes")

    p_af = sub.add_parser("af", help="export the transmit ambiguity surface")
    add_common(p_af)
    p_af.add_argument("--method", choices=["full", "pilots"], default="full",
                      help="full frame or pilot lattice only")
    p_af.add_argument("--oversampling", type=int, default=8)

    p_sf = sub.add_parser("sf", help="export a spreading-function surface")
    add_common(p_sf)
    p_sf.add_argument("--method", choices=["weighted", "zf", "mf"], default="weighted")
    p_sf.add_argument("--snr", type=float, default=10.0, help="scenario SNR in dB")
    p_sf.add_argument("--oversampling", type=int, default=4)
    p_sf.add_argument("--slice-alpha", type=float, default=None,
                      help="export only the delay profile at this Doppler")
    p_sf.add_argument("--with-estimate", action="store_true",
                      help="include estimated path markers")

    p_est = sub.add_parser("estimate", help="estimate paths from observation files")
    p_est.add_argument("--mask", required=True, help="allocation mask file")
    p_est.add_argument("--obs", required=True, help="observation file")
    p_est.add_argument("--out", help="report file (default: stdout)")
    p_est.add_argument("--paths", type=int, default=1, help="model order")
    p_est.add_argument("--oversampling", type=int, default=4)
    p_est.add_argument("--threshold", type=float, default=None,
                       help="residual energy ratio for early stopping")
    p_est.add_argument("--joint-refine", action="store_true",
                       help="joint refinement pass after cancellation")
    return parser


def _load_campaign(args, extra_overrides=None):
    overrides = dict(extra_overrides or {})
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if args.config:
        try:
            return load_config_file(args.config, overrides)
        except FileNotFoundError:
            raise ConfigurationError(f"config file not found: {args.config}") from None
    return default_config(overrides)


def _write_out(text: str, out_path):
    if out_path is None:
        sys.stdout.write(text)
    else:
        with open(out_path, "w", encoding="ascii", newline="\n") as fh:
            fh.write(text)


def _cmd_simulate(args) -> int:
    overrides = {}
    if args.snr is not None:
        overrides["snr_points_db"] = args.snr
    if args.trials is not None:
        overrides["n_trials"] = args.trials
    if args.method is not None:
        overrides["methods"] = args.method
    cfg = _load_campaign(args, overrides)
    table = run_campaign(cfg, n_jobs=args.jobs)
    _write_out(table.to_csv_text(), args.out)
    return 0


def _cmd_af(args) -> int:
    cfg = _load_campaign(args)
    if args.out is None:
        raise ConfigurationError("af requires --out (surface is too large for stdout)")
    export_af(cfg, args.out, oversampling=args.oversampling,
              pilots_only=(args.method == "pilots"))
    return 0


def _cmd_sf(args) -> int:
    cfg = _load_campaign(args)
    if args.out is None:
        raise ConfigurationError("sf requires --out (surface is too large for stdout)")
    export_sf(cfg, args.out, method=args.method, snr_db=args.snr,
              oversampling=args.oversampling, slice_alpha=args.slice_alpha,
              include_estimate=args.with_estimate)
    return 0


def _report_text(report) -> str:
    lines = [f"paths {report.paths.n_paths}"]
    for i in range(report.paths.n_paths):
        g = report.paths.gammas[i]
        lines.append(
            f"path {report.paths.taus[i]:.17g} {report.paths.alphas[i]:.17g} "
            f"{g.real:.17g} {g.imag:.17g} "
            f"{1 if report.converged[report.sic_order[i]] else 0}"
        )
    lines.append("residual_energy " + " ".join(f"{e:.17g}" for e in report.residual_energy))
    return "\n".join(lines) + "\n"


def _cmd_estimate(args) -> int:
    try:
        mask = load_mask(args.mask)
        obs = load_observation(args.obs, mask)
    except FileNotFoundError as exc:
        raise ConfigurationError(f"input file not found: {exc.filename}") from None
    cfg = EstimatorConfig(
        n_paths=args.paths,
        coarse_oversampling=args.oversampling,
        residual_threshold=args.threshold,
        final_joint_refine=args.joint_refine,
    )
    report = estimate(obs, cfg)
    _write_out(_report_text(report), args.out)
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "af": _cmd_af,
    "sf": _cmd_sf,
    "estimate": _cmd_estimate,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"ddsense: {exc}", file=sys.stderr)
        return 1
    try:
        return _COMMANDS[args.command](args)
    except (ConfigurationError, FormatError) as exc:
        print(f"ddsense: configuration error: {exc}", file=sys.stderr)
        return 1
    except DdsenseError as exc:
        print(f"ddsense: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"ddsense: i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
