"""
Command-line harness.

    liedeconv rate-sweep CONFIG [--threads N]
    liedeconv kernel-profile DENSITY --cutoff T [--group G]
    liedeconv weyl-check GROUP --tmax T [--tmin T] [--points K]
    liedeconv simulate CONFIG --out FILE [--n N] [--cutoff T]
    liedeconv estimate --obs FILE --density DENSITY --T T [--out FILE]

DENSITY is ``name[:key=value,...]``, e.g. ``poly_decay:nu=1,band=64``.
Exit codes: 0 success, 2 configuration error, 3 numerical refusal, 4 I/O error.
"""

import argparse
import json
import logging
from pathlib import Path
import sys
import warnings

from .densities import make_density, parse_density_spec
from .errors import ConfigError, GroupMismatchError, IllConditionedError, SamplerError
from .estimator import bandwidth_T, deconvolve_estimate
from .experiment import DEFAULT_PROFILE_CUTOFF, ExperimentConfig, dumps17, profile_density, \
    run_rate_sweep, weyl_check
from .groups import get_group
from .simulate import ObservationSet, simulate_dataset

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4

log = logging.getLogger("liedeconv")


def _density(spec, group):
    name, params = parse_density_spec(spec)
    if group is None:
        group = "SO3" if name == "bump" else "Torus1"
    try:
        return make_density(name, group, **params)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"density {spec!r}: {exc}") from None


def cmd_rate_sweep(args):
    config = ExperimentConfig.load(args.config)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        table = run_rate_sweep(config, threads=args.threads)
    for msg in table.warnings:
        log.warning(msg)
    out = args.output or config.output
    if out:
        csv_path, json_path = table.write(out, config)
        log.info("wrote %s and %s", csv_path, json_path)
    else:
        sys.stdout.write(table.csv_text())
    if table.fitted_slope is not None:
        log.info("fitted slope %.4f +- %.4f, theoretical %.4f",
                 table.fitted_slope, table.slope_stderr, table.theoretical_slope)
    return EXIT_OK


def cmd_kernel_profile(args):
    h = _density(args.density, args.group)
    cutoff = args.cutoff if args.cutoff is not None else DEFAULT_PROFILE_CUTOFF[h.group.name]
    prof, notes = profile_density(h, cutoff)
    doc = {"density": h.describe(), "cutoff": cutoff, "warnings": notes,
           "profile": prof.to_dict() if prof is not None else None}
    sys.stdout.write(dumps17(doc) + "\n")
    return EXIT_OK


def cmd_weyl_check(args):
    try:
        group = get_group(args.group)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    try:
        doc = weyl_check(group, args.tmin, args.tmax, args.points)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    sys.stdout.write(dumps17(doc) + "\n")
    return EXIT_OK


def cmd_simulate(args):
    config = ExperimentConfig.load(args.config)
    n = args.n if args.n is not None else config.n_grid[-1]
    group = config.group_spec
    cutoff = args.cutoff if args.cutoff is not None else bandwidth_T(n, config.s, config.nu, group.dim)
    truth = config.truth()
    truth = truth.truncate(cutoff) if cutoff <= truth.cutoff else truth.extend(cutoff)
    h = config.density()
    obs = simulate_dataset(truth, h, n, config.epsilon, config.seed, truth_name=config.truth_name)
    obs.seed = config.seed
    Path(args.out).write_text(obs.to_json())
    log.info("wrote %d observations (cutoff %g) to %s", n, cutoff, args.out)
    return EXIT_OK


def cmd_estimate(args):
    try:
        obs = ObservationSet.from_json(Path(args.obs).read_text())
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"{args.obs}: not an observation file ({exc})") from None
    h = _density(args.density, obs.group.name)
    est = deconvolve_estimate(obs, h, args.T)
    text = json.dumps(est.to_dict()) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="liedeconv", description=__doc__.split("\n\n")[0].strip(),
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rate-sweep", help="Monte-Carlo risk over an n grid and its log-log slope")
    p.add_argument("config")
    p.add_argument("--threads", type=int, default=None, help="worker threads (results do not depend on it)")
    p.add_argument("--output", default=None, help="CSV path overriding the config's output")
    p.set_defaults(func=cmd_rate_sweep)

    p = sub.add_parser("kernel-profile", help="operator-norm profile and fitted nu of a density")
    p.add_argument("density")
    p.add_argument("--cutoff", type=float, default=None)
    p.add_argument("--group", default=None)
    p.set_defaults(func=cmd_kernel_profile)

    p = sub.add_parser("weyl-check", help="growth exponent of sum d^2 over lambda < T")
    p.add_argument("group")
    p.add_argument("--tmax", type=float, required=True)
    p.add_argument("--tmin", type=float, default=100.0)
    p.add_argument("--points", type=int, default=13)
    p.set_defaults(func=cmd_weyl_check)

    p = sub.add_parser("simulate", help="draw one observation set from a config")
    p.add_argument("config")
    p.add_argument("--out", required=True)
    p.add_argument("--n", type=int, default=None, help="sample size (default: last of n_grid)")
    p.add_argument("--cutoff", type=float, default=None, help="lambda cutoff (default: bandwidth rule)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", help="deconvolve an observation file")
    p.add_argument("--obs", required=True)
    p.add_argument("--density", required=True)
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_estimate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, GroupMismatchError) as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    except (IllConditionedError, SamplerError) as exc:
        log.error("numerical refusal: %s", exc)
        return EXIT_NUMERIC
    except OSError as exc:
        log.error("I/O error: %s", exc)
        return EXIT_IO
    except ValueError as exc:
        log.error("invalid input: %s", exc)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
