import argparse
import logging
import os
import sys
from dataclasses import replace
from typing import List, Optional


_RUNNING_AS_SCRIPT = __package__ in (None, "")

if _RUNNING_AS_SCRIPT:
    # When bundled by PyInstaller or executed as a top-level script, ensure
    # package modules remain importable by adding the project root to sys.path.
    project_root = os.path.abspath(os.path.join(os.path.dirname(__file__), ".."))
    if project_root not in sys.path:
        sys.path.insert(0, project_root)
    from uscqed.config import EXPERIMENTS, load_config  # type: ignore
    from uscqed.experiments import run, write_diagnostics  # type: ignore
    from uscqed.sim_errors import ConfigError, SimulationError  # type: ignore
else:
    from .config import EXPERIMENTS, load_config
    from .experiments import run, write_diagnostics
    from .sim_errors import ConfigError, SimulationError

LOG_FORMAT = "%(asctime)s [%(levelname)s] %(name)s: %(message)s"

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_SIMULATION = 2


def _configure_logging(verbosity: int, log_file: Optional[str]) -> None:
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity >= 2:
        level = logging.DEBUG
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if log_file:
        handlers.append(logging.FileHandler(log_file, encoding="utf-8"))
    logging.basicConfig(level=level, format=LOG_FORMAT, handlers=handlers, force=True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="uscqed",
        description="Photon statistics of a driven qubit-cavity system at arbitrary coupling strength",
    )
    parser.add_argument("experiment", choices=EXPERIMENTS, help="Experiment to run")
    parser.add_argument("--config", "-c", dest="config_path", required=True, help="Path to the JSON run configuration")
    parser.add_argument("--out", "-o", dest="out_dir", help="Output directory (overrides output.directory)")
    parser.add_argument("--threads", "-j", type=int, default=1, help="Worker processes for parameter sweeps")
    parser.add_argument("--dump-rates", action="store_true", help="Also write the dressed-state rate table CSV")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="Increase log verbosity (-v, -vv)")
    parser.add_argument("--log-file", help="Mirror log output to this file")
    parser.add_argument(
        "--debug",
        action="store_true",
        help="Print stack traces when configuration or simulation fails",
    )
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args.verbose, args.log_file)

    config = None
    try:
        if args.threads < 1:
            raise ConfigError(f"--threads must be at least 1, got {args.threads}")
        config = load_config(args.config_path, experiment=args.experiment)
        if args.out_dir:
            config = replace(config, output=replace(config.output, directory=args.out_dir))
        paths = run(config, args.threads, dump_rates=args.dump_rates)
        for path in paths:
            print(path)
        return EXIT_OK
    except ConfigError as exc:
        if args.debug:
            import traceback

            traceback.print_exc()
        else:
            print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SimulationError as exc:
        if args.debug:
            import traceback

            traceback.print_exc()
        else:
            print(f"simulation failed: {exc}", file=sys.stderr)
        if config is not None:
            try:
                diagnostics = write_diagnostics(config, exc)
                print(f"diagnostics written to {diagnostics}", file=sys.stderr)
            except OSError as io_exc:
                print(f"could not write diagnostics: {io_exc}", file=sys.stderr)
        return EXIT_SIMULATION
    except OSError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover - CLI entry point
    sys.exit(main())
