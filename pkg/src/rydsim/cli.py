"""Command line entry point.

    sim <scan> --config <file> [--set key=value]... [--seed N] [--out DIR]

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import sys

import click

from .config import SCAN_TYPES, load_config
from .errors import ConfigError, NumericsError, SimulationError
from .runner import run_experiment

EXIT_CONFIG = 2
EXIT_NUMERICS = 3


@click.group()
def main():
    """Stark-tuned Rydberg photon transistor simulations."""


def _run(scan: str, config, set_, seed, samples, out):
    overrides = {}
    for item in set_:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        overrides[key.strip()] = value.strip()
    if seed is not None:
        overrides["seed"] = seed
    if samples is not None:
        overrides["samples"] = samples
    if out is not None:
        overrides["output_dir"] = out
    cfg = load_config(config, scan, overrides)
    headline = run_experiment(cfg)
    click.echo(f"{scan} headline: {headline}")


def _add_scan_command(scan: str) -> None:
    @main.command(name=scan)
    @click.option("--config", type=click.Path(exists=True, dir_okay=False),
                  default=None, help="Flat key = value config file.")
    @click.option("--set", "set_", multiple=True, metavar="KEY=VALUE",
                  help="Override any config key (repeatable).")
    @click.option("--seed", type=int, default=None)
    @click.option("--samples", type=int, default=None)
    @click.option("--out", type=click.Path(file_okay=False), default=None,
                  help="Output directory.")
    def _cmd(config, set_, seed, samples, out, _scan=scan):
        try:
            _run(_scan, config, set_, seed, samples, out)
        except ConfigError as exc:
            click.echo(f"config error: {exc}", err=True)
            sys.exit(EXIT_CONFIG)
        except NumericsError as exc:
            click.echo(f"numerical failure: {exc}", err=True)
            sys.exit(EXIT_NUMERICS)
        except SimulationError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_NUMERICS)

    _cmd.__doc__ = f"Run the {scan} pipeline."


for _scan in SCAN_TYPES:
    _add_scan_command(_scan)


if __name__ == "__main__":
    main()
