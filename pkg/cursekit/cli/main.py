import logging

import click
from pydantic import ValidationError

from ..config import configure_logging
from ..errors import EXIT_USAGE, CursekitError
from .commands import COMMANDS

logger = logging.getLogger(__name__)


class Failure(click.ClickException):
    def __init__(self, message, exit_code):
        super().__init__(message)
        self.exit_code = exit_code


class CursekitGroup(click.Group):
    """Maps library failures onto exit codes: 1 for usage, 2 for numerical preconditions."""

    def make_context(self, info_name, args, parent=None, **extra):
        # the group's own options are parsed here, before invoke runs
        try:
            return super().make_context(info_name, args, parent=parent, **extra)
        except click.UsageError as e:
            e.exit_code = EXIT_USAGE
            raise

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except click.UsageError as e:
            e.exit_code = EXIT_USAGE
            raise
        except CursekitError as e:
            logger.debug("command failed", exc_info=True)
            raise Failure(e.detail, e.exit_code) from e
        except ValidationError as e:
            raise Failure(f"invalid parameters: {e}", EXIT_USAGE) from e


@click.group(cls=CursekitGroup)
@click.option("--verbose", "-v", is_flag=True, help="Debug logging.")
def cli(verbose):
    """Lower bounds and discrepancies for multivariate integration."""
    configure_logging(verbose)


for command in COMMANDS:
    cli.add_command(command)


def main():
    cli(prog_name="cursekit")
