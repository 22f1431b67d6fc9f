"""
Shared base for the uqflow management commands.

Toolkit errors become ``CommandError`` with the error's exit code
(2 configuration, 3 numerical); I/O failures exit with 4.
"""

import logging

from django.core.management.base import BaseCommand, CommandError

from common.exceptions import UqflowError

logger = logging.getLogger(__name__)

IO_EXIT_CODE = 4


class UqflowCommand(BaseCommand):
    """Subclasses implement ``run`` instead of ``handle``."""

    def run(self, *args, **options):
        raise NotImplementedError('subclasses of UqflowCommand must provide a run() method')

    def handle(self, *args, **options):
        try:
            return self.run(*args, **options)
        except UqflowError as exc:
            raise CommandError(str(exc), returncode=exc.exit_code) from exc
        except OSError as exc:
            raise CommandError(f"I/O failure: {exc}", returncode=IO_EXIT_CODE) from exc

    def success(self, message: str):
        self.stdout.write(self.style.SUCCESS(message))
