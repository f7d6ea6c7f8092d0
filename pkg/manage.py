#!/usr/bin/env python
"""ivsolve entry point: ``python manage.py ivsolve <solve|bench|models|check|queue-status>``."""
import os
import sys


def main(argv=None):
    """Dispatch to the Django management commands, ``ivsolve`` and ``migrate`` included."""
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'config.settings')
    try:
        from django.core.management import execute_from_command_line
    except ImportError as exc:
        raise ImportError(
            "ivsolve needs Django; install requirements.txt into the active environment."
        ) from exc
    execute_from_command_line(sys.argv if argv is None else argv)


if __name__ == '__main__':
    main()
