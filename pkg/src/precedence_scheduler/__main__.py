"""Entry point for `python -m precedence_scheduler`."""

from .cli import main

if __name__ == "__main__":
    raise SystemExit(main())
