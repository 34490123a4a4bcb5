"""Compatibility entrypoint for launching the production CLI."""

from prod.cli import main


if __name__ == "__main__":
    raise SystemExit(main())
