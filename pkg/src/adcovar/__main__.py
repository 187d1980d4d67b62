"""Allow running as python -m adcovar."""

from adcovar.cli import cli

if __name__ == "__main__":
    cli()
