"""Command-line surface: subcommands and run manifests."""

from src.cli.commands import COMMANDS
from src.cli.manifest import RunManifest, read_manifest, write_manifest

__all__ = ["COMMANDS", "RunManifest", "read_manifest", "write_manifest"]
