"""Text artifacts: snapshots, event logs, series and provenance headers."""

__version__ = "0.1.0"
