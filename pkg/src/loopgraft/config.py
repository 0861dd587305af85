"""Environment-driven configuration.

All knobs have sane defaults and can be overridden per call; the env vars
exist so the CLI and service pick up deployment settings without flags.
"""

import os
from pathlib import Path

DEFAULT_ARCHIVE_URL = "https://files.rcsb.org/download"


def archive_url() -> str:
    return os.environ.get("LOOPGRAFT_ARCHIVE_URL", DEFAULT_ARCHIVE_URL).rstrip("/")


def cache_dir() -> Path:
    override = os.environ.get("LOOPGRAFT_CACHE_DIR")
    if override:
        return Path(override)
    return Path.home() / ".cache" / "loopgraft"


def fetch_retries() -> int:
    return int(os.environ.get("LOOPGRAFT_FETCH_RETRIES", "3"))


def adapter_command() -> str | None:
    return os.environ.get("LOOPGRAFT_ADAPTER_CMD")


def adapter_timeout() -> float:
    return float(os.environ.get("LOOPGRAFT_ADAPTER_TIMEOUT", "600"))


def job_workers() -> int:
    return int(os.environ.get("LOOPGRAFT_JOB_WORKERS", "2"))
