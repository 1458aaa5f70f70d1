"""Bundled example programs and platform models.

All profile numbers (latencies, energies, message sizes) are synthetic,
calibrated so the pipelines reproduce published aggregate data rates and
stay schedulable on the modeled platforms. They are not measurements of
real hardware.
"""

from importlib import resources


def path(name: str) -> str:
    """Filesystem path of a bundled fixture file."""
    return str(resources.files(__package__) / name)


def read(name: str) -> str:
    return (resources.files(__package__) / name).read_text(encoding="utf-8")
