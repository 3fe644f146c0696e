"""Generate C programs with one seeded bug and a known triggering input."""

__version__ = "0.1.0"
