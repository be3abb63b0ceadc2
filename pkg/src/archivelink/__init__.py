"""Link software records and their publications to web archive captures."""

__version__ = "0.1.0"
