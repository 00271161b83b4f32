"""groundcheck: image-filter variants, contradiction scoring, ensembling."""

__version__ = "0.1.0"
