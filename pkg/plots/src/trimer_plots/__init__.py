"""Batch panel rendering for trimer sweep and trajectory CSV files."""

from .panels import PANEL_KINDS, PanelSpec, render
from .schema import SchemaError, read_table

__all__ = ["PANEL_KINDS", "PanelSpec", "render", "SchemaError", "read_table"]

__version__ = "0.1.0"
