"""Single-step Game of Life preimages: SAT encodings, gadget verification,
gadget search and circuit/Wang-tile compilation."""

from .grid import Cell, Pattern, Rect, TriPattern, emit_rle, parse_cells, parse_rle

__all__ = ["Cell", "Pattern", "Rect", "TriPattern", "emit_rle", "parse_cells", "parse_rle"]
