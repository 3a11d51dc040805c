"""Crystalline area-preserving flows on rectangles and lattices."""
