"""Toolchain for an affine calculus of independence and its two-level refinement."""
