"""Exact arithmetic layer: field scalars, radical monomials and matrix helpers."""
