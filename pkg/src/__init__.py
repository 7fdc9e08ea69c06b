"""Multiplicative-basis pipeline for finitely spaced modules."""
