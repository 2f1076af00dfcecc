"""Lateral line estimator tests package."""
