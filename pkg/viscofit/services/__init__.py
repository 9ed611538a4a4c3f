"""Constitutive model, loading programs, noise, identification, sensitivity and metrics."""
