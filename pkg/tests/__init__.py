"""Tests for the viscofit package."""
