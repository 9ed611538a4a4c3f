"""Tests for the viscofit subcommands."""
