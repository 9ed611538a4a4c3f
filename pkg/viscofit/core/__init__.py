"""Tensor algebra, file formats, errors and console helpers."""
