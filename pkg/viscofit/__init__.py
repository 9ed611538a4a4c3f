"""Identification of finite-strain viscoplastic hardening parameters and their sensitivity to measurement noise."""
