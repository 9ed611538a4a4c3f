"""Default material data, numerical settings and exit codes for viscofit."""

from __future__ import annotations

# --- Pre-identified parameters of the steel 42CrMo4 ---
BULK_MODULUS = 135_600.0  # k [MPa]
SHEAR_MODULUS = 52_000.0  # mu [MPa]
VISCOSITY = 5.0e5  # eta [s]
STRESS_EXPONENT = 2.26  # m [-]
YIELD_STRESS = 335.0  # K [MPa]
OVERSTRESS_NORMALIZER = 1.0  # k0 [MPa], fixed

# --- Hardening parameters identified on noise-free data, one row per weighting ---
# Order: gamma [MPa], beta [-], c1 [MPa], c2 [MPa], kappa1 [1/MPa], kappa2 [1/MPa]
HARDENING_FULL_INV_COV = (435.22, 2.625, 1661.7, 24672.0, 0.003810, 0.004282)
HARDENING_IDENTITY = (321.92, 2.003, 1488.4, 20512.0, 0.004087, 0.004526)
HARDENING_DIAG_INV_COV = (312.60, 1.913, 1505.5, 20687.0, 0.004089, 0.004516)

# --- Two-source noise and Monte Carlo ---
SIGMA_UNCORRELATED = 10.0  # sigma1 [MPa]
SIGMA_CORRELATED = 5.0  # sigma2 [MPa]
N_NOISE = 10_000

# --- Synthetic torsion experiment ---
# Shear targets after the initial unloaded state; the amplitudes are synthetic defaults.
# The longest monotone segment (0.7) lets the slow backstress saturate.
TORSION_REVERSALS = (0.4, -0.2, 0.5)
TORSION_MAX_SHEAR = 0.5
# Dense sampling puts several points in every elastic unloading range.
TORSION_POINTS = 1000
# 1.7 total shear path at 1e-3 1/s keeps the overstress far below K.
TORSION_DURATION = 1700.0  # [s]
TORSION_SUBSTEPS = 1
# Largest shear step of the integrator; coarser substeps are refined to it.
MAX_SHEAR_INCREMENT = 1e-3

# --- Mechanics-based metric ---
METRIC_DURATION = 400.0  # [s] for the non-dimensional interval [0, 4]
METRIC_STEPS = 400
METRIC_HISTORIES = (1, 2)

# --- Levenberg-Marquardt ---
LM_LAMBDA0 = 1e-3
LM_LAMBDA_FACTOR = 10.0
LM_LAMBDA_MAX = 1e16
LM_TOL_G = 1e-8
LM_TOL_F = 1e-12
LM_MAX_ITER = 200
FD_REL_STEP = 1e-6
FD_ABS_STEP = 1e-8

# --- Integrator ---
DET_TOLERANCE = 1e-10
# Bound on ξ·‖D‖ for the inelastic increment per step, D being the largest rate direction.
FLOW_CAP = 0.5
ILLINOIS_MAX_ITER = 60

# --- Sensitivity ---
CONDITION_LIMIT = 1e12
MC_CHUNK_SIZE = 250

# --- Exit codes ---
EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NON_CONVERGENCE = 4
EXIT_NUMERICAL = 5
