"""Physical constants used throughout the package.

Every value lives in this one table so that outputs are bit-reproducible and
the table can be echoed into file headers.
"""

import math

MU0 = 4.0e-7 * math.pi  # T m / A
MU_B = 9.274e-24  # J / T
G_FACTOR = 2.0
GAMMA_E = 2.0 * math.pi * 28.0e9  # rad / s / T
HBAR = 1.054571817e-34  # J s
K_B = 1.380649e-23  # J / K

CONSTANTS = {
    "mu0": (MU0, "T*m/A"),
    "mu_B": (MU_B, "J/T"),
    "g_factor": (G_FACTOR, "1"),
    "gamma_e": (GAMMA_E, "rad/s/T"),
    "hbar": (HBAR, "J*s"),
    "k_B": (K_B, "J/K"),
}


def constants_table():
    """Return the constants as ``{name: {"value": v, "unit": u}}``."""
    return {k: {"value": v, "unit": u} for k, (v, u) in CONSTANTS.items()}
