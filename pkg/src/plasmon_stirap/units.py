"""Physical constants and unit conversions.

Internal units: energies in eV, lengths in nm, hbar = 1 (so times are in
hbar/eV).  Dipole moments enter in Debye and are converted at the boundary.
"""

import math

HBAR_EV_S = 6.582119569e-16       # hbar, eV*s
HBAR_C_EV_NM = 197.3269804        # hbar*c, eV*nm
EPSILON_0_SI = 8.8541878128e-12   # vacuum permittivity, C^2 J^-1 m^-1
DEBYE_SI = 3.33564095e-30         # one Debye, C*m
EV_SI = 1.602176634e-19           # one eV, J

# One nanosecond in internal time units (hbar/eV).
NS = 1e-9 / HBAR_EV_S

# Prefactor of the squared emitter/mode coupling,
#   |kappa|^2 [eV] = COUPLING_PREFACTOR_EV * d[D]^2 * (n+1)^2
#                    * Im(alpha_n)[nm^(2n+1)] / (eps_b * r[nm]^(2n+4)),
# i.e. (1 Debye)^2 / (4 pi^2 eps0 nm^3) expressed in eV.
COUPLING_PREFACTOR_EV = DEBYE_SI**2 / (4.0 * math.pi**2 * EPSILON_0_SI * 1e-27) / EV_SI


def ns_to_internal(t_ns: float) -> float:
    return t_ns * NS


def internal_to_ns(t: float) -> float:
    return t / NS
