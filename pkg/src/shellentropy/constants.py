"""Physical constants shared by every model (single source of truth)."""

import math

#: hbar^2 / (2 m_e) in eV * Angstrom^2
HBAR2_2ME_EV_A2 = 3.80998

#: hbar^2 / (2 m_N) in MeV * fm^2
HBAR2_2MN_MEV_FM2 = 20.7355

#: 3 (1 + ln pi): lower bound of S_r + S_k for unit-normalised 3D densities
EUR_UNIT_BOUND = 3.0 * (1.0 + math.log(math.pi))

#: Woods-Saxon parameters of the neutral sodium cluster mean field
CLUSTER_V0_EV = 6.0
CLUSTER_R0_A = 2.25
CLUSTER_A_A = 0.74

#: empirical oscillator quantum hbar*omega = 41 A^(-1/3) MeV
HO_OMEGA_COEFF_MEV = 41.0

#: spin (electrons) and spin x isospin (nucleons) degeneracy factors
ELECTRON_SPIN_DEGENERACY = 2
NUCLEON_SPIN_ISOSPIN_DEGENERACY = 4

ANGSTROM_PER_FM = 1.0e-5
