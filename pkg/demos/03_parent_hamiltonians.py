"""
Parent Hamiltonians
===================

Every pure translation-invariant GMPS with one mode per site is the ground
state of a finite-range quadratic Hamiltonian. The converse only holds when
the determinant of the Hamiltonian symbol is a perfect square.
"""

# %%
import numpy as np

from gmps import (
    QuadHamiltonian,
    gamma_hat,
    ground_energy_density,
    ground_state,
    has_gmps_ground_state,
    parent_hamiltonian,
    random_pure_channel,
    rationalize,
)
from gmps.spectral import phi_grid

ch = random_pure_channel(4, 1, np.random.default_rng(11))  # M = 2
rc = rationalize(ch)
h = parent_hamiltonian(rc)
print("interaction range:", h.range)

# %%
phi = phi_grid(64)
print("ground state vs gamma_hat:", np.abs(ground_state(h)(phi) - gamma_hat(ch, phi)).max())
print("energy density:", ground_energy_density(h))
print("converse:", has_gmps_ground_state(h).status)

# %%
# H = diag(5/4 - cos(phi), 1) has det = 5/4 - cos(phi): a simple root, no square root.
res = has_gmps_ground_state(QuadHamiltonian([1.25, -1.0], [1.0], [0.0]))
print(res.status, "witness root", res.witness_root, "multiplicity", res.witness_multiplicity)

# %%
# Squaring the entry fixes that, and the ground state is then a GMPS.
res = has_gmps_ground_state(QuadHamiltonian([1.5625, -2.5, 1.0], [1.0], [0.0]))
print(res.status, "sqrt det coefficients", res.sqrt_det)
