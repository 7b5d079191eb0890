"""
Building Gaussian MPS chains
============================

A site map is stored as the covariance matrix of its Jamiolkowski state:
bond ports A, B first, physical mode last. Gluing neighbouring sites with
EPR pairs and contracting gives the covariance matrix of the whole ring.
"""

# %%
import numpy as np

from gmps import GmpsSpec, build_gmps, gamma_hat, purity, random_pure_channel, validate_state
from gmps.lattice import circulant_defect
from gmps.spectral import dft_roundtrip, phi_grid

rng = np.random.default_rng(7)
site = random_pure_channel(2, 1, rng)  # M = 1 bond mode on each side, one physical mode
print(site.n_in, "bond ports,", site.n_out, "physical mode; CM shape", site.entries.shape)

# %%
# A ring of 12 sites. Pure maps give pure chains and translation invariance
# shows up as a block-circulant covariance matrix.
N = 12
cm = build_gmps(GmpsSpec.uniform(site, N))
print("valid:", validate_state(cm).valid, " pure:", purity(cm).pure)
print("block-circulant defect:", circulant_defect(cm))

# %%
# The same blocks come out of the Fourier picture: sample gamma_hat on the
# N-point grid and transform back.
blocks = dft_roundtrip(gamma_hat(site, phi_grid(N))).real
g = np.asarray(cm)
err = max(np.abs(g[2 * n:2 * n + 2, 0:2] - blocks[n]).max() for n in range(N))
print(f"chain vs inverse DFT: {err:.2e}")

# %%
# Open chains leave one A port and one B port dangling. They can be traced out
# or projected on the vacuum.
for ports in ("trace", "vacuum"):
    cm_open = build_gmps(GmpsSpec.uniform(site, N, boundary="open", open_ports=ports))
    print(ports, "pure:", purity(cm_open).pure)
