"""
Protocols: sequential rounds, Trotter layers, bond reduction
============================================================
"""

# %%
import numpy as np

from gmps import (
    GmpsSpec,
    protocol_report,
    random_pure_channel,
    random_symplectic,
    reduce_bond_entanglement,
    schmidt_decompose,
    trotterize,
)
from gmps.channels import GaussChannel, random_pure_state
from gmps.covmat import CovMat
from gmps.spectral import gamma_hat, phi_grid

rng = np.random.default_rng(5)

# %%
# One round of the measurement-based protocol with finitely squeezed bonds.
# The error against the ideal nested map falls like exp(-2 s).
rep = protocol_report(random_pure_state(4, rng), random_symplectic(2, rng, 0.2))
for s, e in zip(rep["s_bond"], rep["error"]):
    print(f"s = {s:4.1f}   error = {e:.2e}")
print("slope of log(error):", round(rep["slope"], 3))

# %%
# First-order Trotter layers for a nearest-neighbour quadratic Hamiltonian.
h1 = np.array([[1.0, 0.3], [0.3, 0.5]])
h2 = rng.normal(size=(4, 4))
h2 = h2 + h2.T
for J in (4, 8, 16, 32):
    print(J, trotterize(h1, h2, 6, 0.4, J).error())

# %%
# Schmidt form of the site map across bond | (bond, physical), then strip the
# bond modes that carry no entanglement.
ch = random_pure_channel(4, 1, rng)
form = schmidt_decompose(ch.cm, 2)
print("two-mode squeezings:", form.squeezings)
new = reduce_bond_entanglement(GmpsSpec.uniform(ch, 6))
phi = phi_grid(64)
print("M:", 2, "->", new.M, " gamma_hat change:", np.abs(gamma_hat(ch, phi) - gamma_hat(new.sites[0], phi)).max())

# %%
# Embed an M = 1 map into M = 2 with the second bond pair left idle. The
# reduction finds it and removes it.
core = random_pure_channel(2, 1, rng).entries
cm = np.eye(10)
idx = [0, 1, 4, 5, 8, 9]  # A1, B1, C among A1 A2 B1 B2 C
cm[np.ix_(idx, idx)] = core
padded = GaussChannel(4, 1, CovMat(cm), pure=True)
new = reduce_bond_entanglement(GmpsSpec.uniform(padded, 6))
print("M:", 2, "->", new.M, " bond entropy:", new.meta["bond_entropy"])
